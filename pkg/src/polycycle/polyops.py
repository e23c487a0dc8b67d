"""Dictionary-backed polynomials in two variables.

A polynomial is a dict mapping exponent pairs (i, j) to coefficients,
representing sum c[i, j] * u^i * v^j.  Coefficients may be ints,
Fractions, or floats; the operations never convert types on their own,
so exact inputs stay exact.  This tiny kernel exists so that algebraic
identities produced by the matrix machinery can be certified by an
independent route (plain expansion and coefficient comparison).
"""

from __future__ import annotations

__all__ = [
    "poly_add",
    "poly_scale",
    "poly_mul",
    "poly_diff",
    "poly_eval",
    "poly_max_abs",
    "poly_from_lambda_row",
]

Poly = dict


def _cleaned(p: Poly) -> Poly:
    return {e: c for e, c in p.items() if c != 0}


def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + c
    return _cleaned(out)


def poly_scale(p: Poly, c) -> Poly:
    if c == 0:
        return {}
    return {e: c * v for e, v in p.items()}


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            e = (i1 + i2, j1 + j2)
            out[e] = out.get(e, 0) + c1 * c2
    return _cleaned(out)


def poly_diff(p: Poly, var: int) -> Poly:
    """Partial derivative; var 0 differentiates in u, var 1 in v."""
    if var not in (0, 1):
        raise ValueError(f"var must be 0 or 1, got {var!r}")
    out: Poly = {}
    for (i, j), c in p.items():
        if var == 0 and i > 0:
            out[(i - 1, j)] = out.get((i - 1, j), 0) + i * c
        elif var == 1 and j > 0:
            out[(i, j - 1)] = out.get((i, j - 1), 0) + j * c
    return _cleaned(out)


def poly_eval(p: Poly, u, v):
    total = 0
    for (i, j), c in p.items():
        total = total + c * u ** i * v ** j
    return total


def poly_max_abs(p: Poly):
    """Largest coefficient magnitude; 0 for the zero polynomial."""
    best = 0
    for c in p.values():
        mag = -c if c < 0 else c
        if mag > best:
            best = mag
    return best


def poly_from_lambda_row(k: int, row) -> Poly:
    """Turn a length-(k+1) coefficient row over lambda_k into a dict.

    Entry i of the row multiplies u^(k-i) v^i.
    """
    entries = list(row)
    if len(entries) != k + 1:
        raise ValueError(f"lambda_{k} row must have {k + 1} entries, got {len(entries)}")
    out: Poly = {}
    for i, c in enumerate(entries):
        if c != 0:
            out[(k - i, i)] = c
    return out
