"""Exact-rational and floating-point linear solvers.

The exact route works on lists of Fractions and certifies consistency
and rank without tolerance; the float route uses SVD-based rank with a
relative threshold and least squares.  Both pick the minimum-norm
element of the solution affine space so results are canonical.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "fraction_rows",
    "rref",
    "rank_exact",
    "nullspace_exact",
    "solve_min_norm_exact",
    "rank_float",
    "nullspace_dim_float",
    "solve_min_norm_float",
]

SV_REL_TOL = 1e-10


def fraction_rows(matrix) -> list[list[Fraction]]:
    arr = np.asarray(matrix, dtype=object)
    return [[x if isinstance(x, Fraction) else Fraction(x) for x in row] for row in arr]


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form (in a copy) and the pivot columns."""
    rows = [list(r) for r in rows]
    m = len(rows)
    n = len(rows[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        pr = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank_exact(matrix) -> int:
    rows = fraction_rows(matrix)
    if not rows:
        return 0
    _, pivots = rref(rows)
    return len(pivots)


def nullspace_exact(matrix) -> list[list[Fraction]]:
    """Basis of the kernel, one vector per free column."""
    rows = fraction_rows(matrix)
    if not rows:
        return []
    n = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -red[i][f]
        basis.append(v)
    return basis


def _solve_square_exact(g: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    d = len(g)
    aug = [g[i] + [rhs[i]] for i in range(d)]
    red, pivots = rref(aug)
    if len(pivots) != d or any(p >= d for p in pivots):
        raise ArithmeticError("square exact system unexpectedly singular")
    sol = [Fraction(0)] * d
    for i, c in enumerate(pivots):
        sol[c] = red[i][d]
    return sol


def solve_min_norm_exact(matrix, rhs) -> list[Fraction] | None:
    """Minimum-norm exact solution of A x = b, or None when inconsistent."""
    a = fraction_rows(matrix)
    b = [x if isinstance(x, Fraction) else Fraction(x) for x in rhs]
    if not a:
        return []
    n = len(a[0])
    aug = [a[i] + [b[i]] for i in range(len(a))]
    red, pivots = rref(aug)
    if pivots and pivots[-1] == n:
        return None
    particular = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        particular[c] = red[i][n]
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return particular
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -red[i][f]
        basis.append(v)
    d = len(basis)
    gram = [[sum(basis[i][k] * basis[j][k] for k in range(n)) for j in range(d)] for i in range(d)]
    proj = [sum(basis[i][k] * particular[k] for k in range(n)) for i in range(d)]
    coeff = _solve_square_exact(gram, proj)
    return [particular[k] - sum(coeff[i] * basis[i][k] for i in range(d)) for k in range(n)]


def rank_float(matrix, rel_tol: float = SV_REL_TOL) -> int:
    a = np.asarray(matrix, dtype=float)
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def nullspace_dim_float(matrix, rel_tol: float = SV_REL_TOL) -> int:
    a = np.asarray(matrix, dtype=float)
    return a.shape[1] - rank_float(a, rel_tol)


def solve_min_norm_float(matrix, rhs, rel_tol: float = SV_REL_TOL, consistency_tol: float = 1e-9):
    """Minimum-norm least-squares solution, or None when inconsistent.

    Consistency means the residual is small relative to the data: a
    genuinely unsolvable system leaves an O(1) residual, roundoff
    leaves ~1e-13, so the default threshold separates them cleanly.
    """
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.size == 0:
        return np.zeros(0)
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=rel_tol)
    res = float(np.linalg.norm(a @ x - b))
    scale = max(1.0, float(np.linalg.norm(b)), float(np.linalg.norm(a @ x)))
    if res > consistency_tol * scale:
        return None
    return x
