"""Monomial vectors of planar points and the matrices that act on them.

The degree-k monomial vector of a point (u, v) is

    lambda_k(u, v) = (u^k, u^(k-1) v, ..., u v^(k-1), v^k),

a column of length k + 1 whose entry i holds u^(k-i) v^i.  Everything
downstream (the change of variables, its inversion, the averaged
coefficients) is bookkeeping on these vectors, driven by four integer
matrix families:

* ``R`` and ``L`` encode differentiation along a trajectory,

      d/dt lambda_k = (u' R_k + v' L_k) lambda_{k-1},

* ``S_hat`` and ``S_check`` encode multiplication by coordinate powers,

      u^p lambda_k = S_hat(k, p) lambda_{k+p},
      v^p lambda_k = S_check(k, p) lambda_{k+p}.

Matrices are returned as ``object`` arrays holding Python ints when
``exact`` is true (they combine losslessly with ints and
:class:`fractions.Fraction`) and as ``float64`` arrays otherwise.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "eval_lambda",
    "structural_matrix",
    "r_matrix",
    "l_matrix",
    "s_hat",
    "s_check",
]

STRUCTURAL_KINDS = ("R", "L", "S_hat", "S_check")


def _check_degree(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"degree k must be an integer >= 1, got {k!r}")


def eval_lambda(k: int, point) -> np.ndarray:
    """Evaluate the degree-k monomial vector at a planar point.

    Parameters
    ----------
    k : int
        Degree, at least 1.
    point : pair of numbers
        Coordinates (u, v).  Ints and Fractions are kept exact; any
        float coordinate switches the result to float64.

    Returns
    -------
    numpy.ndarray
        Length k + 1, entry i equal to u^(k-i) * v^i.
    """
    _check_degree(k)
    u, v = point
    entries = [u ** (k - i) * v ** i for i in range(k + 1)]
    if isinstance(u, float) or isinstance(v, float):
        return np.array(entries, dtype=float)
    return np.array(entries, dtype=object)


def _int_matrix(rows: list[list[int]], exact: bool) -> np.ndarray:
    if exact:
        return np.array(rows, dtype=object)
    return np.array(rows, dtype=float)


def r_matrix(k: int, exact: bool = True) -> np.ndarray:
    """(k+1) x k differentiation weights for the u-velocity.

    Row i carries k - i at column i; the last row is zero.
    """
    _check_degree(k)
    rows = [[k - i if j == i else 0 for j in range(k)] for i in range(k + 1)]
    return _int_matrix(rows, exact)


def l_matrix(k: int, exact: bool = True) -> np.ndarray:
    """(k+1) x k differentiation weights for the v-velocity.

    The first row is zero; row i + 1 carries i + 1 at column i.
    """
    _check_degree(k)
    rows = [[i if j == i - 1 else 0 for j in range(k)] for i in range(k + 1)]
    return _int_matrix(rows, exact)


def s_hat(k: int, p: int, exact: bool = True) -> np.ndarray:
    """(k+1) x (k+p+1) selector with the identity in the leading block.

    Multiplication by u^p: u^p lambda_k = s_hat(k, p) lambda_{k+p}.
    """
    _check_degree(k)
    if not isinstance(p, (int, np.integer)) or p < 0:
        raise ValueError(f"power p must be an integer >= 0, got {p!r}")
    rows = [[1 if j == i else 0 for j in range(k + p + 1)] for i in range(k + 1)]
    return _int_matrix(rows, exact)


def s_check(k: int, p: int, exact: bool = True) -> np.ndarray:
    """(k+1) x (k+p+1) selector with the identity in the trailing block.

    Multiplication by v^p: v^p lambda_k = s_check(k, p) lambda_{k+p}.
    """
    _check_degree(k)
    if not isinstance(p, (int, np.integer)) or p < 0:
        raise ValueError(f"power p must be an integer >= 0, got {p!r}")
    rows = [[1 if j == i + p else 0 for j in range(k + p + 1)] for i in range(k + 1)]
    return _int_matrix(rows, exact)


def structural_matrix(kind: str, k: int, p: int | None = None, exact: bool = True) -> np.ndarray:
    """Build one of the four structural matrices by name.

    Parameters
    ----------
    kind : str
        One of ``"R"``, ``"L"``, ``"S_hat"``, ``"S_check"``.
    k : int
        Degree index, at least 1.
    p : int, optional
        Power shift; required (and >= 0) for the S families, rejected
        for R and L.
    exact : bool
        Integer object entries when true, float64 otherwise.
    """
    if kind in ("R", "L"):
        if p is not None:
            raise ValueError(f"kind {kind!r} takes no power argument")
        return r_matrix(k, exact) if kind == "R" else l_matrix(k, exact)
    if kind in ("S_hat", "S_check"):
        if p is None:
            raise ValueError(f"kind {kind!r} requires the power p")
        return s_hat(k, p, exact) if kind == "S_hat" else s_check(k, p, exact)
    raise ValueError(f"unknown structural matrix kind {kind!r}; expected one of {STRUCTURAL_KINDS}")


def as_fraction_matrix(a) -> np.ndarray:
    """Copy a matrix (or vector) into an object array of Fractions."""
    arr = np.asarray(a)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    for i, x in enumerate(flat_in):
        flat_out[i] = x if isinstance(x, Fraction) else Fraction(x)
    return out
