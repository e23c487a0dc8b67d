"""Truncated power-series inversion of the change of variables.

The inverse of H(X) = Gamma X + Theta_2 lambda_2(X) + Theta_3 lambda_3(X) + ...
is computed through cubic order,

    X = Gamma^{-1} Y + Xi_2 lambda_2(Y) + Xi_3 lambda_3(Y) + O(|Y|^4),

using two operators on monomial vectors: ``p_operator(k, A)`` is the
matrix with lambda_k(A Y) = P_k(A) lambda_k(Y) (functoriality of the
monomial map), and ``r2_operator(A, B)`` collects the cubic cross terms
of lambda_2 evaluated at A Y + B lambda_2(Y),

    lambda_2(A Y + B lambda_2(Y)) = P_2(A) lambda_2(Y)
                                    + R2(A, B) lambda_3(Y) + O(|Y|^4).

Composing H with the truncation leaves a quartic-order defect; the
empirical trust radius estimates where that defect stays small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .change_of_variables import ChangeOfVariables
from .monomials import as_fraction_matrix, eval_lambda, l_matrix, r_matrix, s_check, s_hat

__all__ = [
    "InverseSeries",
    "p_operator",
    "r2_operator",
    "invert_to_cubic",
    "composition_residual",
    "residual_slope",
    "trust_radius",
]


def p_operator(k: int, a) -> np.ndarray:
    """Matrix of the degree-k monomial map applied after A.

    Satisfies lambda_k(A y) = p_operator(k, A) lambda_k(y) for every y;
    in particular it is multiplicative in A.  Exact for int/Fraction
    input, float64 otherwise.
    """
    if k < 1:
        raise ValueError(f"p_operator needs k >= 1, got {k}")
    mat = np.asarray(a)
    if mat.shape != (2, 2):
        raise ValueError(f"A must be 2x2, got {mat.shape}")
    exact = mat.dtype == object
    if exact:
        mat = as_fraction_matrix(mat)
    cur = mat
    for deg in range(2, k + 1):
        lift_u = s_hat(deg - 1, 1, exact)
        lift_v = s_check(deg - 1, 1, exact)
        cur = (
            r_matrix(deg, exact) @ cur @ (lift_u * mat[0, 0] + lift_v * mat[0, 1])
            + l_matrix(deg, exact) @ cur @ (lift_u * mat[1, 0] + lift_v * mat[1, 1])
        )
        cur = cur / deg if not exact else cur * Fraction(1, deg)
    return cur


def r2_operator(a, b) -> np.ndarray:
    """Cubic cross-term block of lambda_2 at A y + B lambda_2(y)."""
    mat_a = np.asarray(a)
    mat_b = np.asarray(b)
    if mat_a.shape != (2, 2) or mat_b.shape != (2, 3):
        raise ValueError(f"expected shapes (2,2) and (2,3), got {mat_a.shape} and {mat_b.shape}")
    exact = mat_a.dtype == object or mat_b.dtype == object
    if exact:
        mat_a = as_fraction_matrix(mat_a)
        mat_b = as_fraction_matrix(mat_b)
    lift_u = s_hat(2, 1, exact)
    lift_v = s_check(2, 1, exact)
    return r_matrix(2, exact) @ mat_b @ (lift_u * mat_a[0, 0] + lift_v * mat_a[0, 1]) + l_matrix(
        2, exact
    ) @ mat_b @ (lift_u * mat_a[1, 0] + lift_v * mat_a[1, 1])


@dataclass(frozen=True)
class InverseSeries:
    """Truncated inverse X = Gamma^{-1} Y + Xi_2 lambda_2 + Xi_3 lambda_3."""

    gamma_inv: np.ndarray
    xi2: np.ndarray
    xi3: np.ndarray

    @property
    def exact(self) -> bool:
        return self.gamma_inv.dtype == object

    def evaluate(self, point) -> np.ndarray:
        u, v = point
        vec = np.array([u, v], dtype=self.gamma_inv.dtype if self.exact else float)
        return (
            self.gamma_inv @ vec
            + self.xi2 @ eval_lambda(2, (u, v))
            + self.xi3 @ eval_lambda(3, (u, v))
        )

    def to_float(self) -> "InverseSeries":
        if not self.exact:
            return self
        return InverseSeries(
            self.gamma_inv.astype(float), self.xi2.astype(float), self.xi3.astype(float)
        )


def _inverse2(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0:
        raise ZeroDivisionError("Gamma is singular; the change of variables cannot be inverted")
    if m.dtype == object:
        d = Fraction(det) if not isinstance(det, Fraction) else det
        inv = np.empty((2, 2), dtype=object)
        inv[0, 0] = m[1, 1] / d
        inv[0, 1] = -m[0, 1] / d
        inv[1, 0] = -m[1, 0] / d
        inv[1, 1] = m[0, 0] / d
        return inv
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=float) / det


def invert_to_cubic(cov: ChangeOfVariables) -> InverseSeries:
    """Series inverse of a solved change of variables through cubic order."""
    gamma = cov.gamma
    if cov.exact:
        gamma = as_fraction_matrix(gamma)
    ginv = _inverse2(gamma)
    theta2 = cov.theta(2)
    theta3 = cov.theta(3)
    if cov.exact:
        theta2 = as_fraction_matrix(theta2)
        theta3 = as_fraction_matrix(theta3)
    xi2 = -(ginv @ theta2 @ p_operator(2, ginv))
    xi3 = -(ginv @ (theta2 @ r2_operator(ginv, xi2) + theta3 @ p_operator(3, ginv)))
    return InverseSeries(gamma_inv=ginv, xi2=xi2, xi3=xi3)


def composition_residual(
    cov: ChangeOfVariables, inv: InverseSeries, radii, directions: int = 24
) -> list[tuple[float, float]]:
    """Max norm of H(H_trunc^{-1}(Y)) - Y over circles |Y| = r.

    Returns (radius, residual) pairs, floating point; directions are
    equally spaced so the scan is deterministic.
    """
    cov_f = cov.to_float()
    inv_f = inv.to_float()
    out = []
    angles = [2.0 * math.pi * i / directions for i in range(directions)]
    for r in radii:
        worst = 0.0
        for ang in angles:
            y = (r * math.cos(ang), r * math.sin(ang))
            x = inv_f.evaluate(y)
            h = cov_f.h_evaluate((float(x[0]), float(x[1])))
            res = math.hypot(float(h[0]) - y[0], float(h[1]) - y[1])
            if res > worst:
                worst = res
        out.append((float(r), worst))
    return out


def residual_slope(points: list[tuple[float, float]]) -> float | None:
    """Least-squares slope of log residual against log radius.

    Pairs with zero residual are dropped (an exactly linear H has no
    defect at all); None when fewer than two usable points remain.
    """
    usable = [(r, res) for r, res in points if res > 0.0 and r > 0.0]
    if len(usable) < 2:
        return None
    xs = np.log([r for r, _ in usable])
    ys = np.log([res for _, res in usable])
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


def trust_radius(
    cov: ChangeOfVariables,
    inv: InverseSeries,
    rel_defect: float = 0.1,
    r_min: float = 1e-4,
    r_max: float = 4.0,
    per_decade: int = 8,
) -> float:
    """Largest scanned radius where the composition defect stays small.

    The defect bound is ``rel_defect`` times the radius; the scan is a
    geometric grid, so the answer is a resolution-limited estimate, not
    a certified bound.  Returns 0.0 when even the smallest radius
    violates the bound.
    """
    n_pts = max(2, int(math.ceil(per_decade * math.log10(r_max / r_min))) + 1)
    grid = np.geomspace(r_min, r_max, n_pts)
    pairs = composition_residual(cov, inv, grid)
    best = 0.0
    for r, res in pairs:
        if res <= rel_defect * r:
            best = r
        else:
            break
    return best
