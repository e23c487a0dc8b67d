"""Polynomial change of variables taking a planar system to scalar form.

We look for H(X) = Gamma X + sum_{k=2}^{m} Theta_k lambda_k(X) such
that z = (H(X))_1 obeys a second-order equation: the defining condition
is that the time derivative of the first component of H equals its
second component along trajectories.  Expanding that condition in the
monomial basis gives one homogeneous linear system over the entries of
Gamma and the Theta blocks; this module assembles it, solves it with a
deterministic policy, and certifies solutions by independent polynomial
expansion.

Gamma is generated by two concordant matrices built from the Jacobian

    Gamma_1 = [[1, 0], [j11, j12]],   Gamma_2 = [[0, 1], [j21, j22]],

so Gamma = a Gamma_1 + b Gamma_2 automatically ties its second row to
the first row propagated by J.  The remaining unknowns are the Theta
entries, coupled degree by degree through shift/differentiation
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linalg import (
    nullspace_dim_float,
    nullspace_exact,
    rank_exact,
    rank_float,
    solve_min_norm_exact,
    solve_min_norm_float,
)
from .monomials import eval_lambda, l_matrix, r_matrix, s_check, s_hat
from .polyops import poly_add, poly_from_lambda_row, poly_max_abs, poly_scale
from .system import PlanarPolySystem, lie_derivative

__all__ = [
    "ChangeOfVariables",
    "ConstraintSystem",
    "NoSolutionError",
    "GAMMA_CANDIDATES",
    "min_degree_bound",
    "gamma_basis",
    "gamma_matrix",
    "build_T",
    "assemble_constraints",
    "solve_theta",
    "residual_condition33",
    "counting_identity",
]

# (a, b) scan order; deterministic across runs.
GAMMA_CANDIDATES = ((1, 0), (0, 1), (1, 1), (1, -1))


def min_degree_bound(n: int) -> int:
    """Smallest Theta degree m making unknowns outnumber equations.

    For a system of nonlinear degree n the constraint block has
    (m^2 + (2n+1) m + n(n+1) - 6) / 2 equations against m^2 + 3m - 2
    unknowns; this returns the least m for which unknowns exceed
    equations, i.e. the ceiling of (2n - 5 + sqrt(8n^2 - 16n + 25)) / 2.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"degree bound needs n >= 2, got {n!r}")
    disc = 8 * n * n - 16 * n + 25
    m = 1
    while 2 * m - 2 * n + 5 < 0 or (2 * m - 2 * n + 5) ** 2 < disc:
        m += 1
    return m


def gamma_basis(jac: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The two concordant generators Gamma_1, Gamma_2 of the Jacobian."""
    one = 1 if jac.dtype == object else 1.0
    zero = 0 if jac.dtype == object else 0.0
    g1 = np.array([[one, zero], [jac[0, 0], jac[0, 1]]], dtype=jac.dtype)
    g2 = np.array([[zero, one], [jac[1, 0], jac[1, 1]]], dtype=jac.dtype)
    return g1, g2


def gamma_matrix(jac: np.ndarray, a, b) -> np.ndarray:
    g1, g2 = gamma_basis(jac)
    return a * g1 + b * g2


def _det2(m: np.ndarray):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def _zeros(shape: tuple[int, ...], exact: bool) -> np.ndarray:
    if not exact:
        return np.zeros(shape)
    z = np.empty(shape, dtype=object)
    z.reshape(-1)[:] = [0] * z.size
    return z


def build_T(row: int, j: int, k: int, phi_j) -> np.ndarray:
    """Degree-lifting block of the constraint system.

    T[row, j, k] collects how the degree-j field block phi_j multiplies
    a degree-(k-1) monomial vector up to degree j + k - 1: summing over
    the entries of row ``row`` of phi_j,

        T = sum_l phi_j[row, l] S_check(k-1, l-1) S_hat(k+l-2, j-l+1),

    a k x (j + k) matrix.  For j = 1 pass the Jacobian as phi_1.
    """
    if row not in (1, 2):
        raise ValueError(f"row must be 1 or 2, got {row!r}")
    if j < 1 or k < 2:
        raise ValueError(f"build_T needs j >= 1 and k >= 2, got j={j}, k={k}")
    phi = np.asarray(phi_j)
    if phi.shape != (2, j + 1):
        raise ValueError(f"phi_{j} must have shape (2, {j + 1}), got {phi.shape}")
    exact = phi.dtype == object
    out = _zeros((k, j + k), exact)
    for l in range(1, j + 2):
        c = phi[row - 1, l - 1]
        if c == 0:
            continue
        sel = s_check(k - 1, l - 1, exact) @ s_hat(k + l - 2, j - l + 1, exact)
        out = out + c * sel
    return out


@dataclass(frozen=True)
class ConstraintSystem:
    """Assembled linear system over the change-of-variables unknowns.

    When ``gamma_params`` is None the system is homogeneous with (a, b)
    as the two leading unknowns; otherwise (a, b) are substituted and
    ``rhs`` carries the induced inhomogeneity.
    """

    matrix: np.ndarray
    rhs: np.ndarray | None
    unknown_layout: tuple
    m: int
    n: int
    gamma_params: tuple | None

    @property
    def unknown_count(self) -> int:
        return self.matrix.shape[1]

    @property
    def equation_count(self) -> int:
        return self.matrix.shape[0]

    @property
    def exact(self) -> bool:
        return self.matrix.dtype == object

    def rank(self) -> int:
        if self.equation_count == 0 or self.unknown_count == 0:
            return 0
        if self.exact:
            return rank_exact(self.matrix)
        return rank_float(self.matrix)

    def nullspace_dimension(self) -> int:
        if self.unknown_count == 0:
            return 0
        if self.equation_count == 0:
            return self.unknown_count
        if self.exact:
            return len(nullspace_exact(self.matrix))
        return nullspace_dim_float(self.matrix)


def _theta_layout(m: int) -> list[tuple]:
    labels = []
    for k in range(2, m + 1):
        for row in (1, 2):
            for col in range(1, k + 2):
                labels.append(("theta", k, row, col))
    return labels


def assemble_constraints(
    system: PlanarPolySystem, m: int, gamma_params: tuple | None = None
) -> ConstraintSystem:
    """Assemble the degree-by-degree constraints on Gamma and Theta.

    Parameters
    ----------
    system : PlanarPolySystem
        The planar system; its exactness decides the matrix dtype.
    m : int
        Highest Theta degree carried by the candidate change of
        variables (at least 2).
    gamma_params : tuple, optional
        Fixed (a, b).  When omitted the system is left homogeneous in
        all of (a, b, Theta).

    Returns
    -------
    ConstraintSystem
        One row block per monomial degree k = 2 .. m + n - 1, each of
        height k + 1.
    """
    if m < 2:
        raise ValueError(f"theta degree m must be >= 2, got {m}")
    n = system.degree
    exact = system.exact
    free = gamma_params is None

    theta_cols: dict[tuple, int] = {}
    layout: list[tuple] = []
    if free:
        layout.extend([("a",), ("b",)])
    for label in _theta_layout(m):
        theta_cols[label] = len(layout)
        layout.append(label)

    n_unknowns = len(layout)
    k_range = range(2, m + n)
    n_rows = sum(k + 1 for k in k_range)
    a_mat = _zeros((n_rows, n_unknowns), exact)
    rhs = None if free else _zeros((n_rows,), exact)

    jac = system.jac
    row0 = 0
    for k in k_range:
        height = k + 1
        # contribution of the degree-k field block through Gamma's first row
        if 2 <= k <= n:
            phi_k = system.phi_matrix(k)
            if free:
                for i in range(height):
                    a_mat[row0 + i, 0] = phi_k[0, i]
                    a_mat[row0 + i, 1] = phi_k[1, i]
            else:
                a, b = gamma_params
                for i in range(height):
                    rhs[row0 + i] = -(a * phi_k[0, i] + b * phi_k[1, i])
        # derivative couplings: row 1 of each Theta_l with j + l - 1 = k
        for l in range(2, m + 1):
            j = k - l + 1
            if j < 1 or j > n:
                continue
            phi_j = jac if j == 1 else system.phi_matrix(j)
            if j > 1 and all(x == 0 for x in phi_j.reshape(-1)):
                continue
            t1 = build_T(1, j, l, phi_j)
            t2 = build_T(2, j, l, phi_j)
            block = t1.T @ r_matrix(l, exact).T + t2.T @ l_matrix(l, exact).T
            c0 = theta_cols[("theta", l, 1, 1)]
            for i in range(height):
                for cc in range(l + 1):
                    if block[i, cc] != 0:
                        a_mat[row0 + i, c0 + cc] = a_mat[row0 + i, c0 + cc] + block[i, cc]
        # direct appearance of row 2 of Theta_k
        if k <= m:
            c0 = theta_cols[("theta", k, 2, 1)]
            minus_one = -1 if exact else -1.0
            for i in range(height):
                a_mat[row0 + i, c0 + i] = minus_one
        row0 += height

    return ConstraintSystem(
        matrix=a_mat,
        rhs=rhs,
        unknown_layout=tuple(layout),
        m=m,
        n=n,
        gamma_params=gamma_params,
    )


@dataclass(frozen=True)
class ChangeOfVariables:
    """Solved change of variables H(X) = Gamma X + sum Theta_k lambda_k."""

    gamma_params: tuple
    gamma: np.ndarray
    thetas: dict[int, np.ndarray]

    @property
    def m(self) -> int:
        return max(self.thetas) if self.thetas else 1

    @property
    def exact(self) -> bool:
        return self.gamma.dtype == object

    def theta(self, k: int) -> np.ndarray:
        """Degree-k block, zero-filled when absent (k >= 2)."""
        if k < 2:
            raise ValueError(f"theta blocks start at degree 2, got {k}")
        if k in self.thetas:
            return self.thetas[k]
        if self.exact:
            z = np.empty((2, k + 1), dtype=object)
            z.reshape(-1)[:] = [0] * (2 * (k + 1))
            return z
        return np.zeros((2, k + 1))

    def h_evaluate(self, point) -> np.ndarray:
        u, v = point
        vec = np.array([u, v], dtype=self.gamma.dtype if self.exact else float)
        out = self.gamma @ vec
        for k in sorted(self.thetas):
            out = out + self.thetas[k] @ eval_lambda(k, (u, v))
        return out

    def component_polynomial(self, row: int):
        """Component ``row`` (1 or 2) of H as an exponent-dict polynomial."""
        if row not in (1, 2):
            raise ValueError(f"row must be 1 or 2, got {row!r}")
        p = {}
        if self.gamma[row - 1, 0] != 0:
            p[(1, 0)] = self.gamma[row - 1, 0]
        if self.gamma[row - 1, 1] != 0:
            p[(0, 1)] = self.gamma[row - 1, 1]
        for k in sorted(self.thetas):
            p = poly_add(p, poly_from_lambda_row(k, self.thetas[k][row - 1]))
        return p

    def to_float(self) -> "ChangeOfVariables":
        if not self.exact:
            return self
        return ChangeOfVariables(
            gamma_params=tuple(float(x) for x in self.gamma_params),
            gamma=self.gamma.astype(float),
            thetas={k: v.astype(float) for k, v in self.thetas.items()},
        )


class NoSolutionError(RuntimeError):
    """Raised when no admissible Gamma/Theta pair exists up to the degree cap.

    ``attempts`` records, per (m, (a, b)) pair, the determinant of the
    candidate Gamma and the rank of the assembled system, so callers
    can report why the search failed.
    """

    def __init__(self, message: str, attempts: list[dict]):
        super().__init__(message)
        self.attempts = attempts


def _extract_cov(
    solution, layout: tuple, gamma: np.ndarray, gamma_params: tuple, m: int, exact: bool
) -> ChangeOfVariables:
    thetas: dict[int, np.ndarray] = {}
    for k in range(2, m + 1):
        thetas[k] = _zeros((2, k + 1), exact)
    for value, label in zip(solution, layout):
        _, k, row, col = label
        thetas[k][row - 1, col - 1] = value
    return ChangeOfVariables(gamma_params=gamma_params, gamma=gamma, thetas=thetas)


def solve_theta(
    system: PlanarPolySystem,
    m: int | None = None,
    arithmetic: str | None = None,
    candidates: tuple = GAMMA_CANDIDATES,
    extra_degrees: int = 3,
) -> ChangeOfVariables:
    """Find a change of variables with invertible Gamma.

    The (a, b) parameters are scanned in the fixed order of
    ``candidates``; for each candidate with det Gamma != 0 the
    inhomogeneous system in the Theta entries is solved exactly (or in
    floats), keeping the minimum-norm solution.  When ``m`` is omitted
    the search starts at the counting bound for the system's degree and
    retries up to ``extra_degrees`` higher before giving up.

    Raises
    ------
    NoSolutionError
        When every (m, candidate) pair is singular or inconsistent.
    """
    n = system.degree
    if arithmetic not in (None, "exact", "float"):
        raise ValueError(f"arithmetic must be 'exact' or 'float', got {arithmetic!r}")
    exact = system.exact if arithmetic is None else arithmetic == "exact"
    work = system
    if exact and not system.exact:
        work = PlanarPolySystem(
            _to_fraction_matrix(system.jac), tuple(_to_fraction_matrix(p) for p in system.phi)
        )
    elif not exact and system.exact:
        work = system.to_float()

    if m is not None:
        if m < 2:
            raise ValueError(f"theta degree m must be >= 2, got {m}")
        degrees = [m]
    else:
        start = min_degree_bound(n) if n >= 2 else 2
        degrees = list(range(start, start + extra_degrees + 1))

    attempts: list[dict] = []
    for m_try in degrees:
        for a, b in candidates:
            if exact:
                a, b = Fraction(a), Fraction(b)
            else:
                a, b = float(a), float(b)
            gamma = gamma_matrix(work.jac, a, b)
            det = _det2(gamma)
            entry = {"m": m_try, "params": (a, b), "det": det, "consistent": None, "rank": None}
            attempts.append(entry)
            if det == 0 or (not exact and abs(det) < 1e-12):
                continue
            cs = assemble_constraints(work, m_try, gamma_params=(a, b))
            if exact:
                sol = solve_min_norm_exact(cs.matrix, cs.rhs)
            else:
                sol = solve_min_norm_float(cs.matrix, cs.rhs)
            entry["consistent"] = sol is not None
            if sol is None:
                entry["rank"] = cs.rank()
                continue
            return _extract_cov(sol, cs.unknown_layout, gamma, (a, b), m_try, exact)
    raise NoSolutionError(
        f"no admissible change of variables up to theta degree {degrees[-1]} "
        f"(system degree {n}; tried {len(attempts)} candidate/degree pairs)",
        attempts,
    )


def _to_fraction_matrix(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    out.reshape(-1)[:] = [
        x if isinstance(x, (int, Fraction)) else Fraction(float(x)) for x in a.reshape(-1)
    ]
    return out


def residual_condition33(cov: ChangeOfVariables, system: PlanarPolySystem):
    """Certificate for the defining condition, by independent expansion.

    Expands d/dt (H(X))_1 - (H(X))_2 along the field as a polynomial in
    the phase variables using plain coefficient arithmetic (no shift
    matrices) and returns the largest coefficient magnitude.  Exact
    inputs give an exact (Fraction or int) result, so a correct change
    of variables certifies to literal zero.
    """
    if cov.exact != system.exact:
        if not cov.exact:
            system = system.to_float()
        else:
            cov = cov.to_float()
            system = system.to_float()
    h1 = cov.component_polynomial(1)
    h2 = cov.component_polynomial(2)
    res = poly_add(lie_derivative(h1, system), poly_scale(h2, -1))
    return poly_max_abs(res)


def counting_identity(n: int, m: int) -> tuple[int, int]:
    """Closed-form (unknowns, equations) counts for the free system."""
    u = m * m + 3 * m - 2
    e = (m * m + (2 * n + 1) * m + n * (n + 1) - 6) // 2
    return u, e
