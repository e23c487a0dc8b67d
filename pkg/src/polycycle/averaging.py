"""Averaged cycle prediction for the reduced second-order equation.

After the change of variables, z = (H(X))_1 satisfies

    z'' - tau z' + delta z = G2 . lambda_2(z, z') + G3 . lambda_3(z, z') + h.o.t.

Near a Hopf point tau is a small parameter; rescaling time by
sqrt(delta) and amplitude by sqrt(|tau|) puts the equation in weakly
perturbed oscillator form, and first-order averaging of the slow
amplitude/phase flow predicts whether an isolated periodic orbit
exists, its amplitude, frequency and stability.  The quadratic block G2
averages to zero over a period; the cubic block enters through two
moments,

    p3 = -(sqrt(delta)/8) g2 - (3 delta^(3/2)/8) g4,
    q3 = (3/8) g1 + (delta/8) g3,

with (g1, g2, g3, g4) the components of G3.  A cycle exists exactly
when sign(tau) = sign(p3) and p3 != 0.

Two amplitude formulas are carried, named by whether the damping term
of the slow flow carries the 1/sqrt(delta) factor of the time
rescaling.  The "scaled" variant keeps it and gives

    r0^2 = sqrt(delta) / (2 |p3|),

while the "unscaled" variant drops it and gives
r0^2 = delta / (2 |p3|).  They agree at delta = 1 and differ by
delta^(1/4) otherwise; the acceptance suite discriminates empirically
on a family with delta far from 1 and the scaled form is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .change_of_variables import ChangeOfVariables
from .inversion import InverseSeries, p_operator, r2_operator
from .monomials import as_fraction_matrix, l_matrix, r_matrix, s_check, s_hat
from .system import PlanarPolySystem

__all__ = [
    "GCoefficients",
    "KbmPrediction",
    "FORMULA_VARIANTS",
    "g_coefficients",
    "p3_q3",
    "predict_cycle",
    "cycle_curve",
]

FORMULA_VARIANTS = ("scaled", "unscaled")


@dataclass(frozen=True)
class GCoefficients:
    """Quadratic and cubic coefficient rows of the reduced equation."""

    g2: np.ndarray
    g3: np.ndarray

    def to_float(self) -> "GCoefficients":
        return GCoefficients(np.asarray(self.g2, dtype=float), np.asarray(self.g3, dtype=float))


def _gradient_drift_column(k: int, jac: np.ndarray, theta_k: np.ndarray) -> np.ndarray:
    """Column of quadratic/cubic terms sourced by d/dt acting on Theta_k.

    This is the linear-velocity part of the chain rule: row 2 of
    Theta_k differentiates through lambda_k and picks up the Jacobian.
    """
    exact = jac.dtype == object
    lift_u_t = s_hat(k - 1, 1, exact).T
    lift_v_t = s_check(k - 1, 1, exact).T
    row2 = theta_k[1, :]
    return (jac[0, 0] * lift_u_t + jac[0, 1] * lift_v_t) @ (r_matrix(k, exact).T @ row2) + (
        jac[1, 0] * lift_u_t + jac[1, 1] * lift_v_t
    ) @ (l_matrix(k, exact).T @ row2)


def _velocity_quadratic_column(theta2: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """Cubic terms from the quadratic field velocity meeting Theta_2."""
    exact = theta2.dtype == object
    lift_u_t = s_hat(2, 1, exact).T
    lift_v_t = s_check(2, 1, exact).T
    a21, a22, a23 = theta2[1, 0], theta2[1, 1], theta2[1, 2]
    return (2 * a21 * lift_u_t + a22 * lift_v_t) @ phi2[0, :] + (
        a22 * lift_u_t + 2 * a23 * lift_v_t
    ) @ phi2[1, :]


def g_coefficients(
    system: PlanarPolySystem, cov: ChangeOfVariables, inv: InverseSeries
) -> GCoefficients:
    """Quadratic and cubic blocks G2, G3 of the reduced equation.

    Assembled from the solved change of variables, its truncated
    inverse and the original field; exact inputs give exact rows.  The
    independent check is dynamic: along any trajectory X(t) with
    z = (H(X))_1, the residual z'' - tau z' + delta z - G2.lambda_2 -
    G3.lambda_3 must shrink like the fourth power of the amplitude.
    """
    exact = system.exact and cov.exact and inv.exact
    if exact:
        jac = as_fraction_matrix(system.jac)
        gamma = as_fraction_matrix(cov.gamma)
        phi2 = as_fraction_matrix(system.phi_matrix(2))
        phi3 = as_fraction_matrix(system.phi_matrix(3))
        theta2 = as_fraction_matrix(cov.theta(2))
        theta3 = as_fraction_matrix(cov.theta(3))
        ginv, xi2, xi3 = inv.gamma_inv, inv.xi2, inv.xi3
    else:
        sys_f = system.to_float()
        cov_f = cov.to_float()
        inv_f = inv.to_float()
        jac, gamma = sys_f.jac, cov_f.gamma
        phi2, phi3 = sys_f.phi_matrix(2), sys_f.phi_matrix(3)
        theta2, theta3 = cov_f.theta(2), cov_f.theta(3)
        ginv, xi2, xi3 = inv_f.gamma_inv, inv_f.xi2, inv_f.xi3

    p2 = p_operator(2, ginv)
    p3 = p_operator(3, ginv)
    r2 = r2_operator(ginv, xi2)
    drift2 = _gradient_drift_column(2, jac, theta2)
    drift3 = _gradient_drift_column(3, jac, theta3)
    vel_quad = _velocity_quadratic_column(theta2, phi2)

    g2 = (gamma @ jac @ xi2 + gamma @ phi2 @ p2)[1, :] + p2.T @ drift2
    g3 = (
        (gamma @ jac @ xi3 + gamma @ phi2 @ r2 + gamma @ phi3 @ p3)[1, :]
        + r2.T @ drift2
        + p3.T @ (drift3 + vel_quad)
    )
    return GCoefficients(g2=g2, g3=g3)


def p3_q3(g3, delta) -> tuple[float, float]:
    """Averaged cubic moments of G3 on the delta-scaled circle.

    Closed form of the two first-order averaging integrals; the
    quadrature oracle in the tests integrates the defining expressions
    numerically and must agree to 1e-10.
    """
    d = float(delta)
    if d <= 0.0:
        raise ValueError(f"averaging requires delta > 0, got {delta!r}")
    g = [float(x) for x in np.asarray(g3).reshape(-1)]
    if len(g) != 4:
        raise ValueError(f"G3 must have 4 entries, got {len(g)}")
    sd = math.sqrt(d)
    p3 = -(sd / 8.0) * g[1] - (3.0 * d * sd / 8.0) * g[3]
    q3 = (3.0 / 8.0) * g[0] + (d / 8.0) * g[2]
    return p3, q3


@dataclass(frozen=True)
class KbmPrediction:
    """Outcome of first-order averaging at a fixed parameter value.

    ``exists`` is the sign test sign(tau) = sign(p3); when it fails the
    radius, frequency and amplitude fields are None.  ``stability`` is
    ``"stable_supercritical"`` (tau > 0), ``"unstable_subcritical"``
    (tau < 0), or ``"undetermined"`` when p3 vanishes and first-order
    averaging cannot decide existence at all.
    """

    tau: float
    delta: float
    p3: float
    q3: float
    variant: str
    exists: bool
    r0: float | None = None
    omega0: float | None = None
    z_amplitude: float | None = None
    stability: str | None = None

    @property
    def degenerate(self) -> bool:
        return self.stability == "undetermined"


def predict_cycle(tau, delta, p3, q3, variant: str = "scaled", p3_tol: float = 1e-12) -> KbmPrediction:
    """Existence, amplitude, frequency and stability from the averages.

    Parameters
    ----------
    tau, delta : float
        Trace and determinant of the Jacobian (delta > 0).
    p3, q3 : float
        Averaged cubic moments from :func:`p3_q3`.
    variant : str
        ``"scaled"`` (default) or ``"unscaled"``; see the module
        docstring for the difference.
    p3_tol : float
        |p3| at or below this is treated as degenerate: first-order
        averaging is inconclusive, reported distinctly from a clean
        "no cycle" verdict.
    """
    if variant not in FORMULA_VARIANTS:
        raise ValueError(f"variant must be one of {FORMULA_VARIANTS}, got {variant!r}")
    tau_f, delta_f, p3_f, q3_f = float(tau), float(delta), float(p3), float(q3)
    if delta_f <= 0.0:
        raise ValueError(f"averaging requires delta > 0, got {delta!r}")
    base = dict(tau=tau_f, delta=delta_f, p3=p3_f, q3=q3_f, variant=variant)
    if abs(p3_f) <= p3_tol:
        return KbmPrediction(exists=False, stability="undetermined", **base)
    if tau_f == 0.0 or (tau_f > 0.0) != (p3_f > 0.0):
        return KbmPrediction(exists=False, **base)
    sd = math.sqrt(delta_f)
    if variant == "scaled":
        r0 = math.sqrt(sd / (2.0 * abs(p3_f)))
        omega0 = 1.0 - (tau_f / (2.0 * sd)) * (q3_f / p3_f)
    else:
        r0 = math.sqrt(delta_f / (2.0 * abs(p3_f)))
        omega0 = 1.0 - (tau_f / 2.0) * (q3_f / p3_f)
    return KbmPrediction(
        exists=True,
        r0=r0,
        omega0=omega0,
        z_amplitude=math.sqrt(abs(tau_f)) * r0,
        stability="stable_supercritical" if tau_f > 0.0 else "unstable_subcritical",
        **base,
    )


def cycle_curve(cov: ChangeOfVariables, prediction: KbmPrediction, sample_count: int = 256) -> np.ndarray:
    """Sample the predicted cycle back in the original coordinates.

    The averaged solution is z = sqrt(|tau|) r0 sin(sqrt(delta) w0 t)
    with its derivative as the second scalar coordinate; mapping the
    pair through Gamma^{-1} gives the orbit to leading order.  Returns
    an array of rows (t, x1, x2) covering one period.
    """
    if not prediction.exists:
        raise ValueError("cycle_curve needs a prediction with exists=True")
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    if prediction.omega0 is None or prediction.omega0 <= 0.0:
        raise ValueError(f"predicted frequency is not positive: {prediction.omega0!r}")
    gamma = cov.to_float().gamma
    ginv = np.linalg.inv(gamma)
    amp = prediction.z_amplitude
    rate = math.sqrt(prediction.delta) * prediction.omega0
    period = 2.0 * math.pi / rate
    out = np.empty((sample_count, 3))
    for i in range(sample_count):
        t = period * i / sample_count
        z = amp * math.sin(rate * t)
        zdot = amp * rate * math.cos(rate * t)
        out[i, 0] = t
        out[i, 1] = ginv[0, 0] * z + ginv[0, 1] * zdot
        out[i, 2] = ginv[1, 0] * z + ginv[1, 1] * zdot
    return out
