"""Numerical cross-validation of the averaged predictions.

Nothing here knows about the change of variables: trajectories of the
original planar field are integrated with an embedded Dormand-Prince
5(4) pair (fixed-step classical RK4 is kept for order tests), periodic
orbits are measured on a Poincare section through the return map, and
:func:`compare` reduces a prediction/measurement pair to a verdict.

Crossing times are located inside accepted steps by bisection on the
cubic Hermite interpolant, which at the default 1e-10 tolerances is
accurate to well below 1e-6 in time.  Unstable cycles are measured by
integrating the reversed field, which swaps their stability; reported
slopes are mapped back to forward time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .averaging import KbmPrediction
from .system import PlanarPolySystem, compile_field

__all__ = [
    "IntegratorControls",
    "Trajectory",
    "CycleMeasurement",
    "ComparisonReport",
    "TransversalityError",
    "integrate",
    "measure_cycle",
    "compare",
    "samples_to_csv",
]

# Dormand-Prince 5(4) tableau.
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@dataclass
class IntegratorControls:
    """Knobs for the trajectory integrator."""

    method: str = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-10
    h_init: float = 1e-3
    h_fixed: float = 1e-3
    max_steps: int = 5_000_000
    blowup_norm: float = 1e6


@dataclass
class Trajectory:
    """Integration output sampled at accepted step endpoints."""

    t: np.ndarray
    states: np.ndarray
    truncated: bool
    steps: int
    max_error_estimate: float


@dataclass
class CycleMeasurement:
    """A periodic orbit pinned down by the return map.

    ``amplitude`` is max |x1| over one period, ``radius_rms`` the root
    mean square distance from the origin, ``convergence_rate`` the
    magnitude of the return-map slope at the fixed point in forward
    time (so < 1 exactly when the cycle attracts), and ``samples`` one
    period of (t, x1, x2) rows for export.
    """

    amplitude: float
    radius_rms: float
    period: float
    stable: bool
    convergence_rate: float
    section: str
    crossings: int
    reversed_time: bool
    samples: np.ndarray = field(repr=False, default=None)


class TransversalityError(RuntimeError):
    """Both Poincare sections met the flow tangentially."""


class _Stepper:
    """Adaptive Dormand-Prince stepping with FSAL reuse."""

    __slots__ = ("f", "t", "u", "v", "fu", "fv", "h", "rtol", "atol", "steps", "rejects", "max_err")

    def __init__(self, f, u, v, controls: IntegratorControls):
        self.f = f
        self.t = 0.0
        self.u, self.v = u, v
        self.fu, self.fv = f(u, v)
        self.h = controls.h_init
        self.rtol = controls.rtol
        self.atol = controls.atol
        self.steps = 0
        self.rejects = 0
        self.max_err = 0.0

    def advance(self, t_limit: float):
        """One accepted step, not overshooting t_limit.

        Returns (t0, u0, v0, fu0, fv0, t1, u1, v1, fu1, fv1), the raw
        material for Hermite interpolation, or None at the limit.
        """
        f = self.f
        t0, u0, v0 = self.t, self.u, self.v
        if t_limit - t0 <= 1e-14 * max(1.0, abs(t_limit)):
            return None
        fu1, fv1 = self.fu, self.fv
        h = min(self.h, t_limit - t0)
        while True:
            k1u, k1v = fu1, fv1
            yu = u0 + h * (_A21 * k1u)
            yv = v0 + h * (_A21 * k1v)
            k2u, k2v = f(yu, yv)
            yu = u0 + h * (_A31 * k1u + _A32 * k2u)
            yv = v0 + h * (_A31 * k1v + _A32 * k2v)
            k3u, k3v = f(yu, yv)
            yu = u0 + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
            yv = v0 + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
            k4u, k4v = f(yu, yv)
            yu = u0 + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
            yv = v0 + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
            k5u, k5v = f(yu, yv)
            yu = u0 + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
            yv = v0 + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
            k6u, k6v = f(yu, yv)
            u1 = u0 + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
            v1 = v0 + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
            k7u, k7v = f(u1, v1)
            eu = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
            ev = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
            su = self.atol + self.rtol * max(abs(u0), abs(u1))
            sv = self.atol + self.rtol * max(abs(v0), abs(v1))
            err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
            if err <= 1.0:
                break
            self.rejects += 1
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < 1e-14:
                raise ArithmeticError("step size underflow; the field may be singular here")
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        self.h = h * factor
        self.t = t0 + h
        self.u, self.v = u1, v1
        self.fu, self.fv = k7u, k7v
        self.steps += 1
        abs_err = max(abs(eu), abs(ev))
        if abs_err > self.max_err:
            self.max_err = abs_err
        return (t0, u0, v0, fu1, fv1, self.t, u1, v1, k7u, k7v)


def _hermite(rec, t: float) -> tuple[float, float]:
    t0, u0, v0, fu0, fv0, t1, u1, v1, fu1, fv1 = rec
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s2 * (3.0 - 2.0 * s)
    h11 = s2 * (s - 1.0)
    u = h00 * u0 + h10 * h * fu0 + h01 * u1 + h11 * h * fu1
    v = h00 * v0 + h10 * h * fv0 + h01 * v1 + h11 * h * fv1
    return u, v


def integrate(system: PlanarPolySystem, x0, t_end: float, controls: IntegratorControls | None = None) -> Trajectory:
    """Integrate the field from x0 for t in [0, t_end].

    Adaptive rk45 by default; ``controls.method = "rk4"`` runs the
    classical fixed-step scheme instead (no error estimate).  The
    trajectory is truncated, and flagged, if the state norm passes
    ``controls.blowup_norm``.
    """
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    controls = controls or IntegratorControls()
    f = compile_field(system)
    u, v = float(x0[0]), float(x0[1])
    ts = [0.0]
    states = [(u, v)]
    truncated = False

    if controls.method == "rk4":
        h = controls.h_fixed
        steps_total = int(round(t_end / h))
        t = 0.0
        for i in range(steps_total):
            k1u, k1v = f(u, v)
            k2u, k2v = f(u + 0.5 * h * k1u, v + 0.5 * h * k1v)
            k3u, k3v = f(u + 0.5 * h * k2u, v + 0.5 * h * k2v)
            k4u, k4v = f(u + h * k3u, v + h * k3v)
            u += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
            v += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
            t = (i + 1) * h
            ts.append(t)
            states.append((u, v))
            if abs(u) + abs(v) > controls.blowup_norm:
                truncated = True
                break
        return Trajectory(np.array(ts), np.array(states), truncated, len(ts) - 1, float("nan"))
    if controls.method != "rk45":
        raise ValueError(f"unknown integrator method {controls.method!r}")

    stepper = _Stepper(f, u, v, controls)
    while True:
        rec = stepper.advance(t_end)
        if rec is None:
            break
        ts.append(rec[5])
        states.append((rec[6], rec[7]))
        if abs(rec[6]) + abs(rec[7]) > controls.blowup_norm:
            truncated = True
            break
        if stepper.steps >= controls.max_steps:
            truncated = True
            break
    return Trajectory(np.array(ts), np.array(states), truncated, stepper.steps, stepper.max_err)


def _locate_crossing(rec, zero_idx: int, t_tol: float) -> float:
    """Bisect the Hermite interpolant for a sign change of one coordinate."""
    ta, tb = rec[0], rec[5]
    ga = (rec[1], rec[2])[zero_idx]
    gb = (rec[6], rec[7])[zero_idx]
    if ga == 0.0:
        return ta
    for _ in range(200):
        tm = 0.5 * (ta + tb)
        gm = _hermite(rec, tm)[zero_idx]
        if gm == 0.0:
            return tm
        if (gm > 0.0) == (gb > 0.0):
            tb, gb = tm, gm
        else:
            ta = tm
        if tb - ta <= t_tol:
            break
    return 0.5 * (ta + tb)


_SECTIONS = ((1, 0, "x2=0, x1>0"), (0, 1, "x1=0, x2>0"))


def _run_returns(f, start, controls, zero_idx, pos_idx, *, max_returns, stop, t_budget, floor=0.0):
    """Iterate the return map from ``start``.

    Yields (t, positive-coordinate value, state) per same-direction
    transversal crossing; the crossing direction locks on the first
    one seen.  ``stop`` is called with the crossing list after each
    crossing and may end the iteration.  A crossing inside ``floor``
    (or inside the 1e-8 numerical-origin scale, where the tangency
    guard below cannot tell a flat section from a dead orbit) ends the
    hunt with status "decayed".
    """
    stepper = _Stepper(f, start[0], start[1], controls)
    direction = 0
    crossings = []
    near_origin = max(floor, 1e-8)
    while stepper.steps < controls.max_steps and stepper.t < t_budget:
        rec = stepper.advance(t_budget)
        if rec is None:
            break
        if abs(rec[6]) + abs(rec[7]) > controls.blowup_norm:
            return crossings, "blowup"
        g0 = (rec[1], rec[2])[zero_idx]
        g1 = (rec[6], rec[7])[zero_idx]
        if g0 == 0.0 or (g0 > 0.0) == (g1 > 0.0):
            continue
        t_tol = 1e-12 * max(1.0, abs(rec[5]))
        tc = _locate_crossing(rec, zero_idx, t_tol)
        state = _hermite(rec, tc)
        if math.hypot(state[0], state[1]) < near_origin:
            return crossings, "decayed"
        if state[pos_idx] <= 0.0:
            continue
        speed = f(state[0], state[1])
        if abs(speed[zero_idx]) <= 1e-9 * (1.0 + math.hypot(speed[0], speed[1])):
            raise TransversalityError(
                f"flow is tangent to the section at t={tc:.6g}, point {state}"
            )
        this_dir = 1 if g1 > 0.0 else -1
        if direction == 0:
            direction = this_dir
        elif this_dir != direction:
            continue
        crossings.append((tc, state[pos_idx], state))
        if len(crossings) >= max_returns or stop(crossings):
            return crossings, "done"
    return crossings, "exhausted"


def measure_cycle(
    system: PlanarPolySystem,
    seed_radius: float,
    controls: IntegratorControls | None = None,
    *,
    reverse_time: bool = False,
    transient_skip: float | None = None,
    transient_cap: float = 2000.0,
    max_returns: int = 400,
    settle_rel: float = 1e-8,
    sample_count: int = 2048,
) -> CycleMeasurement | None:
    """Hunt for a periodic orbit with the return map.

    Starting from (seed_radius, 0) the trajectory is integrated past an
    initial transient (50/|tau| time units, capped), then section
    crossings are iterated until consecutive values agree to
    ``settle_rel``.  Returns None when trajectories decay to the
    origin, blow up, or fail to settle within the crossing budget; a
    measurement otherwise.  ``reverse_time=True`` integrates the
    reversed field (for cycles that repel in forward time) and reports
    the slope mapped back to forward time.

    Raises
    ------
    TransversalityError
        When the flow is tangent to both candidate sections.
    """
    if seed_radius <= 0.0:
        raise ValueError(f"seed_radius must be positive, got {seed_radius}")
    controls = controls or IntegratorControls()
    flt = system.to_float()
    base = compile_field(flt)
    f = (lambda u, v: (lambda d: (-d[0], -d[1]))(base(u, v))) if reverse_time else base

    tau = float(flt.jac[0, 0] + flt.jac[1, 1])
    if transient_skip is None:
        transient_skip = min(transient_cap, 50.0 / abs(tau)) if tau != 0.0 else 50.0

    # transient
    stepper = _Stepper(f, seed_radius, 0.0, controls)
    while stepper.t < transient_skip:
        rec = stepper.advance(transient_skip)
        if rec is None:
            break
        if abs(stepper.u) + abs(stepper.v) > controls.blowup_norm:
            return None
        if stepper.steps >= controls.max_steps:
            return None
    start = (stepper.u, stepper.v)
    if math.hypot(*start) < 1e-12 * max(1.0, seed_radius):
        return None  # already collapsed onto the origin

    decay_floor = 1e-7 * seed_radius

    def settled(crossings) -> bool:
        if len(crossings) < 2:
            return False
        x_prev, x_cur = crossings[-2][1], crossings[-1][1]
        return abs(x_cur - x_prev) <= settle_rel * max(abs(x_cur), 1e-300)

    last_error = None
    for zero_idx, pos_idx, label in _SECTIONS:
        try:
            crossings, status = _run_returns(
                f,
                start,
                controls,
                zero_idx,
                pos_idx,
                max_returns=max_returns,
                stop=lambda cs: settled(cs) or cs[-1][1] < decay_floor,
                t_budget=1e5,
                floor=decay_floor,
            )
        except TransversalityError as err:
            last_error = err
            continue
        if status in ("blowup", "decayed"):
            return None
        if not crossings:
            return None  # no rotation around the origin: nothing to measure
        if crossings[-1][1] < decay_floor:
            return None
        if not settled(crossings):
            return None
        x_star = crossings[-1][1]
        period = crossings[-1][0] - crossings[-2][0]
        return _finish_measurement(
            f,
            controls,
            zero_idx,
            pos_idx,
            label,
            x_star,
            period,
            len(crossings),
            reverse_time,
            sample_count,
        )
    raise last_error if last_error is not None else TransversalityError("no usable section")


def _section_state(zero_idx: int, pos_val: float) -> tuple[float, float]:
    return (pos_val, 0.0) if zero_idx == 1 else (0.0, pos_val)


def _one_return(f, controls, zero_idx, pos_idx, x_from: float, period_hint: float) -> float:
    start = _section_state(zero_idx, x_from)
    crossings, status = _run_returns(
        f,
        start,
        controls,
        zero_idx,
        pos_idx,
        max_returns=1,
        stop=lambda cs: True,
        t_budget=50.0 * period_hint,
    )
    if status != "done" or not crossings:
        raise ArithmeticError("return map evaluation failed to come back to the section")
    return crossings[0][1]


def _finish_measurement(
    f, controls, zero_idx, pos_idx, label, x_star, period, n_cross, reversed_time, sample_count
):
    # one clean period from the fixed point, densely sampled
    stepper = _Stepper(f, *_section_state(zero_idx, x_star), controls)
    records = []
    while True:
        rec = stepper.advance(period)
        if rec is None:
            break
        records.append(rec)
    samples = np.empty((sample_count + 1, 3))
    ri = 0
    for i in range(sample_count + 1):
        t = period * i / sample_count
        while ri < len(records) - 1 and records[ri][5] < t:
            ri += 1
        u, v = _hermite(records[ri], min(t, records[ri][5]))
        samples[i] = (t, u, v)
    amplitude = float(np.max(np.abs(samples[:, 1])))
    radius_rms = float(math.sqrt(np.mean(samples[:, 1] ** 2 + samples[:, 2] ** 2)))

    h = max(1e-4 * x_star, 1e-8)
    p_plus = _one_return(f, controls, zero_idx, pos_idx, x_star + h, period)
    p_minus = _one_return(f, controls, zero_idx, pos_idx, x_star - h, period)
    slope = (p_plus - p_minus) / (2.0 * h)
    if reversed_time:
        slope = math.inf if slope == 0.0 else 1.0 / slope
    return CycleMeasurement(
        amplitude=amplitude,
        radius_rms=radius_rms,
        period=period,
        stable=abs(slope) < 1.0,
        convergence_rate=abs(slope),
        section=label,
        crossings=n_cross,
        reversed_time=reversed_time,
        samples=samples,
    )


@dataclass
class ComparisonReport:
    """Prediction vs oracle, reduced to numbers and a verdict."""

    predicted_amplitude: float | None
    predicted_period: float | None
    measured_amplitude: float | None
    measured_period: float | None
    amplitude_rel_err: float | None
    period_rel_err: float | None
    stability_match: bool | None
    verdict: str
    amp_tol: float
    period_tol: float


def compare(
    prediction: KbmPrediction,
    curve: np.ndarray | None,
    measurement: CycleMeasurement | None,
    amp_tol: float = 0.1,
    period_tol: float = 0.1,
) -> ComparisonReport:
    """Judge a prediction against the oracle measurement.

    Verdicts: ``agreement`` when both sides report a cycle within
    tolerance (or both report none), ``degenerate`` when averaging was
    inconclusive (p3 = 0), ``disagreement`` otherwise.  A disagreement
    is a result, not an error.
    """
    pred_amp = None
    pred_period = None
    if prediction.exists:
        pred_period = 2.0 * math.pi / (math.sqrt(prediction.delta) * prediction.omega0)
        if curve is not None:
            pred_amp = float(np.max(np.abs(curve[:, 1])))
    meas_amp = measurement.amplitude if measurement is not None else None
    meas_period = measurement.period if measurement is not None else None

    amp_err = None
    period_err = None
    stability_match = None
    if prediction.degenerate:
        verdict = "degenerate"
    elif prediction.exists and measurement is not None:
        if pred_amp is not None and meas_amp:
            amp_err = abs(pred_amp - meas_amp) / abs(meas_amp)
        if meas_period:
            period_err = abs(pred_period - meas_period) / abs(meas_period)
        stability_match = (prediction.stability == "stable_supercritical") == measurement.stable
        ok = (
            amp_err is not None
            and amp_err <= amp_tol
            and period_err is not None
            and period_err <= period_tol
            and stability_match
        )
        verdict = "agreement" if ok else "disagreement"
    elif not prediction.exists and measurement is None:
        verdict = "agreement"
    else:
        verdict = "disagreement"
    return ComparisonReport(
        predicted_amplitude=pred_amp,
        predicted_period=pred_period,
        measured_amplitude=meas_amp,
        measured_period=meas_period,
        amplitude_rel_err=amp_err,
        period_rel_err=period_err,
        stability_match=stability_match,
        verdict=verdict,
        amp_tol=amp_tol,
        period_tol=period_tol,
    )


def samples_to_csv(samples: np.ndarray) -> str:
    """Serialize (t, x1, x2) rows; floats use repr so output is stable."""
    lines = ["t,x1,x2"]
    for row in samples:
        lines.append(f"{float(row[0])!r},{float(row[1])!r},{float(row[2])!r}")
    return "\n".join(lines) + "\n"
