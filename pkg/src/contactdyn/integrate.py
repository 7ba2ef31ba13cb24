"""Trajectory generation and numerically careful time averaging.

Steppers operate on flat state vectors through a right-hand-side callable
``rhs(t, y) -> dy``; chart packing (which component is s, q, p, ...) is the
caller's business and is recorded in the trajectory's ``layout``.  Three
steppers are provided: classical fixed-step RK4, an embedded RK4(5) pair
with cubic-Hermite dense output, and Euler-Maruyama for the harmonically
trapped Langevin system (with a vectorized ensemble driver sharing the same
arithmetic path, so single runs and ensemble members are bit-identical for
matching seeds).

Averages use trapezoidal quadrature under compensated summation so that
horizons of 10^5+ samples do not accumulate roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import NonFiniteError, DomainError

__all__ = [
    "Trajectory",
    "NoiseSpec",
    "AverageAccumulator",
    "LangevinEnsembleStats",
    "integrate_fixed",
    "integrate_adaptive",
    "euler_maruyama_langevin",
    "langevin_ensemble",
    "trapezoid_average",
    "time_average",
    "write_trajectory_csv",
    "StepUnderflowError",
]

# fixed-step samples are recorded every this many steps unless overridden
DEFAULT_SAMPLE_EVERY = 10

# adaptive step controller bounds
_SAFETY = 0.9
_SHRINK_MIN = 0.2
_GROW_MAX = 5.0
_UNDERFLOW_FRACTION = 1e-12   # abort when h < this fraction of the horizon

_FIELD_ERRORS = (
    NonFiniteError,
    DomainError,
    OverflowError,
    FloatingPointError,
    ZeroDivisionError,
)


class StepUnderflowError(RuntimeError):
    """Adaptive step shrank below the underflow threshold (stiffness signal)."""


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of a flat state vector.

    Attributes
    ----------
    times : ndarray (N,)
        Strictly increasing sample times.
    states : ndarray (N, d)
        One state row per sample, components named by `layout`.
    layout : tuple of str
        Component names, e.g. ("s", "q[0]", "p[0]").
    meta : dict
        System name, parameters, integrator, step/tolerance, seed, counters.
    aborted : bool
        True if integration stopped early; the recorded samples are the
        valid prefix.
    abort_reason : str
        Machine-readable reason ("" when not aborted).
    """

    times: np.ndarray
    states: np.ndarray
    layout: tuple
    meta: dict = field(default_factory=dict)
    aborted: bool = False
    abort_reason: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "layout", tuple(self.layout))
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise ValueError(
                f"times {times.shape} and states {states.shape} are inconsistent"
            )
        if states.shape[1] != len(self.layout):
            raise ValueError(
                f"layout names {len(self.layout)} components, states have {states.shape[1]}"
            )
        if times.size == 0:
            raise ValueError("trajectory must contain at least the initial sample")
        if times.size > 1 and not (np.diff(times) > 0).all():
            raise ValueError("times must be strictly increasing")
        if not (np.isfinite(times).all() and np.isfinite(states).all()):
            raise NonFiniteError("trajectory samples must be finite")

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def n_samples(self) -> int:
        return self.times.size

    def column(self, name: str) -> np.ndarray:
        """All samples of one named component."""
        return self.states[:, self.layout.index(name)]


@dataclass(frozen=True)
class NoiseSpec:
    """Thermal-noise parameters for the trapped Langevin system.

    The diffusion amplitude is sqrt(2 m gamma k_BT); k_BT = 0 is accepted
    and reduces the stepper to deterministic Euler.
    """

    m: float
    gamma: float
    k_BT: float
    seed: int

    def __post_init__(self):
        if not (self.m > 0 and self.gamma > 0):
            raise ValueError("need m > 0 and gamma > 0")
        if not (self.k_BT >= 0 and math.isfinite(self.k_BT)):
            raise ValueError("need finite k_BT >= 0")
        if not math.isfinite(self.amplitude):
            raise ValueError("diffusion amplitude must be finite")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def amplitude(self) -> float:
        """sqrt(2 m gamma k_BT), the noise strength multiplying dW."""
        return math.sqrt(2.0 * self.m * self.gamma * self.k_BT)


def _neumaier(total: float, comp: float, x: float) -> tuple[float, float]:
    t = total + x
    if abs(total) >= abs(x):
        comp += (total - t) + x
    else:
        comp += (x - t) + total
    return t, comp


class AverageAccumulator:
    """Streaming trapezoidal time average with compensated summation.

    Feed (t, value) samples in increasing t; `average` is the running
    integral divided by the elapsed window.  Accumulators over adjacent
    windows merge associatively: the merge inserts the connecting trapezoid
    between the left window's last sample and the right window's first.
    """

    __slots__ = ("_sum", "_comp", "t_first", "v_first", "t_last", "v_last", "count")

    def __init__(self):
        self._sum = 0.0
        self._comp = 0.0
        self.t_first = None
        self.v_first = None
        self.t_last = None
        self.v_last = None
        self.count = 0

    def add(self, t: float, value: float) -> None:
        t, value = float(t), float(value)
        if self.count == 0:
            self.t_first, self.v_first = t, value
        else:
            dt = t - self.t_last
            if dt <= 0:
                raise ValueError("samples must arrive in strictly increasing time")
            self._sum, self._comp = _neumaier(
                self._sum, self._comp, dt * 0.5 * (value + self.v_last)
            )
        self.t_last, self.v_last = t, value
        self.count += 1

    @property
    def elapsed(self) -> float:
        return 0.0 if self.count == 0 else self.t_last - self.t_first

    @property
    def integral(self) -> float:
        return self._sum + self._comp

    @property
    def average(self) -> float:
        if self.count == 0:
            raise ValueError("no samples accumulated")
        if self.elapsed == 0.0:
            return self.v_last
        return self.integral / self.elapsed

    def merge(self, other: "AverageAccumulator") -> "AverageAccumulator":
        """Combine with an accumulator over the adjacent later window."""
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        if other.t_first < self.t_last:
            raise ValueError("windows overlap; merge expects adjacent windows")
        out = AverageAccumulator()
        out.t_first, out.v_first = self.t_first, self.v_first
        out.t_last, out.v_last = other.t_last, other.v_last
        out.count = self.count + other.count
        total, comp = _neumaier(self._sum, self._comp, other._sum)
        total, comp = _neumaier(total, comp, other._comp)
        gap = other.t_first - self.t_last
        if gap > 0:
            total, comp = _neumaier(
                total, comp, gap * 0.5 * (self.v_last + other.v_first)
            )
        out._sum, out._comp = total, comp
        return out


def trapezoid_average(times: np.ndarray, values: np.ndarray, t0: float = 0.0) -> float:
    """Trapezoidal time average of sampled values over [max(t0, start), end].

    Uses exact compensated summation (math.fsum) of the trapezoid
    contributions.  If t0 falls between samples the boundary value is
    obtained by linear interpolation, so shifting the window start does not
    quantize to the sample grid.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size != values.size or times.size == 0:
        raise ValueError("times and values must be equal-length and non-empty")
    if t0 > times[-1]:
        raise ValueError(f"window start {t0} lies beyond the final sample {times[-1]}")
    if t0 > times[0]:
        i = int(np.searchsorted(times, t0, side="left"))
        if times[i] > t0:
            w = (t0 - times[i - 1]) / (times[i] - times[i - 1])
            v0 = (1 - w) * values[i - 1] + w * values[i]
            times = np.concatenate(([t0], times[i:]))
            values = np.concatenate(([v0], values[i:]))
        else:
            times, values = times[i:], values[i:]
    if times.size == 1:
        return float(values[0])
    dts = np.diff(times)
    contributions = dts * 0.5 * (values[1:] + values[:-1])
    return math.fsum(contributions.tolist()) / (times[-1] - times[0])


def time_average(traj: Trajectory, f, t0: float = 0.0, allow_aborted: bool = False) -> float:
    """Trapezoidal time average of an observable along a trajectory.

    ``f`` is either an ndarray of per-sample values or a callable
    ``f(t, state_row) -> float`` applied to every sample.  Aborted
    trajectories are rejected unless `allow_aborted` is set.
    """
    if traj.aborted and not allow_aborted:
        raise ValueError(f"trajectory aborted ({traj.abort_reason}); average skipped")
    if callable(f):
        values = np.array(
            [f(t, row) for t, row in zip(traj.times, traj.states)], dtype=float
        )
    else:
        values = np.asarray(f, dtype=float)
    return trapezoid_average(traj.times, values, t0=t0)


# ---------------------------------------------------------------------------
# fixed-step RK4


def integrate_fixed(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    T: float,
    dt: float,
    *,
    layout: Sequence[str],
    sample_every: int = DEFAULT_SAMPLE_EVERY,
    meta: dict | None = None,
) -> Trajectory:
    """Classical 4th-order Runge-Kutta with a shortened final step onto T.

    Samples are recorded at the initial state, every `sample_every`-th step,
    and at the final time.  On the first non-finite state (or an evaluation
    error from `rhs`) the trajectory is truncated at the last good sample
    and returned with ``aborted=True`` and a machine-readable reason.

    Parameters
    ----------
    rhs : callable
        (t, y) -> dy/dt as a flat ndarray.
    y0 : sequence of float
        Initial state, matching `layout`.
    T, dt : float
        Horizon (> 0) and step (0 < dt <= T).
    """
    if not (T > 0):
        raise ValueError("need T > 0")
    if not (0 < dt <= T):
        raise ValueError("need 0 < dt <= T")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1 or y.size != len(layout):
        raise ValueError(f"y0 must be a flat vector of length {len(layout)}")

    n_full = int(math.floor(T / dt + 1e-12))
    rem = T - n_full * dt
    if rem < 1e-12 * dt:
        rem = 0.0

    times = [0.0]
    states = [y.copy()]
    aborted = False
    reason = ""
    t = 0.0
    n_steps = n_full + (1 if rem > 0 else 0)
    for k in range(n_steps):
        h = dt if k < n_full else rem
        try:
            with np.errstate(all="ignore"):
                k1 = rhs(t, y)
                k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
                k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
                k4 = rhs(t + h, y + h * k3)
                y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        except _FIELD_ERRORS as exc:
            aborted, reason = True, f"field evaluation failed at t={t:.6g}: {exc}"
            break
        t_new = T if k == n_steps - 1 else (k + 1) * dt
        if not np.isfinite(y_new).all():
            aborted, reason = True, f"non-finite state at t={t_new:.6g}"
            break
        y, t = y_new, t_new
        if (k + 1) % sample_every == 0 or k == n_steps - 1:
            if t > times[-1]:
                times.append(t)
                states.append(y.copy())

    info = dict(meta or {})
    info.setdefault("integrator", "rk4")
    info.update(dt=dt, T=T, sample_every=sample_every)
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        layout=tuple(layout),
        meta=info,
        aborted=aborted,
        abort_reason=reason,
    )


# ---------------------------------------------------------------------------
# embedded RK4(5), Fehlberg coefficients, cubic Hermite dense output

_C = np.array([0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2])
_A = [
    np.array([]),
    np.array([1 / 4]),
    np.array([3 / 32, 9 / 32]),
    np.array([1932 / 2197, -7200 / 2197, 7296 / 2197]),
    np.array([439 / 216, -8.0, 3680 / 513, -845 / 4104]),
    np.array([-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40]),
]
_B4 = np.array([25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0])
_ERR = np.array([1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55])


def _hermite(theta: float, y0, d0, y1, d1, h: float):
    t2, t3 = theta * theta, theta * theta * theta
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + theta) * h * d0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * d1
    )


def integrate_adaptive(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    T: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    *,
    layout: Sequence[str],
    sample_interval: float | None = None,
    first_step: float | None = None,
    meta: dict | None = None,
) -> Trajectory:
    """Embedded Runge-Kutta 4(5) with proportional step control.

    The 4th-order solution is propagated; the embedded 5th-order difference
    drives the controller h <- h * clip(0.9 err^(-1/5), 0.2, 5).  Samples
    are produced on a uniform grid of spacing `sample_interval` (default
    T/1000) by cubic Hermite interpolation using the stage-1 derivatives at
    both step ends, plus the exact endpoint T.

    A step shrinking below 1e-12 * T aborts the trajectory (stiffness or
    singularity signal); evaluation failures shrink the step first and only
    abort on underflow.
    """
    if not (T > 0):
        raise ValueError("need T > 0")
    if not (rel_tol > 0 and abs_tol > 0):
        raise ValueError("tolerances must be positive")
    if sample_interval is None:
        sample_interval = T / 1000.0
    if not (0 < sample_interval <= T):
        raise ValueError("need 0 < sample_interval <= T")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1 or y.size != len(layout):
        raise ValueError(f"y0 must be a flat vector of length {len(layout)}")

    h_min = _UNDERFLOW_FRACTION * T
    h = first_step if first_step is not None else min(T / 100.0, 1.0)
    h = min(h, T)

    times = [0.0]
    states = [y.copy()]
    next_sample = sample_interval
    t = 0.0
    aborted = False
    reason = ""
    n_accept = n_reject = 0
    d_left = None  # derivative at the left end of the current step

    while t < T and not aborted:
        h = min(h, T - t)
        if h < h_min:
            aborted, reason = True, (
                f"step underflow at t={t:.6g} (h={h:.3e} < {h_min:.3e})"
            )
            break
        try:
            with np.errstate(all="ignore"):
                if d_left is None:
                    d_left = rhs(t, y)
                k = [d_left]
                for i in range(1, 6):
                    yi = y + h * (np.stack(k, axis=0).T @ _A[i])
                    k.append(rhs(t + _C[i] * h, yi))
                kmat = np.stack(k, axis=0)
                y_new = y + h * (kmat.T @ _B4)
                err_vec = h * (kmat.T @ _ERR)
        except _FIELD_ERRORS as exc:
            h *= _SHRINK_MIN
            n_reject += 1
            if h < h_min:
                aborted, reason = True, (
                    f"field evaluation failed at t={t:.6g} with no recoverable step: {exc}"
                )
            continue
        if not np.isfinite(y_new).all():
            h *= _SHRINK_MIN
            n_reject += 1
            continue
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if not math.isfinite(err):
            h *= _SHRINK_MIN
            n_reject += 1
            continue
        if err <= 1.0:
            t_new = t + h
            try:
                d_right = rhs(t_new, y_new)
            except _FIELD_ERRORS as exc:
                aborted, reason = True, (
                    f"field evaluation failed at accepted state t={t_new:.6g}: {exc}"
                )
                break
            # dense output over (t, t_new]
            while next_sample <= t_new + 1e-14 * T and next_sample < T - 1e-14 * T:
                theta = (next_sample - t) / h
                ys = _hermite(theta, y, d_left, y_new, d_right, h)
                if next_sample > times[-1]:
                    times.append(next_sample)
                    states.append(ys)
                next_sample += sample_interval
            y, t, d_left = y_new, t_new, d_right
            n_accept += 1
            if t >= T * (1.0 - 1e-14):
                if T > times[-1]:
                    times.append(T)
                    states.append(y.copy())
                break
        else:
            n_reject += 1
        factor = _SAFETY * err ** (-0.2) if err > 0 else _GROW_MAX
        h *= min(_GROW_MAX, max(_SHRINK_MIN, factor))

    info = dict(meta or {})
    info.setdefault("integrator", "rkf45")
    info.update(
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        T=T,
        sample_interval=sample_interval,
        n_accepted=n_accept,
        n_rejected=n_reject,
    )
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        layout=tuple(layout),
        meta=info,
        aborted=aborted,
        abort_reason=reason,
    )


# ---------------------------------------------------------------------------
# Langevin stepper (harmonic trap) and vectorized ensemble


@dataclass(frozen=True)
class LangevinEnsembleStats:
    """Per-trajectory horizon averages from a Langevin ensemble run.

    All arrays have length n_traj.  `noise_virial` is (1/T) * sum of
    q * dW scaled by the noise amplitude — the Ito integral (1/T)∫q η dt
    realized by the discretization, which no post-hoc resampling of states
    can recover.
    """

    n_traj: int
    T: float
    dt: float
    seed: int
    avg_p2: np.ndarray
    avg_q2: np.ndarray
    avg_qp: np.ndarray
    noise_virial: np.ndarray
    G_initial: np.ndarray
    G_final: np.ndarray
    s_final: np.ndarray


def _langevin_core(
    omega: float,
    noise: NoiseSpec,
    x0: Sequence[float],
    T: float,
    dt: float,
    n_traj: int,
    sample_every: int | None,
):
    """Vectorized Euler-Maruyama over n_traj independent noise streams.

    Single-trajectory and ensemble entry points both land here, so the
    floating-point path (and hence every emitted number) is identical for
    a given per-trajectory seed.  Per-trajectory generators are PCG64
    streams seeded with seed XOR trajectory-index.
    """
    m, gamma, kBT = noise.m, noise.gamma, noise.k_BT
    if not (T > 0 and 0 < dt <= T):
        raise ValueError("need T > 0 and 0 < dt <= T")
    if gamma * dt >= 0.1:
        raise ValueError(
            f"gamma*dt = {gamma * dt:.3g} >= 0.1: step too coarse for the damping rate"
        )
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * T:
        raise ValueError("T must be an integer number of Langevin steps (T = n*dt)")

    s0, q0, p0 = (float(v) for v in x0)
    q = np.full(n_traj, q0)
    p = np.full(n_traj, p0)
    s = np.full(n_traj, s0)
    amp = noise.amplitude * math.sqrt(dt)

    gens = [np.random.Generator(np.random.PCG64(noise.seed ^ i)) for i in range(n_traj)]

    record = sample_every is not None
    if record:
        times = [0.0]
        rows = [np.concatenate(([0.0], [s0], [q0], [p0]))] if n_traj == 1 else None

    # trapezoid accumulators for the quadratic moments (vectorized Neumaier)
    sum_p2 = np.zeros(n_traj)
    comp_p2 = np.zeros(n_traj)
    sum_q2 = np.zeros(n_traj)
    comp_q2 = np.zeros(n_traj)
    sum_qp = np.zeros(n_traj)
    comp_qp = np.zeros(n_traj)
    noise_sum = np.zeros(n_traj)
    prev_p2, prev_q2, prev_qp = p * p, q * q, q * p

    def vadd(total, comp, x):
        t = total + x
        big = np.abs(total) >= np.abs(x)
        comp += np.where(big, (total - t) + x, (x - t) + total)
        return t, comp

    block = max(1, min(n_steps, max(1, 10_000_000 // max(1, n_traj))))
    step = 0
    # stiff parameter choices blow up through inf/nan; callers detect that
    # in the returned stats, so the arithmetic runs unwarned
    with np.errstate(all="ignore"):
        while step < n_steps:
            this_block = min(block, n_steps - step)
            if amp > 0.0:
                dW = np.stack(
                    [g.standard_normal(this_block) for g in gens], axis=0
                ) * amp
            else:
                dW = np.zeros((n_traj, this_block))
            for j in range(this_block):
                dWj = dW[:, j]
                eta_hat = dWj / dt
                ds = (p * p / (2 * m) - m * omega**2 * q * q / 2
                      - gamma * s + q * eta_hat)
                dq = p / m
                dp = -gamma * p - m * omega**2 * q
                noise_sum += q * dWj
                s = s + dt * ds
                q = q + dt * dq
                p = p + dt * dp + dWj
                cur_p2, cur_q2, cur_qp = p * p, q * q, q * p
                sum_p2, comp_p2 = vadd(sum_p2, comp_p2, dt * 0.5 * (prev_p2 + cur_p2))
                sum_q2, comp_q2 = vadd(sum_q2, comp_q2, dt * 0.5 * (prev_q2 + cur_q2))
                sum_qp, comp_qp = vadd(sum_qp, comp_qp, dt * 0.5 * (prev_qp + cur_qp))
                prev_p2, prev_q2, prev_qp = cur_p2, cur_q2, cur_qp
                step += 1
                if record and n_traj == 1 and (
                    step % sample_every == 0 or step == n_steps
                ):
                    t_now = step * dt if step < n_steps else T
                    if t_now > times[-1]:
                        times.append(t_now)
                        rows.append(np.array([t_now, s[0], q[0], p[0]]))

    stats = LangevinEnsembleStats(
        n_traj=n_traj,
        T=T,
        dt=dt,
        seed=noise.seed,
        avg_p2=(sum_p2 + comp_p2) / T,
        avg_q2=(sum_q2 + comp_q2) / T,
        avg_qp=(sum_qp + comp_qp) / T,
        noise_virial=noise_sum / T,
        G_initial=np.full(n_traj, q0 * p0),
        G_final=q * p,
        s_final=s.copy(),
    )
    if record and n_traj == 1:
        return stats, (np.array(times), np.array(rows))
    return stats, None


def euler_maruyama_langevin(
    omega: float,
    noise: NoiseSpec,
    x0: Sequence[float],
    T: float,
    dt: float,
    *,
    sample_every: int = DEFAULT_SAMPLE_EVERY,
    meta: dict | None = None,
) -> Trajectory:
    """One realization of the harmonically trapped Langevin system.

    State layout (t, s, q, p).  Per step, with dW = amplitude*sqrt(dt)*N(0,1):
    p gains its Euler drift plus dW; the same realized increment divided by
    dt stands in for the noise in the s equation (left-point q); q and s
    advance by Euler drift.  Identical seed => bit-identical trajectory.

    The trajectory's meta carries `stats`, the realized horizon averages
    including the Ito noise-virial integral (1/T)∫ q dW, which downstream
    reports need and cannot rebuild from samples.
    """
    stats, recorded = _langevin_core(
        omega, noise, x0, T, dt, n_traj=1, sample_every=sample_every
    )
    times, rows = recorded
    info = dict(meta or {})
    info.setdefault("integrator", "euler-maruyama")
    info.update(dt=dt, T=T, seed=noise.seed, sample_every=sample_every, stats=stats)
    return Trajectory(
        times=times,
        states=rows,
        layout=("t", "s", "q[0]", "p[0]"),
        meta=info,
    )


def langevin_ensemble(
    omega: float,
    noise: NoiseSpec,
    x0: Sequence[float],
    T: float,
    dt: float,
    n_traj: int,
) -> LangevinEnsembleStats:
    """Horizon averages for n_traj independent Langevin realizations.

    Trajectory i uses the stream seeded with noise.seed XOR i; member i of
    the returned arrays is bit-identical to the single-trajectory run with
    that seed.  States are not stored; only the per-trajectory averages
    needed by ensemble reports.
    """
    if n_traj < 1:
        raise ValueError("need n_traj >= 1")
    stats, _ = _langevin_core(omega, noise, x0, T, dt, n_traj=n_traj, sample_every=None)
    return stats


# ---------------------------------------------------------------------------
# CSV export


def write_trajectory_csv(traj: Trajectory, path, observables: dict | None = None) -> None:
    """Write `t,<components>,<observables>` rows with 17 significant digits.

    `observables` maps column name -> per-sample ndarray.  Every emitted
    number round-trips to the same double.
    """
    obs = observables or {}
    for name, vals in obs.items():
        if len(vals) != traj.n_samples:
            raise ValueError(f"observable '{name}' has {len(vals)} values, "
                             f"expected {traj.n_samples}")
    header = ",".join(["t", *traj.layout, *obs.keys()])
    lines = [header]
    for i in range(traj.n_samples):
        fields = [f"{traj.times[i]:.17g}"]
        fields += [f"{v:.17g}" for v in traj.states[i]]
        fields += [f"{float(vals[i]):.17g}" for vals in obs.values()]
        lines.append(",".join(fields))
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
