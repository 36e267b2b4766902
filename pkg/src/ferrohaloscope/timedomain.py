"""Time-domain integration of the driven hybrid system and the pulsed readout chain.

The mean-field equations are

    i d/dt (m, c) = H (m, c) + g_am sqrt(n_a) exp(-i omega_a t) (1, 0)

with ``H`` from :meth:`HybridParams.hamiltonian`.  Integration uses classical
fixed-step RK4.  By default the state is carried in a frame rotating at
``omega_frame`` (the drive frequency when driven), where the equations are
autonomous and the step size is set by detunings and coupling rather than the
GHz carrier.  A :class:`FieldTrace` records the frame it was computed in, so the
lab-frame amplitude is always ``envelope * exp(-i omega_frame t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import HeterodyneBandError, UsageError
from .model import AxionDrive, HybridParams, hybrid_frequencies

TWO_PI = 2.0 * np.pi
# fraction of the fastest period allowed per step
STEP_FRACTION = 0.05


@dataclass
class FieldTrace:
    """Uniformly sampled complex amplitudes ``m(t)``, ``c(t)``.

    ``m_amp`` and ``c_amp`` are envelopes in the frame rotating at
    ``omega_frame`` (0 for lab frame).
    """

    times: np.ndarray
    m_amp: np.ndarray
    c_amp: np.ndarray
    params: HybridParams
    omega_frame: float = 0.0

    def __post_init__(self):
        if not (len(self.times) == len(self.m_amp) == len(self.c_amp)):
            raise UsageError("trace series must have equal lengths")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def lab(self) -> tuple[np.ndarray, np.ndarray]:
        phase = np.exp(-1j * self.omega_frame * self.times)
        return self.m_amp * phase, self.c_amp * phase

    @property
    def energy(self) -> np.ndarray:
        """Total excitation number |m|^2 + |c|^2 (frame independent)."""
        return np.abs(self.m_amp) ** 2 + np.abs(self.c_amp) ** 2


@dataclass(frozen=True)
class PulseConfig:
    """Instantaneous magnon kick at ``t0``; ``jitter`` is the relative shot-to-shot spread."""

    t0: float = 0.0
    deposited_magnon_amplitude: complex = 1.0
    jitter: float = 0.0

    def __post_init__(self):
        if self.jitter < 0:
            raise UsageError(f"jitter must be non-negative, got {self.jitter}")


@dataclass(frozen=True)
class HeterodyneConfig:
    """Local oscillator and the half-width of the down-converted band (both rad/s).

    ``band_limit`` applies an ideal brick-wall filter at ``band`` after mixing.
    Off by default: the receiver's filter shape is not part of the model.
    """

    omega_lo: float
    band: float
    band_limit: bool = False

    def __post_init__(self):
        if not (self.omega_lo > 0 and self.band > 0):
            raise UsageError("omega_lo and band must be positive")


@dataclass
class Baseband:
    """Down-converted complex series ``r(t)``."""

    times: np.ndarray
    r: np.ndarray
    omega_if: float


# ---------------------------------------------------------------------------
# integrator


def rk4_step(f: Callable, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _affine_step(a: np.ndarray, b: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """One RK4 step of ``y' = a y + b`` written as ``y -> R y + s``.

    Obtained by pushing the basis vectors and the origin through
    :func:`rk4_step`, so it is the same arithmetic as the generic stepper.
    """
    n = a.shape[0]
    s = rk4_step(lambda t, y: a @ y + b, 0.0, np.zeros(n, dtype=complex), h)
    cols = [rk4_step(lambda t, y: a @ y, 0.0, e, h) for e in np.eye(n, dtype=complex)]
    return np.column_stack(cols), s


def _check_step(dt: float, omega_max: float, t_end: float) -> int:
    if not t_end > 0:
        raise UsageError(f"t_end must be positive, got {t_end}")
    if not dt > 0:
        raise UsageError(f"dt must be positive, got {dt}")
    if omega_max > 0 and dt >= STEP_FRACTION * TWO_PI / omega_max:
        raise UsageError(
            f"dt={dt:.3e} s does not resolve the fastest frequency {omega_max:.3e} rad/s; "
            f"need dt < {STEP_FRACTION * TWO_PI / omega_max:.3e} s"
        )
    return int(np.ceil(t_end / dt - 1e-9))


def frame_rate(p: HybridParams, omega_frame: float) -> float:
    """Fastest rate in the frame rotating at ``omega_frame``."""
    return float(np.max(np.abs(np.linalg.eigvals(p.hamiltonian() - omega_frame * np.eye(2)))))


def default_dt(p: HybridParams, omega_frame: float) -> float:
    return 0.4 * STEP_FRACTION * TWO_PI / frame_rate(p, omega_frame)


def _integrate_frame(p, drive_amp, omega_frame, y0, t_start, t_end, dt, record_every):
    """Autonomous RK4 in the frame rotating at ``omega_frame``."""
    n = _check_step(dt, frame_rate(p, omega_frame), t_end)
    if not 1 <= record_every <= n:
        raise UsageError(f"record_every must lie in [1, {n}] for {n} steps, got {record_every}")
    a = -1j * (p.hamiltonian() - omega_frame * np.eye(2))
    b = -1j * np.array([drive_amp, 0.0], dtype=complex)
    r1, s1 = _affine_step(a, b, dt)
    # k steps at once: R^k and sum_{j<k} R^j s
    rk, sk = np.eye(2, dtype=complex), np.zeros(2, dtype=complex)
    for _ in range(record_every):
        rk, sk = r1 @ rk, r1 @ sk + s1
    n_rec = n // record_every
    out = np.empty((n_rec + 1, 2), dtype=complex)
    y = np.asarray(y0, dtype=complex)
    out[0] = y
    for j in range(1, n_rec + 1):
        y = rk @ y + sk
        out[j] = y
    times = t_start + dt * record_every * np.arange(n_rec + 1)
    return FieldTrace(times, out[:, 0], out[:, 1], p, omega_frame)


def _integrate_lab(p, drive_amp, omega_a, y0, t_start, t_end, dt, record_every):
    omega_max = max(p.omega_c, p.omega_m, omega_a if drive_amp else 0.0)
    n = _check_step(dt, omega_max, t_end)
    if not 1 <= record_every <= n:
        raise UsageError(f"record_every must lie in [1, {n}] for {n} steps, got {record_every}")
    h = p.hamiltonian()
    e1 = np.array([1.0, 0.0], dtype=complex)

    def rhs(t, y):
        return -1j * (h @ y + drive_amp * np.exp(-1j * omega_a * t) * e1)

    n_rec = n // record_every
    out = np.empty((n_rec + 1, 2), dtype=complex)
    y = np.asarray(y0, dtype=complex)
    out[0] = y
    t = t_start
    for j in range(1, n_rec + 1):
        for _ in range(record_every):
            y = rk4_step(rhs, t, y, dt)
            t += dt
        out[j] = y
    times = t_start + dt * record_every * np.arange(n_rec + 1)
    return FieldTrace(times, out[:, 0], out[:, 1], p, 0.0)


def integrate_driven(
    p: HybridParams,
    d: AxionDrive,
    t_end: float,
    dt: float,
    initial: Sequence[complex] = (0.0, 0.0),
    frame: str = "rotating",
    record_every: int = 1,
) -> FieldTrace:
    """Integrate the driven equations from t = 0 to ``t_end`` with fixed-step RK4.

    ``initial`` is the lab-frame ``(m, c)`` at t = 0 (identical in both frames
    there).  ``frame="rotating"`` works in the frame of the drive; ``"lab"``
    integrates the explicit time-dependent equations and needs a step that
    resolves the carrier.  ``record_every`` decimates the stored output only.
    """
    if frame == "rotating":
        return _integrate_frame(p, d.amplitude, d.omega_a, initial, 0.0, t_end, dt, record_every)
    if frame == "lab":
        return _integrate_lab(p, d.amplitude, d.omega_a, initial, 0.0, t_end, dt, record_every)
    raise UsageError(f"frame must be 'rotating' or 'lab', got {frame!r}")


def ring_down(
    p: HybridParams,
    pulse: PulseConfig,
    t_end: float,
    dt: float | None = None,
    omega_frame: float | None = None,
    record_every: int = 1,
) -> FieldTrace:
    """Free decay after an instantaneous magnon kick at ``pulse.t0``.

    ``t_end`` is the duration after the kick.  The default frame rotates at
    the cavity frequency.
    """
    omega_frame = p.omega_c if omega_frame is None else omega_frame
    dt = default_dt(p, omega_frame) if dt is None else dt
    a0 = complex(pulse.deposited_magnon_amplitude)
    # lab-frame kick expressed as an envelope at t0
    y0 = np.array([a0 * np.exp(1j * omega_frame * pulse.t0), 0.0], dtype=complex)
    return _integrate_frame(p, 0.0, omega_frame, y0, pulse.t0, t_end, dt, record_every)


def dissipated_power(trace: FieldTrace, periods: int = 20, oversample: int = 2000) -> float:
    """Cycle-averaged ``(gamma_c / 2) <zdot^2>`` at the end of a rotating-frame trace.

    The lab-frame quadrature ``z = (c + c*) / sqrt(2 omega_c)`` is rebuilt on a
    fine grid covering the last ``periods`` carrier periods and differentiated
    numerically.
    """
    w = trace.omega_frame
    if w <= 0:
        raise UsageError("dissipated_power needs a trace in a rotating frame")
    p = trace.params
    period = TWO_PI / w
    t_hi = trace.times[-1]
    t_lo = t_hi - periods * period
    if t_lo < trace.times[0]:
        raise UsageError("trace shorter than the averaging window")
    t = t_lo + period / oversample * np.arange(periods * oversample + 1)
    env = np.interp(t, trace.times, trace.c_amp.real) + 1j * np.interp(t, trace.times, trace.c_amp.imag)
    z = 2.0 * np.real(env * np.exp(-1j * w * t)) / np.sqrt(2.0 * p.omega_c)
    zdot = np.gradient(z, t)
    return 0.5 * p.gamma_c * float(np.mean(zdot[:-1] ** 2))


# ---------------------------------------------------------------------------
# readout chain


def heterodyne_downconvert(
    trace: FieldTrace, h: HeterodyneConfig, omega_signal: float | None = None
) -> Baseband:
    """Mix the cavity field with the local oscillator: ``r(t) = c(t) exp(+i omega_lo t)``.

    ``omega_signal`` is the tone that must land inside the band, by default
    the lower hybrid mode of ``trace.params``.
    """
    if omega_signal is None:
        omega_signal = hybrid_frequencies(trace.params)[0]
    offset = omega_signal - h.omega_lo
    if abs(offset) >= h.band:
        raise HeterodyneBandError(
            f"signal at {omega_signal / TWO_PI:.6e} Hz is {offset / TWO_PI:.4e} Hz from the LO, "
            f"outside the {h.band / TWO_PI:.4e} Hz band"
        )
    # combine frame and LO phases before exponentiating: keeps the product exact
    r = trace.c_amp * np.exp(1j * (h.omega_lo - trace.omega_frame) * trace.times)
    if h.band_limit:
        freqs = TWO_PI * np.fft.fftfreq(len(r), trace.dt)
        spec = np.fft.fft(r)
        spec[np.abs(freqs) > h.band] = 0.0
        r = np.fft.ifft(spec)
    return Baseband(trace.times, r, h.omega_lo - omega_signal)


def pulse_metric(times: np.ndarray, r: np.ndarray, t0: float, tau_h: float) -> float:
    """Trapezoidal integral of ``|r|^2`` over ``[t0, t0 + 4 tau_h]``."""
    times = np.asarray(times, dtype=float)
    power = np.abs(np.asarray(r)) ** 2
    t1 = t0 + 4.0 * tau_h
    slack = 1e-9 * max(tau_h, abs(t1))
    if times.size < 2 or times[0] > t0 + slack or times[-1] < t1 - slack:
        raise UsageError(
            f"series covers [{times[0] if times.size else np.nan:.4e}, "
            f"{times[-1] if times.size else np.nan:.4e}] s, need [{t0:.4e}, {t1:.4e}] s"
        )
    inside = (times > t0) & (times < t1)
    t = np.concatenate(([t0], times[inside], [t1]))
    y = np.interp(t, times, power)
    return float(np.trapezoid(y, t))


def shot_average(metrics: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation; the deviation of a single shot is reported as 0."""
    x = np.asarray(metrics, dtype=float)
    if x.size == 0:
        raise UsageError("shot_average needs at least one value")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1))


def jitter_factors(jitter: float, n: int, seed) -> np.ndarray:
    """Log-normal amplitude multipliers with unit mean and relative spread ``jitter``."""
    if jitter < 0:
        raise UsageError("jitter must be non-negative")
    if jitter == 0:
        return np.ones(n)
    rng = np.random.default_rng(seed)
    sigma2 = np.log1p(jitter**2)
    return np.exp(np.sqrt(sigma2) * rng.standard_normal(n) - 0.5 * sigma2)


def pulse_shots(
    p: HybridParams,
    pulse: PulseConfig,
    h: HeterodyneConfig,
    n_shots: int,
    seed=None,
    dt: float | None = None,
) -> np.ndarray:
    """``q_r`` for ``n_shots`` jittered pulses: ring-down, down-conversion, integration.

    The chain is linear in the kick amplitude and the metric quadratic, so one
    unit-jitter shot is simulated and each shot scales it by ``factor**2``.
    """
    if n_shots < 1:
        raise UsageError("n_shots must be >= 1")
    tau_h = 1.0 / p.gamma_h
    factors = jitter_factors(pulse.jitter, n_shots, seed)
    shot = PulseConfig(pulse.t0, pulse.deposited_magnon_amplitude, 0.0)
    trace = ring_down(p, shot, 4.0 * tau_h, dt)
    bb = heterodyne_downconvert(trace, h)
    return factors**2 * pulse_metric(bb.times, bb.r, pulse.t0, tau_h)
