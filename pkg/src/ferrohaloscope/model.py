"""Frequency-domain response of a driven photon-magnon hybrid system.

Two coupled damped oscillators, a cavity mode ``c`` and the Kittel mode ``m``,
with an external classical field driving only the magnon.  In the frame of the
drive the steady state solves a 2x2 complex linear system

    [omega_a * I - H] A = g_am * sqrt(n_a) * (1, 0)^T

with the non-Hermitian effective Hamiltonian

    H = [[omega_m - i gamma_m / 2,  g_cm / 2               ],
         [g_cm / 2,                 omega_c - i gamma_c / 2]]

The off-diagonal element ``g_cm / 2`` makes the real normal-mode splitting at
degeneracy equal to ``g_cm`` and puts the poles of the cavity response at the
hybrid frequencies returned by :func:`hybrid_frequencies`.

Units: every angular quantity is in rad/s.  Powers are in natural units
(rad^2/s^2 times the dimensionless drive occupation); multiply by hbar with
:func:`power_watts` for a nominal SI figure.  The absolute scale is arbitrary,
only ratios are physically meaningful here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Literal, Sequence

import numpy as np
from scipy import optimize

from .errors import BandwidthError, BranchDomainError, DomainError, UsageError

TWO_PI = 2.0 * np.pi
# electron gyromagnetic ratio, rad/s per tesla
GYROMAGNETIC_RATIO = TWO_PI * 28e9
HBAR = 1.054571817e-34

Branch = Literal["lower", "upper"]
BRANCHES: tuple[str, ...] = ("lower", "upper")


def _check_branch(branch: str) -> None:
    if branch not in BRANCHES:
        raise UsageError(f"branch must be one of {BRANCHES}, got {branch!r}")


@dataclass(frozen=True)
class HybridParams:
    """Cavity and Kittel-mode parameters, all angular (rad/s)."""

    omega_c: float
    omega_m: float
    gamma_c: float
    gamma_m: float
    g_cm: float

    def __post_init__(self):
        if not self.omega_c > 0:
            raise DomainError(f"omega_c must be positive, got {self.omega_c}")
        if not self.omega_m >= 0:
            raise DomainError(f"omega_m must be non-negative, got {self.omega_m}")
        if not (self.gamma_c > 0 and self.gamma_m > 0):
            raise DomainError("linewidths gamma_c, gamma_m must be positive")
        if not self.g_cm >= 0:
            raise DomainError(f"g_cm must be non-negative, got {self.g_cm}")

    @classmethod
    def from_hz(cls, omega_c, omega_m, gamma_c, gamma_m, g_cm) -> "HybridParams":
        """Build from ordinary frequencies in Hz."""
        return cls(*(TWO_PI * v for v in (omega_c, omega_m, gamma_c, gamma_m, g_cm)))

    @property
    def gamma_h(self) -> float:
        """Hybrid-mode linewidth at degeneracy, (gamma_c + gamma_m) / 2."""
        return 0.5 * (self.gamma_c + self.gamma_m)

    @property
    def strong_coupling(self) -> bool:
        return self.g_cm > max(self.gamma_c, self.gamma_m)

    def with_omega_m(self, omega_m: float) -> "HybridParams":
        return replace(self, omega_m=omega_m)

    def hamiltonian(self) -> np.ndarray:
        """Effective non-Hermitian 2x2 matrix, magnon first."""
        k = 0.5 * self.g_cm
        return np.array(
            [
                [self.omega_m - 0.5j * self.gamma_m, k],
                [k, self.omega_c - 0.5j * self.gamma_c],
            ],
            dtype=complex,
        )


@dataclass(frozen=True)
class AxionDrive:
    """Classical drive on the magnon: coupling (rad/s), occupation, frequency (rad/s)."""

    g_am: float
    n_a: float
    omega_a: float

    def __post_init__(self):
        if not self.g_am >= 0:
            raise DomainError(f"g_am must be non-negative, got {self.g_am}")
        if not self.n_a >= 0:
            raise DomainError(f"n_a must be non-negative, got {self.n_a}")
        if not self.omega_a > 0:
            raise DomainError(f"omega_a must be positive, got {self.omega_a}")

    @property
    def amplitude(self) -> float:
        """Drive strength g_am * sqrt(n_a)."""
        return self.g_am * np.sqrt(self.n_a)

    def at(self, omega_a: float) -> "AxionDrive":
        return replace(self, omega_a=omega_a)


@dataclass(frozen=True)
class ModeSystem:
    """N magnon modes coupled to one cavity mode.

    ``magnon_modes`` holds ``(omega_i, gamma_i, g_i)`` triples; couplings are
    magnon-cavity only.  ``drive_weights`` scales the drive on each magnon mode
    and defaults to 1 everywhere.
    """

    magnon_modes: tuple[tuple[float, float, float], ...]
    omega_c: float
    gamma_c: float
    drive_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        modes = tuple(tuple(float(v) for v in m) for m in self.magnon_modes)
        if len(modes) < 1:
            raise DomainError("ModeSystem needs at least one magnon mode")
        for omega, gamma, g in modes:
            if not (omega > 0 and gamma > 0 and g >= 0):
                raise DomainError(f"invalid magnon mode {(omega, gamma, g)}")
        if not (self.omega_c > 0 and self.gamma_c > 0):
            raise DomainError("cavity frequency and linewidth must be positive")
        weights = self.drive_weights
        weights = (1.0,) * len(modes) if weights is None else tuple(float(w) for w in weights)
        if len(weights) != len(modes):
            raise DomainError("drive_weights must have one entry per magnon mode")
        object.__setattr__(self, "magnon_modes", modes)
        object.__setattr__(self, "drive_weights", weights)

    @classmethod
    def from_hybrid(cls, p: HybridParams) -> "ModeSystem":
        return cls(((p.omega_m, p.gamma_m, p.g_cm),), p.omega_c, p.gamma_c)

    @property
    def n_modes(self) -> int:
        return len(self.magnon_modes)

    def hamiltonian(self) -> np.ndarray:
        n = self.n_modes
        h = np.zeros((n + 1, n + 1), dtype=complex)
        for i, (omega, gamma, g) in enumerate(self.magnon_modes):
            h[i, i] = omega - 0.5j * gamma
            h[i, n] = h[n, i] = 0.5 * g
        h[n, n] = self.omega_c - 0.5j * self.gamma_c
        return h


@dataclass(frozen=True)
class ComplexResponse:
    """Steady-state complex amplitudes, one per mode with the cavity last."""

    amplitudes: np.ndarray
    omega_a: float

    @property
    def cavity(self) -> complex:
        return complex(self.amplitudes[-1])

    @property
    def magnon(self) -> complex:
        return complex(self.amplitudes[0])


@dataclass
class SweepResult:
    """Tabulated branch sweep.  ``swept`` is the independent column."""

    swept: np.ndarray
    omega_m: np.ndarray
    omega_minus: np.ndarray
    omega_plus: np.ndarray
    p_ac: np.ndarray
    q: np.ndarray
    branch: str = "lower"
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.swept)

    @property
    def omega_branch(self) -> np.ndarray:
        return self.omega_minus if self.branch == "lower" else self.omega_plus

    def rows(self) -> Iterator[tuple[float, ...]]:
        cols = [self.swept, self.omega_m, self.omega_minus, self.omega_plus, self.p_ac, self.q]
        cols += list(self.extra.values())
        yield from zip(*(np.asarray(c, dtype=float) for c in cols))


# ---------------------------------------------------------------------------
# single-mode operations


def larmor_frequency(b0: float) -> float:
    """Kittel-mode angular frequency for a static field ``b0`` in tesla."""
    if b0 < 0:
        raise DomainError(f"magnetic field must be non-negative, got {b0} T")
    return GYROMAGNETIC_RATIO * b0


def field_for_larmor(omega_m: float) -> float:
    """Inverse of :func:`larmor_frequency`; tesla."""
    if omega_m < 0:
        raise DomainError(f"Larmor frequency must be non-negative, got {omega_m}")
    return omega_m / GYROMAGNETIC_RATIO


def hybrid_frequencies(p: HybridParams) -> tuple[float, float]:
    """Normal-mode frequencies ``(omega_minus, omega_plus)`` of the undamped system."""
    mean = 0.5 * (p.omega_c + p.omega_m)
    half = np.hypot(0.5 * (p.omega_c - p.omega_m), 0.5 * p.g_cm)
    return mean - half, mean + half


def _hybrid_arrays(omega_c, omega_m, g_cm):
    mean = 0.5 * (omega_c + omega_m)
    half = np.hypot(0.5 * (omega_c - omega_m), 0.5 * g_cm)
    return mean - half, mean + half


def _cavity_amplitude(omega_c, omega_m, gamma_c, gamma_m, g_cm, omega_a, drive):
    """Closed-form cavity component of the steady state, vectorised."""
    k = 0.5 * g_cm
    den = (omega_a - omega_m + 0.5j * gamma_m) * (omega_a - omega_c + 0.5j * gamma_c) - k * k
    return k * drive / den


def _power(omega_c, omega_m, gamma_c, gamma_m, g_cm, omega_a, drive):
    amp = _cavity_amplitude(omega_c, omega_m, gamma_c, gamma_m, g_cm, omega_a, drive)
    return gamma_c * omega_a**2 / (2.0 * omega_c) * np.abs(amp) ** 2


def response_amplitude(p: HybridParams, d: AxionDrive) -> ComplexResponse:
    """Steady-state amplitudes ``(m, c)`` from the 2x2 linear solve."""
    k = d.omega_a * np.eye(2) - p.hamiltonian()
    # det vanishes only for real omega_a at a real eigenvalue; impossible with gamma > 0
    assert abs(np.linalg.det(k)) > 0.0, "singular response matrix"
    amps = np.linalg.solve(k, np.array([d.amplitude, 0.0], dtype=complex))
    return ComplexResponse(amps, d.omega_a)


def deposited_power(p: HybridParams, d: AxionDrive) -> float:
    """Cycle-averaged power dissipated through the cavity port.

    ``P = (gamma_c / 2) <zdot^2>`` with the quadrature ``z = (c + c^+) / sqrt(2 omega_c)``,
    which gives ``gamma_c omega_a^2 / (2 omega_c) |c|^2``.
    """
    c = response_amplitude(p, d).cavity
    return p.gamma_c * d.omega_a**2 / (2.0 * p.omega_c) * abs(c) ** 2


def power_watts(p_natural: float) -> float:
    """Attach hbar to a natural-unit power.  Nominal: the model fixes no absolute scale."""
    return HBAR * p_natural


def omega_m_on_branch(p: HybridParams, omega_pm: float, branch: Branch) -> float:
    """Kittel frequency that places the chosen hybrid mode at ``omega_pm``."""
    _check_branch(branch)
    delta = omega_pm - p.omega_c
    if delta == 0.0:
        raise BranchDomainError("omega_pm == omega_c: no branch passes through the bare cavity line")
    if branch == "lower" and delta > 0 or branch == "upper" and delta < 0:
        raise BranchDomainError(
            f"omega_pm={omega_pm:.6e} lies on the wrong side of omega_c for the {branch} branch"
        )
    k = 0.5 * p.g_cm
    omega_m = omega_pm - k * k / delta
    if omega_m < 0:
        raise BranchDomainError(f"omega_pm={omega_pm:.6e} would need omega_m < 0")
    return omega_m


def on_resonance_power(p: HybridParams, d_template: AxionDrive, omega_pm: float, branch: Branch) -> float:
    """Deposited power with the drive tuned onto a hybrid mode located at ``omega_pm``.

    ``p.omega_m`` is ignored: the Kittel frequency is set by inverting the
    dispersion relation on ``branch``.
    """
    omega_m_on_branch(p, omega_pm, branch)
    # detunings from the bare lines straight from delta, so omega_m is never rounded
    k = 0.5 * p.g_cm
    delta = omega_pm - p.omega_c
    den = (k * k / delta + 0.5j * p.gamma_m) * (delta + 0.5j * p.gamma_c) - k * k
    c = k * d_template.amplitude / den
    return p.gamma_c * omega_pm**2 / (2.0 * p.omega_c) * abs(c) ** 2


def transduction_curve(
    p: HybridParams, d: AxionDrive, branch: Branch, grid: Sequence[float]
) -> SweepResult:
    """Normalised on-resonance power ``q`` over a grid of hybrid frequencies."""
    _check_branch(branch)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise UsageError("transduction_curve needs a non-empty grid")
    omega_m = np.array([omega_m_on_branch(p, w, branch) for w in grid])
    return _branch_table(p, d, branch, omega_m, swept=grid)


def sweep_omega_m(p: HybridParams, d: AxionDrive, branch: Branch, omega_m: Sequence[float]) -> SweepResult:
    """Same as :func:`transduction_curve` but parametrised by the Kittel frequency."""
    _check_branch(branch)
    omega_m = np.asarray(omega_m, dtype=float)
    if omega_m.size == 0:
        raise UsageError("sweep needs at least one point")
    if np.any(omega_m < 0):
        raise DomainError("omega_m must be non-negative")
    return _branch_table(p, d, branch, omega_m, swept=omega_m)


def _branch_table(p, d, branch, omega_m, swept) -> SweepResult:
    lo, hi = _hybrid_arrays(p.omega_c, omega_m, p.g_cm)
    omega_a = lo if branch == "lower" else hi
    power = _power(p.omega_c, omega_m, p.gamma_c, p.gamma_m, p.g_cm, omega_a, d.amplitude)
    peak = power.max()
    q = power / peak if peak > 0 else np.zeros_like(power)
    return SweepResult(swept, omega_m, lo, hi, power, q, branch)


# ---------------------------------------------------------------------------
# dynamical bandwidth

SCAN_POINTS = 2001
SCAN_HALF_WIDTH = 10.0  # in units of g_cm
BISECT_TOL = TWO_PI * 1e3


@dataclass(frozen=True)
class HalfPowerPoints:
    """Half-power crossings of the on-resonance power along one branch.

    The same two crossings are reported in the tuning coordinate (Kittel
    frequency, set by the static field) and in the hybrid-mode coordinate.
    """

    branch: str
    omega_m_peak: float
    omega_pm_peak: float
    p_peak: float
    omega_m_edges: tuple[float, float]
    omega_pm_edges: tuple[float, float]

    @property
    def larmor_width(self) -> float:
        return self.omega_m_edges[1] - self.omega_m_edges[0]

    @property
    def hybrid_width(self) -> float:
        return abs(self.omega_pm_edges[1] - self.omega_pm_edges[0])


def _branch_power(p: HybridParams, amplitude: float, branch: str, omega_m):
    lo, hi = _hybrid_arrays(p.omega_c, omega_m, p.g_cm)
    omega_a = lo if branch == "lower" else hi
    return _power(p.omega_c, omega_m, p.gamma_c, p.gamma_m, p.g_cm, omega_a, amplitude)


def half_power_points(p: HybridParams, d: AxionDrive, branch: Branch = "lower") -> HalfPowerPoints:
    """Locate the peak and the two half-power points of a branch power curve.

    Coarse uniform scan of the Kittel frequency over ``omega_c +- 10 g_cm``,
    bounded refinement of the peak, then bisection of each crossing to
    2 pi x 1 kHz.
    """
    _check_branch(branch)
    if p.g_cm <= 0:
        raise BandwidthError("g_cm = 0: modes are uncoupled, no hybrid branch carries power")
    if d.amplitude <= 0:
        raise BandwidthError("zero drive: deposited power vanishes identically")

    def power(wm):
        return _branch_power(p, d.amplitude, branch, wm)

    span = SCAN_HALF_WIDTH * p.g_cm
    grid = np.linspace(max(p.omega_c - span, 0.0), p.omega_c + span, SCAN_POINTS)
    values = power(grid)
    i = int(np.argmax(values))
    interior = values[1:-1]
    n_max = np.count_nonzero((interior > values[:-2]) & (interior >= values[2:]))
    if n_max != 1:
        raise BandwidthError(f"{branch} branch power has {n_max} local maxima in the scan window")
    if i == 0 or i == grid.size - 1:
        raise BandwidthError("power maximum sits on the scan window edge")

    res = optimize.minimize_scalar(
        lambda wm: -power(wm) / values[i],
        bounds=(grid[i - 1], grid[i + 1]),
        method="bounded",
        options={"xatol": 1e-3 * BISECT_TOL},
    )
    wm_peak = float(res.x) if -res.fun >= 1.0 else float(grid[i])
    p_peak = float(power(wm_peak))
    half = 0.5 * p_peak

    below = values < half
    left = np.nonzero(below[:i])[0]
    right = np.nonzero(below[i:])[0]
    if left.size == 0 or right.size == 0:
        raise BandwidthError(
            f"half-power crossing not bracketed within omega_c +- {SCAN_HALF_WIDTH:g} g_cm "
            f"on the {branch} branch"
        )
    a, b = left[-1], i + right[0]

    def f(wm):
        return power(wm) - half

    lo = optimize.bisect(f, grid[a], grid[a + 1], xtol=BISECT_TOL)
    hi = optimize.bisect(f, grid[b - 1], grid[b], xtol=BISECT_TOL)

    def pm(wm):
        m, pl = hybrid_frequencies(p.with_omega_m(wm))
        return m if branch == "lower" else pl

    return HalfPowerPoints(branch, wm_peak, pm(wm_peak), p_peak, (lo, hi), (pm(lo), pm(hi)))


def dynamical_bandwidth(
    p: HybridParams, d: AxionDrive, branch: Branch = "lower", axis: str = "larmor"
) -> float:
    """FWHM of the branch power curve, rad/s.

    ``axis="larmor"`` measures the width as the range of Kittel (Larmor)
    frequency over which the on-resonance power stays above half maximum,
    i.e. the tuning interval covered by the static field.  ``axis="hybrid"``
    measures the same crossings on the hybrid-frequency axis.
    """
    hp = half_power_points(p, d, branch)
    if axis == "larmor":
        return hp.larmor_width
    if axis == "hybrid":
        return hp.hybrid_width
    raise UsageError(f"axis must be 'larmor' or 'hybrid', got {axis!r}")


# ---------------------------------------------------------------------------
# N-mode extension


def multi_mode_response(s: ModeSystem, d: AxionDrive) -> ComplexResponse:
    """Steady state of N magnon modes plus one cavity mode (cavity last)."""
    n = s.n_modes
    k = d.omega_a * np.eye(n + 1) - s.hamiltonian()
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[:n] = d.amplitude * np.asarray(s.drive_weights)
    amps = np.linalg.solve(k, rhs)
    assert np.all(np.isfinite(amps)), "singular response matrix"
    return ComplexResponse(amps, d.omega_a)


def mode_frequencies(s: ModeSystem) -> np.ndarray:
    """Real parts of the complex eigenfrequencies, ascending."""
    return np.sort(np.linalg.eigvals(s.hamiltonian()).real)


def gamma_m_from_hybrid(gamma_h: float, gamma_c: float) -> float:
    """Magnon linewidth from the degenerate hybrid linewidth: ``2 gamma_h - gamma_c``."""
    gamma_m = 2.0 * gamma_h - gamma_c
    if gamma_m <= 0:
        raise DomainError(
            f"2*gamma_h - gamma_c = {gamma_m:.6g} <= 0: unphysical magnon linewidth"
        )
    return gamma_m
