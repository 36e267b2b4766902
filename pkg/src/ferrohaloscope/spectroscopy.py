"""Synthetic transmission spectra, Lorentzian peak fits and parameter extraction.

Weak-probe transmission through the cavity is taken proportional to the cavity
susceptibility dressed by the magnon,

    chi_c(w) = 1 / [(w - omega_c + i gamma_c/2) - (g_cm/2)^2 / (w - omega_m + i gamma_m/2)]

with antenna couplings folded into the normalisation (unit maximum on the grid).
Frequencies at this interface are ordinary Hz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, signal

from .errors import DiagnosticError, FitError, UsageError
from .model import GYROMAGNETIC_RATIO, HybridParams, gamma_m_from_hybrid

TWO_PI = 2.0 * np.pi
PEAK_PROMINENCE = 1e-3


@dataclass
class Spectrum:
    frequencies: np.ndarray
    magnitude_sq: np.ndarray

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.magnitude_sq = np.asarray(self.magnitude_sq, dtype=float)
        if self.frequencies.shape != self.magnitude_sq.shape or self.frequencies.size == 0:
            raise UsageError("spectrum needs matching, non-empty frequency and value arrays")
        if np.any(np.diff(self.frequencies) <= 0):
            raise UsageError("spectrum frequency grid must be strictly increasing")
        if np.any(self.magnitude_sq < 0):
            raise UsageError("|S|^2 values must be non-negative")


@dataclass(frozen=True)
class PeakFit:
    center: float
    fwhm: float
    height: float
    floor: float
    residual: float


def transmission_spectrum(p: HybridParams, grid_hz: Sequence[float]) -> Spectrum:
    """Unit-normalised ``|chi_c|^2`` on a grid of frequencies in Hz."""
    f = np.asarray(grid_hz, dtype=float)
    if f.size == 0:
        raise UsageError("transmission_spectrum needs a non-empty grid")
    w = TWO_PI * f
    k = 0.5 * p.g_cm
    inv = (w - p.omega_c + 0.5j * p.gamma_c) - k * k / (w - p.omega_m + 0.5j * p.gamma_m)
    mag = 1.0 / np.abs(inv) ** 2
    return Spectrum(f, mag / mag.max())


def lorentzian(f, center, fwhm, height, floor=0.0):
    hw = 0.5 * fwhm
    return height * hw * hw / ((f - center) ** 2 + hw * hw) + floor


def _initial_guess(f, y, i):
    half = 0.5 * (y[i] + y.min())
    left = np.nonzero(y[:i] < half)[0]
    right = np.nonzero(y[i:] < half)[0]
    # fall back to the window edges when the peak is cut off
    lo = f[left[-1]] if left.size else f[0]
    hi = f[i + right[0]] if right.size else f[-1]
    return f[i], max(hi - lo, 2.0 * np.min(np.diff(f))), y[i] - y.min(), y.min()


def fit_lorentzian(s: Spectrum, window: tuple[float, float]) -> PeakFit:
    """Least-squares Lorentzian plus constant floor on the samples inside ``window`` (Hz)."""
    lo, hi = window
    sel = (s.frequencies >= lo) & (s.frequencies <= hi)
    f, y = s.frequencies[sel], s.magnitude_sq[sel]
    if f.size < 5:
        raise FitError(f"window [{lo:.6e}, {hi:.6e}] Hz holds {f.size} samples, need >= 5")
    peaks, _ = signal.find_peaks(y)
    if peaks.size != 1:
        raise FitError(f"window [{lo:.6e}, {hi:.6e}] Hz contains {peaks.size} local maxima, need 1")
    c0, w0, h0, b0 = _initial_guess(f, y, int(peaks[0]))
    scale = y.max()

    # dimensionless coordinates keep the Jacobian well conditioned
    def resid(x):
        c, lw, h, b = x
        return (lorentzian((f - c0) / w0, c, np.exp(lw), h, b) - y / scale)

    x0 = np.array([0.0, 0.0, h0 / scale, b0 / scale])
    sol = optimize.least_squares(resid, x0, method="lm", max_nfev=200 * (x0.size + 1), xtol=1e-15, ftol=1e-15)
    if not sol.success or not np.all(np.isfinite(sol.x)):
        raise FitError(f"Lorentzian fit did not converge: {sol.message}")
    c, lw, h, b = sol.x
    center = c0 + c * w0
    fwhm = np.exp(lw) * w0
    if not (lo <= center <= hi) or fwhm <= 0 or h <= 0:
        raise FitError(f"fit diverged: center={center:.6e} Hz, fwhm={fwhm:.3e} Hz, height={h:.3e}")
    rms = float(np.sqrt(np.mean(sol.fun**2))) * scale
    return PeakFit(float(center), float(fwhm), float(h * scale), float(b * scale), rms)


def find_peaks(s: Spectrum, prominence: float = PEAK_PROMINENCE) -> np.ndarray:
    """Indices of peaks whose prominence exceeds ``prominence`` times the spectrum maximum."""
    idx, _ = signal.find_peaks(s.magnitude_sq, prominence=prominence * s.magnitude_sq.max())
    return idx


def fit_peaks(s: Spectrum, prominence: float = PEAK_PROMINENCE, width_factor: float = 3.0) -> list[PeakFit]:
    """Fit every prominent peak in a window of +-``width_factor`` rough FWHMs.

    Windows are clipped at the midpoint to neighbouring peaks.
    """
    idx = find_peaks(s, prominence)
    f, y = s.frequencies, s.magnitude_sq
    widths = signal.peak_widths(y, idx, rel_height=0.5)[0] * np.mean(np.diff(f))
    fits = []
    for j, (i, w) in enumerate(zip(idx, widths)):
        lo = f[i] - width_factor * w
        hi = f[i] + width_factor * w
        if j > 0:
            lo = max(lo, 0.5 * (f[idx[j - 1]] + f[i]))
        if j < idx.size - 1:
            hi = min(hi, 0.5 * (f[i] + f[idx[j + 1]]))
        fits.append(fit_lorentzian(s, (lo, hi)))
    return fits


@dataclass(frozen=True)
class Extraction:
    params: HybridParams
    bare_b0: float
    degenerate_b0: float
    splitting_hz: dict[float, float]


def extract_params(spectra: Sequence[tuple[float, Spectrum]]) -> HybridParams:
    """Recover (omega_c, gamma_c, gamma_m, g_cm) from a static-field sweep of spectra."""
    return extract_details(spectra).params


def extract_details(spectra: Sequence[tuple[float, Spectrum]]) -> Extraction:
    """Like :func:`extract_params`, keeping the intermediate bookkeeping.

    Among two-peak spectra the one with the smallest splitting gives ``g_cm``
    (corrected for its residual detuning through the dispersion relation) and
    the hybrid linewidth as the mean of the two fitted widths.  The bare
    cavity comes from the single-peak spectrum whose Larmor frequency is
    farthest from its peak, and at least ten minimum splittings away.
    """
    if not spectra:
        raise UsageError("extract_params needs at least one spectrum")
    single, double = [], []
    for b0, s in spectra:
        fits = fit_peaks(s)
        if len(fits) == 1:
            single.append((b0, fits[0]))
        elif len(fits) == 2:
            double.append((b0, fits))
    f_larmor = GYROMAGNETIC_RATIO / TWO_PI

    if not double:
        raise DiagnosticError("no two-peak spectrum: the sweep never reaches the anticrossing")
    split = {b0: fits[1].center - fits[0].center for b0, fits in double}
    b_deg, fits = min(double, key=lambda item: split[item[0]])
    # the minimum splitting bounds g_cm from above; a spectrum counts as bare
    # only when its dispersive pull (g/2)^2 / detuning is below g / 40
    g_bound = split[b_deg]
    if not single:
        raise DiagnosticError("no single-peak (bare cavity) spectrum in the sweep")
    b_bare, bare = max(single, key=lambda item: abs(f_larmor * item[0] - item[1].center))
    if abs(f_larmor * b_bare - bare.center) < 10.0 * g_bound:
        raise DiagnosticError(
            "no far-detuned spectrum: every single-peak spectrum has the magnon within 10 splittings of the cavity"
        )
    fc, gc = bare.center, bare.fwhm

    detunings = [f_larmor * b0 - fc for b0, _ in double]
    if min(detunings) > 0 or max(detunings) < 0:
        raise DiagnosticError("field sweep does not bracket the anticrossing (all Larmor frequencies on one side of omega_c)")
    det = f_larmor * b_deg - fc
    g_sq = split[b_deg] ** 2 - det**2
    if g_sq <= 0:
        raise DiagnosticError("peak splitting smaller than the detuning at the closest approach")
    gh = 0.5 * (fits[0].fwhm + fits[1].fwhm)
    gm = gamma_m_from_hybrid(TWO_PI * gh, TWO_PI * gc)
    params = HybridParams(TWO_PI * fc, TWO_PI * f_larmor * b_deg, TWO_PI * gc, gm, TWO_PI * np.sqrt(g_sq))
    return Extraction(params, b_bare, b_deg, split)
