"""Characterisation round trip: synthesise spectra over a field sweep and recover the parameters.

    python scripts/spectroscopy_roundtrip.py --g-cm-hz 28.5e6
"""

import argparse

import numpy as np

from ferrohaloscope.model import GYROMAGNETIC_RATIO, TWO_PI, HybridParams
from ferrohaloscope.spectroscopy import extract_details, transmission_spectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega-c-hz", type=float, default=4.7e9)
    ap.add_argument("--gamma-c-hz", type=float, default=1.1e6)
    ap.add_argument("--gamma-m-hz", type=float, default=3.5e6)
    ap.add_argument("--g-cm-hz", type=float, default=26.5e6)
    args = ap.parse_args()

    truth = HybridParams.from_hz(args.omega_c_hz, args.omega_c_hz, args.gamma_c_hz, args.gamma_m_hz, args.g_cm_hz)
    b_deg = truth.omega_c / GYROMAGNETIC_RATIO
    fields = [0.0] + list(b_deg + np.linspace(-2e-3, 2e-3, 41))
    grid = np.linspace(args.omega_c_hz - 80e6, args.omega_c_hz + 80e6, 16001)
    spectra = [(b, transmission_spectrum(truth.with_omega_m(GYROMAGNETIC_RATIO * b), grid)) for b in fields]
    ex = extract_details(spectra)

    print(f"degeneracy found at B0 = {ex.degenerate_b0 * 1e3:.3f} mT (expected {b_deg * 1e3:.3f} mT)")
    print("parameter   true [MHz]     extracted [MHz]  rel. error")
    for name in ("omega_c", "gamma_c", "gamma_m", "g_cm"):
        t, g = getattr(truth, name) / TWO_PI / 1e6, getattr(ex.params, name) / TWO_PI / 1e6
        print(f"{name:9s} {t:12.4f} {g:18.4f}  {abs(g - t) / t:10.2e}")
    print(f"Q = {ex.params.omega_c / ex.params.gamma_c:.1f}")


if __name__ == "__main__":
    main()
