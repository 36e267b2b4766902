"""Pulsed transduction pipeline against the steady-state transduction curve.

Runs the ring-down, down-conversion and energy-integral chain across a field
sweep, with and without an ideal band filter, and prints both normalised curves
next to the steady-state prediction.

    python scripts/pulsed_transduction.py --points 15
"""

import argparse

import numpy as np

from ferrohaloscope.model import (
    GYROMAGNETIC_RATIO,
    TWO_PI,
    AxionDrive,
    HybridParams,
    half_power_points,
    hybrid_frequencies,
    sweep_omega_m,
)
from ferrohaloscope.timedomain import HeterodyneConfig, PulseConfig, pulse_shots

MHZ = TWO_PI * 1e6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=15)
    ap.add_argument("--b0-start", type=float, default=0.1675)
    ap.add_argument("--b0-stop", type=float, default=0.1700)
    args = ap.parse_args()

    p = HybridParams.from_hz(4.7e9, 4.7e9, 1.1e6, 3.5e6, 26.5e6)
    d = AxionDrive(TWO_PI * 1e-7, TWO_PI * 1e24, p.omega_c)
    b0 = np.linspace(args.b0_start, args.b0_stop, args.points)
    wm = GYROMAGNETIC_RATIO * b0
    lo_edge, hi_edge = sorted(half_power_points(p, d).omega_m_edges)

    raw, filtered = [], []
    for w in wm:
        q = p.with_omega_m(w)
        lo, _ = hybrid_frequencies(q)
        pulse = PulseConfig(0.0, 1.0)
        raw.append(pulse_shots(q, pulse, HeterodyneConfig(lo, 25 * MHZ), 1, seed=0)[0])
        filtered.append(pulse_shots(q, pulse, HeterodyneConfig(lo, 10 * MHZ, band_limit=True), 1, seed=0)[0])
    raw, filtered = np.array(raw) / max(raw), np.array(filtered) / max(filtered)
    model = sweep_omega_m(p, d, "lower", wm)

    print(" b0 [T]    omega_m-omega_c [MHz]  in-band  q_pulse  q_filtered  q_model")
    for b, w, r, f, m in zip(b0, wm, raw, filtered, model.q):
        inside = "yes" if lo_edge <= w <= hi_edge else "no"
        print(f"{b:.5f}  {(w - p.omega_c) / MHZ:21.2f}  {inside:>7s}  {r:7.3f}  {f:10.3f}  {m:7.3f}")
    sel = (wm >= lo_edge) & (wm <= hi_edge)
    print(f"\nworst |q_pulse - q_model| inside the bandwidth:    {np.max(np.abs(raw - model.q)[sel]):.3f}")
    print(f"worst |q_filtered - q_model| inside the bandwidth: {np.max(np.abs(filtered - model.q)[sel]):.3f}")
    print(f"pulse peak at omega_m - omega_c = {(wm[np.argmax(raw)] - p.omega_c) / MHZ:+.2f} MHz, "
          f"model peak at {(wm[np.argmax(model.q)] - p.omega_c) / MHZ:+.2f} MHz")


if __name__ == "__main__":
    main()
