"""Anticrossing map, both branch bandwidths and their growth with damping.

    python scripts/anticrossing_bandwidth.py --out results
"""

import argparse
from pathlib import Path

import numpy as np

from ferrohaloscope import svg
from ferrohaloscope.model import TWO_PI, AxionDrive, HybridParams, _power, half_power_points

MHZ = TWO_PI * 1e6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    p = HybridParams.from_hz(4.7e9, 4.7e9, 1.1e6, 3.5e6, 26.5e6)
    d = AxionDrive(TWO_PI * 1e-7, TWO_PI * 1e24, p.omega_c)

    wm = p.omega_c + np.linspace(-100, 100, 201) * MHZ
    wa = p.omega_c + np.linspace(-100, 100, 401) * MHZ
    z = _power(p.omega_c, wm[None, :], p.gamma_c, p.gamma_m, p.g_cm, wa[:, None], d.amplitude)
    svg.heatmap(out / "anticrossing.svg", wm / TWO_PI / 1e9, wa / TWO_PI / 1e9, z,
                title="deposited power", xlabel="omega_m / 2pi (GHz)", ylabel="omega_a / 2pi (GHz)")

    for branch in ("lower", "upper"):
        hp = half_power_points(p, d, branch)
        print(f"{branch:5s}: {hp.larmor_width / MHZ:8.3f} MHz in omega_m, {hp.hybrid_width / MHZ:7.3f} MHz in omega_pm, "
              f"peak at omega_pm - omega_c = {(hp.omega_pm_peak - p.omega_c) / MHZ:+.3f} MHz")

    print("\nscale  gamma_h/2pi [MHz]  bandwidth [MHz]  bandwidth / gamma_h")
    rows = []
    for s in (0.25, 0.5, 1, 2, 4, 8):
        q = HybridParams(p.omega_c, p.omega_m, s * p.gamma_c, s * p.gamma_m, p.g_cm)
        bw = half_power_points(q, d).larmor_width
        rows.append((s, q.gamma_h / MHZ, bw / MHZ))
        print(f"{s:5.2f}  {q.gamma_h / MHZ:17.3f}  {bw / MHZ:15.3f}  {bw / q.gamma_h:19.2f}")
    np.savetxt(out / "bandwidth_vs_damping.csv", rows, delimiter=",",
               header="damping_scale,gamma_h_mhz,bandwidth_mhz", comments="")


if __name__ == "__main__":
    main()
