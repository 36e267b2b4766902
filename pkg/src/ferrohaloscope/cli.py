"""Command-line front end.

    ferrohaloscope anticross --config fig2.ini --out anticross.csv
    ferrohaloscope bandwidth --config fig2.ini --set system.g_cm_hz=28.5e6
    ferrohaloscope pulse     --config fig4.ini --jobs 4 --seed 7 --svg
    ferrohaloscope spectrum  --config fig2.ini

Exit codes: 0 success, 2 configuration error, 3 numerical diagnostic, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, svg
from .config import RunConfig, parse_overrides
from .errors import BandwidthError, ConfigError, DiagnosticError, DomainError, HeterodyneBandError, UsageError
from .model import (
    GYROMAGNETIC_RATIO,
    TWO_PI,
    _power,
    half_power_points,
    hybrid_frequencies,
    larmor_frequency,
    multi_mode_response,
    sweep_omega_m,
    transduction_curve,
)
from .spectroscopy import Spectrum, extract_details, transmission_spectrum
from .timedomain import HeterodyneConfig, PulseConfig, pulse_shots, shot_average

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("anticross", "bandwidth", "pulse", "spectrum")


@dataclass
class Table:
    command: str
    columns: list[str]
    rows: list[tuple]
    report: list[str] = field(default_factory=list)
    plot: Callable[[Path], None] | None = None
    # diagnostics that should end the run with a non-zero status after writing
    failures: list[str] = field(default_factory=list)


def _pool_map(fn, items: Sequence, jobs: int) -> list:
    """Ordered map; a process pool when ``jobs > 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))


def _hz(omega):
    return np.asarray(omega) / TWO_PI


# ---------------------------------------------------------------------------
# anticross


def _anticross_column(values: dict, omega_a: np.ndarray, omega_m: float) -> np.ndarray:
    cfg = RunConfig(values)
    d = cfg.drive()
    if not cfg.extra_modes():
        p = cfg.system(omega_m)
        return _power(p.omega_c, omega_m, p.gamma_c, p.gamma_m, p.g_cm, omega_a, d.amplitude)
    s = cfg.mode_system(omega_m)
    amps = np.array([multi_mode_response(s, d.at(w)).cavity for w in omega_a])
    return s.gamma_c * omega_a**2 / (2.0 * s.omega_c) * np.abs(amps) ** 2


def cmd_anticross(cfg: RunConfig, jobs: int = 1) -> Table:
    """Deposited power on a (omega_m, omega_a) grid, long format."""
    omega_m, _ = cfg.omega_m_axis()
    omega_a = TWO_PI * cfg.omega_a_sweep().values()
    cfg.system(float(omega_m[0]))
    grid = _pool_map(partial(_anticross_column, cfg.values, omega_a), list(omega_m), jobs)
    rows = [
        (float(_hz(wm)), float(_hz(wa)), float(pw))
        for wm, col in zip(omega_m, grid)
        for wa, pw in zip(omega_a, col)
    ]

    def plot(path):
        svg.heatmap(
            path, _hz(omega_m) / 1e9, _hz(omega_a) / 1e9, np.array(grid).T,
            title="deposited power", xlabel="omega_m / 2pi (GHz)", ylabel="omega_a / 2pi (GHz)",
        )

    return Table("anticross", ["omega_m_hz", "omega_a_hz", "p_ac"], rows, plot=plot)


# ---------------------------------------------------------------------------
# bandwidth


def cmd_bandwidth(cfg: RunConfig, jobs: int = 1) -> Table:
    """Half-power widths of both branches plus the transduction curve on the configured sweep."""
    p, d = cfg.system(), cfg.drive()
    branch = cfg.branch
    spec = cfg.sweep()
    if spec.quantity == "omega_minus":
        try:
            res = transduction_curve(p, d, branch, TWO_PI * spec.values())
        except DomainError as exc:
            raise ConfigError(f"sweep: {exc}") from exc
    elif spec.quantity == "omega_a":
        raise ConfigError("bandwidth sweeps b0, omega_m or omega_minus")
    else:
        omega_m, _ = cfg.omega_m_axis()
        res = sweep_omega_m(p, d, branch, omega_m)

    report, failures = [], []
    for b in ("lower", "upper"):
        try:
            hp = half_power_points(p, d, b)
        except BandwidthError as exc:
            failures.append(f"{b}-branch bandwidth: {exc}")
            continue
        report.append(
            f"{b}-branch bandwidth: {hp.larmor_width / TWO_PI / 1e6:.3f} MHz "
            f"(Larmor tuning range; {hp.hybrid_width / TWO_PI / 1e6:.3f} MHz in hybrid frequency), "
            f"peak at omega_{'-' if b == 'lower' else '+'}/2pi = {hp.omega_pm_peak / TWO_PI / 1e9:.6f} GHz, "
            f"omega_m/2pi = {hp.omega_m_peak / TWO_PI / 1e9:.6f} GHz"
        )

    rows = [
        (float(wm / GYROMAGNETIC_RATIO), float(_hz(wm)), float(_hz(lo)), float(_hz(hi)), float(pw), float(q))
        for wm, lo, hi, pw, q in zip(res.omega_m, res.omega_minus, res.omega_plus, res.p_ac, res.q)
    ]

    def plot(path):
        svg.line_plot(
            path, {f"q ({branch})": (_hz(res.omega_branch) / 1e9, res.q)},
            title="transduction curve", xlabel=f"omega_{'-' if branch == 'lower' else '+'} / 2pi (GHz)", ylabel="q",
        )

    cols = ["b0_tesla", "omega_m_hz", "omega_minus_hz", "omega_plus_hz", "p_ac", "q"]
    return Table("bandwidth", cols, rows, report, plot, failures)


# ---------------------------------------------------------------------------
# pulse


def _pulse_point(values: dict, task: tuple) -> tuple:
    omega_m, seed = task
    cfg = RunConfig(values)
    p = cfg.system(omega_m)
    omega_minus = hybrid_frequencies(p)[0]
    lo_fixed = cfg.get_float("heterodyne.lo_hz")
    omega_lo = TWO_PI * lo_fixed if lo_fixed > 0 else omega_minus + TWO_PI * cfg.get_float("heterodyne.lo_offset_hz")
    pulse = PulseConfig(cfg.get_float("pulse.t0_s"), cfg.get_float("pulse.amplitude"), cfg.get_float("pulse.jitter"))
    het = HeterodyneConfig(omega_lo, TWO_PI * cfg.get_float("heterodyne.band_hz"), cfg.get_bool("heterodyne.band_limit"))
    n = cfg.get_int("pulse.shots")
    dt = cfg.get_float("pulse.dt_s") or None
    try:
        shots = pulse_shots(p, pulse, het, n, np.random.default_rng(seed), dt)
    except HeterodyneBandError as exc:
        return omega_minus, np.nan, np.nan, 0, str(exc)
    mean, std = shot_average(shots)
    return omega_minus, mean, std, n, "ok"


def cmd_pulse(cfg: RunConfig, jobs: int = 1) -> Table:
    """Simulated pulsed experiment: ring-down, down-conversion and integration per field point."""
    omega_m, b0 = cfg.omega_m_axis()
    if b0 is None:
        b0 = omega_m / GYROMAGNETIC_RATIO
    if cfg.get_int("pulse.shots") < 1:
        raise ConfigError("pulse.shots must be >= 1")
    for w in omega_m:
        cfg.system(float(w))
    if cfg.get_float("pulse.jitter") < 0:
        raise ConfigError("pulse.jitter must be non-negative")
    if cfg.get_float("heterodyne.band_hz") <= 0:
        raise ConfigError("heterodyne.band_hz must be positive")

    seeds = np.random.SeedSequence(cfg.seed).spawn(len(omega_m))
    results = _pool_map(partial(_pulse_point, cfg.values), list(zip(omega_m, seeds)), jobs)

    means = np.array([r[1] for r in results])
    ok = np.isfinite(means)
    if not ok.any():
        raise DiagnosticError("every field point failed: " + results[0][4])
    scale = means[ok].max()
    model = sweep_omega_m(cfg.system(), cfg.drive(), "lower", omega_m).q

    rows, report = [], []
    for b, wm, (wl, mean, std, n, status), qm in zip(b0, omega_m, results, model):
        flag = "ok" if status == "ok" else "out_of_band"
        rows.append((float(b), float(_hz(wm)), float(_hz(wl)), mean / scale, std / scale, int(n), float(qm), flag))
        if status != "ok":
            report.append(f"b0={b:.6g} T flagged: {status}")

    def plot(path):
        x = np.array([r[2] for r in rows]) / 1e9
        q = np.array([r[3] for r in rows])
        e = np.array([r[4] for r in rows])
        svg.line_plot(
            path, {"simulated q_r": (x, q), "model q": (x, model)},
            title="pulsed transduction", xlabel="omega_- / 2pi (GHz)", ylabel="normalised", markers=True,
            errors={"simulated q_r": e},
        )

    cols = ["b0_tesla", "omega_m_hz", "omega_minus_hz", "q_mean", "q_std", "n_shots", "q_model", "status"]
    return Table("pulse", cols, rows, report, plot)


# ---------------------------------------------------------------------------
# spectrum


def _spectrum_point(values: dict, freqs: np.ndarray, b0: float) -> np.ndarray:
    cfg = RunConfig(values)
    return transmission_spectrum(cfg.system(larmor_frequency(b0)), freqs).magnitude_sq


def cmd_spectrum(cfg: RunConfig, jobs: int = 1) -> Table:
    """Normalised |S21|^2 for each configured static field."""
    b0s = cfg.get_list("spectrum.b0_t")
    if not b0s:
        raise ConfigError("spectrum.b0_t is empty")
    if any(b < 0 for b in b0s):
        raise ConfigError("spectrum.b0_t entries must be non-negative")
    start, stop = cfg.get_float("spectrum.f_start_hz"), cfg.get_float("spectrum.f_stop_hz")
    n = cfg.get_int("spectrum.points")
    if n < 2 or not start < stop:
        raise ConfigError("spectrum grid needs points >= 2 and f_start_hz < f_stop_hz")
    cfg.system()
    freqs = np.linspace(start, stop, n)
    mags = _pool_map(partial(_spectrum_point, cfg.values, freqs), b0s, jobs)
    rows = [(float(b), float(f), float(m)) for b, mag in zip(b0s, mags) for f, m in zip(freqs, mag)]

    report = []
    try:
        ex = extract_details([(b, Spectrum(freqs, m)) for b, m in zip(b0s, mags)])
        q = ex.params
        report.append(
            "extracted: "
            f"omega_c/2pi={_hz(q.omega_c):.6e} Hz, gamma_c/2pi={_hz(q.gamma_c):.4e} Hz, "
            f"gamma_m/2pi={_hz(q.gamma_m):.4e} Hz, g_cm/2pi={_hz(q.g_cm):.4e} Hz, "
            f"Q={q.omega_c / q.gamma_c:.1f}"
        )
    except (DiagnosticError, UsageError) as exc:
        report.append(f"parameter extraction skipped: {exc}")

    def plot(path):
        svg.line_plot(
            path, {f"B0={b:g} T": (freqs / 1e9, m) for b, m in zip(b0s, mags)},
            title="transmission", xlabel="frequency (GHz)", ylabel="|S21|^2 (norm.)",
        )

    return Table("spectrum", ["b0_tesla", "frequency_hz", "s21_sq"], rows, report, plot)


RUNNERS = {"anticross": cmd_anticross, "bandwidth": cmd_bandwidth, "pulse": cmd_pulse, "spectrum": cmd_spectrum}


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, table: Table, cfg: RunConfig) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# ferrohaloscope {__version__} {table.command}\n")
        fh.write(f"# config_sha256: {cfg.digest}\n")
        for key, val in sorted(cfg.values.items()):
            fh.write(f"# config: {key} = {val}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ferrohaloscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=RUNNERS[name].__doc__.splitlines()[0])
        sp.add_argument("--config", help="INI file, or a CSV emitted by a previous run")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--out", help=f"output CSV (default {name}.csv)")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--svg", action="store_true", help="also write an SVG plot next to the CSV")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out or f"{args.command}.csv")
    try:
        overrides = parse_overrides(args.set)
        if args.seed is not None:
            overrides["run.seed"] = str(args.seed)
        cfg = RunConfig.load(args.config, overrides)
        table = RUNNERS[args.command](cfg, max(1, args.jobs))
    except (ConfigError, UsageError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DiagnosticError as exc:
        print(f"diagnostic: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        write_csv(out, table, cfg)
        if args.svg and table.plot is not None:
            table.plot(out.with_suffix(".svg"))
    except OSError as exc:
        print(f"cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO

    for line in table.report:
        print(line)
    for line in table.failures:
        print(f"diagnostic: {line}", file=sys.stderr)
    return EXIT_NUMERIC if table.failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
