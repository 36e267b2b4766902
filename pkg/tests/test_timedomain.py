import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ferrohaloscope.errors import HeterodyneBandError, UsageError
from ferrohaloscope.model import (
    TWO_PI,
    AxionDrive,
    HybridParams,
    deposited_power,
    hybrid_frequencies,
    response_amplitude,
    transduction_curve,
)
from ferrohaloscope.timedomain import (
    FieldTrace,
    HeterodyneConfig,
    PulseConfig,
    default_dt,
    dissipated_power,
    heterodyne_downconvert,
    integrate_driven,
    jitter_factors,
    pulse_metric,
    pulse_shots,
    ring_down,
    shot_average,
)

MHZ = TWO_PI * 1e6


def steady_state_trace(p, d, samples=200):
    t_end = 20.0 / min(p.gamma_c, p.gamma_m)
    dt = default_dt(p, d.omega_a)
    return integrate_driven(p, d, t_end, dt, record_every=max(1, int(t_end / dt) // samples))


def impulse_energy(p, amplitude, window):
    """Exact integral of |c(t)|^2 over [0, window] after a magnon kick, from the eigen-decomposition."""
    lam, vec = np.linalg.eig(p.hamiltonian())
    coef = np.linalg.solve(vec, np.array([amplitude, 0.0], dtype=complex))
    a = vec[1] * coef  # c(t) = sum_k a_k exp(-i lam_k t)
    total = 0.0 + 0.0j
    for j in range(2):
        for k in range(2):
            rate = -1j * (lam[j] - np.conj(lam[k]))
            total += a[j] * np.conj(a[k]) * np.expm1(rate * window) / rate
    return total.real


def random_systems(n, seed):
    rng = np.random.default_rng(seed)
    wc = TWO_PI * 4.7e9
    out = []
    for _ in range(n):
        gc, gm = MHZ * 10 ** rng.uniform(-1, 1, 2)
        g = MHZ * 10 ** rng.uniform(0, 2)
        p = HybridParams(wc, wc + rng.uniform(-5, 5) * g, gc, gm, g)
        out.append((p, AxionDrive(TWO_PI * 1e-7, 1e4, wc + rng.uniform(-5, 5) * g)))
    return out


# ---------------------------------------------------------------------------
# driven integration


def test_zero_drive_zero_state_is_zero(hs):
    d = AxionDrive(0.0, 1.0, hs.omega_c)
    tr = integrate_driven(hs, d, 1e-6, default_dt(hs, hs.omega_c))
    assert np.all(tr.m_amp == 0) and np.all(tr.c_amp == 0)
    assert np.allclose(np.diff(tr.times), tr.dt, rtol=1e-9)
    assert len(tr.times) == len(tr.m_amp) == len(tr.c_amp)


def test_trace_length_mismatch_rejected(hs):
    with pytest.raises(UsageError):
        FieldTrace(np.zeros(3), np.zeros(3), np.zeros(2), hs)


def test_rabi_period(hs):
    p = HybridParams(hs.omega_c, hs.omega_c, 1e-3, 1e-3, hs.g_cm)
    d = AxionDrive(0.0, 1.0, p.omega_c)
    period = TWO_PI / p.g_cm
    tr = integrate_driven(p, d, 10 * period, default_dt(p, p.omega_c) / 10, initial=(1.0, 0.0))
    x = np.abs(tr.c_amp) ** 2 - 0.5
    up = np.nonzero((x[:-1] < 0) & (x[1:] >= 0))[0]
    # linear interpolation of each upward crossing
    t_up = tr.times[up] - x[up] * tr.dt / (x[up + 1] - x[up])
    assert len(t_up) >= 9
    assert np.mean(np.diff(t_up)) == pytest.approx(period, rel=0.01)
    # full swap: |c|^2 = sin^2(g t / 2)
    np.testing.assert_allclose(np.abs(tr.c_amp) ** 2, np.sin(0.5 * p.g_cm * tr.times) ** 2, atol=1e-6)


def test_steady_state_matches_response_reference(hs, drive):
    for off in (-13.25, -5.0, 0.0, 9.0):
        d = drive.at(hs.omega_c + off * MHZ)
        tr = steady_state_trace(hs, d)
        ref = response_amplitude(hs, d)
        assert abs(tr.c_amp[-1]) == pytest.approx(abs(ref.cavity), rel=1e-4)
        assert abs(tr.m_amp[-1]) == pytest.approx(abs(ref.magnon), rel=1e-4)
        # in the drive frame the steady state is stationary with the analytic phase
        assert abs(tr.c_amp[-1] - ref.cavity) < 1e-4 * abs(ref.cavity)


def test_oracle_equivalence_random_sets():
    worst = 0.0
    for p, d in random_systems(20, seed=11):
        tr = steady_state_trace(p, d)
        ref = abs(response_amplitude(p, d).cavity)
        worst = max(worst, abs(abs(tr.c_amp[-1]) - ref) / ref)
    assert worst < 1e-4


@pytest.mark.parametrize("offset", [0.0, -13.25])
def test_dissipated_power_matches_deposited_power(hs, drive, offset):
    d = drive.at(hs.omega_c + offset * MHZ)
    tr = steady_state_trace(hs, d)
    assert dissipated_power(tr) == pytest.approx(deposited_power(hs, d), rel=1e-4)


def test_dissipated_power_needs_rotating_frame(hs, drive):
    tr = integrate_driven(hs, drive, 2e-9, 1e-12, frame="lab")
    with pytest.raises(UsageError):
        dissipated_power(tr)


def test_step_precondition(hs, drive):
    with pytest.raises(UsageError):
        integrate_driven(hs, drive, 1e-6, 1e-8)
    with pytest.raises(UsageError):
        integrate_driven(hs, drive, 1e-9, 0.06 * TWO_PI / hs.omega_c, frame="lab")
    with pytest.raises(UsageError):
        integrate_driven(hs, drive, -1.0, 1e-12)
    with pytest.raises(UsageError):
        integrate_driven(hs, drive, 1e-9, 1e-12, frame="sideways")


def test_deterministic(hs, drive):
    a = steady_state_trace(hs, drive)
    b = steady_state_trace(hs, drive)
    assert np.array_equal(a.c_amp, b.c_amp)


def test_record_every_bounds(hs, drive):
    dt = default_dt(hs, drive.omega_a)
    with pytest.raises(UsageError):
        integrate_driven(hs, drive, 10 * dt, dt, record_every=11)
    with pytest.raises(UsageError):
        integrate_driven(hs, drive, 10 * dt, dt, record_every=0)


def test_record_every_only_decimates(hs, drive):
    dt = default_dt(hs, drive.omega_a)
    full = integrate_driven(hs, drive, 200 * dt, dt)
    thin = integrate_driven(hs, drive, 200 * dt, dt, record_every=10)
    np.testing.assert_allclose(thin.c_amp, full.c_amp[::10], rtol=1e-12, atol=1e-12 * np.abs(full.c_amp).max())
    np.testing.assert_allclose(thin.times, full.times[::10], rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-3, 3), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(1, 100),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
)
def test_passivity(offset, gc, gm, g, c0):
    p = HybridParams(TWO_PI * 4.7e9, TWO_PI * 4.7e9 + offset * g * MHZ, gc * MHZ, gm * MHZ, g * MHZ)
    tr = ring_down(p, PulseConfig(0.0, 1.0 + 0.5j), 2.0 / p.gamma_h)
    e = tr.energy
    assert np.all(e[1:] <= e[:-1] * (1 + 1e-9))
    d = AxionDrive(0.0, 1.0, p.omega_c)
    tr = integrate_driven(p, d, 1.0 / p.gamma_h, default_dt(p, p.omega_c), initial=(0.3, c0))
    e = tr.energy
    assert np.all(e[1:] <= e[:-1] * (1 + 1e-9))


def test_rk4_fourth_order_convergence(hs, drive):
    d = drive.at(hs.omega_c + 3 * MHZ)
    t_end = 200e-9
    base = 2e-10
    ref = integrate_driven(hs, d, t_end, base / 64, record_every=64).c_amp
    errs = []
    for k in (1, 2, 4):
        tr = integrate_driven(hs, d, t_end, base / k, record_every=k)
        errs.append(np.max(np.abs(tr.c_amp - ref)))
    for coarse, fine in zip(errs, errs[1:]):
        assert 12.0 < coarse / fine < 20.0


def test_lab_and_rotating_frames_agree(hs, drive):
    d = drive.at(hs.omega_c - 7 * MHZ)
    period = TWO_PI / d.omega_a
    t_end = 100 * period
    dt = period / 400
    lab = integrate_driven(hs, d, t_end, dt, initial=(0.2, 0.1j), frame="lab")
    rot = integrate_driven(hs, d, t_end, dt, initial=(0.2, 0.1j))
    scale = np.abs(lab.c_amp).max()
    assert np.max(np.abs(np.abs(lab.c_amp) - np.abs(rot.c_amp))) < 1e-6 * scale
    # the lab reconstruction of the rotating trace matches the complex lab amplitude too
    _, c_lab = rot.lab()
    assert np.max(np.abs(c_lab - lab.c_amp)) < 1e-6 * scale


# ---------------------------------------------------------------------------
# ring-down


def fit_decay_rate(tr, tau_h, t0=0.0):
    sel = (tr.times >= t0) & (tr.times <= t0 + 4 * tau_h)
    slope, _ = np.polyfit(tr.times[sel] - t0, np.log(tr.energy[sel]), 1)
    return -slope


def test_ring_down_decay_rate_at_degeneracy(hs):
    tau = 1 / hs.gamma_h
    tr = ring_down(hs, PulseConfig(t0=50e-9, deposited_magnon_amplitude=1.0), 4 * tau)
    assert tr.times[0] == 50e-9
    assert tr.m_amp[0] == pytest.approx(np.exp(1j * hs.omega_c * 50e-9))
    assert tr.c_amp[0] == 0
    assert fit_decay_rate(tr, tau, t0=50e-9) == pytest.approx(hs.gamma_h, rel=0.01)


def test_ring_down_kick_is_lab_frame_amplitude(hs):
    pulse = PulseConfig(t0=13e-9, deposited_magnon_amplitude=0.5 - 0.2j)
    tr = ring_down(hs, pulse, 1e-7)
    m_lab, _ = tr.lab()
    assert m_lab[0] == pytest.approx(0.5 - 0.2j, rel=1e-12)


def test_ring_down_far_detuned_stays_magnon_like(hs):
    p = hs.with_omega_m(hs.omega_c + 200 * hs.g_cm)
    tr = ring_down(p, PulseConfig(0.0, 1.0), 4 / p.gamma_h, omega_frame=p.omega_m)
    # amplitudes compared by their maxima; pointwise the ratio grows as the
    # magnon-like part decays faster than the leaked cavity-like part
    assert np.abs(tr.c_amp).max() < 1e-2 * np.abs(tr.m_amp).max()


def test_ring_down_zero_amplitude(hs):
    tr = ring_down(hs, PulseConfig(0.0, 0.0), 1e-7)
    assert np.all(tr.m_amp == 0) and np.all(tr.c_amp == 0)


def test_pulse_config_validation():
    with pytest.raises(UsageError):
        PulseConfig(jitter=-0.1)
    with pytest.raises(UsageError):
        HeterodyneConfig(0.0, 1.0)
    with pytest.raises(UsageError):
        HeterodyneConfig(1.0, -1.0)


# ---------------------------------------------------------------------------
# heterodyne


def test_zero_if_is_pure_envelope(hs):
    lo, _ = hybrid_frequencies(hs)
    # far from degeneracy one mode dominates the cavity field
    p = hs.with_omega_m(hs.omega_c + 5 * hs.g_cm)
    lo, _ = hybrid_frequencies(p)
    tr = ring_down(p, PulseConfig(0.0, 1.0), 4 / p.gamma_h)
    bb = heterodyne_downconvert(tr, HeterodyneConfig(lo, 25 * MHZ))
    assert bb.omega_if == 0.0
    phase = np.unwrap(np.angle(bb.r[10:]))
    # the weak upper-mode admixture leaves a small ripple, no residual carrier
    slope = np.polyfit(bb.times[10:], phase, 1)[0]
    assert abs(slope) < 0.01 * p.gamma_h


def test_offset_lo_puts_peak_at_difference(hs):
    p = hs.with_omega_m(hs.omega_c + 5 * hs.g_cm)
    lo, _ = hybrid_frequencies(p)
    delta = 8 * MHZ
    tr = ring_down(p, PulseConfig(0.0, 1.0), 4 / p.gamma_h)
    bb = heterodyne_downconvert(tr, HeterodyneConfig(lo + delta, 25 * MHZ))
    spec = np.abs(np.fft.fft(bb.r))
    freqs = TWO_PI * np.fft.fftfreq(len(bb.r), tr.dt)
    bin_width = TWO_PI / (len(bb.r) * tr.dt)
    assert abs(freqs[np.argmax(spec)] - delta) <= bin_width
    assert bb.omega_if == pytest.approx(delta)


def test_mixing_preserves_amplitude(hs):
    tr = ring_down(hs, PulseConfig(0.0, 1.0), 4 / hs.gamma_h)
    lo, _ = hybrid_frequencies(hs)
    bb = heterodyne_downconvert(tr, HeterodyneConfig(lo + 3 * MHZ, 25 * MHZ))
    assert abs(np.abs(bb.r).max() - np.abs(tr.c_amp).max()) < 1e-9
    np.testing.assert_allclose(np.abs(bb.r), np.abs(tr.c_amp), rtol=1e-12)


def test_signal_outside_band_raises(hs):
    tr = ring_down(hs, PulseConfig(0.0, 1.0), 1e-7)
    lo, _ = hybrid_frequencies(hs)
    with pytest.raises(HeterodyneBandError):
        heterodyne_downconvert(tr, HeterodyneConfig(lo + 30 * MHZ, 25 * MHZ))


def test_band_limit_removes_the_other_hybrid_mode(hs):
    tr = ring_down(hs, PulseConfig(0.0, 1.0), 8 / hs.gamma_h)
    lo, hi = hybrid_frequencies(hs)
    h = HeterodyneConfig(lo, 10 * MHZ, band_limit=True)
    bb = heterodyne_downconvert(tr, h)
    spec = np.abs(np.fft.fft(bb.r))
    freqs = TWO_PI * np.fft.fftfreq(len(bb.r), tr.dt)
    assert np.all(spec[np.abs(freqs) > 10 * MHZ] < 1e-9 * spec.max())
    # without the filter the upper mode shows up at hi - lo
    raw = np.abs(np.fft.fft(heterodyne_downconvert(tr, HeterodyneConfig(lo, 10 * MHZ)).r))
    k = np.argmin(np.abs(freqs + (hi - lo)))
    assert raw[k] > 0.1 * raw.max()


# ---------------------------------------------------------------------------
# pulse metric and averaging


def test_pulse_metric_closed_form():
    gh = 2.3 * MHZ
    tau = 1 / gh
    t = np.linspace(0, 5 * tau, 200001)
    r = np.exp(-0.5 * gh * t) * np.exp(1j * 3e6 * t)
    assert pulse_metric(t, r, 0.0, tau) == pytest.approx((1 - np.exp(-4)) / gh, rel=1e-8)


def test_pulse_metric_interpolates_window_edges():
    gh = 1.0
    t = np.linspace(-1.0, 6.0, 70001)
    r = np.exp(-0.5 * gh * np.clip(t - 0.123, 0, None))
    expected = (1 - np.exp(-4)) / gh
    assert pulse_metric(t, r, 0.123, 1.0) == pytest.approx(expected, rel=1e-7)


def test_pulse_metric_zero_series():
    t = np.linspace(0, 1, 101)
    assert pulse_metric(t, np.zeros(101), 0.0, 0.2) == 0.0


def test_pulse_metric_coverage():
    t = np.linspace(0, 1, 101)
    with pytest.raises(UsageError):
        pulse_metric(t, np.ones(101), 0.0, 0.3)
    with pytest.raises(UsageError):
        pulse_metric(t, np.ones(101), -0.1, 0.2)


@pytest.mark.parametrize(
    "values, expected",
    [([2.5], (2.5, 0.0)), ([1, 1, 1], (1.0, 0.0)), ([1, 2, 3, 4], (2.5, np.std([1, 2, 3, 4], ddof=1)))],
)
def test_shot_average(values, expected):
    assert shot_average(values) == pytest.approx(expected)


def test_shot_average_empty():
    with pytest.raises(UsageError):
        shot_average([])


def test_jitter_factors_statistics():
    f = jitter_factors(0.1, 200000, seed=3)
    assert np.all(f > 0)
    assert f.mean() == pytest.approx(1.0, abs=2e-3)
    assert f.std() / f.mean() == pytest.approx(0.1, rel=0.02)
    assert np.array_equal(jitter_factors(0.0, 5, seed=1), np.ones(5))
    with pytest.raises(UsageError):
        jitter_factors(-0.1, 5, seed=1)


def test_jitter_monte_carlo_bound(hs):
    p = hs.with_omega_m(hs.omega_c - 5 * MHZ)
    lo, _ = hybrid_frequencies(p)
    q = pulse_shots(p, PulseConfig(0.0, 1.0, 0.1), HeterodyneConfig(lo + 5 * MHZ, 25 * MHZ), 1000, seed=2021)
    mean, std = shot_average(q)
    # the metric is quadratic in the amplitude: relative spread doubles
    assert 0.08 <= std / mean / 2 <= 0.12


def test_pulse_shots_seeded(hs):
    lo, _ = hybrid_frequencies(hs)
    h = HeterodyneConfig(lo, 25 * MHZ)
    pulse = PulseConfig(0.0, 1.0, 0.05)
    a = pulse_shots(hs, pulse, h, 20, seed=5)
    assert np.array_equal(a, pulse_shots(hs, pulse, h, 20, seed=5))
    assert not np.array_equal(a, pulse_shots(hs, pulse, h, 20, seed=6))
    with pytest.raises(UsageError):
        pulse_shots(hs, pulse, h, 0, seed=5)


def test_pulse_shots_zero_jitter_identical(hs):
    lo, _ = hybrid_frequencies(hs)
    q = pulse_shots(hs, PulseConfig(0.0, 1.0, 0.0), HeterodyneConfig(lo, 25 * MHZ), 4, seed=0)
    assert np.all(q == q[0])


# ---------------------------------------------------------------------------
# end-to-end pipeline


@pytest.mark.parametrize("offset", [-40, -13.25, -5, 0, 10, 40])
def test_pipeline_matches_impulse_energy(hs, offset):
    p = hs.with_omega_m(hs.omega_c + offset * MHZ)
    lo, _ = hybrid_frequencies(p)
    tau = 1 / p.gamma_h
    q = pulse_shots(p, PulseConfig(0.0, 1.0, 0.0), HeterodyneConfig(lo, 25 * MHZ), 1, seed=0)[0]
    assert q == pytest.approx(impulse_energy(p, 1.0, 4 * tau), rel=1e-6)


def pipeline_vs_transduction(hs, drive, n=15):
    from ferrohaloscope.model import half_power_points

    hp = half_power_points(hs, drive, "lower")
    wm = np.linspace(*sorted(hp.omega_m_edges), n)
    q = []
    for w in wm:
        p = hs.with_omega_m(w)
        lo, _ = hybrid_frequencies(p)
        q.append(pulse_shots(p, PulseConfig(0.0, 1.0), HeterodyneConfig(lo, 25 * MHZ), 1, seed=0)[0])
    q = np.array(q)
    model = transduction_curve(hs, drive, "lower", [hybrid_frequencies(hs.with_omega_m(w))[0] for w in wm]).p_ac
    # best global scale in the least-squares sense
    scale = np.dot(q, model) / np.dot(q, q)
    return np.max(np.abs(scale * q - model) / model)


@pytest.mark.xfail(
    strict=True,
    reason="impulse-response energy scales as residue^2/linewidth, steady-state power as residue^2/linewidth^2; "
    "the two curves differ by more than 5% across the bandwidth",
)
def test_pipeline_tracks_transduction_curve_within_five_percent(hs, drive):
    assert pipeline_vs_transduction(hs, drive) < 0.05
