"""Trajectory observables, envelope monitors, rate fits, asynchronous degree.

Closed-form cases are worked by hand from the quadrature definitions
(midpoint rule on cell centers, per-face area weights on the boundary);
simulated cases use profiles whose exact behavior is known, or synthetic
records built directly so each monitor's pass and fail branches are both
exercised against hand-computed envelopes.
"""

import math

import numpy as np
import pytest

from hrnet.core import DerivedConstants, HRParameters, derive_constants, entry_time
from hrnet.domain import (
    build_domain,
    full_boundary_matching,
    poincare_constants,
    trivial_matching,
)
from hrnet.dynamics import (
    InitialCondition,
    IntegratorConfig,
    NetworkState,
    initial_state,
    simulate,
)
from hrnet.errors import IntegrationError
from hrnet.metrics import (
    TrajectoryObserver,
    TrajectoryRecord,
    asynchronous_degree,
    compute_K,
    energy_monitor,
    envelope_check,
    fit_sync_rate,
    pair_differences,
    record_trajectory,
    stimulation_signal,
)

# round-number constants so every envelope below is hand-checkable:
# threshold_perpair = big_r_alt * omega = 1, decay amplitude 2*max(g,1)*Q = 2
FRIENDLY = DerivedConstants(
    c1=1.0, c2=1.0, r_star=1.0, big_m=1.0, big_q=1.0, g=1.0,
    eta1=1.0, eta2=1.0, big_r=2.0, big_r_alt=1.0, mu=1.0, omega_measure=1.0,
)


def make_state(domain, u_rows, v_rows=None, w_rows=None, t=0.0):
    u = np.array(u_rows, dtype=np.float64)
    v = np.array(v_rows, dtype=np.float64) if v_rows is not None else np.zeros_like(u)
    w = np.array(w_rows, dtype=np.float64) if w_rows is not None else np.zeros_like(u)
    assert u.shape[-1] == domain.n_cells
    return NetworkState(t=t, u=u, v=v, w=w)


def constant_rows(domain, values):
    return [np.full(domain.n_cells, val) for val in values]


def synth_record(t, total, stim, sync, consts=FRIENDLY, envelope=None, weighted=None):
    """Assemble a record directly so monitor branches can be forced."""
    t = np.asarray(t, dtype=np.float64)
    total = np.asarray(total, dtype=np.float64)
    diff_g = np.asarray(sync, dtype=np.float64).reshape(-1, 1)
    if envelope is None:
        envelope = np.full_like(t, 10.0 * max(total.max(), 1.0))
    return TrajectoryRecord(
        t=t,
        total_energy=total,
        weighted_energy=np.asarray(weighted, np.float64) if weighted is not None else total.copy(),
        gronwall_envelope=np.asarray(envelope, dtype=np.float64),
        stimulation_s=np.asarray(stim, dtype=np.float64),
        threshold_literal=np.full_like(t, consts.big_r * consts.omega_measure),
        threshold_perpair=np.full_like(t, consts.big_r_alt * consts.omega_measure),
        boundary_diff_full=np.zeros_like(t),
        k_sum=np.zeros_like(t),
        diff_energy_g=diff_g,
        diff_energy_plain=diff_g.copy(),
        pairs=((0, 1),),
        n_neurons=2,
        consts=consts,
        rho0=float(total[0]),
    )


# ---------------------------------------------------------------------------
# pairwise difference energies
# ---------------------------------------------------------------------------

def test_pair_differences_identical_states_are_zero():
    domain = build_domain(1, [1.0], [8])
    field = np.linspace(-1.0, 2.0, domain.n_cells)
    state = make_state(domain, [field, field.copy()], [field, field.copy()])
    diffs = pair_differences(state, domain, g=7.0)
    for arr in (diffs.u_sq, diffs.v_sq, diffs.w_sq, diffs.diff_plain, diffs.diff_g):
        assert np.all(arr == 0.0)


def test_pair_differences_constant_gap_oracle():
    # |Omega| = 2: u gap of 1 integrates to exactly 2, weighted by g in diff_g
    domain = build_domain(1, [2.0], [8])
    state = make_state(domain, constant_rows(domain, (1.0, 0.0)))
    diffs = pair_differences(state, domain, g=7.0)
    assert diffs.u_sq[0, 1] == 2.0
    assert diffs.u_sq[1, 0] == 2.0
    assert diffs.v_sq[0, 1] == 0.0
    assert diffs.diff_plain[0, 1] == 2.0
    assert diffs.diff_g[0, 1] == 14.0
    assert diffs.diff_g[0, 0] == 0.0 and diffs.diff_g[1, 1] == 0.0


def test_pair_differences_v_w_terms_not_weighted_by_g():
    domain = build_domain(1, [2.0], [8])
    u = constant_rows(domain, (0.5, 0.5))
    v = constant_rows(domain, (2.0, 0.0))
    w = constant_rows(domain, (3.0, 0.0))
    state = make_state(domain, u, v, w)
    diffs = pair_differences(state, domain, g=7.0)
    assert diffs.u_sq[0, 1] == 0.0
    assert diffs.v_sq[0, 1] == 8.0   # 2^2 * |Omega|
    assert diffs.w_sq[0, 1] == 18.0  # 3^2 * |Omega|
    assert diffs.diff_plain[0, 1] == 26.0
    # g multiplies only the membrane term
    assert diffs.diff_g[0, 1] == 26.0


def test_pair_differences_three_neurons_symmetric():
    domain = build_domain(1, [1.0], [16])
    rng = np.random.default_rng(402)
    state = NetworkState(
        t=0.0,
        u=rng.normal(size=(3, domain.n_cells)),
        v=rng.normal(size=(3, domain.n_cells)),
        w=rng.normal(size=(3, domain.n_cells)),
    )
    diffs = pair_differences(state, domain, g=2.5)
    for arr in (diffs.u_sq, diffs.diff_plain, diffs.diff_g):
        assert np.array_equal(arr, arr.T)
        assert np.all(np.diag(arr) == 0.0)
    assert np.array_equal(diffs.diff_plain, diffs.u_sq + diffs.v_sq + diffs.w_sq)


# ---------------------------------------------------------------------------
# boundary signals
# ---------------------------------------------------------------------------

def test_stimulation_signal_constant_gap_1d():
    # two faces of area 1, gap 0.5: S = p * 0.25 * 2 = p * 0.5
    domain = build_domain(1, [1.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    state = make_state(domain, constant_rows(domain, (0.75, 0.25)))
    assert stimulation_signal(state, matching, p=2.0) == 1.0
    assert stimulation_signal(state, matching, p=0.0) == 0.0


def test_stimulation_signal_trivial_matching_is_zero():
    domain = build_domain(1, [1.0], [8])
    state = make_state(domain, constant_rows(domain, (5.0, -5.0)))
    assert stimulation_signal(state, trivial_matching(domain, 2), p=3.0) == 0.0


def test_stimulation_signal_2d_area_weighting():
    # perimeter of [0,1]x[0,1.5] is 5; unit gap, p = 1 integrates to 5
    domain = build_domain(2, [1.0, 1.5], [4, 6])
    matching = full_boundary_matching(domain, 2, "1-2")
    state = make_state(domain, constant_rows(domain, (1.0, 0.0)))
    assert stimulation_signal(state, matching, p=1.0) == 5.0


def test_compute_K_two_neuron_constant_gap_probe():
    # gap delta = 0.5 on the whole boundary |Gamma| = 2:
    #   K_12 = 2 delta^2 |Gamma| = 1, summed K = 2, ordered-pair gap sum = 1
    domain = build_domain(1, [1.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    state = make_state(domain, constant_rows(domain, (0.75, 0.25)))
    res = compute_K(state, matching)
    assert res.k[0, 0] == 0.0 and res.k[1, 1] == 0.0
    assert res.k[0, 1] == pytest.approx(1.0, rel=1e-12)
    assert res.k[1, 0] == res.k[0, 1]
    assert res.k_sum == pytest.approx(2.0, rel=1e-12)
    assert res.boundary_diff_full == pytest.approx(1.0, rel=1e-12)
    assert res.ek_ratio == pytest.approx(2.0, rel=1e-12)


def test_compute_K_symmetry_and_full_sum_random_fields():
    domain = build_domain(1, [1.0], [12])
    matching = full_boundary_matching(domain, 3, "1-2")  # neuron 3 zero-flux
    rng = np.random.default_rng(515)
    state = NetworkState(
        t=0.0,
        u=rng.normal(size=(3, domain.n_cells)),
        v=np.zeros((3, domain.n_cells)),
        w=np.zeros((3, domain.n_cells)),
    )
    res = compute_K(state, matching)
    assert np.array_equal(res.k, res.k.T)
    assert np.all(np.diag(res.k) == 0.0)
    # the full-boundary gap sum counts every ordered pair on every face
    uf = state.u[:, matching.face_cell]
    expected = sum(
        float(np.sum((uf[i] - uf[j]) ** 2 * matching.face_area))
        for i in range(3) for j in range(3) if i != j
    )
    assert res.boundary_diff_full == pytest.approx(expected, rel=1e-12)


def test_compute_K_trivial_matching_zero_cross_term():
    domain = build_domain(1, [1.0], [8])
    matching = trivial_matching(domain, 2)
    state = make_state(domain, constant_rows(domain, (1.0, 0.0)))
    res = compute_K(state, matching)
    assert np.all(res.k == 0.0)
    assert res.boundary_diff_full == 4.0  # unit gap, two unit faces, both orders
    assert res.ek_ratio == 0.0
    # identical fields: both sides vanish and the ratio is undefined
    same = compute_K(make_state(domain, constant_rows(domain, (1.0, 1.0))), matching)
    assert math.isnan(same.ek_ratio)


# ---------------------------------------------------------------------------
# trajectory records
# ---------------------------------------------------------------------------

def standard_run(t_end=0.5, dt=1e-2, record_every=10, seed=3):
    params = HRParameters.default()
    domain = build_domain(1, [1.0], [16])
    matching = full_boundary_matching(domain, 2, "1-2")
    pc = poincare_constants(domain, mode="analytic")
    consts = derive_constants(params, domain.omega_measure, pc.eta1, pc.eta2)
    ic = InitialCondition(kind="uniform-random", seed=seed, offset=1.0, noise=0.1)
    cfg = IntegratorConfig(t_end=t_end, scheme="imex-euler", dt=dt,
                           record_every=record_every)
    record = record_trajectory(ic, params, domain, matching, cfg, consts)
    return record, consts, params, domain, matching


def test_record_trajectory_shapes_and_invariants():
    record, consts, *_ = standard_run()
    assert len(record) == 6  # steps 0, 10, 20, 30, 40, 50
    record.validate()
    assert record.t[0] == 0.0
    assert record.t[-1] == pytest.approx(0.5, abs=1e-12)
    assert record.pairs == ((0, 1),)
    assert record.n_neurons == 2
    assert record.rho0 == record.total_energy[0]
    assert record.diff_energy_g.shape == (6, 1)
    assert record.diff_energy_plain.shape == (6, 1)
    # thresholds are constants of the run, repeated per row
    assert np.all(record.threshold_literal == consts.big_r * consts.omega_measure)
    assert np.all(record.threshold_perpair == consts.big_r_alt * consts.omega_measure)
    assert np.array_equal(record.sync_total(), record.diff_energy_g[:, 0])


def test_trajectory_observer_row_contents():
    domain = build_domain(1, [2.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    params = HRParameters.default(p=2.0)
    obs = TrajectoryObserver(params, domain, matching, FRIENDLY)
    state0 = make_state(domain, constant_rows(domain, (1.0, 0.0)),
                        constant_rows(domain, (0.5, 0.5)),
                        constant_rows(domain, (0.25, 0.25)))
    row0 = obs(state0)
    # energies: u contributes 1^2*2, v 2*0.25*2, w 2*0.0625*2 over both neurons
    assert row0["t"] == 0.0
    assert row0["total_energy"] == pytest.approx(2.0 + 1.0 + 0.25, rel=1e-14)
    assert row0["weighted_energy"] == pytest.approx(
        FRIENDLY.c1 * 2.0 + 1.0 + 0.25, rel=1e-14)
    # envelope anchored at the first call: ratio 1, decay 1, offset M|Omega|/1
    rho0 = row0["total_energy"]
    assert obs.rho0 == rho0
    assert row0["gronwall_envelope"] == pytest.approx(rho0 + 1.0, rel=1e-14)
    assert row0["threshold_literal"] == 2.0   # big_r * omega_measure
    assert row0["threshold_perpair"] == 1.0   # big_r_alt * omega_measure
    # unit gap over both unit faces: S = p * 2, summed K = 4, gap sum = 2
    assert row0["stimulation_s"] == pytest.approx(4.0, rel=1e-14)
    assert row0["k_sum"] == pytest.approx(8.0, rel=1e-14)
    assert row0["boundary_diff_full"] == pytest.approx(4.0, rel=1e-14)
    assert row0["diff_g"] == (pytest.approx(2.0, rel=1e-14),)
    later = obs(make_state(domain, constant_rows(domain, (0.0, 0.0)), t=1.5))
    # rho0 stays anchored; envelope decays with r_star = 1
    assert later["gronwall_envelope"] == pytest.approx(
        math.exp(-1.5) * rho0 + 1.0, rel=1e-14)


def test_record_validate_rejects_bad_columns():
    record = synth_record([0.0, 1.0, 2.0], [1.0, 1.0, 1.0],
                          [0.0, 0.0, 0.0], [0.1, 0.1, 0.1])
    record.validate()
    record.t[2] = 1.0
    with pytest.raises(ValueError, match="strictly increasing"):
        record.validate()
    record.t[2] = 2.0
    record.total_energy[1] = math.nan
    with pytest.raises(ValueError, match="non-finite"):
        record.validate()


def test_record_from_rows_requires_rows():
    with pytest.raises(ValueError, match="no rows"):
        TrajectoryRecord.from_rows([], ((0, 1),), 2, FRIENDLY)


def test_record_trajectory_attaches_partial_record_on_blowup():
    params = HRParameters.default()
    domain = build_domain(1, [1.0], [32])
    matching = full_boundary_matching(domain, 2, "1-2")
    pc = poincare_constants(domain, mode="analytic")
    consts = derive_constants(params, domain.omega_measure, pc.eta1, pc.eta2)
    ic = InitialCondition(kind="constant-per-neuron", u_values=(50.0, -50.0))
    cfg = IntegratorConfig(t_end=10.0, scheme="explicit-rk4", dt=1.0, record_every=1)
    with pytest.raises(IntegrationError) as exc:
        record_trajectory(ic, params, domain, matching, cfg, consts)
    partial = exc.value.partial_record
    assert isinstance(partial, TrajectoryRecord)
    assert partial.t[0] == 0.0
    partial.validate()  # recorded rows predate the failure, so all finite


# ---------------------------------------------------------------------------
# envelope checks
# ---------------------------------------------------------------------------

def test_envelope_check_healthy_run_passes():
    record, consts, *_ = standard_run()
    report = envelope_check(record, consts)
    assert report.gronwall_violations == []
    # the absorbing radius dwarfs desk-scale energies: entry at the first row
    assert report.entry_time_observed == 0.0
    assert report.entry_ok
    # stimulation never reaches the (enormous) threshold: vacuous decay check
    assert report.windows == []
    assert report.decay_ok
    assert report.ok
    text = "\n".join(report.lines())
    assert "vacuously" in text
    assert "pass" in text


def test_envelope_check_flags_gronwall_violation():
    record = synth_record(
        [0.0, 1.0, 2.0], total=[0.5, 2.0, 0.5], stim=[0.0, 0.0, 0.0],
        sync=[0.1, 0.1, 0.1], envelope=[1.0, 1.0, 1.0])
    report = envelope_check(record, FRIENDLY, tolerance=0.05)
    assert len(report.gronwall_violations) == 1
    v = report.gronwall_violations[0]
    assert v.t == 1.0 and v.energy == 2.0 and v.bound == 1.0
    assert not report.ok
    assert "FAIL" in "\n".join(report.lines())


def test_envelope_check_entry_failure_when_due():
    # energy pinned at 5 > Q = 1; deadline ln(5)*1.1 + 1 ~ 2.77 < horizon 4
    record = synth_record(
        [0.0, 1.0, 2.0, 3.0, 4.0], total=[5.0] * 5, stim=[0.0] * 5,
        sync=[0.1] * 5)
    report = envelope_check(record, FRIENDLY, entry_slack=0.10)
    assert report.entry_time_bound == pytest.approx(math.log(5.0), rel=1e-12)
    assert report.entry_allowed == pytest.approx(math.log(5.0) * 1.1 + 1.0, rel=1e-12)
    assert report.entry_time_observed is None
    assert report.entry_due
    assert not report.entry_ok
    assert "never observed" in "\n".join(report.lines())


def test_envelope_check_entry_not_yet_due():
    record = synth_record([0.0, 0.5], total=[5.0, 5.0], stim=[0.0, 0.0],
                          sync=[0.1, 0.1])
    report = envelope_check(record, FRIENDLY)
    assert report.entry_time_observed is None
    assert not report.entry_due
    assert report.entry_ok
    assert "not yet due" in "\n".join(report.lines())


def test_envelope_check_entry_observed_time():
    record = synth_record([0.0, 1.0, 2.0], total=[5.0, 5.0, 0.5],
                          stim=[0.0] * 3, sync=[0.1] * 3)
    report = envelope_check(record, FRIENDLY)
    assert report.entry_time_observed == 2.0
    # observed 2.0 <= allowed ln(5)*1.1 + 1 ~ 2.77
    assert report.entry_ok


def test_envelope_decay_window_detection_and_pass():
    # rows 1..3 sit above threshold 1; sync halves each step, well under
    # the envelope 2 exp(-(t - 1)) * 1.1 = [2.2, 0.809, 0.298]
    record = synth_record(
        [0.0, 1.0, 2.0, 3.0, 4.0],
        total=[0.5] * 5,
        stim=[0.0, 5.0, 5.0, 5.0, 0.0],
        sync=[1.0, 1.0, 0.5, 0.25, 0.25])
    report = envelope_check(record, FRIENDLY, decay_tolerance=0.10)
    assert len(report.windows) == 1
    w = report.windows[0]
    assert (w.t_start, w.t_end, w.n_rows) == (1.0, 3.0, 3)
    assert w.envelope_ok and w.monotonic_ok
    assert report.decay_ok and report.ok


def test_envelope_decay_window_fails_on_growth():
    record = synth_record(
        [0.0, 1.0, 2.0, 3.0],
        total=[0.5] * 4,
        stim=[0.0, 5.0, 5.0, 0.0],
        sync=[0.1, 0.5, 1.0, 0.1])  # doubles inside the window
    report = envelope_check(record, FRIENDLY, decay_tolerance=0.10)
    assert len(report.windows) == 1
    assert not report.windows[0].monotonic_ok
    assert not report.decay_ok and not report.ok


def test_envelope_decay_window_fails_on_envelope():
    # flat at 1.9: passes monotonicity, but the envelope at offset 2 is
    # 2 exp(-2) * 1.1 ~ 0.2977 < 1.9
    record = synth_record(
        [0.0, 1.0, 2.0, 3.0],
        total=[0.5] * 4,
        stim=[5.0, 5.0, 5.0, 0.0],
        sync=[1.9, 1.9, 1.9, 0.1])
    report = envelope_check(record, FRIENDLY, decay_tolerance=0.10)
    assert len(report.windows) == 1
    w = report.windows[0]
    assert w.monotonic_ok and not w.envelope_ok
    assert w.max_envelope_ratio > 1.0
    assert not report.ok


def test_envelope_two_separate_windows():
    record = synth_record(
        [0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        total=[0.5] * 6,
        stim=[5.0, 0.0, 5.0, 5.0, 0.0, 5.0],
        sync=[0.1, 0.1, 0.2, 0.1, 0.1, 0.1])
    report = envelope_check(record, FRIENDLY)
    assert [(w.t_start, w.t_end) for w in report.windows] == [
        (0.0, 0.0), (2.0, 3.0), (5.0, 5.0)]


# ---------------------------------------------------------------------------
# energy inequality monitor
# ---------------------------------------------------------------------------

def test_energy_monitor_healthy_run_passes():
    record, consts, *_ = standard_run()
    report = energy_monitor(record, consts)
    assert report.ok
    assert report.n_intervals == len(record) - 1
    assert report.rhs == pytest.approx(
        (consts.c2 + consts.c1 ** 2 / 32.0) * 2 * consts.omega_measure, rel=1e-14)
    assert "pass" in report.lines()[0]


def test_energy_monitor_flags_violation():
    # rhs = (1 + 1/32) * 2 * 1 = 2.0625; a jump of 10 over dt 1 gives
    # lhs = 10 + 0.5 * 10 = 15 > 2.0625 * 1.05
    record = synth_record([0.0, 1.0], total=[0.0, 10.0], stim=[0.0, 0.0],
                          sync=[0.1, 0.1], weighted=[0.0, 10.0])
    report = energy_monitor(record, FRIENDLY, tolerance=0.05)
    assert not report.ok
    assert len(report.violations) == 1
    v = report.violations[0]
    assert v.t_mid == 0.5
    assert v.lhs == pytest.approx(15.0, rel=1e-14)
    assert "FAIL" in report.lines()[0]


# ---------------------------------------------------------------------------
# rate fitting
# ---------------------------------------------------------------------------

def test_fit_sync_rate_recovers_pure_exponential():
    t = np.linspace(0.0, 5.0, 51)
    record = synth_record(t, total=np.ones_like(t), stim=np.zeros_like(t),
                          sync=np.exp(-3.0 * t))
    fit = fit_sync_rate(record)
    assert fit.rate == pytest.approx(3.0, abs=1e-9)
    assert fit.r_squared > 1.0 - 1e-12
    assert fit.t_start == pytest.approx(2.5, abs=1e-12)  # trailing half
    assert fit.n_points == 26
    assert not fit.already_synchronized


def test_fit_sync_rate_constant_signal_is_zero_rate():
    t = np.linspace(0.0, 2.0, 21)
    record = synth_record(t, total=np.ones_like(t), stim=np.zeros_like(t),
                          sync=np.full_like(t, 0.5))
    fit = fit_sync_rate(record)
    assert abs(fit.rate) < 1e-12
    assert fit.r_squared == 1.0  # zero variance handled explicitly


def test_fit_sync_rate_floor_everywhere_is_synchronized_sentinel():
    t = np.linspace(0.0, 1.0, 11)
    record = synth_record(t, total=np.ones_like(t), stim=np.zeros_like(t),
                          sync=np.full_like(t, 1e-20))
    fit = fit_sync_rate(record)
    assert fit.already_synchronized
    assert math.isinf(fit.rate)
    assert fit.r_squared == 1.0
    assert "inf" in fit.lines()[0]


def test_fit_sync_rate_uses_prefix_before_floor_crossing():
    # exp(-40 t) crosses the 1e-14 floor at t ~ 0.806; later rows sit at
    # 1e-20 and must not pollute the fit
    t = np.linspace(0.0, 1.0, 101)
    sync = np.exp(-40.0 * t)
    sync[sync <= 1e-14] = 1e-20
    record = synth_record(t, total=np.ones_like(t), stim=np.zeros_like(t),
                          sync=sync)
    fit = fit_sync_rate(record)
    assert fit.rate == pytest.approx(40.0, rel=1e-8)
    assert fit.t_end <= 0.80 + 1e-12
    assert fit.r_squared > 1.0 - 1e-10


def test_fit_sync_rate_window_fraction_validation():
    record = synth_record([0.0, 1.0], total=[1.0, 1.0], stim=[0.0, 0.0],
                          sync=[0.5, 0.4])
    with pytest.raises(ValueError, match="window_fraction"):
        fit_sync_rate(record, window_fraction=0.0)
    with pytest.raises(ValueError, match="window_fraction"):
        fit_sync_rate(record, window_fraction=1.5)


# ---------------------------------------------------------------------------
# asynchronous degree
# ---------------------------------------------------------------------------

def test_asynchronous_degree_identical_initial_data_is_zero():
    params = HRParameters.default()
    domain = build_domain(1, [1.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    cfg = IntegratorConfig(t_end=1.0, scheme="explicit-rk4", dt=1e-3,
                           record_every=10)
    ic = InitialCondition(kind="constant-per-neuron",
                          u_values=(0.5, 0.5), v_values=(0.1, 0.1))
    deg = asynchronous_degree(params, domain, matching, cfg,
                              sample_count=2, horizon=0.05, seed=7, ic=ic)
    assert deg == 0.0


def test_asynchronous_degree_uncoupled_constant_gap_oracle():
    # reaction off, p = 0: the unit gap persists, so the degree is the
    # ordered-pair sum of sqrt(gap^2 * |Omega|) = 2
    params = HRParameters(a=0.0, b=0.0, alpha=0.0, beta=0.0, q=0.0, r=1.0,
                          c=0.0, J=0.0, d=1.0, p=0.0, n_neurons=2)
    domain = build_domain(1, [1.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    cfg = IntegratorConfig(t_end=1.0, scheme="explicit-rk4", dt="auto",
                           record_every=5)
    ic = InitialCondition(kind="constant-per-neuron", u_values=(1.0, 0.0))
    deg = asynchronous_degree(params, domain, matching, cfg,
                              sample_count=3, horizon=0.5, seed=0, ic=ic)
    assert deg == pytest.approx(2.0, rel=1e-12)


def test_asynchronous_degree_single_sample_matches_manual_run():
    params = HRParameters.default()
    domain = build_domain(1, [1.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    cfg = IntegratorConfig(t_end=99.0, scheme="explicit-rk4", dt="auto",
                           record_every=2)
    ic = InitialCondition(kind="uniform-random", seed=0, offset=1.0, noise=0.1)
    horizon, seed = 0.2, 11
    deg = asynchronous_degree(params, domain, matching, cfg, sample_count=1,
                              horizon=horizon, seed=seed, ic=ic)

    # replay the single sample by hand: same seed, horizon, tail rule
    from dataclasses import replace as dc_replace
    from hrnet.metrics import pair_differences as pd

    manual_ic = dc_replace(ic, seed=seed)
    res = simulate(manual_ic, params, domain, matching,
                   cfg.replace(t_end=horizon),
                   observer=lambda st: pd(st, domain, 1.0).diff_plain)
    times = np.asarray(res.times)
    tail = times >= times[-1] - 0.2 * (times[-1] - times[0])
    worst = np.maximum.reduce([row for row, keep in zip(res.rows, tail) if keep])
    assert deg == float(np.sqrt(worst).sum())
    assert deg > 0.0


def test_asynchronous_degree_validates_sample_count():
    params = HRParameters.default()
    domain = build_domain(1, [1.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    cfg = IntegratorConfig(t_end=1.0, dt=1e-3)
    with pytest.raises(ValueError, match="sample_count"):
        asynchronous_degree(params, domain, matching, cfg,
                            sample_count=0, horizon=1.0, seed=0)


def test_asynchronous_degree_failure_names_sample():
    params = HRParameters.default()
    domain = build_domain(1, [1.0], [8])
    matching = full_boundary_matching(domain, 2, "1-2")
    cfg = IntegratorConfig(t_end=1.0, scheme="explicit-rk4", dt=1.0,
                           record_every=1)
    ic = InitialCondition(kind="constant-per-neuron", u_values=(50.0, -50.0))
    with pytest.raises(IntegrationError) as exc:
        asynchronous_degree(params, domain, matching, cfg, sample_count=2,
                            horizon=10.0, seed=4, ic=ic)
    assert "sample 0" in str(exc.value)
    assert "seed 4" in str(exc.value)
