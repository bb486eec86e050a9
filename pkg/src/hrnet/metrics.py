"""Analysis observables along trajectories.

Everything the verification harness monitors lives here: pairwise difference
energies (plain and G-weighted), the boundary stimulation signal, the
boundary cross-term K with its companion identity probe, the decay and
absorbing-set envelopes, exponential rate fits, and the Monte-Carlo
asynchronous-degree estimator.

Two deliberate cautions are wired in rather than assumed away: the summed
K identity is computed on BOTH sides and reported as a ratio, and the
conditional decay envelope is only enforced on windows where the measured
stimulation signal actually exceeds the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import DerivedConstants, HRParameters, entry_time
from .domain import BoundaryMatching, Domain, integrate_domain
from .dynamics import InitialCondition, IntegratorConfig, NetworkState, simulate
from .errors import IntegrationError

SYNC_FLOOR = 1e-14


@dataclass(frozen=True)
class PairDifferences:
    """Quadrature norms of state differences for every ordered pair.

    All arrays are (N, N) with zero diagonals; entry (i, j) uses u_i - u_j.
    ``diff_g`` weights the membrane term by the multiplier g.
    """

    u_sq: np.ndarray
    v_sq: np.ndarray
    w_sq: np.ndarray
    diff_plain: np.ndarray
    diff_g: np.ndarray


def pair_differences(state: NetworkState, domain: Domain, g: float) -> PairDifferences:
    n = state.n_neurons
    u_sq = np.zeros((n, n))
    v_sq = np.zeros((n, n))
    w_sq = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            du = state.u[i] - state.u[j]
            dv = state.v[i] - state.v[j]
            dw = state.w[i] - state.w[j]
            u_sq[i, j] = integrate_domain(du * du, domain)
            v_sq[i, j] = integrate_domain(dv * dv, domain)
            w_sq[i, j] = integrate_domain(dw * dw, domain)
    plain = u_sq + v_sq + w_sq
    diff_g = g * u_sq + v_sq + w_sq
    return PairDifferences(u_sq=u_sq, v_sq=v_sq, w_sq=w_sq,
                           diff_plain=plain, diff_g=diff_g)


def stimulation_signal(state: NetworkState, matching: BoundaryMatching, p: float) -> float:
    """p times the squared membrane gaps integrated over matched boundary pieces.

    Sums over unordered pairs i < j; faces where a neuron is matched to
    itself contribute nothing.
    """
    uf = state.u[:, matching.face_cell]
    total = 0.0
    n = matching.n_neurons
    for i in range(n):
        for j in range(i + 1, n):
            mask = matching.partner[:, i] == j
            if mask.any():
                du = uf[i, mask] - uf[j, mask]
                total += float(np.sum(du * du * matching.face_area[mask]))
    return p * total


@dataclass(frozen=True)
class KResult:
    """Boundary cross-terms and both sides of their summed identity.

    ``k[i, j]`` integrates, over the whole boundary, the difference of
    coupling residuals (u_i - u_at_partner_of_i) - (u_j - u_at_partner_of_j)
    against (u_i - u_j).  ``boundary_diff_full`` is the ordered-pair sum of
    squared gaps over the whole boundary, recorded alongside ``k_sum`` so the
    relation between the two is measured, never presumed.
    """

    k: np.ndarray
    k_sum: float
    boundary_diff_full: float

    @property
    def ek_ratio(self) -> float:
        if self.boundary_diff_full == 0.0:
            return math.nan
        return self.k_sum / self.boundary_diff_full


def compute_K(state: NetworkState, matching: BoundaryMatching) -> KResult:
    n = matching.n_neurons
    n_faces = matching.face_cell.shape[0]
    uf = state.u[:, matching.face_cell]
    face_idx = np.arange(n_faces)
    resid = np.empty_like(uf)
    for i in range(n):
        resid[i] = uf[i] - uf[matching.partner[:, i], face_idx]
    area = matching.face_area
    k = np.zeros((n, n))
    boundary_diff_full = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            du = uf[i] - uf[j]
            k[i, j] = float(np.sum((resid[i] - resid[j]) * du * area))
            boundary_diff_full += float(np.sum(du * du * area))
    return KResult(k=k, k_sum=float(k.sum()), boundary_diff_full=boundary_diff_full)


@dataclass
class TrajectoryRecord:
    """Time series of every monitored scalar for one run.

    ``diff_energy_g`` and ``diff_energy_plain`` have one column per unordered
    pair, ordered as in ``pairs``.  ``weighted_energy`` is the c1-weighted
    bracket monitored by the energy inequality; ``total_energy`` is the plain
    squared-norm sum the absorbing-set results bound.
    """

    t: np.ndarray
    total_energy: np.ndarray
    weighted_energy: np.ndarray
    gronwall_envelope: np.ndarray
    stimulation_s: np.ndarray
    threshold_literal: np.ndarray
    threshold_perpair: np.ndarray
    boundary_diff_full: np.ndarray
    k_sum: np.ndarray
    diff_energy_g: np.ndarray
    diff_energy_plain: np.ndarray
    pairs: tuple
    n_neurons: int
    consts: DerivedConstants
    rho0: float

    SCALAR_FIELDS = (
        "t", "total_energy", "gronwall_envelope", "stimulation_s",
        "threshold_literal", "threshold_perpair", "boundary_diff_full", "k_sum",
    )

    def __len__(self) -> int:
        return self.t.shape[0]

    def sync_total(self) -> np.ndarray:
        """Sum of G-weighted pair difference energies per row."""
        return self.diff_energy_g.sum(axis=1)

    def validate(self):
        if len(self) == 0:
            raise ValueError("empty trajectory record")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("record times must be strictly increasing")
        for name in self.SCALAR_FIELDS + ("weighted_energy",):
            if not np.isfinite(getattr(self, name)).all():
                raise ValueError(f"non-finite values in column {name}")
        for name in ("diff_energy_g", "diff_energy_plain"):
            if not np.isfinite(getattr(self, name)).all():
                raise ValueError(f"non-finite values in column {name}")

    @classmethod
    def from_rows(cls, rows, pairs, n_neurons, consts) -> "TrajectoryRecord":
        if not rows:
            raise ValueError("no rows recorded")
        cols = {
            name: np.array([row[name] for row in rows], dtype=np.float64)
            for name in cls.SCALAR_FIELDS + ("weighted_energy",)
        }
        diff_g = np.array([row["diff_g"] for row in rows], dtype=np.float64)
        diff_plain = np.array([row["diff_plain"] for row in rows], dtype=np.float64)
        return cls(
            t=cols["t"],
            total_energy=cols["total_energy"],
            weighted_energy=cols["weighted_energy"],
            gronwall_envelope=cols["gronwall_envelope"],
            stimulation_s=cols["stimulation_s"],
            threshold_literal=cols["threshold_literal"],
            threshold_perpair=cols["threshold_perpair"],
            boundary_diff_full=cols["boundary_diff_full"],
            k_sum=cols["k_sum"],
            diff_energy_g=diff_g,
            diff_energy_plain=diff_plain,
            pairs=tuple(pairs),
            n_neurons=n_neurons,
            consts=consts,
            rho0=float(cols["total_energy"][0]),
        )


class TrajectoryObserver:
    """Per-state row builder; one instance serves exactly one run.

    The Gronwall envelope is anchored at the first observed state, so the
    first call must be the initial condition.
    """

    def __init__(self, params: HRParameters, domain: Domain,
                 matching: BoundaryMatching, consts: DerivedConstants):
        self.params = params
        self.domain = domain
        self.matching = matching
        self.consts = consts
        self.rho0 = None
        n = params.n_neurons
        self.pairs = tuple((i, j) for i in range(n) for j in range(i + 1, n))

    def __call__(self, state: NetworkState) -> dict:
        c = self.consts
        vol = self.domain.cell_volume
        u_energy = float(np.sum(state.u * state.u)) * vol
        v_energy = float(np.sum(state.v * state.v)) * vol
        w_energy = float(np.sum(state.w * state.w)) * vol
        total = u_energy + v_energy + w_energy
        if self.rho0 is None:
            self.rho0 = total
        lo = min(c.c1, 1.0)
        envelope = (
            (max(c.c1, 1.0) / lo) * math.exp(-c.r_star * state.t) * self.rho0
            + c.big_m * c.omega_measure / lo
        )
        diffs = pair_differences(state, self.domain, c.g)
        kres = compute_K(state, self.matching)
        return {
            "t": state.t,
            "total_energy": total,
            "weighted_energy": c.c1 * u_energy + v_energy + w_energy,
            "gronwall_envelope": envelope,
            "stimulation_s": stimulation_signal(state, self.matching, self.params.p),
            "threshold_literal": c.big_r * c.omega_measure,
            "threshold_perpair": c.big_r_alt * c.omega_measure,
            "boundary_diff_full": kres.boundary_diff_full,
            "k_sum": kres.k_sum,
            "diff_g": tuple(diffs.diff_g[i, j] for i, j in self.pairs),
            "diff_plain": tuple(diffs.diff_plain[i, j] for i, j in self.pairs),
        }


def record_trajectory(ic, params: HRParameters, domain: Domain,
                      matching: BoundaryMatching, cfg: IntegratorConfig,
                      consts: DerivedConstants) -> TrajectoryRecord:
    """Run one simulation and collect the full observable record.

    On integration failure the partial record (rows up to the failure) is
    attached to the raised error as ``partial_record``.
    """
    observer = TrajectoryObserver(params, domain, matching, consts)
    try:
        result = simulate(ic, params, domain, matching, cfg, observer=observer)
    except IntegrationError as err:
        err.partial_record = (
            TrajectoryRecord.from_rows(err.rows, observer.pairs,
                                       params.n_neurons, consts)
            if err.rows else None
        )
        raise
    return TrajectoryRecord.from_rows(result.rows, observer.pairs,
                                      params.n_neurons, consts)


# ---------------------------------------------------------------------------
# envelope and monitor checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GronwallViolation:
    t: float
    energy: float
    bound: float


@dataclass(frozen=True)
class DecayWindow:
    """One maximal stretch of records with the stimulation signal above threshold."""

    t_start: float
    t_end: float
    n_rows: int
    envelope_ok: bool
    monotonic_ok: bool
    max_envelope_ratio: float
    worst_increase: float


@dataclass
class EnvelopeReport:
    rho0: float
    big_q: float
    gronwall_violations: list
    entry_time_bound: float
    entry_allowed: float
    entry_time_observed: object
    entry_due: bool
    entry_ok: bool
    windows: list
    decay_ok: bool

    @property
    def ok(self) -> bool:
        return not self.gronwall_violations and self.entry_ok and self.decay_ok

    def lines(self) -> list:
        out = []
        status = "pass" if not self.gronwall_violations else "FAIL"
        out.append(
            f"gronwall envelope: {status} "
            f"({len(self.gronwall_violations)} violation(s))"
        )
        for v in self.gronwall_violations[:10]:
            out.append(f"  t={v.t:.6g}: energy {v.energy:.6e} > bound {v.bound:.6e}")
        if self.entry_time_observed is not None:
            out.append(
                f"absorbing entry: {'pass' if self.entry_ok else 'FAIL'} "
                f"(observed t={self.entry_time_observed:.6g}, "
                f"allowed t={self.entry_allowed:.6g}, radius Q={self.big_q:.6e})"
            )
        elif not self.entry_due:
            out.append(
                f"absorbing entry: not yet due "
                f"(allowed t={self.entry_allowed:.6g} exceeds the horizon)"
            )
        else:
            out.append(
                f"absorbing entry: FAIL (never observed below Q={self.big_q:.6e} "
                f"though due by t={self.entry_allowed:.6g})"
            )
        if not self.windows:
            out.append(
                "conditional decay: no records with stimulation above the "
                "per-pair threshold; check passes vacuously"
            )
        else:
            status = "pass" if self.decay_ok else "FAIL"
            out.append(f"conditional decay: {status} over {len(self.windows)} window(s)")
            for w in self.windows:
                out.append(
                    f"  window t=[{w.t_start:.6g}, {w.t_end:.6g}] rows={w.n_rows} "
                    f"envelope_ratio={w.max_envelope_ratio:.3e} "
                    f"monotonic={'yes' if w.monotonic_ok else 'NO'}"
                )
        return out


def _maximal_runs(mask: np.ndarray):
    runs = []
    start = None
    for k, flag in enumerate(mask):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def envelope_check(record: TrajectoryRecord, consts: DerivedConstants,
                   tolerance: float = 0.05, entry_slack: float = 0.10,
                   decay_tolerance: float = 0.10) -> EnvelopeReport:
    """Check the decay-plus-constant bound, absorbing entry, and conditional decay.

    The absorbing-entry deadline gets ``entry_slack`` plus one record
    interval of slack, since entry is only observable at record times.  The
    conditional decay envelope is the theorem's exponential
    2 max(g,1) Q exp(-mu (t - t_start)) anchored at each window start, and
    window rows must also be non-increasing within ``decay_tolerance``.
    """
    t = record.t
    violations = [
        GronwallViolation(float(tk), float(ek), float(bk))
        for tk, ek, bk in zip(t, record.total_energy, record.gronwall_envelope)
        if ek > bk * (1.0 + tolerance)
    ]

    rho0 = record.rho0
    bound = entry_time(rho0, consts)
    interval = float(t[1] - t[0]) if len(record) > 1 else 0.0
    allowed = bound * (1.0 + entry_slack) + interval
    below = np.flatnonzero(record.total_energy < consts.big_q)
    observed = float(t[below[0]]) if below.size else None
    due = float(t[-1]) >= allowed
    entry_ok = (observed is not None and observed <= allowed) or (
        observed is None and not due
    )

    sync = record.sync_total()
    above = record.stimulation_s > record.threshold_perpair
    windows = []
    amplitude = 2.0 * max(consts.g, 1.0) * consts.big_q
    for k0, k1 in _maximal_runs(above):
        seg_t = t[k0:k1 + 1]
        seg_s = sync[k0:k1 + 1]
        env = amplitude * np.exp(-consts.mu * (seg_t - seg_t[0]))
        ratios = seg_s / (env * (1.0 + decay_tolerance))
        increases = (
            seg_s[1:] / np.maximum(seg_s[:-1], SYNC_FLOOR)
            if seg_s.size > 1 else np.array([])
        )
        windows.append(DecayWindow(
            t_start=float(seg_t[0]),
            t_end=float(seg_t[-1]),
            n_rows=int(seg_s.size),
            envelope_ok=bool(np.all(ratios <= 1.0)),
            monotonic_ok=bool(
                increases.size == 0 or np.all(increases <= 1.0 + decay_tolerance)
            ),
            max_envelope_ratio=float(ratios.max()) if ratios.size else 0.0,
            worst_increase=float(increases.max()) if increases.size else 1.0,
        ))
    decay_ok = all(w.envelope_ok and w.monotonic_ok for w in windows)

    return EnvelopeReport(
        rho0=rho0,
        big_q=consts.big_q,
        gronwall_violations=violations,
        entry_time_bound=bound,
        entry_allowed=allowed,
        entry_time_observed=observed,
        entry_due=due,
        entry_ok=entry_ok,
        windows=windows,
        decay_ok=decay_ok,
    )


@dataclass(frozen=True)
class EnergyViolation:
    t_mid: float
    lhs: float
    bound: float


@dataclass
class EnergyReport:
    rhs: float
    violations: list
    n_intervals: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list:
        status = "pass" if self.ok else "FAIL"
        out = [
            f"energy inequality monitor: {status} "
            f"({len(self.violations)} of {self.n_intervals} intervals violated, "
            f"rhs={self.rhs:.6e})"
        ]
        for v in self.violations[:10]:
            out.append(f"  t~{v.t_mid:.6g}: lhs {v.lhs:.6e} > bound {v.bound:.6e}")
        return out


def energy_monitor(record: TrajectoryRecord, consts: DerivedConstants,
                   tolerance: float = 0.05) -> EnergyReport:
    """Finite-difference check of the dissipation inequality between records.

    Per consecutive record pair: (B(t2) - B(t1)) / dt + r_star * (B(t1) +
    B(t2)) / 2 must stay below (c2 + c1^2/32) N |Omega| within tolerance,
    where B is the c1-weighted energy bracket.
    """
    rhs = (consts.c2 + consts.c1 * consts.c1 / 32.0) * record.n_neurons * consts.omega_measure
    bound = rhs * (1.0 + tolerance)
    b = record.weighted_energy
    t = record.t
    violations = []
    for k in range(len(record) - 1):
        dt = float(t[k + 1] - t[k])
        lhs = float((b[k + 1] - b[k]) / dt + consts.r_star * 0.5 * (b[k] + b[k + 1]))
        if lhs > bound:
            violations.append(EnergyViolation(float(0.5 * (t[k] + t[k + 1])), lhs, bound))
    return EnergyReport(rhs=rhs, violations=violations, n_intervals=max(len(record) - 1, 0))


# ---------------------------------------------------------------------------
# rate fitting and the asynchronous degree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    rate: float
    r_squared: float
    t_start: float
    t_end: float
    n_points: int
    already_synchronized: bool

    def lines(self) -> list:
        if self.already_synchronized:
            return ["sync rate fit: difference energy at floor everywhere "
                    "(already synchronized); rate = inf"]
        return [
            f"sync rate fit: rate={self.rate:.6g} r2={self.r_squared:.6f} "
            f"over t=[{self.t_start:.6g}, {self.t_end:.6g}] ({self.n_points} points)"
        ]


def fit_sync_rate(record: TrajectoryRecord, window_fraction: float = 0.5,
                  floor: float = SYNC_FLOOR) -> RateFit:
    """Exponential rate of the summed G-weighted difference energy.

    Fits log(sum diff_energy_g) against t by least squares over the trailing
    ``window_fraction`` of the time range before the signal first reaches
    the floor.  A record entirely at the floor returns the
    already-synchronized sentinel with rate = +inf.
    """
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    s = record.sync_total()
    t = record.t
    above = s > floor
    if not above.any():
        return RateFit(rate=math.inf, r_squared=1.0, t_start=float(t[0]),
                       t_end=float(t[-1]), n_points=0, already_synchronized=True)
    hit_floor = np.flatnonzero(~above)
    end = int(hit_floor[0]) if hit_floor.size else len(s)
    end = max(end, min(2, len(s)))
    seg_t = t[:end]
    seg_y = np.log(np.maximum(s[:end], floor))
    if seg_t.shape[0] < 2:
        return RateFit(rate=0.0, r_squared=1.0, t_start=float(seg_t[0]),
                       t_end=float(seg_t[-1]), n_points=1, already_synchronized=False)
    cutoff = seg_t[-1] - window_fraction * (seg_t[-1] - seg_t[0])
    mask = seg_t >= cutoff
    if int(mask.sum()) < 2:
        mask = np.zeros_like(mask)
        mask[-2:] = True
    x = seg_t[mask]
    y = seg_y[mask]
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot <= 1e-30 else 1.0 - ss_res / ss_tot
    return RateFit(rate=float(-coef[0]), r_squared=r_squared,
                   t_start=float(x[0]), t_end=float(x[-1]),
                   n_points=int(x.shape[0]), already_synchronized=False)


def asynchronous_degree(params: HRParameters, domain: Domain,
                        matching: BoundaryMatching, cfg: IntegratorConfig,
                        sample_count: int, horizon: float, seed: int,
                        ic: InitialCondition | None = None,
                        tail_fraction: float = 0.2) -> float:
    """Monte-Carlo estimate of the summed worst-case pairwise state gap.

    Draws ``sample_count`` initial conditions (sample k reseeds the template
    with seed + k), simulates each to ``horizon``, approximates the limiting
    pairwise gap by the max over the trailing ``tail_fraction`` of recorded
    times, and sums the per-pair worst case over all ordered pairs.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if ic is None:
        ic = InitialCondition(kind="uniform-random", offset=1.0, noise=0.1)
    run_cfg = cfg.replace(t_end=float(horizon))
    n = params.n_neurons
    worst_sq = np.zeros((n, n))
    for k in range(sample_count):
        sample_ic = replace(ic, seed=seed + k) if ic.kind != "file" else ic

        def observer(state):
            return pair_differences(state, domain, 1.0).diff_plain

        try:
            result = simulate(sample_ic, params, domain, matching, run_cfg,
                              observer=observer)
        except IntegrationError as err:
            raise IntegrationError(
                err.t, err.max_abs_u,
                note=f"asynchronous-degree sample {k} (seed {seed + k})",
            ) from err
        times = np.asarray(result.times)
        tail_start = times[-1] - tail_fraction * (times[-1] - times[0])
        tail_rows = [row for tk, row in zip(times, result.rows) if tk >= tail_start]
        sample_worst = np.maximum.reduce(tail_rows)
        worst_sq = np.maximum(worst_sq, sample_worst)
    return float(np.sqrt(worst_sq).sum())
