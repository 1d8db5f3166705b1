"""Randomized exhaustive checks of the ordering relations between bounds.

Each check draws scenarios from a :class:`ScenarioSampler`, evaluates both
sides of every inequality exactly and records the worst slack
``rhs - lhs``. Trials are seeded individually from one master seed, so a
report is a deterministic function of ``(seed, trials)`` and any failure
can be replayed from its trial seed.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import bounds_standard as bs
from . import bounds_subsample as br
from . import divergences as dv
from .prob import DiscreteScenario, SupersampleScenario, exact_gen_error, exact_empirical_gen_error
from .transport import MetricSpace

SLACK_TOL = 1e-9
DECOMPOSITION_TOL = 1e-10
LOG2 = math.log(2.0)


@dataclass
class CheckReport:
    """Outcome of one inequality family over many trials."""

    name: str
    trials: int
    worst_slack: float
    passed: bool
    failing_seed: int | None = None
    tolerance: float = SLACK_TOL
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


class _Tracker:
    """Min-slack accumulator for one named check."""

    def __init__(self, name: str, tolerance: float = SLACK_TOL):
        self.name, self.tolerance = name, tolerance
        self.worst = math.inf
        self.seed: int | None = None
        self.trials = 0

    def add(self, slack: float, seed: int | None):
        if slack < self.worst:
            self.worst = slack
            if slack < -self.tolerance:
                self.seed = seed
        elif self.seed is None and slack < -self.tolerance:
            self.seed = seed

    def merge(self, worst: float, seed, trials: int):
        self.trials += trials
        if worst < self.worst:
            self.worst, self.seed = worst, seed if worst < -self.tolerance else self.seed

    def report(self, details: dict | None = None) -> CheckReport:
        worst = self.worst if self.trials else 0.0
        if math.isinf(worst):
            worst = 0.0
        return CheckReport(self.name, self.trials, worst, worst >= -self.tolerance,
                           self.seed, self.tolerance, details or {})


# -- scenario sampling ---------------------------------------------------------


@dataclass(frozen=True)
class ScenarioSampler:
    """Random finite learners for the standard and supersample settings.

    Half of the scenarios use sharp kernels (Dirichlet concentration
    ``sharp``), which are nearly deterministic; the other half use smooth
    kernels (concentration ``smooth``). The hypothesis metric is either
    discrete or Euclidean on random planar points.
    """

    seed: int = 0
    n: int = 2
    n_samples: int = 3
    n_hypotheses: int = 4
    n_aux: int = 1
    rs_n: int = 2
    rs_samples: int = 2
    rs_hypotheses: int = 4
    sharp: float = 0.05
    smooth: float = 1.0

    def trial_seeds(self, trials: int) -> list[int]:
        if trials < 1:
            raise ValueError("trials must be at least 1")
        return [int(s) for s in np.random.SeedSequence(self.seed).generate_state(trials)]

    def _common(self, rng, nz, nw):
        conc = self.sharp if rng.random() < 0.5 else self.smooth
        p_z = rng.dirichlet(np.full(nz, 2.0))
        loss = rng.random((nw, nz))
        metric = "discrete" if rng.random() < 0.5 else MetricSpace.from_points(rng.random((nw, 2)), range(nw)).dist
        zmetric = "discrete" if rng.random() < 0.5 else MetricSpace.from_points(rng.random((nz, 2)), range(nz)).dist
        return conc, p_z, loss, metric, zmetric

    def standard(self, rng: np.random.Generator, n_aux: int | None = None, n: int | None = None,
                 n_samples: int | None = None) -> DiscreteScenario:
        n = self.n if n is None else n
        nz = self.n_samples if n_samples is None else n_samples
        nw, nr = self.n_hypotheses, self.n_aux if n_aux is None else n_aux
        conc, p_z, loss, metric, zmetric = self._common(rng, nz, nw)
        kernel = _dirichlet_rows(rng, conc, (nz,) * n + (nr,), nw)
        return DiscreteScenario(
            samples=range(nz), n=n, p_z=p_z, hypotheses=range(nw), kernel=kernel, loss=loss,
            metric=metric, aux=range(nr), p_r=rng.dirichlet(np.full(nr, 2.0)),
            sample_metric=zmetric, name="random-standard",
        )

    def supersample(self, rng: np.random.Generator, n_aux: int = 1) -> SupersampleScenario:
        """General (not necessarily Markov) supersample learner."""
        n, nz, nw = self.rs_n, self.rs_samples, self.rs_hypotheses
        conc, p_z, loss, metric, _ = self._common(rng, nz, nw)
        kernel = _dirichlet_rows(rng, conc, (nz,) * (2 * n) + (2,) * n + (n_aux,), nw)
        return SupersampleScenario(
            samples=range(nz), n=n, p_z=p_z, hypotheses=range(nw), kernel=kernel, loss=loss,
            metric=metric, aux=range(n_aux), p_r=rng.dirichlet(np.full(n_aux, 2.0)),
            name="random-supersample",
        )

    def markov_pair(self, rng: np.random.Generator) -> tuple[DiscreteScenario, SupersampleScenario]:
        """A standard learner on the supersample alphabet and its supersample view."""
        sc = self.standard(rng, n_aux=1, n=self.rs_n, n_samples=self.rs_samples)
        return sc, SupersampleScenario.from_standard(sc)


def _dirichlet_rows(rng, conc: float, lead: tuple, k: int) -> np.ndarray:
    rows = rng.dirichlet(np.full(k, conc), size=lead)
    # tiny concentrations can underflow to an all-zero row
    bad = ~np.isfinite(rows).all(axis=-1) | (rows.sum(axis=-1) == 0)
    if bad.any():
        rows[bad] = np.eye(k)[rng.integers(k, size=int(bad.sum()))]
    return rows / rows.sum(axis=-1, keepdims=True)


# -- trial bodies (module-level so they pickle) -----------------------------------


def _ratio(value: float, scale: float) -> float:
    return value / scale if scale > 0 else 0.0


def _ordering_trial(sampler: ScenarioSampler, seed: int) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    s = {}
    sc = sampler.standard(rng, n_aux=1)
    full = bs.full_dataset_wasserstein(sc)
    single = bs.single_letter_wasserstein(sc)
    s["P1"] = full - single
    subset = {}
    for m in range(1, sc.n + 1):
        subset[m] = bs.random_subset_wasserstein(sc, m, "set")
        per = bs.random_subset_wasserstein(sc, m, "per-sample")
        s["P2"] = min(s.get("P2", math.inf), subset[m] - single, per - single)
        s["P3"] = min(s.get("P3", math.inf), 2 * full - subset[m])

    rs = sampler.supersample(rng)
    rfull, rsingle = br.rs_full_dataset(rs), br.rs_single_letter(rs)
    s["P4"] = rfull - rsingle
    for m in range(1, rs.n + 1):
        rset = br.rs_random_subset(rs, m, "set")
        rper = br.rs_random_subset(rs, m, "per-sample")
        s["P5"] = min(s.get("P5", math.inf), rset - rsingle, rper - rsingle)
        s["P6"] = min(s.get("P6", math.inf), 2 * rfull - rset)

    # cross-setting: supersample expectations against twice the standard ones
    std, mk = sampler.markov_pair(rng)
    lip = std.lipschitz
    pairs = [
        (br.rs_full_dataset(mk), bs.full_dataset_wasserstein(std)),
        (br.rs_single_letter(mk), bs.single_letter_wasserstein(std)),
        (br.rs_random_subset(mk, 1, "set"), bs.random_subset_wasserstein(std, 1, "set")),
    ]
    s["P7"] = min(2 * _ratio(b, lip) - _ratio(a, 2 * lip) for a, b in pairs)
    return s


def _mi_trial(sampler: ScenarioSampler, seed: int) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    s = {}
    sc = sampler.standard(rng, n_aux=1)
    letters = sum(bs.mutual_information_wz(sc, i) for i in range(sc.n))
    mi = bs.mutual_information_ws(sc)
    s["mi_letters_le_full"] = mi - letters
    s["mi_full_le_subset"] = min(
        sc.n / m * bs.conditional_mi_subset(sc, m) - mi for m in range(1, sc.n + 1)
    )

    rs = sampler.supersample(rng)
    chains = [br.subsample_information(rs, m) for m in range(1, rs.n + 1)]
    info = chains[0]
    s["cmi_local_le_global"] = info.letter_global - info.letter_local
    s["cmi_global_le_mask"] = info.mask - info.letter_global
    s["cmi_mask_le_subset"] = min(rs.n / c.m * c.subset - c.mask for c in chains)
    s["cmi_mask_le_nlog2"] = rs.n * LOG2 - info.mask

    std, mk = sampler.markov_pair(rng)
    minfo = br.subsample_information(mk, 1)
    mi_std = bs.mutual_information_ws(std)
    s["cmi_mask_le_mi"] = mi_std - minfo.mask
    s["mi_decomposition"] = -abs(mi_std - (minfo.supersample + minfo.mask))
    return s


def anchor_scenarios() -> tuple[DiscreteScenario, SupersampleScenario]:
    """Binary memorizer, for which the full-dataset bounds are tight."""
    sc = DiscreteScenario(
        samples=(0, 1), n=1, p_z=(0.5, 0.5), hypotheses=(0, 1), kernel=np.eye(2),
        loss=1.0 - np.eye(2), name="memorizer",
    )
    return sc, SupersampleScenario.from_standard(sc)


def _validity_slack(report: bs.BoundReport, mutation: float) -> float:
    return min(mutation * v - abs(report.gen) for v in report.bounds.values())


def _validity_trial(sampler: ScenarioSampler, seed: int, mutation: float = 1.0) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    sc = sampler.standard(rng, n_aux=max(sampler.n_aux, 2))
    rs = sampler.supersample(rng, n_aux=max(sampler.n_aux, 2))
    return {
        "standard": _validity_slack(bs.standard_report(sc), mutation),
        "supersample": _validity_slack(br.subsample_report(rs), mutation),
    }


def _chi2_trial(sampler: ScenarioSampler, seed: int) -> dict[str, float]:
    """Synthetic pairs ``(P, Q)`` with a loss of range ``span`` on a 6-point space."""
    rng = np.random.default_rng(seed)
    k = 6
    span = float(rng.uniform(0.5, 2.0))
    conc = sampler.sharp if rng.random() < 0.5 else sampler.smooth
    q = _dirichlet_rows(rng, 1.0, (), k)
    p = _dirichlet_rows(rng, conc, (), k)
    f = span * rng.random(k)
    f[0], f[1] = 0.0, span
    var = bs.loss_variance(f, q)
    chi2 = dv.chi_squared(p, q)
    gap = abs(float(p @ f - q @ f))
    variational = bs.chi2_variational_term(var, chi2)
    basic = span * dv.chi2_tv_bounds(chi2)[1]
    s = {
        "variational_valid": variational - gap,
        "variational_le_basic": basic - variational,
    }
    threshold = bs.variational_dominance_threshold(span)
    if var <= threshold and chi2 <= math.expm1(2.0):
        s["dominance_region"] = bs.chi2_via_kl_term(chi2, span) - variational
    return s


def _run(body: Callable, sampler: ScenarioSampler, trials: int, workers: int, **kw) -> dict:
    """Evaluate ``body`` over all trial seeds; return ``{name: (worst, seed, count)}``."""
    seeds = sampler.trial_seeds(trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_call, [(body, sampler, s, kw) for s in seeds]))
    else:
        results = [body(sampler, s, **kw) for s in seeds]
    merged: dict = {}
    for seed, res in zip(seeds, results):
        for name, slack in res.items():
            worst, wseed, count = merged.get(name, (math.inf, None, 0))
            if slack < worst:
                worst, wseed = slack, seed
            merged[name] = (worst, wseed, count + 1)
    return merged


def _call(args):
    body, sampler, seed, kw = args
    return body(sampler, seed, **kw)


def _reports(merged: dict, names: Iterable[str], tolerances: dict | None = None) -> list[CheckReport]:
    out = []
    for name in names:
        tr = _Tracker(name, (tolerances or {}).get(name, SLACK_TOL))
        if name in merged:
            worst, seed, count = merged[name]
            tr.merge(worst, seed, count)
        out.append(tr.report())
    return out


def default_workers() -> int:
    """Worker count from ``GENBOUND_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("GENBOUND_THREADS", "1")))
    except ValueError:
        return 1


ORDERING_CHECKS = ("P1", "P2", "P3", "P4", "P5", "P6", "P7")
MI_CHECKS = (
    "mi_letters_le_full", "mi_full_le_subset", "cmi_local_le_global", "cmi_global_le_mask",
    "cmi_mask_le_subset", "cmi_mask_le_nlog2", "cmi_mask_le_mi", "mi_decomposition",
)


def check_wasserstein_orderings(sampler: ScenarioSampler, trials: int, workers: int | None = None) -> list[CheckReport]:
    """P1 single <= full, P2 single <= subset, P3 subset <= 2 full, P4-P6 the
    supersample analogues and P7 the cross-setting factor-2 comparison."""
    merged = _run(_ordering_trial, sampler, trials, workers or default_workers())
    return _reports(merged, ORDERING_CHECKS)


def check_mi_orderings(sampler: ScenarioSampler, trials: int, workers: int | None = None) -> list[CheckReport]:
    """Mutual-information chains in both settings and the cross-setting identity."""
    merged = _run(_mi_trial, sampler, trials, workers or default_workers())
    return _reports(merged, MI_CHECKS, {"mi_decomposition": DECOMPOSITION_TOL})


def check_bound_validity(sampler: ScenarioSampler, trials: int, mutation: float = 1.0,
                         workers: int | None = None) -> CheckReport:
    """Every implemented bound dominates ``|gen|``.

    ``mutation`` scales every bound before comparison; a value below one
    simulates a broken bound. The binary memorizer is always included
    because its full-dataset bounds are tight in both settings.
    """
    merged = _run(_validity_trial, sampler, trials, workers or default_workers(), mutation=mutation)
    std, rs = anchor_scenarios()
    anchor = min(_validity_slack(bs.standard_report(std), mutation),
                 _validity_slack(br.subsample_report(rs), mutation))
    tr = _Tracker("bound_validity")
    for worst, seed, count in merged.values():
        tr.merge(worst, seed, 0)
    tr.trials = trials
    tr.add(anchor, None)
    details = {name: worst for name, (worst, _, _) in merged.items()}
    details["anchor"] = anchor
    details["mutation"] = mutation
    return tr.report(details)


def check_appendix_h(sampler: ScenarioSampler, trials: int, workers: int | None = None) -> CheckReport:
    """Variational chi-squared bound: validity, Popoviciu step, dominance region
    and the location of the crossover at ``Var = span^2 / 4``."""
    merged = _run(_chi2_trial, sampler, trials, workers or default_workers())
    crossover = bs.variational_crossover(0.25, 1.0)
    scanned = scan_dominance_threshold(1.0)
    exact = bs.variational_dominance_threshold(1.0)
    fixed = {
        "crossover_in_range": min(crossover - 2.48, 2.54 - crossover),
        "threshold_scan_within_1pct": 0.01 - abs(scanned - exact) / exact,
        "zero_variance_dominates": -bs.chi2_variational_term(0.0, math.inf),
    }
    tr = _Tracker("variational_chi2")
    for worst, seed, _ in merged.values():
        tr.merge(worst, seed, 0)
    for v in fixed.values():
        tr.add(v, None)
    tr.trials = trials
    details = {name: worst for name, (worst, _, _) in merged.items()}
    details.update(fixed, crossover=crossover, threshold_scan=scanned, threshold_exact=exact)
    return tr.report(details)


def scan_dominance_threshold(span: float, grid: int = 4000) -> float:
    """Largest Var (on a grid) with variational <= via-KL for all ``chi2 <= e^2 - 1``.

    The comparison is scanned over ``chi2`` on a grid as well, without
    using the closed-form threshold.
    """
    chis = np.linspace(1e-6, math.expm1(2.0), grid)
    via = span * np.sqrt(0.5 * np.log1p(chis))
    best = 0.0
    for var in np.linspace(0.0, span * span / 4, grid):
        if np.all(np.sqrt(var * chis) <= via + 1e-15):
            best = float(var)
        else:
            break
    return best


SUITES = {
    "orderings": check_wasserstein_orderings,
    "mi": check_mi_orderings,
    "validity": check_bound_validity,
    "appendix-h": check_appendix_h,
}


def run_suite(suite: str, sampler: ScenarioSampler, trials: int, mutation: float = 1.0,
              workers: int | None = None) -> list[CheckReport]:
    names = list(SUITES) if suite == "all" else [suite]
    out: list[CheckReport] = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        if name == "validity":
            out.append(check_bound_validity(sampler, trials, mutation, workers))
        else:
            res = SUITES[name](sampler, trials, workers)
            out.extend(res if isinstance(res, list) else [res])
    return out


def coincidence_gap(sc: SupersampleScenario) -> float:
    """``|E[empirical gen] - E[gen]|`` for a supersample learner and its induced standard view."""
    return abs(exact_empirical_gen_error(sc) - exact_gen_error(sc.induced_standard()))
