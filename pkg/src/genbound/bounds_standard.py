"""Exact generalization bounds for a :class:`DiscreteScenario`.

Conditional laws such as ``P_{W|Z_i}`` or ``P_{W|S_{J^c},R}`` are obtained
by averaging the kernel over the unobserved sample coordinates. They are
stored with singleton axes in place of the averaged coordinates so that
they broadcast against the full kernel.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import divergences as dv
from .prob import DiscreteScenario, exact_gen_error, sample_law
from .transport import MetricSpace, wasserstein1

SUBSET_GUARD = 8
BACKWARD_GUARD = 729
REPORT_SCHEMA_VERSION = 1


@dataclass
class BoundReport:
    """Bound values next to the exact generalization error of one scenario."""

    scenario: str
    gen: float
    bounds: dict[str, float]
    metadata: dict = field(default_factory=dict)

    def violations(self, tol: float = 1e-9) -> dict[str, float]:
        """Bounds that fall below ``|gen|`` by more than ``tol``."""
        return {k: v for k, v in self.bounds.items() if v < abs(self.gen) - tol}


# -- conditional kernels -----------------------------------------------------


def conditional(kernel: np.ndarray, p_z: np.ndarray, n: int, keep: Iterable[int]) -> np.ndarray:
    """Average ``kernel`` over the sample axes not in ``keep`` (keepdims)."""
    keep = set(keep)
    out = kernel
    for ax in range(n):
        if ax not in keep:
            out = np.tensordot(out, p_z, axes=([ax], [0]))
            out = np.expand_dims(out, ax)
    return out


def drop_aux(kernel: np.ndarray, p_r: np.ndarray) -> np.ndarray:
    """Average out the auxiliary axis, keeping it as a singleton."""
    return np.einsum("...rw,r->...w", kernel, p_r)[..., None, :]


def expect(
    fine: np.ndarray,
    coarse: np.ndarray,
    weights: Sequence[np.ndarray],
    fn: Callable[[np.ndarray, np.ndarray], float],
) -> float:
    """``E[fn(fine[x], coarse[x])]`` over independent leading coordinates.

    ``weights[a]`` is the law of leading axis ``a``. Axes of size one in
    ``fine`` have been averaged out and carry no weight; ``coarse`` must
    depend on a subset of the coordinates of ``fine``.
    """
    lead = fine.shape[:-1]
    total = 0.0
    for idx in np.ndindex(*lead):
        weight = 1.0
        for ax, i in enumerate(idx):
            if lead[ax] > 1:
                weight *= weights[ax][i]
        if weight == 0.0:
            continue
        cidx = tuple(i if coarse.shape[a] > 1 else 0 for a, i in enumerate(idx))
        value = fn(fine[idx], coarse[cidx])
        if value != 0.0:
            total += weight * value
    return total


def expectation(fine, coarse, p_z, p_r, n, fn) -> float:
    """:func:`expect` for standard-setting arrays ``(Z,)*n + (R, W)``."""
    return expect(fine, coarse, [p_z] * n + [p_r], fn)


def _subsets(n: int, m: int):
    if not 1 <= m <= n:
        raise ValueError(f"subset size m must satisfy 1 <= m <= n={n}, got {m}")
    if n > SUBSET_GUARD:
        raise ValueError(f"subset enumeration is limited to n <= {SUBSET_GUARD}")
    return list(itertools.combinations(range(n), m))


def _w1(space: MetricSpace):
    return lambda p, q: wasserstein1(p, q, space)


def _span(sc: DiscreteScenario) -> float:
    a, b = sc.loss_range
    return b - a


# -- Wasserstein bounds --------------------------------------------------------


def full_dataset_wasserstein(sc: DiscreteScenario) -> float:
    """``L E[W(P_{W|S}, P_W)]``."""
    f = drop_aux(sc.kernel, sc.p_r)
    marginal_w = conditional(f, sc.p_z, sc.n, ())
    return sc.lipschitz * expectation(f, marginal_w, sc.p_z, sc.p_r, sc.n, _w1(sc.metric))


def single_letter_wasserstein(sc: DiscreteScenario) -> float:
    """``(L/n) sum_i E[W(P_{W|Z_i}, P_W)]``."""
    f = drop_aux(sc.kernel, sc.p_r)
    marginal_w = conditional(f, sc.p_z, sc.n, ())
    total = 0.0
    for i in range(sc.n):
        fi = conditional(f, sc.p_z, sc.n, (i,))
        total += expectation(fi, marginal_w, sc.p_z, sc.p_r, sc.n, _w1(sc.metric))
    return sc.lipschitz * total / sc.n


def random_subset_wasserstein(sc: DiscreteScenario, m: int = 1, variant: str = "set") -> float:
    """Random-subset bound with ``J`` uniform over the size-``m`` index sets.

    ``variant="set"`` gives ``L E[W(P_{W|S,R}, P_{W|S_{J^c},R})]`` and
    ``variant="per-sample"`` gives
    ``(L/m) E[sum_{i in J} W(P_{W|S_{J^c} u Z_i,R}, P_{W|S_{J^c},R})]``.
    """
    subsets = _subsets(sc.n, m)
    w1 = _w1(sc.metric)
    total = 0.0
    for J in subsets:
        rest = [a for a in range(sc.n) if a not in J]
        base = conditional(sc.kernel, sc.p_z, sc.n, rest)
        if variant == "set":
            total += expectation(sc.kernel, base, sc.p_z, sc.p_r, sc.n, w1)
        elif variant == "per-sample":
            for i in J:
                fine = conditional(sc.kernel, sc.p_z, sc.n, rest + [i])
                total += expectation(fine, base, sc.p_z, sc.p_r, sc.n, w1) / m
        else:
            raise ValueError(f"variant must be 'set' or 'per-sample', got {variant!r}")
    return sc.lipschitz * total / len(subsets)


# -- TV / KL corollaries -------------------------------------------------------


def _psi_kl(p, q) -> float:
    return dv.psi(dv.kl(p, q))


def tv_kl_single_letter(sc: DiscreteScenario) -> tuple[float, float]:
    """``(b-a)/n sum_i E[TV(P_{W|Z_i},P_W)]`` and the same with ``Psi(KL)``."""
    f = drop_aux(sc.kernel, sc.p_r)
    marginal_w = conditional(f, sc.p_z, sc.n, ())
    tv = klv = 0.0
    for i in range(sc.n):
        fi = conditional(f, sc.p_z, sc.n, (i,))
        tv += expectation(fi, marginal_w, sc.p_z, sc.p_r, sc.n, dv.total_variation)
        klv += expectation(fi, marginal_w, sc.p_z, sc.p_r, sc.n, _psi_kl)
    span = _span(sc)
    return span * tv / sc.n, span * klv / sc.n


def tv_kl_random_subset(sc: DiscreteScenario, m: int = 1) -> tuple[float, float]:
    """Leave-``m``-out TV bound and its per-subset ``Psi(KL)`` counterpart."""
    subsets = _subsets(sc.n, m)
    tv = klv = 0.0
    for J in subsets:
        rest = [a for a in range(sc.n) if a not in J]
        base = conditional(sc.kernel, sc.p_z, sc.n, rest)
        tv += expectation(sc.kernel, base, sc.p_z, sc.p_r, sc.n, dv.total_variation)
        klv += expectation(sc.kernel, base, sc.p_z, sc.p_r, sc.n, _psi_kl)
    span = _span(sc)
    return span * tv / len(subsets), span * klv / len(subsets)


# -- mutual information --------------------------------------------------------


def mutual_information_ws(sc: DiscreteScenario) -> float:
    """``I(W;S)`` in nats."""
    f = drop_aux(sc.kernel, sc.p_r)
    return expectation(f, conditional(f, sc.p_z, sc.n, ()), sc.p_z, sc.p_r, sc.n, dv.kl)


def mutual_information_wz(sc: DiscreteScenario, i: int) -> float:
    """``I(W;Z_i)`` in nats."""
    f = drop_aux(sc.kernel, sc.p_r)
    fi = conditional(f, sc.p_z, sc.n, (i,))
    return expectation(fi, conditional(f, sc.p_z, sc.n, ()), sc.p_z, sc.p_r, sc.n, dv.kl)


def conditional_mi_subset(sc: DiscreteScenario, m: int = 1) -> float:
    """``E_J[I(W;S_J|S_{J^c})]`` with ``J`` uniform over size-``m`` sets."""
    f = drop_aux(sc.kernel, sc.p_r)
    subsets = _subsets(sc.n, m)
    total = 0.0
    for J in subsets:
        rest = [a for a in range(sc.n) if a not in J]
        total += expectation(f, conditional(f, sc.p_z, sc.n, rest), sc.p_z, sc.p_r, sc.n, dv.kl)
    return total / len(subsets)


def mi_chain_bounds(sc: DiscreteScenario) -> tuple[float, float, float]:
    """``(b-a)/n sum Psi(I(W;Z_i))``, ``(b-a) Psi(I(W;S)/n)`` and ``sqrt((b-a)^2 I(W;S)/(2n))``."""
    span, n = _span(sc), sc.n
    per = span * sum(dv.psi(mutual_information_wz(sc, i)) for i in range(n)) / n
    mi = mutual_information_ws(sc)
    return per, span * dv.psi(mi / n), math.sqrt(span * span * mi / (2 * n))


# -- backward channel ----------------------------------------------------------


def dataset_metric(sc: DiscreteScenario) -> MetricSpace:
    """Metric ``(1/n) sum_i rho_Z(z_i, z'_i)`` on ordered datasets."""
    nz = len(sc.samples)
    if nz ** sc.n > BACKWARD_GUARD:
        raise ValueError(f"dataset space of size {nz ** sc.n} exceeds {BACKWARD_GUARD}")
    tuples = list(itertools.product(range(nz), repeat=sc.n))
    rho = sc.sample_metric.dist
    idx = np.array(tuples)
    dist = np.zeros((len(tuples), len(tuples)))
    for i in range(sc.n):
        dist += rho[np.ix_(idx[:, i], idx[:, i])]
    return MetricSpace(tuple(tuples), dist / sc.n)


def backward_channel_bounds(sc: DiscreteScenario) -> tuple[float, float]:
    """``L_z E_W[W(P_S, P_{S|W})]`` and ``(L_z/n) sum_i E_W[W(P_{Z_i|W}, P_{Z_i})]``.

    ``L_z`` is the Lipschitz constant of the loss in its sample argument
    under the sample metric.
    """
    joint = sc.joint_sw().reshape(-1, len(sc.hypotheses))  # (s, w)
    p_s = sample_law(sc.p_z, sc.n).ravel()
    p_w = joint.sum(axis=0)
    space = dataset_metric(sc)
    full = 0.0
    single = 0.0
    zspace = sc.sample_metric
    joint_nd = sc.joint_sw()
    for w, pw in enumerate(p_w):
        if pw <= 0:
            continue
        full += pw * wasserstein1(joint[:, w] / pw, p_s, space)
        for i in range(sc.n):
            zi_w = joint_nd[..., w].sum(axis=tuple(a for a in range(sc.n) if a != i))
            single += pw * wasserstein1(zi_w / pw, sc.p_z, zspace)
    lz = sc.sample_lipschitz
    return lz * full, lz * single / sc.n


# -- f-divergence bounds ---------------------------------------------------------


def _per_letter(sc: DiscreteScenario):
    """Yield ``(P_{W|Z_i=z} rows, P_W)`` for every position ``i``."""
    f = np.einsum("...rw,r->...w", sc.kernel, sc.p_r)
    for i in range(sc.n):
        others = tuple(a for a in range(sc.n) if a != i)
        rows = f
        for ax in sorted(others, reverse=True):
            rows = np.tensordot(rows, sc.p_z, axes=([ax], [0]))
        yield rows, sc.p_z @ rows


def f_divergence_bounds(sc: DiscreteScenario) -> dict[str, float]:
    """Lautum, Hellinger and chi-squared single-letter bounds."""
    span, n = _span(sc), sc.n
    out = dict.fromkeys(("lautum", "hellinger", "chi2_viaKL", "chi2_basic", "chi2_variational"), 0.0)
    for rows, pw in _per_letter(sc):
        lautum = 0.0
        for z, pz in enumerate(sc.p_z):
            if pz == 0:
                continue
            row = rows[z]
            lautum += pz * dv.lautum_component(row, pw)
            out["hellinger"] += pz * dv.hellinger_tv_bound(dv.hellinger(row, pw))
            chi2 = dv.chi_squared(row, pw)
            via_kl, basic = dv.chi2_tv_bounds(chi2)
            out["chi2_viaKL"] += pz * via_kl
            out["chi2_basic"] += pz * basic
            out["chi2_variational"] += pz * chi2_variational_term(loss_variance(sc.loss[:, z], pw), chi2)
        out["lautum"] += dv.psi(lautum)
    for key in ("lautum", "hellinger", "chi2_viaKL", "chi2_basic"):
        out[key] *= span / n
    out["chi2_variational"] /= n
    return out


def tv_diameter_bound(sc: DiscreteScenario) -> float:
    """``L diam(W) / n sum_i E[TV(P_{W|Z_i}, P_W)]``."""
    total = 0.0
    for rows, pw in _per_letter(sc):
        total += sum(pz * dv.total_variation(rows[z], pw) for z, pz in enumerate(sc.p_z) if pz > 0)
    return sc.lipschitz * sc.metric.diameter * total / sc.n


def subgaussian_kl_bound(sc: DiscreteScenario) -> float:
    """``(1/n) sum_i E[sqrt(2 sigma^2 KL(P_{W|Z_i} || P_W))]`` with ``sigma = (b-a)/2``."""
    params = dv.SubgaussianParams(0.5 * _span(sc))
    total = 0.0
    for rows, pw in _per_letter(sc):
        for z, pz in enumerate(sc.p_z):
            if pz > 0:
                total += pz * dv.w_from_kl_subgaussian(dv.kl(rows[z], pw), params)
    return total / sc.n


# -- variational chi-squared helpers ----------------------------------------------


def loss_variance(values: np.ndarray, probs: np.ndarray) -> float:
    """``Var[l(W', z)]`` for ``W' ~ probs``."""
    mean = float(probs @ values)
    return float(max(0.0, probs @ (values - mean) ** 2))


def chi2_variational_term(variance: float, chi2: float) -> float:
    """``sqrt(Var * chi2)``; zero variance wins over an infinite divergence."""
    if variance == 0.0:
        return 0.0
    return math.sqrt(variance * chi2)


def chi2_via_kl_term(chi2: float, span: float) -> float:
    """``span * sqrt(log(1 + chi2) / 2)``."""
    return span * dv.chi2_tv_bounds(chi2)[0]


def variational_crossover(variance: float, span: float) -> float:
    """Positive ``chi2`` at which ``sqrt(Var chi2) = span sqrt(log(1+chi2)/2)``.

    Solves ``alpha x = log(1 + x)`` with ``alpha = 2 Var / span^2``. A
    positive root exists only for ``0 < alpha < 1``.
    """
    alpha = 2.0 * variance / (span * span)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"no positive crossover for 2 Var / span^2 = {alpha}")
    g = lambda x: math.log1p(x) - alpha * x
    hi = 1.0
    while g(hi) > 0:
        hi *= 2.0
    return brentq(g, 1e-12, hi, xtol=1e-14, rtol=1e-15)


def variational_dominance_threshold(span: float) -> float:
    """Largest Var for which the variational bound never exceeds the via-KL bound
    on the nonvacuous range ``chi2 <= e^2 - 1``: ``span^2 / (e^2 - 1)``."""
    return span * span / math.expm1(2.0)


# -- report ----------------------------------------------------------------------


def standard_report(sc: DiscreteScenario, m_values: Sequence[int] = (1,)) -> BoundReport:
    """Exact generalization error and every standard-setting bound."""
    bounds: dict[str, float] = {
        "full_dataset": full_dataset_wasserstein(sc),
        "single_letter": single_letter_wasserstein(sc),
    }
    for m in m_values:
        bounds[f"random_subset_set_m{m}"] = random_subset_wasserstein(sc, m, "set")
        bounds[f"random_subset_per_sample_m{m}"] = random_subset_wasserstein(sc, m, "per-sample")
    bounds["tv_single_letter"], bounds["kl_single_letter"] = tv_kl_single_letter(sc)
    bounds["tv_random_subset"], bounds["kl_random_subset"] = tv_kl_random_subset(sc, 1)
    bounds["mi_per_sample"], bounds["mi_over_n"], bounds["mi_sqrt"] = mi_chain_bounds(sc)
    nz = len(sc.samples)
    if nz ** sc.n <= BACKWARD_GUARD:
        bounds["backward_full"], bounds["backward_single"] = backward_channel_bounds(sc)
    bounds.update(f_divergence_bounds(sc))
    bounds["tv_diameter"] = tv_diameter_bound(sc)
    bounds["subgaussian_kl"] = subgaussian_kl_bound(sc)
    a, b = sc.loss_range
    meta = {
        "setting": "standard",
        "metric": "discrete" if sc.metric.is_discrete else "custom",
        "lipschitz": sc.lipschitz,
        "sample_lipschitz": sc.sample_lipschitz,
        "loss_range": [a, b],
        "subset_sizes": list(m_values),
        "n": sc.n,
    }
    return BoundReport(sc.name, exact_gen_error(sc), bounds, meta)
