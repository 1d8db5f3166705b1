"""Exact bounds in the randomized-subsample (supersample) setting.

Kernel arrays have shape ``(|Z|,) * 2n + (2,) * n + (|R|, |W|)``: supersample
axes ``0 .. 2n-1``, mask axes ``2n .. 3n-1``, then the auxiliary axis. The
mask entries are fair coins.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import divergences as dv
from .bounds_standard import BoundReport, drop_aux, expect, _subsets
from .prob import ConditionalKernel, SupersampleScenario, exact_empirical_gen_error
from .transport import wasserstein1

_HALF = np.array([0.5, 0.5])
LOG2 = math.log(2.0)


def _weights(sc: SupersampleScenario) -> list[np.ndarray]:
    return [sc.p_z] * (2 * sc.n) + [_HALF] * sc.n + [sc.p_r]


def average(sc: SupersampleScenario, kernel: np.ndarray, axes: Iterable[int]) -> np.ndarray:
    """Average the given leading axes of ``kernel`` against their laws (keepdims)."""
    weights = _weights(sc)
    out = kernel
    for ax in sorted(set(axes)):
        out = np.expand_dims(np.tensordot(out, weights[ax], axes=([ax], [0])), ax)
    return out


def _mask_axes(sc: SupersampleScenario, positions: Iterable[int]) -> list[int]:
    return [2 * sc.n + j for j in positions]


def _letter_view(sc: SupersampleScenario, kernel: np.ndarray, i: int):
    """``(P_{W|S~_i,U_i}, P_{W|S~_i})`` as broadcastable arrays."""
    n = sc.n
    others = [a for a in range(2 * n) if a not in (i, i + n)]
    others += [2 * n + j for j in range(n) if j != i]
    fine = average(sc, kernel, others)
    return fine, average(sc, fine, [2 * n + i])


def _expect(sc, fine, coarse, fn) -> float:
    return expect(fine, coarse, _weights(sc), fn)


def _w1(sc):
    return lambda p, q: wasserstein1(p, q, sc.metric)


def _span(sc) -> float:
    a, b = sc.loss_range
    return b - a


# -- Wasserstein bounds ---------------------------------------------------------


def rs_full_dataset(sc: SupersampleScenario) -> float:
    """``2L E[W(P_{W|S~,U}, P_{W|S~})]``."""
    f = drop_aux(sc.kernel, sc.p_r)
    return 2 * sc.lipschitz * _expect(sc, f, average(sc, f, _mask_axes(sc, range(sc.n))), _w1(sc))


def rs_single_letter(sc: SupersampleScenario) -> float:
    """``(2L/n) sum_i E[W(P_{W|S~_i,U_i}, P_{W|S~_i})]``."""
    f = drop_aux(sc.kernel, sc.p_r)
    total = 0.0
    for i in range(sc.n):
        fine, coarse = _letter_view(sc, f, i)
        total += _expect(sc, fine, coarse, _w1(sc))
    return 2 * sc.lipschitz * total / sc.n


def rs_random_subset(sc: SupersampleScenario, m: int = 1, variant: str = "set") -> float:
    """``2L E[W(P_{W|S~,U,R}, P_{W|S~,U_{J^c},R})]`` or its per-sample form."""
    subsets = _subsets(sc.n, m)
    total = 0.0
    for J in subsets:
        base = average(sc, sc.kernel, _mask_axes(sc, J))
        if variant == "set":
            total += _expect(sc, sc.kernel, base, _w1(sc))
        elif variant == "per-sample":
            for i in J:
                fine = average(sc, sc.kernel, _mask_axes(sc, [j for j in J if j != i]))
                total += _expect(sc, fine, base, _w1(sc)) / m
        else:
            raise ValueError(f"variant must be 'set' or 'per-sample', got {variant!r}")
    return 2 * sc.lipschitz * total / len(subsets)


# -- TV / KL corollaries --------------------------------------------------------


def _sqrt2kl(p, q) -> float:
    return math.sqrt(2.0 * dv.kl(p, q))


def rs_tv_kl_single_letter(sc: SupersampleScenario) -> tuple[float, float]:
    """``2(b-a)/n sum E[TV]`` and ``(b-a)/n sum E[sqrt(2 KL)]`` per letter."""
    f = drop_aux(sc.kernel, sc.p_r)
    tv = klv = 0.0
    for i in range(sc.n):
        fine, coarse = _letter_view(sc, f, i)
        tv += _expect(sc, fine, coarse, dv.total_variation)
        klv += _expect(sc, fine, coarse, _sqrt2kl)
    span = _span(sc)
    return 2 * span * tv / sc.n, span * klv / sc.n


def rs_tv_kl_random_subset(sc: SupersampleScenario, m: int = 1) -> tuple[float, float]:
    """Leave-``m``-out analogue of :func:`rs_tv_kl_single_letter` with ``R``."""
    subsets = _subsets(sc.n, m)
    tv = klv = 0.0
    for J in subsets:
        base = average(sc, sc.kernel, _mask_axes(sc, J))
        tv += _expect(sc, sc.kernel, base, dv.total_variation)
        klv += _expect(sc, sc.kernel, base, _sqrt2kl)
    span = _span(sc)
    return 2 * span * tv / len(subsets), span * klv / len(subsets)


def letter_kl_values(sc: SupersampleScenario) -> list[float]:
    """Every ``KL(P_{W|s~_i,u_i} || P_{W|s~_i})`` over positions and positive-mass cells."""
    f = drop_aux(sc.kernel, sc.p_r)
    out = []
    for i in range(sc.n):
        fine, coarse = _letter_view(sc, f, i)
        weights = _weights(sc)
        for idx in np.ndindex(*fine.shape[:-1]):
            if all(weights[a][k] > 0 for a, k in enumerate(idx) if fine.shape[a] > 1):
                cidx = tuple(k if coarse.shape[a] > 1 else 0 for a, k in enumerate(idx))
                out.append(dv.kl(fine[idx], coarse[cidx]))
    return out


def kl_log2_lemma_check(kernel: ConditionalKernel) -> float:
    """Largest ``KL(P_{X|a,b} || P_{X|a})`` for a fair ``k``-bit ``B``.

    Inputs of ``kernel`` are pairs ``(a, b)`` with ``b`` a tuple of ``k``
    bits; every pair must be present. Raises ``AssertionError`` if the
    value exceeds ``k log 2``.
    """
    groups: dict = {}
    for (a, b), row in zip(kernel.inputs, kernel.matrix):
        groups.setdefault(a, {})[tuple(b)] = row
    k = None
    worst = 0.0
    for a, rows in groups.items():
        bits = {len(b) for b in rows}
        if len(bits) != 1:
            raise ValueError("all b tuples must have the same length")
        k = bits.pop()
        if set(rows) != set(itertools.product((0, 1), repeat=k)):
            raise ValueError(f"input {a!r} is missing some of the 2^{k} bit patterns")
        mix = np.mean(list(rows.values()), axis=0)
        worst = max(worst, max(dv.kl(r, mix) for r in rows.values()))
    assert worst <= (k or 0) * LOG2 + 1e-12, f"KL {worst} exceeds {k} log 2"
    return worst


# -- mutual information ---------------------------------------------------------


def _mi(sc, fine, coarse) -> float:
    return _expect(sc, fine, coarse, dv.kl)


@dataclass(frozen=True)
class SubsampleInformation:
    """Exact information quantities of one supersample learner (nats)."""

    letter_local: float      # sum_i I(W;U_i|S~_i)
    letter_global: float     # sum_i I(W;U_i|S~)
    mask: float              # I(W;U|S~)
    subset: float            # E_J I(W;U_J|S~,U_{J^c}) with |J| = m
    m: int
    supersample: float       # I(W;S~)


def subsample_information(sc: SupersampleScenario, m: int = 1) -> SubsampleInformation:
    f = drop_aux(sc.kernel, sc.p_r)
    n = sc.n
    all_masks = _mask_axes(sc, range(n))
    f_st = average(sc, f, all_masks)
    local = glob = 0.0
    for i in range(n):
        fine, coarse = _letter_view(sc, f, i)
        local += _mi(sc, fine, coarse)
        fine = average(sc, f, [2 * n + j for j in range(n) if j != i])
        glob += _mi(sc, fine, f_st)
    subsets = _subsets(n, m)
    subset = sum(_mi(sc, f, average(sc, f, _mask_axes(sc, J))) for J in subsets) / len(subsets)
    f_none = average(sc, f_st, range(2 * n))
    return SubsampleInformation(
        letter_local=local, letter_global=glob, mask=_mi(sc, f, f_st), subset=subset, m=m,
        supersample=_mi(sc, f_st, f_none),
    )


# -- report ---------------------------------------------------------------------


def subsample_report(sc: SupersampleScenario, m_values: Sequence[int] = (1,)) -> BoundReport:
    """Exact empirical generalization error and every supersample bound."""
    bounds = {
        "rs_full_dataset": rs_full_dataset(sc),
        "rs_single_letter": rs_single_letter(sc),
    }
    for m in m_values:
        bounds[f"rs_random_subset_set_m{m}"] = rs_random_subset(sc, m, "set")
        bounds[f"rs_random_subset_per_sample_m{m}"] = rs_random_subset(sc, m, "per-sample")
    bounds["rs_tv_single_letter"], bounds["rs_kl_single_letter"] = rs_tv_kl_single_letter(sc)
    bounds["rs_tv_random_subset"], bounds["rs_kl_random_subset"] = rs_tv_kl_random_subset(sc, 1)
    a, b = sc.loss_range
    meta = {
        "setting": "supersample",
        "metric": "discrete" if sc.metric.is_discrete else "custom",
        "lipschitz": sc.lipschitz,
        "loss_range": [a, b],
        "subset_sizes": list(m_values),
        "n": sc.n,
        "markov": sc.is_markov(),
    }
    return BoundReport(sc.name, exact_empirical_gen_error(sc), bounds, meta)
