"""f-divergences between finite laws and their conversions into bound terms.

All functions use natural logarithms and extended reals: a divergence that
is infinite because of an absolute-continuity failure is returned as
``math.inf`` and propagates into any bound built from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from .prob import FiniteDistribution

# laws closer than this are equal up to rounding in upstream conditioning
_EQUAL_TOL = 8 * np.finfo(float).eps


class SupportMismatchError(ValueError):
    """The two laws are not defined on the same ordered support."""


@dataclass(frozen=True)
class DivergencePair:
    """Two laws on one ordered support."""

    p: FiniteDistribution
    q: FiniteDistribution

    def __post_init__(self):
        if self.p.supports != self.q.supports:
            raise SupportMismatchError("distributions must share an identically ordered support")


@dataclass(frozen=True)
class SubgaussianParams:
    """Subgaussian constant ``sigma`` of the loss under the reference law."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("sigma must be finite and nonnegative")


def _arrays(p, q=None):
    """Accept a DivergencePair, two FiniteDistributions or two arrays."""
    if q is None:
        if not isinstance(p, DivergencePair):
            raise TypeError("expected a DivergencePair or two distributions")
        p, q = p.p, p.q
    if isinstance(p, FiniteDistribution) and isinstance(q, FiniteDistribution):
        DivergencePair(p, q)
    a = np.asarray(getattr(p, "probs", p), dtype=float).ravel()
    b = np.asarray(getattr(q, "probs", q), dtype=float).ravel()
    if a.shape != b.shape:
        raise SupportMismatchError(f"support sizes differ: {a.size} vs {b.size}")
    return a, b


def total_variation(p, q=None) -> float:
    """Half the L1 distance, i.e. ``sup_A P(A) - Q(A)``."""
    a, b = _arrays(p, q)
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))


def kl(p, q=None) -> float:
    """Relative entropy ``D(P || Q)`` in nats; ``+inf`` if P is not << Q.

    Returns exactly 0 for laws that agree to a few ulps, where the sum would
    otherwise be dominated by first-order rounding of order 1e-16.
    """
    a, b = _arrays(p, q)
    if np.max(np.abs(a - b), initial=0.0) <= _EQUAL_TOL:
        return 0.0
    return float(max(0.0, rel_entr(a, b).sum()))


def chi_squared(p, q=None) -> float:
    """``sum (p - q)^2 / q``; ``+inf`` if P puts mass where Q has none."""
    a, b = _arrays(p, q)
    pos = b > 0
    if np.any(a[~pos] > 0):
        return math.inf
    with np.errstate(over="ignore"):
        return float(((a[pos] - b[pos]) ** 2 / b[pos]).sum())


def hellinger(p, q=None) -> float:
    """Hellinger distance ``sqrt(sum (sqrt p - sqrt q)^2)``, in ``[0, sqrt 2]``."""
    a, b = _arrays(p, q)
    return float(min(math.sqrt(2.0), math.sqrt(((np.sqrt(a) - np.sqrt(b)) ** 2).sum())))


def lautum_component(p, q=None) -> float:
    """``KL(Q || P)``: relative entropy with the arguments reversed."""
    a, b = _arrays(p, q)
    return kl(b, a)


def psi(x: float) -> float:
    """``sqrt(min(x/2, 1 - exp(-x)))``, the tighter of Pinsker and Bretagnolle-Huber."""
    x = float(x)
    if math.isnan(x) or x < 0:
        raise ValueError(f"psi is defined for x >= 0, got {x}")
    if math.isinf(x):
        return 1.0
    return math.sqrt(min(0.5 * x, -math.expm1(-x)))


def pinsker_bh_crossover(tol: float = 1e-12) -> float:
    """Positive root of ``x/2 = 1 - exp(-x)`` by bisection on ``[1, 2]``."""
    def g(x):
        return 0.5 * x + math.expm1(-x)

    lo, hi = 1.0, 2.0
    assert g(lo) < 0 < g(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def w_from_kl_subgaussian(klval: float, params: SubgaussianParams | float) -> float:
    """Transport bound ``sqrt(2 sigma^2 KL)`` for a sigma-subgaussian loss."""
    sigma = params.sigma if isinstance(params, SubgaussianParams) else float(params)
    if klval < 0 or sigma < 0:
        raise ValueError("klval and sigma must be nonnegative")
    if math.isinf(klval):
        return math.inf if sigma > 0 else 0.0
    return math.sqrt(2.0 * sigma * sigma * klval)


def hellinger_tv_bound(h: float) -> float:
    """``H sqrt(4 - H^2) / 2``, the joint-range upper bound on TV given H."""
    if h < 0 or h > math.sqrt(2.0) + 1e-12:
        raise ValueError(f"Hellinger distance must lie in [0, sqrt 2], got {h}")
    h = min(h, math.sqrt(2.0))
    return min(1.0, 0.5 * h * math.sqrt(max(0.0, 4.0 - h * h)))


def chi2_tv_bounds(chi2: float) -> tuple[float, float]:
    """TV bounds from chi-squared: ``(sqrt(log(1+chi2)/2), sqrt(chi2)/2)``."""
    if chi2 < 0:
        raise ValueError("chi-squared must be nonnegative")
    if math.isinf(chi2):
        return math.inf, math.inf
    return math.sqrt(0.5 * math.log1p(chi2)), 0.5 * math.sqrt(chi2)
