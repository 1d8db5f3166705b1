import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genbound import divergences as dv
from genbound.prob import FiniteDistribution

# 50-digit reference values for P = (1/2, 1/2), Q = (9/10, 1/10)
KL_HALF_VS_NINE = 0.51082562376599068320551409630366193487811079644577
HELLINGER_HALF_VS_NINE = 0.45950584109472236704787473876292543743198187457102
PSI_AT_2 = 0.92987349503219377873813043011731176273770951205170
PINSKER_BH_ROOT = 1.59362426004004009232304187587516024178900242481890

P, Q = np.array([0.5, 0.5]), np.array([0.9, 0.1])


def laws(k_min=2, k_max=8):
    """Pairs of random probability vectors on a shared support."""
    return st.integers(k_min, k_max).flatmap(
        lambda k: st.tuples(
            st.lists(st.floats(0, 1), min_size=k, max_size=k),
            st.lists(st.floats(0, 1), min_size=k, max_size=k),
        )
    ).filter(lambda pq: sum(pq[0]) > 1e-3 and sum(pq[1]) > 1e-3).map(
        lambda pq: (np.array(pq[0]) / sum(pq[0]), np.array(pq[1]) / sum(pq[1]))
    )


class TestPairs:
    def test_pair_accepts_distributions(self):
        p = FiniteDistribution("ab", P)
        q = FiniteDistribution("ab", Q)
        assert dv.total_variation(dv.DivergencePair(p, q)) == pytest.approx(0.4)
        assert dv.total_variation(p, q) == pytest.approx(0.4)

    def test_support_mismatch(self):
        with pytest.raises(dv.SupportMismatchError):
            dv.DivergencePair(FiniteDistribution("ab", P), FiniteDistribution("ba", Q))
        with pytest.raises(dv.SupportMismatchError):
            dv.kl([1.0], [0.5, 0.5])

    def test_subgaussian_params(self):
        with pytest.raises(ValueError):
            dv.SubgaussianParams(math.inf)


class TestTotalVariation:
    def test_identity(self):
        assert dv.total_variation(P, P) == 0.0

    def test_disjoint(self):
        assert dv.total_variation([1, 0], [0, 1]) == 1.0

    def test_event_enumeration(self):
        # sup over the four events of P(A) - Q(A)
        events = [(), (0,), (1,), (0, 1)]
        sup = max(sum(P[list(a)]) - sum(Q[list(a)]) for a in events)
        assert dv.total_variation(P, Q) == pytest.approx(sup, abs=1e-15)
        assert sup == pytest.approx(0.4)

    @settings(max_examples=200, deadline=None)
    @given(laws())
    def test_symmetric_and_bounded(self, pq):
        p, q = pq
        t = dv.total_variation(p, q)
        assert 0.0 <= t <= 1.0
        assert t == dv.total_variation(q, p)


class TestKL:
    def test_identity(self):
        assert dv.kl(Q, Q) == 0.0

    def test_point_mass_vs_coin(self):
        assert dv.kl([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)

    def test_reference_value(self):
        assert dv.kl(P, Q) == pytest.approx(KL_HALF_VS_NINE, rel=1e-14)

    def test_infinite(self):
        assert dv.kl([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_zero_log_zero(self):
        assert dv.kl([1.0, 0.0], [1.0, 0.0]) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(laws())
    def test_nonnegative_and_identity(self, pq):
        p, q = pq
        assert dv.kl(p, q) >= 0.0
        assert dv.kl(p, p) == pytest.approx(0.0, abs=1e-15)


class TestOtherDivergences:
    def test_hellinger_values(self):
        assert dv.hellinger(P, P) == 0.0
        assert dv.hellinger([1, 0], [0, 1]) == pytest.approx(math.sqrt(2))
        assert dv.hellinger(P, Q) == pytest.approx(HELLINGER_HALF_VS_NINE, rel=1e-14)

    def test_chi_squared(self):
        assert dv.chi_squared(P, Q) == pytest.approx(16 / 9, rel=1e-14)
        assert dv.chi_squared([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_lautum_component_reverses(self):
        assert dv.lautum_component(P, Q) == pytest.approx(dv.kl(Q, P), rel=1e-15)
        assert dv.lautum_component([1.0, 0.0], [0.5, 0.5]) == math.inf

    @settings(max_examples=200, deadline=None)
    @given(laws())
    def test_ranges_and_chi2_kl(self, pq):
        p, q = pq
        h = dv.hellinger(p, q)
        assert 0.0 <= h <= math.sqrt(2)
        chi2 = dv.chi_squared(p, q)
        assert chi2 >= 0.0
        if math.isfinite(chi2):
            assert dv.kl(p, q) <= math.log1p(chi2) + 1e-12


class TestPsi:
    @pytest.mark.parametrize("x, expected", [(0.0, 0.0), (math.inf, 1.0), (2.0, PSI_AT_2)])
    def test_values(self, x, expected):
        assert dv.psi(x) == pytest.approx(expected, rel=1e-14, abs=1e-15)

    def test_negative(self):
        with pytest.raises(ValueError):
            dv.psi(-1e-3)

    def test_is_min_of_branches(self):
        for x in np.linspace(0, 10, 101):
            assert dv.psi(x) == pytest.approx(math.sqrt(min(x / 2, 1 - math.exp(-x))), abs=1e-15)

    def test_monotone_and_capped(self):
        xs = np.linspace(0, 50, 2001)
        vals = [dv.psi(x) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert max(vals) <= 1.0

    @settings(max_examples=500, deadline=None)
    @given(laws())
    def test_pinsker_bh(self, pq):
        p, q = pq
        assert dv.total_variation(p, q) <= dv.psi(dv.kl(p, q)) + 1e-12


class TestCrossover:
    def test_brackets(self):
        # Pinsker branch smaller at 1, Bretagnolle-Huber branch smaller at 2
        assert 1 / 2 < 1 - math.exp(-1)
        assert 2 / 2 > 1 - math.exp(-2)

    def test_root(self):
        x = dv.pinsker_bh_crossover()
        assert 1.59 <= x <= 1.60
        assert x == pytest.approx(PINSKER_BH_ROOT, abs=1e-10)


class TestConversions:
    @pytest.mark.parametrize("klval, sigma, expected", [(0.0, 1.0, 0.0), (2.0, 1.0, 2.0), (0.32, 0.5, 0.4)])
    def test_subgaussian(self, klval, sigma, expected):
        assert dv.w_from_kl_subgaussian(klval, dv.SubgaussianParams(sigma)) == pytest.approx(expected)

    def test_subgaussian_negative(self):
        with pytest.raises(ValueError):
            dv.w_from_kl_subgaussian(-1.0, dv.SubgaussianParams(1.0))

    @pytest.mark.parametrize("h, expected", [(0.0, 0.0), (math.sqrt(2), 1.0), (1.0, math.sqrt(3) / 2)])
    def test_hellinger_tv(self, h, expected):
        assert dv.hellinger_tv_bound(h) == pytest.approx(expected, abs=1e-15)

    def test_hellinger_tv_range(self):
        with pytest.raises(ValueError):
            dv.hellinger_tv_bound(1.5)

    def test_chi2_tv(self):
        assert dv.chi2_tv_bounds(0.0) == (0.0, 0.0)
        assert dv.chi2_tv_bounds(math.e ** 2 - 1)[0] == pytest.approx(1.0, abs=1e-15)
        via, basic = dv.chi2_tv_bounds(1.0)
        assert via == pytest.approx(0.58870501125773734551, abs=1e-15)
        assert basic == 0.5

    def test_joint_range_validity(self, rng):
        for _ in range(500):
            k = rng.integers(2, 9)
            p, q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
            tv = dv.total_variation(p, q)
            assert dv.hellinger_tv_bound(dv.hellinger(p, q)) >= tv - 1e-12
            assert dv.chi2_tv_bounds(dv.chi_squared(p, q))[1] >= tv - 1e-12
