import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genbound.errors import EnumerationGuardError, InvariantError, UnconditionableError
from genbound.prob import (
    ConditionalKernel,
    DiscreteScenario,
    FiniteDistribution,
    SupersampleScenario,
    condition,
    exact_empirical_gen_error,
    exact_gen_error,
    marginal,
    product,
)

from conftest import independent, memorizer, random_scenario, random_supersample


class TestFiniteDistribution:
    def test_valid(self):
        d = FiniteDistribution(["a", "b"], [0.25, 0.75])
        assert d.support == ("a", "b")
        assert d.prob("b") == 0.75

    @pytest.mark.parametrize("probs", [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0]])
    def test_rejects_bad_probs(self, probs):
        with pytest.raises(InvariantError):
            FiniteDistribution(["a", "b"], probs)

    def test_rejects_duplicate_support(self):
        with pytest.raises(InvariantError):
            FiniteDistribution(["a", "a"], [0.5, 0.5])

    def test_sum_tolerance_is_1e12(self):
        FiniteDistribution([0, 1], [0.5, 0.5 + 5e-13])
        with pytest.raises(InvariantError):
            FiniteDistribution([0, 1], [0.5, 0.5 + 1e-10])

    def test_immutable(self):
        d = FiniteDistribution([0, 1], [0.5, 0.5])
        with pytest.raises(AttributeError):
            d.probs = np.ones(2)
        with pytest.raises(ValueError):
            d.probs[0] = 1.0


class TestMarginal:
    def test_uniform_square(self):
        joint = FiniteDistribution.over([[0, 1], [0, 1]], np.full((2, 2), 0.25))
        np.testing.assert_array_equal(marginal(joint, [1]).probs, [0.5, 0.5])

    def test_product_law(self):
        p = FiniteDistribution("xyz", [0.2, 0.3, 0.5])
        q = FiniteDistribution("ab", [0.9, 0.1])
        m = marginal(product(p, q), [1])
        assert m.supports == p.supports
        np.testing.assert_allclose(m.probs, p.probs, rtol=0, atol=1e-15)

    def test_against_naive_loop(self, rng):
        table = rng.random((3, 4))
        table /= table.sum()
        joint = FiniteDistribution.over([range(3), range(4)], table)
        naive = [sum(table[i, j] for j in range(4)) for i in range(3)]
        np.testing.assert_allclose(marginal(joint, [1]).probs, naive, atol=1e-15)

    def test_axis_order_irrelevant(self, rng):
        table = rng.dirichlet(np.ones(24)).reshape(2, 3, 4)
        joint = FiniteDistribution.over([range(2), range(3), range(4)], table)
        a = marginal(marginal(joint, [0]), [1])
        b = marginal(marginal(joint, [2]), [0])
        c = marginal(joint, [2, 0])
        np.testing.assert_allclose(a.probs, c.probs, atol=1e-15)
        np.testing.assert_allclose(b.probs, c.probs, atol=1e-15)

    @pytest.mark.parametrize("axes", [[2], [-1], [0, 1]])
    def test_bad_axes(self, axes):
        joint = FiniteDistribution.over([[0, 1], [0, 1]], np.full((2, 2), 0.25))
        with pytest.raises(IndexError):
            marginal(joint, axes)


class TestCondition:
    def test_independent(self):
        p = FiniteDistribution("xyz", [0.2, 0.3, 0.5])
        q = FiniteDistribution("ab", [0.9, 0.1])
        c = condition(product(p, q), {1: "b"})
        np.testing.assert_allclose(c.probs, p.probs, atol=1e-15)

    def test_deterministic(self):
        joint = FiniteDistribution.over([range(3), range(3)], np.diag([0.2, 0.3, 0.5]))
        np.testing.assert_array_equal(condition(joint, {1: 2}).probs, [0, 0, 1])

    def test_bayes_consistency(self, rng):
        table = rng.dirichlet(np.ones(16)).reshape(4, 4)
        joint = FiniteDistribution.over([range(4), range(4)], table)
        for e in range(4):
            c = condition(joint, {1: e})
            np.testing.assert_allclose(c.probs * table[:, e].sum(), table[:, e], atol=1e-15)

    def test_zero_evidence(self):
        joint = FiniteDistribution.over([[0, 1], [0, 1]], [[0.5, 0.0], [0.5, 0.0]])
        with pytest.raises(UnconditionableError):
            condition(joint, {1: 1})

    def test_reconstruction(self, rng):
        table = rng.dirichlet(np.ones(12)).reshape(3, 4)
        joint = FiniteDistribution.over([range(3), range(4)], table)
        p_e = marginal(joint, [0]).probs
        mix = sum(p_e[e] * condition(joint, {1: e}).probs for e in range(4))
        np.testing.assert_allclose(mix, marginal(joint, [1]).probs, atol=1e-12)


class TestConditionalKernel:
    def test_rows_validated(self):
        with pytest.raises(InvariantError):
            ConditionalKernel([0, 1], ["a", "b"], [[0.5, 0.5], [0.7, 0.7]])

    def test_joint(self):
        k = ConditionalKernel([0, 1], ["a", "b"], [[1.0, 0.0], [0.25, 0.75]])
        j = k.joint(FiniteDistribution([0, 1], [0.5, 0.5]))
        np.testing.assert_allclose(j.probs, [[0.5, 0.0], [0.125, 0.375]])


class TestDiscreteScenario:
    def test_lipschitz_violation(self):
        with pytest.raises(InvariantError, match="Lipschitz"):
            DiscreteScenario(samples=[0, 1], n=1, p_z=[0.5, 0.5], hypotheses=[0, 1],
                             kernel=np.eye(2), loss=1 - np.eye(2), lipschitz=0.99)

    def test_tightest_lipschitz_default(self):
        sc = DiscreteScenario(samples=[0, 1], n=1, p_z=[0.5, 0.5], hypotheses=[0, 1],
                              kernel=np.eye(2), loss=[[0.0, 0.2], [0.6, 0.0]])
        assert sc.lipschitz == pytest.approx(0.6)

    def test_guard(self):
        with pytest.raises(EnumerationGuardError):
            DiscreteScenario(samples=range(11), n=6, p_z=np.full(11, 1 / 11), hypotheses=[0],
                             kernel=np.ones((1,)), loss=np.zeros((1, 11)))

    def test_bad_kernel_row(self):
        with pytest.raises(InvariantError):
            DiscreteScenario(samples=[0, 1], n=1, p_z=[0.5, 0.5], hypotheses=[0, 1],
                             kernel=[[0.5, 0.6], [0.5, 0.5]], loss=np.zeros((2, 2)))


class TestExactGenError:
    def test_independent_is_zero(self, rng):
        assert exact_gen_error(independent(rng)) == pytest.approx(0.0, abs=1e-15)

    def test_memorizer(self):
        assert exact_gen_error(memorizer()) == 0.5

    def test_monte_carlo(self, rng):
        sc = random_scenario(rng, n=2, nz=3, nw=4)
        draws = 10 ** 6
        z = rng.choice(3, size=(draws, 2), p=sc.p_z)
        rows = sc.kernel[z[:, 0], z[:, 1], 0]
        w = (rows.cumsum(axis=1) > rng.random((draws, 1))).argmax(axis=1)
        pop = (sc.loss @ sc.p_z)[w]
        emp = 0.5 * (sc.loss[w, z[:, 0]] + sc.loss[w, z[:, 1]])
        gap = pop - emp
        se = gap.std(ddof=1) / np.sqrt(draws)
        assert abs(gap.mean() - exact_gen_error(sc)) < 3 * se

    def test_brute_force_loop(self, rng):
        sc = random_scenario(rng, n=2, nz=2, nw=3, nr=2)
        pop = sc.loss @ sc.p_z
        total = 0.0
        for s in itertools.product(range(2), repeat=2):
            ps = sc.p_z[s[0]] * sc.p_z[s[1]]
            for r in range(2):
                for w in range(3):
                    pw = ps * sc.p_r[r] * sc.kernel[s + (r, w)]
                    total += pw * (pop[w] - np.mean([sc.loss[w, z] for z in s]))
        assert exact_gen_error(sc) == pytest.approx(total, abs=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_relabel_invariance(self, seed):
        rng = np.random.default_rng(seed)
        sc = random_scenario(rng, n=2, nz=3, nw=4)
        re = sc.relabel(rng.permutation(3), rng.permutation(4))
        assert exact_gen_error(re) == pytest.approx(exact_gen_error(sc), abs=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_bounded_by_range(self, seed):
        rng = np.random.default_rng(seed)
        sc = random_scenario(rng, n=2, nz=3, nw=4, conc=0.1)
        a, b = sc.loss_range
        assert abs(exact_gen_error(sc)) <= b - a


class TestEmpiricalGenError:
    def test_mask_independent_kernel(self, rng):
        base = rng.dirichlet(np.ones(4), size=(2,) * 4)
        kernel = np.broadcast_to(base[..., None, None, None, :], (2,) * 4 + (2, 2, 1, 4))
        sc = SupersampleScenario(samples=[0, 1], n=2, p_z=[0.3, 0.7], hypotheses=range(4),
                                 kernel=kernel, loss=rng.random((4, 2)))
        assert exact_empirical_gen_error(sc) == pytest.approx(0.0, abs=1e-15)

    def test_memorizer_coincides(self):
        sc = memorizer()
        rs = SupersampleScenario.from_standard(sc)
        assert exact_empirical_gen_error(rs) == pytest.approx(exact_gen_error(sc), abs=1e-15)

    def test_coincidence_random(self, rng):
        for _ in range(10):
            sc = random_scenario(rng, n=2, nz=2, nw=4, nr=2)
            rs = SupersampleScenario.from_standard(sc)
            assert rs.is_markov()
            assert abs(exact_empirical_gen_error(rs) - exact_gen_error(sc)) < 1e-12
            assert abs(exact_gen_error(rs.induced_standard()) - exact_gen_error(sc)) < 1e-12

    def test_u_revealing_not_markov(self, rng):
        rs = random_supersample(rng, n=1, nz=2)
        assert not rs.is_markov()

    def test_guard(self):
        with pytest.raises(EnumerationGuardError):
            SupersampleScenario(samples=range(10), n=4, p_z=np.full(10, 0.1), hypotheses=[0],
                                kernel=np.ones(1), loss=np.zeros((1, 10)))
