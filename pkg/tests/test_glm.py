import math

import mpmath
import numpy as np
import pytest
from scipy.stats import norm

from genbound import glm
from genbound.glm import GlmConfig

# d = 1, sigma^2 = 1, n = 10, evaluated at 50 digits
REFERENCE_D1_N10 = {
    "gen": 0.079888630582352447,
    "full": 0.35682482323055422,
    "single": 0.11141123268197033,
    "subset": 0.11283791670955126,
    "ismi": 0.34043584891078808,
}


def mp_gamma_ratio(d):
    mpmath.mp.dps = 50
    return float(mpmath.gamma(mpmath.mpf(d + 1) / 2) / mpmath.gamma(mpmath.mpf(d) / 2))


class TestConfig:
    @pytest.mark.parametrize("kwargs", [{"d": 0}, {"sigma2": 0.0}, {"sigma2": math.inf}, {"n_values": (0,)}])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            GlmConfig(**kwargs)

    def test_mu_broadcast(self):
        assert GlmConfig(d=3, mu=2.0).mu == (2.0, 2.0, 2.0)
        np.testing.assert_array_equal(GlmConfig(d=2).mean, [0.0, 0.0])


class TestClosedForms:
    @pytest.mark.parametrize("d", [1, 2, 3, 10, 250])
    def test_gamma_ratio(self, d):
        assert glm.gamma_ratio(d) == pytest.approx(mp_gamma_ratio(d), rel=1e-13)

    def test_gamma_ratio_frozen(self):
        assert glm.gamma_ratio(1) == pytest.approx(0.56418958354775629, rel=1e-15)
        assert glm.gamma_ratio(2) == pytest.approx(0.88622692545275801, rel=1e-15)
        assert glm.gamma_ratio(250) == pytest.approx(11.169165165702338, rel=1e-15)

    @pytest.mark.parametrize("name, fn", [
        ("gen", glm.glm_exact_gen),
        ("full", glm.glm_full_bound),
        ("single", glm.glm_single_letter_bound),
        ("subset", glm.glm_random_subset_bound),
        ("ismi", glm.glm_ismi_bound),
    ])
    def test_reference_values(self, name, fn):
        assert fn(GlmConfig(), 10) == pytest.approx(REFERENCE_D1_N10[name], rel=1e-14)

    def test_gen_without_cancellation(self):
        mpmath.mp.dps = 50
        n = 10 ** 12
        exact = mpmath.sqrt(mpmath.mpf(2) / n) * (mpmath.sqrt(n + 1) - mpmath.sqrt(n - 1)) / mpmath.sqrt(mpmath.pi)
        assert glm.glm_exact_gen(GlmConfig(), n) == pytest.approx(float(exact), rel=1e-13)

    def test_ismi_information(self):
        assert glm.glm_ismi_mutual_information(3, 4) == pytest.approx(1.5 * math.log(4 / 3), rel=1e-15)

    @pytest.mark.parametrize("fn, cfg, n", [
        (glm.glm_exact_gen, GlmConfig(), 1),
        (glm.glm_ismi_bound, GlmConfig(), 1),
        (glm.glm_ismi_bound, GlmConfig(d=2), 10),
    ])
    def test_domain(self, fn, cfg, n):
        with pytest.raises(ValueError):
            fn(cfg, n)

    @pytest.mark.parametrize("d", [1, 250])
    @pytest.mark.parametrize("n", [2, 10, 50, 100, 1000])
    def test_bounds_dominate(self, d, n):
        cfg = GlmConfig(d=d)
        gen = glm.glm_exact_gen(cfg, n)
        for fn in (glm.glm_full_bound, glm.glm_single_letter_bound, glm.glm_random_subset_bound):
            assert gen <= fn(cfg, n)
        assert glm.glm_single_letter_bound(cfg, n) <= glm.glm_full_bound(cfg, n)

    @pytest.mark.parametrize("fn, ratio", [
        (glm.glm_full_bound, 2.0),
        (glm.glm_random_subset_bound, 4.0),
        (glm.glm_exact_gen, 4.0),
    ])
    def test_rates(self, fn, ratio):
        cfg = GlmConfig()
        assert fn(cfg, 100) / fn(cfg, 400) == pytest.approx(ratio, rel=1e-3)

    def test_sigma_scaling(self):
        a, b = GlmConfig(sigma2=1.0), GlmConfig(sigma2=4.0)
        for fn in (glm.glm_exact_gen, glm.glm_full_bound, glm.glm_single_letter_bound):
            assert fn(b, 20) == pytest.approx(2 * fn(a, 20), rel=1e-14)


class TestExpectedNorm:
    @pytest.mark.parametrize("s", [0.0, 0.3, 1.0, 4.0])
    def test_one_dimensional_folded_normal(self, s):
        sigma = 1.5
        folded = sigma * math.sqrt(2 / math.pi) * math.exp(-s * s / (2 * sigma ** 2)) + s * (1 - 2 * norm.cdf(-s / sigma))
        assert glm._expected_norm(np.array([[s]]), sigma)[0] == pytest.approx(folded, rel=1e-13)

    def test_against_mpmath(self):
        mpmath.mp.dps = 30
        for d, lam in [(2, 0.5), (5, 3.0), (250, 0.1)]:
            shift = np.zeros((1, d))
            shift[0, 0] = math.sqrt(2 * lam)
            ref = math.sqrt(2) * mp_gamma_ratio(d) * float(mpmath.hyp1f1(-0.5, d / 2, -lam))
            assert glm._expected_norm(shift, 1.0)[0] == pytest.approx(ref, rel=1e-12)


class TestMonteCarlo:
    @pytest.mark.parametrize("d, n", [(1, 10), (1, 100), (250, 10)])
    def test_agrees_with_closed_form(self, d, n):
        cfg = GlmConfig(d=d, trials=20_000, seed=7)
        mean, se = glm.glm_monte_carlo_gen(cfg, n)
        assert abs(mean - glm.glm_exact_gen(cfg, n)) < 3 * se

    def test_reproducible(self):
        cfg = GlmConfig(trials=2000, seed=3)
        assert glm.glm_monte_carlo_gen(cfg, 10) == glm.glm_monte_carlo_gen(cfg, 10)

    def test_mean_shift_invariance(self):
        base = glm.glm_monte_carlo_gen(GlmConfig(d=2, trials=2000, seed=1), 10)[0]
        shifted = glm.glm_monte_carlo_gen(GlmConfig(d=2, mu=(5.0, -3.0), trials=2000, seed=1), 10)[0]
        assert shifted == pytest.approx(base, abs=1e-10)

    def test_standard_error_rate(self):
        se1 = glm.glm_monte_carlo_gen(GlmConfig(trials=10_000, seed=2), 10)[1]
        se2 = glm.glm_monte_carlo_gen(GlmConfig(trials=20_000, seed=2), 10)[1]
        assert se1 / se2 == pytest.approx(math.sqrt(2), rel=0.1)

    def test_minimum_trials(self):
        with pytest.raises(ValueError):
            glm.glm_monte_carlo_gen(GlmConfig(), 10, trials=999)


class TestSweep:
    def test_csv_layout(self):
        cfg = GlmConfig(d=2, n_values=(2, 5), trials=1000)
        text = glm.sweep_to_csv(cfg, glm.glm_sweep(cfg, monte_carlo=False))
        lines = text.splitlines()
        assert lines[0] == glm.CSV_HEADER
        assert len(lines) == 3
        fields = lines[1].split(",")
        assert fields[:3] == ["2", "1.0", "2"]
        assert fields[4] == fields[5] == fields[9] == ""
        assert float(fields[3]) == glm.glm_exact_gen(cfg, 2)

    def test_workers_do_not_change_output(self):
        cfg = GlmConfig(n_values=(5, 10, 20), trials=1000, seed=4)
        one = glm.sweep_to_csv(cfg, glm.glm_sweep(cfg, workers=1))
        many = glm.sweep_to_csv(cfg, glm.glm_sweep(cfg, workers=3))
        assert one == many

    def test_n_one_point(self):
        point = glm.glm_point(GlmConfig(), 1, monte_carlo=False)
        assert point.gen_exact is None and point.bound_ismi is None
