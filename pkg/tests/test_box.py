import math

import numpy as np
import pytest

from sincmap.box import (VARIANT_DECAY, BoxProblem, Variant, _axis, box_expectation_reduced,
                         box_expectation_tensor, erf_value, lower_incomplete_gamma_sum,
                         scaled_lower_gamma)

TABLE = {
    2: 0.48499938727299484128,
    3: 0.39822045268832304659,
    4: 0.33843808769484390404,
    5: 0.29379808187600761424,
}


def erf_series(u, terms=60):
    return 2 / math.sqrt(math.pi) * math.fsum(
        (-1) ** k * u ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1)) for k in range(terms))


class TestErf:
    def test_examples(self):
        assert erf_value(0.0) == 0.0
        assert abs(erf_value(10.0) - 1.0) <= 1e-15
        assert erf_value(1.0) == pytest.approx(0.84270079294971, abs=1e-14)

    @pytest.mark.parametrize("u", [0.1, 0.5, 1.0, 1.7, 2.5])
    def test_against_series(self, u):
        assert erf_value(u) == pytest.approx(erf_series(u), rel=1e-15)

    def test_vectorized(self):
        u = np.array([0.1, 1.0, 3.0])
        assert np.allclose(erf_value(u), [erf_value(v) for v in u], rtol=1e-15, atol=0)


class TestGamma:
    def test_order_one(self):
        for a in (0.1, 1.0, 7.0):
            assert lower_incomplete_gamma_sum(1, a) == pytest.approx(1 - math.exp(-a), rel=1e-15)

    def test_order_two_at_one(self):
        assert lower_incomplete_gamma_sum(2, 1.0) == pytest.approx(1 - 2 / math.e, rel=1e-14)

    def test_large_argument_limit(self):
        for m in (1, 3, 6):
            assert lower_incomplete_gamma_sum(m, 200.0) == math.factorial(m - 1)

    def test_range(self):
        with pytest.raises(OverflowError):
            lower_incomplete_gamma_sum(21, 1.0)

    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    def test_scaled_form_agrees(self, m):
        a = np.array([0.5, 1.0, 1.9, 4.0, 40.0, 80.0])
        ref = np.array([lower_incomplete_gamma_sum(m, v) / v ** m for v in a])
        assert np.allclose(scaled_lower_gamma(m, a), ref, rtol=1e-12)

    def test_scaled_form_small_argument(self):
        # gamma(m, a) / a^m -> 1/m, where the closed form cancels completely
        assert scaled_lower_gamma(4, 1e-9) == pytest.approx(0.25, rel=1e-8)


class TestReduced:
    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    def test_table_values(self, m):
        assert abs(box_expectation_reduced(BoxProblem(m)) - TABLE[m]) <= 1e-12

    def test_small_kappa_limit(self):
        assert abs(box_expectation_reduced(BoxProblem(3, 1e-6)) - 1.0) <= 1e-5

    def test_one_dimension(self):
        # int_0^1 e^{-x} dx
        assert box_expectation_reduced(BoxProblem(1)) == pytest.approx(1 - math.exp(-1), rel=1e-14)

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_decreasing_in_kappa(self, m):
        v = [box_expectation_reduced(BoxProblem(m, k)) for k in (0.5, 1.0, 2.0)]
        assert v[0] > v[1] > v[2]

    def test_decreasing_in_m(self):
        v = [box_expectation_reduced(BoxProblem(m)) for m in (1, 2, 3, 4, 5)]
        assert all(b < a for a, b in zip(v, v[1:]))

    def test_invalid_problem(self):
        with pytest.raises(ValueError):
            BoxProblem(0)
        with pytest.raises(ValueError):
            BoxProblem(2, -1.0)


class TestTensor:
    def test_first_map_is_quarter_pi(self):
        t = np.linspace(-2, 2, 5)
        x, _ = _axis(Variant.OPTIMIZED, 2, 1.0, np.array([math.atan(1.0)]))
        assert np.allclose(x.ravel(), np.tanh(math.pi / 4 * np.sinh(t)), rtol=1e-15)

    def test_two_dimensions(self):
        v = box_expectation_tensor(BoxProblem(2), 24)
        assert abs(v - TABLE[2]) <= 1e-10

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_cross_validation(self, m):
        v = box_expectation_tensor(BoxProblem(m), 32)
        assert abs(v - TABLE[m]) / TABLE[m] <= 1e-9

    def test_optimized_beats_double_before_saturation(self):
        # at n <= 4 neither rule has reached its asymptotic regime
        p = BoxProblem(3)
        for n in (8, 12, 16, 20, 24):
            e_opt = abs(box_expectation_tensor(p, n, Variant.OPTIMIZED) - TABLE[3])
            e_dbl = abs(box_expectation_tensor(p, n, Variant.DOUBLE) - TABLE[3])
            if e_dbl > 1e-14:
                assert e_opt <= e_dbl

    def test_single_variant_converges(self):
        errs = [abs(box_expectation_tensor(BoxProblem(2), n, "single") - TABLE[2]) for n in (8, 32)]
        assert errs[1] < errs[0] < 1e-2

    def test_deterministic_under_workers(self):
        p = BoxProblem(4, 0.7)
        ref = box_expectation_tensor(p, 10)
        for w in (2, 4, 7):
            assert box_expectation_tensor(p, 10, workers=w) == ref

    def test_dimension_range(self):
        with pytest.raises(ValueError):
            box_expectation_tensor(BoxProblem(6), 4)
        with pytest.raises(ValueError):
            box_expectation_tensor(BoxProblem(1), 4)

    def test_step_parameters(self):
        assert VARIANT_DECAY[Variant.OPTIMIZED].beta == pytest.approx(math.pi / 8)
        assert VARIANT_DECAY[Variant.OPTIMIZED].d == pytest.approx(math.pi / 2)
