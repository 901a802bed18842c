import math
import warnings

import numpy as np
import pytest

from sincmap.catalog import EX3_POLES, get_problem
from sincmap.errors import DomainError, MonotonicityError
from sincmap.optimizer import (HALF_PI, PreimageSet, SingularitySet, _collinear_target, _System,
                               beta2_of, check_monotone, constraint_residual, initial_guess,
                               optimize_map, preimages, quotient_objective, solve_parameter_problem)
from sincmap.transforms import OuterMap, SinhPolyMap

EX1_POLES = (-0.5 + 1j, 0.5 + 0.5j)


@pytest.fixture(scope="module")
def ex1_solution():
    return optimize_map(EX1_POLES, OuterMap.finite_tanh())


@pytest.fixture(scope="module")
def ex3_solution():
    return optimize_map(EX3_POLES, OuterMap.semi_inf_log())


class TestPreimages:
    def test_single_pair(self):
        p = preimages([0.5 + 0.5j], OuterMap.finite_tanh(0, 1))
        assert p.points[0] == pytest.approx(0.25j * math.pi, abs=1e-15)

    def test_sorted_by_real_part(self):
        p = preimages(reversed(EX1_POLES), OuterMap.finite_tanh())
        re = [z.real for z in p.points]
        assert re == sorted(re)
        expected = sorted((np.arctanh(complex(z)) for z in EX1_POLES), key=lambda z: z.real)
        assert np.allclose(p.array, expected, rtol=1e-15)

    def test_conjugate_input_gives_upper_member(self):
        p = preimages([2 + 0.5j], OuterMap.semi_inf_exp())
        assert p.points[0].imag > 0

    def test_ties_are_perturbed(self):
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            p = preimages([0.3j, 0.5j], OuterMap.infinite_sinh())
        assert w and p.points[1].real - p.points[0].real == pytest.approx(1e-9, rel=1e-6)

    def test_real_singularity_rejected(self):
        with pytest.raises(DomainError):
            SingularitySet((0.5 + 0j,))

    def test_unsorted_preimages_rejected(self):
        with pytest.raises(ValueError):
            PreimageSet((1 + 0.1j, 0 + 0.1j))


class TestInitialGuess:
    def test_single_point_is_quarter_pi_map(self):
        g = initial_guess(PreimageSet((0.25j * math.pi,)))
        assert g.map.u0 == pytest.approx(math.pi / 4, abs=1e-15)
        assert g.map.u == (0.0,)
        assert g.map.abscissas == (0.0,)

    def test_collinear_case(self):
        g = initial_guess(PreimageSet((1 - 1e-12 + 0.3j, 1 + 0.2j)))
        assert g.map.u0 == 0.2
        assert g.map.u[0] == 1.0

    def test_exact_for_collinear_target(self):
        pre = preimages(EX3_POLES, OuterMap.semi_inf_log())
        g = initial_guess(pre)
        w0 = _collinear_target(pre.array)
        v = np.concatenate([[g.map.u0], g.map.u, g.map.abscissas])
        assert np.max(np.abs(_System(w0).residual(v))) <= 1e-15


class TestSolve:
    def test_single_pair_exact(self):
        sol = optimize_map([0.5 + 0.5j], OuterMap.finite_tanh(0, 1))
        assert abs(sol.map.u0 - math.pi / 4) <= 1e-8
        assert sol.map.abscissas == (0.0,)

    def test_example1_map(self, ex1_solution):
        got = ex1_solution.map.coefficients
        assert np.allclose(got, (0.13912, 0.19081, 0.21938), atol=1e-3)

    def test_example3_map(self, ex3_solution):
        got = ex3_solution.map.coefficients
        assert np.allclose(got, (0.26725, 0.30707, 0.20337, -0.031966), atol=1e-3)

    @pytest.mark.parametrize("name", ["ex1", "ex2", "ex3", "ex4", "ex5"])
    def test_constraints_and_objective(self, name):
        p = get_problem(name)
        sol = p.optimized_map()
        target = preimages(p.singularities, p.outer).array
        assert sol.constraint_residual <= 1e-10
        assert constraint_residual(sol.map, target) <= 1e-10
        assert sol.objective == sol.map.u0
        q = quotient_objective(sol.map.u, sol.map.abscissas, target)
        assert abs(q - sol.map.u0) <= 1e-10
        n = len(target)
        if n >= 2:
            x = sol.map.abscissas
            assert abs(x[0] + x[-1]) <= 20.0
        check_monotone(sol.map, -10, 10)

    def test_collinear_exactness(self):
        pre = PreimageSet((-1e-12 + 0.5j, 0.3j, 1e-12 + 0.8j))
        sol = solve_parameter_problem(pre)
        assert sol.constraint_residual <= 1e-10
        assert all(abs(u) <= 1e-10 for u in sol.map.u[1:])
        assert sol.map.u0 == pytest.approx(0.3, abs=1e-10)

    def test_example2_reference_map(self):
        p = get_problem("ex2")
        sol = p.optimized_map()
        assert sol.map.u0 > 0
        assert len(sol.map.u) == 4

    def test_to_json_keys(self, ex1_solution):
        d = ex1_solution.to_json()
        assert set(d) == {"u0", "u", "x", "residual"}
        assert len(d["u"]) == len(d["x"]) == 2

    def test_monotonicity_guard(self):
        with pytest.raises(MonotonicityError):
            check_monotone(SinhPolyMap(1e-6, (0.0, 1.0, 0.0, -1.0)))

    def test_xbar_must_be_positive(self):
        with pytest.raises(ValueError):
            solve_parameter_problem(PreimageSet((0.25j * math.pi,)), xbar=0)

    def test_strip_points_hit_targets(self, ex1_solution):
        m = ex1_solution.map
        target = preimages(EX1_POLES, OuterMap.finite_tanh()).array
        z = np.array(m.abscissas) + 1j * HALF_PI
        assert np.allclose(m(z), target, atol=1e-10)


class TestBeta2:
    def test_finite_is_half(self):
        assert beta2_of(SinhPolyMap(0.13912), OuterMap.finite_tanh()) == pytest.approx(0.06956)

    def test_semi_log(self):
        assert beta2_of(SinhPolyMap(0.26725), OuterMap.semi_inf_log()) == 0.26725

    def test_semi_exp(self):
        assert beta2_of(SinhPolyMap(9.4353e-3), OuterMap.semi_inf_exp()) == 9.4353e-3
