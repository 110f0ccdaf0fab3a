# tests/unit/test_dimension_solver.py

import pytest

from src.numerics.precision import Arithmetic
from src.solver.dimension_solver import (
    DimensionProblem,
    SolverSettings,
    lambda_bounds,
    solve_dimension,
    solver_tol_floor,
)
from src.transfer.cone import RhoEnclosure
from src.utils.error.error_handler import DimensionRangeError, InvalidArgumentError

DIM_E12 = 0.5312805062772051416


def _problem(ifs, arith, nu=2, verify=False, **kwargs):
    settings = SolverSettings(verify=verify, **kwargs)
    return DimensionProblem.build(ifs, 6, 0.02, nu, arith, settings=settings)


def test_phi_is_decreasing(e12, float_arith):
    problem = _problem(e12, float_arith)
    values = [problem.phi(s) for s in (0.3, 0.5, 0.6, 0.8)]
    assert values == sorted(values, reverse=True)
    assert values[1] > 0 > values[2]


def test_unverified_solve(e12, float_arith):
    problem = _problem(e12, float_arith)
    root, bracket = solve_dimension(problem)
    assert root.s_mid == pytest.approx(DIM_E12, abs=1e-6)
    assert bracket.s_l <= bracket.s_mid <= bracket.s_u
    assert not bracket.verified
    assert bracket.reasons == ["verification disabled"]
    assert bracket.H == 0
    phases = {trial.phase for trial in problem.trials}
    assert {"coarse", "secant", "upper", "lower"} <= phases


def test_certificate_failure_is_reported(e12, float_arith):
    problem = _problem(e12, float_arith, verify=True)
    _, bracket = solve_dimension(problem)
    assert not bracket.verified
    assert any(reason.startswith("certificate at") for reason in bracket.reasons)
    assert any("kappa1 >= 1" in reason for reason in bracket.reasons)


def test_dimension_outside_search_range(e12, float_arith):
    problem = _problem(e12, float_arith, s_max=0.3)
    with pytest.raises(DimensionRangeError):
        solve_dimension(problem)


def test_invalid_nu(e12, float_arith, mesh_factory):
    inv, mesh = mesh_factory(e12, 4, 0.05, float_arith)
    with pytest.raises(InvalidArgumentError):
        DimensionProblem(e12, inv, mesh, 0)


def test_lambda_bounds(float_arith):
    enclosure = RhoEnclosure(lo=0.9, hi=1.1, lambda_hat=1.0, iterations=1, spread=0.0,
                             M=1.0, heuristic=False)
    lo, hi = lambda_bounds(enclosure, 1.0, 0.1, 2, 1, float_arith)
    assert lo == pytest.approx(0.9 / 1.01)
    assert hi == pytest.approx(1.1 / 0.99)
    lo2, hi2 = lambda_bounds(enclosure, 1.0, 0.1, 2, 2, float_arith)
    assert lo2 == pytest.approx(lo ** 0.5)
    assert hi2 == pytest.approx(hi ** 0.5)


def test_solver_tol_floor(float_arith):
    assert solver_tol_floor(float_arith) == pytest.approx(1e-12)
    assert float(solver_tol_floor(Arithmetic(34))) == pytest.approx(1e-26)


def test_enclosures_are_cached(e12, float_arith):
    problem = _problem(e12, float_arith)
    first = problem.enclosure(0.5)
    assert problem.enclosure(0.5) is first
    assert first.lo <= first.hi
    assert first.lo > 1
