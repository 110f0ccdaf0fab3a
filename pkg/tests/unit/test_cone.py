# tests/unit/test_cone.py

import math

import numpy as np
import pytest

from src.ifs.ifs_core import GaussIFS
from src.numerics.precision import Arithmetic
from src.transfer.cone import (
    certified_rho,
    cone_contains,
    cone_order_bounds,
    log_lipschitz_of,
    power_iterate,
)
from src.transfer.matrix import CollocationMatrix, assemble
from src.utils.error.error_handler import ConeBoundsError, ConvergenceError


class TestCone:
    def test_membership(self, float_arith):
        nodes = np.linspace(0.0, 1.0, 11)
        values = np.exp(2 * nodes)
        assert cone_contains(values, 2.0, nodes, float_arith)
        assert cone_contains(values, 3.0, nodes, float_arith)
        assert not cone_contains(values, 1.5, nodes, float_arith)
        assert cone_contains(np.zeros(11), 0.1, nodes, float_arith)
        assert not cone_contains(values - 1.5, 10.0, nodes, float_arith)
        assert not cone_contains(np.full(11, np.nan), 10.0, nodes, float_arith)

    def test_log_lipschitz(self, float_arith):
        nodes = np.linspace(0.2, 0.9, 15)
        assert log_lipschitz_of(np.exp(-2 * nodes), nodes, float_arith) == pytest.approx(2.0, rel=1e-12)
        assert log_lipschitz_of(np.ones(15), nodes, float_arith) == 0


class TestPowerIteration:
    def test_symmetric_matrix(self, float_arith):
        mat = CollocationMatrix.from_dense([[2, 1], [1, 2]], float_arith)
        result = power_iterate(mat)
        assert result.lambda_hat == pytest.approx(3.0, rel=1e-15)
        assert max(result.w) == 1.0

    def test_not_converged(self, float_arith):
        mat = CollocationMatrix.from_dense([[1, 1], [0, 1]], float_arith)
        with pytest.raises(ConvergenceError) as info:
            power_iterate(mat, max_iters=1)
        assert info.value.iterations == 1
        assert info.value.spread > 0


class TestEnclosure:
    def test_two_by_two(self, float_arith):
        mat = CollocationMatrix.from_dense([[2, 1], [1, 3]], float_arith)
        exact = (5 + math.sqrt(5)) / 2
        enclosure = certified_rho(mat)
        assert enclosure.lo <= exact <= enclosure.hi
        assert enclosure.width < 1e-10
        assert enclosure.heuristic
        golden = (1 + math.sqrt(5)) / 2
        assert enclosure.M == pytest.approx(2 * math.log(golden) + 1, rel=1e-8)

    def test_given_cone_parameter(self, float_arith):
        mat = CollocationMatrix.from_dense([[2, 1], [1, 3]], float_arith)
        enclosure = certified_rho(mat, M=1.0)
        assert not enclosure.heuristic
        assert enclosure.M == 1.0
        assert certified_rho(mat, M=0.1).heuristic

    def test_empty_feasible_set(self, float_arith):
        mat = CollocationMatrix.from_dense([[1, 0], [0, 2]], float_arith)
        with pytest.raises(ConeBoundsError):
            cone_order_bounds(mat, float_arith.array([1, 2]), 0.1)

    def test_to_dict(self, float_arith):
        mat = CollocationMatrix.from_dense([[2, 1], [1, 3]], float_arith)
        data = certified_rho(mat).to_dict(float_arith)
        assert set(data) == {'lo', 'hi', 'lambda_hat', 'iterations', 'M', 'heuristic_cone'}
        assert float(data['lo']) <= float(data['hi'])


@pytest.mark.parametrize("digits", [[1, 2], [2, 3], [1, 4, 7]])
@pytest.mark.parametrize("nu", [1, 2, 3])
def test_trivial_spectral_identity(digits, nu, mesh_factory):
    arith = Arithmetic(20)
    ifs = GaussIFS.from_digits(digits)
    _, mesh = mesh_factory(ifs, 4, 0.05, arith, depth=nu)
    enclosure = certified_rho(assemble(ifs, mesh, 0, nu))
    count = len(digits) ** nu
    assert enclosure.lo <= count <= enclosure.hi
    assert enclosure.width <= arith.real("1e-12")


def test_matches_dense_eigensolver(float_arith, mesh_factory):
    rng = np.random.default_rng(2024)
    sets = [[1, 2], [2, 3], [1, 3], [2, 5], [3, 4], [1, 4, 7], [1, 2, 3]]
    for _ in range(20):
        digits = sets[rng.integers(len(sets))]
        r = int(rng.integers(2, 6))
        h = float(rng.choice([0.05, 0.1]))
        nu = int(rng.integers(1, 3))
        s = float(rng.uniform(0.2, 1.2))
        ifs = GaussIFS.from_digits(digits)
        _, mesh = mesh_factory(ifs, r, h, float_arith, depth=nu)
        assert mesh.Q <= 200
        mat = assemble(ifs, mesh, s, nu)
        eigenvalues = np.linalg.eigvals(mat.entries)
        order = np.argsort(-np.abs(eigenvalues))
        top, second = eigenvalues[order[0]], eigenvalues[order[1]]
        assert abs(top.imag) < 1e-12 * abs(top)
        assert abs(second) < abs(top)
        enclosure = certified_rho(mat, tol=1e-13)
        assert enclosure.lambda_hat == pytest.approx(top.real, rel=1e-10)
        slack = 1e-12 * top.real
        assert enclosure.lo - slack <= top.real <= enclosure.hi + slack


def _bisect_edge(feasible, inside, outside, steps=200):
    """feasible(inside) 成立, feasible(outside) 不成立; 返回可行集边界"""
    for _ in range(steps):
        mid = (inside + outside) / 2
        if feasible(mid):
            inside = mid
        else:
            outside = mid
    return inside


def test_order_bounds_match_bisection(e12, float_arith, mesh_factory):
    _, mesh = mesh_factory(e12, 4, 0.05, float_arith, depth=2)
    mat = assemble(e12, mesh, 0.53, 2)
    nodes = mesh.nodes
    w = np.ones(mesh.Q)
    for _ in range(2):
        w = mat.matvec(w)
        w = w / w.max()
    u = mat.matvec(w)
    M = 3 * max(log_lipschitz_of(w, nodes, float_arith), log_lipschitz_of(u, nodes, float_arith)) + 1
    alpha, beta = cone_order_bounds(mat, w, M)

    ratios = u / w
    alpha_edge = _bisect_edge(lambda a: cone_contains(u - a * w, M, nodes, float_arith),
                              0.0, ratios.min() * (1 + 1e-9))
    top = 10 * ratios.max()
    assert cone_contains(top * w - u, M, nodes, float_arith)
    beta_edge = _bisect_edge(lambda b: cone_contains(b * w - u, M, nodes, float_arith),
                             top, ratios.max() * (1 - 1e-9))
    assert alpha <= beta
    assert alpha == pytest.approx(alpha_edge, rel=1e-8)
    assert beta == pytest.approx(beta_edge, rel=1e-8)
