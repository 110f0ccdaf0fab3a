# tests/conftest.py

import os

# 模块级记录器在导入时创建, 需先设置模式
os.environ.setdefault('LOG_MODE', 'off')

import pytest

from src.domain.invariant_interval import invariant_interval
from src.domain.mesh import build_mesh, build_subintervals
from src.ifs.ifs_core import GaussIFS
from src.numerics.precision import Arithmetic, float_arithmetic


@pytest.fixture
def float_arith():
    return float_arithmetic()


@pytest.fixture
def mp_arith():
    return Arithmetic(34)


@pytest.fixture
def e12():
    return GaussIFS.from_digits([1, 2])


@pytest.fixture
def e147():
    return GaussIFS.from_digits([1, 4, 7])


@pytest.fixture
def e1011():
    return GaussIFS.from_digits([10, 11])


def make_mesh(ifs, r, h, arith, nu_prime=0, depth=0):
    """(不变区间, 网格)"""
    inv = invariant_interval(ifs, arith, depth=depth)
    subintervals = build_subintervals(ifs, nu_prime, inv, 4, h, r, arith)
    return inv, build_mesh(subintervals, r, h, arith)


@pytest.fixture
def mesh_factory():
    return make_mesh


@pytest.fixture
def e147_mesh(e147, float_arith):
    """E[1,4,7], r=6, h=0.001, ν′=2"""
    return make_mesh(e147, 6, 0.001, float_arith, nu_prime=2, depth=6)
