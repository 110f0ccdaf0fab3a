# tests/unit/test_constants.py

import math

import numpy as np
import pytest

from src.certify.constants import (
    D_H_bounds,
    D_chain_bound,
    E_bound,
    G3_closed,
    G4_closed,
    G_bound,
    G_bound_factorial,
    G_chain_bound,
    H_chain_bound,
    M1_M2,
    M2_simplified_bound,
    chi,
    eta,
    interpolant_log_lipschitz,
    interpolation_error_constant,
    kappa1_value,
    node_poly_max,
    psi,
)
from src.domain.invariant_interval import invariant_interval
from src.utils.error.error_handler import CertificateError, InvalidArgumentError


def test_psi_and_eta(float_arith):
    assert psi(6, float_arith) == pytest.approx(2 / math.pi * math.log(7) + 0.75, rel=1e-15)
    assert psi(6, float_arith) == pytest.approx(1.9888049, abs=1e-6)
    assert eta(6, float_arith) == 0.5
    assert eta(3, float_arith) == pytest.approx((1 + math.tan(math.pi / 8)) / 2, rel=1e-15)
    with pytest.raises(InvalidArgumentError):
        psi(0, float_arith)


def test_E_bound(float_arith):
    assert E_bound(0.518, 7, 1.25, float_arith) == pytest.approx(1159.26, rel=1e-5)
    assert E_bound(0.5, 1, 1.0, float_arith) == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        E_bound(0.5, 0, 1.0, float_arith)


def test_G3_value(float_arith):
    assert G3_closed(0.5, 0.0, 1.0, float_arith) == pytest.approx(1 / (12 * math.sqrt(3)), rel=1e-14)


@pytest.mark.parametrize("s,h,chi_value", [(0.5, 0.0, 1.0), (0.518, 0.001, 1.2535663), (1.2, 0.01, 2.5)])
def test_closed_forms_agree_with_product(s, h, chi_value, mp_arith):
    s, h, chi_value = mp_arith.real(s), mp_arith.real(h), mp_arith.real(chi_value)
    tol = mp_arith.real("1e-30")
    assert abs(G_bound(s, 2, h, chi_value, mp_arith) - G3_closed(s, h, chi_value, mp_arith)) < tol
    assert abs(G_bound(s, 3, h, chi_value, mp_arith) - G4_closed(s, h, chi_value, mp_arith)) < tol
    for r in range(2, 11):
        product = G_bound(s, r, h, chi_value, mp_arith)
        factorial = G_bound_factorial(s, r, h, chi_value, mp_arith)
        assert abs(product - factorial) <= tol * product


def test_node_poly_max_matches_grid(float_arith):
    from src.domain.mesh import chebyshev_reference_nodes
    xs = np.linspace(-1.0, 1.0, 200001)
    for r in range(2, 11):
        nodes = chebyshev_reference_nodes(r, float_arith)
        values = np.ones_like(xs)
        for c in nodes:
            values *= xs - c
        sampled = np.max(np.abs(values))
        bound = node_poly_max(r, float_arith)
        assert sampled <= bound * (1 + 1e-12)
        assert sampled == pytest.approx(bound, rel=1e-6)


def test_D_H_at_zero_is_continuous(float_arith):
    r, h, mu, chi_value = 6, 0.001, 3.76, 1.2535663
    G0 = G_bound(0.0, r, h, chi_value, float_arith)
    D0, H0 = D_H_bounds(G0, r, mu, chi_value, 0.0, float_arith, h=h)
    assert D0 == 0
    s = 1e-9
    G = G_bound(s, r, h, chi_value, float_arith)
    _, H = D_H_bounds(G, r, mu, chi_value, s, float_arith)
    assert H == pytest.approx(H0, rel=1e-6)
    with pytest.raises(InvalidArgumentError):
        D_H_bounds(G0, r, mu, chi_value, 0.0, float_arith)


def test_H_chain_for_e147(e147_mesh, float_arith):
    inv, mesh = e147_mesh
    s, r, h = 0.518, 6, 0.001
    chi_value = chi(inv, 1, arith=float_arith)
    chain = H_chain_bound(s, r, h, chi_value, mesh.mu, float_arith)
    assert chain == pytest.approx(0.0608, abs=1e-3)
    G = G_bound(s, r, h, chi_value, float_arith)
    _, H = D_H_bounds(G, r, mesh.mu, chi_value, s, float_arith)
    assert 0 < H <= chain


def test_chi(e147, float_arith):
    inv = invariant_interval(e147, float_arith, depth=6)
    assert chi(inv, 1, arith=float_arith) == pytest.approx(2 * inv.a_inf + 1, rel=1e-14)
    assert chi(inv, 1, arith=float_arith) == pytest.approx(1.2535663, abs=1e-6)
    assert chi(inv, 1, k=0, arith=float_arith) == pytest.approx(1 / inv.b_inf, rel=1e-15)


def test_M1_M2(float_arith, mp_arith):
    r = 6
    s, h, mu, chi_value = (mp_arith.real(v) for v in ("0.518", "0.001", "3.76", "1.2535663"))
    G = G_bound(s, r, h, chi_value, mp_arith)
    _, H = D_H_bounds(G, r, mu, chi_value, s, mp_arith)
    M1, M2 = M1_M2(s, chi_value, mu, G, H, h, r, mp_arith)
    base = 2 * s / chi_value
    # 超出 2s/χ 的部分约为 μD·h^6, 低于 float64 的分辨率
    assert 0 < M1 - base < mp_arith.real("1e-15")
    assert M2 > base * 2
    assert M2 <= M2_simplified_bound(s, chi_value, H, h, r, mp_arith)
    G_big = G_bound(1.0, 2, 100.0, 1.0, float_arith)
    with pytest.raises(CertificateError):
        M1_M2(1.0, 1.0, 1.0, G_big, 1.0, 100.0, 2, float_arith)


def test_kappa1_and_interpolant(float_arith):
    assert kappa1_value(0.0050917, 6, float_arith) == pytest.approx(0.3646, abs=1e-3)
    C = interpolant_log_lipschitz(5.2, 0.001, 6, float_arith)
    assert C > 2 * 0.5 * 36 * psi(6, float_arith) * 5.2
    with pytest.raises(CertificateError):
        interpolant_log_lipschitz(1000.0, 1.0, 6, float_arith)


@pytest.mark.parametrize("s,chi_value", [("0.3", "1"), ("0.518", "1.2535663"), ("1", "1"), ("1", "2.5")])
def test_chain_bounds(s, chi_value, mp_arith):
    s, chi_value, h = mp_arith.real(s), mp_arith.real(chi_value), mp_arith.real("0.001")
    slack = 1 + mp_arith.real("1e-25")
    for r in range(2, 13):
        # G_bound(·, r+1) 即 G_{r+2}
        G = G_bound(s, r + 1, h, chi_value, mp_arith)
        assert G <= G_chain_bound(s, r, h, chi_value, mp_arith) * slack
        D, _ = D_H_bounds(G, r + 1, 1, chi_value, s, mp_arith)
        assert D <= D_chain_bound(s, r, h, chi_value, mp_arith) * slack
    assert G_chain_bound(s, 1, h, chi_value, mp_arith) == G3_closed(s, h, chi_value, mp_arith)


@pytest.mark.parametrize("s", ["0.05", "0.518", "1"])
def test_G_decreases_with_degree(s, mp_arith):
    s, h, chi_value = mp_arith.real(s), mp_arith.real("0.01"), mp_arith.real("1.1")
    values = [G_bound(s, r, h, chi_value, mp_arith) for r in range(2, 21)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_interpolation_error_constant(float_arith):
    from src.domain.mesh import chebyshev_reference_nodes
    from src.transfer.lagrange import ReferenceBasis

    # r = 2: (2/√3)³/4 / (2³·3!)
    assert interpolation_error_constant(2, float_arith) == pytest.approx(1 / (72 * math.sqrt(3)), rel=1e-14)
    width = 0.5
    for r in (2, 3, 4):
        basis = ReferenceBasis(chebyshev_reference_nodes(r, float_arith), float_arith)
        samples = [math.exp(width * (1 + c) / 2) for c in basis.nodes]
        worst = 0.0
        for xhat in np.linspace(-1.0, 1.0, 4001):
            interpolant = float(np.dot(basis.values(xhat), samples))
            worst = max(worst, abs(interpolant - math.exp(width * (1 + xhat) / 2)))
        # f^{(r+1)} = exp 在 [0, width] 上介于 1 与 e^width 之间
        m = interpolation_error_constant(r, float_arith)
        assert worst <= m * width ** (r + 1) * math.exp(width)
        assert worst >= 0.95 * m * width ** (r + 1)
