# src/certify/constants.py
"""
先验常数

所有函数接收 Arithmetic, 在其工作精度下求值; 公式针对 θ_β(x) = 1/(x+β) 族。
"""

import math
from typing import Optional, Tuple

from src.domain.invariant_interval import InvariantInterval
from src.numerics.precision import Arithmetic
from src.utils.error.error_handler import CertificateError, InvalidArgumentError


def psi(r: int, arith: Arithmetic):
    """Lebesgue 常数上界 ψ(r) = (2/π)ln(r+1) + 3/4"""
    if r < 1:
        raise InvalidArgumentError(f"r 必须 >= 1, 收到 {r}")
    return 2 / arith.pi * arith.ln(arith.real(r + 1)) + arith.real(3) / 4


def eta(r: int, arith: Arithmetic):
    """η(r): 偶数 r 为 1/2, 奇数 r 为 (1 + tan(π/(2r+2)))/2"""
    if r < 1:
        raise InvalidArgumentError(f"r 必须 >= 1, 收到 {r}")
    if r % 2 == 0:
        return arith.real(1) / 2
    return (1 + arith.tan(arith.pi / (2 * r + 2))) / 2


def node_poly_max(r: int, arith: Arithmetic):
    """max |Π_k (x̂ − ĉ_k)| on [−1, 1] = 2^{−r}·sec^{r+1}(π/(2r+2))"""
    if r < 2:
        raise InvalidArgumentError(f"r 必须 >= 2, 收到 {r}")
    sec = 1 / arith.cos(arith.pi / (2 * r + 2))
    return sec ** (r + 1) / arith.real(2) ** r


def interpolation_error_constant(r: int, arith: Arithmetic):
    """m_{r+1} = node_poly_max(r) / (2^{r+1}(r+1)!)"""
    return node_poly_max(r, arith) / (arith.real(2) ** (r + 1) * math.factorial(r + 1))


def chi(inv: InvariantInterval, gamma, k: Optional[int] = None, arith: Optional[Arithmetic] = None):
    """χ = a_k + b_∞^{−1}; k 为 None 时取 k = ∞, 即 2a_∞ + γ"""
    arith = arith or inv.arith
    a_k = inv.a_inf if k is None else inv.a_at(k)
    return a_k + arith.one / inv.b_inf


def E_bound(s, p: int, chi_value, arith: Arithmetic):
    """E(s, p) = (2s)(2s+1)⋯(2s+p−1)/χ^p"""
    if p < 1:
        raise InvalidArgumentError(f"p 必须 >= 1, 收到 {p}")
    s = arith.real(s) if isinstance(s, (int, float, str)) else s
    product = arith.one
    for j in range(p):
        product *= 2 * s + j
    return product / chi_value ** p


def _G_scaled(s, r: int, h, chi_value, arith: Arithmetic, skip_leading: bool):
    """G_{r+1} 的乘积形式; skip_leading 时去掉首因子 2s"""
    product = arith.one
    for j in range(1 if skip_leading else 0, r + 1):
        product *= 2 * s + j
    evens = arith.one
    for j in range(1, r + 2):
        evens *= 2 * j
    two_cos = 2 * arith.cos(arith.pi / (2 * r + 2))
    return (2 * arith.exp(2 * s * h / chi_value) * product / evens
            / chi_value ** (r + 1) / two_cos ** (r + 1))


def G_bound(s, r: int, h, chi_value, arith: Arithmetic):
    """
    G_{r+1} = 2·exp(2sh/χ)·[(2s)(2s+1)⋯(2s+r)/((2)(4)⋯(2r+2))]·χ^{−(r+1)}·(2cos(π/(2r+2)))^{−(r+1)}
    """
    if r < 2:
        raise InvalidArgumentError(f"r 必须 >= 2, 收到 {r}")
    return _G_scaled(s, r, h, chi_value, arith, skip_leading=False)


def G_bound_factorial(s, r: int, h, chi_value, arith: Arithmetic):
    """同一常数的阶乘形式 E(s, r+1)·exp(2sh/χ)·(1/(r+1)!)·(2cos(π/(2r+2)))^{−(r+1)}·2^{−r}"""
    two_cos = 2 * arith.cos(arith.pi / (2 * r + 2))
    return (E_bound(s, r + 1, chi_value, arith) * arith.exp(2 * s * h / chi_value)
            / math.factorial(r + 1) / two_cos ** (r + 1) / arith.real(2) ** r)


def G3_closed(s, h, chi_value, arith: Arithmetic):
    """G₃ = 2s[1/(χ√3)]³·[(2s+1)/4]·[(s+1)/3]·exp(2sh/χ)"""
    base = 1 / (chi_value * arith.sqrt(arith.real(3)))
    return (2 * s * base ** 3 * (2 * s + 1) / 4 * (s + 1) / 3
            * arith.exp(2 * s * h / chi_value))


def G4_closed(s, h, chi_value, arith: Arithmetic):
    """G₄ = 2s(2s+1)(s+1)(2s+3)·exp(2sh/χ)/(96·χ⁴·(2+√2)²)"""
    root_term = 2 + arith.sqrt(arith.real(2))
    return (2 * s * (2 * s + 1) * (s + 1) * (2 * s + 3) * arith.exp(2 * s * h / chi_value)
            / (96 * chi_value ** 4 * root_term ** 2))


def D_H_bounds(G, r: int, mu, chi_value, s, arith: Arithmetic, h=None) -> Tuple:
    """
    D_{r+1} = G_{r+1}/sin²(π/(2r+2)), H_{r+1} = μ·D_{r+1}·χ/(2s)
    s = 0 时 H 取消去 2s 后的形式, 需要给出 h
    """
    sin_sq = arith.sin(arith.pi / (2 * r + 2)) ** 2
    D = G / sin_sq
    if s == 0:
        if h is None:
            raise InvalidArgumentError("s = 0 时计算 H 需要 h")
        reduced = _G_scaled(s, r, h, chi_value, arith, skip_leading=True)
        return D, mu * reduced / sin_sq * chi_value
    return D, mu * D * chi_value / (2 * s)


def M1_M2(s, chi_value, mu, G, H, h, r: int, arith: Arithmetic) -> Tuple:
    """
    M₁ = μD h^r/(1−G²h^{2r+2}) + 2s/χ
    M₂ = (2s/χ)[1 + H h^r/(1−G²h^{2r+2}) + (1 − h²(2s/(μχ))sin²(π/(2r+2)))^{−1}]
    """
    sin_sq = arith.sin(arith.pi / (2 * r + 2)) ** 2
    D = G / sin_sq
    denom = 1 - G * G * h ** (2 * r + 2)
    last = 1 - h * h * (2 * s / (mu * chi_value)) * sin_sq
    if not denom > 0 or not last > 0:
        raise CertificateError(f"h = {float(h):.3e} 过大, M₁/M₂ 的分母非正")
    base = 2 * s / chi_value
    M1 = mu * D * h ** r / denom + base
    M2 = base * (1 + H * h ** r / denom + 1 / last)
    return M1, M2


def M2_simplified_bound(s, chi_value, H, h, r: int, arith: Arithmetic):
    """(2s/χ)[2 + Hh^r(1 + h^{2r+2}) + h²]"""
    return 2 * s / chi_value * (2 + H * h ** r * (1 + h ** (2 * r + 2)) + h * h)


def G_chain_bound(s, r: int, h, chi_value, arith: Arithmetic):
    """G_{r+2} <= [3/(4√(2+√2))·(1/χ)]^{r−1}·G₃"""
    ratio = 3 / (4 * arith.sqrt(2 + arith.sqrt(arith.real(2)))) / chi_value
    return ratio ** (r - 1) * G3_closed(s, h, chi_value, arith)


def D_chain_bound(s, r: int, h, chi_value, arith: Arithmetic):
    """D_{r+2} <= (3/(4χ))^{r−1}·D₃, D₃ = 4G₃"""
    return (3 / (4 * chi_value)) ** (r - 1) * 4 * G3_closed(s, h, chi_value, arith)


def H_chain_bound(s, r: int, h, chi_value, mu, arith: Arithmetic):
    """H_{r+1} <= μ(χ/2s)(3/(4χ))^{r−2}·4G₃"""
    if r < 2:
        raise InvalidArgumentError(f"r 必须 >= 2, 收到 {r}")
    return mu * chi_value / (2 * s) * D_chain_bound(s, r - 1, h, chi_value, arith)


def kappa1_value(c_nu, r: int, arith: Arithmetic):
    """κ₁ = c(ν)·2η(r)r²ψ(r)"""
    return c_nu * 2 * eta(r, arith) * r * r * psi(r, arith)


def interpolant_log_lipschitz(M, h, r: int, arith: Arithmetic):
    """C = [2η(r)r²ψ(r)]·e^u·M/(1 − ψ(r)u e^u), u = Mη(r)h"""
    e = eta(r, arith)
    p = psi(r, arith)
    u = M * e * h
    eu = arith.exp(u)
    denom = 1 - p * u * eu
    if not denom > 0:
        raise CertificateError(f"ψ(r)·u·e^u = {float(p * u * eu):.4f} >= 1")
    return 2 * e * r * r * p * eu * M / denom
