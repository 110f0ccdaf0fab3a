# src/ifs/ifs_core.py

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Tuple, Union

from src.numerics.precision import Arithmetic, float_arithmetic
from src.utils.error.error_handler import InvalidArgumentError
from src.utils.logger.log_helper import ifs_logger

Digit = Union[int, Fraction]


def parse_digit(value) -> Digit:
    """把用户输入的数字转成精确值: 整数保持 int, 其余转 Fraction"""
    if isinstance(value, bool):
        raise InvalidArgumentError(f"非法数字: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else value
    try:
        frac = Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidArgumentError(f"非法数字: {value!r}")
    return int(frac) if frac.denominator == 1 else frac


@dataclass(frozen=True)
class GaussIFS:
    """连分数迭代函数系统 θ_β(x) = 1/(x+β), β ∈ digits"""
    digits: Tuple[Digit, ...]      # 严格递增的数字集

    def __post_init__(self):
        if not self.digits:
            raise InvalidArgumentError("数字集不能为空")
        for d in self.digits:
            if d < 1:
                raise InvalidArgumentError(f"数字必须 >= 1, 收到 {d}")
        for left, right in zip(self.digits, self.digits[1:]):
            if not left < right:
                raise InvalidArgumentError(f"数字集必须严格递增: {self.label}")
        if len(self.digits) < 2:
            raise InvalidArgumentError(f"至少需要两个不同的数字: {self.label}")

    @classmethod
    def from_digits(cls, digits: Iterable) -> 'GaussIFS':
        parsed = sorted(parse_digit(d) for d in digits)
        return cls(tuple(parsed))

    @property
    def gamma(self) -> Digit:
        return self.digits[0]

    @property
    def Gamma(self) -> Digit:
        return self.digits[-1]

    @property
    def n(self) -> int:
        return len(self.digits)

    @property
    def is_integral(self) -> bool:
        return all(isinstance(d, int) for d in self.digits)

    @property
    def label(self) -> str:
        return "E[" + ",".join(str(d) for d in self.digits) + "]"

    def word_count(self, nu: int) -> int:
        return self.n ** nu

    def to_dict(self) -> dict:
        return {'digits': [str(d) for d in self.digits]}

    @classmethod
    def from_dict(cls, data: dict) -> 'GaussIFS':
        return cls.from_digits(data['digits'])


@dataclass(frozen=True)
class Word:
    """数字串 ω = (β₁, …, β_ν), 对应复合映射 θ_{β₁}∘…∘θ_{β_ν}"""
    betas: Tuple[Digit, ...]

    @property
    def nu(self) -> int:
        return len(self.betas)

    def __str__(self):
        return "(" + ",".join(str(b) for b in self.betas) + ")"


@dataclass(frozen=True)
class Continuants:
    """
    复合映射的连分数系数
    θ_ω(x) = (A_prev·x + A)/(B_prev·x + B)
    数字全为整数时为精确 int, 否则为精确 Fraction
    """
    A_prev: Digit    # A_{ν−1}
    A: Digit         # A_ν
    B_prev: Digit    # B_{ν−1}
    B: Digit         # B_ν

    def determinant(self) -> Digit:
        """字矩阵 [[A_prev, A], [B_prev, B]] 的行列式, 等于 (−1)^ν"""
        return self.A_prev * self.B - self.A * self.B_prev

    def extend(self, beta: Digit) -> 'Continuants':
        """在字末尾追加一个数字"""
        return Continuants(self.A, self.A_prev + beta * self.A,
                           self.B, self.B_prev + beta * self.B)

    def as_reals(self, arith: Arithmetic) -> Tuple:
        return (arith.real(self.A_prev), arith.real(self.A),
                arith.real(self.B_prev), arith.real(self.B))


# j = 0 之前的起点: (A_{-1}, A_0, B_{-1}, B_0) = (1, 0, 0, 1)
_SEED = Continuants(1, 0, 0, 1)


def word_coeffs(ifs: GaussIFS, word: Word) -> Continuants:
    """按递推 A_{j+1}=A_{j−1}+β_{j+1}A_j, B_{j+1}=B_{j−1}+β_{j+1}B_j 计算系数"""
    if word.nu == 0:
        raise InvalidArgumentError("字不能为空")
    allowed = set(ifs.digits)
    coeffs = _SEED
    for beta in word.betas:
        if beta not in allowed:
            raise InvalidArgumentError(f"数字 {beta} 不属于 {ifs.label}")
        coeffs = coeffs.extend(beta)
    return coeffs


def words(ifs: GaussIFS, nu: int) -> Iterator[Word]:
    """按 (β₁,…,β_ν) 字典序枚举 Ω_ν"""
    if nu < 1:
        raise InvalidArgumentError(f"ν 必须 >= 1, 收到 {nu}")
    for betas in itertools.product(ifs.digits, repeat=nu):
        yield Word(betas)


def word_table(ifs: GaussIFS, nu: int) -> List[Tuple[Word, Continuants]]:
    """
    Ω_ν 全部字及其系数, 字典序

    逐层扩展前缀, 每个字只做一次递推。
    """
    if nu < 1:
        raise InvalidArgumentError(f"ν 必须 >= 1, 收到 {nu}")
    level: List[Tuple[Tuple[Digit, ...], Continuants]] = [((), _SEED)]
    for _ in range(nu):
        level = [(prefix + (beta,), coeffs.extend(beta))
                 for prefix, coeffs in level for beta in ifs.digits]
    if len(level) > 100000:
        ifs_logger.warning(f"{ifs.label} 在 ν={nu} 时共有 {len(level)} 个字, 组装会很慢")
    return [(Word(betas), coeffs) for betas, coeffs in level]


def theta_omega(coeffs: Continuants, x, arith: Optional[Arithmetic] = None):
    """θ_ω(x) = (A_prev·x + A)/(B_prev·x + B)"""
    arith = arith or float_arithmetic()
    ap, a, bp, b = coeffs.as_reals(arith)
    return (ap * x + a) / (bp * x + b)


def weight(coeffs: Continuants, x, s, arith: Optional[Arithmetic] = None):
    """|θ′_ω(x)|^s = exp(−2s·ln(B_prev·x + B))"""
    arith = arith or float_arithmetic()
    s = arith.real(s)
    if s == 0:
        return arith.one
    bp, b = arith.real(coeffs.B_prev), arith.real(coeffs.B)
    return arith.exp(-2 * s * arith.ln(bp * x + b))


def compose_literal(ifs: GaussIFS, word: Word, x, arith: Optional[Arithmetic] = None):
    """逐个映射直接复合, 作为系数公式的对照"""
    arith = arith or float_arithmetic()
    y = x
    for beta in reversed(word.betas):
        y = arith.one / (y + arith.real(beta))
    return y


def tilde_B(gamma: Digit, j: int) -> Digit:
    """B̃₀=1, B̃₁=γ, B̃_{j+1}=B̃_{j−1}+γB̃_j (精确计算)"""
    if j < 0:
        raise InvalidArgumentError(f"j 必须 >= 0, 收到 {j}")
    prev, cur = 1, gamma
    if j == 0:
        return prev
    for _ in range(j - 1):
        prev, cur = cur, prev + gamma * cur
    return cur


def tilde_B_closed_form(gamma: Digit, j: int, arith: Optional[Arithmetic] = None):
    """c₁λ₊^j + c₂λ₋^j, λ± = γ/2 ± √(γ²+4)/2"""
    if j < 0:
        raise InvalidArgumentError(f"j 必须 >= 0, 收到 {j}")
    arith = arith or float_arithmetic()
    g = arith.real(gamma)
    root = arith.sqrt(g * g + 4)
    lam_plus = (g + root) / 2
    lam_minus = (g - root) / 2
    c1 = lam_plus / root
    c2 = -lam_minus / root
    return c1 * lam_plus ** j + c2 * lam_minus ** j


def contraction_bound(ifs: GaussIFS, nu: int, a_left, arith: Optional[Arithmetic] = None):
    """c(ν) = (B̃_{ν−1}·a_left + B̃_ν)^{−2}, Ω_ν 上所有 θ_ω 的一致 Lipschitz 常数"""
    if nu < 1:
        raise InvalidArgumentError(f"ν 必须 >= 1, 收到 {nu}")
    arith = arith or float_arithmetic()
    base = (arith.real(tilde_B(ifs.gamma, nu - 1)) * a_left
            + arith.real(tilde_B(ifs.gamma, nu)))
    return arith.one / (base * base)


def log_lipschitz_bound(ifs: GaussIFS, nu: int, a_left, b_seq_nu,
                        arith: Optional[Arithmetic] = None):
    """M₀(ν) = 2/(a_left + b_ν^{−1})"""
    if nu < 1:
        raise InvalidArgumentError(f"ν 必须 >= 1, 收到 {nu}")
    arith = arith or float_arithmetic()
    return 2 / (a_left + arith.one / b_seq_nu)
