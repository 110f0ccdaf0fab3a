# src/solver/dimension_solver.py

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.certify.certificate import CertificateOptions, HypothesisCertificate, build_certificate
from src.domain.invariant_interval import InvariantInterval, invariant_interval
from src.domain.mesh import DEFAULT_MU_CAP, Mesh, build_mesh, build_subintervals
from src.ifs.ifs_core import GaussIFS
from src.numerics.precision import Arithmetic, float_arithmetic
from src.transfer.cone import RhoEnclosure, certified_rho, power_iterate
from src.transfer.matrix import TransferStencil
from src.utils.error.error_handler import (
    BracketError,
    ConvergenceError,
    DimensionRangeError,
    InvalidArgumentError,
)
from src.utils.logger.log_helper import solver_logger

S_MAX = 1.5
# 粗二分的终止宽度
COARSE_WIDTH = 1e-3
MAX_SECANT_STEPS = 60
MAX_EXPANSIONS = 80


@dataclass
class SolverSettings:
    """求根与包围区间的参数"""
    verify: bool = True                 # False 时 H = 0, 结果标记为未认证
    tol: Optional[object] = None        # 求根容差, None 表示按预测宽度/100 自动选择
    s_max: float = S_MAX                # 搜索区间上端
    kappa2: Optional[object] = None     # 覆盖 κ₂
    max_iters: int = 500                # 幂迭代步数上限
    coarse_in_float: bool = True        # 高精度时粗二分阶段改用 float64


@dataclass
class SolverTrial:
    """一次试探 s 的记录"""
    s: object
    phase: str                          # coarse / secant / expand_upper / refine_lower ...
    lambda_hat: object
    rho_lo: Optional[object] = None
    rho_hi: Optional[object] = None
    H: Optional[object] = None
    accepted: Optional[bool] = None

    def to_dict(self, arith: Arithmetic) -> dict:
        def fmt(x):
            return None if x is None else arith.to_str(x)
        return {
            's': fmt(self.s),
            'phase': self.phase,
            'lambda_hat': fmt(self.lambda_hat),
            'rho_lo': fmt(self.rho_lo),
            'rho_hi': fmt(self.rho_hi),
            'H': fmt(self.H),
            'accepted': self.accepted,
        }


@dataclass
class RootResult:
    s_mid: object
    phi: object             # φ(s_mid)
    slope: object           # φ′ 的割线估计
    tol: object             # 使用的求根容差


@dataclass
class DimensionBracket:
    """Hausdorff 维数的包围区间 [s_l, s_u]"""
    s_l: object
    s_u: object
    s_mid: object
    H: object                           # 两端 H_{r+1} 的较大者
    h: object
    r: int
    nu: int
    rho_at_sl: Tuple                    # (lo, hi)
    rho_at_su: Tuple
    lambda_at_sl: Tuple                 # 由 ρ 换算的 λ_s 界
    lambda_at_su: Tuple
    verified: bool
    digits_guaranteed: int
    reasons: List[str] = field(default_factory=list)

    @property
    def width(self):
        return self.s_u - self.s_l

    def to_dict(self, arith: Arithmetic) -> dict:
        to_str = arith.to_str
        return {
            's_l': to_str(self.s_l),
            's_u': to_str(self.s_u),
            's_mid': to_str(self.s_mid),
            'width': to_str(self.width),
            'H': to_str(self.H),
            'h': to_str(self.h),
            'r': self.r,
            'nu': self.nu,
            'rho_at_sl': [to_str(x) for x in self.rho_at_sl],
            'rho_at_su': [to_str(x) for x in self.rho_at_su],
            'lambda_at_sl': [to_str(x) for x in self.lambda_at_sl],
            'lambda_at_su': [to_str(x) for x in self.lambda_at_su],
            'verified': self.verified,
            'digits_guaranteed': self.digits_guaranteed,
            'reasons': list(self.reasons),
        }


def lambda_bounds(enclosure: RhoEnclosure, H, h, r: int, nu: int, arith: Arithmetic) -> Tuple:
    """[(1+Hh^r)^{−1}ρ_lo]^{1/ν} <= λ_s <= [(1−Hh^r)^{−1}ρ_hi]^{1/ν}"""
    eps = H * h ** r
    lo = enclosure.lo / (1 + eps)
    hi = enclosure.hi / (1 - eps)
    if nu == 1:
        return lo, hi
    inv_nu = arith.one / nu
    return arith.power(lo, inv_nu), arith.power(hi, inv_nu)


def solver_tol_floor(arith: Arithmetic):
    """求根容差下限"""
    if arith.native:
        return arith.real("1e-12")
    return arith.real(10) ** (-(arith.dps - 8))


class DimensionProblem:
    """
    固定 (ℬ, r, h, ν, ν′) 的维数问题

    网格和组装模板只建一次; 不同 s 只重算权重。
    证书和 ρ 包围按 s 缓存。
    """

    def __init__(self, ifs: GaussIFS, inv: InvariantInterval, mesh: Mesh, nu: int,
                 settings: Optional[SolverSettings] = None, nu_prime: int = 0,
                 mu_cap=DEFAULT_MU_CAP):
        if nu < 1:
            raise InvalidArgumentError(f"ν 必须 >= 1, 收到 {nu}")
        self.ifs = ifs
        self.inv = inv
        self.mesh = mesh
        self.nu = nu
        self.nu_prime = nu_prime
        self.mu_cap = mu_cap
        self.arith = mesh.arith
        self.settings = settings or SolverSettings()
        self.stencil = TransferStencil(ifs, mesh, nu)
        self.trials: List[SolverTrial] = []
        self._certificates: Dict[str, HypothesisCertificate] = {}
        self._enclosures: Dict[str, RhoEnclosure] = {}
        self._last_w = None
        self._shadow: Optional['DimensionProblem'] = None

    @classmethod
    def build(cls, ifs: GaussIFS, r: int, h_target, nu: int, arith: Arithmetic,
              nu_prime: int = 0, mu_cap=DEFAULT_MU_CAP,
              settings: Optional[SolverSettings] = None) -> 'DimensionProblem':
        inv = invariant_interval(ifs, arith, depth=nu)
        subintervals = build_subintervals(ifs, nu_prime, inv, mu_cap, h_target, r, arith)
        mesh = build_mesh(subintervals, r, h_target, arith)
        return cls(ifs, inv, mesh, nu, settings, nu_prime, mu_cap)

    # ---- 单点求值 ----

    def _key(self, s) -> str:
        return self.arith.to_str(s)

    def certificate(self, s) -> HypothesisCertificate:
        key = self._key(s)
        if key not in self._certificates:
            options = CertificateOptions(kappa2=self.settings.kappa2)
            self._certificates[key] = build_certificate(self.ifs, self.mesh, self.inv, s,
                                                        self.nu, options)
        return self._certificates[key]

    def H_at(self, s):
        """条件中使用的 H; 启发式模式为 0"""
        if not self.settings.verify:
            return self.arith.zero
        return self.certificate(s).H

    def lambda_hat(self, s, tol=None):
        """ρ(𝐋_{s,ν}) 的幂迭代点估计"""
        mat = self.stencil.assemble(s)
        start = self._last_w if self._last_w is not None else None
        try:
            result = power_iterate(mat, None, tol or self._power_tol(), self.settings.max_iters,
                                   start)
        except ConvergenceError as e:
            solver_logger.error(f"s={float(s):.10f} 幂迭代失败: {e.message}")
            raise
        self._last_w = result.w
        return result.lambda_hat

    def enclosure(self, s) -> RhoEnclosure:
        key = self._key(s)
        if key not in self._enclosures:
            mat = self.stencil.assemble(s)
            M = None
            if self.settings.verify:
                M = self.certificate(s).M
            self._enclosures[key] = certified_rho(mat, M, self._power_tol(),
                                                  self.settings.max_iters, self._last_w)
            self._last_w = self._enclosures[key].w
        return self._enclosures[key]

    def phi(self, s):
        """φ(s) = λ̂^{1/ν} − 1"""
        lam = self.lambda_hat(s)
        if self.nu == 1:
            return lam - 1
        return self.arith.power(lam, self.arith.one / self.nu) - 1

    def _power_tol(self):
        tol = self.settings.tol if self.settings.tol is not None else solver_tol_floor(self.arith)
        return max(self.arith.real(tol) / 100, 1024 * self.arith.eps)

    def shadow(self) -> 'DimensionProblem':
        """同一配置的 float64 版本, 用于粗二分"""
        if self.arith.native or not self.settings.coarse_in_float:
            return self
        if self._shadow is None:
            settings = SolverSettings(verify=False, tol=None, s_max=self.settings.s_max,
                                      max_iters=self.settings.max_iters, coarse_in_float=False)
            self._shadow = DimensionProblem.build(self.ifs, self.mesh.r, float(self.mesh.h_target),
                                                  self.nu, float_arithmetic(), self.nu_prime,
                                                  self.mu_cap, settings)
        return self._shadow


def rho_root(problem: DimensionProblem) -> RootResult:
    """
    在 [0, s_max] 上求 φ(s) = 0: 先二分到宽度 1e-3, 再做带保护的割线迭代
    """
    arith = problem.arith
    s_max = arith.real(problem.settings.s_max)
    coarse = problem.shadow()
    c_arith = coarse.arith

    lo, hi = c_arith.zero, c_arith.real(problem.settings.s_max)
    phi_lo, phi_hi = coarse.phi(lo), coarse.phi(hi)
    problem.trials.append(SolverTrial(s=arith.real(str(lo)), phase="coarse",
                                      lambda_hat=arith.real(str(phi_lo + 1))))
    problem.trials.append(SolverTrial(s=arith.real(str(hi)), phase="coarse",
                                      lambda_hat=arith.real(str(phi_hi + 1))))
    if phi_lo < 0 or phi_hi > 0:
        raise DimensionRangeError(
            f"φ(0) = {float(phi_lo):.4e}, φ({float(hi)}) = {float(phi_hi):.4e}, 维数不在搜索区间内")

    while hi - lo > COARSE_WIDTH:
        mid = (lo + hi) / 2
        value = coarse.phi(mid)
        problem.trials.append(SolverTrial(s=arith.real(str(mid)), phase="coarse",
                                          lambda_hat=arith.real(str(value + 1))))
        if value > 0:
            lo, phi_lo = mid, value
        else:
            hi, phi_hi = mid, value

    # 回到工作精度
    a, b = arith.real(str(lo)), arith.real(str(hi))
    fa, fb = problem.phi(a), problem.phi(b)
    slope = (fb - fa) / (b - a)
    tol = _root_tolerance(problem, (a + b) / 2, slope)
    solver_logger.info(f"{problem.ifs.label} 粗二分得 [{float(a):.6f}, {float(b):.6f}], "
                       f"求根容差 {float(tol):.2e}")

    x0, f0, x1, f1 = a, fa, b, fb
    s_best, f_best = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    for _ in range(MAX_SECANT_STEPS):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not a < x2 < b:
            x2 = (a + b) / 2
        f2 = problem.phi(x2)
        problem.trials.append(SolverTrial(s=x2, phase="secant", lambda_hat=f2 + 1))
        if f2 > 0:
            a, fa = x2, f2
        else:
            b, fb = x2, f2
        if abs(f2) < abs(f_best):
            s_best, f_best = x2, f2
        if x2 != x1 and f2 != f1:
            slope = (f2 - f1) / (x2 - x1)
        step = abs(x2 - x1)
        x0, f0, x1, f1 = x1, f1, x2, f2
        if step < tol or b - a < tol or f2 == 0:
            break
    else:
        solver_logger.warning(f"割线迭代 {MAX_SECANT_STEPS} 步未达到容差 {float(tol):.2e}")

    if s_best > s_max:
        raise DimensionRangeError(f"根 {float(s_best)} 超出 {float(s_max)}")
    solver_logger.info(f"{problem.ifs.label} s_mid = {arith.to_str(s_best)}")
    return RootResult(s_mid=s_best, phi=f_best, slope=slope, tol=tol)


def _root_tolerance(problem: DimensionProblem, s, slope):
    """预测宽度/100, 不低于精度下限"""
    arith = problem.arith
    floor = solver_tol_floor(arith)
    if problem.settings.tol is not None:
        return max(arith.real(problem.settings.tol), floor)
    H = problem.H_at(s)
    eps = H * problem.mesh.h ** problem.mesh.r
    if eps == 0 or slope == 0:
        return floor
    predicted = 2 * eps / (problem.nu * abs(slope))
    return max(predicted / 100, floor)


def certify_bracket(problem: DimensionProblem, root: RootResult) -> DimensionBracket:
    """
    从 s_mid 向两侧倍增步长, 直到
    ρ_hi(s_u) < 1 − H(s_u)h^r 且 ρ_lo(s_l) > 1 + H(s_l)h^r,
    再向内二分到容差。每个试探点都用严格的 (α, β) 包围, 不用点估计。
    """
    arith = problem.arith
    h, r, nu = problem.mesh.h, problem.mesh.r, problem.nu
    s_mid = root.s_mid
    H_mid = problem.H_at(s_mid)
    slope = abs(root.slope) if root.slope != 0 else arith.one
    tol = root.tol
    delta0 = max(H_mid * h ** r / (nu * slope), 10 * tol)
    s_max = arith.real(problem.settings.s_max)

    def upper_ok(s) -> bool:
        enc = problem.enclosure(s)
        H = problem.H_at(s)
        ok = enc.hi < 1 - H * h ** r
        problem.trials.append(SolverTrial(s=s, phase="upper", lambda_hat=enc.lambda_hat,
                                          rho_lo=enc.lo, rho_hi=enc.hi, H=H, accepted=ok))
        return ok

    def lower_ok(s) -> bool:
        enc = problem.enclosure(s)
        H = problem.H_at(s)
        ok = enc.lo > 1 + H * h ** r
        problem.trials.append(SolverTrial(s=s, phase="lower", lambda_hat=enc.lambda_hat,
                                          rho_lo=enc.lo, rho_hi=enc.hi, H=H, accepted=ok))
        return ok

    s_u = _expand_and_refine(s_mid, delta0, +1, upper_ok, tol, arith.zero, s_max)
    s_l = _expand_and_refine(s_mid, delta0, -1, lower_ok, tol, arith.zero, s_max)

    enc_l, enc_u = problem.enclosure(s_l), problem.enclosure(s_u)
    H_l, H_u = problem.H_at(s_l), problem.H_at(s_u)
    reasons: List[str] = []
    verified = problem.settings.verify
    if not problem.settings.verify:
        reasons.append("verification disabled")
    else:
        for label, s in (("s_l", s_l), ("s_u", s_u)):
            cert = problem.certificate(s)
            if not cert.verified:
                verified = False
                reasons.append(f"certificate at {label} unverified: {'; '.join(cert.reasons)}")
        if enc_l.heuristic or enc_u.heuristic:
            verified = False
            reasons.append("eigenvector outside certified cone")

    width = s_u - s_l
    digits = arith.floor(-arith.log10(width)) if width > 0 else arith.dps
    bracket = DimensionBracket(
        s_l=s_l, s_u=s_u, s_mid=s_mid, H=max(H_l, H_u), h=h, r=r, nu=nu,
        rho_at_sl=(enc_l.lo, enc_l.hi), rho_at_su=(enc_u.lo, enc_u.hi),
        lambda_at_sl=lambda_bounds(enc_l, H_l, h, r, nu, arith),
        lambda_at_su=lambda_bounds(enc_u, H_u, h, r, nu, arith),
        verified=verified, digits_guaranteed=digits, reasons=reasons,
    )
    solver_logger.info(f"{problem.ifs.label} 包围区间 [{arith.to_str(s_l)}, {arith.to_str(s_u)}], "
                       f"可信位数 {digits}, {'已认证' if verified else '未认证'}")
    return bracket


def _expand_and_refine(s_mid, delta0, direction: int, accept, tol, s_min, s_max):
    """倍增步长找到满足条件的点, 再在 (s_mid, 该点] 内二分"""
    inner = s_mid
    delta = delta0
    for _ in range(MAX_EXPANSIONS):
        trial = s_mid + direction * delta
        if not s_min < trial <= s_max:
            raise BracketError(
                f"包围区间扩张越出 (0, {float(s_max)}]: H·h^r 过大, 请减小 h 或增大 r")
        if accept(trial):
            outer = trial
            break
        inner = trial
        delta *= 2
    else:
        raise BracketError(f"{MAX_EXPANSIONS} 次扩张后仍无法满足包围条件")

    while abs(outer - inner) > tol:
        mid = (inner + outer) / 2
        if accept(mid):
            outer = mid
        else:
            inner = mid
    return outer


def solve_dimension(problem: DimensionProblem) -> Tuple[RootResult, DimensionBracket]:
    """求根后认证包围区间"""
    root = rho_root(problem)
    bracket = certify_bracket(problem, root)
    return root, bracket
