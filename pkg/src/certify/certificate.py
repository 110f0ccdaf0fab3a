# src/certify/certificate.py

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from src.certify.constants import (
    D_H_bounds,
    E_bound,
    G_bound,
    M1_M2,
    chi,
    eta,
    interpolant_log_lipschitz,
    kappa1_value,
    psi,
)
from src.domain.invariant_interval import InvariantInterval
from src.domain.mesh import Mesh
from src.ifs.ifs_core import GaussIFS, contraction_bound, log_lipschitz_bound
from src.numerics.precision import Arithmetic
from src.utils.error.error_handler import CertificateError, InvalidArgumentError
from src.utils.logger.log_helper import cert_logger

# κ₁ 超过此值时给出警告
KAPPA1_WARN = 0.8
S_MAX = 1.5
H_MAX = 0.2

CHECK_NAMES = (
    'cond_8_3', 'cond_8_4', 'cond_h1', 'M_gt_M2', 'h_le_02',
    's_range', 'chi_ge_1', 'gap_condition', 'cond_5_17n',
)

_REAL_FIELDS = (
    's', 'h', 'mu', 'chi', 'psi_r', 'eta_r', 'c_nu', 'M0_nu', 'kappa1', 'kappa2',
    'M', 'M_prime', 'E', 'G', 'D', 'H', 'M1', 'M2', 'u', 'C',
    'cond_8_3_value', 'cond_8_4_lhs', 'cond_8_4_rhs', 'cond_h1_lhs', 'cond_h1_rhs',
)


@dataclass
class CertificateOptions:
    """证书构造选项"""
    kappa2: Optional[object] = None     # 覆盖默认 κ₂ = (1+κ₁)/2
    chi_depth: Optional[int] = None     # χ = a_k + 1/b_∞ 中的 k, None 表示 ∞


@dataclass
class HypothesisCertificate:
    """先验常数及各项假设的检验结果"""
    s: object
    r: int
    nu: int
    h: object                       # 网格最大步长
    mu: object                      # h/h_min
    chi: object                     # a_k + 1/b_∞
    psi_r: object                   # ψ(r)
    eta_r: object                   # η(r)
    c_nu: object                    # c(ν)
    M0_nu: object                   # M₀(ν)
    kappa1: object
    kappa2: object
    kappa2_overridden: bool
    M: Optional[object]             # 锥参数, κ₁ >= 1 时为 None
    M_prime: Optional[object]       # κ₂·M
    E: object                       # E(s, r+1)
    G: object                       # G_{r+1}
    D: object                       # D_{r+1}
    H: object                       # H_{r+1}
    M1: Optional[object]
    M2: Optional[object]
    u: Optional[object]             # M·η(r)·h
    C: Optional[object]             # 插值 log-Lipschitz 常数
    cond_8_3_value: Optional[object] = None    # ψ(r)·u·e^u
    cond_8_4_lhs: Optional[object] = None      # κ₁e^u/(1−ψ(r)ue^u)
    cond_8_4_rhs: Optional[object] = None      # κ₂ − sM₀(ν)/M
    cond_h1_lhs: Optional[object] = None       # 2 + H(h^r + h^{2r+2}) + h²
    cond_h1_rhs: Optional[object] = None       # 2/(κ₂−κ₁)
    checks: Dict[str, bool] = field(default_factory=dict)
    reasons: List[str] = field(default_factory=list)
    verified: bool = False
    arith: Arithmetic = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        """扁平键值文档, 实数以十进制字符串保存"""
        to_str = self.arith.to_str
        data = {'r': self.r, 'nu': self.nu, 'kappa2_overridden': self.kappa2_overridden}
        for name in _REAL_FIELDS:
            value = getattr(self, name)
            data[name] = None if value is None else to_str(value)
        for name in CHECK_NAMES:
            data[name] = bool(self.checks.get(name, False))
        data['reasons'] = list(self.reasons)
        data['verified'] = self.verified
        return data

    @classmethod
    def from_dict(cls, data: dict, arith: Arithmetic) -> 'HypothesisCertificate':
        kwargs = {'r': int(data['r']), 'nu': int(data['nu']),
                  'kappa2_overridden': bool(data.get('kappa2_overridden', False))}
        for name in _REAL_FIELDS:
            value = data.get(name)
            kwargs[name] = None if value is None else arith.real(value)
        kwargs['checks'] = {name: bool(data.get(name, False)) for name in CHECK_NAMES}
        kwargs['reasons'] = list(data.get('reasons', []))
        kwargs['verified'] = bool(data.get('verified', False))
        return cls(arith=arith, **kwargs)


def build_certificate(ifs: GaussIFS, mesh: Mesh, inv: InvariantInterval, s, nu: int,
                      options: Optional[CertificateOptions] = None) -> HypothesisCertificate:
    """
    计算全部先验常数并逐项检验假设

    检验不通过时返回未认证的证书并附带原因, 不抛异常。
    """
    if nu < 1:
        raise InvalidArgumentError(f"ν 必须 >= 1, 收到 {nu}")
    options = options or CertificateOptions()
    arith = mesh.arith
    r = mesh.r
    h = mesh.h
    mu = mesh.mu
    s = arith.real(s) if isinstance(s, (int, float, str)) else s
    gamma = arith.real(ifs.gamma)
    reasons: List[str] = []
    checks: Dict[str, bool] = {}

    psi_r = psi(r, arith)
    eta_r = eta(r, arith)
    c_nu = contraction_bound(ifs, nu, inv.a_inf, arith)
    a_prev = inv.a_at(nu - 1)
    M0_nu = log_lipschitz_bound(ifs, nu, inv.a_inf, arith.one / (a_prev + gamma), arith)
    kappa1 = kappa1_value(c_nu, r, arith)
    chi_value = chi(inv, ifs.gamma, options.chi_depth, arith)

    if options.kappa2 is not None:
        kappa2 = arith.real(options.kappa2)
        overridden = True
    else:
        kappa2 = (1 + kappa1) / 2
        overridden = False

    E = E_bound(s, r + 1, chi_value, arith)
    G = G_bound(s, r, h, chi_value, arith)
    D, H = D_H_bounds(G, r, mu, chi_value, s, arith, h=h)

    M1 = M2 = None
    try:
        M1, M2 = M1_M2(s, chi_value, mu, G, H, h, r, arith)
    except CertificateError as e:
        reasons.append(f"h too large for M1/M2 ({e.message})")

    checks['h_le_02'] = h <= H_MAX
    if not checks['h_le_02']:
        reasons.append("h > 0.2")
    checks['s_range'] = 0 < s <= S_MAX
    if not checks['s_range']:
        reasons.append("s outside (0, 1.5]")
    checks['chi_ge_1'] = chi_value >= 1
    if not checks['chi_ge_1']:
        reasons.append("chi < 1")
    checks['gap_condition'] = mesh.gap_condition_holds()
    if not checks['gap_condition']:
        reasons.append("mesh gap condition fails")

    cert = HypothesisCertificate(
        s=s, r=r, nu=nu, h=h, mu=mu, chi=chi_value, psi_r=psi_r, eta_r=eta_r, c_nu=c_nu,
        M0_nu=M0_nu, kappa1=kappa1, kappa2=kappa2, kappa2_overridden=overridden,
        M=None, M_prime=None, E=E, G=G, D=D, H=H, M1=M1, M2=M2, u=None, C=None,
        checks=checks, reasons=reasons, arith=arith,
    )

    if kappa1 > KAPPA1_WARN:
        cert_logger.warning(f"κ₁ = {float(kappa1):.4f} > 4/5, 建议增大 ν (当前 ν={nu})")

    if not kappa1 < 1:
        reasons.append("kappa1 >= 1")
        for name in ('cond_8_3', 'cond_8_4', 'cond_h1', 'M_gt_M2', 'cond_5_17n'):
            checks[name] = False
        return _finish(cert, ifs)
    if not kappa1 < kappa2 < 1:
        reasons.append("kappa2 outside (kappa1, 1)")
        for name in ('cond_8_3', 'cond_8_4', 'cond_h1', 'M_gt_M2', 'cond_5_17n'):
            checks[name] = False
        return _finish(cert, ifs)

    gap = kappa2 - kappa1
    M = 4 * s / (inv.a_inf + a_prev + gamma) / gap
    u = M * eta_r * h
    eu = arith.exp(u)
    cert.M = M
    cert.M_prime = kappa2 * M
    cert.u = u

    value_8_3 = psi_r * u * eu
    cert.cond_8_3_value = value_8_3
    checks['cond_8_3'] = value_8_3 < 1
    if not checks['cond_8_3']:
        reasons.append("psi*u*e^u >= 1")

    if checks['cond_8_3']:
        lhs = kappa1 * eu / (1 - value_8_3)
        rhs = kappa2 - s * M0_nu / M if M > 0 else kappa2
        cert.cond_8_4_lhs, cert.cond_8_4_rhs = lhs, rhs
        checks['cond_8_4'] = lhs < rhs
        C = interpolant_log_lipschitz(M, h, r, arith)
        cert.C = C
        checks['cond_5_17n'] = c_nu * C < cert.M_prime - s * M0_nu
    else:
        checks['cond_8_4'] = False
        checks['cond_5_17n'] = False
    if not checks['cond_8_4']:
        reasons.append("cone contraction condition fails")
    if not checks['cond_5_17n']:
        reasons.append("interpolant cone condition fails")

    h1_lhs = 2 + H * (h ** r + h ** (2 * r + 2)) + h * h
    h1_rhs = 2 / gap
    cert.cond_h1_lhs, cert.cond_h1_rhs = h1_lhs, h1_rhs
    checks['cond_h1'] = h1_lhs <= h1_rhs
    if not checks['cond_h1']:
        reasons.append("step-size condition fails")

    checks['M_gt_M2'] = M2 is not None and M > M2
    if not checks['M_gt_M2']:
        reasons.append("M <= M2")

    return _finish(cert, ifs)


def _finish(cert: HypothesisCertificate, ifs: GaussIFS) -> HypothesisCertificate:
    cert.verified = all(cert.checks.get(name, False) for name in CHECK_NAMES) and not cert.reasons
    if cert.verified:
        cert_logger.debug(f"{ifs.label} s={float(cert.s):.6f} ν={cert.nu}: 证书成立")
    else:
        cert_logger.info(f"{ifs.label} s={float(cert.s):.6f} ν={cert.nu}: 证书不成立, "
                         f"原因: {'; '.join(cert.reasons)}")
    return cert


def minimal_nu(ifs: GaussIFS, r: int, inv: InvariantInterval, arith: Optional[Arithmetic] = None,
               kappa_target=KAPPA1_WARN, nu_max: int = 40) -> int:
    """使 κ₁ <= kappa_target 的最小 ν (不声称最优)"""
    arith = arith or inv.arith
    for nu in range(1, nu_max + 1):
        c_nu = contraction_bound(ifs, nu, inv.a_inf, arith)
        if kappa1_value(c_nu, r, arith) <= kappa_target:
            cert_logger.info(f"{ifs.label} r={r}: 最小 ν = {nu}")
            return nu
    raise CertificateError(f"ν <= {nu_max} 内无法使 κ₁ <= {kappa_target}")
