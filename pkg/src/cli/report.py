# src/cli/report.py

import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Optional

from src.certify.certificate import CHECK_NAMES, HypothesisCertificate
from src.cli.config import RunConfig
from src.domain.invariant_interval import InvariantInterval
from src.domain.mesh import CoverageReport, Mesh
from src.numerics.precision import Arithmetic
from src.solver.dimension_solver import DimensionBracket, RootResult, SolverTrial
from src.utils.common.tools import adjust_decimal_places, agreeing_decimal_places

UNVERIFIED_BANNER = "*** UNVERIFIED HYPOTHESIS: 以下数值未经严格认证 ***"
EXIT_VERIFIED = 0
EXIT_UNVERIFIED = 2


@dataclass
class RunReport:
    """一次运行的完整结果"""
    config: RunConfig
    nu: int                                 # 实际使用的 ν ('auto' 已解析)
    inv: InvariantInterval
    mesh: Mesh
    coverage: CoverageReport
    certificate: HypothesisCertificate      # s_mid 处的证书
    trials: List[SolverTrial]
    root: RootResult
    bracket: DimensionBracket
    arith: Arithmetic
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.bracket.verified and self.coverage.ok

    @property
    def exit_code(self) -> int:
        return EXIT_VERIFIED if self.verified else EXIT_UNVERIFIED

    @property
    def reasons(self) -> List[str]:
        reasons = list(self.bracket.reasons)
        if not self.coverage.ok:
            reasons.append(f"{self.coverage.violations} image intervals straddle subintervals")
        return reasons

    def reported_digits(self) -> int:
        """
        可报告的小数位数

        认证模式下取 s_l 与 s_u 截断后一致的位数 (不超过 digits_guaranteed);
        启发式模式按求根容差给出。
        """
        to_str = self.arith.to_str
        if self.verified:
            return agreeing_decimal_places(to_str(self.bracket.s_l), to_str(self.bracket.s_u),
                                           self.bracket.digits_guaranteed)
        tol = self.root.tol
        return max(0, self.arith.floor(-self.arith.log10(tol))) if tol > 0 else self.arith.dps

    def reported_value(self) -> Decimal:
        source = self.bracket.s_l if self.verified else self.root.s_mid
        return adjust_decimal_places(Decimal(self.arith.to_str(source)), self.reported_digits())

    def to_dict(self) -> dict:
        arith = self.arith
        config = self.config.to_dict()
        config['nu_resolved'] = self.nu
        domain = self.inv.to_dict()
        domain['coverage'] = self.coverage.to_dict(arith)
        bracket = self.bracket.to_dict(arith)
        bracket['reported_value'] = str(self.reported_value())
        bracket['reported_digits'] = self.reported_digits()
        bracket['overall_verified'] = self.verified
        bracket['overall_reasons'] = self.reasons
        data = {
            'config': config,
            'domain': domain,
            'mesh': self.mesh.to_dict(),
            'certificate': self.certificate.to_dict(),
            'solver_trace': [trial.to_dict(arith) for trial in self.trials],
            'bracket': bracket,
        }
        if self.config.timings:
            data['timings'] = {k: round(v, 6) for k, v in self.timings.items()}
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def render(self) -> str:
        if self.config.output_format == 'json':
            return self.to_json()
        return render_text(self)


def bracket_from_dict(data: dict, arith: Arithmetic) -> DimensionBracket:
    """把报告中的 bracket 段解析回 DimensionBracket"""
    real = arith.real
    return DimensionBracket(
        s_l=real(data['s_l']), s_u=real(data['s_u']), s_mid=real(data['s_mid']),
        H=real(data['H']), h=real(data['h']), r=int(data['r']), nu=int(data['nu']),
        rho_at_sl=tuple(real(x) for x in data['rho_at_sl']),
        rho_at_su=tuple(real(x) for x in data['rho_at_su']),
        lambda_at_sl=tuple(real(x) for x in data['lambda_at_sl']),
        lambda_at_su=tuple(real(x) for x in data['lambda_at_su']),
        verified=bool(data['verified']), digits_guaranteed=int(data['digits_guaranteed']),
        reasons=list(data.get('reasons', [])),
    )


def _line(key: str, value) -> str:
    return f"  {key:<22}{value}"


def render_text(report: RunReport) -> str:
    """人类可读报告"""
    arith = report.arith
    to_str = arith.to_str
    cfg = report.config
    mesh = report.mesh
    cert = report.certificate
    bracket = report.bracket
    out: List[str] = []

    if not report.verified:
        out.append(UNVERIFIED_BANNER)
        for reason in report.reasons:
            out.append(f"  - {reason}")
        out.append("")

    out.append(f"[配置] {cfg.name}")
    out.append(_line("set", ','.join(cfg.digits)))
    out.append(_line("degree r", cfg.r))
    out.append(_line("h", cfg.h_target))
    out.append(_line("nu", report.nu if cfg.nu != 'auto' else f"{report.nu} (auto)"))
    out.append(_line("nu'", cfg.nu_prime))
    out.append(_line("precision", f"{cfg.precision} digits"))
    out.append(_line("verify", cfg.verify))

    out.append("[不变区间]")
    out.append(_line("a_inf", to_str(report.inv.a_inf)))
    out.append(_line("b_inf", to_str(report.inv.b_inf)))
    coverage = report.coverage
    out.append(_line("coverage", f"depth {coverage.depth}, {coverage.words_checked} words, "
                                 f"{coverage.violations} violations"))

    out.append("[网格]")
    out.append(_line("subintervals", mesh.I))
    out.append(_line("cells", mesh.N))
    out.append(_line("Q", mesh.Q))
    out.append(_line("h (max)", to_str(mesh.h)))
    out.append(_line("mu", to_str(mesh.mu)))

    out.append(f"[证书] s = {to_str(cert.s)}")
    for name in ('chi', 'c_nu', 'M0_nu', 'kappa1', 'kappa2', 'M', 'M_prime', 'u',
                 'cond_8_3_value', 'cond_8_4_lhs', 'cond_8_4_rhs', 'E', 'G', 'D', 'H', 'M1', 'M2'):
        value = getattr(cert, name)
        out.append(_line(name, '-' if value is None else to_str(value)))
    for name in CHECK_NAMES:
        out.append(_line(name, 'ok' if cert.checks.get(name) else 'FAIL'))
    out.append(_line("verified", cert.verified))

    out.append(f"[求根] {len(report.trials)} 次试探")
    for trial in report.trials:
        if trial.rho_lo is None:
            out.append(f"  {trial.phase:<8} s={float(trial.s):.12f}  λ̂={float(trial.lambda_hat):.12f}")
        else:
            flag = 'accept' if trial.accepted else 'reject'
            out.append(f"  {trial.phase:<8} s={float(trial.s):.15f}  "
                       f"ρ∈[{float(trial.rho_lo):.15f}, {float(trial.rho_hi):.15f}]  {flag}")

    out.append("[结果]")
    out.append(_line("s_l", to_str(bracket.s_l)))
    out.append(_line("s_mid", to_str(bracket.s_mid)))
    out.append(_line("s_u", to_str(bracket.s_u)))
    out.append(_line("width", to_str(bracket.width)))
    out.append(_line("H", to_str(bracket.H)))
    out.append(_line("digits guaranteed", bracket.digits_guaranteed))
    out.append(_line("s", str(report.reported_value())))
    if cfg.expected is not None:
        out.append(_line("expected", cfg.expected))
    out.append(_line("status", "VERIFIED" if report.verified else "UNVERIFIED"))

    if cfg.timings and report.timings:
        out.append("[耗时]")
        for key, value in report.timings.items():
            out.append(_line(key, f"{value:.3f} s"))
    return "\n".join(out)
