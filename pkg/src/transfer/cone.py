# src/transfer/cone.py

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.numerics.precision import Arithmetic
from src.transfer.matrix import CollocationMatrix
from src.utils.error.error_handler import ConeBoundsError, ConvergenceError
from src.utils.logger.log_helper import transfer_logger

# 成对比较时的相对松弛 (单位: eps)
CONE_SLACK_EPS = 8
# 最终 (α, β) 向外放宽 (单位: eps)
BOUNDS_WIDEN_EPS = 64
DEFAULT_MAX_ITERS = 500


def _is_nan(x) -> bool:
    return x != x


def cone_contains(values: np.ndarray, M, nodes: np.ndarray, arith: Arithmetic) -> bool:
    """
    values ∈ K_M(T)?
    全为 0, 或全为正且相邻节点满足 |ln F(ξ_p) − ln F(ξ_{p+1})| <= M(ξ_{p+1} − ξ_p)
    """
    if any(_is_nan(v) for v in values):
        return False
    if all(v == 0 for v in values):
        return True
    if any(not v > 0 for v in values):
        return False
    logs = arith.ln_array(values)
    eps = arith.eps
    for p in range(len(values) - 1):
        diff = abs(logs[p] - logs[p + 1])
        bound = M * (nodes[p + 1] - nodes[p])
        slack = CONE_SLACK_EPS * eps * (1 + abs(logs[p]) + abs(logs[p + 1]) + bound)
        if diff > bound + slack:
            return False
    return True


def log_lipschitz_of(values: np.ndarray, nodes: np.ndarray, arith: Arithmetic):
    """使 values ∈ K_M(T) 的最小 M"""
    logs = arith.ln_array(values)
    best = arith.zero
    for p in range(len(values) - 1):
        ratio = abs(logs[p] - logs[p + 1]) / (nodes[p + 1] - nodes[p])
        if ratio > best:
            best = ratio
    return best


@dataclass
class PowerIterationResult:
    lambda_hat: object      # (max + min)/2 of (mat·w)_p/w_p
    w: np.ndarray           # 最终向量, max 范数为 1
    spread: object          # max − min 比值差
    iterations: int


def power_iterate(mat: CollocationMatrix, M=None, tol=None, max_iters: int = DEFAULT_MAX_ITERS,
                  start: Optional[np.ndarray] = None) -> PowerIterationResult:
    """
    max 范数幂迭代, 起点 𝟙

    停止准则: max_p (mat·v)_p/v_p − min_p (mat·v)_p/v_p < tol·λ̂
    """
    arith = mat.arith
    tol = arith.real(tol) if tol is not None else 64 * arith.eps
    v = arith.ones(mat.Q) if start is None else start / max(start)
    lam = spread = None
    for it in range(1, max_iters + 1):
        u = mat.matvec(v)
        ratios = u / v
        hi, lo = max(ratios), min(ratios)
        lam = (hi + lo) / 2
        spread = hi - lo
        if spread <= tol * abs(lam):
            if M is not None and not cone_contains(v, M, mat.nodes, arith):
                transfer_logger.warning(f"幂迭代向量不在 K_M 中 (M={float(M):.4f})")
            return PowerIterationResult(lambda_hat=lam, w=v, spread=spread, iterations=it)
        norm = max(abs(x) for x in u)
        if norm == 0:
            raise ConvergenceError("矩阵把迭代向量映为 0", iterations=it,
                                   spread=spread, lambda_est=lam)
        v = u / norm
    raise ConvergenceError(
        f"幂迭代 {max_iters} 步后比值差 {float(spread):.3e} 仍未小于 {float(tol):.1e}·λ̂",
        iterations=max_iters, spread=spread, lambda_est=lam)


def cone_order_bounds(mat: CollocationMatrix, w: np.ndarray, M) -> Tuple:
    """
    最大 α 与最小 β 使 α·w <=_K u <=_K β·w, u = mat·w

    u − αw ∈ K_M 与 βw − u ∈ K_M 的每个约束都是 α (或 β) 的半直线,
    逐对求闭式解后取交集; 结果向外放宽若干 eps。
    """
    arith = mat.arith
    nodes = mat.nodes
    u = mat.matvec(w)
    Q = len(w)

    alpha_hi = min(u[p] / w[p] for p in range(Q))   # 正性: α < u_p/w_p
    beta_lo = max(u[p] / w[p] for p in range(Q))    # 正性: β > u_p/w_p
    alpha_lo = None
    beta_hi = None

    for p in range(Q - 1):
        e = arith.exp(M * (nodes[p + 1] - nodes[p]))
        for a, b in ((p, p + 1), (p + 1, p)):
            # (u_a − αw_a) <= e(u_b − αw_b)
            coef = e * w[b] - w[a]
            rhs = e * u[b] - u[a]
            if coef > 0:
                alpha_hi = min(alpha_hi, rhs / coef)
            elif coef < 0:
                bound = rhs / coef
                alpha_lo = bound if alpha_lo is None else max(alpha_lo, bound)
            # (βw_a − u_a) <= e(βw_b − u_b)
            coef = w[a] - e * w[b]
            rhs = u[a] - e * u[b]
            if coef > 0:
                bound = rhs / coef
                beta_hi = bound if beta_hi is None else min(beta_hi, bound)
            elif coef < 0:
                beta_lo = max(beta_lo, rhs / coef)

    widen = BOUNDS_WIDEN_EPS * arith.eps
    if alpha_lo is not None and alpha_lo > alpha_hi + widen * abs(alpha_hi):
        raise ConeBoundsError("下界可行集为空: 向量离特征向量太远, 请增加幂迭代步数")
    if beta_hi is not None and beta_hi < beta_lo - widen * abs(beta_lo):
        raise ConeBoundsError("上界可行集为空: 向量离特征向量太远, 请增加幂迭代步数")
    return alpha_hi - widen * abs(alpha_hi), beta_lo + widen * abs(beta_lo)


@dataclass
class RhoEnclosure:
    """ρ(𝐋_{s,ν}) 的包围 [lo, hi]"""
    lo: object
    hi: object
    lambda_hat: object
    iterations: int
    spread: object
    M: object                   # 实际使用的锥参数
    heuristic: bool             # M 是否由特征向量本身推出
    w: Optional[np.ndarray] = None   # 对应的幂迭代向量, 不序列化

    @property
    def width(self):
        return self.hi - self.lo

    def to_dict(self, arith: Arithmetic) -> dict:
        return {
            'lo': arith.to_str(self.lo),
            'hi': arith.to_str(self.hi),
            'lambda_hat': arith.to_str(self.lambda_hat),
            'iterations': self.iterations,
            'M': arith.to_str(self.M),
            'heuristic_cone': self.heuristic,
        }


def certified_rho(mat: CollocationMatrix, M=None, tol=None, max_iters: int = DEFAULT_MAX_ITERS,
                  start: Optional[np.ndarray] = None) -> RhoEnclosure:
    """
    幂迭代后用锥序比较给出 α <= ρ <= β

    M 有限且特征向量落在 K_M 中时使用证书的 M; 否则取 2·(w 的 log-Lipschitz 常数) + 1,
    并标记为启发式。
    """
    arith = mat.arith
    result = power_iterate(mat, M, tol, max_iters, start)
    nodes = mat.nodes
    heuristic = M is None or not cone_contains(result.w, M, nodes, arith)
    cone_M = 2 * log_lipschitz_of(result.w, nodes, arith) + 1 if heuristic else M
    try:
        alpha, beta = cone_order_bounds(mat, result.w, cone_M)
    except ConeBoundsError:
        transfer_logger.warning("锥序界为空, 收紧容差后重试一次")
        tighter = (arith.real(tol) if tol is not None else 64 * arith.eps) / 100
        result = power_iterate(mat, None, tighter, max_iters, result.w)
        alpha, beta = cone_order_bounds(mat, result.w, cone_M)
    return RhoEnclosure(lo=alpha, hi=beta, lambda_hat=result.lambda_hat,
                        iterations=result.iterations, spread=result.spread, M=cone_M,
                        heuristic=heuristic, w=result.w)
