# src/domain/invariant_interval.py

from dataclasses import dataclass, field
from typing import Optional, Tuple

from src.ifs.ifs_core import GaussIFS
from src.numerics.precision import Arithmetic
from src.utils.logger.log_helper import mesh_logger

# 序列迭代的最大步数
MAX_SEQUENCE_DEPTH = 200


@dataclass(frozen=True)
class InvariantInterval:
    """最小不变区间 [a_∞, b_∞] 及逼近序列 a_k ↑, b_k ↓"""
    a_inf: object                    # 闭式左端点
    b_inf: object                    # 闭式右端点
    a_seq: Tuple = ()                # a_0 = 0, a_{k+1} = θ_Γ(b_k)
    b_seq: Tuple = ()                # b_0 = 1/γ, b_{k+1} = θ_γ(a_k)
    converged: bool = True           # 序列是否在步数上限内收敛
    residual: object = 0             # 不动点残差的最大值
    arith: Arithmetic = field(default=None, compare=False, repr=False)

    @property
    def length(self):
        return self.b_inf - self.a_inf

    def a_at(self, k: int):
        """a_k; 超出已存前缀时返回收敛后的尾值"""
        if k < 0:
            raise IndexError(f"k 必须 >= 0, 收到 {k}")
        return self.a_seq[k] if k < len(self.a_seq) else self.a_seq[-1]

    def b_at(self, k: int):
        if k < 0:
            raise IndexError(f"k 必须 >= 0, 收到 {k}")
        return self.b_seq[k] if k < len(self.b_seq) else self.b_seq[-1]

    def contains(self, x) -> bool:
        lo, hi = self.arith.widen(self.a_inf, self.b_inf)
        return lo <= x <= hi

    def to_dict(self) -> dict:
        to_str = self.arith.to_str
        return {
            'a_inf': to_str(self.a_inf),
            'b_inf': to_str(self.b_inf),
            'length': to_str(self.length),
            'sequence_depth': len(self.a_seq),
            'converged': self.converged,
            'fixed_point_residual': to_str(self.residual),
        }


def invariant_interval(ifs: GaussIFS, arith: Arithmetic, depth: int = 0) -> InvariantInterval:
    """
    闭式计算 a_∞ = −γ/2 + √(γ²/4 + γ/Γ), b_∞ = (Γ/γ)a_∞ (按有理化形式求值),
    校验不动点残差, 并迭代 a_k, b_k 至收敛(至少 depth 项)
    """
    g = arith.real(ifs.gamma)
    G = arith.real(ifs.Gamma)
    one = arith.one

    # 有理化形式, 避免 γ 较大时的相消
    a_inf = (g / G) / (g / 2 + arith.sqrt(g * g / 4 + g / G))
    b_inf = (G / g) / (G / 2 + arith.sqrt(G * G / 4 + G / g))

    def theta(beta, x):
        return one / (x + beta)

    res_a = abs(theta(G, theta(g, a_inf)) - a_inf)
    res_b = abs(theta(g, theta(G, b_inf)) - b_inf)
    residual = max(res_a, res_b)
    tolerance = max(arith.real(10) ** (-(arith.dps - 4)), 64 * arith.eps)
    if residual > tolerance:
        mesh_logger.warning(f"{ifs.label} 不动点残差 {float(residual):.3e} 超出 {float(tolerance):.1e}")

    a_seq = [arith.zero]
    b_seq = [one / g]
    step_tol = max(arith.real(10) ** (-arith.dps), 4 * arith.eps)
    converged = False
    for k in range(MAX_SEQUENCE_DEPTH):
        a_next = theta(G, b_seq[-1])
        b_next = theta(g, a_seq[-1])
        done = abs(a_next - a_seq[-1]) < step_tol and abs(b_next - b_seq[-1]) < step_tol
        a_seq.append(a_next)
        b_seq.append(b_next)
        if done and len(a_seq) > depth:
            converged = True
            break
    if len(a_seq) <= depth:
        # 已达步数上限, 以尾值补足
        a_seq.extend([a_seq[-1]] * (depth + 1 - len(a_seq)))
        b_seq.extend([b_seq[-1]] * (depth + 1 - len(b_seq)))
    if not converged:
        mesh_logger.warning(f"{ifs.label} 的 a_k/b_k 序列在 {MAX_SEQUENCE_DEPTH} 步内未收敛")

    mesh_logger.debug(f"{ifs.label} 不变区间 [{float(a_inf):.6f}, {float(b_inf):.6f}], "
                      f"序列长度 {len(a_seq)}")
    return InvariantInterval(a_inf=a_inf, b_inf=b_inf, a_seq=tuple(a_seq), b_seq=tuple(b_seq),
                             converged=converged, residual=residual, arith=arith)
