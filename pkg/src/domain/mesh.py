# src/domain/mesh.py

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.domain.invariant_interval import InvariantInterval
from src.ifs.ifs_core import GaussIFS, theta_omega, word_table
from src.numerics.precision import Arithmetic
from src.utils.error.error_handler import (
    DomainError,
    InvalidArgumentError,
    MeshConstructionError,
)
from src.utils.logger.log_helper import mesh_logger

DEFAULT_MU_CAP = 4
# 定位时允许的端点外溢 (单位: ulp)
LOCATE_SLACK_ULPS = 4
# 穷举检验 (H3) 的字数上限
COVERAGE_EXHAUSTIVE_LIMIT = 100000


def chebyshev_reference_nodes(r: int, arith: Arithmetic) -> List:
    """
    [−1, 1] 上的扩展 Chebyshev 点
    ĉ_k = −cos((2k+1)π/(2r+2)) / cos(π/(2r+2)), k = 0..r
    """
    if r < 1:
        raise InvalidArgumentError(f"多项式次数 r 必须 >= 1, 收到 {r}")
    pi = arith.pi
    denom = arith.cos(pi / (2 * r + 2))
    nodes = [None] * (r + 1)
    for k in range(r // 2 + 1):
        value = -arith.cos((2 * k + 1) * pi / (2 * r + 2)) / denom
        nodes[k] = value
        nodes[r - k] = -value
    # 端点与中点精确
    nodes[0] = -arith.one
    nodes[r] = arith.one
    if r % 2 == 0:
        nodes[r // 2] = arith.zero
    return nodes


def node_spacing_bounds(r: int, arith: Arithmetic) -> Tuple:
    """
    单元内节点间距相对 h 的界
    返回 (最小间距, 最大间距, 到中心节点的最大距离)
    """
    if r < 1:
        raise InvalidArgumentError(f"多项式次数 r 必须 >= 1, 收到 {r}")
    angle = arith.pi / (2 * r + 2)
    s = arith.sin(angle)
    min_gap = 2 * s * s
    if r % 2 == 0:
        max_gap = s
        centre = arith.real(1) / 2
    else:
        max_gap = arith.tan(angle)
        centre = (1 + arith.tan(angle)) / 2
    return min_gap, max_gap, centre


def gap_factor(r: int, arith: Arithmetic):
    """相邻子区间间隙条件中的 sin²(π/(2r+2))"""
    s = arith.sin(arith.pi / (2 * r + 2))
    return s * s


def build_subintervals(ifs: GaussIFS, nu_prime: int, inv: InvariantInterval,
                       mu_cap=DEFAULT_MU_CAP, h_target=None, r: Optional[int] = None,
                       arith: Optional[Arithmetic] = None) -> List[Tuple]:
    """
    以 ν′ 阶像 θ_ω([a_∞, b_∞]) 构造互不相交的子区间

    像区间向外舍入 1 ulp 并裁剪到 [a_∞, b_∞]; 重叠者取并;
    随后从左到右扫描, 间隙不满足 sin²(π/(2r+2))·h_target 或长度 < h_target/mu_cap
    的区间并入前一个(连同间隙)。
    """
    arith = arith or inv.arith
    if nu_prime < 0:
        raise InvalidArgumentError(f"ν′ 必须 >= 0, 收到 {nu_prime}")
    if mu_cap < 1:
        raise InvalidArgumentError(f"mu_cap 必须 >= 1, 收到 {mu_cap}")
    if nu_prime == 0:
        return [(inv.a_inf, inv.b_inf)]

    images = []
    for _, coeffs in word_table(ifs, nu_prime):
        left = theta_omega(coeffs, inv.a_inf, arith)
        right = theta_omega(coeffs, inv.b_inf, arith)
        lo, hi = (left, right) if left <= right else (right, left)
        lo, hi = arith.widen(lo, hi)
        images.append((max(lo, inv.a_inf), min(hi, inv.b_inf)))
    images.sort(key=lambda iv: iv[0])

    merged: List[List] = []
    for lo, hi in images:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    if h_target is None:
        return [(lo, hi) for lo, hi in merged]

    h_target = arith.real(h_target)
    min_gap = gap_factor(r, arith) * h_target if r is not None else arith.zero
    min_len = h_target / arith.real(mu_cap)

    swept: List[List] = []
    absorbed = 0
    for lo, hi in merged:
        if swept:
            prev = swept[-1]
            too_close = lo - prev[1] < min_gap
            too_short = hi - lo < min_len or prev[1] - prev[0] < min_len
            if too_close or too_short:
                prev[1] = max(prev[1], hi)
                absorbed += 1
                continue
        swept.append([lo, hi])

    mesh_logger.info(f"{ifs.label} ν′={nu_prime}: {len(images)} 个像区间, "
                     f"重叠合并后 {len(merged)} 个, 扫描合并 {absorbed} 次, 最终 {len(swept)} 个")
    return [(lo, hi) for lo, hi in swept]


@dataclass(frozen=True)
class SubInterval:
    """子区间 [a_i, b_i], 等分为 N_i 个单元"""
    a: object       # 左端点
    b: object       # 右端点
    N: int          # 单元数
    h: object       # 单元长度 (b−a)/N
    offset: int     # 首节点的全局下标

    def t(self, j: int):
        """单元端点 t_j, j = 0..N"""
        if j == self.N:
            return self.b
        return self.a + j * self.h


@dataclass(frozen=True)
class Mesh:
    """分片扩展 Chebyshev 配置网格"""
    intervals: Tuple[SubInterval, ...]   # 从左到右互不相交
    r: int                               # 多项式次数
    ref_nodes: Tuple                     # 参考节点 ĉ_0..ĉ_r
    nodes: np.ndarray                    # 全局升序节点, 共享端点只存一次
    Q: int                               # 自由度 N·r + I
    h: object                            # max h_i
    h_min: object                        # min h_i
    mu: object                           # h/h_min
    h_target: object
    arith: Arithmetic = field(compare=False, repr=False)
    _lefts: Optional[np.ndarray] = field(default=None, compare=False, repr=False)  # 各子区间左端点

    @property
    def I(self) -> int:
        return len(self.intervals)

    @property
    def N(self) -> int:
        return sum(iv.N for iv in self.intervals)

    def node_index(self, i: int, j: int, k: int) -> int:
        """(i, j, k) 到全局下标, i 与 j 从 1 开始, k = 0..r"""
        iv = self.intervals[i - 1]
        if not (1 <= j <= iv.N and 0 <= k <= self.r):
            raise InvalidArgumentError(f"非法节点下标 ({i}, {j}, {k})")
        return iv.offset + (j - 1) * self.r + k

    def cell_columns(self, i: int, j: int) -> range:
        start = self.node_index(i, j, 0)
        return range(start, start + self.r + 1)

    def cell_of(self, index: int) -> Tuple[int, int, int]:
        """全局下标所在的 (i, j, k); 共享端点归入左侧单元 (k = r)"""
        if not 0 <= index < self.Q:
            raise InvalidArgumentError(f"节点下标 {index} 越界")
        offsets = np.array([iv.offset for iv in self.intervals])
        i = int(np.searchsorted(offsets, index, side='right'))
        iv = self.intervals[i - 1]
        local = index - iv.offset
        if local == 0:
            return i, 1, 0
        j = (local - 1) // self.r + 1
        k = local - (j - 1) * self.r
        return i, j, k

    def reference_coordinate(self, i: int, j: int, x):
        """x 在单元 (i, j) 中的参考坐标 x̂ ∈ [−1, 1]"""
        iv = self.intervals[i - 1]
        left = iv.t(j - 1)
        return 2 * (x - left) / iv.h - 1

    def gap_condition_holds(self) -> bool:
        """sin²(π/(2r+2))·h_i <= a_{i+1} − b_i 对所有相邻子区间成立"""
        factor = gap_factor(self.r, self.arith)
        for left, right in zip(self.intervals, self.intervals[1:]):
            if factor * max(left.h, right.h) > right.a - left.b:
                return False
        return True

    def locate(self, x) -> Tuple[int, int]:
        return locate(self, x)

    def to_dict(self) -> dict:
        to_str = self.arith.to_str
        return {
            'r': self.r,
            'subintervals': self.I,
            'cells': self.N,
            'Q': self.Q,
            'h': to_str(self.h),
            'h_min': to_str(self.h_min),
            'mu': to_str(self.mu),
            'h_target': to_str(self.h_target),
            'gap_condition': self.gap_condition_holds(),
            'intervals': [
                {'a': to_str(iv.a), 'b': to_str(iv.b), 'N': iv.N} for iv in self.intervals
            ],
        }


def build_mesh(subintervals: List[Tuple], r: int, h_target, arith: Arithmetic) -> Mesh:
    """
    N_i = ⌈(b_i−a_i)/h_target⌉, h_i = (b_i−a_i)/N_i,
    节点 c = t_{j−1} + h_i(1+ĉ_k)/2
    """
    if r < 2:
        raise InvalidArgumentError(f"多项式次数 r 必须 >= 2, 收到 {r}")
    h_target = arith.real(h_target)
    if not h_target > 0:
        raise InvalidArgumentError(f"h 必须 > 0, 收到 {h_target}")
    if not subintervals:
        raise InvalidArgumentError("子区间列表不能为空")

    ref = chebyshev_reference_nodes(r, arith)
    half = [(1 + c) / 2 for c in ref]

    intervals: List[SubInterval] = []
    nodes: List = []
    offset = 0
    prev_b = None
    for a, b in subintervals:
        a, b = _as_real(a, arith), _as_real(b, arith)
        if not a < b:
            raise MeshConstructionError(f"子区间 [{a}, {b}] 长度非正")
        if prev_b is not None and not prev_b < a:
            raise MeshConstructionError("子区间必须互不相交且从左到右排列")
        prev_b = b
        count = max(1, arith.ceil((b - a) / h_target))
        step = (b - a) / count
        iv = SubInterval(a=a, b=b, N=count, h=step, offset=offset)
        intervals.append(iv)
        for j in range(1, count + 1):
            left = iv.t(j - 1)
            if j == 1:
                nodes.append(left)
            for k in range(1, r):
                nodes.append(left + step * half[k])
            nodes.append(iv.t(j))
        offset += count * r + 1

    steps = [iv.h for iv in intervals]
    h_max = max(steps)
    h_min = min(steps)
    node_array = np.array(nodes, dtype=arith.dtype)
    mesh = Mesh(intervals=tuple(intervals), r=r, ref_nodes=tuple(ref), nodes=node_array,
                Q=len(nodes), h=h_max, h_min=h_min, mu=h_max / h_min, h_target=h_target,
                arith=arith,
                _lefts=np.array([iv.a for iv in intervals], dtype=arith.dtype))

    if mesh.Q != mesh.N * r + mesh.I:
        raise MeshConstructionError(f"自由度 {mesh.Q} 与 N·r+I = {mesh.N * r + mesh.I} 不一致")
    for p in range(mesh.Q - 1):
        if not node_array[p] < node_array[p + 1]:
            raise MeshConstructionError(f"节点未严格递增 (下标 {p})")
    if not mesh.gap_condition_holds():
        raise MeshConstructionError(
            "子区间间隙不满足 sin²(π/(2r+2))·h_i <= a_{i+1} − b_i, "
            "请增大 mu_cap 或减小 ν′ 以合并子区间")

    mesh_logger.info(f"网格: I={mesh.I}, N={mesh.N}, r={r}, Q={mesh.Q}, "
                     f"h={float(h_max):.3e}, μ={float(mesh.mu):.4f}")
    return mesh


def locate(mesh: Mesh, x) -> Tuple[int, int]:
    """
    返回 (i, j) 使 t^i_{j−1} <= x <= t^i_j; 落在单元交界处时取左单元
    距端点 4 ulp 以内时钳位, 否则抛出 DomainError
    """
    arith = mesh.arith
    lefts = mesh._lefts
    pos = int(np.searchsorted(lefts, x, side='right'))
    candidates = []
    if pos > 0:
        candidates.append(pos)          # x >= a_pos
    if pos < len(lefts):
        candidates.append(pos + 1)      # x < a_{pos+1}, 可能在其左端点之外一点点
    for i in candidates:
        iv = mesh.intervals[i - 1]
        slack_lo = LOCATE_SLACK_ULPS * arith.ulp(iv.a)
        slack_hi = LOCATE_SLACK_ULPS * arith.ulp(iv.b)
        if iv.a - slack_lo <= x <= iv.b + slack_hi:
            if x <= iv.a:
                return i, 1
            if x >= iv.b:
                return i, iv.N
            j = min(max(arith.ceil((x - iv.a) / iv.h), 1), iv.N)
            # 商的舍入可能越过交界, 按实际端点校正
            while j > 1 and x <= iv.t(j - 1):
                j -= 1
            while j < iv.N and x > iv.t(j):
                j += 1
            return i, j
    raise DomainError(f"点 {arith.to_str(x)} 不在任何子区间内 ((H3) 不成立)")


@dataclass(frozen=True)
class CoverageReport:
    """(H3) 检验结果: 每个 θ_ω([a_∞, b_∞]) 是否落在同一子区间"""
    nu: int
    depth: int              # 实际检验的字长
    words_checked: int
    exhaustive: bool        # depth == nu
    violations: int
    worst_margin: object    # 像区间到所在子区间边界的最小距离, 负值表示越界

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self, arith: Arithmetic) -> dict:
        return {
            'nu': self.nu,
            'depth': self.depth,
            'words_checked': self.words_checked,
            'exhaustive': self.exhaustive,
            'violations': self.violations,
            'worst_margin': arith.to_str(self.worst_margin),
        }


def coverage_report(ifs: GaussIFS, mesh: Mesh, nu: int, inv: InvariantInterval,
                    word_limit: int = COVERAGE_EXHAUSTIVE_LIMIT) -> CoverageReport:
    """
    检验 Ω_ν 的像区间覆盖 (H3)

    |ℬ|^ν 超过 word_limit 时改为检验最大的 d <= ν (|ℬ|^d <= word_limit);
    ν 阶像包含于其 d 阶前缀的像, 所以 d 阶通过即 ν 阶通过。
    """
    arith = mesh.arith
    depth = nu
    while depth > 1 and ifs.word_count(depth) > word_limit:
        depth -= 1
    if depth < nu:
        mesh_logger.warning(f"|ℬ|^ν = {ifs.word_count(nu)} 过大, 以 {depth} 阶像区间代替检验")
    table = word_table(ifs, depth)
    violations = 0
    worst = None
    for _, coeffs in table:
        ends = (theta_omega(coeffs, inv.a_inf, arith), theta_omega(coeffs, inv.b_inf, arith))
        lo, hi = min(ends), max(ends)
        pos = int(np.searchsorted(mesh._lefts, lo, side='right'))
        if pos == 0:
            margin = lo - mesh.intervals[0].a
        else:
            iv = mesh.intervals[pos - 1]
            margin = min(lo - iv.a, iv.b - hi)
        if margin < -LOCATE_SLACK_ULPS * arith.ulp(hi):
            violations += 1
        worst = margin if worst is None or margin < worst else worst
    if violations:
        mesh_logger.error(f"{ifs.label} 有 {violations} 个 {depth} 阶像区间跨越子区间")
    return CoverageReport(nu=nu, depth=depth, words_checked=len(table),
                          exhaustive=depth == nu, violations=violations, worst_margin=worst)


def _as_real(value, arith: Arithmetic):
    if arith.native:
        return float(value)
    if isinstance(value, arith.ctx.mpf):
        return value
    return arith.real(value)
