# src/transfer/matrix.py

import os
from typing import List, Optional

import numpy as np

from src.domain.mesh import Mesh, locate
from src.ifs.ifs_core import GaussIFS, word_table
from src.numerics.precision import Arithmetic
from src.transfer.lagrange import ReferenceBasis
from src.utils.error.error_handler import DomainError, InvalidArgumentError
from src.utils.logger.log_helper import transfer_logger

# 高精度模式下模板元素数 Q·W·(r+1) 超过此值时提示耗时与内存
STENCIL_WARN_ENTRIES = 2_000_000


class TransferStencil:
    """
    与 s 无关的组装数据

    对每个节点 ξ_p 与每个字 ω (字典序) 预先计算:
    ln(B_prev·ξ_p + B)、θ_ω(ξ_p) 所在单元的首列下标和该单元的 r+1 个 Lagrange 值。
    换一个 s 只需重算权重 exp(−2s·ln(...))。
    """

    def __init__(self, ifs: GaussIFS, mesh: Mesh, nu: int):
        if nu < 1:
            raise InvalidArgumentError(f"ν 必须 >= 1, 收到 {nu}")
        self.ifs = ifs
        self.mesh = mesh
        self.nu = nu
        self.arith = mesh.arith
        arith = self.arith
        table = word_table(ifs, nu)
        self.word_count = len(table)
        basis = ReferenceBasis(mesh.ref_nodes, arith)
        Q, W, width = mesh.Q, len(table), mesh.r + 1
        self.entry_count = Q * W * width
        if not arith.native and self.entry_count > STENCIL_WARN_ENTRIES:
            transfer_logger.warning(
                f"模板共 {self.entry_count} 个高精度元素 (Q={Q}, 字数 {W}), "
                f"组装可能需要数十分钟和数 GB 内存; 可先用较大的 h 试算")

        coeffs = [c.as_reals(arith) for _, c in table]
        self.log_den = arith.zeros((Q, W))
        self.col_start = np.zeros((Q, W), dtype=np.int64)
        self.lagrange = arith.zeros((Q, W, width))

        for p in range(Q):
            xi = mesh.nodes[p]
            for w, (ap, a, bp, b) in enumerate(coeffs):
                den = bp * xi + b
                y = (ap * xi + a) / den
                try:
                    i, j = locate(mesh, y)
                except DomainError:
                    transfer_logger.error(f"θ_{table[w][0]}(ξ_{p}) 越出网格, (H3) 不成立")
                    raise
                self.log_den[p, w] = arith.ln(den)
                self.col_start[p, w] = mesh.node_index(i, j, 0)
                self.lagrange[p, w, :] = basis.values(mesh.reference_coordinate(i, j, y))

        transfer_logger.info(f"{ifs.label} ν={nu}: 模板 Q={Q}, 字数 {W}, 每行最多 {W * width} 项")

    def assemble(self, s) -> 'CollocationMatrix':
        """按固定顺序 (行, 字, k) 累加得到 𝐋_{s,ν}"""
        arith = self.arith
        mesh = self.mesh
        Q, width = mesh.Q, mesh.r + 1
        s = arith.real(s)
        if s == 0:
            weights = arith.ones(self.log_den.shape)
        else:
            weights = arith.exp_array(-2 * s * self.log_den)
        values = weights[:, :, None] * self.lagrange
        rows = np.broadcast_to(np.arange(Q)[:, None, None], values.shape)
        cols = self.col_start[:, :, None] + np.arange(width)[None, None, :]
        entries = arith.zeros((Q, Q))
        np.add.at(entries, (rows.ravel(), cols.ravel()), values.ravel())
        return CollocationMatrix(entries=entries, s=s, nu=self.nu, mesh=mesh, arith=arith)


class CollocationMatrix:
    """Q×Q 稠密配置矩阵 𝐋_{s,ν}"""

    def __init__(self, entries: np.ndarray, s=None, nu: int = 1, mesh: Optional[Mesh] = None,
                 arith: Optional[Arithmetic] = None):
        self.entries = entries
        self.Q = entries.shape[0]
        self.s = s
        self.nu = nu
        self.mesh = mesh
        self.arith = arith or (mesh.arith if mesh is not None else None)
        self._support: Optional[List[np.ndarray]] = None

    @classmethod
    def from_dense(cls, values, arith: Arithmetic) -> 'CollocationMatrix':
        """由任意二维数组构造, 主要用于测试与外部对照"""
        rows = [arith.array(row) for row in values]
        return cls(np.array(rows, dtype=arith.dtype), arith=arith)

    @property
    def nodes(self):
        if self.mesh is not None:
            return self.mesh.nodes
        return self.arith.array(range(self.Q))

    def _row_support(self) -> List[np.ndarray]:
        if self._support is None:
            self._support = [np.nonzero(np.array([e != 0 for e in row]))[0]
                             for row in self.entries]
        return self._support

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self.arith.native:
            return self.entries @ v
        ctx = self.arith.ctx
        out = []
        for p, cols in enumerate(self._row_support()):
            row = self.entries[p]
            out.append(ctx.fdot([(row[q], v[q]) for q in cols]) if len(cols) else self.arith.zero)
        return np.array(out, dtype=object)

    def row_sums(self) -> np.ndarray:
        return self.matvec(self.arith.ones(self.Q))

    def to_float(self) -> np.ndarray:
        return self.arith.to_float_array(self.entries)

    def dump(self, path: str, fmt: str = "text"):
        """
        导出矩阵: text 为首行 Q 再逐行逐元素十进制全精度;
        binary 为 int64 的 Q 后接 float64 行主序元素
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if fmt == "text":
            with open(path, 'w', encoding='utf-8') as f:
                f.write(f"{self.Q}\n")
                for row in self.entries:
                    for value in row:
                        f.write(self.arith.to_str(value) + "\n")
        elif fmt == "binary":
            if not self.arith.native:
                transfer_logger.warning("二进制导出为 float64, 高精度位将被截断")
            with open(path, 'wb') as f:
                np.array([self.Q], dtype=np.int64).tofile(f)
                self.to_float().astype(np.float64).tofile(f)
        else:
            raise InvalidArgumentError(f"未知导出格式: {fmt}")
        transfer_logger.info(f"矩阵 (Q={self.Q}) 已导出到 {path}")


def assemble(ifs: GaussIFS, mesh: Mesh, s, nu: int,
             stencil: Optional[TransferStencil] = None) -> CollocationMatrix:
    """组装 𝐋_{s,ν}; 多个 s 共用网格时应复用 stencil"""
    stencil = stencil or TransferStencil(ifs, mesh, nu)
    return stencil.assemble(s)
