# src/transfer/lagrange.py

from typing import Sequence, Tuple

import numpy as np

from src.domain.mesh import Mesh
from src.numerics.precision import Arithmetic


class ReferenceBasis:
    """[−1, 1] 上以 ĉ_k 为节点的 Lagrange 基, 用第二重心公式求值"""

    def __init__(self, ref_nodes: Sequence, arith: Arithmetic):
        self.arith = arith
        self.nodes = arith.array(ref_nodes)
        self.r = len(ref_nodes) - 1
        weights = []
        for k in range(self.r + 1):
            prod = arith.one
            for m in range(self.r + 1):
                if m != k:
                    prod *= self.nodes[k] - self.nodes[m]
            weights.append(arith.one / prod)
        self.weights = arith.array(weights)

    def values(self, xhat) -> np.ndarray:
        """全部 l̂_k(x̂), k = 0..r; 落在节点上时返回精确的单位向量"""
        diffs = xhat - self.nodes
        for k in range(self.r + 1):
            if diffs[k] == 0:
                out = self.arith.zeros(self.r + 1)
                out[k] = self.arith.one
                return out
        terms = self.weights / diffs
        return terms / np.sum(terms)

    def value(self, k: int, xhat):
        return self.values(xhat)[k]

    def lebesgue_function(self, xhat):
        """Σ_k |l̂_k(x̂)|"""
        return np.sum(np.abs(self.values(xhat)))


def lagrange_eval(mesh: Mesh, cell: Tuple[int, int], k: int, x, basis: ReferenceBasis = None):
    """单元 (i, j) 上第 k 个 Lagrange 基函数在 x 处的值"""
    basis = basis or ReferenceBasis(mesh.ref_nodes, mesh.arith)
    i, j = cell
    return basis.value(k, mesh.reference_coordinate(i, j, x))
