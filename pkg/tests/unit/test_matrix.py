# tests/unit/test_matrix.py

import math
import os

import numpy as np
import pytest

from src.ifs.ifs_core import weight, word_table
from src.transfer.matrix import CollocationMatrix, TransferStencil, assemble
from src.utils.error.error_handler import InvalidArgumentError


def test_row_sums_at_zero(e147, float_arith, mesh_factory):
    _, mesh = mesh_factory(e147, 4, 0.02, float_arith, nu_prime=1, depth=2)
    mat = assemble(e147, mesh, 0.0, 2)
    assert mat.entries.shape == (mesh.Q, mesh.Q)
    np.testing.assert_allclose(mat.row_sums(), 9.0, rtol=1e-13)


def test_row_support(e12, float_arith, mesh_factory):
    _, mesh = mesh_factory(e12, 4, 0.05, float_arith, depth=2)
    mat = assemble(e12, mesh, 0.5, 2)
    nonzero = np.count_nonzero(mat.entries, axis=1)
    assert nonzero.max() <= 4 * (mesh.r + 1)


def test_matvec_approximates_transfer_operator(e12, float_arith, mesh_factory):
    _, mesh = mesh_factory(e12, 8, 0.02, float_arith, depth=1)
    s = 0.53
    mat = assemble(e12, mesh, s, 1)
    values = np.exp(mesh.nodes)
    result = mat.matvec(values)
    table = word_table(e12, 1)
    for p in (0, mesh.Q // 2, mesh.Q - 1):
        x = mesh.nodes[p]
        direct = sum(weight(c, x, s, float_arith) * math.exp((c.A_prev * x + c.A) / (c.B_prev * x + c.B))
                     for _, c in table)
        assert result[p] == pytest.approx(direct, rel=1e-10)


def test_stencil_reuse(e12, float_arith, mesh_factory):
    _, mesh = mesh_factory(e12, 4, 0.05, float_arith, depth=2)
    stencil = TransferStencil(e12, mesh, 2)
    assert stencil.word_count == 4
    first = stencil.assemble(0.7)
    second = assemble(e12, mesh, 0.7, 2, stencil=stencil)
    np.testing.assert_array_equal(first.entries, second.entries)
    with pytest.raises(InvalidArgumentError):
        TransferStencil(e12, mesh, 0)


def test_precision_paths_agree(e12, float_arith, mp_arith, mesh_factory):
    _, fmesh = mesh_factory(e12, 4, 0.05, float_arith, depth=1)
    _, mmesh = mesh_factory(e12, 4, 0.05, mp_arith, depth=1)
    fmat = assemble(e12, fmesh, 0.5, 1)
    mmat = assemble(e12, mmesh, mp_arith.real("0.5"), 1)
    np.testing.assert_allclose(mmat.to_float(), fmat.entries, rtol=1e-12, atol=1e-14)
    v = np.linspace(1.0, 2.0, fmesh.Q)
    np.testing.assert_allclose(mp_arith.to_float_array(mmat.matvec(mp_arith.array(v))),
                               fmat.matvec(v), rtol=1e-12)


def test_from_dense(float_arith):
    mat = CollocationMatrix.from_dense([[2, 1], [1, 3]], float_arith)
    np.testing.assert_array_equal(mat.nodes, [0.0, 1.0])
    np.testing.assert_allclose(mat.row_sums(), [3.0, 4.0])


def test_dump_formats(tmp_path, e12, float_arith, mesh_factory):
    _, mesh = mesh_factory(e12, 2, 0.1, float_arith, depth=1)
    mat = assemble(e12, mesh, 0.5, 1)
    text_path = os.path.join(tmp_path, "out", "matrix.txt")
    mat.dump(text_path)
    with open(text_path, encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert int(lines[0]) == mesh.Q
    assert len(lines) == 1 + mesh.Q ** 2
    assert float(lines[1]) == mat.entries[0, 0]

    bin_path = os.path.join(tmp_path, "matrix.bin")
    mat.dump(bin_path, fmt="binary")
    with open(bin_path, 'rb') as f:
        raw = f.read()
    assert len(raw) == 8 + 8 * mesh.Q ** 2
    assert np.frombuffer(raw[:8], dtype=np.int64)[0] == mesh.Q
    np.testing.assert_array_equal(np.frombuffer(raw[8:], dtype=np.float64).reshape(mesh.Q, mesh.Q),
                                  mat.entries)

    with pytest.raises(InvalidArgumentError):
        mat.dump(text_path, fmt="csv")


def test_brute_force_assembly_nu2(e147, float_arith, mesh_factory):
    from src.domain.mesh import locate
    from src.ifs.ifs_core import theta_omega
    from src.transfer.lagrange import lagrange_eval

    _, mesh = mesh_factory(e147, 4, 0.02, float_arith, nu_prime=1, depth=2)
    s = 0.518
    expected = np.zeros((mesh.Q, mesh.Q))
    for p, xi in enumerate(mesh.nodes):
        for _, c in word_table(e147, 2):
            y = theta_omega(c, xi, float_arith)
            i, j = locate(mesh, y)
            w = weight(c, xi, s, float_arith)
            for k in range(mesh.r + 1):
                expected[p, mesh.node_index(i, j, k)] += w * lagrange_eval(mesh, (i, j), k, y)
    mat = assemble(e147, mesh, s, 2)
    np.testing.assert_allclose(mat.entries, expected, rtol=1e-12, atol=1e-15)


def test_float_s_in_high_precision(e12, mp_arith, mesh_factory):
    _, mesh = mesh_factory(e12, 4, 0.05, mp_arith, depth=1)
    stencil = TransferStencil(e12, mesh, 1)
    from_float = stencil.assemble(0.53)
    from_text = stencil.assemble(mp_arith.real("0.53"))
    assert isinstance(from_float.s, mp_arith.ctx.mpf)
    assert all(a == b for a, b in zip(from_float.entries.ravel(), from_text.entries.ravel()))
    _, c = word_table(e12, 1)[1]
    x = mesh.nodes[3]
    assert weight(c, x, 0.53, mp_arith) == weight(c, x, mp_arith.real("0.53"), mp_arith)
    assert weight(c, x, np.float64(0.0), mp_arith) == 1


def test_large_stencil_warning(monkeypatch, e12, float_arith, mp_arith, mesh_factory):
    from src.transfer import matrix

    messages = []
    monkeypatch.setattr(matrix, 'STENCIL_WARN_ENTRIES', 10)
    monkeypatch.setattr(matrix.transfer_logger, 'warning', messages.append)
    _, mesh = mesh_factory(e12, 2, 0.1, mp_arith, depth=1)
    stencil = TransferStencil(e12, mesh, 1)
    assert stencil.entry_count == mesh.Q * 2 * 3
    assert len(messages) == 1
    assert f"Q={mesh.Q}" in messages[0]

    # float64 路径不提示
    _, fmesh = mesh_factory(e12, 2, 0.1, float_arith, depth=1)
    TransferStencil(e12, fmesh, 1)
    assert len(messages) == 1
