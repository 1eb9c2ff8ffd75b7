import math

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from meshwav.laplacian import (
    Basis,
    EdgeWeights,
    assemble_laplacian,
    cotangent_weights,
    edge_length_weights,
    eigenbasis,
    fix_signs,
    gaussian_weights,
    mesh_basis,
    vertex_weights,
    _shift_invert,
)
from meshwav.mesh_io import Mesh, MeshError
from meshwav.meshes import grid_patch, icosphere, random_patch, tetrahedron, torus

SQ3 = math.sqrt(3.0)


def graph_weights(n, edges, values):
    edges = np.asarray(edges)
    values = np.asarray(values, dtype=float)
    W = sp.coo_matrix(
        (np.r_[values, values], (np.r_[edges[:, 0], edges[:, 1]], np.r_[edges[:, 1], edges[:, 0]])),
        shape=(n, n),
    ).tocsr()
    return EdgeWeights(W, edges, values, "test")


def weight_of(w, i, j):
    return w.matrix[i, j]


def check_basis_invariants(L, basis, tol_orth=1e-8, tol_res=1e-7):
    Z, a, mu = basis.vectors, basis.weights, basis.eigenvalues
    assert_allclose((Z * a[:, None]).T @ Z, np.eye(basis.i_max), atol=tol_orth)
    res = L @ Z - (a[:, None] * Z) * mu
    scale = np.linalg.norm(a[:, None] * Z, axis=0)
    assert np.all(np.linalg.norm(res, axis=0) <= tol_res * scale)
    assert np.all(np.diff(mu) >= 0)
    assert mu[0] >= -1e-10
    rows = np.argmax(np.abs(Z), axis=0)
    assert np.all(Z[rows, np.arange(basis.i_max)] > 0)


# -- edge weights ------------------------------------------------------------


def test_two_equilateral_triangles_shared_edge():
    v = [[0, 0, 0], [1, 0, 0], [0.5, SQ3 / 2, 0], [0.5, -SQ3 / 2, 0]]
    m = Mesh.from_arrays(v, [[0, 1, 2], [1, 0, 3]])
    w = cotangent_weights(m)
    assert_allclose(weight_of(w, 0, 1), 1 / SQ3, rtol=1e-14)
    # boundary edges keep their single term cot(60)/2
    assert_allclose(weight_of(w, 0, 2), 0.5 / SQ3, rtol=1e-14)
    assert_allclose(weight_of(edge_length_weights(m), 0, 1), 0.5773503, atol=5e-8)


def test_right_angle_contributes_nothing():
    m = Mesh.from_arrays([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    w = cotangent_weights(m)
    # edge (1, 2) is opposite the right angle at vertex 0
    assert abs(weight_of(w, 1, 2)) < 1e-16
    assert_allclose(weight_of(w, 0, 1), 0.5, rtol=1e-15)


def test_obtuse_weights_stay_negative():
    m = Mesh.from_arrays([[0, 0, 0], [2, 0, 0], [1, 0.2, 0]], [[0, 1, 2]])
    assert weight_of(cotangent_weights(m), 0, 1) < 0


def test_weight_matrix_structure(ico3):
    w = cotangent_weights(ico3)
    W = w.matrix
    assert (W != W.T).nnz == 0
    assert np.all(W.diagonal() == 0)
    rows, cols = W.nonzero()
    pattern = {tuple(sorted(p)) for p in zip(rows.tolist(), cols.tolist())}
    assert pattern == {tuple(e) for e in ico3.edges.tolist()}


TEST_MESHES = [
    tetrahedron(),
    icosphere(3),
    torus(24, 12),
    grid_patch(6, 5, height=lambda x, y: 0.3 * np.sin(3 * x) * y),
    random_patch(10, seed=0),
    random_patch(40, seed=7),
]


@pytest.mark.parametrize("mesh", TEST_MESHES, ids=lambda m: f"n{m.n_vertices}")
def test_cotangent_equals_edge_length_formula(mesh):
    a = cotangent_weights(mesh).values
    b = edge_length_weights(mesh).values
    # the absolute floor covers edges whose weight cancels to ~0 (right angles)
    assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(b).max())


@settings(max_examples=25, deadline=None)
@given(n=st.integers(5, 40), seed=st.integers(0, 2**16))
def test_cotangent_equals_edge_length_formula_random(n, seed):
    m = random_patch(n, seed=seed)
    a, b = cotangent_weights(m).values, edge_length_weights(m).values
    assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(b).max())


def test_gaussian_weights():
    sigma = 0.7
    v = [[0, 0, 0], [sigma, 0, 0], [0, 3 * sigma, 0]]
    w = gaussian_weights(Mesh.from_arrays(v, [[0, 1, 2]]), sigma)
    assert_allclose(weight_of(w, 0, 1), math.exp(-0.5), rtol=1e-15)
    assert_allclose(weight_of(w, 0, 1), 0.6065307, atol=5e-8)
    assert_allclose(weight_of(w, 0, 2), 0.0111090, atol=5e-8)
    # l / sigma -> 0 gives exp(0) = 1 to the last bit
    assert gaussian_weights(Mesh.from_arrays(v, [[0, 1, 2]]), 1e9).values.min() == 1.0
    with pytest.raises(ValueError):
        gaussian_weights(Mesh.from_arrays(v, [[0, 1, 2]]), 0.0)


# -- vertex weights ----------------------------------------------------------


def test_vertex_weight_hexagonal_fan():
    ring = [[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3), 0] for k in range(6)]
    m = Mesh.from_arrays([[0, 0, 0]] + ring, [[0, 1 + k, 1 + (k + 1) % 6] for k in range(6)])
    assert_allclose(vertex_weights(m).areas[0], SQ3 / 2, rtol=1e-15)


def test_vertex_weight_right_triangle():
    m = Mesh.from_arrays([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    assert_allclose(vertex_weights(m).areas, 1 / 6, rtol=1e-15)


@pytest.mark.parametrize("mesh", TEST_MESHES, ids=lambda m: f"n{m.n_vertices}")
def test_vertex_weights_sum_to_area(mesh):
    a = vertex_weights(mesh)
    assert np.all(a.areas > 0)
    assert_allclose(a.areas.sum(), mesh.face_areas.sum(), rtol=1e-12)
    assert_allclose(a.total_area, mesh.face_areas.sum(), rtol=1e-12)


def test_vertex_weights_isolated_vertex():
    m = Mesh.from_arrays([[0, 0, 0], [1, 0, 0], [0, 1, 0], [3, 3, 3]], [[0, 1, 2]])
    with pytest.raises(MeshError, match="vertex 3"):
        vertex_weights(m)


# -- assembly ----------------------------------------------------------------


def test_path_graph_stiffness():
    L, M = assemble_laplacian(graph_weights(2, [[0, 1]], [1.0]), normalization="unit-mass")
    assert_array_equal(L.toarray(), [[1, -1], [-1, 1]])
    assert_array_equal(M.toarray(), np.eye(2))


def test_triangle_graph_spectrum():
    L, M = assemble_laplacian(graph_weights(3, [[0, 1], [1, 2], [0, 2]], [1, 1, 1]), normalization="unit-mass")
    assert_allclose(np.linalg.eigvalsh(L.toarray()), [0, 3, 3], atol=1e-14)
    assert_allclose(eigenbasis(L, M, 3).eigenvalues, [0, 3, 3], atol=1e-13)


@pytest.mark.parametrize("normalization", ["geometric", "unit-mass", "random-walk"])
def test_stiffness_annihilates_constants(normalization, ico3):
    w = cotangent_weights(ico3)
    L, M = assemble_laplacian(w, vertex_weights(ico3), normalization)
    assert np.abs(L @ np.ones(ico3.n_vertices)).max() < 1e-12
    if normalization == "random-walk":
        assert_allclose(M.diagonal(), np.asarray(w.matrix.sum(axis=1)).ravel())


def test_assembly_dimension_mismatch(tet, ico3):
    with pytest.raises(ValueError, match="dimension"):
        assemble_laplacian(cotangent_weights(tet), vertex_weights(ico3))


# -- eigenbasis --------------------------------------------------------------


def test_constant_mode(tet, ico3_basis):
    for basis in (mesh_basis(tet, 4), ico3_basis):
        assert abs(basis.eigenvalues[0]) <= 1e-8
        assert_allclose(basis.vectors[:, 0], 1 / math.sqrt(basis.total_area), rtol=1e-8)


def test_tetrahedron_spectrum(tet):
    # regular tetrahedron of edge 2*sqrt(2): three-fold degenerate non-zero mode
    mu = mesh_basis(tet, 4).eigenvalues
    assert_allclose(mu[1:], mu[1], rtol=1e-12)
    w = 1 / SQ3  # every edge sees two 60 degree angles
    a = 2 * SQ3  # three equilateral faces of area 2*sqrt(3), divided by 3
    assert_allclose(mu[1], 4 * w / a, rtol=1e-12)
    assert_allclose(mu[1], 2 / 3, rtol=1e-12)


def test_dense_oracle_on_small_patch(patch, patch_basis):
    L, M = assemble_laplacian(cotangent_weights(patch), vertex_weights(patch))
    # generalized problem solved directly, no symmetric scaling
    mu, Z = scipy.linalg.eigh(L.toarray(), M.toarray())
    assert_allclose(patch_basis.eigenvalues, mu, atol=1e-8, rtol=1e-8)
    Zs = fix_signs(Z)
    assert_allclose(np.abs(patch_basis.vectors.T @ M @ Zs), np.eye(10), atol=1e-8)
    check_basis_invariants(L, patch_basis)


def test_invariants_on_icosphere(ico3, ico3_basis):
    L, _ = assemble_laplacian(cotangent_weights(ico3), vertex_weights(ico3))
    check_basis_invariants(L, ico3_basis)


def clusters(mu, lmax):
    out, start = [], 0
    for l in range(lmax + 1):
        out.append(mu[start : start + 2 * l + 1])
        start += 2 * l + 1
    return out


def test_icosphere_level3_low_clusters(ico3_basis):
    # the lumped-mass discretisation is within 3% up to l = 4 at this resolution
    for l, c in enumerate(clusters(ico3_basis.eigenvalues, 5)):
        if l == 0:
            continue
        assert np.ptp(c) < 0.1 * l, l
        err = abs(c.mean() / (l * (l + 1)) - 1)
        if l <= 4:
            assert err < 0.03, (l, err)


@pytest.mark.slow
def test_icosphere_level4_clusters_and_iterative_path():
    m = icosphere(4)
    assert m.n_vertices > 2000
    basis = mesh_basis(m, 40)
    L, _ = assemble_laplacian(cotangent_weights(m), vertex_weights(m))
    check_basis_invariants(L, basis)
    mu = basis.eigenvalues
    for l, c in enumerate(clusters(mu, 5)):
        if l:
            assert abs(c.mean() / (l * (l + 1)) - 1) < 0.03
    # multiplicity 2l+1: the cluster gaps are where the big jumps are
    gaps = np.flatnonzero(np.diff(mu[:36]) > 0.5) + 1
    assert_array_equal(gaps, [1, 4, 9, 16, 25])


def test_shift_invert_matches_dense(ico3, ico3_basis):
    L, M = assemble_laplacian(cotangent_weights(ico3), vertex_weights(ico3))
    # 36 modes close the l = 5 cluster, so the subspace is well defined
    mu, Z = _shift_invert(L, M.diagonal(), 36)
    assert_allclose(mu, ico3_basis.eigenvalues[:36], rtol=1e-9, atol=1e-9)
    # compare subspaces, which is insensitive to the choice inside clusters
    a = M.diagonal()
    P = ico3_basis.vectors[:, :36]
    overlap = (P * a[:, None]).T @ Z
    assert_allclose(np.linalg.svd(overlap, compute_uv=False), 1.0, atol=1e-8)


def test_many_modes_above_dense_limit_use_dense_and_agree():
    m = torus(50, 42)
    assert m.n_vertices > 2000
    L, M = assemble_laplacian(cotangent_weights(m), vertex_weights(m))
    b = eigenbasis(L, M, 300)
    a = M.diagonal()
    assert_allclose((b.vectors * a[:, None]).T @ b.vectors, np.eye(300), atol=1e-10)
    res = L @ b.vectors - (a[:, None] * b.vectors) * b.eigenvalues
    assert np.max(np.linalg.norm(res, axis=0)) < 1e-8 * b.eigenvalues[-1]
    mu, _ = _shift_invert(L, a, 20)
    assert_allclose(b.eigenvalues[:20], mu, rtol=1e-9, atol=1e-9)


def test_eigenbasis_errors(tet):
    L, M = assemble_laplacian(cotangent_weights(tet), vertex_weights(tet))
    with pytest.raises(ValueError, match="i_max exceeds vertex count"):
        eigenbasis(L, M, 5)
    with pytest.raises(ValueError, match="positive"):
        eigenbasis(L, sp.diags([1.0, 0.0, 1.0, 1.0]), 2)
    Lb = L.tolil()
    Lb[0, 1] += 1.0
    with pytest.raises(ValueError, match="symmetric"):
        eigenbasis(Lb.tocsr(), M, 2)


def test_sign_tie_goes_to_lowest_row():
    V = np.array([[-1.0, 0.5], [1.0, -0.5], [0.2, 0.1]])
    out = fix_signs(V)
    assert_array_equal(out[:, 0], [1.0, -1.0, -0.2])
    assert_array_equal(out[:, 1], [0.5, -0.5, 0.1])


def test_basis_is_deterministic(ico3):
    a = mesh_basis(ico3, 60)
    b = mesh_basis(ico3, 60)
    assert a.to_bytes() == b.to_bytes()


def test_basis_file_round_trip(tmp_path, patch_basis):
    path = tmp_path / "b.mwb"
    patch_basis.save(path)
    data = path.read_bytes()
    assert data[:4] == b"MWB1"
    assert len(data) == 4 + 16 + 8 * (10 + 10 + 100)
    again = Basis.load(path)
    assert_array_equal(again.vectors, patch_basis.vectors)
    assert_array_equal(again.eigenvalues, patch_basis.eigenvalues)
    assert_array_equal(again.weights, patch_basis.weights)
    assert again.digest == patch_basis.digest
    # column-major storage: the first n values after the weights are column 0
    off = 20 + 8 * 20
    assert_array_equal(np.frombuffer(data, "<f8", 10, off), patch_basis.vectors[:, 0])
    with pytest.raises(ValueError, match="MWB1"):
        Basis.from_bytes(b"XXXX" + data[4:])
    with pytest.raises(ValueError, match="bytes"):
        Basis.from_bytes(data[:-8])
