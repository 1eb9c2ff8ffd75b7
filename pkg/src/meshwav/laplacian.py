"""Edge weights, vertex weights, the mesh Laplacian and its eigenbasis.

The discrete inner product used everywhere is ``<f, g> = sum_v a_v f(v) g(v)``
with ``a_v`` the diagonal of the mass matrix, so eigenvectors are
mass-orthonormal rather than Euclidean-orthonormal.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .mesh_io import Mesh, MeshError

__all__ = [
    "EdgeWeights",
    "VertexWeights",
    "Basis",
    "EigenSolverError",
    "cotangent_weights",
    "edge_length_weights",
    "gaussian_weights",
    "vertex_weights",
    "assemble_laplacian",
    "eigenbasis",
    "mesh_basis",
    "DENSE_LIMIT",
    "DENSE_MAX",
]

# above this many vertices the shift-invert Lanczos path is used
DENSE_LIMIT = 2000
# dense is also used up to this size when i_max is over a tenth of n
DENSE_MAX = 8000
ITERATIVE_TOL = 1e-10

_BASIS_MAGIC = b"MWB1"


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class EdgeWeights:
    """Symmetric sparse edge-weight matrix plus the per-edge values.

    ``values[e]`` is the weight of ``edges[e]``; ``matrix`` holds both
    ``(i, j)`` and ``(j, i)`` with the identical number.
    """

    matrix: sp.csr_matrix
    edges: np.ndarray
    values: np.ndarray
    scheme: str

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class VertexWeights:
    areas: np.ndarray
    total_area: float

    @property
    def n(self) -> int:
        return len(self.areas)


def _edge_matrix(n: int, edges: np.ndarray, values: np.ndarray) -> sp.csr_matrix:
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.concatenate([values, values])
    # each unordered edge appears once in `edges`, so no duplicates are summed
    W = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    W.sort_indices()
    return W


def _check_faces(mesh: Mesh) -> None:
    bad = np.flatnonzero(mesh.face_areas <= 0)
    if bad.size:
        raise MeshError(f"degenerate face {int(bad[0])} has zero area")


def cotangent_weights(mesh: Mesh) -> EdgeWeights:
    """Cotangent weights ``(cot a_ij + cot b_ij) / 2``.

    Boundary edges keep their single cotangent term. Obtuse triangles give
    negative weights, which are kept as they are.
    """
    _check_faces(mesh)
    p = mesh.vertices[mesh.faces]
    values = np.zeros(mesh.n_edges)
    for k in range(3):
        e1 = p[:, (k + 1) % 3] - p[:, k]
        e2 = p[:, (k + 2) % 3] - p[:, k]
        cot = np.einsum("ij,ij->i", e1, e2) / np.linalg.norm(np.cross(e1, e2), axis=1)
        # corner k is opposite face_edges[:, k]; sequential, order-stable sum
        np.add.at(values, mesh.face_edges[:, k], 0.5 * cot)
    return EdgeWeights(_edge_matrix(mesh.n_vertices, mesh.edges, values), mesh.edges, values, "cotangent")


def _heron(a, b, c):
    # Kahan's numerically stable form, needs a >= b >= c
    a, b, c = np.sort(np.stack([a, b, c]), axis=0)[::-1]
    return 0.25 * np.sqrt((a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c)))


def edge_length_weights(mesh: Mesh) -> EdgeWeights:
    """Cotangent weights written purely in terms of edge lengths.

    Each face contributes ``(-l_ij^2 + l_jk^2 + l_ik^2) / (8 a_ijk)`` to edge
    ``ij``, with the face area from Heron's formula. Mathematically identical
    to :func:`cotangent_weights`; kept as an independent code path.
    """
    v = mesh.vertices
    f = mesh.faces
    # length of the side opposite corner k
    opp = [np.linalg.norm(v[f[:, (k + 1) % 3]] - v[f[:, (k + 2) % 3]], axis=1) for k in range(3)]
    area = _heron(*opp)
    if np.any(area <= 0):
        raise MeshError(f"degenerate face {int(np.argmax(area <= 0))} has zero area")
    values = np.zeros(mesh.n_edges)
    for k in range(3):
        lij, ljk, lik = opp[k], opp[(k + 1) % 3], opp[(k + 2) % 3]
        np.add.at(values, mesh.face_edges[:, k], (-(lij**2) + ljk**2 + lik**2) / (8 * area))
    return EdgeWeights(_edge_matrix(mesh.n_vertices, mesh.edges, values), mesh.edges, values, "edge-length")


def gaussian_weights(mesh: Mesh, sigma: float) -> EdgeWeights:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    values = np.exp(-mesh.edge_lengths**2 / (2 * sigma**2))
    return EdgeWeights(
        _edge_matrix(mesh.n_vertices, mesh.edges, values), mesh.edges, values, f"gaussian({sigma!r})"
    )


def vertex_weights(mesh: Mesh) -> VertexWeights:
    """One third of the total area of the faces around each vertex."""
    isolated = mesh.isolated_vertices()
    if isolated.size:
        raise MeshError(f"vertex {int(isolated[0])} has no incident face")
    area = mesh.face_areas
    a = np.zeros(mesh.n_vertices)
    for k in range(3):
        np.add.at(a, mesh.faces[:, k], area / 3.0)
    return VertexWeights(a, float(area.sum()))


def assemble_laplacian(w: EdgeWeights, a: VertexWeights | None = None, normalization: str = "geometric"):
    """Stiffness ``K - W`` and diagonal mass matrix.

    Parameters
    ----------
    w : EdgeWeights
    a : VertexWeights, required for ``normalization="geometric"``
    normalization : {"geometric", "unit-mass", "random-walk"}
        Mass is ``A`` (vertex areas), the identity, or the degree matrix ``K``.

    Returns
    -------
    stiffness : csr_matrix
    mass : dia_matrix
    """
    W = w.matrix
    n = W.shape[0]
    degree = np.asarray(W.sum(axis=1)).ravel()
    L = (sp.diags(degree) - W).tocsr()
    L.sort_indices()
    if normalization == "geometric":
        if a is None:
            raise ValueError("geometric normalization needs vertex weights")
        if a.n != n:
            raise ValueError(f"dimension mismatch: {n} edge-weight rows vs {a.n} vertex weights")
        mass = a.areas
    elif normalization in ("unit-mass", "non-normalised"):
        if a is not None and a.n != n:
            raise ValueError(f"dimension mismatch: {n} edge-weight rows vs {a.n} vertex weights")
        mass = np.ones(n)
    elif normalization == "random-walk":
        if np.any(degree <= 0):
            raise ValueError(f"random-walk mass needs positive degrees, vertex {int(np.argmax(degree <= 0))} has none")
        mass = degree
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return L, sp.diags(mass)


@dataclass(frozen=True, eq=False)
class Basis:
    """Mesh Fourier basis: ``L z_i = mu_i M z_i`` for the smallest ``i_max`` modes.

    Attributes
    ----------
    eigenvalues : (i_max,) ascending Laplacian eigenvalues
    vectors : (n, i_max) mass-orthonormal eigenvectors, one per column
    weights : (n,) mass diagonal, i.e. the quadrature weights ``a_v``
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for arr in (self.eigenvalues, self.vectors, self.weights):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def i_max(self) -> int:
        return self.vectors.shape[1]

    @property
    def total_area(self) -> float:
        return float(self.weights.sum())

    def to_bytes(self) -> bytes:
        header = _BASIS_MAGIC + struct.pack("<QQ", self.n, self.i_max)
        return b"".join(
            [
                header,
                np.ascontiguousarray(self.eigenvalues, dtype="<f8").tobytes(),
                np.ascontiguousarray(self.weights, dtype="<f8").tobytes(),
                np.asarray(self.vectors, dtype="<f8").tobytes(order="F"),
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "Basis":
        if data[:4] != _BASIS_MAGIC:
            raise ValueError("not an MWB1 basis file")
        n, i_max = struct.unpack_from("<QQ", data, 4)
        expected = 20 + 8 * (i_max + n + n * i_max)
        if len(data) != expected:
            raise ValueError(f"basis file has {len(data)} bytes, expected {expected}")
        off = 20
        evals = np.frombuffer(data, "<f8", i_max, off).astype(np.float64)
        off += 8 * i_max
        weights = np.frombuffer(data, "<f8", n, off).astype(np.float64)
        off += 8 * n
        vecs = np.frombuffer(data, "<f8", n * i_max, off).reshape((n, i_max), order="F")
        return cls(evals, np.array(vecs, dtype=np.float64, order="C"), weights)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Basis":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @cached_property
    def digest(self) -> bytes:
        """SHA-256 of the serialized basis, used to tie derived data to it."""
        return hashlib.sha256(self.to_bytes()).digest()


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that the largest-magnitude entry is positive.

    ``argmax`` takes the first of equal magnitudes, so ties go to the lowest row.
    """
    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[rows, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def eigenbasis(stiffness, mass, i_max: int) -> Basis:
    """Smallest ``i_max`` generalized eigenpairs of ``stiffness`` against a diagonal ``mass``.

    Dense symmetric solve for ``n <= DENSE_LIMIT``, or for ``n <= DENSE_MAX``
    when ``i_max > n / 10``. Otherwise shift-invert Lanczos (tolerance
    ``ITERATIVE_TOL``, at most ``10 * i_max`` restarts) finished with a
    Rayleigh-Ritz step so the result is exactly mass-orthonormal.
    """
    L = sp.csr_matrix(stiffness)
    n = L.shape[0]
    d = np.asarray(mass.diagonal() if sp.issparse(mass) else np.diag(mass), dtype=np.float64)
    if i_max < 1:
        raise ValueError("i_max must be positive")
    if i_max > n:
        raise ValueError(f"i_max exceeds vertex count ({i_max} > {n})")
    if np.any(d <= 0):
        raise ValueError("mass matrix must have a strictly positive diagonal")
    if abs(L - L.T).max() if L.nnz else 0:
        raise ValueError("stiffness matrix is not symmetric")

    if n <= DENSE_LIMIT or (n <= DENSE_MAX and 10 * i_max > n):
        s = 1.0 / np.sqrt(d)
        C = L.toarray() * s[:, None] * s[None, :]
        C = 0.5 * (C + C.T)
        evals, y = scipy.linalg.eigh(C, subset_by_index=[0, i_max - 1], driver="evr")
        vecs = y * s[:, None]
    else:
        evals, vecs = _shift_invert(L, d, i_max)

    order = np.argsort(evals, kind="stable")
    evals = np.ascontiguousarray(evals[order])
    vecs = fix_signs(vecs[:, order])
    return Basis(evals, np.ascontiguousarray(vecs), d.copy())


def _shift_invert(L, d, i_max):
    n = L.shape[0]
    M = sp.diags(d).tocsc()
    scale = float(np.max(L.diagonal() / d))
    sigma = -1e-6 * scale
    v0 = np.random.default_rng(0).standard_normal(n)
    # extra modes so a degenerate cluster straddling i_max is captured whole
    k = min(n - 1, i_max + max(16, i_max // 5))
    try:
        _, vecs = eigsh(
            L.tocsc(), k=k, M=M, sigma=sigma, which="LM", v0=v0,
            tol=ITERATIVE_TOL, maxiter=10 * i_max,
        )
    except ArpackNoConvergence as exc:
        raise EigenSolverError(
            f"Lanczos did not converge to {i_max} eigenpairs within {10 * i_max} iterations"
        ) from exc
    # Rayleigh-Ritz on the converged subspace
    Lp = vecs.T @ (L @ vecs)
    Mp = (vecs * d[:, None]).T @ vecs
    evals, c = scipy.linalg.eigh(0.5 * (Lp + Lp.T), 0.5 * (Mp + Mp.T))
    return evals[:i_max], vecs @ c[:, :i_max]


def mesh_basis(mesh: Mesh, i_max: int, normalization: str = "geometric") -> Basis:
    """Cotangent-Laplacian eigenbasis of a mesh in one call."""
    if i_max > mesh.n_vertices:
        raise ValueError(f"i_max exceeds vertex count ({i_max} > {mesh.n_vertices})")
    L, M = assemble_laplacian(cotangent_weights(mesh), vertex_weights(mesh), normalization)
    return eigenbasis(L, M, i_max)
