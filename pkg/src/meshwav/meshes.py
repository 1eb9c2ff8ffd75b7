"""Synthetic test meshes: icosphere, torus, planar patches and a tetrahedron."""

from __future__ import annotations

import numpy as np

from .mesh_io import Mesh, RegionMask, region_from_indices

__all__ = [
    "icosphere",
    "torus",
    "tetrahedron",
    "grid_patch",
    "random_patch",
    "half_sphere_region",
]


def icosphere(level: int = 3, radius: float = 1.0) -> Mesh:
    """Subdivided icosahedron with vertices projected onto a sphere.

    Level ``k`` has ``10 * 4**k + 2`` vertices.
    """
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    v = [np.asarray(p, dtype=float) / np.linalg.norm(p) for p in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = v[a] + v[b]
                v.append(m / np.linalg.norm(m))
                cache[key] = len(v) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return Mesh.from_arrays(radius * np.array(v), faces)


def torus(n_major: int = 32, n_minor: int = 16, major: float = 1.0, minor: float = 0.35) -> Mesh:
    u = 2 * np.pi * np.arange(n_major) / n_major
    w = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, ww = np.meshgrid(u, w, indexing="ij")
    x = (major + minor * np.cos(ww)) * np.cos(uu)
    y = (major + minor * np.cos(ww)) * np.sin(uu)
    z = minor * np.sin(ww)
    verts = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            d = i * n_minor + (j + 1) % n_minor
            faces += [(a, b, c), (a, c, d)]
    return Mesh.from_arrays(verts, faces)


def tetrahedron() -> Mesh:
    """Regular tetrahedron centred at the origin, outward CCW faces."""
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    faces = [(0, 2, 3), (0, 3, 1), (0, 1, 2), (1, 3, 2)]
    return Mesh.from_arrays(v, faces)


def grid_patch(nx: int = 5, ny: int = 5, height=None) -> Mesh:
    """Triangulated unit square in the z=0 plane (optionally lifted by ``height(x, y)``)."""
    x, y = np.meshgrid(np.linspace(0, 1, nx), np.linspace(0, 1, ny), indexing="ij")
    z = np.zeros_like(x) if height is None else height(x, y)
    verts = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a, b = i * ny + j, (i + 1) * ny + j
            c, d = (i + 1) * ny + j + 1, i * ny + j + 1
            faces += [(a, b, c), (a, c, d)]
    return Mesh.from_arrays(verts, faces)


def random_patch(n: int = 10, seed: int = 0) -> Mesh:
    """Delaunay triangulation of random planar points lifted onto a bumpy surface."""
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    tri = Delaunay(pts)
    faces = tri.simplices.copy()
    # Delaunay orientation is not guaranteed, make every face CCW from +z
    p = pts[faces]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (
        p[:, 2, 0] - p[:, 0, 0]
    )
    faces[cross < 0] = faces[cross < 0][:, [0, 2, 1]]
    z = 0.2 * np.sin(3 * pts[:, 0]) * np.cos(2 * pts[:, 1])
    return Mesh.from_arrays(np.column_stack([pts, z]), faces)


def half_sphere_region(mesh: Mesh, axis: int = 2) -> RegionMask:
    """Vertices with a strictly positive coordinate along ``axis``."""
    return region_from_indices(mesh, np.flatnonzero(mesh.vertices[:, axis] > 0))
