"""Triangle mesh parsing, validation, region masks and per-vertex field I/O.

All indices are 0-based in every file format handled here.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import BinaryIO, Iterable

import numpy as np

__all__ = [
    "MeshError",
    "Mesh",
    "RegionMask",
    "parse_mesh",
    "read_mesh",
    "write_off",
    "vertex_normal_z_field",
    "load_region",
    "region_from_indices",
    "write_field",
    "read_field_csv",
    "check_field",
]

# relative to the squared longest edge of the face
_DEGENERATE_AREA_RTOL = 1e-14


class MeshError(ValueError):
    """Raised for malformed mesh files, invalid topology or bad fields."""


@dataclass(frozen=True, eq=False)
class Mesh:
    """A validated triangle mesh.

    Parameters
    ----------
    vertices : (n, 3) float64 array
    faces : (m, 3) int64 array of counter-clockwise vertex index triples

    Construct through :func:`Mesh.from_arrays` (or the parsers) so the
    topology checks run.
    """

    vertices: np.ndarray
    faces: np.ndarray
    # (E, 2) sorted unordered edges and their incident face count
    edges: np.ndarray = field(repr=False)
    edge_face_count: np.ndarray = field(repr=False)
    # per face, the edge index of the edge opposite corner k
    face_edges: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, vertices, faces) -> "Mesh":
        v = np.array(vertices, dtype=np.float64)
        f = np.array(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must have shape (n, 3)")
        if f.size == 0:
            f = f.reshape(0, 3)
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError("non-triangle face: faces must have shape (m, 3)")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinate")
        n = len(v)
        if f.size and (f.min() < 0 or f.max() >= n):
            bad = int(np.argmax((f < 0).any(axis=1) | (f >= n).any(axis=1)))
            raise MeshError(f"face {bad} has a vertex index out of range [0, {n})")
        repeated = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
        if repeated.any():
            raise MeshError(f"face {int(np.argmax(repeated))} repeats a vertex")

        # corner k is opposite the edge (k+1, k+2)
        half = np.stack([f[:, [1, 2]], f[:, [2, 0]], f[:, [0, 1]]], axis=1).reshape(-1, 2)
        half = np.sort(half, axis=1)
        edges, inverse, counts = np.unique(half, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        if counts.size and counts.max() > 2:
            e = edges[int(np.argmax(counts))]
            raise MeshError(
                f"non-manifold edge ({e[0]}, {e[1]}) shared by {counts.max()} faces"
            )

        v.setflags(write=False)
        f.setflags(write=False)
        face_edges = inverse.reshape(-1, 3)
        mesh = cls(v, f, edges, counts, face_edges)
        area = mesh.face_areas
        longest = np.max(mesh.edge_lengths[face_edges], axis=1) if len(f) else area
        degenerate = area <= _DEGENERATE_AREA_RTOL * longest**2
        if degenerate.any():
            raise MeshError(f"degenerate face {int(np.argmax(degenerate))} has zero area")
        return mesh

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def face_areas(self) -> np.ndarray:
        """Face areas from the cross-product formula."""
        return 0.5 * np.linalg.norm(self._face_cross, axis=1)

    @cached_property
    def _face_cross(self) -> np.ndarray:
        p = self.vertices[self.faces]
        return np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
        return np.linalg.norm(d, axis=1)

    @property
    def boundary_edges(self) -> np.ndarray:
        return self.edges[self.edge_face_count == 1]

    @property
    def is_closed(self) -> bool:
        return bool(np.all(self.edge_face_count == 2))

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def isolated_vertices(self) -> np.ndarray:
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.faces.reshape(-1)] = True
        return np.flatnonzero(~used)


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Sorted, deduplicated vertex indices of a region."""

    indices: np.ndarray
    n_vertices: int

    def __len__(self) -> int:
        return len(self.indices)

    def as_bool(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.indices] = True
        return mask

    @cached_property
    def digest(self) -> bytes:
        h = hashlib.sha256()
        h.update(np.uint64(self.n_vertices).tobytes())
        h.update(self.indices.astype("<u8").tobytes())
        return h.digest()


def region_from_indices(mesh: Mesh | int, indices: Iterable[int]) -> RegionMask:
    """Validate region indices against a mesh (or a plain vertex count)."""
    n = mesh if isinstance(mesh, (int, np.integer)) else mesh.n_vertices
    idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices)
    if idx.size == 0:
        raise MeshError("region is empty")
    if idx.dtype.kind not in "iu":
        raise MeshError("region indices must be integers")
    idx = np.unique(idx.astype(np.int64))
    if idx[0] < 0 or idx[-1] >= n:
        bad = idx[0] if idx[0] < 0 else idx[-1]
        raise MeshError(f"region index {bad} out of range [0, {n})")
    idx.setflags(write=False)
    return RegionMask(idx, int(n))


def _read_source(source):
    if isinstance(source, os.PathLike):
        with open(source, "rb") as fh:
            return fh.read()
    return source.read() if hasattr(source, "read") else source


def load_region(mesh: Mesh | int, source) -> RegionMask:
    """Read a region from a JSON document ``{"vertices": [i, ...]}``.

    ``source`` is a path, a readable stream, or the document as str/bytes.
    """
    data = _read_source(source)
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MeshError(f"malformed region JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("vertices"), list):
        raise MeshError('region JSON must be an object with a "vertices" list')
    values = doc["vertices"]
    if not all(isinstance(i, int) and not isinstance(i, bool) for i in values):
        raise MeshError("region indices must be integers")
    return region_from_indices(mesh, np.array(values, dtype=np.int64))


# --------------------------------------------------------------------------
# parsers


def _lines(data: bytes):
    """Yield whitespace-split tokens of non-empty, non-comment lines."""
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_off(data: bytes):
    it = _lines(data)
    try:
        lineno, tokens = next(it)
    except StopIteration:
        raise MeshError("empty OFF file") from None
    if tokens[0] != "OFF":
        raise MeshError(f"line {lineno}: expected OFF header")
    tokens = tokens[1:]
    if not tokens:
        lineno, tokens = next(it, (lineno, []))
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
    except (IndexError, ValueError):
        raise MeshError(f"line {lineno}: malformed OFF counts") from None
    vertices, faces = [], []
    for _ in range(nv):
        lineno, tokens = next(it, (None, None))
        if tokens is None:
            raise MeshError("OFF file ended before all vertices were read")
        vertices.append(_floats(tokens[:3], lineno))
    for _ in range(nf):
        lineno, tokens = next(it, (None, None))
        if tokens is None:
            raise MeshError("OFF file ended before all faces were read")
        k = _int(tokens[0], lineno)
        if k != 3:
            raise MeshError(f"line {lineno}: non-triangle face with {k} vertices")
        if len(tokens) < 4:
            raise MeshError(f"line {lineno}: truncated face")
        faces.append([_int(t, lineno) for t in tokens[1:4]])
    return vertices, faces


def _parse_obj(data: bytes):
    vertices, faces = [], []
    for lineno, tokens in _lines(data):
        tag = tokens[0]
        if tag == "v":
            vertices.append(_floats(tokens[1:4], lineno))
        elif tag == "f":
            corners = tokens[1:]
            if len(corners) != 3:
                raise MeshError(f"line {lineno}: non-triangle face with {len(corners)} vertices")
            idx = []
            for c in corners:
                i = _int(c.split("/", 1)[0], lineno)
                # OBJ is 1-based; negative indices are relative to the end
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            faces.append(idx)
    return vertices, faces


def _parse_ply(data: bytes):
    text = data.decode("utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshError("line 1: expected ply magic")
    elements: list[tuple[str, int, list[tuple[str, ...]]]] = []
    fmt = None
    body = None
    for lineno, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        if tokens[0] == "format":
            fmt = tokens[1] if len(tokens) > 1 else None
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise MeshError(f"line {lineno}: property before element")
            elements[-1][2].append(tuple(tokens[1:]))
        elif tokens[0] == "end_header":
            body = lineno
            break
        else:
            raise MeshError(f"line {lineno}: unknown header keyword {tokens[0]!r}")
    if fmt != "ascii":
        raise MeshError(f"only ascii PLY is supported, got format {fmt!r}")
    if body is None:
        raise MeshError("PLY header has no end_header")

    rows = ((n, raw.split()) for n, raw in enumerate(lines[body:], start=body + 1) if raw.strip())
    vertices, faces = [], []
    for name, count, props in elements:
        for _ in range(count):
            lineno, tokens = next(rows, (None, None))
            if tokens is None:
                raise MeshError(f"PLY body ended inside element {name!r}")
            if name == "vertex":
                names = [p[-1] for p in props]
                try:
                    vertices.append(
                        _floats([tokens[names.index(c)] for c in "xyz"], lineno)
                    )
                except (ValueError, IndexError):
                    raise MeshError(f"line {lineno}: malformed vertex") from None
            elif name == "face":
                k = _int(tokens[0], lineno)
                if k != 3:
                    raise MeshError(f"line {lineno}: non-triangle face with {k} vertices")
                faces.append([_int(t, lineno) for t in tokens[1:4]])
    return vertices, faces


def _floats(tokens, lineno) -> list[float]:
    if len(tokens) != 3:
        raise MeshError(f"line {lineno}: expected 3 coordinates")
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise MeshError(f"line {lineno}: malformed coordinate") from None


def _int(token, lineno) -> int:
    try:
        return int(token)
    except ValueError:
        raise MeshError(f"line {lineno}: malformed integer {token!r}") from None


_PARSERS = {"off": _parse_off, "obj": _parse_obj, "ply": _parse_ply, "ply-ascii": _parse_ply}


def parse_mesh(source, format: str) -> Mesh:
    """Parse a triangle mesh from bytes or a binary stream.

    Parameters
    ----------
    source : bytes or binary file object
    format : {"OFF", "OBJ", "PLY-ascii"}

    Quads and larger polygons are rejected rather than split.
    """
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        parser = _PARSERS[format.lower()]
    except KeyError:
        raise MeshError(f"unknown mesh format {format!r}") from None
    try:
        vertices, faces = parser(data)
    except UnicodeDecodeError:
        raise MeshError("mesh file is not valid UTF-8 text") from None
    if not vertices:
        raise MeshError("mesh has no vertices")
    return Mesh.from_arrays(np.array(vertices).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def read_mesh(path) -> Mesh:
    """Read a mesh file, picking the format from the extension."""
    path = str(path)
    ext = path.rsplit(".", 1)[-1].lower()
    if ext not in ("off", "obj", "ply"):
        raise MeshError(f"cannot infer mesh format from {path!r}")
    with open(path, "rb") as fh:
        return parse_mesh(fh, ext)


def write_off(mesh: Mesh, sink: BinaryIO) -> None:
    out = [f"OFF\n{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}\n"]
    out.extend(f"{x!r} {y!r} {z!r}\n" for x, y, z in mesh.vertices.tolist())
    out.extend(f"3 {a} {b} {c}\n" for a, b, c in mesh.faces.tolist())
    sink.write("".join(out).encode("utf-8"))


# --------------------------------------------------------------------------
# fields


def check_field(mesh: Mesh, values) -> np.ndarray:
    """Return ``values`` as a float64 vector after checking length and finiteness."""
    f = np.asarray(values, dtype=np.float64)
    if f.ndim != 1 or len(f) != mesh.n_vertices:
        raise MeshError(
            f"field length {f.shape[0] if f.ndim else 0} does not match vertex count {mesh.n_vertices}"
        )
    if not np.all(np.isfinite(f)):
        raise MeshError(f"field has non-finite value at vertex {int(np.argmax(~np.isfinite(f)))}")
    return f


def vertex_normal_z_field(mesh: Mesh) -> np.ndarray:
    """z-component of area-weighted, unit-length per-vertex normals."""
    isolated = mesh.isolated_vertices()
    if isolated.size:
        raise MeshError(f"vertex {int(isolated[0])} has no incident face")
    # the cross product is already scaled by twice the face area
    cross = mesh._face_cross
    normals = np.zeros_like(mesh.vertices)
    for k in range(3):
        np.add.at(normals, mesh.faces[:, k], cross)
    norms = np.linalg.norm(normals, axis=1)
    if np.any(norms == 0):
        bad = int(np.argmax(norms == 0))
        raise MeshError(f"vertex {bad} has a vanishing normal")
    return np.clip(normals[:, 2] / norms, -1.0, 1.0)


def _format(x: float) -> str:
    # repr is the shortest string that round-trips a float64
    return repr(float(x))


def write_field(mesh: Mesh, values, format: str, sink, name: str = "field") -> None:
    """Write a per-vertex field as legacy ASCII VTK polydata or CSV.

    The field is validated before anything is written.
    """
    f = check_field(mesh, values)
    fmt = format.lower()
    if fmt in ("vtk", "vtk-legacy-ascii"):
        text = _vtk_text(mesh, f, name)
    elif fmt == "csv":
        text = "".join(_format(x) + "\n" for x in f)
    else:
        raise MeshError(f"unknown field format {format!r}")
    payload = text.encode("utf-8")
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "wb") as fh:
            fh.write(payload)
    elif isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(payload)


def _vtk_text(mesh: Mesh, f: np.ndarray, name: str) -> str:
    name = "".join(c if c.isalnum() or c in "_-" else "_" for c in name) or "field"
    out = [
        "# vtk DataFile Version 4.2\n",
        f"{name}\n",
        "ASCII\n",
        "DATASET POLYDATA\n",
        f"POINTS {mesh.n_vertices} double\n",
    ]
    out.extend(" ".join(map(_format, p)) + "\n" for p in mesh.vertices)
    out.append(f"POLYGONS {mesh.n_faces} {4 * mesh.n_faces}\n")
    out.extend(f"3 {a} {b} {c}\n" for a, b, c in mesh.faces.tolist())
    out.append(f"POINT_DATA {mesh.n_vertices}\n")
    out.append(f"SCALARS {name} double 1\n")
    out.append("LOOKUP_TABLE default\n")
    out.extend(_format(x) + "\n" for x in f)
    return "".join(out)


def read_field_csv(source) -> np.ndarray:
    """One float per line; ``source`` as for :func:`load_region`."""
    data = _read_source(source)
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    values = [float(line) for line in data.split("\n") if line.strip()]
    return np.array(values, dtype=np.float64)
