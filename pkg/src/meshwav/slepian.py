"""Slepian spatial-spectral concentration on a region of a mesh.

Region integrals use the same vertex quadrature as the global inner product,
restricted to the region's vertices.
"""

from __future__ import annotations

import hashlib
import math
import struct
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .harmonic import Coefficients, HarmonicCoeffs, IdentityMismatch, unwrap
from .laplacian import Basis, fix_signs
from .mesh_io import RegionMask

__all__ = [
    "ConcentrationMatrix",
    "SlepianBasis",
    "SlepianCoeffs",
    "IllConditioned",
    "ConcentrationWarning",
    "build_concentration_matrix",
    "solve_concentration",
    "slepian_basis",
    "shannon_number",
    "slepian_functions",
    "slepian_field",
    "slepian_analysis",
    "slepian_synthesis",
    "slepian_to_harmonic",
    "harmonic_to_slepian",
]

_SLEPIAN_MAGIC = b"MWS1"
# below this concentration the region-restricted estimate divides by ~0
RESTRICTED_FLOOR = 1e-6


class IllConditioned(ValueError):
    pass


class ConcentrationWarning(UserWarning):
    """Concentration eigenvalues indistinguishable from 0 or 1 in double precision."""


class SlepianCoeffs(Coefficients):
    pass


@dataclass(frozen=True, eq=False)
class ConcentrationMatrix:
    matrix: np.ndarray
    region: RegionMask
    region_area: float
    basis_digest: bytes


@dataclass(frozen=True, eq=False)
class SlepianBasis:
    """Solution of the concentration eigenproblem ``D s = mu s``.

    Attributes
    ----------
    eigenvalues : (i_max,) concentration ratios, descending
    coefficients : (i_max, i_max) harmonic coefficients, column ``p`` is ``S_p``
    shannon : rounded Shannon number N
    region : the RegionMask, or None after loading from disk
    """

    eigenvalues: np.ndarray
    coefficients: np.ndarray
    shannon: int
    region_area: float
    total_area: float
    basis_digest: bytes
    region_digest: bytes
    region: RegionMask | None = None

    @property
    def i_max(self) -> int:
        return len(self.eigenvalues)

    @property
    def shannon_exact(self) -> float:
        return self.region_area / self.total_area * self.i_max

    @cached_property
    def digest(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()

    def to_bytes(self) -> bytes:
        header = _SLEPIAN_MAGIC + struct.pack(
            "<QQdd", self.i_max, self.shannon, self.region_area, self.total_area
        )
        return b"".join(
            [
                header,
                self.basis_digest,
                self.region_digest,
                np.ascontiguousarray(self.eigenvalues, dtype="<f8").tobytes(),
                np.asarray(self.coefficients, dtype="<f8").tobytes(order="F"),
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SlepianBasis":
        if data[:4] != _SLEPIAN_MAGIC:
            raise ValueError("not an MWS1 Slepian file")
        i_max, shannon, area_r, area_m = struct.unpack_from("<QQdd", data, 4)
        off = 4 + 32
        expected = off + 64 + 8 * (i_max + i_max * i_max)
        if len(data) != expected:
            raise ValueError(f"Slepian file has {len(data)} bytes, expected {expected}")
        basis_digest, region_digest = data[off : off + 32], data[off + 32 : off + 64]
        off += 64
        evals = np.frombuffer(data, "<f8", i_max, off).astype(np.float64)
        off += 8 * i_max
        S = np.frombuffer(data, "<f8", i_max * i_max, off).reshape((i_max, i_max), order="F")
        return cls(evals, np.array(S, dtype=np.float64, order="C"), shannon, area_r, area_m,
                   basis_digest, region_digest)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "SlepianBasis":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def build_concentration_matrix(basis: Basis, region: RegionMask) -> ConcentrationMatrix:
    """``D_ij = sum_{v in R} a_v z_i(v) z_j(v)``."""
    if region.n_vertices != basis.n:
        raise ValueError(f"region is for a {region.n_vertices}-vertex mesh, basis has {basis.n}")
    Zr = basis.vectors[region.indices]
    ar = basis.weights[region.indices]
    D = (Zr * ar[:, None]).T @ Zr
    D = 0.5 * (D + D.T)
    return ConcentrationMatrix(D, region, float(ar.sum()), basis.digest)


def shannon_number(i_max: int, region_area: float, total_area: float) -> tuple[int, float]:
    """Shannon number ``(A_R / A_M) * i_max``, rounded half away from zero.

    Returns the integer and the unrounded value.
    """
    if not (region_area > 0 and total_area > 0):
        raise ValueError("areas must be positive")
    if region_area > total_area * (1 + 1e-12):
        raise ValueError("region area exceeds total area")
    exact = region_area / total_area * i_max
    return int(math.floor(exact + 0.5)), exact


def solve_concentration(D: ConcentrationMatrix, total_area: float | None = None) -> SlepianBasis:
    """Dense eigendecomposition of D, eigenpairs sorted by decreasing concentration."""
    M = D.matrix
    i_max = len(M)
    try:
        evals, vecs = scipy.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"concentration eigensolver failed: {exc}") from exc
    order = np.argsort(-evals, kind="stable")
    evals, vecs = evals[order], fix_signs(vecs[:, order])

    if evals[0] > 1 + 1e-10 or evals[-1] < -1e-10:
        raise ValueError(
            f"concentration eigenvalues outside [0, 1]: [{evals[-1]:.3e}, {evals[0]:.3e}]"
        )
    if evals[0] >= 1 - 1e-12 or evals[-1] <= 0:
        warnings.warn(
            "concentration eigenvalues reach the ends of (0, 1) at working precision "
            f"(max {evals[0]:.16f}, min {evals[-1]:.3e})",
            ConcentrationWarning,
            stacklevel=2,
        )
    if total_area is None:
        raise ValueError("total_area is required")
    N, _ = shannon_number(i_max, D.region_area, total_area)
    return SlepianBasis(
        np.ascontiguousarray(evals), np.ascontiguousarray(vecs), N, D.region_area, total_area,
        D.basis_digest, D.region.digest, D.region,
    )


def slepian_basis(basis: Basis, region: RegionMask) -> SlepianBasis:
    D = build_concentration_matrix(basis, region)
    return solve_concentration(D, basis.total_area)


def _check_pair(basis: Basis, sbasis: SlepianBasis) -> None:
    if sbasis.i_max != basis.i_max:
        raise ValueError(f"Slepian basis has {sbasis.i_max} modes, basis has {basis.i_max}")
    if sbasis.basis_digest != basis.digest:
        raise IdentityMismatch("Slepian basis was built from a different mesh basis")


def slepian_functions(basis: Basis, sbasis: SlepianBasis, P: int | None = None) -> np.ndarray:
    """Spatial Slepian functions ``S_1 .. S_P`` as columns of an (n, P) array."""
    _check_pair(basis, sbasis)
    P = sbasis.i_max if P is None else P
    return basis.vectors @ sbasis.coefficients[:, :P]


def slepian_field(basis: Basis, sbasis: SlepianBasis, p: int) -> np.ndarray:
    """Spatial Slepian function ``S_p`` for a 1-based rank ``p``."""
    if not 1 <= p <= sbasis.i_max:
        raise IndexError(f"Slepian index {p} outside [1, {sbasis.i_max}]")
    _check_pair(basis, sbasis)
    return basis.vectors @ sbasis.coefficients[:, p - 1]


def slepian_analysis(
    basis: Basis,
    sbasis: SlepianBasis,
    field,
    mode: str = "global",
    P: int | None = None,
    region: RegionMask | None = None,
) -> SlepianCoeffs:
    """Slepian coefficients ``f_p``, ``p = 1..P``.

    ``mode="global"`` projects over the whole mesh. ``mode="region-restricted"``
    integrates over the region only and divides by ``mu_p``, which is only a
    good estimate for fields well concentrated in the region.
    """
    P = sbasis.i_max if P is None else P
    if not 1 <= P <= sbasis.i_max:
        raise ValueError(f"P={P} outside [1, {sbasis.i_max}]")
    f = np.asarray(field, dtype=np.float64)
    if f.shape != (basis.n,):
        raise ValueError(f"field length {f.size} does not match basis size {basis.n}")
    S = slepian_functions(basis, sbasis, P)
    if mode == "global":
        values = S.T @ (basis.weights * f)
    elif mode == "region-restricted":
        region = region if region is not None else sbasis.region
        if region is None:
            raise ValueError("region-restricted analysis needs the region mask")
        if region.digest != sbasis.region_digest:
            raise IdentityMismatch("region does not match the Slepian basis")
        mu = sbasis.eigenvalues[:P]
        if np.any(mu < RESTRICTED_FLOOR):
            p = int(np.argmax(mu < RESTRICTED_FLOOR)) + 1
            raise IllConditioned(
                f"ill-conditioned concentration eigenvalue mu_{p} = {mu[p - 1]:.3e}"
            )
        r = region.indices
        values = S[r].T @ (basis.weights[r] * f[r]) / mu
    else:
        raise ValueError(f"unknown analysis mode {mode!r}")
    return SlepianCoeffs(values, sbasis.digest)


def slepian_synthesis(basis: Basis, sbasis: SlepianBasis, coeffs) -> np.ndarray:
    """``f(x) = sum_{p <= P} f_p S_p(x)``."""
    c = unwrap(coeffs, sbasis.digest, "Slepian basis")
    if len(c) > sbasis.i_max:
        raise ValueError(f"{len(c)} Slepian coefficients for {sbasis.i_max} modes")
    _check_pair(basis, sbasis)
    return basis.vectors @ (sbasis.coefficients[:, : len(c)] @ c)


def slepian_to_harmonic(sbasis: SlepianBasis, coeffs) -> HarmonicCoeffs:
    """``f_i = sum_p f_p (S_p)_i``."""
    c = unwrap(coeffs, sbasis.digest, "Slepian basis")
    if len(c) > sbasis.i_max:
        raise ValueError(f"{len(c)} Slepian coefficients for {sbasis.i_max} modes")
    return HarmonicCoeffs(sbasis.coefficients[:, : len(c)] @ c, sbasis.basis_digest)


def harmonic_to_slepian(sbasis: SlepianBasis, coeffs, P: int | None = None) -> SlepianCoeffs:
    """``f_p = sum_i f_i (S_p)_i`` for ``p = 1..P``."""
    c = unwrap(coeffs, sbasis.basis_digest)
    if len(c) != sbasis.i_max:
        raise ValueError(f"{len(c)} harmonic coefficients for {sbasis.i_max} modes")
    P = sbasis.i_max if P is None else P
    return SlepianCoeffs(sbasis.coefficients[:, :P].T @ c, sbasis.digest)
