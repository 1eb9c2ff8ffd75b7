"""Slepian wavelet analysis and synthesis.

Both directions work on Slepian coefficients ``p = 1..N``: a sifting
convolution with a kernel is a pointwise product on the Slepian line, so
analysis multiplies by each kernel and synthesis sums the kernel-weighted
coefficients. Spatial maps are rendered separately by
:func:`coefficient_field`.

A note on reading the scale index: the Slepian line is ordered by
concentration, not by frequency, so ``j`` measures how localised within the
region a wavelet is rather than its spatial scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .harmonic import IdentityMismatch, unwrap, write_coefficients_csv
from .laplacian import Basis
from .slepian import SlepianBasis, SlepianCoeffs, slepian_synthesis
from .wavelets import WaveletKernels

__all__ = [
    "WaveletCoefficients",
    "analysis",
    "synthesis",
    "coefficient_field",
    "parseval_check",
    "write_bundle",
]


@dataclass(frozen=True, eq=False)
class WaveletCoefficients:
    """Scaling coefficients ``(N,)`` and wavelet coefficients ``(J - j0 + 1, N)``."""

    scaling: np.ndarray
    wavelets: np.ndarray
    kernel_digest: bytes
    j0: int
    source: bytes | None = None

    def wavelet(self, j: int) -> np.ndarray:
        k = j - self.j0
        if not 0 <= k < len(self.wavelets):
            raise IndexError(f"scale {j} outside [{self.j0}, {self.j0 + len(self.wavelets) - 1}]")
        return self.wavelets[k]

    def select(self, which) -> np.ndarray:
        """``"scaling"`` or an integer wavelet scale."""
        if which == "scaling":
            return self.scaling
        if isinstance(which, tuple) and which[0] == "wavelet":
            which = which[1]
        return self.wavelet(int(which))


def analysis(kernels: WaveletKernels, f) -> WaveletCoefficients:
    """``W^phi_p = phi_p f_p`` for the scaling kernel and every wavelet."""
    c = unwrap(f)
    if c.shape != (kernels.N,):
        raise ValueError(f"{c.size} Slepian coefficients for a tiling of bandlimit {kernels.N}")
    source = f.source if isinstance(f, SlepianCoeffs) else None
    return WaveletCoefficients(kernels.scaling * c, kernels.wavelets * c, kernels.digest, kernels.j0, source)


def synthesis(kernels: WaveletKernels, coeffs: WaveletCoefficients) -> SlepianCoeffs:
    """``f_p = Phi_p W^Phi_p + sum_j Psi^j_p W^Psi^j_p``."""
    if coeffs.kernel_digest != kernels.digest:
        raise IdentityMismatch("coefficients from different tiling")
    if coeffs.scaling.shape != (kernels.N,) or coeffs.wavelets.shape != kernels.wavelets.shape:
        raise ValueError("coefficient shapes do not match the tiling")
    values = kernels.scaling * coeffs.scaling + np.sum(kernels.wavelets * coeffs.wavelets, axis=0)
    return SlepianCoeffs(values, coeffs.source)


def coefficient_field(basis: Basis, sbasis: SlepianBasis, coeffs: WaveletCoefficients, which) -> np.ndarray:
    """Spatial map ``sum_{p <= N} W^phi_p S_p(x)`` of one scale."""
    return slepian_synthesis(basis, sbasis, SlepianCoeffs(coeffs.select(which), coeffs.source))


def parseval_check(kernels: WaveletKernels, f) -> tuple[float, float]:
    """Energy of ``f`` and of its wavelet and scaling coefficients."""
    w = analysis(kernels, f)
    energy_in = float(np.sum(unwrap(f) ** 2))
    energy_out = float(np.sum(w.scaling**2) + np.sum(w.wavelets**2))
    return energy_in, energy_out


def write_bundle(kernels: WaveletKernels, coeffs: WaveletCoefficients, directory, hashes: dict | None = None) -> list[Path]:
    """Write ``manifest.json`` plus ``scaling.csv`` and ``wavelet_<j>.csv``.

    Returns the paths written.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    files = {"scaling": "scaling.csv"}
    path = out / "scaling.csv"
    write_coefficients_csv(coeffs.scaling, path)
    written.append(path)
    for j in kernels.scales:
        name = f"wavelet_{j}.csv"
        write_coefficients_csv(coeffs.wavelet(j), out / name)
        files[f"wavelet_{j}"] = name
        written.append(out / name)
    manifest = {
        "lambda": kernels.lam,
        "j0": kernels.j0,
        "J": kernels.J,
        "N": kernels.N,
        "kernel_sha256": kernels.digest.hex(),
        "files": files,
    }
    if coeffs.source is not None:
        manifest["slepian_sha256"] = coeffs.source.hex()
    manifest.update(hashes or {})
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    return written
