"""Noise injection, wavelet-domain noise levels and hard-threshold denoising.

Noise is white in Slepian space. Random numbers come from numpy's Philox
counter-based bit generator seeded with the 64-bit ``seed``; normal variates
use numpy's ziggurat sampler. Draws are consumed in Slepian-rank order
``p = 1..N``, so a seed reproduces the same noise on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harmonic import IdentityMismatch, unwrap
from .laplacian import Basis
from .slepian import SlepianBasis, SlepianCoeffs, slepian_functions
from .transform import WaveletCoefficients, analysis, synthesis
from .wavelets import WaveletKernels

__all__ = [
    "NoiseModel",
    "ThresholdPolicy",
    "add_white_noise",
    "noise_sigma_fields",
    "hard_threshold",
    "denoise",
    "snr_db",
    "scale_labels",
]


@dataclass(frozen=True)
class NoiseModel:
    """White Gaussian noise in Slepian space.

    Either ``sigma`` is given directly, or ``target_snr_db`` (gamma) fixes it
    from the signal as ``sigma^2 = 10**(-gamma/10) * sum_p s_p^2 / N``.
    """

    sigma: float | None = None
    seed: int = 0
    target_snr_db: float | None = None

    def __post_init__(self):
        if self.sigma is None and self.target_snr_db is None:
            raise ValueError("give either sigma or target_snr_db")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def sigma_for(self, signal) -> float:
        if self.target_snr_db is None:
            return float(self.sigma)
        s = unwrap(signal)
        energy = float(np.sum(s**2))
        if energy == 0:
            raise ValueError("noise level is undefined for a zero signal at a target SNR")
        return math.sqrt(10 ** (-self.target_snr_db / 10) * energy / len(s))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(int(self.seed)))


@dataclass(frozen=True)
class ThresholdPolicy:
    """Hard threshold at ``n_sigma`` times the local noise standard deviation.

    ``n_sigma = 0`` is accepted as the keep-everything limit.
    """

    n_sigma: float = 2.0

    def __post_init__(self):
        if not self.n_sigma >= 0 or not math.isfinite(self.n_sigma):
            raise ValueError(f"n_sigma must be a non-negative finite number, got {self.n_sigma}")


def add_white_noise(s, model: NoiseModel) -> SlepianCoeffs:
    """``z_p = s_p + n_p`` with ``n_p ~ N(0, sigma^2)`` i.i.d."""
    c = unwrap(s)
    sigma = model.sigma_for(c)
    noise = model.generator().standard_normal(len(c))
    return SlepianCoeffs(c + sigma * noise, s.source if isinstance(s, SlepianCoeffs) else None)


def scale_labels(kernels: WaveletKernels) -> list:
    """``["scaling", j0, ..., J]``, the order used for per-scale results."""
    return ["scaling", *kernels.scales]


def _kernel_rows(kernels: WaveletKernels) -> np.ndarray:
    return np.vstack([kernels.scaling[None, :], kernels.wavelets])


def noise_sigma_fields(
    kernels: WaveletKernels,
    basis: Basis,
    sbasis: SlepianBasis,
    sigma: float,
    slepians: np.ndarray | None = None,
) -> dict:
    """Per-vertex noise standard deviation of each scale's coefficient map.

    ``sigma_phi(x) = sigma * sqrt(sum_{p <= N} phi_p^2 S_p(x)^2)``. Pass
    precomputed spatial Slepian functions as ``slepians`` to skip rebuilding them.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    S = slepian_functions(basis, sbasis, kernels.N) if slepians is None else slepians
    var = (S**2) @ (_kernel_rows(kernels) ** 2).T
    return {label: sigma * np.sqrt(var[:, k]) for k, label in enumerate(scale_labels(kernels))}


def hard_threshold(maps: np.ndarray, levels: np.ndarray, n_sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero entries with ``|map| < n_sigma * level``; returns ``(kept_maps, keep_mask)``.

    ``maps`` and ``levels`` broadcast against each other (vertices by scales).
    """
    keep = np.abs(maps) >= n_sigma * levels
    return np.where(keep, maps, 0.0), keep


def denoise(
    z,
    kernels: WaveletKernels,
    basis: Basis,
    sbasis: SlepianBasis,
    sigma: float,
    policy: ThresholdPolicy,
    slepians: np.ndarray | None = None,
) -> tuple[SlepianCoeffs, dict]:
    """Hard-threshold the spatial wavelet maps of ``z`` and resynthesise.

    Each scale's map ``Z(x)`` is zeroed where ``|Z(x)| < n_sigma * sigma_phi(x)``,
    projected back onto ``S_1..S_N`` and the wavelet synthesis is applied.

    Returns
    -------
    d : SlepianCoeffs of length N
    report : dict with ``kept_fraction`` per scale (share of mesh vertices kept)
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    c = unwrap(z)
    if c.shape != (kernels.N,):
        raise ValueError(f"{c.size} coefficients for a tiling of bandlimit {kernels.N}")
    if isinstance(z, SlepianCoeffs) and z.source is not None and z.source != sbasis.digest:
        raise IdentityMismatch("noisy coefficients belong to a different Slepian basis")
    S = slepian_functions(basis, sbasis, kernels.N) if slepians is None else slepians
    w = analysis(kernels, c)
    coeffs = np.vstack([w.scaling[None, :], w.wavelets])
    maps = S @ coeffs.T
    levels = noise_sigma_fields(kernels, basis, sbasis, sigma, S)
    sigma_phi = np.column_stack([levels[k] for k in scale_labels(kernels)])
    kept, keep = hard_threshold(maps, sigma_phi, policy.n_sigma)
    projected = (kept * basis.weights[:, None]).T @ S
    thresholded = WaveletCoefficients(projected[0], projected[1:], kernels.digest, kernels.j0)
    d = synthesis(kernels, thresholded)
    fractions = keep.mean(axis=0)
    report = {
        "kept_fraction": {
            ("scaling" if k == "scaling" else f"wavelet_{k}"): float(fractions[i])
            for i, k in enumerate(scale_labels(kernels))
        }
    }
    return SlepianCoeffs(d.values, sbasis.digest), report


def snr_db(reference, estimate) -> float:
    """``10 log10(|ref|^2 / |est - ref|^2)``; ``inf`` when the two are identical."""
    r, e = unwrap(reference), unwrap(estimate)
    if r.shape != e.shape:
        raise ValueError(f"length mismatch: {r.shape} vs {e.shape}")
    signal = float(np.sum(r**2))
    if signal == 0:
        raise ValueError("SNR is undefined for a zero reference")
    error = float(np.sum((e - r) ** 2))
    if error == 0:
        return math.inf
    return 10 * math.log10(signal / error)
