"""Translation and sifting convolution as products of spectral coefficients."""

from __future__ import annotations

import numpy as np

from .harmonic import Coefficients, HarmonicCoeffs, IdentityMismatch, unwrap
from .laplacian import Basis

__all__ = ["translate", "sift_convolve", "dirac_delta"]


def translate(basis: Basis, f, y: int) -> HarmonicCoeffs:
    """Translate ``f`` to vertex ``y``: ``(T_y f)_i = f_i z_i(y)``."""
    if not 0 <= y < basis.n:
        raise IndexError(f"vertex {y} out of range [0, {basis.n})")
    c = unwrap(f, basis.digest)
    if len(c) > basis.i_max:
        raise ValueError(f"{len(c)} coefficients for a basis of {basis.i_max} modes")
    return HarmonicCoeffs(c * basis.vectors[y, : len(c)], basis.digest)


def dirac_delta(basis: Basis, y: int) -> np.ndarray:
    """Per-vertex field of the delta at ``y``: ``1 / a_y`` there, zero elsewhere.

    Its forward transform has coefficients ``z_i(y)``.
    """
    if not 0 <= y < basis.n:
        raise IndexError(f"vertex {y} out of range [0, {basis.n})")
    d = np.zeros(basis.n)
    d[y] = 1.0 / basis.weights[y]
    return d


def sift_convolve(f, g, domain: str = "harmonic"):
    """Sifting convolution ``(f * g)_k = f_k g_k`` (coefficients are real).

    ``domain`` is "harmonic" or "slepian"; the product is the same, the
    domain only selects the coefficient type returned for plain arrays.
    """
    if domain not in ("harmonic", "slepian"):
        raise ValueError(f"unknown domain {domain!r}")
    a, b = np.asarray(f, dtype=np.float64), np.asarray(g, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"coefficient lengths differ: {a.shape} vs {b.shape}")
    sf = f.source if isinstance(f, Coefficients) else None
    sg = g.source if isinstance(g, Coefficients) else None
    if sf is not None and sg is not None and sf != sg:
        raise IdentityMismatch("cannot convolve coefficients from different bases")
    if isinstance(f, Coefficients):
        cls = type(f)
    elif isinstance(g, Coefficients):
        cls = type(g)
    elif domain == "harmonic":
        cls = HarmonicCoeffs
    else:
        from .slepian import SlepianCoeffs

        cls = SlepianCoeffs
    return cls(a * b, sf if sf is not None else sg)
