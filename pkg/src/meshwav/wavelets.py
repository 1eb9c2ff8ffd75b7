"""Scale-discretised tiling of the Slepian line.

The generating functions follow the usual smooth bump construction: a
compactly supported C-infinity bump ``s`` is rescaled onto ``[1/lam, 1]``,
its normalised tail integral ``k_lam`` decreases smoothly from 1 to 0, and
the scaling and wavelet kernels are square roots of ``k_lam`` and of its
differences across one dilation.

Kernels are indexed by Slepian rank ``p = 1..N``.
"""

from __future__ import annotations

import hashlib
import math
import struct
import threading
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

__all__ = [
    "WaveletKernels",
    "k_lambda",
    "kappa_lambda",
    "eta_lambda",
    "highest_scale",
    "build_kernels",
    "check_admissibility",
    "write_kernels_csv",
]

QUAD_RTOL = 1e-10

# (lam, t_lo, t_hi) -> integral of s_lam(t)^2 / t over [t_lo, t_hi]
_PIECES: dict[tuple[float, float, float], float] = {}
_PIECES_LOCK = threading.Lock()


def _check_lambda(lam: float) -> None:
    if not lam > 1:
        raise ValueError(f"dilation parameter must exceed 1, got {lam}")


def _integrand(t: float, lam: float) -> float:
    u = 2 * lam / (lam - 1) * (t - 1 / lam) - 1
    if abs(u) >= 1:
        return 0.0
    return math.exp(2.0 / (u * u - 1.0)) / t


def _piece(lam: float, lo: float, hi: float) -> float:
    key = (lam, lo, hi)
    val = _PIECES.get(key)
    if val is None:
        with warnings.catch_warnings():
            # the integrand underflows to exactly 0 near t=1
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(_integrand, lo, hi, args=(lam,), epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
        with _PIECES_LOCK:
            _PIECES[key] = val
    return val


def k_lambda(t, lam: float):
    """Smooth decreasing function: 1 for ``t <= 1/lam``, 0 for ``t >= 1``.

    Evaluated by adaptive Gauss-Kronrod quadrature between consecutive
    sorted arguments, so the result is exactly monotone in ``t``.
    Accepts scalars or arrays.
    """
    _check_lambda(lam)
    t_arr = np.asarray(t, dtype=np.float64)
    flat = t_arr.ravel()
    lo = 1.0 / lam
    inner = np.unique(flat[(flat > lo) & (flat < 1.0)])
    knots = np.concatenate([[lo], inner, [1.0]])
    pieces = np.array([_piece(lam, a, b) for a, b in zip(knots[:-1], knots[1:])])
    # tail[i] = integral from knots[i] to 1
    tail = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    total = tail[0]
    out = np.where(flat <= lo, 1.0, 0.0)
    mid = (flat > lo) & (flat < 1.0)
    out[mid] = tail[np.searchsorted(knots, flat[mid])] / total
    out = np.clip(out, 0.0, 1.0).reshape(t_arr.shape)
    return float(out) if t_arr.ndim == 0 else out


def kappa_lambda(t, lam: float):
    """Wavelet generating function ``sqrt(k(t/lam) - k(t))``, zero outside ``(1/lam, lam)``."""
    t_arr = np.asarray(t, dtype=np.float64)
    both = k_lambda(np.concatenate([t_arr.ravel() / lam, t_arr.ravel()]), lam)
    m = t_arr.size
    out = np.sqrt(np.maximum(both[:m] - both[m:], 0.0)).reshape(t_arr.shape)
    return float(out) if t_arr.ndim == 0 else out


def eta_lambda(t, lam: float):
    """Scaling generating function ``sqrt(k(t))``."""
    out = np.sqrt(k_lambda(t, lam))
    return float(out) if np.ndim(out) == 0 else out


def highest_scale(N: int, lam: float) -> int:
    """Smallest integer ``J`` with ``lam**J >= N``, i.e. ``ceil(log_lam N)`` without rounding slips."""
    _check_lambda(lam)
    if N < 1:
        raise ValueError(f"bandlimit must be at least 1, got {N}")
    J = max(0, math.ceil(math.log(N) / math.log(lam)))
    while J > 0 and lam ** (J - 1) >= N:
        J -= 1
    while lam**J < N:
        J += 1
    return J


@dataclass(frozen=True, eq=False)
class WaveletKernels:
    """Scaling kernel and wavelet kernels ``j = j0..J`` sampled at ``p = 1..N``.

    ``wavelets[j - j0]`` is the kernel of scale ``j``.
    """

    lam: float
    j0: int
    J: int
    N: int
    scaling: np.ndarray
    wavelets: np.ndarray

    @property
    def scales(self) -> range:
        return range(self.j0, self.J + 1)

    def wavelet(self, j: int) -> np.ndarray:
        if j not in self.scales:
            raise IndexError(f"scale {j} outside [{self.j0}, {self.J}]")
        return self.wavelets[j - self.j0]

    @property
    def energies(self) -> np.ndarray:
        """Wavelet energies ``sum_p (Psi^j_p)^2`` per scale."""
        return np.sum(self.wavelets**2, axis=1)

    @property
    def scaling_energy(self) -> float:
        return float(np.sum(self.scaling**2))

    @property
    def n_nonzero(self) -> int:
        """Number of kernels (scaling included) with any non-zero entry on ``1..N``."""
        return int(np.any(self.scaling != 0)) + int(np.sum(np.any(self.wavelets != 0, axis=1)))

    @cached_property
    def digest(self) -> bytes:
        h = hashlib.sha256(struct.pack("<dqqq", self.lam, self.j0, self.J, self.N))
        h.update(np.ascontiguousarray(self.scaling, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.wavelets, dtype="<f8").tobytes())
        return h.digest()


def build_kernels(lam: float, j0: int, N: int) -> WaveletKernels:
    """Tile ``p = 1..N`` with a scaling kernel and wavelets ``j = j0..J``.

    ``J = ceil(log_lam N)``; requires ``0 <= j0 < J``.
    """
    _check_lambda(lam)
    if N < 1:
        raise ValueError(f"bandlimit must be at least 1, got {N}")
    if int(j0) != j0 or j0 < 0:
        raise ValueError(f"lowest scale must be a non-negative integer, got {j0}")
    j0 = int(j0)
    J = highest_scale(N, lam)
    if j0 >= J:
        raise ValueError(f"no wavelet scales available: J0={j0} >= J={J} for N={N}, lambda={lam}")
    p = np.arange(1, N + 1, dtype=np.float64)
    # k at p / lam**j for j = j0..J+1; kappa at scale j uses rows j and j+1
    t = np.stack([p / lam**j for j in range(j0, J + 2)])
    K = k_lambda(t, lam)
    scaling = np.sqrt(K[0])
    wavelets = np.sqrt(np.maximum(K[1:] - K[:-1], 0.0))
    for arr in (scaling, wavelets):
        arr.setflags(write=False)
    return WaveletKernels(float(lam), j0, J, int(N), scaling, wavelets)


def check_admissibility(kernels: WaveletKernels) -> float:
    """``max_p |Phi_p^2 + sum_j (Psi^j_p)^2 - 1|``."""
    total = kernels.scaling**2 + np.sum(kernels.wavelets**2, axis=0)
    return float(np.max(np.abs(total - 1.0)))


def write_kernels_csv(kernels: WaveletKernels, sink) -> None:
    """Header ``p,phi,psi_j0,..,psi_J`` then one row per Slepian rank."""
    cols = ["p", "phi"] + [f"psi_{j}" for j in kernels.scales]
    lines = [",".join(cols)]
    for i in range(kernels.N):
        row = [str(i + 1), repr(float(kernels.scaling[i]))]
        row += [repr(float(w)) for w in kernels.wavelets[:, i]]
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
