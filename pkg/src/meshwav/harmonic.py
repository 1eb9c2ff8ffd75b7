"""Mesh Fourier transforms between per-vertex fields and harmonic coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .laplacian import Basis

__all__ = [
    "Coefficients",
    "HarmonicCoeffs",
    "IdentityMismatch",
    "forward",
    "inverse",
    "unwrap",
    "write_coefficients_csv",
    "read_coefficients_csv",
]


class IdentityMismatch(ValueError):
    """Coefficients were produced from a different basis or tiling."""


@dataclass(frozen=True, eq=False)
class Coefficients:
    """Real coefficient vector tagged with the digest of the object it belongs to."""

    values: np.ndarray
    source: bytes | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("coefficients must be a 1-d vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


class HarmonicCoeffs(Coefficients):
    pass


def unwrap(coeffs, source: bytes | None = None, what: str = "basis") -> np.ndarray:
    """Return the raw vector, checking the identity tag when both sides carry one."""
    if isinstance(coeffs, Coefficients):
        if source is not None and coeffs.source is not None and coeffs.source != source:
            raise IdentityMismatch(f"coefficients belong to a different {what}")
        return coeffs.values
    return np.asarray(coeffs, dtype=np.float64)


def forward(basis: Basis, field) -> HarmonicCoeffs:
    """``f_i = sum_v a_v f(v) z_i(v)``."""
    f = np.asarray(field, dtype=np.float64)
    if f.shape != (basis.n,):
        raise ValueError(f"field length {f.size} does not match basis size {basis.n}")
    return HarmonicCoeffs(basis.vectors.T @ (basis.weights * f), basis.digest)


def inverse(basis: Basis, coeffs) -> np.ndarray:
    """Pointwise synthesis ``f(v) = sum_i f_i z_i(v)`` over the given coefficients."""
    c = unwrap(coeffs, basis.digest)
    if c.ndim != 1 or len(c) > basis.i_max:
        raise ValueError(f"{len(c)} coefficients for a basis of {basis.i_max} modes")
    return basis.vectors[:, : len(c)] @ c


def write_coefficients_csv(coeffs, sink) -> None:
    """``index,value`` per line, 0-based index, round-trip precision."""
    c = unwrap(coeffs)
    text = "".join(f"{i},{float(x)!r}\n" for i, x in enumerate(c))
    if hasattr(sink, "write"):
        sink.write(text.encode("utf-8") if not hasattr(sink, "encoding") else text)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def read_coefficients_csv(source) -> np.ndarray:
    data = source.read() if hasattr(source, "read") else open(source, encoding="utf-8").read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = [line.split(",") for line in data.splitlines() if line.strip()]
    idx = [int(r[0]) for r in rows]
    if idx != list(range(len(rows))):
        raise ValueError("coefficient indices must be 0..n-1 in order")
    return np.array([float(r[1]) for r in rows])
