"""Single-layer vector quantization: codebooks, distance kernels, search."""
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import DimensionError, DataError, EmptyInputError


@njit(nogil=True, cache=True)
def _sq_dists_kernel(x, c, out):
    # Fixed summation order per (row, codeword): results do not depend on batch shape.
    for i in range(x.shape[0]):
        for j in range(c.shape[0]):
            acc = 0.0
            for t in range(x.shape[1]):
                diff = x[i, t] - c[j, t]
                acc += diff * diff
            out[i, j] = acc


def pairwise_sq_dists(x, c):
    """(B, d) x (N, d) -> (B, N) squared Euclidean distances, float64 accumulation."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    if x.ndim != 2 or c.ndim != 2 or x.shape[1] != c.shape[1]:
        raise DimensionError(f"cannot compare vectors of shape {x.shape} with codewords {c.shape}")
    out = np.empty((x.shape[0], c.shape[0]), dtype=np.float64)
    _sq_dists_kernel(x, c, out)
    return out


def as_vector(x, dim=None) -> np.ndarray:
    """Validate and convert to a 1-D float64 array; rejects NaN/Inf."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected vector of length {dim}, got {v.shape[0]}")
    if not np.isfinite(v).all():
        raise DataError("vector contains non-finite values")
    return v


def as_frames(frames, dim=None) -> np.ndarray:
    """Validate a (F, d) frame matrix; the error names the first offending frame."""
    a = np.asarray(frames, dtype=np.float64)
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, dim or 0)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D array of frames, got shape {a.shape}")
    if dim is not None and a.shape[1] != dim:
        raise DimensionError(f"frame 0 has dim {a.shape[1]}, expected {dim}")
    bad = ~np.isfinite(a).all(axis=1)
    if bad.any():
        raise DataError(f"frame {int(np.argmax(bad))} contains non-finite values")
    return np.ascontiguousarray(a)


class Codebook:
    """An immutable N x dim table of codewords."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        e = np.array(entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] < 1 or e.shape[1] < 1:
            raise DimensionError(f"codebook needs shape (N>=1, dim>=1), got {e.shape}")
        if not np.isfinite(e).all():
            raise DataError("codebook contains non-finite values")
        e.flags.writeable = False
        self.entries = e

    @property
    def dim(self) -> int:
        return self.entries.shape[1]

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __len__(self):
        return self.size

    def __eq__(self, other):
        return isinstance(other, Codebook) and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"Codebook(size={self.size}, dim={self.dim})"


class Match(NamedTuple):
    index: int
    residual: np.ndarray
    err: float


def squared_distance(a, b) -> float:
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(pairwise_sq_dists(a[None, :], b[None, :])[0, 0])


def nearest(cb: Codebook, x) -> Match:
    """Closest codeword; ties go to the lowest index."""
    x = as_vector(x, cb.dim)
    d = pairwise_sq_dists(x[None, :], cb.entries)[0]
    i = int(np.argmin(d))
    return Match(i, x - cb.entries[i], float(d[i]))


def top_k(cb: Codebook, x, k: int) -> list[Match]:
    """The min(k, N) closest codewords, ascending by error then index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = as_vector(x, cb.dim)
    d = pairwise_sq_dists(x[None, :], cb.entries)[0]
    order = np.argsort(d, kind="stable")[:k]
    return [Match(int(i), x - cb.entries[i], float(d[i])) for i in order]


def commitment_loss(x_frames, q_frames) -> float:
    """Mean over frames of the per-component squared error between inputs and quantized outputs."""
    x = np.asarray(x_frames, dtype=np.float64)
    q = np.asarray(q_frames, dtype=np.float64)
    if x.size == 0 and q.size == 0:
        raise EmptyInputError("commitment loss of an empty frame list")
    x = as_frames(x)
    q = as_frames(q)
    if x.shape != q.shape:
        raise DimensionError(f"frame arrays differ in shape: {x.shape} vs {q.shape}")
    if x.shape[0] == 0:
        raise EmptyInputError("commitment loss of an empty frame list")
    diff = x - q
    return float(np.mean(np.einsum("ij,ij->i", diff, diff)) / x.shape[1])
