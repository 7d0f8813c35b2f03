"""Batched greedy and beam-search descent through a stack of codebooks.

Every row of a batch is processed independently with the same arithmetic,
so encoding one frame or a million gives bit-identical per-frame results.
"""
import numpy as np

from .vq import pairwise_sq_dists


def greedy_batch(layers, x):
    """layers: sequence of (N, d) float64 arrays; x: (B, d). Returns codes (B, L), residual (B, d)."""
    residual = np.array(x, dtype=np.float64)
    codes = np.empty((residual.shape[0], len(layers)), dtype=np.int64)
    for i, c in enumerate(layers):
        idx = np.argmin(pairwise_sq_dists(residual, c), axis=1)
        codes[:, i] = idx
        residual -= c[idx]
    return codes, residual


def beam_batch(layers, x, k, trace=None):
    """Beam search of width k. Returns codes (B, L), residual (B, d), err (B,).

    The beam starts from a single root path holding x. Each layer expands
    every surviving path with its top-k codewords and keeps the k smallest
    residual errors; ties resolve by (parent path ordinal, codeword index)
    because the candidate pool is laid out path-major, index-ascending and
    sorted stably. If trace is a list, per-layer state is appended to it.
    """
    if k < 1:
        raise ValueError("beam width must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    b, d = x.shape
    rows = np.arange(b)[:, None]
    residual = x[:, None, :].copy()  # (B, P, d)
    codes = np.empty((b, 1, 0), dtype=np.int64)
    err = np.einsum("bpd,bpd->bp", residual, residual)
    for layer, c in enumerate(layers):
        p = residual.shape[1]
        m = min(k, c.shape[0])
        dist = pairwise_sq_dists(residual.reshape(b * p, d), c)
        top = np.argsort(dist, axis=1, kind="stable")[:, :m]
        top_err = np.take_along_axis(dist, top, axis=1).reshape(b, p * m)
        keep = np.argsort(top_err, axis=1, kind="stable")[:, :k]
        parent = keep // m
        code = top.reshape(b, p * m)[rows, keep]
        residual = residual[rows, parent] - c[code]
        codes = np.concatenate([codes[rows, parent], code[:, :, None]], axis=2)
        if trace is not None:
            trace.append(
                {
                    "layer": layer,
                    "pool_parent": np.repeat(np.arange(p), m),
                    "pool_code": top.reshape(b, p * m),
                    "pool_err": top_err,
                    "parent": parent,
                    "code": code,
                    "err": top_err[rows, keep],
                    "residual": residual.copy(),
                }
            )
        err = top_err[rows, keep]
    return codes[:, 0, :], residual[:, 0, :], err[:, 0]
