"""Greedy residual VQ, prefix decoding and the corpus encode driver."""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from ._search import beam_batch, greedy_batch
from .errors import ConfigError, DimensionError
from .model import RvqModel
from .usage import UsageStats
from .vq import Codebook, as_frames, as_vector

CHUNK_FRAMES = 2048


def _layer_arrays(layers):
    if not layers:
        raise ConfigError("need at least one codebook")
    arrays = [cb.entries if isinstance(cb, Codebook) else np.asarray(cb, dtype=np.float64) for cb in layers]
    dim = arrays[0].shape[1]
    if any(a.shape[1] != dim for a in arrays):
        raise DimensionError("all layers must share one codeword dimension")
    return arrays


def encode_frame_greedy(layers, x):
    """Each layer picks the nearest codeword to the residual left by the one before.

    Returns (codes, final_residual).
    """
    arrays = _layer_arrays(layers)
    x = as_vector(x, arrays[0].shape[1])
    codes, residual = greedy_batch(arrays, x[None, :])
    return codes[0], residual[0]


def _check_codes(model: RvqModel, codes):
    codes = np.asarray(codes, dtype=np.int64)
    s = model.spec
    if codes.shape[-1] != s.layers_nq:
        raise DimensionError(f"expected {s.layers_nq} codes per frame, got {codes.shape[-1]}")
    if codes.size and (codes.min() < 0 or codes.max() >= s.codebook_size):
        raise ValueError(f"code index out of range [0, {s.codebook_size})")
    return codes


def _check_layers_used(model: RvqModel, layers_used):
    s = model.spec
    if layers_used is None:
        return s.layers_nq
    if not 1 <= layers_used <= s.layers_nq:
        raise ConfigError(f"layers_used must be in [1, {s.layers_nq}], got {layers_used}")
    if layers_used % s.groups_g:
        raise ConfigError(
            f"layers_used ({layers_used}) must be divisible by the group count ({s.groups_g})"
        )
    return layers_used


def decode_corpus(model: RvqModel, codes, layers_used=None):
    """(F, Nq) codes -> (F, D) reconstructions using the first layers_used/G layers of each group."""
    layers_used = _check_layers_used(model, layers_used)
    codes = _check_codes(model, np.atleast_2d(codes))
    s = model.spec
    per = layers_used // s.groups_g
    out = np.zeros((codes.shape[0], s.dim_d), dtype=np.float64)
    for g in range(s.groups_g):
        part = out[:, model.group_slice(g)]
        for i, c in enumerate(model.layer_arrays(g)[:per]):
            part += c[codes[:, g * s.layers_per_group + i]]
    return out


def decode_frame(model: RvqModel, codes, layers_used=None):
    codes = np.asarray(codes)
    if codes.ndim != 1:
        raise DimensionError("decode_frame takes one frame of codes")
    return decode_corpus(model, codes[None, :], layers_used)[0]


class CorpusEncoding(NamedTuple):
    codes: np.ndarray  # (F, Nq), group-major
    stats: UsageStats
    residual: np.ndarray  # (F, D), input minus full reconstruction


def _encode_chunk(model: RvqModel, x, mode, beam_k):
    s = model.spec
    codes = np.empty((x.shape[0], s.layers_nq), dtype=np.int64)
    residual = np.empty_like(x)
    for g in range(s.groups_g):
        sl = model.group_slice(g)
        cols = slice(g * s.layers_per_group, (g + 1) * s.layers_per_group)
        sub = np.ascontiguousarray(x[:, sl])
        if mode == "greedy":
            codes[:, cols], residual[:, sl] = greedy_batch(model.layer_arrays(g), sub)
        else:
            c, r, _ = beam_batch(model.layer_arrays(g), sub, beam_k)
            codes[:, cols], residual[:, sl] = c, r
    return codes, residual


def encode_corpus(model: RvqModel, frames, mode="greedy", beam_k=1, threads=None) -> CorpusEncoding:
    """Encode every frame; results are independent of the thread count."""
    if mode not in ("greedy", "beam"):
        raise ConfigError(f"mode must be 'greedy' or 'beam', got {mode!r}")
    if beam_k < 1:
        raise ConfigError("beam_k must be >= 1")
    s = model.spec
    x = np.asarray(frames, dtype=np.float64)
    if x.size == 0:
        x = x.reshape(0, s.dim_d)
    if x.ndim == 2 and x.shape[1] != s.dim_d:
        raise DimensionError(f"frame 0 has dim {x.shape[1]}, model expects {s.dim_d}")
    x = as_frames(x, s.dim_d)
    starts = range(0, x.shape[0], CHUNK_FRAMES)
    threads = threads or os.cpu_count() or 1
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda i: _encode_chunk(model, x[i:i + CHUNK_FRAMES], mode, beam_k), starts))
    else:
        parts = [_encode_chunk(model, x[i:i + CHUNK_FRAMES], mode, beam_k) for i in starts]
    if parts:
        codes = np.concatenate([p[0] for p in parts])
        residual = np.concatenate([p[1] for p in parts])
    else:
        codes = np.empty((0, s.layers_nq), dtype=np.int64)
        residual = np.empty((0, s.dim_d))
    stats = UsageStats.from_codes(codes, s.groups_g, s.codebook_size)
    return CorpusEncoding(codes, stats, residual)
