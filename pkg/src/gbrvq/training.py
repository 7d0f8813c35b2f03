"""Codebook training: residual-cascade k-means per group.

Each layer runs Lloyd iterations from a k-means++ seed on the residuals the
previous (already trained, binary32-rounded) layers leave behind.
"""
import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import QuantizerSpec
from .errors import ConfigError, DimensionError, InsufficientDataError
from .model import RvqModel
from .vq import Codebook, as_frames, pairwise_sq_dists

log = logging.getLogger(__name__)

ASSIGN_CHUNK = 4096


@dataclass(frozen=True)
class TrainConfig:
    spec: QuantizerSpec
    max_iters: int = 50
    rel_tol: float = 1e-4
    seed: int = 0
    ema_decay: float | None = None
    dead_code_threshold: int = 1

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.ema_decay is not None and not 0 < self.ema_decay <= 1:
            raise ConfigError("ema_decay must be in (0, 1]")
        if self.dead_code_threshold < 0:
            raise ConfigError("dead_code_threshold must be >= 0")


def assign(x, c, threads=None):
    """Nearest-codeword index and squared distance for every row of x (lowest index on ties)."""
    x = np.asarray(x, dtype=np.float64)
    starts = range(0, x.shape[0], ASSIGN_CHUNK)

    def run(i):
        d = pairwise_sq_dists(x[i:i + ASSIGN_CHUNK], c)
        idx = np.argmin(d, axis=1)
        return idx, d[np.arange(d.shape[0]), idx]

    threads = threads or os.cpu_count() or 1
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(i) for i in starts]
    if not parts:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


class LloydResult(NamedTuple):
    codebook: Codebook
    distortion: float
    counts: np.ndarray
    reseeded: tuple


def _update(c, x, idx, dist, dead_code_threshold=0, ema_decay=None):
    n_codes = c.shape[0]
    counts = np.bincount(idx, minlength=n_codes)
    sums = np.zeros_like(c)
    np.add.at(sums, idx, x)
    new = c.copy()
    live = counts > 0
    means = sums[live] / counts[live, None]
    if ema_decay is None:
        new[live] = means
    else:
        new[live] = ema_decay * c[live] + (1.0 - ema_decay) * means
    dead = np.flatnonzero(counts < dead_code_threshold)
    if dead.size:
        far = np.argsort(-dist, kind="stable")[:dead.size]
        new[dead[:far.size]] = x[far]
        dead = dead[:far.size]
    return new, counts, tuple(int(i) for i in dead)


def lloyd_step(cb: Codebook, frames, dead_code_threshold=0, ema_decay=None, threads=None) -> LloydResult:
    """One assign/update round.

    Codewords with fewer than dead_code_threshold assignments move onto the
    frames farthest from their current codeword (largest first, lowest frame
    index on ties). The returned distortion is the mean per-frame squared
    error of the corpus against the updated codebook.
    """
    x = as_frames(frames, cb.dim)
    c = cb.entries.copy()
    idx, dist = assign(x, c, threads)
    new, counts, reseeded = _update(c, x, idx, dist, dead_code_threshold, ema_decay)
    _, new_dist = assign(x, new, threads)
    return LloydResult(Codebook(new), float(new_dist.mean()), counts, reseeded)


def kmeans_pp(x, n_codes, rng, threads=None):
    """k-means++ seeding: each new seed is drawn with probability proportional to squared distance."""
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    _, d = assign(x, x[chosen[0]][None, :], threads)
    for _ in range(1, n_codes):
        total = d.sum()
        if total > 0:
            cum = np.cumsum(d)
            i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            i = min(i, n - 1)
        else:
            i = int(rng.integers(n))
        chosen.append(i)
        _, di = assign(x, x[i][None, :], threads)
        np.minimum(d, di, out=d)
    return x[chosen].copy()


def _to_binary32(c):
    return c.astype(np.float32).astype(np.float64)


def _train_layer(x, n_codes, config: TrainConfig, rng, threads=None):
    c = kmeans_pp(x, n_codes, rng, threads)
    idx, dist = assign(x, c, threads)
    history = [float(dist.mean())]
    reseed_steps = []
    for it in range(config.max_iters):
        c, _, reseeded = _update(c, x, idx, dist, config.dead_code_threshold, config.ema_decay)
        idx, dist = assign(x, c, threads)
        cur = float(dist.mean())
        prev = history[-1]
        history.append(cur)
        if reseeded:
            reseed_steps.append(it)
            log.debug("iteration %d reseeded codewords %s", it, reseeded)
        elif cur > prev + 1e-12:
            log.warning("distortion rose from %r to %r at iteration %d", prev, cur, it)
        if cur == 0 or (not reseeded and (prev - cur) <= config.rel_tol * prev):
            break
    return c, history, reseed_steps


def _train_group(x, config: TrainConfig, group: int, threads=None):
    spec = config.spec
    residual = x.copy()
    codebooks, layer_meta = [], []
    for layer in range(spec.layers_per_group):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, group, layer])))
        c, history, reseeds = _train_layer(residual, spec.codebook_size, config, rng, threads)
        c = _to_binary32(c)
        idx, dist = assign(residual, c, threads)
        residual -= c[idx]
        codebooks.append(Codebook(c))
        layer_meta.append(
            {
                "group": group,
                "layer": layer,
                "iterations": len(history) - 1,
                "distortion_history": history,
                "reseed_steps": reseeds,
                "initial_distortion": history[0],
                "final_distortion": float(dist.mean()),
            }
        )
        log.info("group %d layer %d: distortion %.6g", group, layer, layer_meta[-1]["final_distortion"])
    return codebooks, layer_meta, residual


def fingerprint(frames) -> str:
    return hashlib.sha256(np.ascontiguousarray(frames, dtype=np.float64).tobytes()).hexdigest()[:16]


def train(config: TrainConfig, frames, threads=None) -> RvqModel:
    spec = config.spec
    x = np.asarray(frames, dtype=np.float64)
    if x.ndim == 2 and x.shape[1] != spec.dim_d:
        raise DimensionError(f"frames have dim {x.shape[1]}, spec needs {spec.dim_d}")
    x = as_frames(x, spec.dim_d)
    if x.shape[0] < spec.codebook_size:
        raise InsufficientDataError(
            f"need at least N={spec.codebook_size} frames to train, got {x.shape[0]}"
        )
    groups, layers = [], []
    for g in range(spec.groups_g):
        w = spec.group_dim
        cbs, meta, _ = _train_group(np.ascontiguousarray(x[:, g * w:(g + 1) * w]), config, g, threads)
        groups.append(cbs)
        layers.extend(meta)
    meta = {
        "seed": config.seed,
        "max_iters": config.max_iters,
        "corpus_fingerprint": fingerprint(x),
        "frames": int(x.shape[0]),
        "layers": layers,
    }
    return RvqModel(spec, groups, seed=config.seed, training_meta=meta)
