"""Beam-search residual VQ and its group-wise composition (GB-RVQ)."""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._search import beam_batch
from .config import QuantizerSpec
from .errors import ConfigError
from .model import RvqModel
from .rvq import _layer_arrays
from .vq import as_vector


@dataclass(frozen=True)
class BeamPath:
    code_prefix: tuple
    residual: np.ndarray
    err: float


def encode_frame_beam(layers, x, k: int):
    """Keep the k lowest-error partial paths through the layers; return the best full path.

    Returns (codes, final_residual). k=1 reproduces greedy encoding exactly.
    """
    if k < 1:
        raise ConfigError("beam width k must be >= 1")
    arrays = _layer_arrays(layers)
    x = as_vector(x, arrays[0].shape[1])
    codes, residual, _ = beam_batch(arrays, x[None, :], k)
    return codes[0], residual[0]


def beam_paths(layers, x, k: int):
    """Retained beam after every layer, as a list (one entry per layer) of BeamPath lists."""
    arrays = _layer_arrays(layers)
    x = as_vector(x, arrays[0].shape[1])
    trace = []
    beam_batch(arrays, x[None, :], k, trace=trace)
    out = []
    prefixes = [()]
    for step in trace:
        prefixes = [prefixes[p] + (int(c),) for p, c in zip(step["parent"][0], step["code"][0])]
        out.append(
            [BeamPath(pre, r, float(e)) for pre, r, e in zip(prefixes, step["residual"][0], step["err"][0])]
        )
    return out


def encode_frame_gb(model: RvqModel, x, k: int):
    """Beam search inside every group independently; codes concatenated group-major."""
    s = model.spec
    x = as_vector(x, s.dim_d)
    parts = []
    for g in range(s.groups_g):
        c, _ = encode_frame_beam(model.groups[g], x[model.group_slice(g)], k)
        parts.append(c)
    return np.concatenate(parts)


def beam_macs_factor(spec: QuantizerSpec) -> Fraction:
    """Search-cost multiplier of beam width k over greedy: (1 + k(n-1)) / n, n = layers per group."""
    n = spec.layers_per_group
    return Fraction(1 + spec.beam_k * (n - 1), n)
