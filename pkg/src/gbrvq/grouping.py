"""Group-wise RVQ: contiguous equal splits, each quantized by its own RVQ."""
import numpy as np

from .beam import encode_frame_beam
from .config import QuantizerSpec
from .errors import ConfigError, DimensionError
from .model import RvqModel
from .rvq import encode_frame_greedy
from .vq import as_vector

INT64_MAX = 2**63 - 1


def split(x, g: int):
    x = as_vector(x)
    if g < 1 or x.shape[0] % g:
        raise DimensionError(f"cannot split a length-{x.shape[0]} vector into {g} equal groups")
    w = x.shape[0] // g
    return [x[i * w:(i + 1) * w] for i in range(g)]


def concat(parts):
    return np.concatenate([np.asarray(p, dtype=np.float64) for p in parts])


def encode_frame(model: RvqModel, x, mode="greedy", beam_k=1):
    """Quantize each group's slice independently; codes are concatenated group-major."""
    s = model.spec
    x = as_vector(x, s.dim_d)
    if mode not in ("greedy", "beam"):
        raise ConfigError(f"mode must be 'greedy' or 'beam', got {mode!r}")
    codes = []
    for g, part in enumerate(split(x, s.groups_g)):
        if mode == "greedy":
            c, _ = encode_frame_greedy(model.groups[g], part)
        else:
            c, _ = encode_frame_beam(model.groups[g], part, beam_k)
        codes.append(c)
    return np.concatenate(codes)


def _checked(value: int) -> int:
    if value > INT64_MAX:
        raise OverflowError(f"{value} does not fit in a signed 64-bit integer")
    return value


def parameter_count(spec: QuantizerSpec) -> int:
    """Codebook parameters: G * (Nq/G) * (D/G) * N."""
    g = spec.groups_g
    return _checked(g * spec.layers_per_group * spec.group_dim * spec.codebook_size)


def macs_per_second(spec: QuantizerSpec) -> int:
    """Exhaustive-search cost: G * (Nq/G) * (D/G + 1) * N * S."""
    g = spec.groups_g
    return _checked(
        g * spec.layers_per_group * (spec.group_dim + 1) * spec.codebook_size * spec.frames_per_sec_s
    )
