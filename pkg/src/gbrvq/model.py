from dataclasses import dataclass, field

import numpy as np

from .config import QuantizerSpec
from .errors import ConfigError
from .vq import Codebook


@dataclass(eq=False)
class RvqModel:
    """G groups of Nq/G codebooks, each N x (D/G).

    A single-group model is plain residual VQ.
    """

    spec: QuantizerSpec
    groups: tuple
    seed: int = 0
    training_meta: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        self.groups = tuple(tuple(layers) for layers in self.groups)
        s = self.spec
        if len(self.groups) != s.groups_g:
            raise ConfigError(f"spec has {s.groups_g} groups, model has {len(self.groups)}")
        for g, layers in enumerate(self.groups):
            if len(layers) != s.layers_per_group:
                raise ConfigError(
                    f"group {g} has {len(layers)} layers, expected {s.layers_per_group}"
                )
            for i, cb in enumerate(layers):
                if not isinstance(cb, Codebook):
                    raise ConfigError(f"group {g} layer {i} is not a Codebook")
                if cb.size != s.codebook_size or cb.dim != s.group_dim:
                    raise ConfigError(
                        f"group {g} layer {i} codebook is {cb.size}x{cb.dim}, "
                        f"expected {s.codebook_size}x{s.group_dim}"
                    )
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    def __eq__(self, other):
        return (
            isinstance(other, RvqModel)
            and self.spec == other.spec
            and self.seed == other.seed
            and self.groups == other.groups
        )

    def group_slice(self, g: int) -> slice:
        w = self.spec.group_dim
        return slice(g * w, (g + 1) * w)

    def layer_arrays(self, g: int):
        return [cb.entries for cb in self.groups[g]]

    def group_model(self, g: int) -> "RvqModel":
        """Group g as a standalone single-group model."""
        s = self.spec
        sub = QuantizerSpec(
            s.layers_per_group * s.frames_per_sec_s * s.bits_per_code,
            s.layers_per_group,
            s.frames_per_sec_s,
            s.group_dim,
            1,
            s.beam_k,
        )
        return RvqModel(sub, (self.groups[g],), seed=self.seed)

    @classmethod
    def random(cls, spec: QuantizerSpec, seed: int = 0, scale: float = 1.0) -> "RvqModel":
        """Gaussian codebooks (binary32-representable); deeper layers shrink by 1/2 per layer."""
        rng = np.random.Generator(np.random.Philox(seed))
        groups = []
        for _ in range(spec.groups_g):
            layers = []
            for i in range(spec.layers_per_group):
                e = rng.standard_normal((spec.codebook_size, spec.group_dim)) * (scale / 2**i)
                layers.append(Codebook(e.astype(np.float32)))
            groups.append(layers)
        return cls(spec, groups, seed=seed)
