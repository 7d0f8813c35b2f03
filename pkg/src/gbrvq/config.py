from dataclasses import dataclass

from .errors import ConfigError

MAX_BITS_PER_CODE = 31


@dataclass(frozen=True)
class QuantizerSpec:
    """Quantizer configuration; every derived size comes from these fields.

    bitrate_r is in bits per second, frames_per_sec_s in frames per second.
    layers_nq counts layers across all groups.
    """

    bitrate_r: int
    layers_nq: int
    frames_per_sec_s: int
    dim_d: int
    groups_g: int = 1
    beam_k: int = 1

    def __post_init__(self):
        for name in ("bitrate_r", "layers_nq", "frames_per_sec_s", "dim_d", "groups_g", "beam_k"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.layers_nq % self.groups_g:
            raise ConfigError(
                f"layers ({self.layers_nq}) must be divisible by groups ({self.groups_g})"
            )
        if self.dim_d % self.groups_g:
            raise ConfigError(f"dim ({self.dim_d}) must be divisible by groups ({self.groups_g})")
        per_second = self.layers_nq * self.frames_per_sec_s
        if self.bitrate_r % per_second:
            raise ConfigError(
                f"N = 2^(R/Nq/S) needs an integer exponent: bitrate {self.bitrate_r} "
                f"is not divisible by layers*frame_rate = {per_second}"
            )
        bits = self.bitrate_r // per_second
        if not 1 <= bits <= MAX_BITS_PER_CODE:
            raise ConfigError(
                f"N = 2^(R/Nq/S) needs 1 <= R/(Nq*S) <= {MAX_BITS_PER_CODE}, got {bits}"
            )

    @property
    def bits_per_code(self) -> int:
        return self.bitrate_r // (self.layers_nq * self.frames_per_sec_s)

    @property
    def codebook_size(self) -> int:
        return 1 << self.bits_per_code

    @property
    def layers_per_group(self) -> int:
        return self.layers_nq // self.groups_g

    @property
    def group_dim(self) -> int:
        return self.dim_d // self.groups_g

    @property
    def bits_per_frame(self) -> int:
        return self.layers_nq * self.bits_per_code

    @property
    def bytes_per_frame(self) -> int:
        return (self.bits_per_frame + 7) // 8

    def replace(self, **changes) -> "QuantizerSpec":
        fields = {
            "bitrate_r": self.bitrate_r,
            "layers_nq": self.layers_nq,
            "frames_per_sec_s": self.frames_per_sec_s,
            "dim_d": self.dim_d,
            "groups_g": self.groups_g,
            "beam_k": self.beam_k,
        }
        fields.update(changes)
        return QuantizerSpec(**fields)

    @classmethod
    def from_codebook_size(cls, codebook_size, layers_nq, frames_per_sec_s, dim_d, groups_g=1, beam_k=1):
        """Build a spec from N instead of R (N must be a power of two)."""
        if codebook_size < 2 or codebook_size & (codebook_size - 1):
            raise ConfigError(f"codebook size must be a power of two >= 2, got {codebook_size}")
        bits = codebook_size.bit_length() - 1
        return cls(bits * layers_nq * frames_per_sec_s, layers_nq, frames_per_sec_s, dim_d, groups_g, beam_k)


def derive_codebook_size(spec: QuantizerSpec) -> int:
    """N = 2^(R / (Nq * S)), exact integer arithmetic."""
    return 1 << (spec.bitrate_r // (spec.layers_nq * spec.frames_per_sec_s))
