"""Codeword-usage entropy, utilization and the parameter/complexity report."""
import json
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .beam import beam_macs_factor
from .config import QuantizerSpec
from .errors import EmptyInputError
from .grouping import macs_per_second, parameter_count
from .usage import UsageStats

__all__ = [
    "UsageStats",
    "ComplexityReport",
    "layer_entropies",
    "entropy_bitrate",
    "utilization_ratio",
    "complexity_report",
    "usage_report",
]


def _entropy_bits(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    p = counts[counts > 0] / total
    # 0 * log2(0) is taken as 0 by dropping empty bins
    return float(max(0.0, -(p * np.log2(p)).sum()))


def layer_entropies(stats: UsageStats) -> np.ndarray:
    """Shannon entropy in bits of each (group, layer) histogram, shape (G, L)."""
    if stats.total_frames < 1:
        raise EmptyInputError("usage stats contain no frames")
    g, l, _ = stats.counts.shape
    return np.array([[_entropy_bits(stats.counts[i, j]) for j in range(l)] for i in range(g)])


def entropy_bitrate(stats: UsageStats, frames_per_sec_s: int) -> float:
    """Ideal entropy-coded rate in bits/s, layers treated as independent sources."""
    return float(layer_entropies(stats).sum() * frames_per_sec_s)


def utilization_ratio(stats_or_bitrate, spec: QuantizerSpec) -> float:
    """Entropy-coded bitrate over nominal bitrate R. Accepts UsageStats or a bitrate in bits/s."""
    if isinstance(stats_or_bitrate, UsageStats):
        rate = entropy_bitrate(stats_or_bitrate, spec.frames_per_sec_s)
    else:
        rate = float(stats_or_bitrate)
    return rate / spec.bitrate_r


@dataclass(frozen=True)
class ComplexityReport:
    codebook_size: int
    bits_per_frame: int
    padded_bits_per_frame: int
    bitrate: int
    padded_bitrate: int
    params: int
    macs_greedy: int
    beam_factor: Fraction
    macs_beam: int

    def to_dict(self):
        d = asdict(self)
        d["beam_factor"] = str(self.beam_factor)
        d["beam_factor_float"] = float(self.beam_factor)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        rows = [
            ("codebook size N", f"{self.codebook_size}"),
            ("bits per frame", f"{self.bits_per_frame} ({self.padded_bits_per_frame} byte-aligned)"),
            ("bitrate (bit/s)", f"{self.bitrate} ({self.padded_bitrate} byte-aligned)"),
            ("codebook parameters", f"{self.params:,}"),
            ("greedy search MACs/s", f"{self.macs_greedy:,}"),
            ("beam factor", f"{self.beam_factor} = {float(self.beam_factor):.4f}"),
            ("beam search MACs/s", f"{self.macs_beam:,}"),
        ]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows)


def _round_half_up(q: Fraction) -> int:
    return int((q + Fraction(1, 2)) // 1)


def complexity_report(spec: QuantizerSpec) -> ComplexityReport:
    factor = beam_macs_factor(spec)
    greedy = macs_per_second(spec)
    padded = spec.bytes_per_frame * 8
    return ComplexityReport(
        codebook_size=spec.codebook_size,
        bits_per_frame=spec.bits_per_frame,
        padded_bits_per_frame=padded,
        bitrate=spec.bits_per_frame * spec.frames_per_sec_s,
        padded_bitrate=padded * spec.frames_per_sec_s,
        params=parameter_count(spec),
        macs_greedy=greedy,
        beam_factor=factor,
        macs_beam=_round_half_up(greedy * factor),
    )


def usage_report(stats: UsageStats, spec: QuantizerSpec) -> dict:
    """Machine-readable summary of codeword usage for a spec."""
    ent = layer_entropies(stats)
    rate = float(ent.sum() * spec.frames_per_sec_s)
    return {
        "total_frames": stats.total_frames,
        "nominal_bitrate": spec.bitrate_r,
        "padded_bitrate": spec.bytes_per_frame * 8 * spec.frames_per_sec_s,
        "entropy_bitrate": rate,
        "utilization": rate / spec.bitrate_r,
        "layer_entropy_bits": ent.tolist(),
        "codewords_used": (stats.counts > 0).sum(axis=2).tolist(),
    }
