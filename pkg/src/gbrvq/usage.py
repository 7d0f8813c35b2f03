import numpy as np

from .errors import DimensionError


class UsageStats:
    """Per-(group, layer) histograms of emitted codeword indices."""

    def __init__(self, counts, total_frames=None):
        counts = np.array(counts, dtype=np.int64)
        if counts.ndim != 3:
            raise DimensionError(f"counts must have shape (G, L, N), got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        sums = counts.sum(axis=2)
        if total_frames is None:
            total_frames = int(sums.flat[0]) if sums.size else 0
        if not (sums == total_frames).all():
            raise ValueError("every histogram must sum to total_frames")
        self.counts = counts
        self.total_frames = int(total_frames)

    @classmethod
    def empty(cls, groups, layers_per_group, codebook_size):
        return cls(np.zeros((groups, layers_per_group, codebook_size), dtype=np.int64), 0)

    @classmethod
    def from_codes(cls, codes, groups, codebook_size):
        """codes: (F, Nq) group-major index array."""
        codes = np.asarray(codes, dtype=np.int64)
        f, nq = codes.shape
        per = nq // groups
        counts = np.zeros((groups, per, codebook_size), dtype=np.int64)
        for j in range(nq):
            counts[j // per, j % per] = np.bincount(codes[:, j], minlength=codebook_size)
        return cls(counts, f)

    def merge(self, other: "UsageStats") -> "UsageStats":
        if self.counts.shape != other.counts.shape:
            raise DimensionError("cannot merge usage stats of different shapes")
        return UsageStats(self.counts + other.counts, self.total_frames + other.total_frames)

    __add__ = merge

    def __eq__(self, other):
        return (
            isinstance(other, UsageStats)
            and self.total_frames == other.total_frames
            and np.array_equal(self.counts, other.counts)
        )

    def to_dict(self):
        return {"total_frames": self.total_frames, "counts": self.counts.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["counts"], d["total_frames"])
