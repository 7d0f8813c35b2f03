"""Deterministic Gaussian-mixture corpora standing in for encoder embeddings."""
import numpy as np


def _rng(seed):
    # Philox is counter-based: the stream depends only on the seed, not the platform.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def mixture_centers(seed: int, cluster_count: int, dim: int) -> np.ndarray:
    """Cluster centers used by generate_synthetic_corpus for the same seed."""
    if cluster_count < 1:
        raise ValueError("cluster_count must be >= 1")
    return _rng(seed).standard_normal((cluster_count, dim))


def generate_synthetic_corpus(seed: int, frame_count: int, dim: int, cluster_count: int = 8, spread: float = 0.1):
    """(frame_count, dim) float64 frames: a uniformly chosen center plus N(0, spread^2) noise per component."""
    if cluster_count < 1:
        raise ValueError("cluster_count must be >= 1")
    if spread < 0:
        raise ValueError("spread must be non-negative")
    rng = _rng(seed)
    centers = rng.standard_normal((cluster_count, dim))
    labels = rng.integers(cluster_count, size=frame_count)
    noise = rng.standard_normal((frame_count, dim))
    return centers[labels] + spread * noise
