import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gbrvq import Codebook, QuantizerSpec, RvqModel  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tiny_model(n=4, d=2, nq=2, g=1, seed=0, s=100):
    spec = QuantizerSpec.from_codebook_size(n, nq, s, d, g)
    return RvqModel.random(spec, seed=seed)


def model_from_arrays(groups, s=100):
    """groups: list (per group) of lists of (N, d) arrays."""
    n, w = np.asarray(groups[0][0]).shape
    g = len(groups)
    nq = g * len(groups[0])
    spec = QuantizerSpec.from_codebook_size(n, nq, s, w * g, g)
    return RvqModel(spec, [[Codebook(c) for c in layers] for layers in groups])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
