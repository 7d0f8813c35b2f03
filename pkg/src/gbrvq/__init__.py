"""Group-wise and beam-search residual vector quantization."""
from .analysis import (
    ComplexityReport,
    complexity_report,
    entropy_bitrate,
    utilization_ratio,
)
from .beam import BeamPath, beam_macs_factor, beam_paths, encode_frame_beam, encode_frame_gb
from .config import QuantizerSpec, derive_codebook_size
from .errors import (
    ChecksumError,
    ConfigError,
    CorruptionError,
    DataError,
    DimensionError,
    EmptyInputError,
    FormatError,
    GbrvqError,
    InsufficientDataError,
    TruncationError,
)
from .grouping import concat, encode_frame, macs_per_second, parameter_count, split
from .model import RvqModel
from .rvq import CorpusEncoding, decode_corpus, decode_frame, encode_corpus, encode_frame_greedy
from .synth import generate_synthetic_corpus
from .training import TrainConfig, lloyd_step, train
from .usage import UsageStats
from .vq import Codebook, Match, commitment_loss, nearest, squared_distance, top_k

__version__ = "0.1.0"
