"""Binary file formats: embedding corpora (CBRE), models (CBRQ), bitstreams (CBRB).

All integers are little-endian; byte layouts are documented in docs/formats.md.
"""
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np
from crc32c import crc32c

from .config import QuantizerSpec
from .errors import ChecksumError, ConfigError, CorruptionError, FormatError, TruncationError
from .model import RvqModel
from .vq import Codebook

VERSION = 1

EMB_MAGIC = b"CBRE"
MODEL_MAGIC = b"CBRQ"
BITS_MAGIC = b"CBRB"

# magic, version, dim, frame_count, frames_per_sec
EMB_HEADER = struct.Struct("<4sIIQI")
# magic, version, R, Nq, S, D, G, N, seed
MODEL_HEADER = struct.Struct("<4sIIIIIIIQ")
# magic, version, R, Nq, S, D, G, N, model checksum, frame_count, mode, beam_k
BITS_HEADER = struct.Struct("<4sIIIIIIIIQBB")
CHECKSUM = struct.Struct("<I")

MODES = {"greedy": 0, "beam": 1}
MODE_NAMES = {v: k for k, v in MODES.items()}


def atomic_write(path, data: bytes):
    """Write via a temporary file in the target directory, then rename into place."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _header(data: bytes, st: struct.Struct, magic: bytes, what: str):
    if len(data) < st.size:
        raise TruncationError(f"{what}: file is {len(data)} bytes, header needs {st.size}")
    fields = st.unpack_from(data)
    if fields[0] != magic:
        raise FormatError(f"{what}: bad magic {fields[0]!r}, expected {magic!r}")
    if fields[1] != VERSION:
        raise FormatError(f"{what}: unsupported version {fields[1]}")
    return fields[2:]


def _spec_from_fields(r, nq, s, d, g, n):
    try:
        spec = QuantizerSpec(r, nq, s, d, g)
    except ConfigError as e:
        raise CorruptionError(f"header holds an invalid quantizer configuration: {e}") from e
    if spec.codebook_size != n:
        raise CorruptionError(f"header codebook size {n} disagrees with 2^(R/Nq/S) = {spec.codebook_size}")
    return spec


def _spec_fields(spec: QuantizerSpec):
    return (spec.bitrate_r, spec.layers_nq, spec.frames_per_sec_s, spec.dim_d, spec.groups_g, spec.codebook_size)


# -- embeddings ---------------------------------------------------------------


@dataclass(eq=False)
class EmbeddingCorpus:
    frames: np.ndarray  # (F, dim) float32
    frames_per_sec: int

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2:
            raise ValueError("frames must be a 2-D array")

    @property
    def dim(self):
        return self.frames.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, EmbeddingCorpus)
            and self.frames_per_sec == other.frames_per_sec
            and self.frames.shape == other.frames.shape
            and self.frames.tobytes() == other.frames.tobytes()
        )


def embeddings_to_bytes(corpus: EmbeddingCorpus) -> bytes:
    f = corpus.frames
    if not np.isfinite(f).all():
        raise CorruptionError("embedding values must be finite")
    head = EMB_HEADER.pack(EMB_MAGIC, VERSION, f.shape[1], f.shape[0], corpus.frames_per_sec)
    return head + f.astype("<f4").tobytes()


def embeddings_from_bytes(data: bytes) -> EmbeddingCorpus:
    dim, count, fps = _header(data, EMB_HEADER, EMB_MAGIC, "embedding file")
    need = EMB_HEADER.size + count * dim * 4
    if len(data) < need:
        raise TruncationError(f"embedding file: payload needs {need} bytes, have {len(data)}")
    if len(data) > need:
        raise CorruptionError(f"embedding file: {len(data) - need} trailing bytes")
    frames = np.frombuffer(data, dtype="<f4", count=count * dim, offset=EMB_HEADER.size)
    frames = frames.reshape(count, dim).astype(np.float32)
    if not np.isfinite(frames).all():
        raise CorruptionError("embedding file contains non-finite values")
    return EmbeddingCorpus(frames, fps)


def write_embeddings(path, corpus: EmbeddingCorpus):
    atomic_write(path, embeddings_to_bytes(corpus))


def read_embeddings(path) -> EmbeddingCorpus:
    return embeddings_from_bytes(_read(path))


# -- models -------------------------------------------------------------------


def model_to_bytes(model: RvqModel) -> bytes:
    """Serialize; codewords are stored as binary32."""
    head = MODEL_HEADER.pack(MODEL_MAGIC, VERSION, *_spec_fields(model.spec), model.seed)
    payload = b"".join(cb.entries.astype("<f4").tobytes() for layers in model.groups for cb in layers)
    body = head + payload
    return body + CHECKSUM.pack(crc32c(body))


def model_checksum(model: RvqModel) -> int:
    return crc32c(model_to_bytes(model)[:-CHECKSUM.size])


def model_from_bytes(data: bytes) -> RvqModel:
    *fields, seed = _header(data, MODEL_HEADER, MODEL_MAGIC, "model file")
    r, nq, s, d, g, n = fields
    per_layer = n * (d // g if g and d % g == 0 else 0) * 4
    need = MODEL_HEADER.size + nq * per_layer + CHECKSUM.size
    if len(data) < need:
        raise TruncationError(f"model file: needs {need} bytes, have {len(data)}")
    if len(data) > need:
        raise CorruptionError(f"model file: {len(data) - need} trailing bytes")
    (stored,) = CHECKSUM.unpack_from(data, need - CHECKSUM.size)
    if crc32c(data[:need - CHECKSUM.size]) != stored:
        raise ChecksumError("model file checksum mismatch")
    spec = _spec_from_fields(r, nq, s, d, g, n)
    w = spec.group_dim
    values = np.frombuffer(data, dtype="<f4", count=nq * n * w, offset=MODEL_HEADER.size)
    values = values.astype(np.float64).reshape(g, spec.layers_per_group, n, w)
    if not np.isfinite(values).all():
        raise CorruptionError("model file contains non-finite codewords")
    groups = [[Codebook(values[i, j]) for j in range(spec.layers_per_group)] for i in range(g)]
    return RvqModel(spec, groups, seed=seed)


def write_model(path, model: RvqModel):
    atomic_write(path, model_to_bytes(model))


def read_model(path) -> RvqModel:
    return model_from_bytes(_read(path))


# -- bit packing --------------------------------------------------------------


def pack_codes(codes, bits_per_code: int) -> bytes:
    """(F, Nq) indices -> F byte-aligned frames, MSB-first, zero padding."""
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim != 2:
        raise ValueError("codes must be (frames, layers)")
    if codes.size and (codes.min() < 0 or codes.max() >> bits_per_code):
        raise ValueError(f"code index does not fit in {bits_per_code} bits")
    f, nq = codes.shape
    nbits = nq * bits_per_code
    nbytes = (nbits + 7) // 8
    shifts = np.arange(bits_per_code - 1, -1, -1)
    bits = ((codes[:, :, None] >> shifts) & 1).astype(np.uint8).reshape(f, nbits)
    padded = np.zeros((f, nbytes * 8), dtype=np.uint8)
    padded[:, :nbits] = bits
    return np.packbits(padded, axis=1).tobytes()


def unpack_codes(data: bytes, layers_nq: int, bits_per_code: int, frame_count: int):
    nbits = layers_nq * bits_per_code
    nbytes = (nbits + 7) // 8
    need = frame_count * nbytes
    if len(data) < need:
        raise TruncationError(f"bitstream payload needs {need} bytes, have {len(data)}")
    if len(data) > need:
        raise CorruptionError(f"bitstream payload has {len(data) - need} trailing bytes")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(frame_count, nbytes)
    bits = np.unpackbits(raw, axis=1)
    if bits[:, nbits:].any():
        raise CorruptionError("nonzero padding bits in bitstream frame")
    weights = np.int64(1) << np.arange(bits_per_code - 1, -1, -1, dtype=np.int64)
    return bits[:, :nbits].reshape(frame_count, layers_nq, bits_per_code).astype(np.int64) @ weights


def pack_frame(codes, bits_per_code: int) -> bytes:
    return pack_codes(np.asarray(codes)[None, :], bits_per_code)


def unpack_frame(data: bytes, spec: QuantizerSpec):
    return unpack_codes(data, spec.layers_nq, spec.bits_per_code, 1)[0]


# -- bitstreams ---------------------------------------------------------------


@dataclass(eq=False)
class Bitstream:
    spec: QuantizerSpec
    model_checksum: int
    mode: str
    beam_k: int
    codes: np.ndarray  # (F, Nq)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not 1 <= self.beam_k <= 255:
            raise ConfigError("beam_k must be in [1, 255] to fit the bitstream header")
        if self.spec.beam_k != self.beam_k:
            self.spec = self.spec.replace(beam_k=self.beam_k)
        self.codes = np.asarray(self.codes, dtype=np.int64).reshape(-1, self.spec.layers_nq)

    @property
    def frame_count(self):
        return self.codes.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, Bitstream)
            and self.spec == other.spec
            and self.model_checksum == other.model_checksum
            and self.mode == other.mode
            and self.beam_k == other.beam_k
            and np.array_equal(self.codes, other.codes)
        )


def bitstream_to_bytes(bs: Bitstream) -> bytes:
    head = BITS_HEADER.pack(
        BITS_MAGIC,
        VERSION,
        *_spec_fields(bs.spec),
        bs.model_checksum,
        bs.frame_count,
        MODES[bs.mode],
        bs.beam_k,
    )
    return head + pack_codes(bs.codes, bs.spec.bits_per_code)


def bitstream_from_bytes(data: bytes) -> Bitstream:
    r, nq, s, d, g, n, checksum, count, mode, k = _header(data, BITS_HEADER, BITS_MAGIC, "bitstream")
    spec = _spec_from_fields(r, nq, s, d, g, n)
    if mode not in MODE_NAMES:
        raise CorruptionError(f"bitstream: unknown mode byte {mode}")
    if k < 1:
        raise CorruptionError("bitstream: beam_k must be >= 1")
    codes = unpack_codes(data[BITS_HEADER.size:], nq, spec.bits_per_code, count)
    return Bitstream(spec, checksum, MODE_NAMES[mode], k, codes)


def write_bitstream(path, bs: Bitstream):
    atomic_write(path, bitstream_to_bytes(bs))


def read_bitstream(path) -> Bitstream:
    return bitstream_from_bytes(_read(path))
