"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data/format error, 4 configuration error.
"""
import argparse
import json
import logging
import sys

import numpy as np

from . import io_formats as fmt
from .analysis import complexity_report, usage_report
from .config import QuantizerSpec
from .errors import ConfigError, DataError, DimensionError, EmptyInputError, FormatError
from .rvq import decode_corpus, encode_corpus
from .synth import generate_synthetic_corpus
from .training import TrainConfig, train
from .usage import UsageStats
from .vq import commitment_loss

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONFIG = 4

log = logging.getLogger("gbrvq")


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _u64(s):
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {s}")
    return v


def cmd_synth(args):
    frames = generate_synthetic_corpus(args.seed, args.frames, args.dim, args.clusters, args.spread)
    fmt.write_embeddings(args.out, fmt.EmbeddingCorpus(frames, args.frame_rate))
    print(f"wrote {args.frames} frames of dim {args.dim} to {args.out}")


def cmd_train(args):
    corpus = fmt.read_embeddings(args.input)
    frame_rate = args.frame_rate or corpus.frames_per_sec
    if args.frame_rate and corpus.frames_per_sec != args.frame_rate:
        raise ConfigError(
            f"--frame-rate {args.frame_rate} disagrees with the input file's {corpus.frames_per_sec} frames/s"
        )
    spec = QuantizerSpec(args.bitrate, args.layers, frame_rate, corpus.dim, args.groups)
    config = TrainConfig(
        spec,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        seed=args.seed,
        ema_decay=args.ema_decay,
        dead_code_threshold=args.dead_code_threshold,
    )
    model = train(config, corpus.frames, threads=args.threads)
    fmt.write_model(args.out, model)
    print(f"codebook size N={spec.codebook_size}, {spec.groups_g} group(s) x {spec.layers_per_group} layer(s)")
    print(f"{'group':>5} {'layer':>5} {'iters':>5} {'seeded':>14} {'distortion':>14}")
    for m in model.training_meta["layers"]:
        print(
            f"{m['group']:>5} {m['layer']:>5} {m['iterations']:>5} "
            f"{m['initial_distortion']:>14.6g} {m['final_distortion']:>14.6g}"
        )
    print(f"wrote {args.out}")


def cmd_encode(args):
    model = fmt.read_model(args.model)
    corpus = fmt.read_embeddings(args.input)
    if corpus.dim != model.spec.dim_d:
        raise DimensionError(f"input dim {corpus.dim} does not match model dim {model.spec.dim_d}")
    if corpus.frames_per_sec != model.spec.frames_per_sec_s:
        log.warning(
            "input is %d frames/s but the model was built for %d", corpus.frames_per_sec, model.spec.frames_per_sec_s
        )
    k = args.beam_k if args.mode == "beam" else 1
    # beam search of width 1 is greedy search; record it as such so both produce identical files
    mode = "greedy" if k == 1 else "beam"
    result = encode_corpus(model, corpus.frames, mode, k, threads=args.threads)
    bs = fmt.Bitstream(model.spec, fmt.model_checksum(model), mode, k, result.codes)
    fmt.write_bitstream(args.out, bs)
    n = corpus.frames.shape[0]
    if n:
        err = np.einsum("ij,ij->i", result.residual, result.residual)
        x = corpus.frames.astype(np.float64)
        loss = commitment_loss(x, x - result.residual)
        print(f"encoded {n} frames ({mode}, k={k}); mean squared error {err.mean():.6g}, per-component {loss:.6g}")
    else:
        print("encoded 0 frames")
    if args.stats:
        doc = {"usage": result.stats.to_dict()}
        if n:
            doc["report"] = usage_report(result.stats, model.spec)
        fmt.atomic_write(args.stats, json.dumps(doc).encode())
    print(f"wrote {args.out}")


def cmd_decode(args):
    model = fmt.read_model(args.model)
    bs = fmt.read_bitstream(args.input)
    if bs.model_checksum != fmt.model_checksum(model):
        raise fmt.ChecksumError("bitstream was encoded with a different model (checksum mismatch)")
    if bs.spec.replace(beam_k=1) != model.spec.replace(beam_k=1):
        raise FormatError("bitstream configuration does not match the model")
    recon = decode_corpus(model, bs.codes, args.layers_used)
    fmt.write_embeddings(args.out, fmt.EmbeddingCorpus(recon, model.spec.frames_per_sec_s))
    used = args.layers_used or model.spec.layers_nq
    print(f"decoded {bs.frame_count} frames with {used} of {model.spec.layers_nq} layers to {args.out}")


def cmd_stats(args):
    bs = fmt.read_bitstream(args.input)
    stats = UsageStats.from_codes(bs.codes, bs.spec.groups_g, bs.spec.codebook_size)
    if stats.total_frames == 0:
        raise EmptyInputError("bitstream holds no frames")
    report = usage_report(stats, bs.spec)
    if args.json:
        print(json.dumps(report, indent=2))
        return
    print(f"frames            {report['total_frames']}")
    print(f"nominal bitrate   {report['nominal_bitrate']} bit/s ({report['padded_bitrate']} byte-aligned)")
    print(f"entropy bitrate   {report['entropy_bitrate']:.1f} bit/s")
    print(f"utilization       {report['utilization']:.4f}")
    for g, (ents, used) in enumerate(zip(report["layer_entropy_bits"], report["codewords_used"])):
        for i, (h, u) in enumerate(zip(ents, used)):
            print(f"  group {g} layer {i}: {h:.4f} bits, {u}/{bs.spec.codebook_size} codewords used")


def cmd_complexity(args):
    spec = QuantizerSpec(args.bitrate, args.layers, args.frame_rate, args.dim, args.groups, args.beam_k)
    report = complexity_report(spec)
    print(report.to_json() if args.json else report.to_text())


def build_parser():
    p = argparse.ArgumentParser(prog="gbrvq", description="Group-wise and beam-search residual vector quantization")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic Gaussian-mixture embedding corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--dim", type=_positive_int, required=True)
    s.add_argument("--clusters", type=_positive_int, default=16)
    s.add_argument("--spread", type=float, default=0.3)
    s.add_argument("--seed", type=_u64, default=0)
    s.add_argument("--frame-rate", type=_positive_int, default=100)
    s.set_defaults(func=cmd_synth)

    t = sub.add_parser("train", help="train codebooks from an embedding file")
    t.add_argument("--input", required=True)
    t.add_argument("--bitrate", type=_positive_int, required=True, help="target bitrate R in bit/s")
    t.add_argument("--layers", type=_positive_int, required=True, help="total VQ layers Nq")
    t.add_argument("--groups", type=_positive_int, default=1, help="groups G")
    t.add_argument("--frame-rate", type=_positive_int, help="frames per second S (default: from input)")
    t.add_argument("--seed", type=_u64, default=0)
    t.add_argument("--max-iters", type=_positive_int, default=50)
    t.add_argument("--rel-tol", type=float, default=1e-4)
    t.add_argument("--dead-code-threshold", type=int, default=1)
    t.add_argument("--ema-decay", type=float)
    t.add_argument("--threads", type=_positive_int)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("encode", help="encode embeddings to a bitstream")
    e.add_argument("--model", required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--mode", choices=["greedy", "beam"], default="greedy")
    e.add_argument("--beam-k", type=_positive_int, default=4)
    e.add_argument("--out", required=True)
    e.add_argument("--stats", help="write codeword usage statistics as JSON")
    e.add_argument("--threads", type=_positive_int)
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="decode a bitstream to embeddings")
    d.add_argument("--model", required=True)
    d.add_argument("--input", required=True)
    d.add_argument("--layers-used", type=_positive_int, help="decode only the first layers (default: all)")
    d.add_argument("--out", required=True)
    d.add_argument("--threads", type=_positive_int)
    d.set_defaults(func=cmd_decode)

    st = sub.add_parser("stats", help="codeword usage and entropy-coded bitrate of a bitstream")
    st.add_argument("--input", required=True)
    st.add_argument("--json", action="store_true")
    st.set_defaults(func=cmd_stats)

    c = sub.add_parser("complexity", help="parameter and MAC counts for a configuration")
    c.add_argument("--bitrate", type=_positive_int, required=True)
    c.add_argument("--layers", type=_positive_int, required=True)
    c.add_argument("--dim", type=_positive_int, required=True)
    c.add_argument("--frame-rate", type=_positive_int, default=100)
    c.add_argument("--groups", type=_positive_int, default=1)
    c.add_argument("--beam-k", type=_positive_int, default=1)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_complexity)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, DataError, DimensionError, EmptyInputError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
