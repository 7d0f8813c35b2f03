import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from gbrvq import io_formats as fmt
from gbrvq.cli import main


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as e:
        return e.code


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "c.emb"
    assert run("synth", "--out", path, "--frames", 1500, "--dim", 8, "--clusters", 10, "--seed", 3) == 0
    return path


@pytest.fixture
def model(tmp_path, corpus):
    path = tmp_path / "m.q"
    assert run("train", "--input", corpus, "--bitrate", 2400, "--layers", 4, "--groups", 2,
               "--max-iters", 8, "--out", path) == 0
    return path


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_train_6kbps_gives_1024_codewords(tmp_path, capsys):
    emb = tmp_path / "big.emb"
    run("synth", "--out", emb, "--frames", 1100, "--dim", 4, "--seed", 1)
    out = tmp_path / "m.q"
    assert run("train", "--input", emb, "--bitrate", 6000, "--layers", 6, "--frame-rate", 100,
               "--max-iters", 2, "--out", out) == 0
    model = fmt.read_model(out)
    assert model.spec.codebook_size == 1024
    assert all(cb.size == 1024 for layers in model.groups for cb in layers)
    assert "N=1024" in capsys.readouterr().out


def test_train_is_reproducible(tmp_path, corpus, model):
    again = tmp_path / "again.q"
    run("train", "--input", corpus, "--bitrate", 2400, "--layers", 4, "--groups", 2,
        "--max-iters", 8, "--out", again)
    assert sha(again) == sha(model)


def test_train_errors(tmp_path, corpus, capsys):
    out = tmp_path / "x.q"
    assert run("train", "--input", corpus, "--bitrate", 2500, "--layers", 4, "--out", out) == 4
    assert "2^(R/Nq/S)" in capsys.readouterr().err
    short = tmp_path / "short.emb"
    run("synth", "--out", short, "--frames", 63, "--dim", 8)
    assert run("train", "--input", short, "--bitrate", 2400, "--layers", 4, "--out", out) == 3
    assert "at least N=64" in capsys.readouterr().err
    bad = tmp_path / "bad.emb"
    bad.write_bytes(b"garbage")
    assert run("train", "--input", bad, "--bitrate", 2400, "--layers", 4, "--out", out) == 3
    assert not out.exists()


def test_encode_beam1_equals_greedy(tmp_path, corpus, model):
    a, b = tmp_path / "a.bits", tmp_path / "b.bits"
    assert run("encode", "--model", model, "--input", corpus, "--mode", "greedy", "--out", a) == 0
    assert run("encode", "--model", model, "--input", corpus, "--mode", "beam", "--beam-k", 1, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_encode_dim_mismatch(tmp_path, model):
    other = tmp_path / "o.emb"
    run("synth", "--out", other, "--frames", 10, "--dim", 6)
    assert run("encode", "--model", model, "--input", other, "--out", tmp_path / "x.bits") == 3
    assert not (tmp_path / "x.bits").exists()


def test_decode_is_deterministic_and_matches_residual(tmp_path, corpus, model, capsys):
    bits, stats = tmp_path / "b.bits", tmp_path / "s.json"
    run("encode", "--model", model, "--input", corpus, "--mode", "beam", "--beam-k", 3, "--out", bits,
        "--stats", stats)
    reported = float(capsys.readouterr().out.split("mean squared error ")[1].split(",")[0])
    r1, r2 = tmp_path / "r1.emb", tmp_path / "r2.emb"
    assert run("decode", "--model", model, "--input", bits, "--out", r1) == 0
    assert run("decode", "--model", model, "--input", bits, "--out", r2) == 0
    assert r1.read_bytes() == r2.read_bytes()
    x = fmt.read_embeddings(corpus).frames.astype(float)
    y = fmt.read_embeddings(r1).frames.astype(float)
    assert np.mean(np.sum((x - y) ** 2, axis=1)) == pytest.approx(reported, rel=1e-4)
    doc = json.loads(stats.read_text())
    assert doc["usage"]["total_frames"] == 1500
    assert doc["report"]["entropy_bitrate"] <= 2400


def test_prefix_decode_on_greedy_stream(tmp_path, corpus, model):
    bits = tmp_path / "g.bits"
    run("encode", "--model", model, "--input", corpus, "--out", bits)
    x = fmt.read_embeddings(corpus).frames.astype(float)
    errs = []
    for used in (2, 4):
        out = tmp_path / f"r{used}.emb"
        assert run("decode", "--model", model, "--input", bits, "--layers-used", used, "--out", out) == 0
        errs.append(np.mean(np.sum((x - fmt.read_embeddings(out).frames) ** 2, axis=1)))
    assert errs[0] >= errs[1]
    assert run("decode", "--model", model, "--input", bits, "--layers-used", 3, "--out", tmp_path / "z") == 4


def test_decode_rejects_truncated_and_foreign(tmp_path, corpus, model):
    bits = tmp_path / "g.bits"
    run("encode", "--model", model, "--input", corpus, "--out", bits)
    cut = tmp_path / "cut.bits"
    cut.write_bytes(bits.read_bytes()[:-3])
    assert run("decode", "--model", model, "--input", cut, "--out", tmp_path / "o.emb") == 3
    other = tmp_path / "other.q"
    run("train", "--input", corpus, "--bitrate", 2400, "--layers", 4, "--groups", 2, "--seed", 5,
        "--max-iters", 3, "--out", other)
    assert run("decode", "--model", other, "--input", bits, "--out", tmp_path / "o.emb") == 3
    assert not (tmp_path / "o.emb").exists()


def test_stats(tmp_path, corpus, model, capsys):
    bits = tmp_path / "g.bits"
    run("encode", "--model", model, "--input", corpus, "--out", bits)
    capsys.readouterr()
    assert run("stats", "--input", bits, "--json") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["nominal_bitrate"] == 2400
    assert 0 < report["utilization"] <= 1


def test_complexity_output(capsys):
    assert run("complexity", "--bitrate", 6000, "--layers", 6, "--dim", 256, "--frame-rate", 100) == 0
    text = capsys.readouterr().out
    assert "1,572,864" in text and "157,900,800" in text and "1024" in text
    run("complexity", "--bitrate", 6000, "--layers", 6, "--dim", 256, "--groups", 2, "--beam-k", 4, "--json")
    d = json.loads(capsys.readouterr().out)
    assert (d["params"], d["macs_greedy"], d["macs_beam"]) == (786_432, 79_257_600, 237_772_800)
    assert run("complexity", "--bitrate", 6000, "--layers", 6, "--dim", 256, "--groups", 4) == 4


def test_usage_errors(capsys):
    assert run("encode", "--bogus") == 2
    assert run("complexity", "--bitrate", "x", "--layers", 6, "--dim", 2) == 2
    assert run() == 2


@pytest.mark.parametrize("cmd", ["synth", "train", "encode", "decode", "stats", "complexity"])
def test_help(cmd, capsys):
    assert run(cmd, "--help") == 0
    assert "usage" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "gbrvq", "complexity", "--bitrate", "600", "--layers", "6",
                        "--dim", "4"], capture_output=True, text=True)
    assert r.returncode == 0 and "codebook size N" in r.stdout
    r = subprocess.run([sys.executable, "-m", "gbrvq", "train", "--nope"], capture_output=True, text=True)
    assert r.returncode == 2
