import hashlib
from pathlib import Path

import pytest

from viskey import classify, vcs
from viskey.bitimage import read_pbm
from viskey.cli import run_cli
from viskey.font import default_corpus_dir


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestKeygen:
    def test_deterministic(self, capsys):
        code1, out1, _ = run(capsys, "keygen", "--length", "8", "--seed", "5")
        code2, out2, _ = run(capsys, "keygen", "--length", "8", "--seed", "5")
        assert code1 == code2 == 0
        assert out1 == out2
        assert len(out1.strip()) == 8


class TestPipelineStages:
    def test_render_encode_reconstruct_decode(self, capsys, tmp_path, model2):
        corpus = str(default_corpus_dir())
        key_pbm = tmp_path / "key.pbm"
        code, _, _ = run(capsys, "render", "4V", "--corpus", corpus, "--out", str(key_pbm))
        assert code == 0
        img = read_pbm(key_pbm.read_bytes())
        assert (img.width, img.height) == (72, 36)

        prefix = str(tmp_path / "sh")
        code, out, _ = run(capsys, "encode", str(key_pbm), "--scheme", "2",
                           "--seed", "7", "--out-prefix", prefix)
        assert code == 0
        assert Path(prefix + "_1.pbm").exists() and Path(prefix + "_2.txt").exists()
        params, sw, sh, idx, gid = vcs.parse_sidecar(Path(prefix + "_1.txt").read_text())
        assert (params.n, sw, sh, idx) == (2, 72, 36, 1)

        merged = tmp_path / "merged.pbm"
        code, _, _ = run(capsys, "reconstruct", prefix + "_1.pbm", prefix + "_2.pbm",
                         "--out", str(merged))
        assert code == 0

        clean = tmp_path / "clean.pbm"
        code, _, _ = run(capsys, "denoise", str(merged), "--sidecar", prefix + "_1.txt",
                         "--out", str(clean))
        assert code == 0

        code, out, _ = run(capsys, "segment", str(clean))
        assert code == 0 and len(out.strip().splitlines()) == 2

        model_path = tmp_path / "model.txt"
        classify.save_model(model2, model_path)
        code, out, _ = run(capsys, "decode", str(merged), "--model", str(model_path),
                           "--scheme", "2")
        assert code == 0 and out.strip() == "4V"

    def test_train_and_classify(self, capsys, tmp_path, corpus_dir, model2):
        model_path = tmp_path / "model.txt"
        classify.save_model(model2, model_path)
        glyph = corpus_dir / "Q_f0.pbm"
        code, out, _ = run(capsys, "classify", str(glyph), "--model", str(model_path))
        assert code == 0
        assert out.split()[0] == "Q"

    def test_features_output(self, capsys, corpus_dir):
        code, out, _ = run(capsys, "features", str(corpus_dir / "A_f0.pbm"))
        assert code == 0
        assert len(out.strip().split(",")) == 48


class TestExitCodes:
    def test_domain_error(self, capsys, tmp_path):
        key = tmp_path / "k.pbm"
        run(capsys, "render", "A", "--out", str(key))
        code, _, err = run(capsys, "encode", str(key), "--scheme", "7",
                           "--seed", "1", "--out-prefix", str(tmp_path / "s"))
        assert code == 1
        assert "9" in err

    def test_usage_error(self, capsys):
        code, _, _ = run(capsys, "encode", "--no-such-flag")
        assert code == 2

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "segment", "/nonexistent/file.pbm")
        assert code == 1


class TestDemo:
    def test_demo_n2(self, capsys):
        code, out, _ = run(capsys, "demo", "--n", "2", "--seed", "1")
        assert code == 0
        assert "key: " in out
        assert "AUTH: GRANTED" in out

    def test_demo_deterministic(self, capsys):
        _, out1, _ = run(capsys, "demo", "--n", "2", "--seed", "3")
        _, out2, _ = run(capsys, "demo", "--n", "2", "--seed", "3")
        assert hashlib.sha256(out1.encode()).hexdigest() == hashlib.sha256(out2.encode()).hexdigest()
