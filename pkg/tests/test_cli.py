import json

import pytest

from trivox.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, EXIT_PROTOCOL, main


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    from trivox.fixtures import make_corpus

    root = tmp_path_factory.mktemp("cli_demo")
    make_corpus(root, count=2, seed=55, duration_range=(10.0, 12.0))
    return root


def test_encode_decode_cycle(demo, tmp_path, capsys):
    capture = tmp_path / "u.stct"
    manifest = tmp_path / "m.json"
    rc = main(
        [
            "encode",
            "--in", str(demo / "utt000.wav"),
            "--transcript", str(demo / "utt000.txt"),
            "--embedding", str(demo / "utt000.emb"),
            "--mode", "balanced",
            "--out", str(capture),
            "--report", str(tmp_path / "r.json"),
        ]
    )
    assert rc == EXIT_OK
    assert capture.exists()
    out = capsys.readouterr().out
    assert "prosody" in out and "wire" in out

    rc = main(["decode", "--in", str(capture), "--out", str(manifest)])
    assert rc == EXIT_OK
    doc = json.loads(manifest.read_text())
    assert doc["mode_name"] == "balanced"
    assert any("text" in u for u in doc["utterances"])


def test_unknown_mode_exit_code(demo, tmp_path):
    rc = main(
        [
            "encode",
            "--in", str(demo / "utt000.wav"),
            "--transcript", str(demo / "utt000.txt"),
            "--embedding", str(demo / "utt000.emb"),
            "--mode", "warp_speed",
            "--out", str(tmp_path / "x.stct"),
        ]
    )
    assert rc == EXIT_CONFIG


def test_missing_audio_exit_code(demo, tmp_path):
    rc = main(
        [
            "encode",
            "--in", str(demo / "nope.wav"),
            "--transcript", str(demo / "utt000.txt"),
            "--embedding", str(demo / "utt000.emb"),
            "--out", str(tmp_path / "x.stct"),
        ]
    )
    assert rc == EXIT_INPUT


def test_corrupt_capture_exit_code(tmp_path):
    bad = tmp_path / "bad.stct"
    bad.write_bytes(b"JUNKJUNKJUNK")
    rc = main(["decode", "--in", str(bad), "--out", str(tmp_path / "m.json")])
    assert rc == EXIT_PROTOCOL


def test_bench_and_sweep_cli(demo, tmp_path, capsys):
    rc = main(
        [
            "bench",
            "--corpus", str(demo / "manifest.csv"),
            "--modes", "minimal",
            "--ber", "0",
            "--out", str(tmp_path / "bench.json"),
        ]
    )
    assert rc == EXIT_OK
    assert "text delivery" in capsys.readouterr().out

    rc = main(
        [
            "sweep",
            "--corpus", str(demo / "manifest.csv"),
            "--rates", "0.5,5",
            "--out", str(tmp_path / "sweep.json"),
        ]
    )
    assert rc == EXIT_OK
    assert "strictly increasing" in capsys.readouterr().out


def test_bench_empty_corpus_distinct_exit(tmp_path):
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("id,wav_path,transcript_path,embedding_path,duration_s\n")
    rc = main(
        ["bench", "--corpus", str(manifest), "--modes", "minimal", "--ber", "0",
         "--out", str(tmp_path / "b.json")]
    )
    assert rc == EXIT_INPUT


def test_fixtures_command(tmp_path):
    rc = main(["fixtures", "--out", str(tmp_path / "c"), "--count", "2", "--seed", "3"])
    assert rc == EXIT_OK
    assert (tmp_path / "c" / "manifest.csv").exists()
