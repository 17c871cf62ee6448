"""Tests for the command-line interface."""

from __future__ import annotations

import json

import pytest

from scripts.run import build_parser, main

TINY_CONFIG = """
encoder:
  d_model: 8
  heads: 2
  layers: 1
  max_seq_len: 64

fusion:
  heads: 2

training:
  lr: 0.001
  batch_size: 4
  max_epochs: 2
  seed: 5

corpus:
  size: 40
  emerging_size: 5
  seed: 2

logging:
  level: "WARNING"
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY_CONFIG)
    return str(path)


@pytest.fixture
def corpus_dir(tmp_path, config_path):
    out = tmp_path / "data"
    assert main(["gen-corpus", "-c", config_path, "-o", str(out)]) == 0
    return out


class TestParser:
    def test_subcommands(self):
        parser = build_parser()
        for command in ("tag", "gen-corpus"):
            args = parser.parse_args([command, "x"] if command == "tag" else [command])
            assert args.command == command

    def test_shared_overrides(self):
        args = build_parser().parse_args(["tag", "hello", "--variant", "3", "--threshold", "0.4"])
        assert (args.variant, args.threshold) == (3, 0.4)

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestCommands:
    def test_tag(self, config_path):
        assert main(["tag", "The agent was rude to me.", "-c", config_path]) == 0

    def test_gen_corpus(self, corpus_dir):
        lines = (corpus_dir / "corpus.jsonl").read_text().splitlines()
        assert len(lines) == 40
        assert set(json.loads(lines[0])) == {"id", "text", "labels"}
        assert len((corpus_dir / "emerging.jsonl").read_text().splitlines()) == 5

    def test_train_evaluate_predict_export_sweep(self, tmp_path, config_path, corpus_dir):
        run_dir = tmp_path / "run"
        data = str(corpus_dir / "corpus.jsonl")
        assert main(["train", "-c", config_path, "--data", data, "-o", str(run_dir)]) == 0
        assert (run_dir / "model" / "model.ckpt").is_file()
        assert (run_dir / "history.json").is_file()
        assert len((run_dir / "test.jsonl").read_text().splitlines()) == 12

        model = str(run_dir / "model")
        test = str(run_dir / "test.jsonl")
        assert main(["evaluate", "-c", config_path, "--model", model, "--data", test]) == 0
        assert main(["predict", "-c", config_path, "--model", model, "--text", "Rude!"]) == 0
        bulk = tmp_path / "bulk.ndjson"
        assert (
            main(["export", "-c", config_path, "--model", model, "--data", test, "-o", str(bulk)])
            == 0
        )
        assert len(bulk.read_text().splitlines()) == 24
        assert (
            main(["sweep-threshold", "-c", config_path, "--model", model, "--data", test,
                  "--thresholds", "0.3,0.5"])
            == 0
        )

    def test_evaluate_off_topic_texts(self, tmp_path, config_path, corpus_dir):
        out = tmp_path / "rules"
        data = str(corpus_dir / "corpus.jsonl")
        argv = ["train", "-c", config_path, "--variant", "1", "--data", data, "-o", str(out)]
        assert main(argv) == 0
        emerging = str(corpus_dir / "emerging.jsonl")
        model = str(out / "model")
        assert main(["evaluate", "-c", config_path, "--model", model, "--data", emerging]) == 0

    def test_rules_only_train(self, tmp_path, config_path, corpus_dir):
        data = str(corpus_dir / "corpus.jsonl")
        out = tmp_path / "rules"
        argv = ["train", "-c", config_path, "--variant", "1", "--data", data, "-o", str(out)]
        assert main(argv) == 0
        assert not (out / "history.json").exists()

    def test_ablate(self, tmp_path, config_path, corpus_dir):
        out = tmp_path / "ablation"
        data = str(corpus_dir / "corpus.jsonl")
        assert main(["ablate", "-c", config_path, "--data", data, "-o", str(out)]) == 0
        assert (out / "report.json").is_file()


class TestExitCodes:
    def test_missing_data_file(self, tmp_path, config_path):
        missing = str(tmp_path / "absent.jsonl")
        assert main(["train", "-c", config_path, "--data", missing]) == 2

    def test_invalid_override(self, config_path):
        assert main(["tag", "text", "-c", config_path, "--threshold", "3"]) == 2

    def test_unknown_variant(self, config_path):
        assert main(["tag", "text", "-c", config_path, "--variant", "9"]) == 2

    def test_missing_rulebook(self, tmp_path, config_path):
        rulebook = str(tmp_path / "none.tsv")
        assert main(["tag", "text", "-c", config_path, "--rulebook", rulebook]) == 2

    def test_out_of_range_sweep_threshold(self, tmp_path, config_path, corpus_dir):
        out = tmp_path / "rules"
        data = str(corpus_dir / "corpus.jsonl")
        argv = ["train", "-c", config_path, "--variant", "1", "--data", data, "-o", str(out)]
        assert main(argv) == 0
        model = str(out / "model")
        for thresholds in ("1.5", "0.2,abc"):
            argv = ["sweep-threshold", "-c", config_path, "--model", model, "--data", data]
            assert main([*argv, "--thresholds", thresholds]) == 2

    def test_corpus_fraction_out_of_range(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("corpus:\n  regex_fraction: 1.5\n")
        assert main(["gen-corpus", "-c", str(path), "-o", str(tmp_path / "data")]) == 2
