"""Tests for parameter checkpoints."""

from __future__ import annotations

import numpy as np
import pytest

from src.errors import CheckpointFormatError, MissingFileError
from src.numerics.checkpoint import (
    load_checkpoint,
    read_checkpoint,
    restore,
    save_checkpoint,
    snapshot,
)
from src.numerics.kernels import Param


def _params(seed=0):
    rng = np.random.default_rng(seed)
    return [Param("a.weight", rng.normal(size=(3, 4))), Param("a.bias", rng.normal(size=(1, 4)))]


class TestCheckpoint:
    def test_restores_values(self, tmp_path):
        path = save_checkpoint(_params(0), tmp_path / "m.ckpt")
        target = _params(1)
        load_checkpoint(target, path)
        for stored, restored in zip(_params(0), target):
            np.testing.assert_array_equal(stored.value, restored.value)

    def test_header_manifest(self, tmp_path):
        path = save_checkpoint(_params(), tmp_path / "m.ckpt")
        values = read_checkpoint(path)
        assert list(values) == ["a.weight", "a.bias"]
        assert values["a.weight"].shape == (3, 4)

    def test_byte_stable(self, tmp_path):
        first = save_checkpoint(_params(), tmp_path / "a.ckpt").read_bytes()
        second = save_checkpoint(_params(), tmp_path / "b.ckpt").read_bytes()
        assert first == second

    def test_body_is_little_endian_float64(self, tmp_path):
        path = save_checkpoint([Param("x", np.array([[1.5, -2.0]]))], tmp_path / "x.ckpt")
        body = path.read_bytes().split(b"\n", 1)[1]
        np.testing.assert_array_equal(np.frombuffer(body, dtype="<f8"), [1.5, -2.0])

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            read_checkpoint(tmp_path / "absent.ckpt")

    def test_truncated_body(self, tmp_path):
        path = save_checkpoint(_params(), tmp_path / "m.ckpt")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CheckpointFormatError):
            read_checkpoint(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b'{"params": "nope"}\n')
        with pytest.raises(CheckpointFormatError):
            read_checkpoint(path)

    def test_name_mismatch(self, tmp_path):
        path = save_checkpoint(_params(), tmp_path / "m.ckpt")
        other = [Param("b.weight", np.zeros((3, 4))), Param("a.bias", np.zeros((1, 4)))]
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(other, path)

    def test_shape_mismatch(self, tmp_path):
        path = save_checkpoint(_params(), tmp_path / "m.ckpt")
        other = [Param("a.weight", np.zeros((4, 3))), Param("a.bias", np.zeros((1, 4)))]
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(other, path)


class TestSnapshot:
    def test_restore_in_place(self):
        params = _params()
        saved = snapshot(params)
        original = params[0].value
        params[0].value += 1.0
        restore(params, saved)
        assert params[0].value is original
        np.testing.assert_array_equal(params[0].value, saved[0])
