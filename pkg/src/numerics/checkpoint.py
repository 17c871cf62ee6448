"""Parameter checkpoints: a JSON header line followed by raw float64 values.

Layout::

    {"format_version": 1, "params": [{"name": ..., "rows": ..., "cols": ...}, ...]}\\n
    <little-endian float64 values of every parameter, in manifest order>
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ValidationError

from src.errors import CheckpointFormatError, ExportError, MissingFileError
from src.numerics.kernels import Param

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_LE_FLOAT64 = np.dtype("<f8")


class ManifestEntry(BaseModel):
    name: str
    rows: int
    cols: int


class CheckpointHeader(BaseModel):
    format_version: int = FORMAT_VERSION
    params: list[ManifestEntry]


def save_checkpoint(params: list[Param], path: str | Path) -> Path:
    """Write every parameter value to ``path``; output is byte-stable."""
    out = Path(path)
    header = CheckpointHeader(
        params=[ManifestEntry(name=p.name, rows=p.shape[0], cols=p.shape[1]) for p in params]
    )
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "wb") as f:
            f.write(header.model_dump_json().encode("utf-8") + b"\n")
            for p in params:
                f.write(p.value.astype(_LE_FLOAT64).tobytes(order="C"))
    except OSError as exc:
        raise ExportError(f"Cannot write checkpoint {out}: {exc}") from exc
    logger.debug("Saved %d parameters to %s", len(params), out)
    return out


def read_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    """Read a checkpoint into an ordered ``name -> array`` mapping."""
    src = Path(path)
    if not src.is_file():
        raise MissingFileError(src)

    blob = src.read_bytes()
    newline = blob.find(b"\n")
    if newline < 0:
        raise CheckpointFormatError(f"{src}: missing header line")
    try:
        header = CheckpointHeader.model_validate_json(blob[:newline])
    except ValidationError as exc:
        raise CheckpointFormatError(f"{src}: invalid header: {exc}") from exc
    if header.format_version != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"{src}: unsupported format version {header.format_version}"
        )

    body = memoryview(blob)[newline + 1 :]
    expected = sum(e.rows * e.cols for e in header.params) * _LE_FLOAT64.itemsize
    if len(body) != expected:
        raise CheckpointFormatError(f"{src}: expected {expected} value bytes, found {len(body)}")

    values: dict[str, np.ndarray] = {}
    offset = 0
    for entry in header.params:
        count = entry.rows * entry.cols
        chunk = np.frombuffer(body, dtype=_LE_FLOAT64, count=count, offset=offset)
        values[entry.name] = chunk.astype(np.float64).reshape(entry.rows, entry.cols)
        offset += count * _LE_FLOAT64.itemsize
    return values


def load_checkpoint(params: list[Param], path: str | Path) -> None:
    """Restore ``params`` in place from ``path``; names and shapes must agree."""
    values = read_checkpoint(path)
    names = [p.name for p in params]
    if list(values) != names:
        raise CheckpointFormatError(
            f"checkpoint holds {list(values)[:3]}..., model expects {names[:3]}..."
        )
    for p in params:
        stored = values[p.name]
        if stored.shape != p.shape:
            raise CheckpointFormatError(f"{p.name}: stored {stored.shape}, model {p.shape}")
        p.value[...] = stored
    logger.info("Restored %d parameters from %s", len(params), path)


def snapshot(params: list[Param]) -> list[np.ndarray]:
    """Copy current parameter values."""
    return [p.value.copy() for p in params]


def restore(params: list[Param], saved: list[np.ndarray]) -> None:
    """Write values from :func:`snapshot` back into ``params`` in place."""
    for p, value in zip(params, saved, strict=True):
        p.value[...] = value
