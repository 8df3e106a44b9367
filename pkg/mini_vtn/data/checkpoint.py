"""Model checkpoints.

Layout::

    "MSVT" | u32 version=1 | u32 manifest_length | manifest (UTF-8 JSON) | payload

The manifest records the model config, free-form metadata, and one entry per tensor
(name, shape, byte offset into the payload). The payload is float32 little-endian,
tensors back to back in ``ModelParams.named_parameters()`` order.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from ..config import ModelConfig
from ..exceptions import FormatError, TruncatedFileError
from ..nn import ModelParams
from ..tensor import resolve_dtype

logger = logging.getLogger(__name__)

MAGIC = b"MSVT"
VERSION = 1

_PREAMBLE = struct.Struct("<4sII")
_SCALAR = np.dtype("<f4")


@dataclass
class Checkpoint:
    params: ModelParams
    config: ModelConfig
    meta: dict[str, Any] = field(default_factory=dict)


def build_manifest(params: ModelParams, config: ModelConfig, meta: dict[str, Any] | None = None) -> dict[str, Any]:
    tensors, offset = [], 0
    for name, tensor in params.named_parameters():
        tensors.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        offset += tensor.numel * _SCALAR.itemsize
    return {
        "config": config.model_dump(),
        "meta": meta or {},
        "tensors": tensors,
        "payload_bytes": offset,
    }


def save_checkpoint(
    path: str | Path, params: ModelParams, config: ModelConfig, meta: dict[str, Any] | None = None
) -> int:
    """Write ``params`` and ``config``; returns the file size in bytes."""
    manifest = json.dumps(build_manifest(params, config, meta), ensure_ascii=False).encode("utf-8")
    payload = b"".join(tensor.data.astype(_SCALAR).tobytes(order="C") for tensor in params.parameters())
    blob = _PREAMBLE.pack(MAGIC, VERSION, len(manifest)) + manifest + payload
    Path(path).write_bytes(blob)
    logger.info("Saved checkpoint %s (%d tensors, %d bytes)", path, len(params.parameters()), len(blob))
    return len(blob)


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint written by ``save_checkpoint``.

    Raises:
        FileNotFoundError: no such file
        FormatError: bad preamble, manifest, missing/extra tensors, or a payload that disagrees with it
        TruncatedFileError: manifest runs past the end of the file
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _PREAMBLE.size:
        raise TruncatedFileError(str(path), _PREAMBLE.size, len(blob))
    magic, version, manifest_length = _PREAMBLE.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path} is not a checkpoint (bad magic)")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    manifest_end = _PREAMBLE.size + manifest_length
    if manifest_end > len(blob):
        raise TruncatedFileError(str(path), manifest_length, len(blob) - _PREAMBLE.size)

    try:
        manifest = json.loads(blob[_PREAMBLE.size : manifest_end].decode("utf-8"))
        config = ModelConfig(**manifest["config"])
        entries = {entry["name"]: entry for entry in manifest["tensors"]}
        declared_payload = int(manifest["payload_bytes"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValidationError) as e:
        raise FormatError(f"{path}: unreadable manifest: {e}") from e

    payload = memoryview(blob)[manifest_end:]
    if len(payload) != declared_payload:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, manifest declares {declared_payload}")

    params = ModelParams.init(config)
    dtype = resolve_dtype(config.precision)
    expected = params.named_parameters()
    extra = set(entries) - {name for name, _ in expected}
    if extra:
        raise FormatError(f"{path}: unexpected tensors in manifest: {sorted(extra)}")

    spans = []
    for name, tensor in expected:
        entry = entries.get(name)
        if entry is None:
            raise FormatError(f"{path}: tensor {name!r} missing from manifest")
        if tuple(entry["shape"]) != tensor.shape:
            raise FormatError(f"{path}: tensor {name!r} has shape {entry['shape']}, model expects {list(tensor.shape)}")
        start = int(entry["offset"])
        end = start + tensor.numel * _SCALAR.itemsize
        if start < 0 or end > len(payload):
            raise FormatError(f"{path}: tensor {name!r} spans [{start}, {end}) outside payload of {len(payload)}")
        spans.append((start, end, name))
        values = np.frombuffer(payload[start:end], dtype=_SCALAR, count=tensor.numel)
        tensor.data[...] = values.reshape(tensor.shape).astype(dtype)

    spans.sort()
    for (_, prev_end, prev_name), (start, _, name) in zip(spans, spans[1:]):
        if start < prev_end:
            raise FormatError(f"{path}: tensors {prev_name!r} and {name!r} overlap")
    if sum(end - start for start, end, _ in spans) != len(payload):
        raise FormatError(f"{path}: payload has bytes no tensor accounts for")

    return Checkpoint(params=params, config=config, meta=manifest.get("meta") or {})
