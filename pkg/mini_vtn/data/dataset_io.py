"""MSGV container for multi-stream sequences and per-sample posteriors.

Layout, all integers u32 little-endian, all scalars float32 little-endian::

    "MSGV" | version=1 | sample_count | stream_count | T | C
    per stream:  u8 tag_length | tag bytes (UTF-8) | F
    per sample:  label | per stream T*F scalars, row-major

Posterior files reuse the container with one stream tagged "post", T=1 and F=C.
"""

import struct
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..exceptions import ArgumentError, FormatError, ShapeError, TruncatedFileError
from ..schema import ClassPosterior
from ..tensor import Tensor
from .synth import GestureSample

MAGIC = b"MSGV"
VERSION = 1
POSTERIOR_TAG = "post"

_HEADER = struct.Struct("<4s5I")
_U32 = struct.Struct("<I")
_U8 = struct.Struct("<B")
_SCALAR = np.dtype("<f4")


@dataclass
class GestureDataset:
    """Samples plus the header fields a file needs even when it holds no samples."""

    samples: list[GestureSample]
    class_count: int
    sequence_length: int
    stream_dims: dict[str, int]  # tag -> F, in file order

    @classmethod
    def from_samples(cls, samples: Sequence[GestureSample], class_count: int) -> "GestureDataset":
        if not samples:
            raise ArgumentError("from_samples needs at least one sample; build GestureDataset directly otherwise")
        first = samples[0]
        stream_dims = {tag: tensor.shape[1] for tag, tensor in first.streams.items()}
        return cls(list(samples), class_count, first.sequence_length, stream_dims)

    @property
    def stream_tags(self) -> list[str]:
        return list(self.stream_dims)

    @property
    def labels(self) -> list[int]:
        return [sample.label for sample in self.samples]

    def select(self, stream: str) -> "GestureDataset":
        """Single-stream view of this dataset."""
        if stream not in self.stream_dims:
            raise ArgumentError(f"Unknown stream {stream!r}; file has {self.stream_tags}")
        samples = [GestureSample(streams={stream: s.streams[stream]}, label=s.label) for s in self.samples]
        return GestureDataset(samples, self.class_count, self.sequence_length, {stream: self.stream_dims[stream]})

    def header_bytes(self) -> int:
        return _HEADER.size + sum(_U8.size + len(tag.encode("utf-8")) + _U32.size for tag in self.stream_dims)

    def sample_bytes(self) -> int:
        return _U32.size + sum(_SCALAR.itemsize * self.sequence_length * f for f in self.stream_dims.values())


def write_dataset(path: str | Path, dataset: GestureDataset) -> int:
    """Write ``dataset``; returns the number of bytes written.

    Raises:
        ShapeError: a sample does not match the header's streams and extents
        ArgumentError: a label is outside [0, C) or a tag is too long
    """
    chunks = [
        _HEADER.pack(
            MAGIC,
            VERSION,
            len(dataset.samples),
            len(dataset.stream_dims),
            dataset.sequence_length,
            dataset.class_count,
        )
    ]
    for tag, width in dataset.stream_dims.items():
        encoded = tag.encode("utf-8")
        if not 0 < len(encoded) < 256:
            raise ArgumentError(f"Stream tag {tag!r} must be 1..255 bytes")
        chunks.append(_U8.pack(len(encoded)) + encoded + _U32.pack(width))

    expected = {tag: (dataset.sequence_length, width) for tag, width in dataset.stream_dims.items()}
    for index, sample in enumerate(dataset.samples):
        if not 0 <= sample.label < dataset.class_count:
            raise ArgumentError(f"Sample {index}: label {sample.label} outside [0, {dataset.class_count})")
        if list(sample.streams) != list(expected):
            raise ShapeError(f"Sample {index}: streams {list(sample.streams)} != {list(expected)}")
        chunks.append(_U32.pack(sample.label))
        for tag, shape in expected.items():
            frames = sample.streams[tag]
            if frames.shape != shape:
                raise ShapeError(f"Sample {index}, stream {tag!r}: shape {frames.shape} != {shape}")
            chunks.append(frames.data.astype(_SCALAR).tobytes(order="C"))

    payload = b"".join(chunks)
    Path(path).write_bytes(payload)
    return len(payload)


class _Reader:
    def __init__(self, path: Path, buffer: bytes):
        self.path = path
        self.buffer = buffer
        self.offset = 0

    def take(self, size: int) -> bytes:
        available = len(self.buffer) - self.offset
        if size > available:
            raise TruncatedFileError(str(self.path), size, available)
        chunk = self.buffer[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(_U32.size))[0]

    def u8(self) -> int:
        return _U8.unpack(self.take(_U8.size))[0]


def read_dataset(path: str | Path) -> GestureDataset:
    """Read a file written by ``write_dataset``; scalars come back bit-exact as float32.

    Raises:
        FileNotFoundError: no such file
        FormatError: bad magic, version or header fields
        TruncatedFileError: the file ends early
    """
    path = Path(path)
    reader = _Reader(path, path.read_bytes())
    if len(reader.buffer) < len(MAGIC) or reader.buffer[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path} is not an MSGV file (bad magic)")
    magic, version, sample_count, stream_count, length, class_count = _HEADER.unpack(reader.take(_HEADER.size))
    if version != VERSION:
        raise FormatError(f"{path}: unsupported MSGV version {version}, expected {VERSION}")
    if stream_count < 1 or length < 1:
        raise FormatError(f"{path}: header declares {stream_count} streams of length {length}")

    stream_dims: dict[str, int] = {}
    for _ in range(stream_count):
        try:
            tag = reader.take(reader.u8()).decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"{path}: stream tag is not UTF-8") from e
        if tag in stream_dims:
            raise FormatError(f"{path}: duplicate stream tag {tag!r}")
        width = reader.u32()
        if width < 1:
            raise FormatError(f"{path}: stream {tag!r} declares frame width {width}")
        stream_dims[tag] = width

    samples = []
    for index in range(sample_count):
        label = reader.u32()
        if label >= max(class_count, 1):
            raise FormatError(f"{path}: sample {index} has label {label} outside [0, {class_count})")
        streams = {}
        for tag, width in stream_dims.items():
            count = length * width
            raw = reader.take(count * _SCALAR.itemsize)
            values = np.frombuffer(raw, dtype=_SCALAR, count=count).astype(np.float32)
            streams[tag] = Tensor(values.reshape(length, width))
        samples.append(GestureSample(streams=streams, label=label))

    if reader.offset != len(reader.buffer):
        raise FormatError(f"{path}: {len(reader.buffer) - reader.offset} trailing bytes after the last sample")
    return GestureDataset(samples, class_count, length, stream_dims)


def write_posteriors(path: str | Path, labels: Sequence[int], posteriors: Sequence[ClassPosterior]) -> int:
    """Store per-sample posteriors as a one-stream MSGV file (T=1, F=C)."""
    if len(labels) != len(posteriors):
        raise ShapeError(f"{len(labels)} labels for {len(posteriors)} posteriors")
    if not posteriors:
        raise ArgumentError("No posteriors to write")
    class_count = posteriors[0].class_count
    samples = []
    for label, posterior in zip(labels, posteriors):
        if posterior.class_count != class_count:
            raise ShapeError(f"Posterior has {posterior.class_count} classes, expected {class_count}")
        frames = Tensor(np.asarray([posterior.probs], dtype=np.float32))
        samples.append(GestureSample(streams={POSTERIOR_TAG: frames}, label=int(label)))
    return write_dataset(path, GestureDataset(samples, class_count, 1, {POSTERIOR_TAG: class_count}))


def read_posteriors(path: str | Path, stream_id: str | None = None) -> tuple[list[int], list[ClassPosterior]]:
    """Labels and posteriors from a posterior file; ``stream_id`` defaults to the file stem."""
    dataset = read_dataset(path)
    if dataset.stream_tags != [POSTERIOR_TAG] or dataset.sequence_length != 1:
        raise FormatError(
            f"{path} is not a posterior file (streams {dataset.stream_tags}, T={dataset.sequence_length})"
        )
    if dataset.stream_dims[POSTERIOR_TAG] != dataset.class_count:
        raise FormatError(f"{path}: posterior width {dataset.stream_dims[POSTERIOR_TAG]} != C={dataset.class_count}")
    stream_id = stream_id or Path(path).stem
    posteriors = [
        ClassPosterior(stream_id=stream_id, probs=[float(p) for p in s.streams[POSTERIOR_TAG].data[0]])
        for s in dataset.samples
    ]
    return dataset.labels, posteriors
