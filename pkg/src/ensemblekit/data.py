"""Feature-set data model, DSEF/CSV file I/O, label binarization and splitting.

The on-disk currency of the whole pipeline is the DSEF v1 binary format
(little-endian):

    magic  b"DSEF"                4 bytes
    version u32 = 1               4 bytes
    record count u64              8 bytes
    dim u32                       4 bytes
    flags u8 (bit0: labels valid) 1 byte
    per record: power_loss f64, label u8, dim * f32 features

Features are stored at extractor-native 32-bit precision; everything in
memory is 64-bit. Record source ids are not persisted; readers assign the
canonical ``record:<i>``. The CSV alternative has header
``power_loss,label,f0,...,f{d-1}``, one row per record.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .numeric import make_rng

DSEF_MAGIC = b"DSEF"
DSEF_VERSION = 1
_HEADER = struct.Struct("<4sIQIB")
FLAG_LABELS = 0x01


class FeatureFileError(ValueError):
    """Base class for feature-file problems."""


class FeatureFormatError(FeatureFileError):
    """Bad magic bytes, unsupported version, or malformed CSV schema."""


class FeatureCorruptionError(FeatureFileError):
    """Payload shorter than the header promises."""


class FeatureDataError(FeatureFileError):
    """Non-finite or out-of-range values in an otherwise well-formed file."""


@dataclass(frozen=True)
class FeatureRecord:
    """One image's feature vector plus its power-loss fraction and label."""

    features: np.ndarray
    power_loss: float
    label: int
    source_id: str


@dataclass
class FeatureSet:
    """Column-oriented table of feature records.

    ``features`` is (N, dim) float64, ``power_loss`` (N,) float64 in [0, 1],
    ``labels`` (N,) int64 in {0, 1}, ``source_ids`` a list of N opaque
    strings. Treat instances as immutable after construction.
    """

    features: np.ndarray
    power_loss: np.ndarray
    labels: np.ndarray
    source_ids: list[str]

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.power_loss = np.ascontiguousarray(self.power_loss, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D array")
        n = self.features.shape[0]
        if self.power_loss.shape != (n,) or self.labels.shape != (n,) or len(self.source_ids) != n:
            raise ValueError("features, power_loss, labels and source_ids must agree in length")
        if self.features.shape[1] < 1:
            raise ValueError("feature dimension must be positive")
        if not np.all(np.isfinite(self.features)):
            bad = int(np.flatnonzero(~np.isfinite(self.features).all(axis=1))[0])
            raise FeatureDataError(f"non-finite feature value in record {bad}")
        pl_bad = ~(np.isfinite(self.power_loss) & (self.power_loss >= 0.0) & (self.power_loss <= 1.0))
        if pl_bad.any():
            raise FeatureDataError(f"power_loss outside [0, 1] in record {int(np.flatnonzero(pl_bad)[0])}")
        if n and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 (clean) or 1 (soiled)")

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return (
            self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.power_loss, other.power_loss)
            and np.array_equal(self.labels, other.labels)
            and self.source_ids == other.source_ids
        )

    def record(self, i: int) -> FeatureRecord:
        return FeatureRecord(self.features[i], float(self.power_loss[i]),
                             int(self.labels[i]), self.source_ids[i])

    def records(self) -> Iterator[FeatureRecord]:
        return (self.record(i) for i in range(len(self)))

    def take(self, indices: np.ndarray) -> "FeatureSet":
        indices = np.asarray(indices, dtype=np.intp)
        return FeatureSet(
            features=self.features[indices],
            power_loss=self.power_loss[indices],
            labels=self.labels[indices],
            source_ids=[self.source_ids[i] for i in indices],
        )

    @classmethod
    def from_records(cls, records: list[FeatureRecord], dim: int | None = None) -> "FeatureSet":
        if not records:
            if dim is None:
                raise ValueError("dim required for an empty FeatureSet")
            return cls.empty(dim)
        return cls(
            features=np.stack([r.features for r in records]),
            power_loss=np.array([r.power_loss for r in records]),
            labels=np.array([r.label for r in records]),
            source_ids=[r.source_id for r in records],
        )

    @classmethod
    def empty(cls, dim: int) -> "FeatureSet":
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros(0, dtype=np.int64), [])


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.20
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")


def _record_dtype(dim: int) -> np.dtype:
    return np.dtype([("power_loss", "<f8"), ("label", "u1"), ("features", "<f4", (dim,))])


def dsef_bytes(fset: FeatureSet, labels_valid: bool = True) -> bytes:
    """Serialize a FeatureSet to DSEF v1 bytes (features narrowed to f32)."""
    flags = FLAG_LABELS if labels_valid else 0
    header = _HEADER.pack(DSEF_MAGIC, DSEF_VERSION, len(fset), fset.dim, flags)
    payload = np.empty(len(fset), dtype=_record_dtype(fset.dim))
    payload["power_loss"] = fset.power_loss
    payload["label"] = fset.labels if labels_valid else 0
    payload["features"] = fset.features.astype(np.float32)
    return header + payload.tobytes()


def parse_dsef(blob: bytes) -> FeatureSet:
    if len(blob) < _HEADER.size:
        raise FeatureCorruptionError(f"file too short for a DSEF header ({len(blob)} bytes)")
    magic, version, count, dim, flags = _HEADER.unpack_from(blob)
    if magic != DSEF_MAGIC:
        raise FeatureFormatError(f"bad magic bytes {magic!r}")
    if version != DSEF_VERSION:
        raise FeatureFormatError(f"unsupported DSEF version {version}")
    if dim < 1:
        raise FeatureFormatError(f"invalid dim {dim}")
    rec_dtype = _record_dtype(dim)
    expected = _HEADER.size + count * rec_dtype.itemsize
    if len(blob) != expected:
        raise FeatureCorruptionError(
            f"truncated payload: header promises {expected} bytes, file has {len(blob)}"
        )
    payload = np.frombuffer(blob, dtype=rec_dtype, offset=_HEADER.size)
    features = payload["features"].astype(np.float64).reshape(count, dim)
    if not np.all(np.isfinite(features)):
        bad = int(np.flatnonzero(~np.isfinite(features).all(axis=1))[0])
        raise FeatureDataError(f"non-finite feature value in record {bad}")
    labels = payload["label"].astype(np.int64) if flags & FLAG_LABELS else np.zeros(count, dtype=np.int64)
    return FeatureSet(
        features=features,
        power_loss=payload["power_loss"].astype(np.float64),
        labels=labels,
        source_ids=[f"record:{i}" for i in range(count)],
    )


def read_features(path) -> FeatureSet:
    """Load a feature file, auto-detecting DSEF (magic bytes) vs CSV."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] == DSEF_MAGIC:
        return parse_dsef(blob)
    return _parse_csv(blob.decode("utf-8"))


def write_features(fset: FeatureSet, path, format: str = "dsef") -> None:
    if format == "dsef":
        with open(path, "wb") as fh:
            fh.write(dsef_bytes(fset))
    elif format == "csv":
        with open(path, "w", newline="") as fh:
            _write_csv(fset, fh)
    else:
        raise ValueError(f"unknown format {format!r} (expected 'dsef' or 'csv')")


def _write_csv(fset: FeatureSet, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["power_loss", "label"] + [f"f{i}" for i in range(fset.dim)])
    for i in range(len(fset)):
        writer.writerow(
            [repr(float(fset.power_loss[i])), int(fset.labels[i])]
            + [repr(float(v)) for v in fset.features[i]]
        )


def _parse_csv(text: str) -> FeatureSet:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise FeatureFormatError("empty CSV file")
    header = rows[0]
    dim = len(header) - 2
    if dim < 1 or header[:2] != ["power_loss", "label"] or header[2:] != [f"f{i}" for i in range(dim)]:
        raise FeatureFormatError(f"unexpected CSV header {header!r}")
    n = len(rows) - 1
    features = np.empty((n, dim))
    power_loss = np.empty(n)
    labels = np.empty(n, dtype=np.int64)
    for i, row in enumerate(rows[1:]):
        if len(row) != dim + 2:
            raise FeatureFormatError(f"CSV row {i} has {len(row)} fields, expected {dim + 2}")
        try:
            power_loss[i] = float(row[0])
            labels[i] = int(row[1])
            features[i] = [float(v) for v in row[2:]]
        except ValueError as exc:
            raise FeatureDataError(f"unparseable value in CSV record {i}: {exc}") from exc
        if not np.all(np.isfinite(features[i])):
            raise FeatureDataError(f"non-finite feature value in record {i}")
    return FeatureSet(features, power_loss, labels, [f"record:{i}" for i in range(n)])


def binarize_labels(fset: FeatureSet, threshold: float) -> FeatureSet:
    """Label records soiled (1) when power_loss >= threshold, else clean (0).

    The boundary itself counts as soiled: for maintenance use a panel at
    exactly the cut point should be flagged.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    return FeatureSet(
        features=fset.features,
        power_loss=fset.power_loss,
        labels=(fset.power_loss >= threshold).astype(np.int64),
        source_ids=list(fset.source_ids),
    )


def stratified_split(fset: FeatureSet, cfg: SplitConfig) -> tuple[FeatureSet, FeatureSet]:
    """Partition into (train, test) with per-class test counts of
    round(class_count * test_fraction); deterministic for a fixed seed."""
    if len(fset) == 0:
        raise ValueError("cannot split an empty FeatureSet")
    rng = make_rng(cfg.seed)
    if cfg.stratified:
        test_parts = []
        for cls in np.unique(fset.labels):
            cls_idx = np.flatnonzero(fset.labels == cls)
            n_test = int(round(len(cls_idx) * cfg.test_fraction))
            test_parts.append(rng.permutation(cls_idx)[:n_test])
        test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.zeros(0, dtype=np.intp)
    else:
        n_test = int(round(len(fset) * cfg.test_fraction))
        test_idx = np.sort(rng.permutation(len(fset))[:n_test])
    mask = np.zeros(len(fset), dtype=bool)
    mask[test_idx] = True
    return fset.take(np.flatnonzero(~mask)), fset.take(test_idx)


def class_histogram(fset: FeatureSet) -> dict[int, int]:
    values, counts = np.unique(fset.labels, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
