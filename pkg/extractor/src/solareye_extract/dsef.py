"""Standalone DSEF v1 writer (the file contract shared with ensemblekit).

Little-endian: magic b"DSEF", version u32 = 1, record count u64, dim u32,
flags u8 (bit0: labels valid); per record power_loss f64, label u8,
dim x f32 features.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"DSEF"
VERSION = 1
FLAG_LABELS = 0x01
_HEADER = struct.Struct("<4sIQIB")


def write_dsef(path, features: np.ndarray, power_loss: np.ndarray,
               labels: np.ndarray | None) -> None:
    """Write one DSEF file; ``labels=None`` clears the labels-valid flag."""
    features = np.ascontiguousarray(features, dtype=np.float32)
    n, dim = features.shape
    flags = 0 if labels is None else FLAG_LABELS
    rec = np.empty(n, dtype=np.dtype(
        [("power_loss", "<f8"), ("label", "u1"), ("features", "<f4", (dim,))]
    ))
    rec["power_loss"] = np.asarray(power_loss, dtype=np.float64)
    rec["label"] = 0 if labels is None else np.asarray(labels, dtype=np.uint8)
    rec["features"] = features
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, dim, flags))
        fh.write(rec.tobytes())
