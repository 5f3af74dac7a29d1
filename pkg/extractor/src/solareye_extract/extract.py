"""Folder-to-DSEF extraction: run the backbone over every image in a
directory (filename-sorted, so output order is stable across machines)
and write one feature record per image.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .backbone import FLATTENED_DIM, POOLED_DIM, POOLING_MODES, build_backbone, embed_batch, preprocess
from .dsef import write_dsef
from .naming import DEFAULT_POWER_LOSS_REGEX, compile_pattern, parse_power_loss

IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp", ".webp")


@dataclass
class ExtractorConfig:
    image_dir: str
    output: str
    pooling: str = "global_average"
    batch_size: int = 16
    power_loss_regex: str = DEFAULT_POWER_LOSS_REGEX
    threshold: float | None = None
    weights: str = "pretrained"
    threads: int = 1  # fixed thread count keeps inference bit-reproducible

    def __post_init__(self):
        if self.pooling not in POOLING_MODES:
            raise ValueError(f"pooling must be one of {POOLING_MODES}, got {self.pooling!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.threshold is not None and not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")


@dataclass
class ExtractSummary:
    written: int
    skipped: list[str]
    dim: int


def _list_images(image_dir: str) -> list[str]:
    names = [n for n in os.listdir(image_dir)
             if n.lower().endswith(IMAGE_EXTENSIONS)]
    if not names:
        raise ValueError(f"no images found in {image_dir}")
    return sorted(names)


def extract_features(cfg: ExtractorConfig) -> ExtractSummary:
    torch.set_num_threads(cfg.threads)
    pattern = compile_pattern(cfg.power_loss_regex)
    names = _list_images(cfg.image_dir)
    # parse every filename first so label errors fail fast, before inference
    losses = {name: parse_power_loss(name, pattern) for name in names}

    base = build_backbone(cfg.weights)
    dim = POOLED_DIM if cfg.pooling == "global_average" else FLATTENED_DIM

    kept: list[str] = []
    skipped: list[str] = []
    features: list[np.ndarray] = []
    batch: list[np.ndarray] = []

    def flush():
        if batch:
            features.append(embed_batch(base, np.stack(batch), cfg.pooling))
            batch.clear()

    for name in names:
        try:
            with Image.open(os.path.join(cfg.image_dir, name)) as img:
                batch.append(preprocess(img))
        except (UnidentifiedImageError, OSError) as exc:
            print(f"warning: skipping undecodable image {name}: {exc}", file=sys.stderr)
            skipped.append(name)
            continue
        kept.append(name)
        if len(batch) == cfg.batch_size:
            flush()
    flush()

    feats = np.concatenate(features) if features else np.zeros((0, dim), dtype=np.float32)
    power_loss = np.array([losses[n] for n in kept])
    labels = None
    if cfg.threshold is not None:
        labels = (power_loss >= cfg.threshold).astype(np.uint8)
    write_dsef(cfg.output, feats, power_loss, labels)

    manifest = {
        "image_dir": os.path.abspath(cfg.image_dir),
        "pooling": cfg.pooling,
        "dim": dim,
        "weights": cfg.weights,
        "power_loss_regex": cfg.power_loss_regex,
        "threshold": cfg.threshold,
        "written": len(kept),
        "skipped": skipped,
    }
    with open(f"{cfg.output}.manifest", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ExtractSummary(written=len(kept), skipped=skipped, dim=dim)
