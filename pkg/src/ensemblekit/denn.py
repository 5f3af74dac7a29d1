"""Dual-branch neural classifier trained with Adam on cross-entropy.

The input feature vector is split into two equal halves. Each half goes
through its own affine map + ReLU (one branch is nominally the "CNN"
branch, the other the "MLP" branch, but both are plain affine+ReLU maps on
half the feature vector - the branch names label which half of an upstream
extractor's features they consume, not a convolutional stack). The two
branch outputs are concatenated and classified by an affine meta-layer
under softmax.

Checkpoint format (little-endian): magic b"DENN", version u32 = 1,
config JSON (u32 length prefix), then the six parameter blocks as raw
f64 in declaration order (w_cnn, b_cnn, w_mlp, b_mlp, w_meta, b_meta).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, asdict, field

import numpy as np

from .data import FeatureSet
from .numeric import AdamState, adam_update, cross_entropy, make_rng, relu, softmax, spawn_rng

DENN_MAGIC = b"DENN"
DENN_VERSION = 1

#: parameter blocks in checkpoint declaration order
PARAM_FIELDS = ("w_cnn", "b_cnn", "w_mlp", "b_mlp", "w_meta", "b_meta")


@dataclass(frozen=True)
class DennConfig:
    input_dim: int
    branch_width: int = 128
    num_classes: int = 2
    epochs: int = 30
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.input_dim < 2 or self.input_dim % 2:
            raise ValueError(f"input_dim must be even and >= 2, got {self.input_dim}")
        if self.branch_width < 1:
            raise ValueError("branch_width must be >= 1")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")

    @property
    def half_dim(self) -> int:
        return self.input_dim // 2

    @property
    def fused_width(self) -> int:
        return 2 * self.branch_width


@dataclass
class DennModel:
    w_cnn: np.ndarray
    b_cnn: np.ndarray
    w_mlp: np.ndarray
    b_mlp: np.ndarray
    w_meta: np.ndarray
    b_meta: np.ndarray
    config: DennConfig

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_FIELDS}

    def __eq__(self, other) -> bool:
        if not isinstance(other, DennModel):
            return NotImplemented
        return self.config == other.config and all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in PARAM_FIELDS
        )


@dataclass
class TrainReport:
    epoch_losses: list[float]
    final_train_accuracy: float
    steps: int  # total optimizer steps taken (== epochs * ceil(N / batch_size))


@dataclass
class ForwardCache:
    x_cnn: np.ndarray
    x_mlp: np.ndarray
    z_cnn: np.ndarray
    z_mlp: np.ndarray
    f_dual: np.ndarray
    probs: np.ndarray


def denn_init(cfg: DennConfig, rng: np.random.Generator) -> DennModel:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases."""
    def uniform(rows, cols):
        bound = 1.0 / math.sqrt(cols)
        return rng.uniform(-bound, bound, size=(rows, cols))

    h, w, c = cfg.half_dim, cfg.branch_width, cfg.num_classes
    return DennModel(
        w_cnn=uniform(w, h),
        b_cnn=np.zeros(w),
        w_mlp=uniform(w, h),
        b_mlp=np.zeros(w),
        w_meta=uniform(c, cfg.fused_width),
        b_meta=np.zeros(c),
        config=cfg,
    )


def denn_forward(model: DennModel, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Class probabilities and the activation cache for one input vector."""
    cfg = model.config
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cfg.input_dim,):
        raise ValueError(f"expected input of shape ({cfg.input_dim},), got {x.shape}")
    x_cnn, x_mlp = x[: cfg.half_dim], x[cfg.half_dim:]
    z_cnn = model.w_cnn @ x_cnn + model.b_cnn
    z_mlp = model.w_mlp @ x_mlp + model.b_mlp
    f_dual = np.concatenate([relu(z_cnn), relu(z_mlp)])
    probs = softmax(model.w_meta @ f_dual + model.b_meta)
    return probs, ForwardCache(x_cnn, x_mlp, z_cnn, z_mlp, f_dual, probs)


def denn_gradients(model: DennModel, x: np.ndarray, label: int) -> dict[str, np.ndarray]:
    """Analytic gradients of the cross-entropy loss for one example.

    The ReLU subgradient at exactly zero is taken as zero.
    """
    cfg = model.config
    probs, cache = denn_forward(model, x)
    if not 0 <= label < cfg.num_classes:
        raise IndexError(f"label {label} out of range")
    d_logits = probs.copy()
    d_logits[label] -= 1.0
    d_f_dual = model.w_meta.T @ d_logits
    d_z_cnn = d_f_dual[: cfg.branch_width] * (cache.z_cnn > 0)
    d_z_mlp = d_f_dual[cfg.branch_width:] * (cache.z_mlp > 0)
    return {
        "w_cnn": np.outer(d_z_cnn, cache.x_cnn),
        "b_cnn": d_z_cnn,
        "w_mlp": np.outer(d_z_mlp, cache.x_mlp),
        "b_mlp": d_z_mlp,
        "w_meta": np.outer(d_logits, cache.f_dual),
        "b_meta": d_logits,
    }


def _forward_batch(model: DennModel, X: np.ndarray):
    """Vectorized forward pass used for training; returns probs and caches."""
    h, w = model.config.half_dim, model.config.branch_width
    x_cnn, x_mlp = X[:, :h], X[:, h:]
    z_cnn = x_cnn @ model.w_cnn.T + model.b_cnn
    z_mlp = x_mlp @ model.w_mlp.T + model.b_mlp
    f_dual = np.concatenate([relu(z_cnn), relu(z_mlp)], axis=1)
    probs = softmax(f_dual @ model.w_meta.T + model.b_meta)
    return probs, (x_cnn, x_mlp, z_cnn, z_mlp, f_dual)


def _batch_gradients(model: DennModel, X: np.ndarray, labels: np.ndarray):
    """Mean gradients over a mini-batch plus the summed sample losses."""
    w = model.config.branch_width
    probs, (x_cnn, x_mlp, z_cnn, z_mlp, f_dual) = _forward_batch(model, X)
    n = X.shape[0]
    picked = probs[np.arange(n), labels]
    loss_sum = float(-np.log(np.maximum(picked, 1e-12)).sum())

    d_logits = probs.copy()
    d_logits[np.arange(n), labels] -= 1.0
    d_logits /= n
    d_f_dual = d_logits @ model.w_meta
    d_z_cnn = d_f_dual[:, :w] * (z_cnn > 0)
    d_z_mlp = d_f_dual[:, w:] * (z_mlp > 0)
    grads = {
        "w_cnn": d_z_cnn.T @ x_cnn,
        "b_cnn": d_z_cnn.sum(axis=0),
        "w_mlp": d_z_mlp.T @ x_mlp,
        "b_mlp": d_z_mlp.sum(axis=0),
        "w_meta": d_logits.T @ f_dual,
        "b_meta": d_logits.sum(axis=0),
    }
    return grads, loss_sum


def denn_fit(train: FeatureSet, cfg: DennConfig) -> tuple[DennModel, TrainReport]:
    """Mini-batch Adam training over shuffled epochs.

    The shuffle is reseeded deterministically per epoch from cfg.seed, and
    gradients are averaged within each batch, so a fixed (data, config,
    seed) triple always yields a bit-identical model.
    """
    if len(train) == 0:
        raise ValueError("cannot fit on an empty training set")
    if train.dim != cfg.input_dim:
        raise ValueError(f"data dim {train.dim} != config input_dim {cfg.input_dim}")
    model = denn_init(cfg, make_rng(cfg.seed))
    states = {name: AdamState.for_param(p) for name, p in model.params().items()}
    X, y = train.features, train.labels
    n = len(train)
    epoch_losses = []
    for epoch in range(cfg.epochs):
        order = spawn_rng(cfg.seed, 1, epoch).permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start: start + cfg.batch_size]
            grads, batch_loss = _batch_gradients(model, X[batch], y[batch])
            loss_sum += batch_loss
            for name, g in grads.items():
                setattr(model, name, adam_update(getattr(model, name), g, states[name], lr=cfg.lr))
        epoch_losses.append(loss_sum / n)
    pred = np.argmax(denn_predict_proba(model, train), axis=1)
    report = TrainReport(
        epoch_losses=epoch_losses,
        final_train_accuracy=float(np.mean(pred == y)),
        steps=states["w_cnn"].t,
    )
    return model, report


def denn_predict_proba(model: DennModel, fset: FeatureSet) -> np.ndarray:
    """(N, num_classes) probabilities; row i equals denn_forward on record i."""
    if fset.dim != model.config.input_dim:
        raise ValueError(f"data dim {fset.dim} != model input_dim {model.config.input_dim}")
    if len(fset) == 0:
        return np.zeros((0, model.config.num_classes))
    return np.stack([denn_forward(model, x)[0] for x in fset.features])


def save_denn(model: DennModel, path) -> None:
    cfg_blob = json.dumps(asdict(model.config), sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(DENN_MAGIC)
        fh.write(struct.pack("<I", DENN_VERSION))
        fh.write(struct.pack("<I", len(cfg_blob)))
        fh.write(cfg_blob)
        for name in PARAM_FIELDS:
            fh.write(np.ascontiguousarray(getattr(model, name), dtype="<f8").tobytes())


def load_denn(path) -> DennModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != DENN_MAGIC:
        raise ValueError(f"bad checkpoint magic {blob[:4]!r}")
    version, cfg_len = struct.unpack_from("<II", blob, 4)
    if version != DENN_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    offset = 12
    cfg = DennConfig(**json.loads(blob[offset: offset + cfg_len].decode("utf-8")))
    offset += cfg_len
    h, w, c = cfg.half_dim, cfg.branch_width, cfg.num_classes
    shapes = {
        "w_cnn": (w, h), "b_cnn": (w,),
        "w_mlp": (w, h), "b_mlp": (w,),
        "w_meta": (c, 2 * w), "b_meta": (c,),
    }
    params = {}
    for name in PARAM_FIELDS:
        shape = shapes[name]
        count = int(np.prod(shape))
        params[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += count * 8
    if offset != len(blob):
        raise ValueError("checkpoint has trailing bytes")
    return DennModel(config=cfg, **params)
