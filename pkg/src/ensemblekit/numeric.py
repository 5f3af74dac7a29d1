"""Deterministic numeric kernel shared by every model in the package.

Conventions: all floating-point work is 64-bit; matrices are row-major
numpy arrays; every stochastic routine takes an explicit generator built
by :func:`make_rng` / :func:`spawn_rng` (PCG64, so identical seeds give
identical streams on every platform).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator. Seeds are taken modulo 2**64."""
    return np.random.Generator(np.random.PCG64(seed & _SEED_MASK))


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Derive an independent, reproducible substream from (seed, key).

    Used to hand each ensemble member / epoch / pipeline stage its own
    generator so that parallel and serial execution draw identical numbers.
    """
    entropy = (seed & _SEED_MASK,) + tuple(k & _SEED_MASK for k in key)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *key: int) -> int:
    """Stable 64-bit sub-seed hashed from (seed, key)."""
    entropy = (seed & _SEED_MASK,) + tuple(k & _SEED_MASK for k in key)
    lo, hi = np.random.SeedSequence(entropy).generate_state(2, np.uint64)[:2]
    return int(lo)


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0.0)


def softmax(z: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax over the last axis of ``z``.

    Raises ValueError on empty input (malformed logits).
    """
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("softmax: empty logits")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


#: probabilities are clipped here before the log so a zero probability
#: yields a large finite loss instead of -inf
CLIP_EPS = 1e-12


def cross_entropy(probs: np.ndarray, label: int) -> float:
    """Negative log-probability of ``label`` under ``probs``.

    ``probs`` must be a distribution (sums to 1 within 1e-9); the picked
    probability is clipped at ``CLIP_EPS`` before the log.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if abs(float(probs.sum()) - 1.0) > 1e-9:
        raise ValueError(f"cross_entropy: probs sum to {probs.sum()!r}, not 1")
    if not 0 <= label < probs.shape[0]:
        raise IndexError(f"cross_entropy: label {label} out of range for {probs.shape[0]} classes")
    return float(-np.log(max(float(probs[label]), CLIP_EPS)))


@dataclass
class AdamState:
    """First/second moment accumulators and step counter for one parameter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def for_param(cls, param: np.ndarray) -> "AdamState":
        return cls(m=np.zeros_like(param, dtype=np.float64),
                   v=np.zeros_like(param, dtype=np.float64))


def adam_update(
    param: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> np.ndarray:
    """One bias-corrected Adam step; returns the updated parameter.

    ``state`` is mutated in place (single-owner). Defaults are the
    conventional lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8.
    """
    if param.shape != grad.shape or param.shape != state.m.shape:
        raise ValueError(
            f"adam_update: shape mismatch param={param.shape} grad={grad.shape} m={state.m.shape}"
        )
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = state.m / (1.0 - beta1 ** state.t)
    v_hat = state.v / (1.0 - beta2 ** state.t)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps)
