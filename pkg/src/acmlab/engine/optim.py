"""Adam optimizer, Glorot initialization and seeded random streams."""

from dataclasses import dataclass, field

import numpy as np

from acmlab.config.constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPS
from acmlab.errors import ConfigError, ShapeMismatch


def make_rng(seed: int, *stream) -> np.random.Generator:
    """Deterministic PCG64 generator for `seed`, optionally split into a sub-stream.

    `make_rng(seed, epoch)` and `make_rng(seed, "layer", 3)` give independent,
    reproducible streams derived from the same run seed.
    """
    words = [int(seed)]
    for part in stream:
        if isinstance(part, str):
            words.extend(part.encode())
        else:
            words.append(int(part))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def derive_seed(seed: int, *stream) -> int:
    """Integer seed for a sub-stream (for ops that take a plain seed)."""
    return int(make_rng(seed, *stream).integers(0, 2**63 - 1))


def glorot_init(rows: int, cols: int, seed: int) -> np.ndarray:
    """Uniform(-s, s) matrix with s = sqrt(6 / (rows + cols))."""
    if rows < 1 or cols < 1:
        raise ShapeMismatch(f"glorot_init needs rows, cols >= 1, got ({rows}, {cols})")
    s = np.sqrt(6.0 / (rows + cols))
    return make_rng(seed).uniform(-s, s, size=(rows, cols))


@dataclass
class AdamState:
    """Moment estimates for every parameter, keyed by parameter name."""

    lr: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    weight_decay: float = 0.0
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lr < 0:
            raise ConfigError(f"learning rate must be >= 0, got {self.lr}")


def adam_step(params: dict, grads: dict, state: AdamState, decay=None) -> dict:
    """One bias-corrected Adam update, in place.

    Classic L2 regularisation: weight_decay * param is added to the gradient
    before the moments are updated.

    Args:
        params: name -> parameter array (updated in place)
        grads: name -> gradient array, same shapes as params
        state: optimizer state (updated in place)
        decay: optional set of names the weight decay applies to (default: all)

    Returns:
        the updated params dict

    Raises:
        ShapeMismatch: a gradient is missing or has the wrong shape
    """
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for name, p in params.items():
        if name not in grads:
            raise ShapeMismatch(f"no gradient for parameter {name!r}")
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatch(f"gradient for {name!r} has shape {g.shape}, parameter {p.shape}")
        if state.weight_decay and (decay is None or name in decay):
            g = g + state.weight_decay * p
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params
