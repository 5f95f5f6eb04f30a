"""Central finite-difference checks for tape gradients."""

from dataclasses import dataclass

import numpy as np

from acmlab.config.constants import FD_ABS_FLOOR, FD_REL_TOL, FD_STEP
from acmlab.engine.autodiff import Tape


@dataclass(frozen=True)
class GradCheckResult:
    max_rel_error: float
    worst_input: str
    worst_index: tuple
    passed: bool


def numerical_gradient(fn, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central differences of a scalar function of one array."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        orig = x[idx]
        x[idx] = orig + h
        up = fn(x)
        x[idx] = orig - h
        down = fn(x)
        x[idx] = orig
        grad[idx] = (up - down) / (2.0 * h)
    return grad


def check_gradients(build, inputs: dict, h: float = FD_STEP,
                    rtol: float = FD_REL_TOL, atol: float = FD_ABS_FLOOR) -> GradCheckResult:
    """Compare tape gradients against central finite differences.

    Args:
        build: callable(tape, nodes) -> scalar loss Node, where `nodes` maps
            each input name to a parameter node on `tape`
        inputs: name -> array; every entry is perturbed
        h: finite-difference step
        rtol: allowed |analytic - numeric| / max(|analytic|, |numeric|)
        atol: absolute floor; entries closer than this count as exact

    Returns:
        GradCheckResult with the worst relative error over all entries
    """
    inputs = {k: np.array(v, dtype=np.float64) for k, v in inputs.items()}

    def evaluate(values):
        tape = Tape()
        nodes = {k: tape.parameter(k, v) for k, v in values.items()}
        return tape, build(tape, nodes)

    tape, loss = evaluate(inputs)
    analytic = tape.backward(loss)

    worst = (0.0, "", ())
    for name, arr in inputs.items():
        def scalar(x, name=name):
            values = dict(inputs)
            values[name] = x
            return float(evaluate(values)[1].value[0, 0])

        numeric = numerical_gradient(scalar, arr, h)
        err = np.abs(analytic[name] - numeric)
        scale = np.maximum(np.abs(analytic[name]), np.abs(numeric))
        rel = np.where(err <= atol, 0.0, err / np.maximum(scale, atol))
        idx = np.unravel_index(int(np.argmax(rel)), rel.shape)
        if rel[idx] > worst[0]:
            worst = (float(rel[idx]), name, tuple(int(i) for i in idx))

    return GradCheckResult(
        max_rel_error=worst[0],
        worst_input=worst[1],
        worst_index=worst[2],
        passed=worst[0] < rtol,
    )
