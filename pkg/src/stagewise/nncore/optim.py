"""Adam with bias correction, plus non-finite-gradient skip protection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


@dataclass
class AdamState:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    skipped_steps: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")


def optimize_step(state: AdamState, graph: Graph) -> AdamState:
    """Apply one Adam step from the accumulated gradients, then clear them.

    A non-finite gradient anywhere skips the whole step: parameters, moments
    and the step counter stay untouched, the skip is counted and a warning is
    emitted. Gradients are still cleared so training can continue.
    """
    store = graph.store
    if store.has_nonfinite_grad():
        warnings.warn("non-finite gradient; skipping optimizer step", RuntimeWarning, stacklevel=2)
        state.skipped_steps += 1
        store.zero_grads()
        return state
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name in store.values:
        g = store.grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        store.values[name] -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    store.zero_grads()
    return state
