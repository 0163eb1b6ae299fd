"""Parameter initialization and small layer-builder helpers.

Models in this package register weights once into a ParameterStore and then
assemble graphs per batch shape; these helpers keep the two in sync by
prefix-based naming (``"enc.c1.w"`` etc.).
"""

from __future__ import annotations

import numpy as np

from .graph import FLOAT, Graph, Node, ParameterStore


def init_affine(store: ParameterStore, prefix: str, n_in: int, n_out: int, rng: np.random.Generator) -> None:
    scale = np.sqrt(2.0 / n_in)
    store.add(f"{prefix}.w", rng.standard_normal((n_in, n_out)) * scale)
    store.add(f"{prefix}.b", np.zeros(n_out, dtype=FLOAT))


def init_conv(store: ParameterStore, prefix: str, kh: int, kw: int, c_in: int, c_out: int, rng: np.random.Generator) -> None:
    fan_in = kh * kw * c_in
    scale = np.sqrt(2.0 / fan_in)
    store.add(f"{prefix}.w", rng.standard_normal((kh, kw, c_in, c_out)) * scale)
    store.add(f"{prefix}.b", np.zeros(c_out, dtype=FLOAT))


def affine(g: Graph, x: Node, prefix: str) -> Node:
    return g.add(g.matmul(x, g.parameter(f"{prefix}.w")), g.parameter(f"{prefix}.b"))


def conv(g: Graph, x: Node, prefix: str, stride: int = 1, padding: str = "same") -> Node:
    y = g.conv2d(x, g.parameter(f"{prefix}.w"), stride=stride, padding=padding)
    return g.add(y, g.parameter(f"{prefix}.b"))
