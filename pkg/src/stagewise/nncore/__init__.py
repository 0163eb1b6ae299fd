"""Minimal reverse-mode autodiff core: graphs, Adam, layer helpers, checkpoints."""

from .graph import FLOAT, Graph, GraphError, Node, ParameterStore, ShapeError, backward, forward
from .nets import affine, conv, init_affine, init_conv
from .optim import AdamState, optimize_step
from .checkpoint import load_store, save_store

__all__ = [
    "FLOAT",
    "Graph",
    "GraphError",
    "Node",
    "ParameterStore",
    "ShapeError",
    "backward",
    "forward",
    "affine",
    "conv",
    "init_affine",
    "init_conv",
    "AdamState",
    "optimize_step",
    "load_store",
    "save_store",
]
