"""Parameter checkpoints on the shared tensor-container format."""

from __future__ import annotations

from pathlib import Path

from ..container import read_container, write_container
from .graph import ParameterStore


def save_store(path: str | Path, store: ParameterStore, meta: dict | None = None) -> None:
    write_container(path, {name: store.values[name] for name in store.names()}, meta)


def load_store(path: str | Path) -> tuple[dict, ParameterStore]:
    meta, tensors = read_container(path)
    store = ParameterStore()
    for name in sorted(tensors):
        store.add(name, tensors[name])
    return meta, store
