"""Reverse-mode automatic differentiation over dense float64 arrays.

Graphs are static: nodes are appended in topological order at build time with
fixed shapes, then executed many times via :func:`forward`. Parameters live in
a :class:`ParameterStore` that can be shared between several graphs (the same
weights driving a training graph and a batch-1 inference graph, for example).
The op set is deliberately small: affine pieces (matmul / conv2d), pointwise
nonlinearities, reductions, concatenation/slicing, a reparameterized Gaussian
sample, and a fused binary cross-entropy on logits.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

FLOAT = np.float64


class GraphError(Exception):
    pass


class ShapeError(GraphError):
    pass


class ParameterStore:
    """Named trainable arrays plus their gradient accumulators."""

    def __init__(self) -> None:
        self.values: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> None:
        if name in self.values:
            raise GraphError(f"parameter {name!r} already registered")
        arr = np.ascontiguousarray(value, dtype=FLOAT)
        self.values[name] = arr
        self.grads[name] = np.zeros_like(arr)

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def has_nonfinite_grad(self) -> bool:
        return any(not np.all(np.isfinite(g)) for g in self.grads.values())

    def names(self) -> list[str]:
        return sorted(self.values)

    def copy_values(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.values.items()}

    def load_values(self, values: Mapping[str, np.ndarray]) -> None:
        for name, arr in values.items():
            if name not in self.values:
                raise GraphError(f"unknown parameter {name!r}")
            if self.values[name].shape != arr.shape:
                raise ShapeError(f"parameter {name!r}: shape {arr.shape} != {self.values[name].shape}")
            self.values[name][...] = arr


class Node:
    __slots__ = ("idx", "kind", "name", "shape", "inputs", "attrs")

    def __init__(self, idx: int, kind: str, name: str, shape: tuple[int, ...], inputs: tuple["Node", ...], attrs: dict):
        self.idx = idx
        self.kind = kind
        self.name = name
        self.shape = shape
        self.inputs = inputs
        self.attrs = attrs

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Node({self.idx}, {self.kind}, {self.name}, shape={self.shape})"


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcasted gradient back to the original operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, ss) in enumerate(zip(grad.shape, shape)) if ss == 1 and gs != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _conv_geometry(h: int, w: int, kh: int, kw: int, stride: int, padding: str) -> tuple[int, int, int, int, int, int]:
    if padding == "same":
        ho = -(-h // stride)
        wo = -(-w // stride)
        pad_h = max((ho - 1) * stride + kh - h, 0)
        pad_w = max((wo - 1) * stride + kw - w, 0)
    elif padding == "valid":
        ho = (h - kh) // stride + 1
        wo = (w - kw) // stride + 1
        pad_h = pad_w = 0
    else:
        raise GraphError(f"unknown padding {padding!r}")
    return ho, wo, pad_h // 2, pad_h - pad_h // 2, pad_w // 2, pad_w - pad_w // 2


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pads: tuple[int, int, int, int], ho: int, wo: int) -> np.ndarray:
    pt, pb, pl, pr = pads
    if pt or pb or pl or pr:
        x = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
    b, _, _, ci = x.shape
    cols = np.empty((b, ho, wo, kh, kw, ci), dtype=FLOAT)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, :, i, j, :] = x[:, i : i + ho * stride : stride, j : j + wo * stride : stride, :]
    return cols


class Graph:
    """A fixed-shape computation graph bound to a parameter store."""

    def __init__(self, store: ParameterStore | None = None) -> None:
        self.store = store if store is not None else ParameterStore()
        self.nodes: list[Node] = []
        self.inputs: dict[str, Node] = {}
        self.outputs: dict[str, Node] = {}
        self._param_nodes: dict[str, Node] = {}
        self._values: list[np.ndarray] | None = None
        self._aux: dict[int, np.ndarray] = {}
        self._stochastic = False

    # -- construction -----------------------------------------------------

    def _new(self, kind: str, shape: Sequence[int], inputs: tuple[Node, ...] = (), name: str | None = None, **attrs) -> Node:
        idx = len(self.nodes)
        node = Node(idx, kind, name or f"{kind}_{idx}", tuple(int(s) for s in shape), inputs, attrs)
        self.nodes.append(node)
        return node

    def input(self, name: str, shape: Sequence[int]) -> Node:
        if name in self.inputs:
            raise GraphError(f"input {name!r} already declared")
        node = self._new("input", shape, name=name)
        self.inputs[name] = node
        return node

    def parameter(self, name: str) -> Node:
        if name in self._param_nodes:
            return self._param_nodes[name]
        if name not in self.store.values:
            raise GraphError(f"parameter {name!r} not in store")
        node = self._new("param", self.store.values[name].shape, name=name)
        self._param_nodes[name] = node
        return node

    def const(self, value) -> Node:
        arr = np.asarray(value, dtype=FLOAT)
        return self._new("const", arr.shape, value=arr)

    def output(self, name: str, node: Node) -> Node:
        if name in self.outputs:
            raise GraphError(f"output {name!r} already declared")
        self.outputs[name] = node
        return node

    # -- elementwise ops ---------------------------------------------------

    def _binary(self, kind: str, a: Node, b: Node) -> Node:
        try:
            shape = np.broadcast_shapes(a.shape, b.shape)
        except ValueError:
            raise ShapeError(f"{kind}: cannot broadcast {a.shape} ({a.name}) with {b.shape} ({b.name})")
        return self._new(kind, shape, (a, b))

    def add(self, a: Node, b: Node) -> Node:
        return self._binary("add", a, b)

    def sub(self, a: Node, b: Node) -> Node:
        return self._binary("sub", a, b)

    def mul(self, a: Node, b: Node) -> Node:
        return self._binary("mul", a, b)

    def div(self, a: Node, b: Node) -> Node:
        return self._binary("div", a, b)

    def neg(self, a: Node) -> Node:
        return self._new("neg", a.shape, (a,))

    def exp(self, a: Node) -> Node:
        return self._new("exp", a.shape, (a,))

    def log(self, a: Node) -> Node:
        return self._new("log", a.shape, (a,))

    def square(self, a: Node) -> Node:
        return self._new("square", a.shape, (a,))

    def absolute(self, a: Node) -> Node:
        return self._new("abs", a.shape, (a,))

    def tanh(self, a: Node) -> Node:
        return self._new("tanh", a.shape, (a,))

    def relu(self, a: Node) -> Node:
        return self._new("relu", a.shape, (a,))

    def sigmoid(self, a: Node) -> Node:
        return self._new("sigmoid", a.shape, (a,))

    def softplus(self, a: Node) -> Node:
        return self._new("softplus", a.shape, (a,))

    def stop_gradient(self, a: Node) -> Node:
        return self._new("stopgrad", a.shape, (a,))

    # -- linear algebra -----------------------------------------------------

    def matmul(self, a: Node, b: Node) -> Node:
        if len(a.shape) != 2 or len(b.shape) != 2:
            raise ShapeError(f"matmul expects 2-D operands, got {a.shape} ({a.name}) and {b.shape} ({b.name})")
        if a.shape[1] != b.shape[0]:
            raise ShapeError(f"matmul: inner dims differ, {a.shape} ({a.name}) @ {b.shape} ({b.name})")
        return self._new("matmul", (a.shape[0], b.shape[1]), (a, b))

    def affine(self, x: Node, w: Node, b: Node) -> Node:
        return self.add(self.matmul(x, w), b)

    def conv2d(self, x: Node, w: Node, stride: int = 1, padding: str = "same") -> Node:
        if len(x.shape) != 4 or len(w.shape) != 4:
            raise ShapeError(f"conv2d expects (B,H,W,C) and (kh,kw,Ci,Co), got {x.shape} ({x.name}), {w.shape} ({w.name})")
        if x.shape[3] != w.shape[2]:
            raise ShapeError(f"conv2d: channel mismatch, input {x.shape} ({x.name}) vs kernel {w.shape} ({w.name})")
        kh, kw = w.shape[0], w.shape[1]
        ho, wo, pt, pb, pl, pr = _conv_geometry(x.shape[1], x.shape[2], kh, kw, stride, padding)
        return self._new(
            "conv2d",
            (x.shape[0], ho, wo, w.shape[3]),
            (x, w),
            stride=stride,
            pads=(pt, pb, pl, pr),
            out_hw=(ho, wo),
        )

    # -- shape ops ----------------------------------------------------------

    def reshape(self, a: Node, shape: Sequence[int]) -> Node:
        shape = tuple(int(s) for s in shape)
        if int(np.prod(shape)) != int(np.prod(a.shape)):
            raise ShapeError(f"reshape: {a.shape} ({a.name}) has {np.prod(a.shape)} elems, target {shape}")
        return self._new("reshape", shape, (a,))

    def concat(self, parts: Iterable[Node], axis: int = -1) -> Node:
        parts = tuple(parts)
        if not parts:
            raise GraphError("concat of zero nodes")
        nd = len(parts[0].shape)
        ax = axis % nd
        base = list(parts[0].shape)
        total = 0
        for p in parts:
            if len(p.shape) != nd:
                raise ShapeError(f"concat: rank mismatch at {p.name}")
            for d in range(nd):
                if d != ax and p.shape[d] != base[d]:
                    raise ShapeError(f"concat: shape mismatch at {p.name}: {p.shape} vs {parts[0].shape}")
            total += p.shape[ax]
        base[ax] = total
        return self._new("concat", base, parts, axis=ax)

    def slice0(self, a: Node, start: int, stop: int) -> Node:
        if not (0 <= start < stop <= a.shape[0]):
            raise ShapeError(f"slice0: [{start}:{stop}] out of range for {a.shape} ({a.name})")
        return self._new("slice0", (stop - start,) + a.shape[1:], (a,), start=start, stop=stop)

    # -- reductions -----------------------------------------------------------

    def _reduce(self, kind: str, a: Node, axis, keepdims: bool) -> Node:
        if axis is None:
            shape = tuple(1 for _ in a.shape) if keepdims else ()
            return self._new(kind, shape, (a,), axis=None, keepdims=keepdims)
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        axes = tuple(ax % len(a.shape) for ax in axes)
        shape = tuple(
            (1 if keepdims else None) if i in axes else s for i, s in enumerate(a.shape)
        )
        shape = tuple(s for s in shape if s is not None)
        return self._new(kind, shape, (a,), axis=axes, keepdims=keepdims)

    def sum(self, a: Node, axis=None, keepdims: bool = False) -> Node:
        return self._reduce("sum", a, axis, keepdims)

    def mean(self, a: Node, axis=None, keepdims: bool = False) -> Node:
        return self._reduce("mean", a, axis, keepdims)

    # -- stochastic / losses ------------------------------------------------

    def gaussian_sample(self, mean: Node, std: Node) -> Node:
        if mean.shape != std.shape:
            raise ShapeError(f"gaussian_sample: mean {mean.shape} ({mean.name}) vs std {std.shape} ({std.name})")
        self._stochastic = True
        return self._new("gauss", mean.shape, (mean, std))

    def bce_with_logits(self, logits: Node, targets: Node) -> Node:
        """Elementwise binary cross-entropy on logits (no reduction)."""
        if logits.shape != targets.shape:
            raise ShapeError(f"bce_with_logits: {logits.shape} ({logits.name}) vs {targets.shape} ({targets.name})")
        return self._new("bce_logits", logits.shape, (logits, targets))

    # convenience composites used all over the model code

    def scale(self, a: Node, c: float) -> Node:
        return self.mul(a, self.const(np.asarray(c, dtype=FLOAT)))

    def add_const(self, a: Node, c: float) -> Node:
        return self.add(a, self.const(np.asarray(c, dtype=FLOAT)))

    def log_sigmoid(self, a: Node) -> Node:
        return self.neg(self.softplus(self.neg(a)))

    @property
    def has_stochastic(self) -> bool:
        return self._stochastic


# -- execution ---------------------------------------------------------------


def _eval_node(node: Node, vals: list, store: ParameterStore, inputs: Mapping[str, np.ndarray], rng, aux: dict[int, np.ndarray]) -> np.ndarray:
    k = node.kind
    if k == "input":
        return inputs[node.name]
    if k == "param":
        return store.values[node.name]
    if k == "const":
        return node.attrs["value"]
    a = vals[node.inputs[0].idx] if node.inputs else None
    b = vals[node.inputs[1].idx] if len(node.inputs) > 1 else None
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if k == "div":
        return a / b
    if k == "neg":
        return -a
    if k == "exp":
        return np.exp(a)
    if k == "log":
        return np.log(a)
    if k == "square":
        return a * a
    if k == "abs":
        return np.abs(a)
    if k == "tanh":
        return np.tanh(a)
    if k == "relu":
        return np.maximum(a, 0.0)
    if k == "sigmoid":
        out = np.empty_like(a)
        np.exp(-np.abs(a), out=out)
        pos = a >= 0
        out[pos] = 1.0 / (1.0 + out[pos])
        out[~pos] = out[~pos] / (1.0 + out[~pos])
        return out
    if k == "softplus":
        return np.logaddexp(0.0, a)
    if k == "stopgrad":
        return a
    if k == "matmul":
        return a @ b
    if k == "conv2d":
        ho, wo = node.attrs["out_hw"]
        kh, kw, ci, co = node.inputs[1].shape
        cols = _im2col(a, kh, kw, node.attrs["stride"], node.attrs["pads"], ho, wo)
        out = cols.reshape(-1, kh * kw * ci) @ b.reshape(-1, co)
        return out.reshape(a.shape[0], ho, wo, co)
    if k == "reshape":
        return a.reshape(node.shape)
    if k == "concat":
        return np.concatenate([vals[p.idx] for p in node.inputs], axis=node.attrs["axis"])
    if k == "slice0":
        return a[node.attrs["start"] : node.attrs["stop"]]
    if k == "sum":
        return a.sum(axis=node.attrs["axis"], keepdims=node.attrs["keepdims"])
    if k == "mean":
        return a.mean(axis=node.attrs["axis"], keepdims=node.attrs["keepdims"])
    if k == "gauss":
        eps = rng.standard_normal(node.shape)
        aux[node.idx] = eps
        return a + b * eps
    if k == "bce_logits":
        return b * np.logaddexp(0.0, -a) + (1.0 - b) * np.logaddexp(0.0, a)
    raise GraphError(f"unknown node kind {k!r}")


def forward(graph: Graph, inputs: Mapping[str, np.ndarray], seed: int | None = None) -> dict[str, np.ndarray]:
    """Run the graph on named inputs; returns named outputs.

    Stochastic graphs require a seed; every Gaussian node draws from one
    numpy Generator in node order, so identical seeds replay identical noise.
    """
    expected = set(graph.inputs)
    got = set(inputs)
    if expected != got:
        missing, extra = expected - got, got - expected
        raise GraphError(f"input names mismatch (missing={sorted(missing)}, unexpected={sorted(extra)})")
    cast: dict[str, np.ndarray] = {}
    for name, node in graph.inputs.items():
        arr = np.asarray(inputs[name], dtype=FLOAT)
        if arr.shape != node.shape:
            raise ShapeError(f"input {name!r}: got shape {arr.shape}, graph expects {node.shape}")
        cast[name] = arr
    if graph.has_stochastic and seed is None:
        raise GraphError("graph contains stochastic nodes; forward() needs a seed")
    rng = np.random.default_rng(seed) if graph.has_stochastic else None
    vals: list = [None] * len(graph.nodes)
    aux: dict[int, np.ndarray] = {}
    for node in graph.nodes:
        vals[node.idx] = _eval_node(node, vals, graph.store, cast, rng, aux)
    graph._values = vals
    graph._aux = aux
    return {name: vals[node.idx] for name, node in graph.outputs.items()}


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.exp(-np.abs(x))
    pos = x >= 0
    res = np.empty_like(x)
    res[pos] = 1.0 / (1.0 + out[pos])
    res[~pos] = out[~pos] / (1.0 + out[~pos])
    return res


def backward(graph: Graph, loss: Node | str) -> dict[str, np.ndarray]:
    """Accumulate d(loss)/d(param) into the store for a scalar loss node."""
    if graph._values is None:
        raise GraphError("backward() called before forward()")
    if isinstance(loss, str):
        if loss not in graph.outputs:
            raise GraphError(f"no output named {loss!r}")
        loss = graph.outputs[loss]
    if int(np.prod(loss.shape)) != 1:
        raise ShapeError(f"loss must be scalar, node {loss.name} has shape {loss.shape}")
    vals = graph._values
    adj: list = [None] * len(graph.nodes)
    adj[loss.idx] = np.ones(loss.shape, dtype=FLOAT)

    def acc(node: Node, grad: np.ndarray) -> None:
        # adjoints are never mutated in place, so views are safe to hold
        if adj[node.idx] is None:
            adj[node.idx] = grad
        else:
            adj[node.idx] = adj[node.idx] + grad

    for node in reversed(graph.nodes):
        g = adj[node.idx]
        if g is None:
            continue
        k = node.kind
        if k in ("input", "const"):
            continue
        if k == "param":
            graph.store.grads[node.name] += g
            continue
        ins = node.inputs
        if k == "add":
            acc(ins[0], _unbroadcast(g, ins[0].shape))
            acc(ins[1], _unbroadcast(g, ins[1].shape))
        elif k == "sub":
            acc(ins[0], _unbroadcast(g, ins[0].shape))
            acc(ins[1], _unbroadcast(-g, ins[1].shape))
        elif k == "mul":
            acc(ins[0], _unbroadcast(g * vals[ins[1].idx], ins[0].shape))
            acc(ins[1], _unbroadcast(g * vals[ins[0].idx], ins[1].shape))
        elif k == "div":
            bval = vals[ins[1].idx]
            acc(ins[0], _unbroadcast(g / bval, ins[0].shape))
            acc(ins[1], _unbroadcast(-g * vals[ins[0].idx] / (bval * bval), ins[1].shape))
        elif k == "neg":
            acc(ins[0], -g)
        elif k == "exp":
            acc(ins[0], g * vals[node.idx])
        elif k == "log":
            acc(ins[0], g / vals[ins[0].idx])
        elif k == "square":
            acc(ins[0], 2.0 * vals[ins[0].idx] * g)
        elif k == "abs":
            acc(ins[0], g * np.sign(vals[ins[0].idx]))
        elif k == "tanh":
            v = vals[node.idx]
            acc(ins[0], g * (1.0 - v * v))
        elif k == "relu":
            acc(ins[0], g * (vals[ins[0].idx] > 0))
        elif k == "sigmoid":
            v = vals[node.idx]
            acc(ins[0], g * v * (1.0 - v))
        elif k == "softplus":
            acc(ins[0], g * _sigmoid(vals[ins[0].idx]))
        elif k == "stopgrad":
            pass
        elif k == "matmul":
            a, b = vals[ins[0].idx], vals[ins[1].idx]
            acc(ins[0], g @ b.T)
            acc(ins[1], a.T @ g)
        elif k == "conv2d":
            x, w = vals[ins[0].idx], vals[ins[1].idx]
            stride = node.attrs["stride"]
            pads = node.attrs["pads"]
            ho, wo = node.attrs["out_hw"]
            kh, kw, ci, co = w.shape
            cols = _im2col(x, kh, kw, stride, pads, ho, wo).reshape(-1, kh * kw * ci)
            g2 = g.reshape(-1, co)
            acc_w = (cols.T @ g2).reshape(w.shape)
            dcols = (g2 @ w.reshape(-1, co).T).reshape(x.shape[0], ho, wo, kh, kw, ci)
            pt, pb, pl, pr = pads
            dxp = np.zeros((x.shape[0], x.shape[1] + pt + pb, x.shape[2] + pl + pr, ci), dtype=FLOAT)
            for i in range(kh):
                for j in range(kw):
                    dxp[:, i : i + ho * stride : stride, j : j + wo * stride : stride, :] += dcols[:, :, :, i, j, :]
            dx = dxp[:, pt : pt + x.shape[1], pl : pl + x.shape[2], :]
            acc(ins[0], dx)
            acc(ins[1], acc_w)
        elif k == "reshape":
            acc(ins[0], g.reshape(ins[0].shape))
        elif k == "concat":
            ax = node.attrs["axis"]
            start = 0
            for p in ins:
                width = p.shape[ax]
                sl = [slice(None)] * len(node.shape)
                sl[ax] = slice(start, start + width)
                acc(p, g[tuple(sl)])
                start += width
        elif k == "slice0":
            full = np.zeros(ins[0].shape, dtype=FLOAT)
            full[node.attrs["start"] : node.attrs["stop"]] = g
            acc(ins[0], full)
        elif k == "sum":
            acc(ins[0], _spread(g, ins[0].shape, node.attrs["axis"], node.attrs["keepdims"]))
        elif k == "mean":
            spread = _spread(g, ins[0].shape, node.attrs["axis"], node.attrs["keepdims"])
            count = int(np.prod(ins[0].shape)) // max(int(np.prod(node.shape)), 1)
            acc(ins[0], spread / count)
        elif k == "gauss":
            eps = graph._aux[node.idx]
            acc(ins[0], g)
            acc(ins[1], g * eps)
        elif k == "bce_logits":
            z, t = vals[ins[0].idx], vals[ins[1].idx]
            acc(ins[0], g * (_sigmoid(z) - t))
            acc(ins[1], g * (-z))
        else:
            raise GraphError(f"no backward rule for {k!r}")
    return graph.store.grads


def _spread(g: np.ndarray, shape: tuple[int, ...], axis, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(g.reshape(tuple(1 for _ in shape)), shape)
    if not keepdims:
        for ax in sorted(axis):
            g = np.expand_dims(g, ax)
    return np.broadcast_to(g, shape)
