"""Autodiff core: forward semantics, gradient oracles, optimizer contract."""

import math
import warnings

import numpy as np
import pytest

from stagewise.nncore import (
    AdamState,
    Graph,
    GraphError,
    ParameterStore,
    ShapeError,
    backward,
    forward,
    optimize_step,
)


def test_identity_graph():
    g = Graph()
    x = g.input("x", (3,))
    g.output("y", x)
    out = forward(g, {"x": np.array([1.0, 2.0, 3.0])})
    np.testing.assert_array_equal(out["y"], [1.0, 2.0, 3.0])


def test_zero_weight_affine_returns_bias():
    store = ParameterStore()
    store.add("w", np.zeros((4, 2)))
    store.add("b", np.array([0.5, -1.5]))
    g = Graph(store)
    x = g.input("x", (3, 4))
    g.output("y", g.add(g.matmul(x, g.parameter("w")), g.parameter("b")))
    rng = np.random.default_rng(0)
    out = forward(g, {"x": rng.standard_normal((3, 4))})
    np.testing.assert_array_equal(out["y"], np.tile([0.5, -1.5], (3, 1)))


def test_two_layer_tanh_matches_scalar_oracle():
    # independent straight-line evaluation: plain python floats, no numpy ops
    rng = np.random.default_rng(7)
    w1 = rng.standard_normal((2, 3))
    b1 = rng.standard_normal(3)
    w2 = rng.standard_normal((3, 1))
    b2 = rng.standard_normal(1)
    x = rng.standard_normal(2)

    h = []
    for j in range(3):
        s = b1[j]
        for i in range(2):
            s += x[i] * w1[i, j]
        h.append(math.tanh(s))
    expected = b2[0]
    for j in range(3):
        expected += h[j] * w2[j, 0]

    store = ParameterStore()
    store.add("w1", w1)
    store.add("b1", b1)
    store.add("w2", w2)
    store.add("b2", b2)
    g = Graph(store)
    xin = g.input("x", (1, 2))
    hid = g.tanh(g.add(g.matmul(xin, g.parameter("w1")), g.parameter("b1")))
    g.output("y", g.add(g.matmul(hid, g.parameter("w2")), g.parameter("b2")))
    out = forward(g, {"x": x[None, :]})
    assert out["y"].shape == (1, 1)
    assert abs(out["y"][0, 0] - expected) < 1e-12


def test_forward_rejects_bad_shape_with_node_name():
    g = Graph()
    g.input("x", (2, 2))
    g.output("y", g.inputs["x"])
    with pytest.raises(ShapeError, match="x"):
        forward(g, {"x": np.zeros((3, 2))})


def test_forward_rejects_wrong_input_names():
    g = Graph()
    g.input("x", (2,))
    g.output("y", g.inputs["x"])
    with pytest.raises(GraphError):
        forward(g, {"z": np.zeros(2)})


def test_backward_before_forward_rejected():
    store = ParameterStore()
    store.add("p", np.ones(3))
    g = Graph(store)
    g.output("loss", g.sum(g.parameter("p")))
    with pytest.raises(GraphError, match="before forward"):
        backward(g, "loss")


def test_sum_of_parameters_gradient_is_one():
    store = ParameterStore()
    store.add("p", np.array([1.0, -2.0, 3.0]))
    store.add("q", np.array([[0.5, 0.5]]))
    g = Graph(store)
    g.output("loss", g.add(g.sum(g.parameter("p")), g.sum(g.parameter("q"))))
    forward(g, {})
    grads = backward(g, "loss")
    np.testing.assert_array_equal(grads["p"], np.ones(3))
    np.testing.assert_array_equal(grads["q"], np.ones((1, 2)))


def test_unreachable_parameter_gets_exact_zero():
    store = ParameterStore()
    store.add("used", np.ones(2))
    store.add("unused", np.ones(2))
    g = Graph(store)
    g.parameter("unused")  # present in graph, not on the loss path
    g.output("loss", g.sum(g.parameter("used")))
    forward(g, {})
    grads = backward(g, "loss")
    assert np.all(grads["unused"] == 0.0)


def test_quadratic_norm_gradient_closed_form():
    # loss = ||W x||^2, d/dx = 2 W^T (W x); here x is the parameter
    rng = np.random.default_rng(3)
    w = rng.standard_normal((4, 3))
    x = rng.standard_normal(3)
    store = ParameterStore()
    store.add("x", x)
    g = Graph(store)
    wx = g.matmul(g.const(w), g.reshape(g.parameter("x"), (3, 1)))
    g.output("loss", g.sum(g.square(wx)))
    forward(g, {})
    grads = backward(g, "loss")
    np.testing.assert_allclose(grads["x"], 2.0 * w.T @ (w @ x), rtol=1e-12)


def _random_small_graph(seed: int):
    """One of a family of random graphs covering every differentiable op."""
    rng = np.random.default_rng(seed)
    store = ParameterStore()
    b, n, m = 2, 3, 4
    store.add("w1", rng.standard_normal((n, m)) * 0.5)
    store.add("b1", rng.standard_normal(m) * 0.1)
    store.add("w2", rng.standard_normal((m, 2)) * 0.5)
    store.add("cw", rng.standard_normal((2, 2, 2, 3)) * 0.3)
    store.add("mix", rng.standard_normal((b, n)) * 0.5 + 1.5)  # keep log/div away from 0
    g = Graph(store)
    x = g.input("x", (b, n))
    h = g.add(g.matmul(x, g.parameter("w1")), g.parameter("b1"))
    acts = [g.tanh, g.relu, g.sigmoid, g.softplus]
    h = acts[seed % 4](h)
    h2 = g.matmul(h, g.parameter("w2"))
    img = g.input("img", (b, 4, 4, 2))
    c = g.conv2d(img, g.parameter("cw"), stride=(seed % 2) + 1, padding="same" if seed % 3 else "valid")
    cflat = g.reshape(c, (b, int(np.prod(c.shape[1:]))))
    parts = g.concat([h2, g.mean(cflat, axis=1, keepdims=True)], axis=1)
    mixed = g.mul(g.parameter("mix"), g.log(g.add_const(g.square(x), 1.0)))
    more = g.div(g.exp(g.scale(h2, 0.3)), g.add_const(g.softplus(h2), 1.0))
    # targets must not depend on parameters: finite differences would see
    # through stop_gradient while the analytic pass does not
    z = g.bce_with_logits(h2, g.const(rng.uniform(0.1, 0.9, (b, 2))))
    loss = g.add(
        g.sum(g.absolute(parts)),
        g.add(g.sum(mixed), g.add(g.mean(more), g.sum(z))),
    )
    g.output("loss", loss)
    inputs = {
        "x": rng.standard_normal((b, n)),
        "img": rng.standard_normal((b, 4, 4, 2)),
    }
    return g, store, inputs


def _finite_difference_grads(g, store, inputs, h=1e-4):
    fd = {}
    for name, val in store.values.items():
        grad = np.zeros_like(val)
        flat = val.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = forward(g, inputs)["loss"].item()
            flat[i] = orig - h
            down = forward(g, inputs)["loss"].item()
            flat[i] = orig
            grad.ravel()[i] = (up - down) / (2 * h)
        fd[name] = grad
    return fd


def test_gradients_match_finite_differences_on_random_graphs():
    # acceptance gate runs 100 seeds; keep a quicker spot check here
    worst = 0.0
    for seed in range(8):
        g, store, inputs = _random_small_graph(seed)
        forward(g, inputs)
        store.zero_grads()
        grads = {k: v.copy() for k, v in backward(g, "loss").items()}
        fd = _finite_difference_grads(g, store, inputs)
        for name in grads:
            denom = np.maximum(np.abs(fd[name]), 1.0)
            rel = np.max(np.abs(grads[name] - fd[name]) / denom)
            worst = max(worst, rel)
    assert worst < 1e-4, f"worst relative error {worst}"


def test_stop_gradient_blocks_backward_exactly():
    store = ParameterStore()
    store.add("p", np.array([2.0, -1.0]))
    g = Graph(store)
    p = g.parameter("p")
    g.output("loss", g.add(g.sum(g.square(g.stop_gradient(p))), g.sum(p)))
    forward(g, {})
    grads = backward(g, "loss")
    np.testing.assert_array_equal(grads["p"], np.ones(2))


def test_backward_linearity():
    g, store, inputs = _random_small_graph(11)
    forward(g, inputs)
    store.zero_grads()
    backward(g, "loss")
    once = {k: v.copy() for k, v in store.grads.items()}
    backward(g, "loss")  # accumulate the same loss again
    for k in once:
        np.testing.assert_allclose(store.grads[k], 2.0 * once[k], rtol=1e-12)


def test_gaussian_sample_seeded_and_reparameterized():
    store = ParameterStore()
    store.add("mu", np.array([0.5, -0.5]))
    store.add("sd", np.array([1.0, 2.0]))
    g = Graph(store)
    z = g.gaussian_sample(g.parameter("mu"), g.softplus(g.parameter("sd")))
    g.output("z", z)
    g.output("loss", g.sum(g.square(z)))
    a = forward(g, {}, seed=42)["z"]
    b = forward(g, {}, seed=42)["z"]
    c = forward(g, {}, seed=43)["z"]
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(GraphError, match="seed"):
        forward(g, {})


def test_gaussian_gradient_common_random_numbers():
    store = ParameterStore()
    rng = np.random.default_rng(0)
    store.add("mu", rng.standard_normal(3))
    store.add("sd_raw", rng.standard_normal(3))
    g = Graph(store)
    z = g.gaussian_sample(g.parameter("mu"), g.softplus(g.parameter("sd_raw")))
    g.output("loss", g.sum(g.square(z)))
    forward(g, {}, seed=5)
    store.zero_grads()
    grads = {k: v.copy() for k, v in backward(g, "loss").items()}
    h = 1e-5
    for name in ("mu", "sd_raw"):
        val = store.values[name]
        fd = np.zeros_like(val)
        for i in range(val.size):
            orig = val[i]
            val[i] = orig + h
            up = forward(g, {}, seed=5)["loss"].item()
            val[i] = orig - h
            down = forward(g, {}, seed=5)["loss"].item()
            val[i] = orig
            fd[i] = (up - down) / (2 * h)
        np.testing.assert_allclose(grads[name], fd, rtol=1e-5, atol=1e-7)


def test_adam_converges_on_quadratic_bowl():
    store = ParameterStore()
    store.add("p", np.array([0.0]))
    g = Graph(store)
    g.output("loss", g.sum(g.square(g.add_const(g.parameter("p"), -3.0))))
    state = AdamState(learning_rate=5e-2)
    for _ in range(200):
        forward(g, {})
        backward(g, "loss")
        optimize_step(state, g)
    assert abs(store.values["p"][0] - 3.0) < 1e-3
    assert state.step_count == 200


def test_zero_gradient_leaves_parameters_unchanged():
    store = ParameterStore()
    store.add("p", np.array([1.0, 2.0]))
    g = Graph(store)
    g.output("loss", g.sum(g.mul(g.parameter("p"), g.const(np.zeros(2)))))
    forward(g, {})
    backward(g, "loss")
    before = store.values["p"].copy()
    optimize_step(AdamState(), g)
    np.testing.assert_array_equal(store.values["p"], before)


def test_nonfinite_gradient_skips_step():
    store = ParameterStore()
    store.add("p", np.array([1.0]))
    g = Graph(store)
    g.output("loss", g.sum(g.parameter("p")))
    forward(g, {})
    backward(g, "loss")
    store.grads["p"][0] = np.nan
    state = AdamState()
    before = store.values["p"].copy()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        optimize_step(state, g)
    assert any("non-finite" in str(w.message) for w in caught)
    np.testing.assert_array_equal(store.values["p"], before)
    assert state.step_count == 0
    assert state.skipped_steps == 1
    assert np.all(store.grads["p"] == 0.0)


def test_bit_identical_training_runs():
    def run():
        rng = np.random.default_rng(123)
        store = ParameterStore()
        store.add("w", rng.standard_normal((3, 3)))
        g = Graph(store)
        x = g.input("x", (5, 3))
        z = g.gaussian_sample(g.matmul(x, g.parameter("w")), g.const(np.full((5, 3), 0.1)))
        g.output("loss", g.mean(g.square(z)))
        state = AdamState()
        data_rng = np.random.default_rng(9)
        trace = []
        for step in range(20):
            forward(g, {"x": data_rng.standard_normal((5, 3))}, seed=step)
            backward(g, "loss")
            optimize_step(state, g)
            trace.append(store.values["w"].copy())
        return trace

    t1, t2 = run(), run()
    for a, b in zip(t1, t2):
        assert a.tobytes() == b.tobytes()
