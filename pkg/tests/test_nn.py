"""Dense-network engine: algebra, gradients, Adam, checkpoints."""

import numpy as np
import pytest

from heavelab import nn


def test_init_reproduces_seeded_draws():
    widths = (3, 5, 2)
    acts = ("relu", "tanh")
    net = nn.init_mlp(widths, acts, rng=42)
    rng = np.random.default_rng(42)
    for layer in range(2):
        n_in, n_out = widths[layer], widths[layer + 1]
        scale = 1.0 / np.sqrt(n_in)
        w = rng.uniform(-scale, scale, size=(n_in, n_out))
        b = rng.uniform(-scale, scale, size=n_out)
        np.testing.assert_array_equal(net.weights[layer], w)
        np.testing.assert_array_equal(net.biases[layer], b)


def test_init_final_scale_overrides_last_layer():
    net = nn.init_mlp((4, 8, 1), ("relu", "tanh"), rng=7, final_scale=3e-3)
    assert np.max(np.abs(net.weights[-1])) <= 3e-3
    assert np.max(np.abs(net.biases[-1])) <= 3e-3
    assert np.max(np.abs(net.weights[0])) > 3e-3


def test_init_validates_activation_count():
    with pytest.raises(ValueError):
        nn.init_mlp((3, 4, 1), ("relu",), rng=0)


def test_mlp_rejects_unknown_activation():
    with pytest.raises(ValueError):
        nn.Mlp(
            weights=[np.zeros((2, 2))],
            biases=[np.zeros(2)],
            activations=["sigmoid"],
        )


def test_widths_and_param_list_order():
    net = nn.init_mlp((4, 6, 3, 1), ("relu", "relu", "linear"), rng=1)
    assert net.widths == [4, 6, 3, 1]
    params = net.param_list()
    assert params[0] is net.weights[0]
    assert params[1] is net.biases[0]
    assert params[4] is net.weights[2]
    assert len(params) == 6


def test_forward_matches_manual_chain():
    net = nn.init_mlp((2, 3, 1), ("tanh", "linear"), rng=5)
    x = np.array([0.3, -1.2])
    h = np.tanh(x @ net.weights[0] + net.biases[0])
    expected = h @ net.weights[1] + net.biases[1]
    np.testing.assert_allclose(nn.forward(net, x), expected, rtol=1e-15)


def test_forward_single_and_batch_agree():
    # BLAS may pick different kernels for the two shapes, so agreement
    # holds to rounding, not bitwise.
    net = nn.init_mlp((3, 4, 2), ("relu", "tanh"), rng=8)
    x = np.random.default_rng(0).standard_normal((5, 3))
    batch = nn.forward(net, x)
    assert batch.shape == (5, 2)
    for k in range(5):
        np.testing.assert_allclose(
            nn.forward(net, x[k]), batch[k], rtol=1e-14, atol=1e-15
        )


def test_relu_tanh_linear_behaviour():
    w = [np.eye(2)]
    b = [np.zeros(2)]
    x = np.array([-1.5, 2.0])
    relu = nn.Mlp(weights=w, biases=b, activations=["relu"])
    np.testing.assert_array_equal(nn.forward(relu, x), [0.0, 2.0])
    tanh = nn.Mlp(weights=w, biases=b, activations=["tanh"])
    np.testing.assert_allclose(nn.forward(tanh, x), np.tanh(x), rtol=1e-15)
    lin = nn.Mlp(weights=w, biases=b, activations=["linear"])
    np.testing.assert_array_equal(nn.forward(lin, x), x)


def _finite_difference(f, arr, eps=1e-6):
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    g = grad.ravel()
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + eps
        hi = f()
        flat[i] = keep - eps
        lo = f()
        flat[i] = keep
        g[i] = (hi - lo) / (2.0 * eps)
    return grad


def _rel_err(a, b):
    denom = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-8)
    return np.max(np.abs(a - b)) / denom


def test_parameter_gradients_match_finite_differences():
    rng = np.random.default_rng(33)
    net = nn.init_mlp((3, 6, 4, 1), ("relu", "tanh", "linear"), rng=rng)
    x = rng.standard_normal((4, 3))
    target = rng.standard_normal((4, 1))

    def loss():
        out = nn.forward(net, x)
        return float(np.mean((out - target) ** 2))

    out, caches = nn.forward_cached(net, x)
    upstream = 2.0 * (out - target) / out.shape[0] / out.shape[1]
    bundle = nn.backward_cached(net, caches, upstream)
    for layer in range(3):
        fd_w = _finite_difference(loss, net.weights[layer])
        fd_b = _finite_difference(loss, net.biases[layer])
        assert _rel_err(bundle.d_weights[layer], fd_w) < 1e-7
        assert _rel_err(bundle.d_biases[layer], fd_b) < 1e-7


def test_input_gradient_matches_finite_differences():
    rng = np.random.default_rng(12)
    net = nn.init_mlp((4, 5, 2), ("tanh", "linear"), rng=rng)
    x = rng.standard_normal(4)
    w = rng.standard_normal(2)

    def value():
        return float(nn.forward(net, x) @ w)

    bundle = nn.backward(net, x, w)
    fd = _finite_difference(value, x)
    assert _rel_err(bundle.d_input, fd) < 1e-8


def test_backward_without_params_matches_full_pass():
    rng = np.random.default_rng(3)
    net = nn.init_mlp((3, 7, 2), ("relu", "tanh"), rng=rng)
    x = rng.standard_normal((6, 3))
    upstream = rng.standard_normal((6, 2))
    _, caches = nn.forward_cached(net, x)
    full = nn.backward_cached(net, caches, upstream)
    lean = nn.backward_cached(net, caches, upstream, want_params=False)
    np.testing.assert_array_equal(lean.d_input, full.d_input)
    assert lean.d_weights == [] and lean.d_biases == []


def test_adam_matches_reference_update_sequence():
    rng = np.random.default_rng(14)
    p = rng.standard_normal((3, 2))
    p_ref = p.copy()
    opt = nn.init_adam([p], lr=0.01)
    m = np.zeros_like(p)
    v = np.zeros_like(p)
    beta1, beta2 = 0.9, 0.999
    for t in range(1, 6):
        g = rng.standard_normal((3, 2))
        nn.adam_update([p], [g], opt)
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        bc1 = 1.0 - beta1**t
        bc2 = 1.0 - beta2**t
        p_ref -= 0.01 * (m / bc1) / (np.sqrt(v / bc2) + 1e-8)
        np.testing.assert_array_equal(p, p_ref)
    assert opt.t == 5


def test_adam_first_step_is_sign_normalized():
    p = np.array([1.0, -2.0])
    opt = nn.init_adam([p], lr=0.5)
    g = np.array([0.3, -4.0])
    nn.adam_update([p], [g], opt)
    expected = np.array([1.0, -2.0]) - 0.5 * g / (np.abs(g) + 1e-8)
    np.testing.assert_allclose(p, expected, rtol=1e-12)


def test_adam_rejects_misaligned_lists():
    p = np.zeros(3)
    opt = nn.init_adam([p], lr=0.1)
    with pytest.raises(ValueError):
        nn.adam_update([p, p], [p, p], opt)


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(19)
    net_a = nn.init_mlp((4, 6, 1), ("relu", "tanh"), rng=rng)
    net_b = nn.init_mlp((2, 3), ("linear",), rng=rng)
    opt = nn.init_adam(net_a.param_list(), lr=2e-3)
    for mom in (opt.m, opt.v):
        for arr in mom:
            arr += rng.standard_normal(arr.shape)
    opt.t = 7
    path = tmp_path / "state.ckpt"
    nn.write_checkpoint(
        path,
        [("kind", "test"), ("note", "two nets")],
        [("a", net_a), ("b", net_b)],
        [("opt_a", ["a"], opt)],
    )
    header, nets, opts = nn.read_checkpoint(path)
    assert header["kind"] == "test" and header["note"] == "two nets"
    assert set(nets) == {"a", "b"}
    for original, name in ((net_a, "a"), (net_b, "b")):
        loaded = nets[name]
        assert loaded.activations == original.activations
        assert loaded.widths == original.widths
        for p, q in zip(original.param_list(), loaded.param_list()):
            np.testing.assert_array_equal(p, q)
    net_names, loaded_opt = opts["opt_a"]
    assert net_names == ["a"]
    assert loaded_opt.t == 7 and loaded_opt.lr == 2e-3
    assert loaded_opt.beta1 == 0.9 and loaded_opt.beta2 == 0.999
    assert loaded_opt.eps == 1e-8
    for p, q in zip(opt.m + opt.v, loaded_opt.m + loaded_opt.v):
        np.testing.assert_array_equal(p, q)


def test_checkpoint_bytes_are_deterministic(tmp_path):
    net = nn.init_mlp((3, 2), ("tanh",), rng=4)
    p1 = tmp_path / "one.ckpt"
    p2 = tmp_path / "two.ckpt"
    nn.write_checkpoint(p1, [("kind", "t")], [("n", net)])
    nn.write_checkpoint(p2, [("kind", "t")], [("n", net)])
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"not a checkpoint\nend-header\n")
    with pytest.raises(ValueError):
        nn.read_checkpoint(path)


def test_checkpoint_rejects_missing_end_marker(tmp_path):
    path = tmp_path / "cut.ckpt"
    path.write_bytes(b"heavelab-checkpoint 1\nkind = x\n")
    with pytest.raises(ValueError):
        nn.read_checkpoint(path)


def test_checkpoint_rejects_wrong_version(tmp_path):
    path = tmp_path / "future.ckpt"
    path.write_bytes(b"heavelab-checkpoint 2\nend-header\n")
    with pytest.raises(ValueError):
        nn.read_checkpoint(path)


def test_checkpoint_rejects_trailing_bytes(tmp_path):
    net = nn.init_mlp((2, 2), ("linear",), rng=0)
    path = tmp_path / "extra.ckpt"
    nn.write_checkpoint(path, [], [("n", net)])
    path.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(ValueError) as err:
        nn.read_checkpoint(path)
    assert "trailing" in str(err.value)


def test_checkpoint_rejects_truncation(tmp_path):
    net = nn.init_mlp((4, 4), ("linear",), rng=0)
    path = tmp_path / "short.ckpt"
    nn.write_checkpoint(path, [], [("n", net)])
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(ValueError):
        nn.read_checkpoint(path)


def test_checkpoint_rejects_unknown_opt_reference(tmp_path):
    net = nn.init_mlp((2, 2), ("linear",), rng=0)
    opt = nn.init_adam(net.param_list(), lr=0.1)
    path = tmp_path / "dangling.ckpt"
    nn.write_checkpoint(path, [], [("n", net)], [("o", ["ghost"], opt)])
    with pytest.raises(ValueError):
        nn.read_checkpoint(path)
