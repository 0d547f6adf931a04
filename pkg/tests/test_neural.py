import numpy as np
import pytest

from risdrl.neural import (
    CHECKPOINT_MAGIC,
    AdamState,
    Mlp,
    TrainingDiverged,
    backward,
    forward,
    gradient_norm,
    load_checkpoint,
    optimizer_step,
    save_checkpoint,
    soft_update,
)

STEP = 1e-5


def random_network(rng):
    depth = int(rng.integers(1, 4))
    dims = [int(d) for d in rng.integers(1, 25, size=depth + 1)]
    output = "tanh" if rng.random() < 0.5 else "identity"
    return Mlp.initialize(dims, rng, output_activation=output)


def weighted_output(net, x, upstream):
    out, _ = forward(net, x)
    return float(np.sum(out * upstream))


@pytest.mark.parametrize("seed", range(20))
def test_gradients_match_central_differences(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    x = rng.normal(size=(3, net.layer_dims[0]))
    upstream = rng.normal(size=(3, net.layer_dims[-1]))
    out, cache = forward(net, x)
    grads, input_grad = backward(net, cache, upstream)

    for param, grad in zip(net.parameters(), grads):
        numeric = np.zeros_like(param)
        for index in np.ndindex(param.shape):
            original = param[index]
            param[index] = original + STEP
            plus = weighted_output(net, x, upstream)
            param[index] = original - STEP
            minus = weighted_output(net, x, upstream)
            param[index] = original
            numeric[index] = (plus - minus) / (2 * STEP)
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)

    numeric_input = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        shifted = x.copy()
        shifted[index] += STEP
        plus = weighted_output(net, shifted, upstream)
        shifted[index] -= 2 * STEP
        minus = weighted_output(net, shifted, upstream)
        numeric_input[index] = (plus - minus) / (2 * STEP)
    np.testing.assert_allclose(input_grad, numeric_input, rtol=1e-5, atol=1e-8)


def test_single_sample_forward_matches_batch():
    rng = np.random.default_rng(0)
    net = Mlp.initialize([4, 6, 2], rng)
    x = rng.normal(size=4)
    single, cache = forward(net, x)
    batch, _ = forward(net, x[None, :])
    np.testing.assert_allclose(single, batch[0])
    _, dx = backward(net, cache, np.ones(2))
    assert dx.shape == (4,)


def test_forward_rejects_wrong_width():
    net = Mlp.initialize([3, 2], np.random.default_rng(0))
    with pytest.raises(ValueError):
        forward(net, np.zeros(4))


def test_tanh_output_stays_in_range():
    net = Mlp.initialize([2, 8, 3], np.random.default_rng(1), final_scale=50.0)
    out, _ = forward(net, np.random.default_rng(2).normal(size=(100, 2)) * 10)
    assert np.all(np.abs(out) <= 1.0)


def test_final_scale_shrinks_last_layer():
    small = Mlp.initialize([5, 7, 2], np.random.default_rng(3), final_scale=1e-3)
    full = Mlp.initialize([5, 7, 2], np.random.default_rng(3))
    np.testing.assert_allclose(small.weights[-1], full.weights[-1] * 1e-3)
    np.testing.assert_array_equal(small.weights[0], full.weights[0])


def test_stale_cache_is_rejected():
    rng = np.random.default_rng(4)
    net = Mlp.initialize([3, 4, 1], rng)
    out, cache = forward(net, rng.normal(size=(2, 3)))
    grads, _ = backward(net, cache, np.ones_like(out))
    optimizer_step(net, grads, AdamState.for_network(net, 1e-3))
    with pytest.raises(RuntimeError):
        backward(net, cache, np.ones_like(out))


def test_adam_descends_a_quadratic():
    rng = np.random.default_rng(5)
    net = Mlp.initialize([2, 1], rng, output_activation="identity")
    opt = AdamState.for_network(net, 0.05)
    x = rng.normal(size=(16, 2))
    target = x @ np.array([1.5, -2.0]) + 0.5

    def loss():
        out, _ = forward(net, x)
        return float(np.mean((out[:, 0] - target) ** 2))

    start = loss()
    for _ in range(300):
        out, cache = forward(net, x)
        grads, _ = backward(net, cache, (2 * (out[:, 0] - target) / len(x))[:, None])
        optimizer_step(net, grads, opt)
    assert loss() < 1e-3 * start
    assert opt.step == 300


def test_non_finite_gradient_raises():
    net = Mlp.initialize([2, 2], np.random.default_rng(6))
    grads = [np.full_like(p, np.nan) for p in net.parameters()]
    with pytest.raises(TrainingDiverged, match="gradient"):
        optimizer_step(net, grads, AdamState.for_network(net, 1e-3))


def test_soft_update_blends_parameters():
    rng = np.random.default_rng(7)
    source = Mlp.initialize([3, 4, 2], rng)
    target = Mlp.initialize([3, 4, 2], rng)
    before = [p.copy() for p in target.parameters()]
    soft_update(target, source, 0.25)
    for new, old, src in zip(target.parameters(), before, source.parameters()):
        np.testing.assert_allclose(new, 0.25 * src + 0.75 * old)
    soft_update(target, source, 1.0)
    for new, src in zip(target.parameters(), source.parameters()):
        np.testing.assert_allclose(new, src)


@pytest.mark.parametrize("eta", [0.005, 0.1, 0.5])
def test_two_soft_updates_compound(eta):
    rng = np.random.default_rng(11)
    source = Mlp.initialize([3, 4, 2], rng)
    stepped = Mlp.initialize([3, 4, 2], rng)
    jumped = stepped.clone()
    soft_update(stepped, source, eta)
    soft_update(stepped, source, eta)
    soft_update(jumped, source, 1.0 - (1.0 - eta) ** 2)
    for a, b in zip(stepped.parameters(), jumped.parameters()):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_soft_update_checks_architecture():
    rng = np.random.default_rng(8)
    with pytest.raises(ValueError):
        soft_update(Mlp.initialize([3, 2], rng), Mlp.initialize([3, 4, 2], rng), 0.1)


def test_clone_is_independent():
    net = Mlp.initialize([2, 3], np.random.default_rng(9))
    copy = net.clone(name="copy")
    copy.weights[0] += 1.0
    assert not np.allclose(copy.weights[0], net.weights[0])
    assert copy.name == "copy"


def test_gradient_norm():
    assert gradient_norm([np.array([3.0]), np.array([[4.0]])]) == pytest.approx(5.0)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(10)
    net = Mlp.initialize([5, 7, 3], rng, output_activation="identity")
    path = tmp_path / "net.ckpt"
    save_checkpoint(path, net)
    loaded = load_checkpoint(path)
    assert loaded.same_architecture(net)
    for a, b in zip(loaded.parameters(), net.parameters()):
        np.testing.assert_array_equal(a, b)
    x = rng.normal(size=(4, 5))
    np.testing.assert_array_equal(forward(loaded, x)[0], forward(net, x)[0])


def test_checkpoint_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "missing.ckpt")
    bogus = tmp_path / "bogus.ckpt"
    bogus.write_bytes(b"NOTNET" + bytes(20))
    with pytest.raises(ValueError):
        load_checkpoint(bogus)


@pytest.mark.parametrize("tail", [b"", bytes([1, 0, 0]), bytes([1, 0, 0]) + np.array([3], dtype="<u8").tobytes()])
def test_truncated_checkpoint_is_rejected(tmp_path, tail):
    path = tmp_path / "short.ckpt"
    path.write_bytes(CHECKPOINT_MAGIC + tail)
    with pytest.raises(ValueError):
        load_checkpoint(path)
