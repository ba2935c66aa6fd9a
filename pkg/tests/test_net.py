import numpy as np
import pytest

from herodraft.net import (CHECKPOINT_MAGIC, AdamState, CheckpointError,
                           DenseNet, load_checkpoint, save_checkpoint,
                           train_step)


def make_targets(head, rng, batch, n_actions):
    if head in ("softmax", "policy_value"):
        pi = rng.random((batch, n_actions))
        pi /= pi.sum(axis=1, keepdims=True)
        if head == "softmax":
            return pi
        return (pi, rng.uniform(-0.9, 0.9, batch))
    if head == "sigmoid":
        return rng.integers(0, 2, batch).astype(float)
    return rng.uniform(-0.9, 0.9, batch)  # tanh / mse


LOSS_OF_HEAD = {"softmax": "ce", "sigmoid": "bce", "tanh": "mse",
                "policy_value": "policy_value"}


def finite_difference(net, x, targets, loss, l2, eps=1e-6):
    grads = []
    params = net.parameters()
    for k, p in enumerate(params):
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            net.set_parameters(params)
            up, _, _ = net.loss_and_grads(x, targets, loss, l2)
            flat[i] = orig - eps
            net.set_parameters(params)
            down, _, _ = net.loss_and_grads(x, targets, loss, l2)
            flat[i] = orig
            net.set_parameters(params)
            gflat[i] = (up - down) / (2 * eps)
        grads.append(g)
    return grads


@pytest.mark.parametrize("hidden", [(), (7,), (6, 5)])
@pytest.mark.parametrize("head", ["softmax", "sigmoid", "tanh", "policy_value"])
@pytest.mark.parametrize("l2", [0.0, 1e-3])
def test_gradient_check(hidden, head, l2):
    rng = np.random.default_rng(42)
    net = DenseNet(4, hidden, head, n_actions=3, seed=1, dtype=np.float64)
    x = rng.normal(size=(5, 4))
    targets = make_targets(head, rng, 5, 3)
    loss = LOSS_OF_HEAD[head]
    _, analytic, _ = net.loss_and_grads(x, targets, loss, l2)
    numeric = finite_difference(net, x, targets, loss, l2)
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    assert worst < 1e-4, f"max relative gradient error {worst}"


class TestHandComputed:
    def test_linear_sigmoid_bce(self):
        """Zero-hidden sigmoid net: logistic regression with known gradient."""
        net = DenseNet(2, (), "sigmoid", dtype=np.float64)
        w = np.array([[1.0], [-1.0]])
        b = np.array([0.5])
        net.set_parameters([w, b])
        x = np.array([[1.0, 0.0], [0.0, 1.0]])
        y = np.array([1.0, 0.0])
        loss, grads, _ = net.loss_and_grads(x, y, "bce")
        p = 1 / (1 + np.exp(-(x @ w[:, 0] + b[0])))
        expected_loss = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))
        assert loss == pytest.approx(expected_loss, rel=1e-12)
        # dL/dlogit = (p - y)/n
        d = (p - y) / 2
        assert np.allclose(grads[0], x.T @ d[:, None])
        assert grads[1] == pytest.approx(d.sum())

    def test_l2_penalty_in_loss_and_grad(self):
        net = DenseNet(2, (), "tanh", dtype=np.float64)
        w = np.array([[0.3], [0.4]]); b = np.array([0.0])
        net.set_parameters([w, b])
        x = np.zeros((1, 2)); y = np.zeros(1)
        c = 0.01
        loss, grads, comps = net.loss_and_grads(x, y, "mse", l2=c)
        assert loss == pytest.approx(c * 0.25, rel=1e-12)  # c * ||theta||^2
        assert np.allclose(grads[0], 2 * c * w)


class TestTraining:
    def test_loss_decreases(self):
        rng = np.random.default_rng(0)
        net = DenseNet(3, (16,), "sigmoid", seed=0)
        adam = AdamState(net, lr=1e-2)
        x = rng.normal(size=(64, 3)).astype(np.float32)
        y = (x[:, 0] > 0).astype(float)
        first, _ = train_step(net, adam, x, y, "bce")
        for _ in range(200):
            last, _ = train_step(net, adam, x, y, "bce")
        assert last < first * 0.5

    def test_adam_bias_correction_first_step(self):
        """First Adam step moves each parameter by ~lr * sign(grad)."""
        net = DenseNet(1, (), "tanh", dtype=np.float64)
        net.set_parameters([np.array([[2.0]]), np.array([0.0])])
        before = [p.copy() for p in net.parameters()]
        adam = AdamState(net, lr=0.1)
        x = np.array([[1.0]]); y = np.array([-0.5])
        _, grads, _ = net.loss_and_grads(x, y, "mse")
        adam.apply(net, grads)
        after = net.parameters()
        step = before[0] - after[0]
        assert step[0, 0] == pytest.approx(0.1 * np.sign(grads[0][0, 0]),
                                           rel=1e-6)

    def test_nonfinite_raises(self):
        net = DenseNet(2, (4,), "sigmoid", seed=0, dtype=np.float64)
        x = np.array([[np.inf, 0.0]])
        with pytest.raises(FloatingPointError):
            net.loss_and_grads(x, np.array([1.0]), "bce")


class TestCheckpoints:
    def test_bit_exact_roundtrip(self, tmp_path):
        net = DenseNet(6, (8, 4), "policy_value", n_actions=5, seed=3)
        adam = AdamState(net, lr=1e-3)
        rng = np.random.default_rng(1)
        x = rng.normal(size=(10, 6)).astype(np.float32)
        pi = np.full((10, 5), 0.2)
        z = rng.uniform(-0.5, 0.5, 10)
        train_step(net, adam, x, (pi, z), "policy_value")
        p = tmp_path / "net.ckpt"
        save_checkpoint(net, p, adam=adam, metadata={"config_hash": "abc"})
        net2, adam2, meta = load_checkpoint(p)
        for a, b in zip(net.parameters(), net2.parameters()):
            assert np.array_equal(a, b)  # bit-exact
        for a, b in zip(adam.m, adam2.m):
            assert np.array_equal(a, b)
        assert adam2.step_count == adam.step_count
        assert meta["config_hash"] == "abc"
        # continued training is identical
        l1, _ = train_step(net, adam, x, (pi, z), "policy_value")
        l2, _ = train_step(net2, adam2, x, (pi, z), "policy_value")
        assert l1 == l2
        assert all(np.array_equal(a, b) for a, b in
                   zip(net.parameters(), net2.parameters()))

    def test_magic_and_corruption(self, tmp_path):
        net = DenseNet(3, (4,), "tanh", seed=0)
        p = tmp_path / "net.ckpt"
        save_checkpoint(net, p)
        raw = p.read_bytes()
        assert raw[:4] == CHECKPOINT_MAGIC
        (tmp_path / "bad.ckpt").write_bytes(b"XXXX" + raw[4:])
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "bad.ckpt")
        (tmp_path / "trunc.ckpt").write_bytes(raw[:-5])
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "trunc.ckpt")

    def test_strict_config_hash(self, tmp_path):
        net = DenseNet(3, (4,), "tanh", seed=0)
        p = tmp_path / "net.ckpt"
        save_checkpoint(net, p, metadata={"config_hash": "aaa"})
        load_checkpoint(p, expected_config_hash="bbb")  # lax: fine
        with pytest.raises(CheckpointError):
            load_checkpoint(p, expected_config_hash="bbb", strict=True)
