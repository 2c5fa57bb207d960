import numpy as np
import pytest

from helpers import naive_mlp_forward
from pairface.mlp import (DimensionMismatch, DivergedToNonFinite, EmptyBatch,
                          MlpParams, TrainConfig, forward, init_mlp,
                          load_mlp, loss_and_gradient, save_mlp, train)


def _random_net(rng, m, h, o):
    return MlpParams(rng.normal(size=(h, m)), rng.normal(size=h),
                     rng.normal(size=(o, h)), rng.normal(size=o))


def test_init_deterministic():
    a = init_mlp(3, 4, 2, seed=9)
    b = init_mlp(3, 4, 2, seed=9)
    for x, y in [(a.W1, b.W1), (a.b1, b.b1), (a.W2, b.W2), (a.b2, b.b2)]:
        np.testing.assert_array_equal(x, y)


def test_init_zero_scale_gives_zero_weights():
    net = init_mlp(3, 4, 2, seed=0, scale=0.0)
    assert not np.any(net.W1) and not np.any(net.W2)


def test_init_default_scale_bound():
    net = init_mlp(100, 5, 1, seed=1)
    assert np.all(np.abs(net.W1) <= 0.1)
    assert np.all(net.b1 == 0) and np.all(net.b2 == 0)


def test_forward_zero_net():
    net = init_mlp(3, 4, 2, seed=0, scale=0.0)
    np.testing.assert_array_equal(forward(net, np.ones(3)), 0.0)


def test_forward_odd_symmetry():
    rng = np.random.default_rng(2)
    net = _random_net(rng, 4, 5, 2)
    net.b1[:] = 0
    net.b2[:] = 0
    x = rng.normal(size=4)
    np.testing.assert_allclose(forward(net, -x), -forward(net, x), atol=1e-12)


def test_forward_matches_naive_oracle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        net = _random_net(rng, 4, 3, 2)
        x = rng.normal(size=4)
        np.testing.assert_allclose(
            forward(net, x),
            naive_mlp_forward(net.W1, net.b1, net.W2, net.b2, x),
            atol=1e-12)


def test_forward_outputs_bounded():
    rng = np.random.default_rng(4)
    net = _random_net(rng, 3, 4, 2)
    y = forward(net, rng.normal(size=(100, 3)))
    assert np.all(np.abs(y) < 1.0)
    # saturated preactivations round to exactly +-1 in float64, never beyond
    net.W2 *= 50
    y = forward(net, rng.normal(size=(100, 3)) * 10)
    assert np.all(np.abs(y) <= 1.0)


def test_forward_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        forward(init_mlp(3, 2, 1, 0), np.zeros(4))


def test_loss_zero_at_targets():
    rng = np.random.default_rng(5)
    net = _random_net(rng, 3, 4, 2)
    X = rng.normal(size=(6, 3))
    loss, g = loss_and_gradient(net, X, forward(net, X), l2=0.0)
    assert loss == 0.0
    for a in (g.W1, g.b1, g.W2, g.b2):
        np.testing.assert_array_equal(a, 0.0)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(6)
    step = 1e-5
    for _ in range(25):
        m, h, o = rng.integers(1, 6, size=3)
        net = _random_net(rng, m, h, o)
        X = rng.normal(size=(4, m))
        T = rng.uniform(-1, 1, size=(4, o))
        l2 = float(rng.uniform(0, 0.01))
        _, g = loss_and_gradient(net, X, T, l2)
        for arr, garr in [(net.W1, g.W1), (net.b1, g.b1),
                          (net.W2, g.W2), (net.b2, g.b2)]:
            flat, gflat = arr.ravel(), garr.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                lp, _ = loss_and_gradient(net, X, T, l2)
                flat[i] = orig - step
                lm, _ = loss_and_gradient(net, X, T, l2)
                flat[i] = orig
                fd = (lp - lm) / (2 * step)
                denom = max(abs(fd), abs(gflat[i]), 1e-8)
                assert abs(fd - gflat[i]) / denom < 1e-4


def test_duplicating_batch_is_invariant():
    rng = np.random.default_rng(7)
    net = _random_net(rng, 3, 4, 2)
    X = rng.normal(size=(5, 3))
    T = rng.uniform(-1, 1, size=(5, 2))
    loss1, g1 = loss_and_gradient(net, X, T, l2=1e-3)
    loss2, g2 = loss_and_gradient(net, np.vstack([X, X]), np.vstack([T, T]),
                                  l2=1e-3)
    assert loss1 == pytest.approx(loss2, abs=1e-12)
    np.testing.assert_allclose(g1.W1, g2.W1, atol=1e-12)


def test_loss_errors():
    net = init_mlp(3, 2, 1, 0)
    with pytest.raises(EmptyBatch):
        loss_and_gradient(net, np.zeros((0, 3)), np.zeros((0, 1)))
    with pytest.raises(DimensionMismatch):
        loss_and_gradient(net, np.zeros((2, 4)), np.zeros((2, 1)))


def test_small_lr_full_batch_descends():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(30, 3))
    T = np.tanh(rng.normal(size=(30, 1)))
    net = init_mlp(3, 4, 1, seed=8)
    loss0, _ = loss_and_gradient(net, X, T, l2=0.0)
    cfg = TrainConfig(learning_rate=1e-4, epochs=50, batch_size=0, l2=0.0,
                      seed=8)
    result = train(net, X, T, cfg)
    loss1, _ = loss_and_gradient(result.params, X, T, l2=0.0)
    assert loss1 <= loss0 + 1e-9
    assert len(result.loss_history) == 50


def test_xor_trains_to_perfect_sign_accuracy():
    X = np.array([[1., 1.], [1., -1.], [-1., 1.], [-1., -1.]])
    T = np.array([[-1.], [1.], [1.], [-1.]])
    net = train(init_mlp(2, 4, 1, seed=0), X, T, TrainConfig(seed=0)).params
    assert np.all(np.sign(forward(net, X)) == T)


def test_one_hidden_unit_separates_blobs():
    rng = np.random.default_rng(9)
    X = np.vstack([rng.normal([2, 2], 0.3, (50, 2)),
                   rng.normal([-2, -2], 0.3, (50, 2))])
    T = np.vstack([np.ones((50, 1)), -np.ones((50, 1))])
    net = train(init_mlp(2, 1, 1, seed=1), X, T, TrainConfig(seed=1)).params
    acc = np.mean(np.sign(forward(net, X)) == T)
    assert acc >= 0.99


def test_training_deterministic():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(20, 3))
    T = np.tanh(rng.normal(size=(20, 2)))
    cfg = TrainConfig(epochs=30, seed=4)
    a = train(init_mlp(3, 5, 2, seed=4), X, T, cfg).params
    b = train(init_mlp(3, 5, 2, seed=4), X, T, cfg).params
    np.testing.assert_array_equal(a.W1, b.W1)
    np.testing.assert_array_equal(a.W2, b.W2)


def test_full_batch_order_invariant():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(20, 3))
    T = np.tanh(rng.normal(size=(20, 1)))
    perm = rng.permutation(20)
    cfg = TrainConfig(epochs=20, batch_size=0, seed=0)
    a = train(init_mlp(3, 4, 1, seed=0), X, T, cfg).params
    b = train(init_mlp(3, 4, 1, seed=0), X[perm], T[perm], cfg).params
    np.testing.assert_allclose(a.W1, b.W1, atol=1e-9)
    np.testing.assert_allclose(a.W2, b.W2, atol=1e-9)


def test_divergence_raises():
    net = init_mlp(2, 2, 1, seed=0)
    net.W1[0, 0] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises(DivergedToNonFinite):
        train(net, np.ones((4, 2)), np.ones((4, 1)), TrainConfig(epochs=2))


def test_checkpoint_round_trip(tmp_path):
    net = init_mlp(3, 4, 2, seed=5)
    save_mlp(net, tmp_path / "net.json")
    loaded = load_mlp(tmp_path / "net.json")
    np.testing.assert_array_equal(loaded.W1, net.W1)
    np.testing.assert_array_equal(loaded.b2, net.b2)
