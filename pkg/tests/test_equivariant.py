"""Layer/network equivariance, gradients, training, and checkpoints."""

import numpy as np
import pytest

from equibound.equivariant import (
    EquivariantLayer,
    MarginNotReached,
    TrainConfig,
    build_network,
    channels_for_width,
    empirical_margin_loss,
    load_checkpoint,
    margins,
    materialize,
    save_checkpoint,
    train,
)
from equibound.groups import build_group
from equibound.irreps import (
    fourier_transform,
    group_circulant,
    irreps_of,
    regular_representation,
    restricted_frequency_rep,
    stack_rep,
    trivial_stack,
)


def _small_net(kind="cyclic", N=3, channels=(3, 2), seed=0):
    G = build_group(kind, N)
    if kind == "quaternion":
        inp = regular_representation(G)
    else:
        inp = restricted_frequency_rep(G, 1, kind == "dihedral")
    return G, build_network(G, inp, list(channels), 2, seed=seed)


# ------------------------------------------------------------------- layers


def test_layer_shares_only_common_irreps():
    G = build_group("cyclic", 4)
    in_rep = restricted_frequency_rep(G, 1, False)  # freq:1 only
    out_rep = stack_rep(regular_representation(G), 2)
    layer = EquivariantLayer(in_rep, out_rep)
    assert set(layer.coefficients) == {"freq:1"}
    assert layer.coefficients["freq:1"].shape == (2, 1, 2)  # m_out, m_in, c


def test_layer_equivariance_random_coefficients():
    rng = np.random.default_rng(0)
    for kind, N in (("cyclic", 5), ("dihedral", 4), ("quaternion", 8)):
        G = build_group(kind, N)
        in_rep = stack_rep(regular_representation(G), 2)
        out_rep = stack_rep(regular_representation(G), 3)
        layer = EquivariantLayer(in_rep, out_rep)
        layer.set_coefficients(
            {pid: rng.standard_normal(co.shape) for pid, co in layer.coefficients.items()}
        )
        W = layer.matrix
        for g in range(G.order):
            np.testing.assert_allclose(
                W @ in_rep.rho(g), out_rep.rho(g) @ W, atol=1e-10
            )


def test_layer_matrix_cache_dirty_flag():
    G, net = _small_net()
    layer = net.layers[0]
    W1 = layer.matrix
    assert layer.matrix is W1  # cached object, no rebuild
    pid = next(iter(layer.coefficients))
    co = layer.coefficients[pid].copy()
    co += 1.0
    layer.set_coefficients({pid: co})
    W2 = layer.matrix
    assert W2 is not W1
    assert not np.array_equal(W1, W2)


def test_materialize_regular_to_regular_is_group_circulant():
    """One regular->regular channel: W is the circulant of its filter.

    The layer's matrix commutes with the regular action, so it must be
    a group circulant; entry W[a, b] = w(a^{-1} b), so the filter is the
    identity row W[0, :].
    """
    G = build_group("dihedral", 3)
    reg = regular_representation(G)
    layer = EquivariantLayer(reg, reg)
    rng = np.random.default_rng(1)
    layer.set_coefficients(
        {pid: rng.standard_normal(co.shape) for pid, co in layer.coefficients.items()}
    )
    W = materialize(layer)
    w = W[0, :]
    np.testing.assert_allclose(W, group_circulant(G, w), atol=1e-10)


def test_filter_fourier_matches_layer_coefficients():
    """The circulant filter's Fourier blocks live on the layer's basis.

    For a regular->regular layer over a group with only real-type
    irreps, the coefficient of each irrep is a 1x1x1 block equal (up to
    the catalog convention) to the filter transform; check the dihedral
    case where all multiplicities stay small.
    """
    G = build_group("cyclic", 4)
    reg = regular_representation(G)
    layer = EquivariantLayer(reg, reg)
    rng = np.random.default_rng(2)
    layer.set_coefficients(
        {pid: rng.standard_normal(co.shape) for pid, co in layer.coefficients.items()}
    )
    w = materialize(layer)[:, 0]
    f = fourier_transform(G, w)
    # trivial and sign blocks are scalars and must match exactly
    assert abs(f["triv"][0, 0] - layer.coefficients["triv"][0, 0, 0]) < 1e-10
    assert abs(f["sign"][0, 0] - layer.coefficients["sign"][0, 0, 0]) < 1e-10


def test_set_coefficients_validation():
    G, net = _small_net()
    layer = net.layers[0]
    with pytest.raises(KeyError):
        layer.set_coefficients({"nope": np.zeros((1, 1, 1))})
    pid = next(iter(layer.coefficients))
    with pytest.raises(ValueError):
        layer.set_coefficients({pid: np.zeros((9, 9, 9))})


# ------------------------------------------------------------------ networks


@pytest.mark.parametrize("kind,N", [("cyclic", 3), ("dihedral", 4), ("quaternion", 8)])
def test_network_invariance(kind, N):
    G, net = _small_net(kind, N)
    rng = np.random.default_rng(3)
    X = rng.standard_normal((8, net.input_rep.dim))
    base = net.forward(X)
    for g in range(G.order):
        acted = X @ net.input_rep.rho(g).T
        np.testing.assert_allclose(net.forward(acted), base, atol=1e-8)


def test_forward_promotes_single_sample():
    G, net = _small_net()
    x = np.zeros(net.input_rep.dim)
    out = net.forward(x)
    assert out.shape == (2,)  # single vector in, single logit row out
    with pytest.raises(ValueError):
        net.forward(np.zeros((2, 3, 4)))


def test_gradients_match_finite_differences():
    for kind, N in (("cyclic", 3), ("dihedral", 4), ("quaternion", 8)):
        G, net = _small_net(kind, N, channels=(2, 2), seed=1)
        rng = np.random.default_rng(4)
        X = rng.standard_normal((6, net.input_rep.dim))
        y = rng.integers(0, 2, 6)
        loss, grads = net.loss_and_grads(X, y)
        step = 1e-5
        for l, layer in enumerate(net.layers):
            for pid, co in layer.coefficients.items():
                flat = co.reshape(-1)
                for idx in range(0, flat.size, max(1, flat.size // 5)):
                    orig = flat[idx]
                    flat[idx] = orig + step
                    layer.mark_dirty()
                    lp, _ = net.loss_and_grads(X, y)
                    flat[idx] = orig - step
                    layer.mark_dirty()
                    lm, _ = net.loss_and_grads(X, y)
                    flat[idx] = orig
                    layer.mark_dirty()
                    fd = (lp - lm) / (2 * step)
                    an = grads[l][pid].reshape(-1)[idx]
                    assert abs(fd - an) <= 1e-4 * max(abs(fd), abs(an), 1e-6)


def test_build_network_seed_determinism():
    G, net1 = _small_net(seed=42)
    _, net2 = _small_net(seed=42)
    _, net3 = _small_net(seed=43)
    for l1, l2 in zip(net1.layers, net2.layers):
        for pid in l1.coefficients:
            np.testing.assert_array_equal(l1.coefficients[pid], l2.coefficients[pid])
    diff = any(
        not np.array_equal(l1.coefficients[pid], l3.coefficients[pid])
        for l1, l3 in zip(net1.layers, net3.layers)
        for pid in l1.coefficients
    )
    assert diff


def test_build_network_validation():
    G = build_group("cyclic", 4)
    inp = restricted_frequency_rep(G, 1, False)
    with pytest.raises(ValueError):
        build_network(G, inp, [], 2)
    with pytest.raises(ValueError):
        build_network(G, inp, [0, 2], 2)
    with pytest.raises(ValueError):
        build_network(G, inp, [2], 1)
    H = build_group("cyclic", 5)
    with pytest.raises(ValueError):
        build_network(H, inp, [2], 2)


def test_channels_for_width():
    G = build_group("cyclic", 8)
    assert channels_for_width(G, 512) == 64
    assert channels_for_width(G, 4) == 1  # never rounds to zero
    G1 = build_group("cyclic", 1)
    assert channels_for_width(G1, 512) == 512


def test_network_reps_structure():
    G = build_group("cyclic", 4)
    inp = restricted_frequency_rep(G, 1, False)
    net = build_network(G, inp, [8, 4], 2, seed=0)
    dims = [r.dim for r in net.reps]
    assert dims == [2, 32, 16, 2]
    assert net.reps[-1].blocks == (("triv", 2),)
    assert net.depth == 3


# ------------------------------------------------------------ margins, loss


def test_margins_two_class_oracle():
    G, net = _small_net()
    X = np.eye(net.input_rep.dim)[:2]
    logits = net.forward(X)
    y = np.array([0, 1])
    expected = np.array(
        [logits[0, 0] - logits[0, 1], logits[1, 1] - logits[1, 0]]
    )
    np.testing.assert_allclose(margins(net, X, y), expected, atol=1e-12)


def test_empirical_margin_loss_thresholds():
    G, net = _small_net()
    rng = np.random.default_rng(5)
    X = rng.standard_normal((50, net.input_rep.dim))
    y = rng.integers(0, 2, 50)
    mg = margins(net, X, y)
    assert empirical_margin_loss(net, X, y, 0.0) == np.mean(mg <= 0.0)
    big = float(np.max(np.abs(mg))) + 1.0
    assert empirical_margin_loss(net, X, y, big) == 1.0
    with pytest.raises(ValueError):
        empirical_margin_loss(net, X, y, -1.0)


# ----------------------------------------------------------------- training


def _toy_problem(seed=0):
    """Linearly separated two-cluster data on the C_4 frequency plane."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((120, 2)) * 0.1
    y = rng.integers(0, 2, 120)
    X[y == 0] += np.array([1.0, 0.0])
    X[y == 1] += np.array([-1.0, 0.0])
    return X, y


def test_train_reaches_margin_and_stops():
    G = build_group("cyclic", 1)
    inp = restricted_frequency_rep(G, 1, False)
    net = build_network(G, inp, [16], 2, seed=0)
    X, y = _toy_problem()
    cfg = TrainConfig(gamma=0.5, max_epochs=300, learning_rate=0.02, batch_size=32, seed=0)
    result = train(net, X, y, cfg)
    assert result.epochs <= 300
    assert result.margin_accuracy >= 0.99
    assert len(result.loss_history) == result.epochs
    frac = float(np.mean(margins(net, X, y) > 0.5))
    assert frac >= 0.99


def test_train_margin_not_reached():
    G = build_group("cyclic", 1)
    inp = restricted_frequency_rep(G, 1, False)
    net = build_network(G, inp, [4], 2, seed=0)
    X, y = _toy_problem()
    cfg = TrainConfig(gamma=1e6, max_epochs=3, learning_rate=0.01, batch_size=32, seed=0)
    with pytest.raises(MarginNotReached) as info:
        train(net, X, y, cfg)
    assert info.value.epochs == 3
    assert 0.0 <= info.value.achieved < 0.99


def test_train_is_deterministic():
    X, y = _toy_problem()
    outs = []
    for _ in range(2):
        G = build_group("cyclic", 2)
        inp = restricted_frequency_rep(G, 1, False)
        net = build_network(G, inp, [8], 2, seed=3)
        cfg = TrainConfig(gamma=0.2, max_epochs=20, learning_rate=0.02, batch_size=16, seed=9)
        try:
            train(net, X, y, cfg)
        except MarginNotReached:
            pass
        outs.append(net.forward(X))
    np.testing.assert_array_equal(outs[0], outs[1])


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(gamma=0.0)
    with pytest.raises(ValueError):
        TrainConfig(gamma=-2.0)


def test_train_rejects_bad_labels():
    G, net = _small_net()
    X = np.zeros((4, net.input_rep.dim))
    cfg = TrainConfig(gamma=1.0, max_epochs=1)
    with pytest.raises(ValueError):
        train(net, X, np.array([0, 1, 2, 0]), cfg)


def test_training_preserves_equivariance():
    G, net = _small_net("dihedral", 3, channels=(4, 2))
    rng = np.random.default_rng(11)
    X = rng.standard_normal((64, net.input_rep.dim))
    y = rng.integers(0, 2, 64)
    cfg = TrainConfig(gamma=0.05, max_epochs=10, learning_rate=0.02, batch_size=16, seed=0)
    try:
        train(net, X, y, cfg)
    except MarginNotReached:
        pass
    base = net.forward(X)
    for g in range(G.order):
        acted = X @ net.input_rep.rho(g).T
        np.testing.assert_allclose(net.forward(acted), base, atol=1e-8)


# -------------------------------------------------------------- checkpoints


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    G, net = _small_net("dihedral", 4, channels=(3, 2), seed=5)
    rng = np.random.default_rng(6)
    X = rng.standard_normal((10, net.input_rep.dim))
    y = rng.integers(0, 2, 10)
    cfg = TrainConfig(gamma=0.01, max_epochs=3, learning_rate=0.05, batch_size=4, seed=1)
    try:
        train(net, X, y, cfg)
    except MarginNotReached:
        pass
    path = tmp_path / "model.json"
    save_checkpoint(str(path), net, {"note": "test", "gamma": 0.01})
    net2, metadata = load_checkpoint(str(path))
    assert metadata["note"] == "test"
    np.testing.assert_array_equal(net.forward(X), net2.forward(X))
    for l1, l2 in zip(net.layers, net2.layers):
        for pid in l1.coefficients:
            np.testing.assert_array_equal(l1.coefficients[pid], l2.coefficients[pid])


def test_checkpoint_quaternion_roundtrip(tmp_path):
    G, net = _small_net("quaternion", 8, channels=(2,), seed=7)
    path = tmp_path / "q8.json"
    save_checkpoint(str(path), net, {})
    net2, _ = load_checkpoint(str(path))
    X = np.random.default_rng(8).standard_normal((4, 8))
    np.testing.assert_array_equal(net.forward(X), net2.forward(X))
