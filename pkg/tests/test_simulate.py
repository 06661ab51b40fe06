"""Synthetic family generator and ranking metrics."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tplp.errors import ValidationError
from tplp.simulate import (
    SimConfig,
    auc,
    build_sim_input,
    generate_family,
    mean_avg_precision,
    run_simulation,
)


def small_cfg(**kw):
    base = dict(size=12, n_graphs=3, density=0.3, rewire_frac=0.2, rank=20, seed=0)
    base.update(kw)
    return SimConfig(**base)


# -- generator ----------------------------------------------------------------


def test_family_is_deterministic():
    a = generate_family(small_cfg())
    b = generate_family(small_cfg())
    for ga, gb in zip(a, b):
        np.testing.assert_array_equal(ga.weights, gb.weights)


def test_family_edge_count_exact():
    cfg = small_cfg()
    graphs = generate_family(cfg)
    want = round(cfg.density * cfg.size * (cfg.size - 1) / 2)
    for g in graphs:
        assert np.count_nonzero(np.triu(g.weights, 1)) == want


def test_family_members_differ():
    graphs = generate_family(small_cfg())
    assert any(
        not np.array_equal(graphs[0].weights, g.weights) for g in graphs[1:]
    )


def test_family_rewiring_bounded():
    """Each child differs from its siblings by at most 2*ceil(p|E|) edges."""
    cfg = small_cfg()
    graphs = generate_family(cfg)
    n_edges = round(cfg.density * cfg.size * (cfg.size - 1) / 2)
    budget = int(np.ceil(cfg.rewire_frac * n_edges))
    edge_sets = [
        {tuple(e) for e in np.argwhere(np.triu(g.weights, 1))} for g in graphs
    ]
    for i in range(len(edge_sets)):
        for j in range(i + 1, len(edge_sets)):
            assert len(edge_sets[i] ^ edge_sets[j]) <= 4 * budget


def test_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(size=0)
    with pytest.raises(ValidationError):
        SimConfig(density=0.0)
    with pytest.raises(ValidationError):
        SimConfig(alpha=1.0)
    with pytest.raises(ValidationError):
        SimConfig(rewire_frac=-0.1)


def test_sim_input_protocol():
    cfg = small_cfg()
    y0, test_set = build_sim_input(cfg)
    assert y0.dims == (cfg.size,) * cfg.n_graphs
    half = cfg.size // 2
    # initial tensor: half the diagonal at 1 (train), test entries at 0.9
    assert y0.values.size == 3 * half
    assert np.count_nonzero(y0.values == 1.0) == half
    assert np.count_nonzero(y0.values == 0.9) == 2 * half
    train = {
        tuple(r) for r, v in zip(y0.indices, y0.values) if v == 1.0
    }
    for row in train:
        assert len(set(row)) == 1  # training entries lie on the diagonal
    # test: held-out diagonal positives, equal count off-diagonal negatives
    assert test_set.positives.shape == (half, cfg.n_graphs)
    assert test_set.negatives.shape == (half, cfg.n_graphs)
    pos = {tuple(r) for r in test_set.positives}
    neg = {tuple(r) for r in test_set.negatives}
    assert not (train & pos) and not (train & neg) and not (pos & neg)
    for row in pos:
        assert len(set(row)) == 1
    for row in neg:
        assert len(set(row)) > 1  # off-diagonal


# -- metrics ------------------------------------------------------------------


def test_auc_hand_values():
    scores = np.array([0.9, 0.8, 0.3, 0.1])
    labels = np.array([1, 0, 1, 0])
    # pairs: (0.9>0.8)=1, (0.9>0.1)=1, (0.3<0.8)=0, (0.3>0.1)=1 -> 3/4
    assert auc(scores, labels) == pytest.approx(0.75)


def test_auc_perfect_and_inverted():
    labels = np.array([1, 1, 0, 0])
    assert auc(np.array([4.0, 3.0, 2.0, 1.0]), labels) == 1.0
    assert auc(np.array([1.0, 2.0, 3.0, 4.0]), labels) == 0.0


def test_auc_ties_half_credit():
    assert auc(np.array([1.0, 1.0]), np.array([1, 0])) == pytest.approx(0.5)


def test_map_hand_value():
    scores = np.array([0.9, 0.8, 0.7, 0.6])
    labels = np.array([1, 0, 1, 0])
    # precision at ranks of positives: 1/1 and 2/3
    assert mean_avg_precision(scores, labels) == pytest.approx((1.0 + 2.0 / 3.0) / 2)


@given(st.integers(min_value=0, max_value=500))
def test_auc_invariant_under_monotone_transform(seed):
    rng = np.random.default_rng(seed)
    scores = rng.standard_normal(20)
    labels = rng.integers(0, 2, size=20)
    if labels.min() == labels.max():
        return
    base = auc(scores, labels)
    assert auc(3.0 * scores + 2.0, labels) == pytest.approx(base, abs=1e-12)
    assert auc(np.exp(scores), labels) == pytest.approx(base, abs=1e-12)


@given(st.integers(min_value=0, max_value=500))
def test_map_invariant_under_monotone_transform(seed):
    rng = np.random.default_rng(seed)
    scores = rng.standard_normal(15)
    labels = rng.integers(0, 2, size=15)
    if labels.max() == 0:
        return
    base = mean_avg_precision(scores, labels)
    assert mean_avg_precision(np.tanh(scores), labels) == pytest.approx(base, abs=1e-12)


def test_metric_validation():
    with pytest.raises(ValidationError):
        auc(np.ones(3), np.array([1, 1, 1]))  # one class only
    with pytest.raises(ValidationError):
        mean_avg_precision(np.ones(2), np.array([0, 0]))


# -- end to end ---------------------------------------------------------------


def test_run_simulation_smoke():
    cfg = small_cfg(rank=40)
    out = run_simulation(cfg)
    assert 0.0 <= out["auc"] <= 1.0
    assert 0.0 <= out["map"] <= 1.0
    assert out["seconds"] > 0.0


def test_run_simulation_seed_changes_metrics():
    a = run_simulation(small_cfg(rank=30))
    b = run_simulation(small_cfg(rank=30, seed=5))
    assert a["auc"] != b["auc"] or a["map"] != b["map"]
