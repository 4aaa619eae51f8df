import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feedsim.engine import ContentItem
from feedsim.errors import ConfigError, IntegrityError
from feedsim.netgen import DirectedGraph, SbmParams, sbm_graph
from feedsim.policy import (
    EmaParams,
    ScoringContext,
    TieStrengthModel,
    TieStrengthParams,
    compute_static_features,
    logistic,
    score_candidates,
    standardize,
    tie_strength,
)
from feedsim.population import Population, PopulationConfig, Topic, sample_population


def make_population(z_rows, minority_first=1):
    n = len(z_rows)
    groups = np.array([1] * minority_first + [0] * (n - minority_first), dtype=np.int8)
    return Population(groups=groups, z=np.array(z_rows, dtype=np.float64))


def brute_force_common_counts(graph):
    """Independent oracle: set intersections per edge."""
    out_sets = [set(graph.out_neighbors(i).tolist()) for i in range(graph.n)]
    in_sets = [set(graph.in_neighbors(i).tolist()) for i in range(graph.n)]
    out_c, in_c = [], []
    for i, j in zip(graph.edge_src.tolist(), graph.edge_dst.tolist()):
        out_c.append(len(out_sets[i] & out_sets[j]))
        in_c.append(len(in_sets[i] & in_sets[j]))
    return np.array(out_c, dtype=float), np.array(in_c, dtype=float)


def test_static_features_three_node_enumeration():
    # edges {0->2, 1->2, 0->1}: out(0)={1,2}, out(1)={2}, in(0)={}, in(1)={0}
    g = DirectedGraph.from_edges(3, np.array([0, 0, 1]), np.array([1, 2, 2]))
    pop = make_population([[0.5, 0.1, 0.4], [0.5, 0.4, 0.1], [0.5, 0.4, 0.1]])
    table = compute_static_features(g, pop)
    e01 = g.edge_index(0, 1)
    assert table.out_edge_count[e01] == 1  # common out: {2}
    assert table.in_edge_count[e01] == 0
    assert np.all(table.int_count == 0)


def test_static_features_match_brute_force():
    pop = sample_population(PopulationConfig(n=80, minority_share=0.2),
                            np.random.default_rng(0))
    g = sbm_graph(pop, SbmParams(), np.random.default_rng(1))
    table = compute_static_features(g, pop)
    out_c, in_c = brute_force_common_counts(g)
    np.testing.assert_array_equal(table.out_edge_count, out_c)
    np.testing.assert_array_equal(table.in_edge_count, in_c)


def test_distance_feature():
    g = DirectedGraph.from_edges(2, np.array([0, 1]), np.array([1, 0]))
    pop = make_population([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])
    table = compute_static_features(g, pop)
    assert table.dist[g.edge_index(0, 1)] == pytest.approx(5.0, abs=1e-12)  # 3-4-5
    same = make_population([[0.2, 0.3, 0.4], [0.2, 0.3, 0.4]])
    assert compute_static_features(g, same).dist[0] == 0.0


def two_node_table():
    g = DirectedGraph.from_edges(2, np.array([0, 1]), np.array([1, 0]))
    pop = make_population([[0.5, 0.1, 0.4], [0.5, 0.4, 0.1]])
    return g, compute_static_features(g, pop)


def test_ema_single_updates():
    _, table = two_node_table()
    ema = EmaParams(alpha=0.01)
    # recommended and interacted from zero
    table.update_interaction_counts(np.array([0]), np.array([1.0]), ema)
    assert table.int_count[0] == pytest.approx(0.01, abs=1e-15)
    # recommended, no interaction, from 0.5
    table.int_count[1] = 0.5
    table.update_interaction_counts(np.array([1]), np.array([0.0]), ema)
    assert table.int_count[1] == pytest.approx(0.495, abs=1e-15)
    # not recommended: unchanged
    before = table.int_count[0]
    table.update_interaction_counts(np.array([1]), np.array([1.0]), ema)
    assert table.int_count[0] == before


def test_ema_chain_matches_direct_recurrence():
    rng = np.random.default_rng(5)
    _, table = two_node_table()
    ema = EmaParams(alpha=0.07)
    expected = 0.0
    for _ in range(200):
        x = float(rng.integers(0, 2))
        table.update_interaction_counts(np.array([0]), np.array([x]), ema)
        expected = 0.07 * x + 0.93 * expected
    assert table.int_count[0] == pytest.approx(expected, abs=1e-12)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=300),
       st.floats(0.001, 0.999))
@settings(max_examples=50, deadline=None)
def test_ema_stays_in_unit_interval(bits, alpha):
    _, table = two_node_table()
    ema = EmaParams(alpha=alpha)
    for b in bits:
        table.update_interaction_counts(np.array([0]), np.array([float(b)]), ema)
        assert 0.0 <= table.int_count[0] <= 1.0


def test_update_rejects_bad_edges():
    _, table = two_node_table()
    with pytest.raises(IntegrityError):
        table.update_interaction_counts(np.array([99]), np.array([1.0]), EmaParams())
    with pytest.raises(IntegrityError):
        table.update_interaction_counts(np.array([0, 0]), np.array([1.0, 0.0]), EmaParams())


def test_incremental_moments_track_recompute():
    rng = np.random.default_rng(3)
    pop = sample_population(PopulationConfig(n=40, minority_share=0.2), rng)
    g = sbm_graph(pop, SbmParams(), np.random.default_rng(4))
    table = compute_static_features(g, pop)
    ema = EmaParams(alpha=0.05)
    for _ in range(300):
        k = int(rng.integers(1, 30))
        idx = rng.choice(table.num_edges, size=k, replace=False)
        table.update_interaction_counts(idx, rng.integers(0, 2, k).astype(float), ema)
        mean, std = table.int_count_moments()
        assert mean == pytest.approx(float(np.mean(table.int_count)), abs=1e-12)
        assert std == pytest.approx(float(np.std(table.int_count)), abs=1e-12)


def test_standardize_hand_example():
    g = DirectedGraph.from_edges(3, np.array([0, 1, 2]), np.array([1, 2, 0]))
    pop = make_population([[0.0] * 3, [0.0] * 3, [0.0] * 3])
    table = compute_static_features(g, pop)
    table.int_count[:] = [1.0, 2.0, 3.0]
    stats, std_table = standardize(table)
    np.testing.assert_allclose(std_table[:, 3], [-1.224744871391589, 0.0, 1.224744871391589],
                               atol=1e-12)
    # all-equal columns (dist is 0 everywhere here) map to zero
    assert np.all(std_table[:, 2] == 0.0)
    assert stats.std[3] == pytest.approx(np.sqrt(2.0 / 3.0), abs=1e-15)


def test_standardized_columns_zero_mean_unit_std():
    pop = sample_population(PopulationConfig(n=60, minority_share=0.2),
                            np.random.default_rng(2))
    g = sbm_graph(pop, SbmParams(), np.random.default_rng(2))
    table = compute_static_features(g, pop)
    rng = np.random.default_rng(0)
    table.int_count[:] = rng.random(table.num_edges)
    table.mode = "recompute"
    _, std_table = standardize(table)
    for col in range(4):
        assert abs(std_table[:, col].mean()) < 1e-12
        assert abs(std_table[:, col].std() - 1.0) < 1e-12


def test_standardize_shift_invariance():
    """Adding a constant to a raw feature column leaves standardized values,
    hence tie strengths, unchanged."""
    pop = sample_population(PopulationConfig(n=30, minority_share=0.2),
                            np.random.default_rng(8))
    g = sbm_graph(pop, SbmParams(), np.random.default_rng(8))
    table = compute_static_features(g, pop)
    _, before = standardize(table)
    shifted = compute_static_features(g, pop)
    shifted.out_edge_count = table.out_edge_count + 7.0
    _, after = standardize(shifted)
    np.testing.assert_allclose(before[:, 0], after[:, 0], atol=1e-9)


def test_tie_strength_values():
    import mpmath

    params = TieStrengthParams(beta=(1.0, 1.0, -1.0, 5.0))
    assert tie_strength(np.zeros(4), TieStrengthParams(beta=(2.0, 0.5, -3.0, 1.0))) == 0.5
    p1 = tie_strength(np.array([1.0, 0.0, 0.0, 0.0]), params)
    p2 = tie_strength(np.array([0.0, 0.0, 1.0, 0.0]), params)
    assert p1 == pytest.approx(float(1 / (1 + mpmath.exp(-1))), abs=1e-12)
    assert p2 == pytest.approx(float(1 / (1 + mpmath.exp(1))), abs=1e-12)
    assert p1 + p2 == pytest.approx(1.0, abs=1e-12)  # symmetric about 0.5


@given(st.integers(0, 3), st.floats(-3, 3), st.floats(0.1, 2.0))
@settings(max_examples=80, deadline=None)
def test_tie_strength_monotonicity(idx, base, delta):
    beta = (1.0, 1.0, -1.0, 5.0)
    params = TieStrengthParams(beta=beta)
    f_lo = np.zeros(4)
    f_hi = np.zeros(4)
    f_lo[idx] = base
    f_hi[idx] = base + delta
    lo, hi = tie_strength(f_lo, params), tie_strength(f_hi, params)
    if beta[idx] > 0:
        assert hi > lo
    else:
        assert hi < lo


def test_logistic_extreme_inputs_safe():
    assert logistic(1000.0) == 1.0
    assert logistic(-1000.0) == pytest.approx(0.0, abs=1e-300)
    out = logistic(np.array([-800.0, 0.0, 800.0]))
    assert np.all(np.isfinite(out))


def test_tie_model_matches_standardize_composition():
    pop = sample_population(PopulationConfig(n=50, minority_share=0.2),
                            np.random.default_rng(1))
    g = sbm_graph(pop, SbmParams(), np.random.default_rng(1))
    table = compute_static_features(g, pop)
    rng = np.random.default_rng(2)
    table.mode = "recompute"
    table.int_count[:] = rng.random(table.num_edges) * 0.3
    params = TieStrengthParams(beta=(1.0, 1.0, -1.0, 5.0))
    model = TieStrengthModel(table, params, int_count_scaling="zscore_current")
    _, std_table = standardize(table)
    expected = logistic(std_table @ np.array(params.beta))
    np.testing.assert_allclose(model.strengths(), expected, atol=1e-12)


def test_tie_constant_without_recommendations():
    """Only int_count varies over time; with no recommendations ever served on
    an edge, and an unchanged column elsewhere, its strength is fixed."""
    pop = sample_population(PopulationConfig(n=40, minority_share=0.2),
                            np.random.default_rng(6))
    g = sbm_graph(pop, SbmParams(), np.random.default_rng(6))
    table = compute_static_features(g, pop)
    model = TieStrengthModel(table, TieStrengthParams())
    before = model.strengths()
    # time passes with no updates at all
    after = model.strengths()
    np.testing.assert_array_equal(before, after)


# -- score_candidates ----------------------------------------------------------


def scoring_fixture():
    pop = sample_population(PopulationConfig(n=6, minority_share=0.34),
                            np.random.default_rng(0))
    g = DirectedGraph.from_edges(
        6, np.array([0, 0, 0, 0, 1, 2]), np.array([1, 2, 3, 4, 0, 0])
    )
    table = compute_static_features(g, pop)
    model = TieStrengthModel(table, TieStrengthParams(beta=(0.0, 0.0, 0.0, 0.0)))
    ctx = ScoringContext(graph=g, norm_prefs=pop.normalized_z(), tie_model=model)
    return pop, g, ctx


def item(cid, creator, topic):
    return ContentItem(cid, creator, topic, 0)


def test_random_scores_uniform():
    _, _, ctx = scoring_fixture()
    cands = [item(0, 1, Topic.PROFESSIONAL), item(1, 2, Topic.MAINSTREAM),
             item(2, 3, Topic.MARGINAL), item(3, 4, Topic.PROFESSIONAL)]
    np.testing.assert_allclose(score_candidates("random", 0, cands, ctx),
                               [0.25] * 4, atol=1e-15)


def test_topic_match_scores():
    pop, g, ctx = scoring_fixture()
    ctx.norm_prefs = ctx.norm_prefs.copy()
    ctx.norm_prefs[0] = [0.5, 0.4, 0.1]
    cands = [item(0, 1, Topic.PROFESSIONAL), item(1, 2, Topic.MARGINAL)]
    np.testing.assert_allclose(score_candidates("topic_match", 0, cands, ctx),
                               [5 / 6, 1 / 6], atol=1e-12)


def test_real_graph_zero_beta_reduces_to_topic_plus_constant():
    pop, g, ctx = scoring_fixture()
    cands = [item(0, 1, Topic.PROFESSIONAL), item(1, 2, Topic.MAINSTREAM),
             item(2, 3, Topic.MARGINAL)]
    got = score_candidates("real_graph", 0, cands, ctx)
    topic_scores = ctx.norm_prefs[0, [0, 1, 2]]
    expected = 0.5 * (topic_scores + 0.5)
    expected = expected / expected.sum()
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_scores_sum_to_one():
    pop, g, ctx = scoring_fixture()
    cands = [item(0, 1, Topic.PROFESSIONAL), item(1, 2, Topic.MAINSTREAM)]
    for policy in ("random", "topic_match", "real_graph"):
        assert score_candidates(policy, 0, cands, ctx).sum() == pytest.approx(1.0, abs=1e-12)


def test_score_candidates_edge_cases():
    _, _, ctx = scoring_fixture()
    assert len(score_candidates("random", 0, [], ctx)) == 0
    with pytest.raises(IntegrityError):
        score_candidates("random", 1, [item(0, 3, Topic.PROFESSIONAL)], ctx)  # 1 !-> 3
    with pytest.raises(ConfigError):
        score_candidates("nope", 0, [item(0, 1, Topic.PROFESSIONAL)], ctx)
