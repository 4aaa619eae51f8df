import math

import numpy as np
import pytest
from scipy import stats as sstats

from feedsim.engine import EventLog
from feedsim.errors import ConfigError, UndefinedStatisticError
from feedsim.metrics import (
    CorrelationResult,
    MetricsConfig,
    TimeSeries,
    aggregate_series,
    interaction_gap,
    minority_share_by_topic,
    moving_average,
    ols_line,
    one_sample_t_test,
    pearson,
    per_step_professional_ratio,
    per_user_cross_group_visibility,
    professional_rec_ratio,
    recs_vs_incoming_edges,
    regularized_incomplete_beta,
    student_t_two_sided_p,
    time_averaged_professional_ratio,
)
from feedsim.netgen import DirectedGraph
from feedsim.population import Population


def make_population(groups):
    rng = np.random.default_rng(0)
    return Population(groups=np.array(groups, dtype=np.int8),
                      z=rng.normal(0.3, 0.1, (len(groups), 3)))


def make_log(steps, content, recs, n_topics=3):
    """content: list of (step, creator, topic); recs: list of (step, viewer,
    content_idx, interacted)."""
    content = np.array(content, dtype=np.int64).reshape(-1, 3)
    recs = np.array(recs, dtype=np.int64).reshape(-1, 4)
    return EventLog(
        steps=steps,
        content_step=content[:, 0].astype(np.int32),
        content_creator=content[:, 1].astype(np.int32),
        content_topic=content[:, 2].astype(np.int8),
        rec_step=recs[:, 0].astype(np.int32),
        rec_viewer=recs[:, 1].astype(np.int32),
        rec_content=recs[:, 2].astype(np.int32),
        rec_interacted=recs[:, 3].astype(bool),
        tie_count=np.zeros((steps, 2, 3), dtype=np.int64),
        tie_int_sum=np.zeros((steps, 2, 3)),
        tie_strength_sum=np.zeros((steps, 2, 3)),
        meta={},
    )


# -- moving average ---------------------------------------------------------


def series(vals):
    v = np.array([np.nan if x is None else float(x) for x in vals])
    return TimeSeries(np.arange(len(vals)), v, ~np.isnan(v))


def test_moving_average_window_one_is_identity():
    s = series([1, 5, 2, 4])
    out = moving_average(s, 1)
    np.testing.assert_allclose(out.v, s.v)


def test_moving_average_trailing():
    out = moving_average(series([1, 3, 5]), 2)
    np.testing.assert_allclose(out.v, [1.0, 2.0, 4.0])


def test_moving_average_skips_gaps():
    # gaps consume neither numerator nor count
    out = moving_average(series([1, None, 5]), 2)
    assert out.defined.tolist() == [True, True, True]
    np.testing.assert_allclose(out.v, [1.0, 1.0, 3.0])
    lead = moving_average(series([None, None, 4]), 3)
    assert lead.defined.tolist() == [False, False, True]
    assert lead.v[2] == 4.0


def test_moving_average_rejects_bad_window():
    with pytest.raises(ConfigError):
        moving_average(series([1.0]), 0)


# -- professional ratio -------------------------------------------------------


def symmetric_toy():
    """2 minority (ids 0-1), 8 majority (2-9). Each step: one professional item
    per group; minority item gets 2 recs (1 per minority user), majority item
    gets 8 recs (1 per majority user) => per-capita equal."""
    groups = [1, 1] + [0] * 8
    content, recs = [], []
    cid = 0
    for t in range(5):
        content.append((t, 0, 0))
        min_id = cid
        cid += 1
        content.append((t, 2, 0))
        maj_id = cid
        cid += 1
        recs += [(t, 1, min_id, 1), (t, 0, min_id, 0)]
        recs += [(t, v, maj_id, 1) for v in range(2, 10)]
    return make_population(groups), make_log(5, content, recs)


def test_ratio_symmetric_is_one():
    pop, log = symmetric_toy()
    raw = per_step_professional_ratio(log, pop)
    assert raw.defined.all()
    np.testing.assert_allclose(raw.v, 1.0)


def test_ratio_hand_built_counts():
    # 2 minority among 10; per step: 2 minority-prof recs, 4 majority-prof recs
    # R_min = 2/2 = 1, R_maj = 4/8 = 0.5 -> ratio 2
    groups = [1, 1] + [0] * 8
    content, recs = [], []
    cid = 0
    for t in range(3):
        content.append((t, 0, 0))
        content.append((t, 2, 0))
        recs += [(t, 3, cid, 1), (t, 4, cid, 0)]
        recs += [(t, 5, cid + 1, 1), (t, 6, cid + 1, 0), (t, 7, cid + 1, 0),
                 (t, 8, cid + 1, 1)]
        cid += 2
    pop = make_population(groups)
    log = make_log(3, content, recs)
    raw = per_step_professional_ratio(log, pop)
    np.testing.assert_allclose(raw.v, 2.0)


def test_ratio_undefined_when_majority_zero():
    groups = [1, 1] + [0] * 8
    content = [(0, 0, 0)]
    recs = [(0, 1, 0, 1)]
    log = make_log(1, content, recs)
    raw = per_step_professional_ratio(log, make_population(groups))
    assert not raw.defined[0]


def test_ratio_invariant_under_relabeling():
    pop, log = symmetric_toy()
    base = per_step_professional_ratio(log, pop)
    # permute content ids uniformly
    perm = np.random.default_rng(0).permutation(log.n_content)
    inv = np.argsort(perm)
    relabeled = make_log(
        log.steps,
        list(zip(log.content_step[inv].tolist(), log.content_creator[inv].tolist(),
                 log.content_topic[inv].tolist())),
        list(zip(log.rec_step.tolist(), log.rec_viewer.tolist(),
                 perm[log.rec_content].tolist(), log.rec_interacted.astype(int).tolist())),
    )
    out = per_step_professional_ratio(relabeled, pop)
    np.testing.assert_allclose(out.v, base.v)


def test_ratio_reported_from_burn_in():
    pop, log = symmetric_toy()
    cfg = MetricsConfig(burn_in=2, ma_window_ratio=2, ma_window_gap=2)
    out = professional_rec_ratio(log, pop, cfg)
    assert out.t[0] == 2
    assert len(out.t) == 3
    assert time_averaged_professional_ratio(log, pop, cfg) == pytest.approx(1.0)


def test_ratio_rejects_burn_in_past_end():
    pop, log = symmetric_toy()
    with pytest.raises(ConfigError):
        professional_rec_ratio(log, pop, MetricsConfig(burn_in=5))


# -- interaction gap ---------------------------------------------------------


def test_interaction_gap_zero_at_start_and_positive_when_in_group_interacts():
    groups = [1, 1, 0, 0]
    log = make_log(3, [(0, 0, 0)], [(0, 1, 0, 1)])
    # step 0: only an in-group pair served, no cross pair -> gap undefined
    log.tie_count[0, 0, 0] = 1
    log.tie_int_sum[0, 0, 0] = 0.0
    # step 1: both classes served, all counts still at their zero start
    log.tie_count[1, 0, 0] = 1
    log.tie_int_sum[1, 0, 0] = 0.0
    log.tie_count[1, 1, 0] = 1
    log.tie_int_sum[1, 1, 0] = 0.0
    # step 2: in-group pairs have accumulated counts, cross still zero
    log.tie_count[2, 0, 0] = 2
    log.tie_int_sum[2, 0, 0] = 0.02
    log.tie_count[2, 1, 0] = 1
    log.tie_int_sum[2, 1, 0] = 0.0
    cfg = MetricsConfig(burn_in=0, ma_window_ratio=1, ma_window_gap=1)
    gap = interaction_gap(log, make_population(groups), cfg)
    assert not gap.defined[0]  # one-sided service is not a gap observation
    assert gap.v[1] == 0.0  # everything starts at zero
    assert gap.v[2] == pytest.approx(0.01)


def test_interaction_gap_uses_gap_window():
    groups = [1, 0]
    log = make_log(4, [(0, 0, 0)], [(0, 1, 0, 1)])
    for t, val in enumerate([0.0, 0.01, 0.02, 0.03]):
        log.tie_count[t, 0, 0] = 1
        log.tie_int_sum[t, 0, 0] = val
        log.tie_count[t, 1, 0] = 1
    cfg = MetricsConfig(burn_in=0, ma_window_ratio=1, ma_window_gap=2)
    gap = interaction_gap(log, make_population(groups), cfg)
    np.testing.assert_allclose(gap.v, [0.0, 0.005, 0.015, 0.025])


# -- minority share by topic ---------------------------------------------------


def test_minority_share_counts():
    groups = [1, 0, 0]
    content = [(0, 0, 1), (0, 1, 1), (0, 1, 2), (0, 0, 2)]
    recs = [(0, 2, 0, 1), (0, 2, 1, 0), (0, 1, 3, 1), (0, 0, 2, 1)]
    pop = make_population(groups)
    log = make_log(1, content, recs)
    rows = {r.topic: r for r in minority_share_by_topic(log, pop, "all")}
    assert rows["mainstream"].rec_share_minority == pytest.approx(0.5)
    assert rows["mainstream"].creation_share_minority == pytest.approx(0.5)
    assert rows["marginal"].rec_share_minority == pytest.approx(0.5)
    assert rows["professional"].rec_share_minority is None
    maj = {r.topic: r for r in minority_share_by_topic(log, pop, "majority")}
    # majority receivers: recs to viewers 1 and 2
    assert maj["mainstream"].rec_share_minority == pytest.approx(0.5)
    assert maj["marginal"].rec_share_minority == pytest.approx(1.0)  # c3 by user 0
    mino = {r.topic: r for r in minority_share_by_topic(log, pop, "minority")}
    assert mino["marginal"].rec_share_minority == pytest.approx(0.0)  # c2 by user 1


def test_minority_share_rejects_bad_filter():
    pop, log = symmetric_toy()
    with pytest.raises(ConfigError):
        minority_share_by_topic(log, pop, "nobody")


# -- per-user visibility ---------------------------------------------------------


def test_per_user_visibility_counts_and_isolates():
    groups = [1, 1, 0, 0]
    pop = make_population(groups)
    # user 0 minority with majority followers; user 1 isolated from majority
    graph = DirectedGraph.from_edges(4, np.array([2, 3, 0, 1]), np.array([0, 0, 2, 0]))
    content = [(0, 0, 0), (0, 1, 0)]
    recs = [(0, 2, 0, 1), (0, 3, 0, 0)]
    log = make_log(1, content, recs)
    table = per_user_cross_group_visibility(log, pop, graph)
    assert table.user_id.tolist() == [0, 1]
    assert table.prof_recs_to_majority.tolist() == [2, 0]
    assert table.majority_followers.tolist() == [2, 0]
    assert table.majority_following.tolist() == [1, 0]


# -- pearson -----------------------------------------------------------------


def test_pearson_perfect_correlations():
    r = pearson([1, 2, 3], [1, 2, 3])
    assert r.rho == pytest.approx(1.0)
    assert r.p_value == 0.0
    r = pearson([1, 2, 3], [3, 2, 1])
    assert r.rho == pytest.approx(-1.0)


def test_pearson_reference_example():
    # oracle values (40-digit incomplete-beta evaluation): rho = 10/sqrt(148),
    # t = 2.5 exactly, p = 0.087706647008065547
    r = pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 6])
    assert r.rho == pytest.approx(0.82199493652678644, abs=1e-15)
    assert r.p_value == pytest.approx(0.087706647008065547, abs=1e-10)
    # rho=0.8 at df=3 gives the textbook p = 0.10408803866182786
    assert student_t_two_sided_p(2.3094010767585031, 3) == pytest.approx(
        0.10408803866182786, abs=1e-12
    )


def test_pearson_matches_scipy_on_fixed_vectors():
    rng = np.random.default_rng(42)
    for k in range(25):
        n = int(rng.integers(5, 60))
        x = rng.normal(size=n)
        y = 0.3 * x + rng.normal(size=n)
        mine = pearson(x, y)
        ref_rho, ref_p = sstats.pearsonr(x, y)
        assert mine.rho == pytest.approx(ref_rho, abs=1e-12)
        assert mine.p_value == pytest.approx(ref_p, abs=1e-8)


def test_pearson_affine_invariance():
    rng = np.random.default_rng(1)
    x = rng.normal(size=40)
    y = rng.normal(size=40)
    base = pearson(x, y)
    scaled = pearson(2.5 * x + 3, 0.7 * y - 11)
    assert scaled.rho == pytest.approx(base.rho, abs=1e-12)
    flipped = pearson(-2.0 * x, y)
    assert flipped.rho == pytest.approx(-base.rho, abs=1e-12)


def test_pearson_errors():
    with pytest.raises(ConfigError):
        pearson([1, 2], [1, 2])
    with pytest.raises(UndefinedStatisticError):
        pearson([1, 1, 1], [1, 2, 3])


def test_incomplete_beta_against_scipy():
    from scipy.special import betainc

    rng = np.random.default_rng(3)
    for _ in range(40):
        a = float(rng.uniform(0.5, 20))
        b = float(rng.uniform(0.5, 20))
        x = float(rng.uniform(0, 1))
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(
            float(betainc(a, b, x)), abs=1e-12
        )


def test_student_t_tail_against_scipy():
    for t in (-3.2, -0.5, 0.0, 0.7, 2.1, 6.0):
        for df in (1, 3, 10, 50):
            ref = 2 * sstats.t.sf(abs(t), df)
            assert student_t_two_sided_p(t, df) == pytest.approx(ref, abs=1e-10)


def test_one_sample_t_test_matches_scipy():
    rng = np.random.default_rng(0)
    x = rng.normal(-0.3, 1.0, 25)
    mine = one_sample_t_test(x)
    ref = sstats.ttest_1samp(x, 0.0)
    assert mine.t == pytest.approx(ref.statistic, abs=1e-12)
    assert mine.p_two_sided == pytest.approx(ref.pvalue, abs=1e-10)
    ref_less = sstats.ttest_1samp(x, 0.0, alternative="less")
    assert mine.p_less == pytest.approx(ref_less.pvalue, abs=1e-10)


# -- OLS and recs-vs-edges -----------------------------------------------------


def test_ols_line_exact():
    x = np.array([0.0, 1, 2, 3])
    line = ols_line(x, 2 * x + 1)
    assert line.slope == pytest.approx(2.0, abs=1e-9)
    assert line.intercept == pytest.approx(1.0, abs=1e-9)


def test_ols_line_flags_degenerate():
    assert ols_line([3, 3, 3], [1, 2, 3]) is None
    assert ols_line([1], [1]) is None


def test_recs_vs_incoming_edges_toy():
    groups = [1, 0, 0]
    pop = make_population(groups)
    graph = DirectedGraph.from_edges(3, np.array([1, 2, 0]), np.array([0, 0, 1]))
    content = [(0, 0, 0), (0, 0, 0), (0, 1, 2)]
    recs = [(0, 1, 0, 1), (0, 2, 0, 0), (0, 2, 1, 1)]
    log = make_log(1, content, recs)
    table, lines = recs_vs_incoming_edges(log, pop, graph)
    row = {(int(u), int(t)): v for u, t, v in
           zip(table.user_id, table.topic, table.mean_recs_per_item)}
    assert row[(0, 0)] == pytest.approx(1.5)  # 3 recs over 2 items
    assert row[(1, 2)] == pytest.approx(0.0)  # item never recommended
    # single-user strata carry no line
    assert lines[("minority", "professional")] is None


# -- aggregation ------------------------------------------------------------------


def test_aggregate_series_mean_of_runs_not_pooled():
    # two runs with unequal per-step counts: the aggregate must equal the mean
    # of the per-run series, not the pooled-count series
    a = series([1.0, 2.0])
    b = series([3.0, None])
    agg = aggregate_series([a, b])
    np.testing.assert_allclose(agg.v[0], 2.0)
    np.testing.assert_allclose(agg.v[1], 2.0)  # only run a defined at t=1
    assert agg.defined.all()
    # pooled means would weight by counts; construct them to differ
    pooled_t0 = (1.0 + 3.0) / 2
    assert agg.v[0] == pooled_t0  # same here
    c = series([1.0, 1.0])
    d = series([3.0, None])
    agg2 = aggregate_series([c, d])
    assert agg2.v[1] == 1.0  # mean over runs ignores missing run, stays per-run


def test_aggregate_series_requires_same_grid():
    a = TimeSeries(np.arange(3), np.ones(3), np.ones(3, dtype=bool))
    b = TimeSeries(np.arange(1, 4), np.ones(3), np.ones(3, dtype=bool))
    with pytest.raises(ConfigError):
        aggregate_series([a, b])


def test_timeseries_csv_roundtrip(tmp_path):
    s = series([1.5, None, 2.5])
    path = tmp_path / "s.csv"
    s.write_csv(path, "val")
    back = TimeSeries.read_csv(path)
    assert back.defined.tolist() == [True, False, True]
    np.testing.assert_allclose(back.v[back.defined], [1.5, 2.5])
