"""Statistics over event logs: visibility ratios, interaction gaps, topic
shares, per-user visibility tables, and the Pearson test.

All functions are pure in (EventLog, Population, DirectedGraph, MetricsConfig).
Undefined values (zero denominators) are carried as explicit gaps in
TimeSeries, never as zeros, and moving averages skip them in both numerator
and count. The Student-t tail behind the correlation test is evaluated through
the regularized incomplete beta with a continued fraction, so the p-values do
not depend on any external statistics library.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .engine import EventLog
from .errors import ConfigError, IntegrityError, UndefinedStatisticError
from .netgen import DirectedGraph, edge_histogram
from .population import GROUP_NAMES, N_TOPICS, TOPIC_NAMES, Group, Population, Topic


@dataclass(frozen=True)
class MetricsConfig:
    burn_in: int = 2500
    ma_window_ratio: int = 1000
    ma_window_gap: int = 100

    def validate(self) -> None:
        if self.burn_in < 0:
            raise ConfigError(f"metrics.burn_in: must be >= 0, got {self.burn_in}")
        if self.ma_window_ratio < 1:
            raise ConfigError(
                f"metrics.ma_window_ratio: must be >= 1, got {self.ma_window_ratio}"
            )
        if self.ma_window_gap < 1:
            raise ConfigError(f"metrics.ma_window_gap: must be >= 1, got {self.ma_window_gap}")


@dataclass
class TimeSeries:
    """Values over step indices; undefined points are masked, not zeroed."""

    t: np.ndarray
    v: np.ndarray
    defined: np.ndarray

    def __post_init__(self):
        if not (len(self.t) == len(self.v) == len(self.defined)):
            raise ConfigError("TimeSeries: misaligned arrays")

    def defined_points(self) -> tuple[np.ndarray, np.ndarray]:
        return self.t[self.defined], self.v[self.defined]

    def last_defined(self) -> float:
        idx = np.flatnonzero(self.defined)
        if len(idx) == 0:
            raise UndefinedStatisticError("series has no defined points")
        return float(self.v[idx[-1]])

    def slice_from(self, t0: int) -> "TimeSeries":
        keep = self.t >= t0
        return TimeSeries(self.t[keep], self.v[keep], self.defined[keep])

    def write_csv(self, path, value_name: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t", value_name])
            for t, v, d in zip(self.t.tolist(), self.v.tolist(), self.defined.tolist()):
                w.writerow([t, repr(v) if d else ""])

    @classmethod
    def read_csv(cls, path) -> "TimeSeries":
        ts, vs, ds = [], [], []
        with open(path, newline="", encoding="utf-8") as f:
            r = csv.reader(f)
            next(r)
            for row in r:
                ts.append(int(row[0]))
                ds.append(row[1] != "")
                vs.append(float(row[1]) if row[1] != "" else np.nan)
        return cls(np.array(ts), np.array(vs), np.array(ds, dtype=bool))


def moving_average(series: TimeSeries, window: int) -> TimeSeries:
    """Trailing mean over the last min(window, seen-so-far) defined values.

    Gaps contribute to neither numerator nor count; a position is defined once
    at least one defined value has occurred at or before it.
    """
    if window < 1:
        raise ConfigError(f"moving_average: window must be >= 1, got {window}")
    didx = np.flatnonzero(series.defined)
    out = np.full(len(series.v), np.nan)
    defined = np.zeros(len(series.v), dtype=bool)
    if len(didx):
        csum = np.concatenate([[0.0], np.cumsum(series.v[didx])])
        k = np.searchsorted(didx, np.arange(len(series.v)), side="right")
        lo = np.maximum(0, k - window)
        has = k > 0
        out[has] = (csum[k[has]] - csum[lo[has]]) / (k[has] - lo[has])
        defined = has
    return TimeSeries(series.t.copy(), out, defined)


# -- recommendation-ratio series ---------------------------------------------


def _per_step_group_counts(log: EventLog, population: Population, topic: Topic,
                           per_item: bool) -> tuple[np.ndarray, np.ndarray]:
    """Per-step recommendation counts of topic content by creator group,
    normalized per capita (or per created item when per_item=True)."""
    T = log.steps
    rec_topic = log.rec_topic()
    rec_creator_group = population.groups[log.rec_creator()]
    counts = np.zeros((2, T))
    for g in (Group.MAJORITY, Group.MINORITY):
        mask = (rec_topic == topic) & (rec_creator_group == g)
        counts[g] = np.bincount(log.rec_step[mask], minlength=T)[:T]
    if per_item:
        created_group = population.groups[log.content_creator]
        for g in (Group.MAJORITY, Group.MINORITY):
            mask = (log.content_topic == topic) & (created_group == g)
            items = np.bincount(log.content_step[mask], minlength=T)[:T]
            with np.errstate(invalid="ignore", divide="ignore"):
                counts[g] = np.where(items > 0, counts[g] / items, np.nan)
    else:
        for g in (Group.MAJORITY, Group.MINORITY):
            size = population.group_size(g)
            if size == 0:
                raise ConfigError(f"professional_rec_ratio: empty group {GROUP_NAMES[g]}")
            counts[g] = counts[g] / size
    return counts[Group.MINORITY], counts[Group.MAJORITY]


def per_step_professional_ratio(log: EventLog, population: Population,
                                per_item: bool = False) -> TimeSeries:
    """Raw minority/majority per-step ratio of professional recommendations."""
    r_min, r_maj = _per_step_group_counts(log, population, Topic.PROFESSIONAL, per_item)
    defined = np.isfinite(r_maj) & np.isfinite(r_min) & (r_maj > 0)
    v = np.full(log.steps, np.nan)
    v[defined] = r_min[defined] / r_maj[defined]
    return TimeSeries(np.arange(log.steps), v, defined)


def professional_rec_ratio(log: EventLog, population: Population, config: MetricsConfig,
                           per_item: bool = False) -> TimeSeries:
    """Moving-averaged visibility ratio, reported from burn-in onward.

    The trailing average runs over the full history; only the reported window
    is restricted to t >= burn_in.
    """
    config.validate()
    if config.burn_in >= log.steps:
        raise ConfigError(
            f"metrics.burn_in ({config.burn_in}) must be < steps ({log.steps})"
        )
    raw = per_step_professional_ratio(log, population, per_item=per_item)
    return moving_average(raw, config.ma_window_ratio).slice_from(config.burn_in)


def time_averaged_professional_ratio(log: EventLog, population: Population,
                                     config: MetricsConfig,
                                     per_item: bool = False) -> float:
    """Mean of the defined per-step ratios over the post-burn-in window."""
    raw = per_step_professional_ratio(log, population, per_item=per_item)
    post = raw.slice_from(config.burn_in)
    _, vals = post.defined_points()
    if len(vals) == 0:
        raise UndefinedStatisticError("no defined ratio points after burn-in")
    return float(np.mean(vals))


def interaction_gap(log: EventLog, population: Population,
                    config: MetricsConfig) -> TimeSeries:
    """In-group minus cross-group mean interaction count among the pairs served
    professional recommendations each step, smoothed with the gap window.

    Uses the per-step tie summaries recorded by the engine (interaction counts
    as of scoring time). A step is a gap unless both pair classes served at
    least one professional recommendation.
    """
    config.validate()
    topic = int(Topic.PROFESSIONAL)
    cnt_in = log.tie_count[:, 0, topic].astype(np.float64)
    cnt_cross = log.tie_count[:, 1, topic].astype(np.float64)
    defined = (cnt_in > 0) & (cnt_cross > 0)
    v = np.full(log.steps, np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        gap = log.tie_int_sum[:, 0, topic] / cnt_in - log.tie_int_sum[:, 1, topic] / cnt_cross
    v[defined] = gap[defined]
    return moving_average(TimeSeries(np.arange(log.steps), v, defined), config.ma_window_gap)


# -- topic shares --------------------------------------------------------------


RECEIVER_FILTERS = ("all", "minority", "majority")


@dataclass(frozen=True)
class TopicShare:
    topic: str
    receiver: str
    rec_share_minority: float | None
    rec_count: int
    creation_share_minority: float | None
    creation_count: int


def minority_share_by_topic(log: EventLog, population: Population,
                            receiver_filter: str = "all") -> list[TopicShare]:
    """Share of recommendations (and created items) per topic whose creator is
    a minority user; recommendations optionally restricted by receiver group."""
    if receiver_filter not in RECEIVER_FILTERS:
        raise ConfigError(f"receiver_filter must be one of {RECEIVER_FILTERS}")
    rec_topic = log.rec_topic()
    rec_minor = population.groups[log.rec_creator()] == Group.MINORITY
    if receiver_filter == "all":
        keep = np.ones(log.n_recs, dtype=bool)
    else:
        want = Group.MINORITY if receiver_filter == "minority" else Group.MAJORITY
        keep = population.groups[log.rec_viewer] == want
    created_minor = population.groups[log.content_creator] == Group.MINORITY
    rows = []
    for topic in range(N_TOPICS):
        rmask = keep & (rec_topic == topic)
        rc = int(np.sum(rmask))
        rshare = float(np.mean(rec_minor[rmask])) if rc else None
        cmask = log.content_topic == topic
        cc = int(np.sum(cmask))
        cshare = float(np.mean(created_minor[cmask])) if cc else None
        rows.append(TopicShare(TOPIC_NAMES[topic], receiver_filter, rshare, rc, cshare, cc))
    return rows


def write_topic_shares_csv(path, rows: list[TopicShare]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["topic", "receiver", "share_minority_created",
                    "creation_share_minority", "rec_count", "creation_count"])
        for r in rows:
            w.writerow([
                r.topic, r.receiver,
                repr(r.rec_share_minority) if r.rec_share_minority is not None else "",
                repr(r.creation_share_minority) if r.creation_share_minority is not None else "",
                r.rec_count,
                r.creation_count,
            ])


# -- per-user visibility -------------------------------------------------------


@dataclass
class PerUserVisibility:
    """One row per minority user: professional recommendations of their content
    delivered to majority receivers (total and per created professional item),
    plus network and preference covariates."""

    user_id: np.ndarray
    prof_recs_to_majority: np.ndarray
    prof_items: np.ndarray
    majority_followers: np.ndarray
    majority_following: np.ndarray
    z: np.ndarray  # (m, 3) raw preferences

    COVARIATES = ("majority_followers", "majority_following",
                  "z_professional", "z_mainstream", "z_marginal")

    def covariate(self, name: str) -> np.ndarray:
        if name == "majority_followers":
            return self.majority_followers
        if name == "majority_following":
            return self.majority_following
        if name.startswith("z_"):
            return self.z[:, TOPIC_NAMES.index(name[2:])]
        raise KeyError(name)

    def per_item_response(self) -> tuple[np.ndarray, np.ndarray]:
        """(row mask, cross-group recs per created professional item).

        Users who never created a professional item carry no per-item value and
        are excluded by the mask."""
        has = self.prof_items > 0
        return has, self.prof_recs_to_majority[has] / self.prof_items[has]

    def write_csv(self, path, seed=None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            header = ["user_id", "prof_recs_to_majority", "prof_items",
                      "majority_followers", "majority_following",
                      "z_professional", "z_mainstream", "z_marginal"]
            if seed is not None:
                header = ["seed"] + header
            w.writerow(header)
            for k in range(len(self.user_id)):
                row = [int(self.user_id[k]), int(self.prof_recs_to_majority[k]),
                       int(self.prof_items[k]),
                       int(self.majority_followers[k]), int(self.majority_following[k]),
                       repr(float(self.z[k, 0])), repr(float(self.z[k, 1])),
                       repr(float(self.z[k, 2]))]
                if seed is not None:
                    row = [seed] + row
                w.writerow(row)


def per_user_cross_group_visibility(log: EventLog, population: Population,
                                    graph: DirectedGraph) -> PerUserVisibility:
    minority = population.group_ids(Group.MINORITY)
    rec_creator = log.rec_creator()
    mask = (
        (log.rec_topic() == Topic.PROFESSIONAL)
        & (population.groups[rec_creator] == Group.MINORITY)
        & (population.groups[log.rec_viewer] == Group.MAJORITY)
    )
    counts = np.bincount(rec_creator[mask], minlength=population.n)
    items = np.bincount(
        log.content_creator[log.content_topic == Topic.PROFESSIONAL],
        minlength=population.n,
    )
    hist = edge_histogram(graph, population)
    return PerUserVisibility(
        user_id=minority.copy(),
        prof_recs_to_majority=counts[minority],
        prof_items=items[minority],
        majority_followers=hist.in_from_majority[minority],
        majority_following=hist.out_to_majority[minority],
        z=population.z[minority].copy(),
    )


def pool_per_user(tables: list[PerUserVisibility]) -> PerUserVisibility:
    """Stack per-run tables; each row stays one (user, run) observation."""
    return PerUserVisibility(
        user_id=np.concatenate([t.user_id for t in tables]),
        prof_recs_to_majority=np.concatenate([t.prof_recs_to_majority for t in tables]),
        prof_items=np.concatenate([t.prof_items for t in tables]),
        majority_followers=np.concatenate([t.majority_followers for t in tables]),
        majority_following=np.concatenate([t.majority_following for t in tables]),
        z=np.concatenate([t.z for t in tables], axis=0),
    )


# -- Pearson correlation with Student-t tail ------------------------------------


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        de = d * c
        h *= de
        if abs(de - 1.0) <= eps:
            return h
    raise IntegrityError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) via the continued-fraction expansion."""
    if not (a > 0 and b > 0):
        raise ConfigError("regularized_incomplete_beta: a, b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """P(|T_df| >= |t|) for the Student t distribution."""
    if df < 1:
        raise ConfigError(f"student_t_two_sided_p: df must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def pearson(x, y) -> CorrelationResult:
    """Pearson rho with two-sided t-test p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigError("pearson: x and y must be 1-d arrays of equal length")
    n = len(x)
    if n < 3:
        raise ConfigError(f"pearson: need n >= 3, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    ssx = float(np.sum(xc * xc))
    ssy = float(np.sum(yc * yc))
    if ssx == 0.0 or ssy == 0.0:
        raise UndefinedStatisticError("pearson: zero variance input")
    rho = float(np.dot(xc, yc) / math.sqrt(ssx * ssy))
    rho = max(-1.0, min(1.0, rho))
    df = n - 2
    if abs(rho) == 1.0:
        return CorrelationResult(rho=rho, p_value=0.0, n=n)
    t = rho * math.sqrt(df / (1.0 - rho * rho))
    return CorrelationResult(rho=rho, p_value=student_t_two_sided_p(t, df), n=n)


def visibility_correlations(
    table: PerUserVisibility, response: str = "per_item"
) -> list[tuple[str, "CorrelationResult | None"]]:
    """Pearson tests of each covariate against cross-group professional recs.

    response="per_item" uses the average recommendations per created
    professional item (users without professional items excluded), removing
    the creation-volume confound; "count" uses the raw totals.
    """
    if response == "per_item":
        keep, y = table.per_item_response()
    elif response == "count":
        keep = np.ones(len(table.user_id), dtype=bool)
        y = table.prof_recs_to_majority.astype(np.float64)
    else:
        raise ConfigError(f"visibility_correlations: unknown response {response!r}")
    out: list[tuple[str, CorrelationResult | None]] = []
    for name in PerUserVisibility.COVARIATES:
        try:
            out.append((name, pearson(table.covariate(name)[keep].astype(np.float64), y)))
        except (ConfigError, UndefinedStatisticError):
            out.append((name, None))  # too few rows or degenerate data
    return out


def write_correlations_csv(path, results) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["covariate", "rho", "p_value", "n"])
        for name, r in results:
            if r is None:
                w.writerow([name, "", "", 0])
            else:
                w.writerow([name, repr(r.rho), repr(r.p_value), r.n])


# -- trend fitting ---------------------------------------------------------------


@dataclass(frozen=True)
class OlsLine:
    slope: float
    intercept: float
    n: int


def ols_line(x, y) -> OlsLine | None:
    """Least-squares line, or None when fewer than 2 distinct x values."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2 or len(np.unique(x)) < 2:
        return None
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = float(np.dot(dx, y - ym) / np.dot(dx, dx))
    return OlsLine(slope=slope, intercept=float(ym - slope * xm), n=len(x))


def series_trend(series: TimeSeries) -> OlsLine | None:
    """OLS trend of a series over its defined points."""
    t, v = series.defined_points()
    return ols_line(t.astype(np.float64), v)


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p_two_sided: float
    p_less: float  # one-sided: mean < mu0


def one_sample_t_test(values, mu0: float = 0.0) -> TTestResult:
    v = np.asarray(values, dtype=np.float64)
    n = len(v)
    if n < 2:
        raise ConfigError(f"one_sample_t_test: need n >= 2, got {n}")
    sd = float(np.std(v, ddof=1))
    if sd == 0.0:
        raise UndefinedStatisticError("one_sample_t_test: zero variance")
    t = float((v.mean() - mu0) / (sd / math.sqrt(n)))
    p_two = student_t_two_sided_p(t, n - 1)
    p_less = p_two / 2.0 if t < 0 else 1.0 - p_two / 2.0
    return TTestResult(t=t, df=n - 1, p_two_sided=p_two, p_less=p_less)


# -- recommendations vs incoming edges -------------------------------------------


@dataclass
class RecsVsEdgesTable:
    user_id: np.ndarray
    group: np.ndarray
    topic: np.ndarray
    in_degree: np.ndarray
    mean_recs_per_item: np.ndarray

    def write_csv(self, path, seed=None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            header = ["user_id", "group", "topic", "in_degree", "mean_recs_per_item"]
            if seed is not None:
                header = ["seed"] + header
            w.writerow(header)
            for k in range(len(self.user_id)):
                row = [int(self.user_id[k]), GROUP_NAMES[Group(int(self.group[k]))],
                       TOPIC_NAMES[int(self.topic[k])], int(self.in_degree[k]),
                       repr(float(self.mean_recs_per_item[k]))]
                if seed is not None:
                    row = [seed] + row
                w.writerow(row)


def recs_vs_incoming_edges(
    log: EventLog, population: Population, graph: DirectedGraph
) -> tuple[RecsVsEdgesTable, dict[tuple[str, str], OlsLine | None]]:
    """Per (user, topic) mean recommendations per created item against the
    creator's follower count, with one least-squares line per (group, topic).

    Users appear for a topic only if they created at least one item of it;
    strata with fewer than 2 distinct follower counts carry no line (None).
    """
    n = population.n
    items = np.zeros((n, N_TOPICS))
    np.add.at(items, (log.content_creator, log.content_topic), 1.0)
    recs = np.zeros((n, N_TOPICS))
    np.add.at(recs, (log.rec_creator(), log.rec_topic()), 1.0)
    in_deg = graph.in_degrees()
    uid, topic = np.nonzero(items > 0)
    table = RecsVsEdgesTable(
        user_id=uid,
        group=population.groups[uid],
        topic=topic,
        in_degree=in_deg[uid],
        mean_recs_per_item=recs[uid, topic] / items[uid, topic],
    )
    lines: dict[tuple[str, str], OlsLine | None] = {}
    for g in (Group.MAJORITY, Group.MINORITY):
        for tp in range(N_TOPICS):
            sel = (table.group == g) & (table.topic == tp)
            lines[(GROUP_NAMES[g], TOPIC_NAMES[tp])] = ols_line(
                table.in_degree[sel], table.mean_recs_per_item[sel]
            )
    return table, lines


def write_lines_csv(path, lines: dict[tuple[str, str], OlsLine | None]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["group", "topic", "slope", "intercept", "n_points"])
        for (g, tp), line in sorted(lines.items()):
            if line is None:
                w.writerow([g, tp, "", "", 0])
            else:
                w.writerow([g, tp, repr(line.slope), repr(line.intercept), line.n])


# -- cross-run aggregation ---------------------------------------------------------


def aggregate_series(series_list: list[TimeSeries]) -> TimeSeries:
    """Pointwise mean over runs of per-run series (not pooled counts).

    At each t the mean runs over the runs whose series is defined there; the
    point stays undefined only if no run defines it.
    """
    if not series_list:
        raise ConfigError("aggregate_series: empty input")
    t0 = series_list[0].t
    for s in series_list[1:]:
        if not np.array_equal(s.t, t0):
            raise ConfigError("aggregate_series: series have different step grids")
    vals = np.stack([np.where(s.defined, s.v, 0.0) for s in series_list])
    cnt = np.stack([s.defined for s in series_list]).sum(axis=0)
    defined = cnt > 0
    out = np.full(len(t0), np.nan)
    out[defined] = vals.sum(axis=0)[defined] / cnt[defined]
    return TimeSeries(t0.copy(), out, defined)


def pooled_topic_shares(rows_per_run: list[list[TopicShare]]) -> list[TopicShare]:
    """Combine per-run topic shares by pooling the underlying counts."""
    if not rows_per_run:
        raise ConfigError("pooled_topic_shares: empty input")
    out = []
    for i, first in enumerate(rows_per_run[0]):
        rc = sum(rr[i].rec_count for rr in rows_per_run)
        rnum = sum(
            rr[i].rec_share_minority * rr[i].rec_count
            for rr in rows_per_run if rr[i].rec_share_minority is not None
        )
        cc = sum(rr[i].creation_count for rr in rows_per_run)
        cnum = sum(
            rr[i].creation_share_minority * rr[i].creation_count
            for rr in rows_per_run if rr[i].creation_share_minority is not None
        )
        out.append(TopicShare(
            topic=first.topic,
            receiver=first.receiver,
            rec_share_minority=rnum / rc if rc else None,
            rec_count=rc,
            creation_share_minority=cnum / cc if cc else None,
            creation_count=cc,
        ))
    return out
