"""Recommendation scoring: random, topic-match, and the tie-strength policy.

The tie-strength model estimates the interaction probability between a viewer
and a creator they follow as a logistic function of four per-edge features:
common followed accounts, common followers, Euclidean distance between raw
preference vectors, and an exponentially smoothed interaction history. All
four features are z-scored across the full edge set (population standard
deviation) before entering the logistic; a feature with zero spread
contributes zero.

Only the smoothed interaction count changes over time, so its mean/variance
are maintained incrementally (O(updates) per step) and the three static
features are folded into a cached per-edge logit once at construction. A full
O(E) recompute path exists behind ``mode="recompute"`` for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .errors import ConfigError, IntegrityError
from .netgen import DirectedGraph
from .population import Population

POLICY_KINDS = ("random", "topic_match", "real_graph")

FEATURE_NAMES = ("out_edge_count", "in_edge_count", "dist", "int_count")


@dataclass(frozen=True)
class TieStrengthParams:
    """Logistic coefficients for (common out-edges, common in-edges,
    preference distance, interaction count)."""

    beta: tuple[float, float, float, float] = (1.0, 1.0, -1.0, 5.0)

    def validate(self) -> None:
        if len(self.beta) != 4:
            raise ConfigError(f"policy.beta: expected 4 entries, got {len(self.beta)}")
        if not all(np.isfinite(self.beta)):
            raise ConfigError("policy.beta: entries must be finite")


@dataclass(frozen=True)
class EmaParams:
    alpha: float = 0.01

    def validate(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"policy.alpha: must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class StandardizationStats:
    """Per-feature mean and population standard deviation over all edges."""

    mean: np.ndarray  # (4,)
    std: np.ndarray  # (4,)


def logistic(x):
    """Numerically stable sigmoid, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def tie_strength(features: np.ndarray, params: TieStrengthParams) -> float:
    """Interaction probability for one standardized 4-feature vector."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape != (4,):
        raise IntegrityError(f"tie_strength: expected 4 features, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise IntegrityError("tie_strength: non-finite feature")
    return float(logistic(float(np.dot(params.beta, f))))


class EdgeFeatureTable:
    """Per-follow-edge features, aligned with the graph's (src, dst) edge table.

    The static columns never change after construction; int_count starts at 0
    and is updated through update_interaction_counts only. The running sum and
    sum of squares of int_count are kept so its mean/std are O(1) to read.
    """

    def __init__(self, graph: DirectedGraph, out_edge_count: np.ndarray,
                 in_edge_count: np.ndarray, dist: np.ndarray, mode: str = "incremental"):
        if mode not in ("incremental", "recompute"):
            raise ConfigError(f"EdgeFeatureTable mode must be incremental|recompute, got {mode}")
        self.graph = graph
        self.out_edge_count = out_edge_count
        self.in_edge_count = in_edge_count
        self.dist = dist
        for arr in (self.out_edge_count, self.in_edge_count, self.dist):
            arr.setflags(write=False)
        self.int_count = np.zeros(graph.num_edges, dtype=np.float64)
        self.mode = mode
        self._int_sum = 0.0
        self._int_sumsq = 0.0

    @property
    def num_edges(self) -> int:
        return self.graph.num_edges

    def int_count_moments(self) -> tuple[float, float]:
        """Current (mean, population std) of the int_count column."""
        e = self.num_edges
        if e == 0:
            raise ConfigError("edge feature table has no edges")
        if self.mode == "recompute":
            mean = float(np.mean(self.int_count))
            std = float(np.std(self.int_count))
            return mean, std
        mean = self._int_sum / e
        var = self._int_sumsq / e - mean * mean
        return mean, sqrt(var) if var > 0.0 else 0.0

    def update_interaction_counts(self, edge_idx: np.ndarray, int_numb: np.ndarray,
                                  params: EmaParams) -> None:
        """Apply one step of exponential smoothing to the recommended edges.

        int_numb[k] is the number of interactions observed on edge edge_idx[k]
        this step (0 or 1: at most one recommendation per viewer per step).
        Edges that received no recommendation keep their value.
        """
        edge_idx = np.asarray(edge_idx)
        if edge_idx.size == 0:
            return
        if edge_idx.min() < 0 or edge_idx.max() >= self.num_edges:
            raise IntegrityError("update_interaction_counts: event on non-existent edge")
        if len(np.unique(edge_idx)) != len(edge_idx):
            raise IntegrityError("update_interaction_counts: duplicate edge in one step")
        a = params.alpha
        old = self.int_count[edge_idx]
        new = a * np.asarray(int_numb, dtype=np.float64) + (1.0 - a) * old
        self.int_count[edge_idx] = new
        self._int_sum += float(np.sum(new - old))
        self._int_sumsq += float(np.sum(new * new - old * old))

    def verify_incremental(self) -> tuple[float, float]:
        """Absolute (mean, std) gap between incremental and recomputed moments."""
        e = self.num_edges
        mean_inc = self._int_sum / e
        var = self._int_sumsq / e - mean_inc * mean_inc
        std_inc = sqrt(var) if var > 0.0 else 0.0
        return (abs(mean_inc - float(np.mean(self.int_count))),
                abs(std_inc - float(np.std(self.int_count))))

    def feature_matrix(self) -> np.ndarray:
        return np.column_stack(
            [self.out_edge_count, self.in_edge_count, self.dist, self.int_count]
        )


def compute_static_features(graph: DirectedGraph, population: Population,
                            mode: str = "incremental") -> EdgeFeatureTable:
    """Fill the static per-edge features; int_count starts at zero.

    For an edge (i, j): the number of accounts both i and j follow, the number
    of users following both, and the Euclidean distance between their raw
    preference vectors. Common-neighbor counts come from boolean adjacency
    products, which is exact and far faster than per-edge set intersections.
    """
    if graph.n != population.n:
        raise ConfigError(
            f"compute_static_features: graph.n ({graph.n}) != population size ({population.n})"
        )
    if graph.num_edges == 0:
        raise ConfigError("compute_static_features: graph has no edges")
    adj = graph.adjacency().astype(np.float32)
    common_out = adj @ adj.T  # [i, j] = |out(i) & out(j)|
    common_in = adj.T @ adj  # [i, j] = |in(i) & in(j)|
    src, dst = graph.edge_src, graph.edge_dst
    out_edge_count = common_out[src, dst].astype(np.float64)
    in_edge_count = common_in[src, dst].astype(np.float64)
    dist = np.linalg.norm(population.z[src] - population.z[dst], axis=1)
    return EdgeFeatureTable(graph, out_edge_count, in_edge_count, dist, mode=mode)


def standardize(table: EdgeFeatureTable) -> tuple[StandardizationStats, np.ndarray]:
    """Z-score all four feature columns across the full edge set.

    Uses the population standard deviation; a column with zero spread maps to
    all zeros. This is the O(E) reference path for the cached/incremental
    standardization used during simulation.
    """
    if table.num_edges == 0:
        raise ConfigError("standardize: no edges")
    raw = table.feature_matrix()
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    out = np.zeros_like(raw)
    nz = std > 0.0
    out[:, nz] = (raw[:, nz] - mean[nz]) / std[nz]
    return StandardizationStats(mean=mean, std=std), out


# How the evolving interaction count enters the logistic:
#   fit_at_start   scaler frozen on the t=0 table, where the column is all
#                  zeros (zero variance -> unit scale, zero shift), so the raw
#                  smoothed count passes through
#   zscore_current (x - mean_t) / std_t with the current moments; a zero-spread
#                  column contributes 0
#   scale_current  x / std_t, no centering (sparse-style scaling)
INT_COUNT_SCALINGS = ("fit_at_start", "zscore_current", "scale_current")


class TieStrengthModel:
    """Tie strengths over a feature table for fixed logistic coefficients.

    The three static features are z-scored against their (constant) moments and
    folded into one cached per-edge logit at construction; per query only the
    interaction-count term is rescaled per int_count_scaling.
    """

    def __init__(self, table: EdgeFeatureTable, params: TieStrengthParams,
                 int_count_scaling: str = "scale_current"):
        params.validate()
        if int_count_scaling not in INT_COUNT_SCALINGS:
            raise ConfigError(
                f"int_count_scaling must be one of {INT_COUNT_SCALINGS}, "
                f"got {int_count_scaling!r}"
            )
        self.table = table
        self.params = params
        self.int_count_scaling = int_count_scaling
        b1, b2, b3, _ = params.beta
        logit = np.zeros(table.num_edges, dtype=np.float64)
        for b, col in ((b1, table.out_edge_count), (b2, table.in_edge_count),
                       (b3, table.dist)):
            m, s = float(np.mean(col)), float(np.std(col))
            if s > 0.0:
                logit += b * (col - m) / s
        self.static_logit = logit
        self.static_logit.setflags(write=False)

    def logits(self, edge_idx: np.ndarray | None = None) -> np.ndarray:
        b4 = self.params.beta[3]
        ic = self.table.int_count if edge_idx is None else self.table.int_count[edge_idx]
        sl = self.static_logit if edge_idx is None else self.static_logit[edge_idx]
        if self.int_count_scaling == "fit_at_start":
            return sl + b4 * ic
        mean, std = self.table.int_count_moments()
        if std == 0.0:
            return sl.copy() if edge_idx is None else sl
        if self.int_count_scaling == "zscore_current":
            return sl + b4 * (ic - mean) / std
        return sl + b4 * ic / std

    def strengths(self, edge_idx: np.ndarray | None = None) -> np.ndarray:
        """Current tie strength p for the given edges (all edges if None)."""
        return logistic(self.logits(edge_idx))


@dataclass
class ScoringContext:
    """Read-only state score_candidates needs: who follows whom, normalized
    preferences, and the current tie-strength model."""

    graph: DirectedGraph
    norm_prefs: np.ndarray  # (n, 3) clamp-normalized preferences
    tie_model: TieStrengthModel | None = None

    def edge_for(self, viewer: int, creator: int) -> int:
        idx = self.graph.edge_index(viewer, creator)
        if idx < 0:
            raise IntegrityError(
                f"candidate from creator {creator} not followed by viewer {viewer}"
            )
        return idx


def score_candidates(policy: str, viewer: int, candidates, ctx: ScoringContext) -> np.ndarray:
    """Normalized sampling weights over the candidate list.

    random: uniform. topic_match: the viewer's clamp-normalized preference for
    each item's topic. real_graph: the average of the topic-match score and the
    viewer-creator tie strength, renormalized. Returns an empty array for an
    empty candidate list (the engine then serves nothing).
    """
    if policy not in POLICY_KINDS:
        raise ConfigError(f"unknown policy {policy!r}")
    if len(candidates) == 0:
        return np.empty(0, dtype=np.float64)
    edge_idx = np.array([ctx.edge_for(viewer, c.creator_id) for c in candidates])
    topics = np.array([int(c.topic) for c in candidates])
    if policy == "random":
        raw = np.ones(len(candidates), dtype=np.float64)
    elif policy == "topic_match":
        raw = ctx.norm_prefs[viewer, topics]
    else:
        if ctx.tie_model is None:
            raise IntegrityError("real_graph scoring requires a tie-strength model")
        raw = 0.5 * (ctx.norm_prefs[viewer, topics] + ctx.tie_model.strengths(edge_idx))
    total = raw.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise IntegrityError("candidate scores are non-finite or all zero")
    return raw / total
