"""Fixed directed follow graphs: complete, uniform random, and group-blocked.

Graphs are generated once and never mutated afterwards. A graph is stored as a
flat edge table sorted by (src, dst) plus CSR-style pointers for both
directions, which makes neighborhood queries and per-creator follower scans
cheap inside the simulation loop.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, UndefinedStatisticError
from .population import GROUP_NAMES, Group, Population


@dataclass(frozen=True)
class RandomGraphParams:
    p_edge: float = 0.5

    def validate(self) -> None:
        if not (0.0 <= self.p_edge <= 1.0):
            raise ConfigError(f"graph.p_edge: must be in [0, 1], got {self.p_edge}")


@dataclass(frozen=True)
class SbmParams:
    """Directed block-model edge probabilities keyed by (src group, dst group)."""

    p_maj_maj: float = 0.4
    p_min_min: float = 0.5
    p_maj_min: float = 0.1
    p_min_maj: float = 0.1

    def validate(self) -> None:
        for name in ("p_maj_maj", "p_min_min", "p_maj_min", "p_min_maj"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"graph.{name}: must be in [0, 1], got {v}")

    def matrix(self) -> np.ndarray:
        """2x2 probability lookup indexed by (Group(src), Group(dst))."""
        return np.array(
            [
                [self.p_maj_maj, self.p_maj_min],
                [self.p_min_maj, self.p_min_min],
            ]
        )


@dataclass
class DirectedGraph:
    """Immutable directed graph over nodes 0..n-1, edge = follow relation.

    edge_src/edge_dst are sorted lexicographically by (src, dst). out_ptr slices
    that table per source node. in_order holds, for each dst-grouped position,
    the index into the edge table; in_src the corresponding follower ids
    (ascending within each dst block); in_ptr slices per destination node.
    """

    n: int
    edge_src: np.ndarray
    edge_dst: np.ndarray
    out_ptr: np.ndarray = field(init=False)
    in_ptr: np.ndarray = field(init=False)
    in_src: np.ndarray = field(init=False)
    in_order: np.ndarray = field(init=False)

    def __post_init__(self):
        src, dst = self.edge_src, self.edge_dst
        self.out_ptr = np.searchsorted(src, np.arange(self.n + 1)).astype(np.int64)
        order = np.argsort(dst, kind="stable").astype(np.int64)
        self.in_order = order
        self.in_src = src[order]
        self.in_ptr = np.searchsorted(dst[order], np.arange(self.n + 1)).astype(np.int64)
        for arr in (self.edge_src, self.edge_dst, self.out_ptr, self.in_ptr,
                    self.in_src, self.in_order):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, src: np.ndarray, dst: np.ndarray) -> "DirectedGraph":
        src = np.asarray(src, dtype=np.int32)
        dst = np.asarray(dst, dtype=np.int32)
        if src.size:
            if src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n:
                raise ConfigError("graph edges reference node ids outside 0..n-1")
            if np.any(src == dst):
                raise ConfigError("graph contains self-loops")
            order = np.lexsort((dst, src))
            src, dst = src[order], dst[order]
            same = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if np.any(same):
                raise ConfigError("graph contains duplicate edges")
        return cls(n=n, edge_src=src, edge_dst=dst)

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "DirectedGraph":
        src, dst = np.nonzero(adj)
        return cls(n=adj.shape[0], edge_src=src.astype(np.int32), edge_dst=dst.astype(np.int32))

    @property
    def num_edges(self) -> int:
        return len(self.edge_src)

    def out_neighbors(self, i: int) -> np.ndarray:
        return self.edge_dst[self.out_ptr[i]:self.out_ptr[i + 1]]

    def in_neighbors(self, j: int) -> np.ndarray:
        return self.in_src[self.in_ptr[j]:self.in_ptr[j + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def edge_index(self, i: int, j: int) -> int:
        """Index of edge (i, j) in the edge table, or -1 if absent."""
        lo, hi = self.out_ptr[i], self.out_ptr[i + 1]
        pos = lo + np.searchsorted(self.edge_dst[lo:hi], j)
        if pos < hi and self.edge_dst[pos] == j:
            return int(pos)
        return -1

    def has_edge(self, i: int, j: int) -> bool:
        return self.edge_index(i, j) >= 0

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        adj[self.edge_src, self.edge_dst] = True
        return adj

    def validate(self) -> None:
        """Full-scan consistency check: sortedness, no self-loops/dups, in/out agreement."""
        src, dst = self.edge_src, self.edge_dst
        assert len(src) == len(dst)
        if len(src) == 0:
            return
        assert src.min() >= 0 and src.max() < self.n
        assert dst.min() >= 0 and dst.max() < self.n
        assert not np.any(src == dst), "self-loop found"
        key = src.astype(np.int64) * self.n + dst
        assert np.all(np.diff(key) > 0), "edge table not sorted/unique"
        # in/out agreement: the dst-grouped view must contain exactly the same edges
        assert np.array_equal(np.sort(key), np.sort(
            self.in_src.astype(np.int64) * self.n
            + np.repeat(np.arange(self.n), np.diff(self.in_ptr))
        ))
        for j in range(self.n):
            nb = self.in_neighbors(j)
            assert np.all(np.diff(nb) > 0), f"in-neighbors of {j} not sorted"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["src", "dst"])
            w.writerows(zip(self.edge_src.tolist(), self.edge_dst.tolist()))

    @classmethod
    def read_csv(cls, path, n: int) -> "DirectedGraph":
        with open(path, newline="", encoding="utf-8") as f:
            r = csv.reader(f)
            header = next(r)
            if header != ["src", "dst"]:
                raise ConfigError(f"graph csv: bad header {header!r}")
            rows = [(int(a), int(b)) for a, b in r]
        if rows:
            src, dst = (np.array(c, dtype=np.int32) for c in zip(*rows))
        else:
            src = dst = np.empty(0, dtype=np.int32)
        return cls.from_edges(n, src, dst)


def complete_graph(n: int) -> DirectedGraph:
    """Every ordered pair (i, j), i != j, is an edge."""
    if n < 2:
        raise ConfigError(f"complete_graph: n must be >= 2, got {n}")
    adj = np.ones((n, n), dtype=bool)
    np.fill_diagonal(adj, False)
    return DirectedGraph.from_adjacency(adj)


def random_graph(n: int, params: RandomGraphParams, rng: np.random.Generator) -> DirectedGraph:
    """Each ordered pair becomes an edge independently with probability p_edge."""
    if n < 2:
        raise ConfigError(f"random_graph: n must be >= 2, got {n}")
    params.validate()
    adj = rng.random((n, n)) < params.p_edge
    np.fill_diagonal(adj, False)
    return DirectedGraph.from_adjacency(adj)


def sbm_graph(population: Population, params: SbmParams, rng: np.random.Generator) -> DirectedGraph:
    """Edge probability depends only on the (src group, dst group) pair.

    Consumes the same n*n uniform draws as random_graph, so with all four
    probabilities equal the two generators produce identical graphs for the
    same generator state.
    """
    n = population.n
    if n < 2:
        raise ConfigError(f"sbm_graph: population must have >= 2 users, got {n}")
    params.validate()
    lut = params.matrix()
    groups = population.groups.astype(np.int64)
    prob = lut[groups[:, None], groups[None, :]]
    adj = rng.random((n, n)) < prob
    np.fill_diagonal(adj, False)
    return DirectedGraph.from_adjacency(adj)


@dataclass(frozen=True)
class CompositionStats:
    """Mean neighbor-group shares per (user group, direction).

    shares maps (group_name, direction) -> (share_majority, share_minority),
    averaged over the group's users; users with no neighbors in the given
    direction are excluded from the mean. counted maps the same key to the
    number of users that entered the mean.
    """

    shares: dict[tuple[str, str], tuple[float, float]]
    counted: dict[tuple[str, str], int]

    def share(self, group: Group, direction: str, neighbor_group: Group) -> float:
        pair = self.shares[(GROUP_NAMES[group], direction)]
        return pair[0] if neighbor_group == Group.MAJORITY else pair[1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["group", "direction", "share_majority", "share_minority"])
            for (g, d), (sm, sn) in sorted(self.shares.items()):
                w.writerow([g, d, repr(sm), repr(sn)])


@dataclass(frozen=True)
class EdgeHistogram:
    """Per-user counts of out-edges and in-edges split by neighbor group."""

    user_id: np.ndarray
    out_to_majority: np.ndarray
    out_to_minority: np.ndarray
    in_from_majority: np.ndarray
    in_from_minority: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["user_id", "out_to_majority", "out_to_minority",
                        "in_from_majority", "in_from_minority"])
            w.writerows(zip(self.user_id.tolist(), self.out_to_majority.tolist(),
                            self.out_to_minority.tolist(), self.in_from_majority.tolist(),
                            self.in_from_minority.tolist()))


def edge_histogram(graph: DirectedGraph, population: Population) -> EdgeHistogram:
    if graph.n != population.n:
        raise ConfigError(
            f"edge_histogram: graph.n ({graph.n}) != population size ({population.n})"
        )
    n = graph.n
    dst_minor = (population.groups[graph.edge_dst] == Group.MINORITY).astype(np.float64)
    src_minor = (population.groups[graph.edge_src] == Group.MINORITY).astype(np.float64)
    out_min = np.bincount(graph.edge_src, weights=dst_minor, minlength=n)
    out_tot = np.bincount(graph.edge_src, minlength=n)
    in_min = np.bincount(graph.edge_dst, weights=src_minor, minlength=n)
    in_tot = np.bincount(graph.edge_dst, minlength=n)
    return EdgeHistogram(
        user_id=np.arange(n),
        out_to_majority=(out_tot - out_min).astype(np.int64),
        out_to_minority=out_min.astype(np.int64),
        in_from_majority=(in_tot - in_min).astype(np.int64),
        in_from_minority=in_min.astype(np.int64),
    )


def follower_composition(graph: DirectedGraph, population: Population) -> CompositionStats:
    """Mean neighbor-group fractions per user group, for both directions.

    "in" aggregates follower sets (in-neighbors), "out" the followed accounts.
    """
    hist = edge_histogram(graph, population)
    shares: dict[tuple[str, str], tuple[float, float]] = {}
    counted: dict[tuple[str, str], int] = {}
    for group in (Group.MAJORITY, Group.MINORITY):
        members = population.group_ids(group)
        if len(members) == 0:
            raise UndefinedStatisticError(f"no users in group {GROUP_NAMES[group]}")
        for direction, minor, major in (
            ("in", hist.in_from_minority, hist.in_from_majority),
            ("out", hist.out_to_minority, hist.out_to_majority),
        ):
            tot = (minor + major)[members]
            has = tot > 0
            if not np.any(has):
                raise UndefinedStatisticError(
                    f"all {GROUP_NAMES[group]} users have zero {direction}-neighbors"
                )
            frac_min = minor[members][has] / tot[has]
            shares[(GROUP_NAMES[group], direction)] = (
                float(np.mean(1.0 - frac_min)),
                float(np.mean(frac_min)),
            )
            counted[(GROUP_NAMES[group], direction)] = int(np.sum(has))
    return CompositionStats(shares=shares, counted=counted)


def in_group_edge_share(graph: DirectedGraph, population: Population) -> float:
    """Fraction of all edges whose endpoints share a group."""
    if graph.num_edges == 0:
        raise UndefinedStatisticError("graph has no edges")
    same = population.groups[graph.edge_src] == population.groups[graph.edge_dst]
    return float(np.mean(same))
