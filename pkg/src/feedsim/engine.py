"""Simulation loop: create content, serve one recommendation per requesting
user, sample interactions, update interaction histories.

Each step runs four phases in order:

1. creation: every user independently posts one item with probability
   p_create; its topic is drawn from the creator's clamp-normalized
   preferences.
2. recommendation: every user independently requests with probability
   p_request; the candidate pool is the content created *this step* by
   accounts the user follows, and exactly one item is sampled from the
   policy's normalized scores (nothing is served if the pool is empty).
3. interaction: the viewer interacts with the served item with probability
   equal to their normalized preference for its topic.
4. update: smoothed interaction counts are updated on the served edges and the
   standardization moments refreshed.

Randomness is split into independent named streams per phase (plus population
and graph streams), so the realized content stream is identical across
policies for a fixed seed. Users are processed in ascending id order within
each phase; the same (config, seed) pair reproduces the event log bit for bit.

The default step implementation is vectorized over candidate edges; a
``reference=True`` implementation loops user by user through
score_candidates/sample_categorical on the same random streams and is used in
tests to pin the fast path down.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IntegrityError
from .netgen import DirectedGraph
from .policy import (
    EdgeFeatureTable,
    EmaParams,
    ScoringContext,
    TieStrengthModel,
    TieStrengthParams,
    compute_static_features,
    score_candidates,
)
from .population import N_TOPICS, TOPIC_NAMES, Population, Topic, normalized_preferences

PAIR_CLASSES = ("in_group", "cross_group")

# Fixed spawn indices of the named substreams under the run seed.
_STREAMS = ("population", "graph", "creation", "request", "scoring", "interaction")


@dataclass(frozen=True)
class EngineConfig:
    p_create: float = 0.2
    p_request: float = 0.8
    steps: int = 10000

    def validate(self) -> None:
        if not (0.0 <= self.p_create <= 1.0):
            raise ConfigError(f"engine.p_create: must be in [0, 1], got {self.p_create}")
        if not (0.0 <= self.p_request <= 1.0):
            raise ConfigError(f"engine.p_request: must be in [0, 1], got {self.p_request}")
        if self.steps < 0:
            raise ConfigError(f"engine.steps: must be >= 0, got {self.steps}")


@dataclass(frozen=True)
class ContentItem:
    content_id: int
    creator_id: int
    topic: Topic
    created_at: int


@dataclass(frozen=True)
class RecommendationEvent:
    step: int
    viewer_id: int
    content_id: int
    interacted: bool


class RngStreams:
    """Named per-phase generators spawned from one run seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        children = np.random.SeedSequence(self.seed).spawn(len(_STREAMS))
        for name, child in zip(_STREAMS, children):
            setattr(self, name, np.random.Generator(np.random.PCG64(child)))


@dataclass
class EventLog:
    """Append-only record of one run: content, recommendations, tie summaries.

    Content ids equal the row index into the content arrays. tie_* arrays are
    indexed [step, pair_class, topic] and summarize the edges served at each
    step with the pre-update interaction count and the tie strength used for
    scoring that step.
    """

    steps: int
    content_step: np.ndarray
    content_creator: np.ndarray
    content_topic: np.ndarray
    rec_step: np.ndarray
    rec_viewer: np.ndarray
    rec_content: np.ndarray
    rec_interacted: np.ndarray
    tie_count: np.ndarray
    tie_int_sum: np.ndarray
    tie_strength_sum: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_content(self) -> int:
        return len(self.content_step)

    @property
    def n_recs(self) -> int:
        return len(self.rec_step)

    def rec_creator(self) -> np.ndarray:
        return self.content_creator[self.rec_content]

    def rec_topic(self) -> np.ndarray:
        return self.content_topic[self.rec_content]

    def content_items(self) -> list[ContentItem]:
        return [
            ContentItem(i, int(self.content_creator[i]), Topic(int(self.content_topic[i])),
                        int(self.content_step[i]))
            for i in range(self.n_content)
        ]

    def rec_events(self) -> list[RecommendationEvent]:
        return [
            RecommendationEvent(int(self.rec_step[k]), int(self.rec_viewer[k]),
                                int(self.rec_content[k]), bool(self.rec_interacted[k]))
            for k in range(self.n_recs)
        ]

    def write_csv_dir(self, outdir) -> None:
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "content.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["step", "content_id", "creator_id", "topic"])
            w.writerows(zip(self.content_step.tolist(), range(self.n_content),
                            self.content_creator.tolist(),
                            (TOPIC_NAMES[t] for t in self.content_topic.tolist())))
        with open(outdir / "recs.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["step", "viewer_id", "content_id", "interacted"])
            w.writerows(zip(self.rec_step.tolist(), self.rec_viewer.tolist(),
                            self.rec_content.tolist(),
                            (int(v) for v in self.rec_interacted.tolist())))
        with open(outdir / "tie_summary_by_topic.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t", "pair_class", "topic", "count", "sum_int_count",
                        "sum_tie_strength"])
            for t in range(self.steps):
                for pc in range(2):
                    for topic in range(N_TOPICS):
                        c = int(self.tie_count[t, pc, topic])
                        if c == 0:
                            continue
                        w.writerow([t, PAIR_CLASSES[pc], TOPIC_NAMES[topic], c,
                                    repr(float(self.tie_int_sum[t, pc, topic])),
                                    repr(float(self.tie_strength_sum[t, pc, topic]))])
        with open(outdir / "tie_summary.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t", "pair_class", "mean_int_count", "mean_tie_strength"])
            for t in range(self.steps):
                for pc in range(2):
                    c = int(self.tie_count[t, pc].sum())
                    if c == 0:
                        w.writerow([t, PAIR_CLASSES[pc], "", ""])
                    else:
                        w.writerow([t, PAIR_CLASSES[pc],
                                    repr(float(self.tie_int_sum[t, pc].sum() / c)),
                                    repr(float(self.tie_strength_sum[t, pc].sum() / c))])
        with open(outdir / "meta.json", "w", encoding="utf-8") as f:
            json.dump(self.meta | {"steps": self.steps}, f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def read_csv_dir(cls, outdir) -> "EventLog":
        with open(outdir / "meta.json", encoding="utf-8") as f:
            meta = json.load(f)
        steps = meta.pop("steps")
        topic_ids = {name: i for i, name in enumerate(TOPIC_NAMES)}
        pc_ids = {name: i for i, name in enumerate(PAIR_CLASSES)}
        cstep, ccreator, ctopic = [], [], []
        with open(outdir / "content.csv", newline="", encoding="utf-8") as f:
            r = csv.reader(f)
            next(r)
            for row in r:
                cstep.append(int(row[0]))
                ccreator.append(int(row[2]))
                ctopic.append(topic_ids[row[3]])
        rstep, rviewer, rcontent, rint = [], [], [], []
        with open(outdir / "recs.csv", newline="", encoding="utf-8") as f:
            r = csv.reader(f)
            next(r)
            for row in r:
                rstep.append(int(row[0]))
                rviewer.append(int(row[1]))
                rcontent.append(int(row[2]))
                rint.append(bool(int(row[3])))
        tie_count = np.zeros((steps, 2, N_TOPICS), dtype=np.int64)
        tie_int = np.zeros((steps, 2, N_TOPICS), dtype=np.float64)
        tie_str = np.zeros((steps, 2, N_TOPICS), dtype=np.float64)
        with open(outdir / "tie_summary_by_topic.csv", newline="", encoding="utf-8") as f:
            r = csv.reader(f)
            next(r)
            for row in r:
                t, pc, topic = int(row[0]), pc_ids[row[1]], topic_ids[row[2]]
                tie_count[t, pc, topic] = int(row[3])
                tie_int[t, pc, topic] = float(row[4])
                tie_str[t, pc, topic] = float(row[5])
        return cls(
            steps=steps,
            content_step=np.array(cstep, dtype=np.int32),
            content_creator=np.array(ccreator, dtype=np.int32),
            content_topic=np.array(ctopic, dtype=np.int8),
            rec_step=np.array(rstep, dtype=np.int32),
            rec_viewer=np.array(rviewer, dtype=np.int32),
            rec_content=np.array(rcontent, dtype=np.int32),
            rec_interacted=np.array(rint, dtype=bool),
            tie_count=tie_count,
            tie_int_sum=tie_int,
            tie_strength_sum=tie_str,
            meta=meta,
        )

    def equals(self, other: "EventLog") -> bool:
        return (
            self.steps == other.steps
            and np.array_equal(self.content_step, other.content_step)
            and np.array_equal(self.content_creator, other.content_creator)
            and np.array_equal(self.content_topic, other.content_topic)
            and np.array_equal(self.rec_step, other.rec_step)
            and np.array_equal(self.rec_viewer, other.rec_viewer)
            and np.array_equal(self.rec_content, other.rec_content)
            and np.array_equal(self.rec_interacted, other.rec_interacted)
            and np.array_equal(self.tie_count, other.tie_count)
            and np.array_equal(self.tie_int_sum, other.tie_int_sum)
            and np.array_equal(self.tie_strength_sum, other.tie_strength_sum)
        )


def sample_categorical(weights, rng: np.random.Generator) -> int:
    """Draw one index from a non-negative weight vector via inverse CDF."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise IntegrityError("sample_categorical: weights must be a non-empty 1-d vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0.0):
        raise IntegrityError("sample_categorical: weights must be finite and non-negative")
    total = w.sum()
    if total <= 0.0:
        raise IntegrityError("sample_categorical: all-zero weights")
    cum = np.cumsum(w)
    idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
    return min(idx, w.size - 1)


class Simulation:
    """One seeded run over a fixed population, graph, and policy."""

    def __init__(self, population: Population, graph: DirectedGraph, policy: str,
                 tie_params: TieStrengthParams, ema_params: EmaParams,
                 engine_config: EngineConfig, streams: RngStreams, *,
                 int_count_scaling: str = "scale_current",
                 standardization_mode: str = "incremental",
                 standardization_check_every: int = 0,
                 reference: bool = False):
        engine_config.validate()
        tie_params.validate()
        ema_params.validate()
        if graph.n != population.n:
            raise ConfigError(f"graph.n ({graph.n}) != population size ({population.n})")
        self.population = population
        self.graph = graph
        self.policy = policy
        self.tie_params = tie_params
        self.ema_params = ema_params
        self.config = engine_config
        self.streams = streams
        self.reference = reference
        self.check_every = standardization_check_every

        self.n = population.n
        self.norm_prefs = population.normalized_z()
        self.pref_cum = np.cumsum(self.norm_prefs, axis=1)[:, :2].copy()
        self.features = compute_static_features(graph, population, mode=standardization_mode)
        self.tie_model = TieStrengthModel(self.features, tie_params,
                                          int_count_scaling=int_count_scaling)
        self.ctx = ScoringContext(graph=graph, norm_prefs=self.norm_prefs,
                                  tie_model=self.tie_model)
        self.same_group_edge = (
            population.groups[graph.edge_src] == population.groups[graph.edge_dst]
        )

        # per-step scratch, reset in _phase_create
        self._topic_by_creator = np.full(self.n, -1, dtype=np.int8)
        self._content_by_creator = np.full(self.n, -1, dtype=np.int64)

        self._content_step: list[np.ndarray] = []
        self._content_creator: list[np.ndarray] = []
        self._content_topic: list[np.ndarray] = []
        self._rec_step: list[np.ndarray] = []
        self._rec_viewer: list[np.ndarray] = []
        self._rec_content: list[np.ndarray] = []
        self._rec_interacted: list[np.ndarray] = []
        T = engine_config.steps
        self._tie_count = np.zeros((T, 2, N_TOPICS), dtype=np.int64)
        self._tie_int_sum = np.zeros((T, 2, N_TOPICS), dtype=np.float64)
        self._tie_strength_sum = np.zeros((T, 2, N_TOPICS), dtype=np.float64)
        self._next_content_id = 0
        self._std_check_max = 0.0

    # -- phases ---------------------------------------------------------

    def _phase_create(self, t: int) -> np.ndarray:
        u = self.streams.creation.random(self.n)
        creators = np.flatnonzero(u < self.config.p_create).astype(np.int32)
        self._topic_by_creator.fill(-1)
        k = len(creators)
        if k:
            tu = self.streams.creation.random(k)
            cum = self.pref_cum[creators]
            topics = ((tu[:, None] >= cum).sum(axis=1)).astype(np.int8)
            ids = np.arange(self._next_content_id, self._next_content_id + k, dtype=np.int64)
            self._next_content_id += k
            self._topic_by_creator[creators] = topics
            self._content_by_creator[creators] = ids
            self._content_step.append(np.full(k, t, dtype=np.int32))
            self._content_creator.append(creators.copy())
            self._content_topic.append(topics)
        return creators

    def _phase_request(self) -> np.ndarray:
        u = self.streams.request.random(self.n)
        return u < self.config.p_request

    def _candidate_pairs(self, creators: np.ndarray, requested: np.ndarray):
        """All (viewer, edge, creator) candidate triples: viewer requesting,
        edge target a user who created this step. Sorted by viewer; within a
        viewer, creators ascend (creator-major construction + stable sort)."""
        g = self.graph
        parts_v = [g.in_src[g.in_ptr[c]:g.in_ptr[c + 1]] for c in creators]
        parts_e = [g.in_order[g.in_ptr[c]:g.in_ptr[c + 1]] for c in creators]
        cand_viewer = np.concatenate(parts_v)
        cand_edge = np.concatenate(parts_e)
        keep = requested[cand_viewer]
        cand_viewer, cand_edge = cand_viewer[keep], cand_edge[keep]
        # radix path: numpy's stable sort is radix only for <= 16-bit keys
        if self.n <= np.iinfo(np.uint16).max:
            order = cand_viewer.astype(np.uint16).argsort(kind="stable")
        else:
            order = cand_viewer.argsort(kind="stable")
        cand_viewer, cand_edge = cand_viewer[order], cand_edge[order]
        return cand_viewer, cand_edge, g.edge_dst[cand_edge]

    def _pair_scores(self, cand_viewer: np.ndarray, cand_edge: np.ndarray,
                     cand_topic: np.ndarray) -> np.ndarray:
        if self.policy == "random":
            return np.ones(len(cand_viewer), dtype=np.float64)
        topic_score = self.norm_prefs[cand_viewer, cand_topic]
        if self.policy == "topic_match":
            return topic_score
        return 0.5 * (topic_score + self.tie_model.strengths(cand_edge))

    def _step_fast(self, t: int) -> None:
        creators = self._phase_create(t)
        requested = self._phase_request()
        if len(creators) == 0 or not requested.any():
            return
        cand_viewer, cand_edge, cand_creator = self._candidate_pairs(creators, requested)
        if len(cand_viewer) == 0:
            return
        cand_topic = self._topic_by_creator[cand_creator]
        scores = self._pair_scores(cand_viewer, cand_edge, cand_topic)

        starts = np.flatnonzero(np.r_[True, cand_viewer[1:] != cand_viewer[:-1]])
        ends = np.r_[starts[1:], len(cand_viewer)]
        cum = np.cumsum(scores)
        base = cum[starts] - scores[starts]
        totals = cum[ends - 1] - base
        u = self.streams.scoring.random(len(starts))
        chosen = np.searchsorted(cum, base + u * totals, side="right")
        chosen = np.clip(chosen, starts, ends - 1)

        rec_viewer = cand_viewer[starts].astype(np.int32)
        rec_edge = cand_edge[chosen]
        rec_creator = cand_creator[chosen]
        rec_topic = cand_topic[chosen]
        rec_content = self._content_by_creator[rec_creator]

        ui = self.streams.interaction.random(len(rec_viewer))
        interacted = ui < self.norm_prefs[rec_viewer, rec_topic]

        self._record_and_update(t, rec_viewer, rec_edge, rec_topic, rec_content, interacted)

    def _step_reference(self, t: int) -> None:
        """Per-user loop through the scoring/sampling operations.

        Consumes the random streams in exactly the same order as the fast path
        (ascending user id within each phase), so for a fixed seed both
        implementations must produce the same event log.
        """
        creators = self._phase_create_reference(t)
        created = set(creators.tolist())
        requested = self._phase_request()
        rec_viewer, rec_edge, rec_topic, rec_content = [], [], [], []
        for viewer in range(self.n):
            if not requested[viewer]:
                continue
            candidates = [
                ContentItem(int(self._content_by_creator[j]), int(j),
                            Topic(int(self._topic_by_creator[j])), t)
                for j in self.graph.out_neighbors(viewer).tolist()
                if j in created
            ]
            if not candidates:
                continue
            weights = score_candidates(self.policy, viewer, candidates, self.ctx)
            pick = candidates[sample_categorical(weights, self.streams.scoring)]
            rec_viewer.append(viewer)
            rec_edge.append(self.ctx.edge_for(viewer, pick.creator_id))
            rec_topic.append(int(pick.topic))
            rec_content.append(pick.content_id)
        if not rec_viewer:
            return
        interacted = []
        for viewer, topic in zip(rec_viewer, rec_topic):
            interacted.append(
                self.streams.interaction.random() < self.norm_prefs[viewer, topic]
            )
        self._record_and_update(
            t,
            np.array(rec_viewer, dtype=np.int32),
            np.array(rec_edge, dtype=np.int64),
            np.array(rec_topic, dtype=np.int8),
            np.array(rec_content, dtype=np.int64),
            np.array(interacted, dtype=bool),
        )

    def _phase_create_reference(self, t: int) -> np.ndarray:
        u = self.streams.creation.random(self.n)
        creators = np.flatnonzero(u < self.config.p_create).astype(np.int32)
        self._topic_by_creator.fill(-1)
        if len(creators):
            topics = np.array(
                [sample_categorical(self.norm_prefs[c], self.streams.creation)
                 for c in creators],
                dtype=np.int8,
            )
            ids = np.arange(self._next_content_id, self._next_content_id + len(creators),
                            dtype=np.int64)
            self._next_content_id += len(creators)
            self._topic_by_creator[creators] = topics
            self._content_by_creator[creators] = ids
            self._content_step.append(np.full(len(creators), t, dtype=np.int32))
            self._content_creator.append(creators.copy())
            self._content_topic.append(topics)
        return creators

    def _record_and_update(self, t, rec_viewer, rec_edge, rec_topic, rec_content,
                           interacted) -> None:
        # tie summary uses the values as of scoring time (before this update)
        pre_int = self.features.int_count[rec_edge]
        pre_tie = self.tie_model.strengths(rec_edge)
        cross = (~self.same_group_edge[rec_edge]).astype(np.int64)
        bucket = cross * N_TOPICS + rec_topic
        nb = 2 * N_TOPICS
        self._tie_count[t] = np.bincount(bucket, minlength=nb).reshape(2, N_TOPICS)
        self._tie_int_sum[t] = np.bincount(
            bucket, weights=pre_int, minlength=nb).reshape(2, N_TOPICS)
        self._tie_strength_sum[t] = np.bincount(
            bucket, weights=pre_tie, minlength=nb).reshape(2, N_TOPICS)

        self._rec_step.append(np.full(len(rec_viewer), t, dtype=np.int32))
        self._rec_viewer.append(rec_viewer)
        self._rec_content.append(rec_content.astype(np.int32))
        self._rec_interacted.append(interacted)

        self.features.update_interaction_counts(
            rec_edge, interacted.astype(np.float64), self.ema_params
        )
        if self.check_every and (t + 1) % self.check_every == 0:
            dm, ds = self.features.verify_incremental()
            self._std_check_max = max(self._std_check_max, dm, ds)

    def step(self, t: int) -> None:
        if self.reference:
            self._step_reference(t)
        else:
            self._step_fast(t)

    def run(self) -> EventLog:
        for t in range(self.config.steps):
            self.step(t)
        return self._finalize()

    def _finalize(self) -> EventLog:
        def cat(parts, dtype):
            return np.concatenate(parts) if parts else np.empty(0, dtype=dtype)

        meta = {
            "seed": self.streams.seed,
            "policy": self.policy,
            "n": self.n,
            "p_create": self.config.p_create,
            "p_request": self.config.p_request,
            "beta": list(self.tie_params.beta),
            "alpha": self.ema_params.alpha,
        }
        if self.check_every:
            meta["standardization_check_max_abs_diff"] = self._std_check_max
        return EventLog(
            steps=self.config.steps,
            content_step=cat(self._content_step, np.int32),
            content_creator=cat(self._content_creator, np.int32),
            content_topic=cat(self._content_topic, np.int8),
            rec_step=cat(self._rec_step, np.int32),
            rec_viewer=cat(self._rec_viewer, np.int32),
            rec_content=cat(self._rec_content, np.int32),
            rec_interacted=cat(self._rec_interacted, bool),
            tie_count=self._tie_count,
            tie_int_sum=self._tie_int_sum,
            tie_strength_sum=self._tie_strength_sum,
            meta=meta,
        )
