"""Experiment orchestration: seeded runs, per-run and aggregated metrics,
sweeps, and the reproducibility manifest.

A run is a pure function of (config, seed): the seed spawns independent named
random streams for population sampling, graph generation, and the four engine
phases. Workers are fully isolated, so running seeds in parallel produces
byte-identical files to running them sequentially.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ExperimentConfig,
    SweepSpec,
    apply_sweep_value,
    config_hash,
    config_to_dict,
    sweep_value_label,
)
from .engine import EventLog, RngStreams, Simulation
from .errors import ConfigError
from .metrics import (
    PerUserVisibility,
    RECEIVER_FILTERS,
    TimeSeries,
    TopicShare,
    aggregate_series,
    interaction_gap,
    minority_share_by_topic,
    per_user_cross_group_visibility,
    pool_per_user,
    pooled_topic_shares,
    professional_rec_ratio,
    recs_vs_incoming_edges,
    series_trend,
    time_averaged_professional_ratio,
    visibility_correlations,
    write_correlations_csv,
    write_lines_csv,
    write_topic_shares_csv,
)
from .netgen import (
    DirectedGraph,
    complete_graph,
    follower_composition,
    random_graph,
    sbm_graph,
)
from .population import Population, sample_population
from .svgplot import Series, line_plot, scatter_plot


@dataclass
class RunResult:
    seed: int
    population: Population
    graph: DirectedGraph
    log: EventLog


@dataclass
class RunMetrics:
    """Per-run derived series and tables (small enough to ship across workers)."""

    seed: int
    ratio: TimeSeries
    ratio_per_item: TimeSeries
    time_avg_ratio: float
    final_ratio: float
    gap: TimeSeries
    topic_shares: dict[str, list[TopicShare]]
    per_user: PerUserVisibility
    trend_slope: float | None


def build_graph(cfg: ExperimentConfig, population: Population,
                rng: np.random.Generator) -> DirectedGraph:
    kind = cfg.graph.kind
    if kind == "complete":
        return complete_graph(cfg.population.n)
    if kind == "random":
        return random_graph(cfg.population.n, cfg.graph.random, rng)
    if kind == "sbm":
        return sbm_graph(population, cfg.graph.sbm, rng)
    graph = DirectedGraph.read_csv(cfg.graph.path, n=cfg.graph.n)
    if graph.n != population.n:
        raise ConfigError(
            f"population.n ({population.n}) != graph.n ({graph.n}) from {cfg.graph.path}"
        )
    return graph


def run_simulation(cfg: ExperimentConfig, seed: int, *, reference: bool = False,
                   standardization_mode: str = "incremental",
                   standardization_check_every: int = 0) -> RunResult:
    cfg.validate()
    streams = RngStreams(seed)
    population = sample_population(cfg.population, streams.population)
    graph = build_graph(cfg, population, streams.graph)
    sim = Simulation(
        population, graph, cfg.policy.kind, cfg.policy.tie, cfg.policy.ema,
        cfg.engine, streams,
        int_count_scaling=cfg.policy.int_count_scaling,
        standardization_mode=standardization_mode,
        standardization_check_every=standardization_check_every,
        reference=reference,
    )
    log = sim.run()
    log.meta.update({
        "config": config_to_dict(cfg),
        "config_hash": config_hash(cfg),
        "version": __version__,
    })
    return RunResult(seed=seed, population=population, graph=graph, log=log)


def compute_run_metrics(run: RunResult, cfg: ExperimentConfig) -> RunMetrics:
    ratio = professional_rec_ratio(run.log, run.population, cfg.metrics)
    trend = series_trend(ratio)
    return RunMetrics(
        seed=run.seed,
        ratio=ratio,
        ratio_per_item=professional_rec_ratio(run.log, run.population, cfg.metrics,
                                              per_item=True),
        time_avg_ratio=time_averaged_professional_ratio(run.log, run.population, cfg.metrics),
        final_ratio=ratio.last_defined(),
        gap=interaction_gap(run.log, run.population, cfg.metrics),
        topic_shares={
            f: minority_share_by_topic(run.log, run.population, f) for f in RECEIVER_FILTERS
        },
        per_user=per_user_cross_group_visibility(run.log, run.population, run.graph),
        trend_slope=None if trend is None else trend.slope,
    )


def write_run_outputs(run_dir: Path, run: RunResult, rm: RunMetrics,
                      cfg: ExperimentConfig) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    run.population.write_csv(run_dir / "population.csv")
    run.graph.write_csv(run_dir / "graph.csv")
    run.log.write_csv_dir(run_dir)
    follower_composition(run.graph, run.population).write_csv(run_dir / "composition.csv")
    mdir = run_dir / "metrics"
    mdir.mkdir(exist_ok=True)
    rm.ratio.write_csv(mdir / "ratio_prof.csv", "ratio_ma")
    rm.ratio_per_item.write_csv(mdir / "ratio_prof_per_item.csv", "ratio_ma")
    rm.gap.write_csv(mdir / "int_gap.csv", "gap_ma")
    all_shares = [row for f in RECEIVER_FILTERS for row in rm.topic_shares[f]]
    write_topic_shares_csv(mdir / "topic_shares.csv", all_shares)
    rm.per_user.write_csv(mdir / "per_user.csv")
    write_correlations_csv(mdir / "correlations.csv",
                           visibility_correlations(rm.per_user, response="per_item"))
    write_correlations_csv(mdir / "correlations_count.csv",
                           visibility_correlations(rm.per_user, response="count"))
    table, lines = recs_vs_incoming_edges(run.log, run.population, run.graph)
    table.write_csv(mdir / "recs_vs_in_edges.csv")
    write_lines_csv(mdir / "recs_vs_in_edges_lines.csv", lines)
    with open(mdir / "summary.json", "w", encoding="utf-8") as f:
        json.dump({"seed": run.seed, "time_avg_ratio": rm.time_avg_ratio,
                   "final_ratio": rm.final_ratio, "trend_slope": rm.trend_slope},
                  f, indent=2, sort_keys=True)
        f.write("\n")


def _run_worker(args):
    """Execute one seed; returns ("ok", RunMetrics) or ("err", seed, message)."""
    cfg, seed, out_root = args
    try:
        run = run_simulation(cfg, seed)
        rm = compute_run_metrics(run, cfg)
        write_run_outputs(Path(out_root) / f"run_{seed}", run, rm, cfg)
        return ("ok", rm)
    except Exception as e:
        return ("err", seed, f"{type(e).__name__}: {e}")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _dir_checksums(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): _sha256(p)
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.name != "manifest.json"
    }


def _fmt_or_empty(v) -> str:
    return "" if v is None else repr(float(v))


def write_aggregates(out_root: Path, cfg: ExperimentConfig,
                     run_metrics: list[RunMetrics]) -> list[str]:
    """Mean-over-runs series, pooled tables, and SVG renders. Returns warnings."""
    adir = out_root / "aggregated"
    adir.mkdir(parents=True, exist_ok=True)
    warnings: list[str] = []

    agg_ratio = aggregate_series([rm.ratio for rm in run_metrics])
    agg_ratio.write_csv(adir / "ratio_prof.csv", "ratio_ma")
    aggregate_series([rm.ratio_per_item for rm in run_metrics]).write_csv(
        adir / "ratio_prof_per_item.csv", "ratio_ma")
    agg_gap = aggregate_series([rm.gap for rm in run_metrics])
    agg_gap.write_csv(adir / "int_gap.csv", "gap_ma")

    pooled_shares = [
        row
        for f in RECEIVER_FILTERS
        for row in pooled_topic_shares([rm.topic_shares[f] for rm in run_metrics])
    ]
    write_topic_shares_csv(adir / "topic_shares.csv", pooled_shares)

    pooled = pool_per_user([rm.per_user for rm in run_metrics])
    _write_pooled_per_user(adir / "per_user.csv", run_metrics)
    write_correlations_csv(adir / "correlations.csv",
                           visibility_correlations(pooled, response="per_item"))
    write_correlations_csv(adir / "correlations_count.csv",
                           visibility_correlations(pooled, response="count"))

    with open(adir / "summary.csv", "w", newline="", encoding="utf-8") as f:
        f.write("seed,time_avg_ratio,final_ratio,trend_slope\n")
        for rm in run_metrics:
            f.write(f"{rm.seed},{rm.time_avg_ratio!r},{rm.final_ratio!r},"
                    f"{_fmt_or_empty(rm.trend_slope)}\n")

    warnings += render_svgs(adir)
    return warnings


def _write_pooled_per_user(path: Path, run_metrics: list[RunMetrics]) -> None:
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _csv.writer(f, lineterminator="\n")
        w.writerow(["seed", "user_id", "prof_recs_to_majority", "majority_followers",
                    "majority_following", "z_professional", "z_mainstream", "z_marginal"])
        for rm in run_metrics:
            t = rm.per_user
            for k in range(len(t.user_id)):
                w.writerow([rm.seed, int(t.user_id[k]), int(t.prof_recs_to_majority[k]),
                            int(t.majority_followers[k]), int(t.majority_following[k]),
                            repr(float(t.z[k, 0])), repr(float(t.z[k, 1])),
                            repr(float(t.z[k, 2]))])


def render_svgs(metrics_dir: Path) -> list[str]:
    """Render SVGs next to the known metric CSVs; returns warnings for
    missing or empty series."""
    warnings: list[str] = []
    for name, value_col, ylabel in (
        ("ratio_prof", "ratio_ma", "minority/majority professional rec ratio"),
        ("ratio_prof_per_item", "ratio_ma", "per-item professional rec ratio"),
        ("int_gap", "gap_ma", "in-group minus cross-group interaction count"),
    ):
        csv_path = metrics_dir / f"{name}.csv"
        if not csv_path.exists():
            warnings.append(f"{name}.csv missing; svg skipped")
            continue
        series = TimeSeries.read_csv(csv_path)
        t, v = series.defined_points()
        if len(t) == 0:
            warnings.append(f"{name}.csv has no defined points; svg skipped")
            continue
        svg = line_plot([Series(name, t.tolist(), v.tolist())],
                        title=name, xlabel="step", ylabel=ylabel)
        (metrics_dir / f"{name}.svg").write_text(svg, encoding="utf-8")

    pu = metrics_dir / "per_user.csv"
    if pu.exists():
        import csv as _csv

        xs, ys = [], []
        with open(pu, newline="", encoding="utf-8") as f:
            r = _csv.reader(f)
            header = next(r)
            xi = header.index("majority_followers")
            yi = header.index("prof_recs_to_majority")
            for row in r:
                xs.append(float(row[xi]))
                ys.append(float(row[yi]))
        if xs:
            svg = scatter_plot(
                [Series("minority users", xs, ys)],
                title="cross-group professional visibility",
                xlabel="majority followers",
                ylabel="professional recs to majority",
            )
            (metrics_dir / "per_user.svg").write_text(svg, encoding="utf-8")
        else:
            warnings.append("per_user.csv empty; svg skipped")
    else:
        warnings.append("per_user.csv missing; svg skipped")
    return warnings


def run_experiment(cfg: ExperimentConfig, jobs: int = 1,
                   out: str | Path | None = None) -> Path:
    """Execute all seeds, write per-run outputs, aggregates, SVGs, manifest."""
    cfg.validate()
    out_root = Path(out) if out is not None else Path(cfg.output_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, seed, str(out_root)) for seed in cfg.seeds]
    if jobs > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=min(jobs, len(tasks))) as pool:
            outcomes = list(pool.imap(_run_worker, tasks))
    else:
        outcomes = [_run_worker(task) for task in tasks]
    run_metrics = [o[1] for o in outcomes if o[0] == "ok"]
    failures = [(o[1], o[2]) for o in outcomes if o[0] == "err"]

    warnings = write_aggregates(out_root, cfg, run_metrics) if run_metrics else []

    manifest = {
        "version": __version__,
        "config": config_to_dict(cfg),
        "config_hash": config_hash(cfg),
        "runs": [
            {
                "seed": rm.seed,
                "dir": f"run_{rm.seed}",
                "status": "complete",
                "checksums": _dir_checksums(out_root / f"run_{rm.seed}"),
            }
            for rm in run_metrics
        ]
        + [
            {"seed": seed, "dir": f"run_{seed}", "status": "incomplete", "error": err}
            for seed, err in failures
        ],
        "aggregated_checksums": (
            _dir_checksums(out_root / "aggregated") if run_metrics else {}
        ),
        "warnings": warnings,
    }
    with open(out_root / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    if failures:
        raise ConfigError(
            f"{len(failures)} run(s) failed; see manifest at {out_root / 'manifest.json'}"
        )
    return out_root


def run_sweep(cfg: ExperimentConfig, sweep: SweepSpec, jobs: int = 1,
              out: str | Path | None = None) -> Path:
    """One experiment per grid value (shared base seeds) plus a summary CSV."""
    sweep.validate()
    out_root = Path(out) if out is not None else Path(cfg.output_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    rows = []
    for value in sweep.values:
        label = sweep_value_label(sweep.axis, value)
        sub_cfg = apply_sweep_value(cfg, sweep.axis, value)
        sub_dir = run_experiment(sub_cfg, jobs=jobs,
                                 out=out_root / f"{sweep.axis}_{label}")
        with open(sub_dir / "aggregated" / "summary.csv", encoding="utf-8") as f:
            lines = f.read().strip().splitlines()[1:]
        finals = []
        slopes = []
        for line in lines:
            _, _, final, slope = line.split(",")
            finals.append(float(final))
            if slope:
                slopes.append(float(slope))
        rows.append((label, float(np.mean(finals)),
                     float(np.mean(slopes)) if slopes else None))
    with open(out_root / "sweep_summary.csv", "w", encoding="utf-8") as f:
        f.write("axis_value,mean_final_ratio,trend_slope\n")
        for label, avg, slope in rows:
            f.write(f"{label},{avg!r},{_fmt_or_empty(slope)}\n")
    return out_root


def recompute_metrics(log_dir: str | Path) -> Path:
    """Rebuild all metric CSVs (per run and aggregated) from stored logs."""
    root = Path(log_dir)
    run_dirs = sorted(root.glob("run_*"), key=lambda p: int(p.name.split("_")[1]))
    if not run_dirs:
        raise ConfigError(f"no run_* directories under {root}")
    from .config import config_from_dict

    run_metrics = []
    for rd in run_dirs:
        log = EventLog.read_csv_dir(rd)
        cfg = config_from_dict(log.meta["config"])
        population = Population.read_csv(rd / "population.csv")
        graph = DirectedGraph.read_csv(rd / "graph.csv", n=population.n)
        run = RunResult(seed=log.meta["seed"], population=population, graph=graph, log=log)
        rm = compute_run_metrics(run, cfg)
        write_run_outputs(rd, run, rm, cfg)
        run_metrics.append(rm)
    write_aggregates(root, cfg, run_metrics)
    return root
