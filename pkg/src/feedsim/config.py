"""Experiment configuration: strict JSON schema with the study defaults.

An empty config file resolves to the default experiment: 1000 users with a
20% minority split, homophilic block-model graph (in-group 0.5 minority /
0.4 majority, 0.1 cross), tie-strength policy with beta=(1,1,-1,5) and
alpha=0.01, 10000 steps at p_create=0.2 / p_request=0.8, burn-in 2500,
20 seeded runs. Unknown keys anywhere are rejected with the offending path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from .engine import EngineConfig
from .errors import ConfigError
from .metrics import MetricsConfig
from .netgen import RandomGraphParams, SbmParams
from .policy import INT_COUNT_SCALINGS, POLICY_KINDS, EmaParams, TieStrengthParams
from .population import Group, GroupPreferencePrior, PopulationConfig

GRAPH_KINDS = ("complete", "random", "sbm", "file")


@dataclass(frozen=True)
class GraphConfig:
    kind: str = "sbm"
    random: RandomGraphParams = field(default_factory=RandomGraphParams)
    sbm: SbmParams = field(default_factory=SbmParams)
    path: str | None = None
    n: int | None = None  # only for kind="file"

    def validate(self) -> None:
        if self.kind not in GRAPH_KINDS:
            raise ConfigError(f"graph.kind: must be one of {GRAPH_KINDS}, got {self.kind!r}")
        self.random.validate()
        self.sbm.validate()
        if self.kind == "file":
            if not self.path:
                raise ConfigError("graph.path: required when graph.kind is 'file'")
            if self.n is None or self.n < 2:
                raise ConfigError("graph.n: required (>= 2) when graph.kind is 'file'")


@dataclass(frozen=True)
class PolicyConfig:
    kind: str = "real_graph"
    tie: TieStrengthParams = field(default_factory=TieStrengthParams)
    ema: EmaParams = field(default_factory=EmaParams)
    int_count_scaling: str = "scale_current"

    def validate(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"policy.kind: must be one of {POLICY_KINDS}, got {self.kind!r}")
        if self.int_count_scaling not in INT_COUNT_SCALINGS:
            raise ConfigError(
                f"policy.int_count_scaling: must be one of {INT_COUNT_SCALINGS}, "
                f"got {self.int_count_scaling!r}"
            )
        self.tie.validate()
        self.ema.validate()


@dataclass(frozen=True)
class ExperimentConfig:
    population: PopulationConfig = field(default_factory=PopulationConfig)
    graph: GraphConfig = field(default_factory=GraphConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    seeds: tuple[int, ...] = tuple(range(20))
    output_dir: str = "out"

    def validate(self) -> None:
        self.population.validate()
        self.graph.validate()
        self.policy.validate()
        self.engine.validate()
        self.metrics.validate()
        if self.graph.kind == "file" and self.graph.n != self.population.n:
            raise ConfigError(
                f"population.n ({self.population.n}) != graph.n ({self.graph.n}): "
                "the loaded graph must match the population size"
            )
        if len(self.seeds) == 0:
            raise ConfigError("seeds: at least one seed required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds: must be distinct")
        if self.engine.steps > 0 and self.metrics.burn_in >= self.engine.steps:
            raise ConfigError(
                f"metrics.burn_in ({self.metrics.burn_in}) must be < engine.steps "
                f"({self.engine.steps})"
            )


def _take(d: dict, path: str, known: tuple[str, ...]) -> None:
    unknown = set(d) - set(known)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown config key: {path}{key}")


def _num(d: dict, key: str, path: str, default, kind=float):
    if key not in d:
        return default
    v = d[key]
    if kind is int and not isinstance(v, int):
        raise ConfigError(f"{path}{key}: expected integer, got {v!r}")
    if kind is float and not isinstance(v, (int, float)):
        raise ConfigError(f"{path}{key}: expected number, got {v!r}")
    return kind(v)


def _prior_from_dict(d: dict, path: str, default: GroupPreferencePrior) -> GroupPreferencePrior:
    _take(d, path, ("mu", "sigma"))
    mu = d.get("mu", list(default.mu))
    if not (isinstance(mu, list) and len(mu) == 3):
        raise ConfigError(f"{path}mu: expected a list of 3 numbers")
    return GroupPreferencePrior(mu=tuple(float(v) for v in mu),
                                sigma=_num(d, "sigma", path, default.sigma))


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _take(data, "", ("population", "graph", "policy", "engine", "metrics",
                     "seeds", "output_dir"))

    pd = data.get("population", {})
    _take(pd, "population.", ("n", "minority_share", "priors"))
    priors = dict(PopulationConfig().priors)
    if "priors" in pd:
        _take(pd["priors"], "population.priors.", ("majority", "minority"))
        for name, group in (("majority", Group.MAJORITY), ("minority", Group.MINORITY)):
            if name in pd["priors"]:
                priors[group] = _prior_from_dict(
                    pd["priors"][name], f"population.priors.{name}.", priors[group]
                )
    population = PopulationConfig(
        n=_num(pd, "n", "population.", 1000, int),
        minority_share=_num(pd, "minority_share", "population.", 0.2),
        priors=priors,
    )

    gd = data.get("graph", {})
    _take(gd, "graph.", ("kind", "p_edge", "p_maj_maj", "p_min_min", "p_maj_min",
                         "p_min_maj", "path", "n"))
    dflt = GraphConfig()
    graph = GraphConfig(
        kind=gd.get("kind", dflt.kind),
        random=RandomGraphParams(p_edge=_num(gd, "p_edge", "graph.", 0.5)),
        sbm=SbmParams(
            p_maj_maj=_num(gd, "p_maj_maj", "graph.", dflt.sbm.p_maj_maj),
            p_min_min=_num(gd, "p_min_min", "graph.", dflt.sbm.p_min_min),
            p_maj_min=_num(gd, "p_maj_min", "graph.", dflt.sbm.p_maj_min),
            p_min_maj=_num(gd, "p_min_maj", "graph.", dflt.sbm.p_min_maj),
        ),
        path=gd.get("path"),
        n=_num(gd, "n", "graph.", None, int) if "n" in gd else None,
    )

    pold = data.get("policy", {})
    _take(pold, "policy.", ("kind", "beta", "alpha", "int_count_scaling"))
    beta = pold.get("beta", list(TieStrengthParams().beta))
    if not (isinstance(beta, list) and len(beta) == 4):
        raise ConfigError("policy.beta: expected a list of 4 numbers")
    policy = PolicyConfig(
        kind=pold.get("kind", "real_graph"),
        tie=TieStrengthParams(beta=tuple(float(v) for v in beta)),
        ema=EmaParams(alpha=_num(pold, "alpha", "policy.", 0.01)),
        int_count_scaling=pold.get("int_count_scaling", "scale_current"),
    )

    ed = data.get("engine", {})
    _take(ed, "engine.", ("p_create", "p_request", "steps"))
    engine = EngineConfig(
        p_create=_num(ed, "p_create", "engine.", 0.2),
        p_request=_num(ed, "p_request", "engine.", 0.8),
        steps=_num(ed, "steps", "engine.", 10000, int),
    )

    md = data.get("metrics", {})
    _take(md, "metrics.", ("burn_in", "ma_window_ratio", "ma_window_gap"))
    metrics = MetricsConfig(
        burn_in=_num(md, "burn_in", "metrics.", 2500, int),
        ma_window_ratio=_num(md, "ma_window_ratio", "metrics.", 1000, int),
        ma_window_gap=_num(md, "ma_window_gap", "metrics.", 100, int),
    )

    seeds = data.get("seeds", list(range(20)))
    if not (isinstance(seeds, list) and all(isinstance(s, int) for s in seeds)):
        raise ConfigError("seeds: expected a list of integers")

    cfg = ExperimentConfig(
        population=population, graph=graph, policy=policy, engine=engine,
        metrics=metrics, seeds=tuple(seeds),
        output_dir=data.get("output_dir", "out"),
    )
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    text = text.strip()
    if not text:
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    return config_from_dict(data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Canonical full echo of a config (all fields explicit)."""
    return {
        "population": {
            "n": cfg.population.n,
            "minority_share": cfg.population.minority_share,
            "priors": {
                "majority": {"mu": list(cfg.population.priors[Group.MAJORITY].mu),
                             "sigma": cfg.population.priors[Group.MAJORITY].sigma},
                "minority": {"mu": list(cfg.population.priors[Group.MINORITY].mu),
                             "sigma": cfg.population.priors[Group.MINORITY].sigma},
            },
        },
        "graph": {
            "kind": cfg.graph.kind,
            "p_edge": cfg.graph.random.p_edge,
            "p_maj_maj": cfg.graph.sbm.p_maj_maj,
            "p_min_min": cfg.graph.sbm.p_min_min,
            "p_maj_min": cfg.graph.sbm.p_maj_min,
            "p_min_maj": cfg.graph.sbm.p_min_maj,
            **({"path": cfg.graph.path, "n": cfg.graph.n} if cfg.graph.kind == "file" else {}),
        },
        "policy": {
            "kind": cfg.policy.kind,
            "beta": list(cfg.policy.tie.beta),
            "alpha": cfg.policy.ema.alpha,
            "int_count_scaling": cfg.policy.int_count_scaling,
        },
        "engine": {
            "p_create": cfg.engine.p_create,
            "p_request": cfg.engine.p_request,
            "steps": cfg.engine.steps,
        },
        "metrics": {
            "burn_in": cfg.metrics.burn_in,
            "ma_window_ratio": cfg.metrics.ma_window_ratio,
            "ma_window_gap": cfg.metrics.ma_window_gap,
        },
        "seeds": list(cfg.seeds),
        "output_dir": cfg.output_dir,
    }


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# -- sweeps -----------------------------------------------------------------

SWEEP_AXES = ("minority_share", "sbm_params", "beta4", "policy")

# beta4 grid 1..10 is the reported sweep; the others are documented choices.
DEFAULT_SWEEP_GRIDS = {
    "minority_share": [0.05, 0.1, 0.2, 0.3, 0.4],
    "sbm_params": [
        (0.4, 0.5, 0.1, 0.1),
        (0.5, 0.4, 0.1, 0.1),
        (0.5, 0.5, 0.5, 0.5),
        (0.5, 0.5, 0.1, 0.1),
    ],
    "beta4": [float(b) for b in range(1, 11)],
    "policy": ["random", "topic_match", "real_graph"],
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple

    def validate(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: must be one of {SWEEP_AXES}, got {self.axis!r}")
        if len(self.values) == 0:
            raise ConfigError("sweep.values: must be non-empty")


def sweep_value_label(axis: str, value) -> str:
    if axis == "sbm_params":
        return "-".join(f"{v:g}" for v in value)
    if axis == "policy":
        return str(value)
    return f"{value:g}"


def apply_sweep_value(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "minority_share":
        return replace(cfg, population=replace(cfg.population, minority_share=float(value)))
    if axis == "beta4":
        b = cfg.policy.tie.beta
        tie = TieStrengthParams(beta=(b[0], b[1], b[2], float(value)))
        return replace(cfg, policy=replace(cfg.policy, tie=tie))
    if axis == "policy":
        return replace(cfg, policy=replace(cfg.policy, kind=str(value)))
    if axis == "sbm_params":
        m, mn, c1, c2 = (float(v) for v in value)
        return replace(cfg, graph=replace(
            cfg.graph, sbm=SbmParams(p_maj_maj=m, p_min_min=mn, p_maj_min=c1, p_min_maj=c2)
        ))
    raise ConfigError(f"unknown sweep axis {axis!r}")


def parse_sweep_values(axis: str, text: str) -> tuple:
    """Parse the CLI --values string for the given axis.

    Comma-separated values; sbm_params entries are colon-separated 4-tuples
    (maj-maj:min-min:maj-min:min-maj).
    """
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError("sweep values: empty list")
    if axis == "policy":
        return tuple(items)
    if axis == "sbm_params":
        out = []
        for item in items:
            parts = item.split(":")
            if len(parts) != 4:
                raise ConfigError(
                    f"sweep values: sbm_params entries need 4 colon-separated numbers, "
                    f"got {item!r}"
                )
            out.append(tuple(float(p) for p in parts))
        return tuple(out)
    try:
        return tuple(float(v) for v in items)
    except ValueError as e:
        raise ConfigError(f"sweep values: {e}") from e
