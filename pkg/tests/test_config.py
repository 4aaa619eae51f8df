import json

import pytest

from feedsim.config import (
    DEFAULT_SWEEP_GRIDS,
    SweepSpec,
    apply_sweep_value,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
    parse_sweep_values,
)
from feedsim.errors import ConfigError
from feedsim.population import Group


def write(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return path


def test_empty_file_gives_paper_defaults(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    assert cfg.population.n == 1000
    assert cfg.population.minority_share == 0.2
    assert cfg.population.priors[Group.MAJORITY].mu == (0.5, 0.4, 0.1)
    assert cfg.population.priors[Group.MINORITY].mu == (0.5, 0.1, 0.4)
    assert cfg.population.priors[Group.MAJORITY].sigma == 0.1
    assert cfg.engine.steps == 10000
    assert cfg.engine.p_create == 0.2
    assert cfg.engine.p_request == 0.8
    assert cfg.policy.kind == "real_graph"
    assert cfg.policy.tie.beta == (1.0, 1.0, -1.0, 5.0)
    assert cfg.policy.ema.alpha == 0.01
    assert cfg.graph.kind == "sbm"
    assert cfg.graph.sbm.p_min_min == 0.5
    assert cfg.graph.sbm.p_maj_maj == 0.4
    assert cfg.graph.sbm.p_maj_min == 0.1
    assert cfg.graph.sbm.p_min_maj == 0.1
    assert cfg.metrics.burn_in == 2500
    assert cfg.metrics.ma_window_ratio == 1000
    assert cfg.metrics.ma_window_gap == 100
    assert cfg.seeds == tuple(range(20))


def test_empty_object_same_as_empty_file(tmp_path):
    assert load_config(write(tmp_path, "{}")) == load_config(write(tmp_path, ""))


def test_unknown_key_rejected_with_name(tmp_path):
    with pytest.raises(ConfigError, match="engine.p_creat"):
        load_config(write(tmp_path, {"engine": {"p_creat": 0.5}}))
    with pytest.raises(ConfigError, match="topk"):
        load_config(write(tmp_path, {"topk": 3}))


def test_graph_file_size_mismatch_names_both_fields(tmp_path):
    data = {
        "population": {"n": 100},
        "graph": {"kind": "file", "path": "g.csv", "n": 50},
    }
    with pytest.raises(ConfigError) as exc:
        load_config(write(tmp_path, data))
    msg = str(exc.value)
    assert "population.n" in msg and "graph.n" in msg


def test_field_level_validation_messages(tmp_path):
    with pytest.raises(ConfigError, match="policy.alpha"):
        load_config(write(tmp_path, {"policy": {"alpha": 1.5}}))
    with pytest.raises(ConfigError, match="policy.beta"):
        load_config(write(tmp_path, {"policy": {"beta": [1, 2]}}))
    with pytest.raises(ConfigError, match="engine.p_create"):
        load_config(write(tmp_path, {"engine": {"p_create": -0.1}}))
    with pytest.raises(ConfigError, match="burn_in"):
        load_config(write(tmp_path, {"engine": {"steps": 100}}))
    with pytest.raises(ConfigError, match="seeds"):
        load_config(write(tmp_path, {"seeds": [1, 1]}))
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(write(tmp_path, "{nope"))


def test_config_roundtrip_and_hash_stability(tmp_path):
    cfg = load_config(write(tmp_path, {"population": {"n": 123}, "seeds": [5, 6]}))
    echo = config_to_dict(cfg)
    cfg2 = config_from_dict(echo)
    assert cfg2 == cfg
    assert config_hash(cfg2) == config_hash(cfg)
    other = load_config(write(tmp_path, {"population": {"n": 124}, "seeds": [5, 6]}))
    assert config_hash(other) != config_hash(cfg)


def test_sweep_value_application():
    cfg = config_from_dict({})
    c2 = apply_sweep_value(cfg, "minority_share", 0.3)
    assert c2.population.minority_share == 0.3
    c3 = apply_sweep_value(cfg, "beta4", 7)
    assert c3.policy.tie.beta == (1.0, 1.0, -1.0, 7.0)
    c4 = apply_sweep_value(cfg, "policy", "random")
    assert c4.policy.kind == "random"
    c5 = apply_sweep_value(cfg, "sbm_params", (0.5, 0.5, 0.5, 0.5))
    assert c5.graph.sbm.p_maj_maj == 0.5
    assert c5.graph.sbm.p_min_min == 0.5


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(axis="gamma", values=(1,)).validate()
    with pytest.raises(ConfigError):
        SweepSpec(axis="beta4", values=()).validate()
    SweepSpec(axis="beta4", values=(1.0, 2.0)).validate()


def test_parse_sweep_values():
    assert parse_sweep_values("beta4", "1, 2,5") == (1.0, 2.0, 5.0)
    assert parse_sweep_values("policy", "random,real_graph") == ("random", "real_graph")
    assert parse_sweep_values("sbm_params", "0.5:0.4:0.1:0.1") == ((0.5, 0.4, 0.1, 0.1),)
    with pytest.raises(ConfigError):
        parse_sweep_values("sbm_params", "0.5:0.4")
    with pytest.raises(ConfigError):
        parse_sweep_values("beta4", "abc")
    with pytest.raises(ConfigError):
        parse_sweep_values("beta4", " , ")


def test_default_grids_cover_reported_sweeps():
    assert DEFAULT_SWEEP_GRIDS["beta4"] == [float(b) for b in range(1, 11)]
    assert (0.5, 0.5, 0.5, 0.5) in DEFAULT_SWEEP_GRIDS["sbm_params"]
    assert all(0 < s <= 0.4 or s == 0.05 for s in DEFAULT_SWEEP_GRIDS["minority_share"])


def test_int_count_scaling_key(tmp_path):
    cfg = load_config(write(tmp_path, {"policy": {"int_count_scaling": "zscore_current"}}))
    assert cfg.policy.int_count_scaling == "zscore_current"
    with pytest.raises(ConfigError, match="int_count_scaling"):
        load_config(write(tmp_path, {"policy": {"int_count_scaling": "bogus"}}))
