from __future__ import annotations

import json

import pytest

from voronoi_limits.config import OUT_ENV, ConfigError, parse_config


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


def test_minimal_figure31_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {"experiment": "figure31", "seed": 42}))
    assert (cfg.n, cfg.trials, cfg.bin_width, cfg.d) == (1000, 1000, 0.05, 2)
    assert cfg.density == {"kind": "uniform_box"}
    assert cfg.probe_point().tolist() == [0.0, 0.0]


def test_flags_override_file(tmp_path):
    path = write(tmp_path, {"experiment": "figure31", "seed": 1, "n": 1000})
    assert parse_config(path, {"n": 4000}).n == 4000
    assert parse_config(path, {"n": None}).n == 1000


def test_trials_zero_names_field(tmp_path):
    with pytest.raises(ConfigError, match="^trials"):
        parse_config(write(tmp_path, {"experiment": "figure31", "seed": 1, "trials": 0}))


@pytest.mark.parametrize("patch,field", [
    ({"colour": 3}, "colour"),
    ({"experiment": "nope"}, "experiment"),
    ({"d": 0}, "d"),
    ({"seed": -1}, "seed"),
    ({"seed": 2**64}, "seed"),
    ({"n_ladder": []}, "n_ladder"),
    ({"bin_width": 0}, "bin_width"),
    ({"statistic": "faces"}, "statistic"),
    ({"mu_method": "guess"}, "mu_method"),
    ({"density": {"kind": "triangle"}}, "density"),
    ({"probe": [0, 0, 0]}, "probe"),
    ({"probe": [5, 5]}, "probe"),
    ({"n_outer": 10}, "n_outer"),
])
def test_invalid_values_name_their_field(tmp_path, patch, field):
    data = {"experiment": "figure31", "seed": 1, **patch}
    with pytest.raises(ConfigError, match=f"^{field}"):
        parse_config(write(tmp_path, data))


def test_experiment_specific_rules():
    with pytest.raises(ConfigError, match="^d"):
        parse_config(None, {"experiment": "edges", "seed": 1, "d": 3})
    with pytest.raises(ConfigError, match="^k"):
        parse_config(None, {"experiment": "moments", "seed": 1, "k": 3})
    with pytest.raises(ConfigError, match="^probes"):
        parse_config(None, {"experiment": "independence", "seed": 1, "probes": [[0.5, 0], [0.5, 0]]})


def test_seed_required():
    with pytest.raises(ConfigError, match="^seed"):
        parse_config(None, {"experiment": "figure31"})


def test_malformed_json_reports_line(tmp_path):
    path = write(tmp_path, '{\n  "experiment": "figure31",\n  "seed": 1,,\n}')
    with pytest.raises(ConfigError, match=r"cfg\.json:3:"):
        parse_config(path)
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "missing.json")


def test_out_env_precedence():
    env = {OUT_ENV: "/tmp/from-env"}
    assert parse_config(None, {"experiment": "figure31", "seed": 1}, env=env).out == "/tmp/from-env"
    assert parse_config(None, {"experiment": "figure31", "seed": 1, "out": "x"}, env=env).out == "x"


def test_echo_and_hash_ignore_output_directory():
    a = parse_config(None, {"experiment": "figure31", "seed": 1, "out": "a"})
    b = parse_config(None, {"experiment": "figure31", "seed": 1, "out": "b"})
    c = parse_config(None, {"experiment": "figure31", "seed": 2, "out": "a"})
    assert "out" not in a.echo()
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_per_experiment_defaults():
    assert parse_config(None, {"experiment": "ks", "seed": 1}).n_ladder == [100, 400, 1600]
    assert parse_config(None, {"experiment": "lebesgue", "seed": 1}).density["kind"] == "gaussian"
    assert parse_config(None, {"experiment": "independence", "seed": 1}).probes == [[-0.5, 0.0], [0.5, 0.0]]
