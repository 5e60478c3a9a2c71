"""Run configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .density import Density, density_from_spec
from .rng import MAX_SEED

EXPERIMENTS = (
    "figure31",
    "edges",
    "ks",
    "diameter-tail",
    "moments",
    "lebesgue",
    "independence",
    "dk-sample",
)

OUT_ENV = "VORONOI_LIMITS_OUT"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    experiment: str
    seed: int
    d: int = 2
    density: dict = field(default_factory=lambda: {"kind": "uniform_box"})
    probe: list | None = None
    probes: list | None = None
    n: int = 1000
    n_ladder: list = field(default_factory=lambda: [250, 1000, 4000])
    trials: int = 1000
    k: int = 1
    bin_width: float = 0.05
    t_grid: list = field(default_factory=lambda: [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0])
    mc_samples: int = 20_000
    n_outer: int | None = None
    n_inner: int = 100_000
    samples: int = 100_000
    statistic: str = "edge_count"
    mu_method: str = "exact"
    out: str = "results"

    def echo(self) -> dict:
        """Every field that affects numbers; the output directory is left out."""
        data = asdict(self)
        data.pop("out")
        return data

    def config_hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def density_obj(self) -> Density:
        return density_from_spec(self.density, self.d)

    def probe_point(self) -> np.ndarray:
        return np.asarray(self.probe if self.probe is not None else [0.0] * self.d, dtype=float)

    def probe_points(self) -> np.ndarray:
        return np.asarray(self.probes, dtype=float)


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))

# Per-experiment defaults applied before the config file and flags.
EXPERIMENT_DEFAULTS = {
    "figure31": {"n": 1000, "trials": 1000, "bin_width": 0.05},
    "edges": {"n_ladder": [250, 1000, 4000], "trials": 2000},
    "ks": {"n_ladder": [100, 400, 1600], "trials": 2000},
    "diameter-tail": {"n": 1000, "trials": 10_000},
    "moments": {"n_ladder": [250, 1000, 4000], "trials": 4000},
    "lebesgue": {"n_ladder": [250, 1000], "trials": 2000, "density": {"kind": "gaussian", "sigma": 1.0}},
    "independence": {"n": 2000, "trials": 2000, "probes": [[-0.5, 0.0], [0.5, 0.0]]},
    "dk-sample": {"samples": 100_000, "n_inner": 10_000},
}


def _positive_int(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ConfigError(f"{name}: must be a positive integer, got {value!r}")


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {cfg.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or not 0 <= cfg.seed <= MAX_SEED:
        raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {cfg.seed!r}")
    for name in ("d", "n", "trials", "k", "mc_samples", "n_inner", "samples"):
        _positive_int(name, getattr(cfg, name))
    if cfg.n_outer is not None:
        _positive_int("n_outer", cfg.n_outer)
        if cfg.n_outer < 100:
            raise ConfigError("n_outer: must be >= 100")
    if not isinstance(cfg.n_ladder, list) or not cfg.n_ladder:
        raise ConfigError("n_ladder: must be a nonempty list")
    for v in cfg.n_ladder:
        _positive_int("n_ladder", v)
    if not isinstance(cfg.bin_width, (int, float)) or not cfg.bin_width > 0:
        raise ConfigError(f"bin_width: must be positive, got {cfg.bin_width!r}")
    if not isinstance(cfg.t_grid, list) or not cfg.t_grid or any(
            not isinstance(t, (int, float)) or t < 0 for t in cfg.t_grid):
        raise ConfigError("t_grid: must be a nonempty list of non-negative numbers")
    if cfg.statistic not in ("edge_count", "area"):
        raise ConfigError(f"statistic: must be 'edge_count' or 'area', got {cfg.statistic!r}")
    if cfg.mu_method not in ("exact", "mc"):
        raise ConfigError(f"mu_method: must be 'exact' or 'mc', got {cfg.mu_method!r}")
    if not isinstance(cfg.density, dict):
        raise ConfigError("density: must be an object such as {\"kind\": \"uniform_box\"}")
    try:
        dens = cfg.density_obj()
    except (ValueError, KeyError, TypeError, OSError) as exc:
        raise ConfigError(f"density: {exc}") from None
    if cfg.probe is not None and np.shape(cfg.probe) != (cfg.d,):
        raise ConfigError(f"probe: must have {cfg.d} coordinates")
    if cfg.experiment in ("edges", "ks", "lebesgue", "independence") and cfg.d != 2:
        raise ConfigError(f"d: experiment {cfg.experiment} runs in d=2 only")
    if cfg.experiment in ("diameter-tail", "moments") and cfg.d not in (1, 2):
        raise ConfigError(f"d: experiment {cfg.experiment} runs in d=1 or d=2")
    if cfg.experiment == "moments" and cfg.k not in (1, 2):
        raise ConfigError("k: the moment experiment supports k=1 or k=2")
    if cfg.experiment == "independence":
        if cfg.probes is None or np.shape(cfg.probes) != (2, cfg.d):
            raise ConfigError("probes: need exactly two probe points")
        p = cfg.probe_points()
        if np.array_equal(p[0], p[1]):
            raise ConfigError("probes: the two probes coincide")
        points = p
    else:
        points = cfg.probe_point()[None, :]
    if cfg.experiment != "dk-sample":
        vals = dens.pdf(points)
        if np.any(vals <= 0):
            raise ConfigError("probe: the density must be positive at every probe")
    return cfg


def load_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def parse_config(path=None, overrides: dict | None = None, env: dict | None = None) -> RunConfig:
    """Merge defaults, the optional JSON file and flag overrides, then validate.

    Precedence, lowest first: built-in defaults, per-experiment defaults,
    the file, flags. The output directory additionally honours the
    ``VORONOI_LIMITS_OUT`` environment variable, below ``--out``.
    """
    file_data = load_file(path) if path is not None else {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    for source, data in (("config file", file_data), ("flags", overrides)):
        unknown = sorted(set(data) - set(FIELD_NAMES))
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown key in {source}")
    experiment = overrides.get("experiment", file_data.get("experiment"))
    if experiment is None:
        raise ConfigError("experiment: missing")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    merged = dict(EXPERIMENT_DEFAULTS[experiment])
    merged.update(file_data)
    env = env if env is not None else {}
    if env.get(OUT_ENV):
        merged["out"] = env[OUT_ENV]
    merged.update(overrides)
    if "seed" not in merged:
        raise ConfigError("seed: missing; every run needs an explicit seed")
    return validate(RunConfig(**merged))
