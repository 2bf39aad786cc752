"""Experiment configuration dataclasses and TOML parsing.

The config file is one TOML document with sections [scenario], [channel],
[codebook], [solver], [baselines], and [experiment]; unknown keys anywhere
are an error.
"""
from __future__ import annotations

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, fields
from pathlib import Path

from .baselines import BaselineParams
from .channel import ChannelParams
from .solver import SolverConfig

VALID_METHODS = ("pr_lrtc", "lrtc", "pr_only", "knn", "kriging")


class ConfigError(ValueError):
    """Malformed configuration document."""


@dataclass(frozen=True)
class ScenarioConfig:
    width_m: float = 50.0
    height_m: float = 50.0
    grid_rows: int = 50
    grid_cols: int = 50
    bs_position: tuple = (25.0, 25.0)
    n_obstacles: int = 3
    obstacle_width_m: float = 8.0
    obstacle_height_m: float = 8.0
    fixed_obstacles: tuple = ()            # rows (xmin, ymin, xmax, ymax)
    mask_obstacle_interiors: bool = False  # exclude obstacle-interior cells from sampling


@dataclass(frozen=True)
class CodebookConfig:
    n_modes: int = 12
    eadof: int = 7
    target_corr: float = 0.96
    peak_gain_dbi: float = 7.14


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    channel: ChannelParams = ChannelParams()
    codebook: CodebookConfig = CodebookConfig()
    solver: SolverConfig = SolverConfig()
    baselines: BaselineParams = BaselineParams()
    noise_sigma: float = 0.0
    ratios: tuple = (0.05, 0.10, 0.15, 0.20)
    seeds: tuple = (0, 1, 2, 3, 4)
    methods: tuple = VALID_METHODS
    out_dir: str = "results"
    record_timing: bool = True

    def __post_init__(self):
        if not self.ratios or not self.seeds or not self.methods:
            raise ConfigError("ratios, seeds, and methods must be non-empty")
        bad = [m for m in self.methods if m not in VALID_METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; valid: {VALID_METHODS}")


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _build(cls, table: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(table) - known)
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {unknown}")
    try:
        return cls(**{k: _freeze(v) for k, v in table.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [{section}] section: {exc}") from exc


_SECTIONS = {
    "scenario": ScenarioConfig,
    "channel": ChannelParams,
    "codebook": CodebookConfig,
    "solver": SolverConfig,
    "baselines": BaselineParams,
}
_EXPERIMENT_KEYS = ("noise_sigma", "ratios", "seeds", "methods",
                    "out_dir", "record_timing")


def load_experiment_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    unknown = sorted(set(doc) - set(_SECTIONS) - {"experiment"})
    if unknown:
        raise ConfigError(f"unknown top-level sections: {unknown}")
    parts = {name: _build(cls, doc.get(name, {}), name)
             for name, cls in _SECTIONS.items()}
    exp = doc.get("experiment", {})
    bad = sorted(set(exp) - set(_EXPERIMENT_KEYS))
    if bad:
        raise ConfigError(f"unknown keys in [experiment]: {bad}")
    return ExperimentConfig(**parts, **{k: _freeze(v) for k, v in exp.items()})


def default_experiment_config(**overrides) -> ExperimentConfig:
    from dataclasses import replace
    return replace(ExperimentConfig(), **overrides) if overrides else ExperimentConfig()


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)} to TOML")


def dump_experiment_config(config: ExperimentConfig) -> str:
    """Render a config back to its TOML document form."""
    lines = []
    for name, sub in (("scenario", config.scenario), ("channel", config.channel),
                      ("codebook", config.codebook), ("solver", config.solver),
                      ("baselines", config.baselines)):
        lines.append(f"[{name}]")
        for f in fields(sub):
            lines.append(f"{f.name} = {_toml_value(getattr(sub, f.name))}")
        lines.append("")
    lines.append("[experiment]")
    for key in _EXPERIMENT_KEYS:
        lines.append(f"{key} = {_toml_value(getattr(config, key))}")
    return "\n".join(lines) + "\n"


def save_experiment_config(path, config: ExperimentConfig) -> None:
    Path(path).write_text(dump_experiment_config(config), encoding="utf-8")
