"""Flat ``key = value`` scenario configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

SCENARIOS = ("sweep-r", "modes", "equilibrium", "validate")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "sweep-r"
    m_nodes: int = 2
    # per-node arrival rate; network load for sweep-r / equilibrium is m_nodes * lambda
    lambda_: float = 1.6
    alpha: float = 0.2
    q: float = 1.53
    probing_rate: float = 1.0
    k: int = 4
    r_max: int = 16
    erasure_prob: float = 0.4
    backoff_window: int = 4
    slots: int = 20_000
    seed: int = 1
    load_grid: tuple[float, ...] = (2.0, 2.4, 2.8, 3.2, 3.6, 4.0)
    model_variant: str = "literal"
    evaluator: str = "analytic"
    max_iters: int = 50
    tolerance: float = 1e-12
    random_r_offset: int = 3
    replications: int = 1
    # simulated network arrival rate (original packets / slot) = load * sim_load_scale
    sim_load_scale: float = 0.08
    mc_trials: int = 1_000_000
    output_dir: Path = field(default=Path("results"), compare=False)
    emit_svg: bool = field(default=False, compare=False)


_KEY_TO_FIELD = {f.name.rstrip("_"): f for f in fields(ScenarioConfig) if f.name not in ("output_dir", "emit_svg")}
KEYS = tuple(_KEY_TO_FIELD)

# (predicate, description) per key
_RANGES = {
    "scenario": (lambda v: v in SCENARIOS, f"one of {', '.join(SCENARIOS)}"),
    "m_nodes": (lambda v: v >= 1, ">= 1"),
    "lambda": (lambda v: v >= 0, ">= 0"),
    "alpha": (lambda v: v > 0, "> 0"),
    "q": (lambda v: v > 0, "> 0"),
    "probing_rate": (lambda v: v > 0, "> 0"),
    "k": (lambda v: v >= 1, ">= 1"),
    "r_max": (lambda v: v >= 0, ">= 0"),
    "erasure_prob": (lambda v: 0 <= v <= 1, "in [0, 1]"),
    "backoff_window": (lambda v: v >= 1, ">= 1"),
    "slots": (lambda v: v >= 1, ">= 1"),
    "seed": (lambda v: 0 <= v < 2**64, "in [0, 2^64)"),
    "load_grid": (lambda v: len(v) > 0 and all(x >= 0 for x in v), "nonempty, all >= 0"),
    "model_variant": (lambda v: v in ("literal", "swapped"), "literal or swapped"),
    "evaluator": (lambda v: v in ("analytic", "simulated"), "analytic or simulated"),
    "max_iters": (lambda v: v >= 1, ">= 1"),
    "tolerance": (lambda v: v >= 0, ">= 0"),
    "random_r_offset": (lambda v: v >= 1, ">= 1"),
    "replications": (lambda v: v >= 1, ">= 1"),
    "sim_load_scale": (lambda v: v > 0, "> 0"),
    "mc_trials": (lambda v: v >= 1, ">= 1"),
}


def _convert(key: str, raw: str):
    kind = _KEY_TO_FIELD[key].type
    if kind == "int":
        return int(raw, 0)
    if kind == "float":
        return float(raw)
    if key == "load_grid":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    return raw


def check(cfg: ScenarioConfig, line_of: dict[str, int] | None = None) -> ScenarioConfig:
    line_of = line_of or {}
    for key, (ok, desc) in _RANGES.items():
        value = getattr(cfg, _KEY_TO_FIELD[key].name)
        if not ok(value):
            raise ConfigError(f"{key} = {value!r} out of range (expected {desc})", line_of.get(key), key)
    if cfg.k + cfg.r_max > 256:
        raise ConfigError("k + r_max exceeds 256", line_of.get("r_max"), "r_max")
    return cfg


def parse_config(text: str) -> ScenarioConfig:
    values = {}
    line_of = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, key)
        try:
            values[_KEY_TO_FIELD[key].name] = _convert(key, raw)
        except ValueError:
            raise ConfigError(f"cannot parse value {raw!r} for {key}", lineno, key) from None
        line_of[key] = lineno
    return check(ScenarioConfig(**values), line_of)


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def serialize(cfg: ScenarioConfig) -> str:
    lines = []
    for key, f in _KEY_TO_FIELD.items():
        value = getattr(cfg, f.name)
        if key == "load_grid":
            value = ", ".join(repr(float(x)) for x in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: ScenarioConfig, **kw) -> ScenarioConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return check(replace(cfg, **kw))
