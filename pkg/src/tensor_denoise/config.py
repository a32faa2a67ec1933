"""Run configuration: defaults < config file < command-line overrides.

The config file is flat ``key = value`` text; ``#`` starts a comment and
list values are comma separated.  Overrides on the command line use the
same ``key=value`` form.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, get_type_hints

from .formats import FormatKind, tt_rank_caps

COMMANDS = ("sweep-dim", "sweep-rank", "verify-theory", "steering", "calibrate-mu", "fit")
THREADS_ENV = "TENSOR_DENOISE_THREADS"


class ConfigError(ValueError):
    pass


# Rank-sweep shapes (all with 2^12 elements) and rank lists per format.
_RANK_DEFAULTS = {
    FormatKind.CANONICAL: ((16, 16, 16), list(range(1, 9))),
    FormatKind.TENSOR_TRAIN: ((4,) * 6, list(range(1, 9))),
    FormatKind.TUCKER: ((8,) * 4, list(range(1, 5))),
}


@dataclass
class RunConfig:
    command: str = "sweep-dim"
    seed: int = 0
    seeds: int = 20
    out: str = "tensor-denoise-out"
    plots: bool = False
    workers: int = 1
    # dimension sweep / calibration
    M_exponent: int = 12
    d_list: list[int] = field(default_factory=list)
    ratios: list[float] = field(default_factory=lambda: [0.1])
    multigrid: bool = True
    knorm_restarts: int = 0
    coverage: float = 0.95
    # rank sweep
    format: str = "cp"
    shape: list[int] = field(default_factory=list)
    ranks: list[int] = field(default_factory=list)
    ratio: float = 0.1
    # ALS
    max_sweeps: int = 200
    rel_tol: float = 1e-8
    restarts: int = 0
    # theory / steering / fit
    trials: int = 1000
    steering_M: int = 256
    steering_d: int = 4
    points: list[str] = field(default_factory=list)
    input: str = ""

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def echo(self) -> dict[str, Any]:
        """Settings that determine the results (output location and plotting do not)."""
        out = self.to_dict()
        for key in ("out", "plots"):
            out.pop(key)
        return out


_TYPES = get_type_hints(RunConfig)


def _convert(key: str, raw: str) -> Any:
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        if kind in (int, float, str):
            return kind(raw)
        item = kind.__args__[0]
        return [item(v.strip()) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_pairs(pairs) -> dict[str, Any]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"expected key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = _convert(key.strip(), value)
    return out


def read_config_file(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    return parse_pairs(ln for ln in lines if ln)


def build_config(command: str, file: str | None = None, overrides: dict | None = None
                 ) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    values = read_config_file(file) if file else {}
    values.update(overrides or {})
    values["command"] = command
    cfg = RunConfig(**values)
    fill_defaults(cfg)
    validate(cfg)
    return cfg


def fill_defaults(cfg: RunConfig) -> None:
    try:
        kind = FormatKind.parse(cfg.format)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    shape, ranks = _RANK_DEFAULTS[kind]
    if not cfg.shape:
        cfg.shape = list(shape)
    if not cfg.ranks:
        cfg.ranks = list(ranks)
    if cfg.command == "calibrate-mu" and cfg.knorm_restarts == 0:
        cfg.knorm_restarts = 1


def validate(cfg: RunConfig) -> None:
    if cfg.seeds < 1:
        raise ConfigError("seeds must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.M_exponent < 1:
        raise ConfigError("M_exponent must be >= 1")
    bad = [d for d in cfg.d_list if d < 2 or cfg.M_exponent % d]
    if bad:
        raise ConfigError(f"d values {bad} do not divide M_exponent = {cfg.M_exponent}")
    if any(r < 0 for r in cfg.ratios) or cfg.ratio <= 0:
        raise ConfigError("noise ratios must be >= 0 (ratio > 0 for rank sweeps)")
    if any(m < 1 for m in cfg.shape):
        raise ConfigError("shape entries must be >= 1")
    if any(b <= a for a, b in zip(cfg.ranks, cfg.ranks[1:])) or min(cfg.ranks) < 1:
        raise ConfigError("ranks must be positive and strictly ascending")
    if cfg.command == "sweep-rank":
        if len(cfg.ranks) < 3:
            raise ConfigError("sweep-rank needs at least 3 ranks")
        kind = FormatKind.parse(cfg.format)
        limit = {FormatKind.CANONICAL: int(_prod(cfg.shape)) // max(cfg.shape),
                 FormatKind.TUCKER: min(cfg.shape),
                 FormatKind.TENSOR_TRAIN: max(tt_rank_caps(cfg.shape, int(_prod(cfg.shape))))}[kind]
        if max(cfg.ranks) > limit:
            raise ConfigError(f"rank {max(cfg.ranks)} not representable for {kind.value} "
                              f"shape {cfg.shape} (limit {limit})")
    if not 0 < cfg.coverage < 1:
        raise ConfigError("coverage must lie in (0, 1)")
    if cfg.max_sweeps < 1 or cfg.rel_tol <= 0 or cfg.restarts < 0 or cfg.trials < 1:
        raise ConfigError("ALS settings and trial counts must be positive")
    m = round(cfg.steering_M ** (1.0 / cfg.steering_d)) if cfg.steering_d >= 1 else 0
    if cfg.steering_d < 1 or m ** cfg.steering_d != cfg.steering_M:
        raise ConfigError(f"steering_M = {cfg.steering_M} is not a steering_d-th power")


def _prod(values) -> int:
    out = 1
    for v in values:
        out *= int(v)
    return out


def worker_count(cfg: RunConfig) -> int:
    """``cfg.workers`` capped by the thread-count environment variable."""
    cap = os.environ.get(THREADS_ENV)
    if cap is None or not cap.strip():
        return cfg.workers
    try:
        n = int(cap)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return min(cfg.workers, n)
