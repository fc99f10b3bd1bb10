"""
Run configuration.

Files are flat ``section.key = value`` lines; ``#`` starts a comment and list values
are comma-separated. Example:

    capacity_pages = 800
    policies = lru, larc, access, belady, rcrnn
    paths.trace = results/traces/mail.csv
    train.epochs = 20
    models.cache.MailServer = results/models/mail.npz
"""
from __future__ import annotations
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional

from src.device.latency import DeviceModel
from src.engine.simulate import POLICIES
from src.nn.optim import TrainConfig
from src.traces.trace import WorkloadCategory


class ConfigError(ValueError):
    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _opt_float(raw: str) -> Optional[float]:
    return None if raw.strip().lower() in ("", "none") else float(raw)


def _opt_int(raw: str) -> Optional[int]:
    return None if raw.strip().lower() in ("", "none") else int(raw)


def _opt_path(raw: str) -> Optional[Path]:
    return None if raw.strip().lower() in ("", "none") else Path(raw.strip())


@dataclass
class PathsConfig:
    trace: Optional[Path] = None
    labeled: Optional[Path] = None
    reports: Path = Path("results/reports")


@dataclass
class TrainSettings:
    learning_rate: float = 0.001
    rho: float = 0.9
    epsilon: float = 1e-7
    batch_size: int = 32
    epochs: int = 10
    clip_norm: Optional[float] = 5.0
    hidden: Optional[int] = None     # None: the model kind's default
    layers: Optional[int] = None
    window: int = 100

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(self.learning_rate, self.rho, self.epsilon, self.batch_size,
                           self.epochs, seed, self.clip_norm)


@dataclass
class SimulateSettings:
    monitor_every: int = 1000
    window_series: bool = True
    inference_overhead_ms: float = 0.0
    one_shot_demotion: bool = False


@dataclass
class ModelPaths:
    characterizer: Optional[Path] = None
    cache: Optional[Path] = None
    per_category: Dict[WorkloadCategory, Path] = field(default_factory=dict)


@dataclass
class RunConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    capacity_pages: Optional[int] = None
    seed: int = 0
    policies: List[str] = field(default_factory=lambda: ["lru", "larc", "access", "belady"])
    device: DeviceModel = field(default_factory=DeviceModel)
    train: TrainSettings = field(default_factory=TrainSettings)
    simulate: SimulateSettings = field(default_factory=SimulateSettings)
    models: ModelPaths = field(default_factory=ModelPaths)


_CONVERT: Dict[str, Callable[[str], object]] = {
    "paths.trace": _opt_path,
    "paths.labeled": _opt_path,
    "paths.reports": lambda s: Path(s.strip()),
    "train.learning_rate": float,
    "train.rho": float,
    "train.epsilon": float,
    "train.batch_size": int,
    "train.epochs": int,
    "train.clip_norm": _opt_float,
    "train.hidden": _opt_int,
    "train.layers": _opt_int,
    "train.window": int,
    "simulate.monitor_every": int,
    "simulate.window_series": _bool,
    "simulate.inference_overhead_ms": float,
    "simulate.one_shot_demotion": _bool,
    "models.characterizer": _opt_path,
    "models.cache": _opt_path,
}
_CONVERT.update({f"device.{f.name}": float for f in fields(DeviceModel)})


def set_value(cfg: RunConfig, key: str, raw: str) -> None:
    key = key.strip()
    try:
        if key == "capacity_pages":
            cfg.capacity_pages = _opt_int(raw)
        elif key == "seed":
            cfg.seed = int(raw)
        elif key == "policies":
            cfg.policies = [p.strip() for p in raw.split(",") if p.strip()]
        elif key.startswith("models.cache."):
            name = key.split(".", 2)[2]
            cfg.models.per_category[WorkloadCategory[name]] = Path(raw.strip())
        elif key in _CONVERT:
            section, attr = key.split(".", 1)
            value = _CONVERT[key](raw)
            if section == "device":
                cfg.device = replace(cfg.device, **{attr: value})
            elif section == "models":
                setattr(cfg.models, attr, value)
            else:
                setattr(getattr(cfg, section), attr, value)
        else:
            raise ConfigError("unknown key", key)
    except ConfigError:
        raise
    except KeyError as e:
        raise ConfigError(f"unknown workload category {e.args[0]!r}", key) from None
    except ValueError as e:
        raise ConfigError(str(e), key) from None


def parse_config_text(text: str, cfg: Optional[RunConfig] = None) -> RunConfig:
    cfg = cfg or RunConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value'")
        key, value = line.split("=", 1)
        set_value(cfg, key, value.strip())
    return cfg


def load_config(path: Path | str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", "--config") from None
    return parse_config_text(text)


def apply_overrides(cfg: RunConfig, overrides: Iterable[str]) -> RunConfig:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}", "--set")
        key, value = item.split("=", 1)
        set_value(cfg, key, value)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.capacity_pages is not None and cfg.capacity_pages < 1:
        raise ConfigError("must be ≥ 1", "capacity_pages")
    if not cfg.policies:
        raise ConfigError("at least one policy required", "policies")
    for p in cfg.policies:
        if p not in POLICIES:
            raise ConfigError(f"unknown policy {p!r}; expected one of {', '.join(POLICIES)}", "policies")
    if cfg.train.window < 1:
        raise ConfigError("must be ≥ 1", "train.window")
    try:
        cfg.train.train_config(cfg.seed)
    except ValueError as e:
        raise ConfigError(str(e), "train") from None
    if cfg.simulate.monitor_every < 100 or cfg.simulate.monitor_every % 100:
        raise ConfigError("must be a positive multiple of 100", "simulate.monitor_every")
    if cfg.simulate.inference_overhead_ms < 0:
        raise ConfigError("must be ≥ 0", "simulate.inference_overhead_ms")
    if "rcrnn" in cfg.policies and cfg.models.cache is None and not cfg.models.per_category:
        raise ConfigError("policy rcrnn needs a trained cache model", "models.cache")
    for key, path in _model_paths(cfg).items():
        if not path.exists():
            raise ConfigError(f"model file not found: {path}", key)


def _model_paths(cfg: RunConfig) -> Dict[str, Path]:
    out: Dict[str, Path] = {}
    if cfg.models.characterizer is not None:
        out["models.characterizer"] = cfg.models.characterizer
    if cfg.models.cache is not None:
        out["models.cache"] = cfg.models.cache
    for cat, path in cfg.models.per_category.items():
        out[f"models.cache.{cat.name}"] = path
    return out
