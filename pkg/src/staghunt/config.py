"""TOML run configuration: one table per component, CLI flags override."""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .arena import ArenaConfig, GridMap
from .dqn.training import TrainConfig
from .lidar import DetectionConfig
from .rewards import RewardConfig

SECTIONS = {
    "arena": ArenaConfig,
    "reward": RewardConfig,
    "train": TrainConfig,
    "detection": DetectionConfig,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    arena: dict = field(default_factory=dict)
    reward: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    detection: dict = field(default_factory=dict)

    def override(self, section: str, **values) -> None:
        getattr(self, section).update({k: v for k, v in values.items() if v is not None})

    def arena_config(self) -> ArenaConfig:
        return ArenaConfig(**self.arena)

    def reward_config(self, grid: GridMap) -> RewardConfig:
        kw = dict(self.reward)
        kw.setdefault("beta", float(grid.width + grid.height))
        kw.setdefault("attack_range", self.arena_config().attack_range)
        return RewardConfig(**kw)

    def train_config(self) -> TrainConfig:
        return TrainConfig(**self.train)

    def detection_config(self) -> DetectionConfig:
        return DetectionConfig(**self.detection)


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    cfg = RunConfig()
    for section, values in data.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]; expected one of {sorted(SECTIONS)}")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        known = {f.name for f in dataclasses.fields(SECTIONS[section])}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"[{section}] unknown keys: {sorted(unknown)}")
        getattr(cfg, section).update(values)
    return cfg


def load_config(path=None) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        return parse_config(fh.read())
