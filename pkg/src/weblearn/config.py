"""Run configuration: one JSON document mirroring every module config.

Unknown keys are rejected so config drift fails loudly; ``schema_json``
prints the full default document (the authoritative record of defaults).
"""

from __future__ import annotations

import dataclasses
import json

from weblearn.curriculum import MatchConfig
from weblearn.errors import ConfigError
from weblearn.lda import LdaConfig
from weblearn.learners import FitConfig
from weblearn.spl import AgeSchedule, RegularizerSpec
from weblearn.synth import SynthConfig
from weblearn.training import TrainOptions

SECTIONS = {
    "match": MatchConfig,
    "lda": LdaConfig,
    "learner": FitConfig,
    "regularizer": RegularizerSpec,
    "schedule": AgeSchedule,
    "train": TrainOptions,
    "synth": SynthConfig,
}


@dataclasses.dataclass
class RunConfig:
    match: MatchConfig = dataclasses.field(default_factory=MatchConfig)
    lda: LdaConfig = dataclasses.field(default_factory=LdaConfig)
    learner: FitConfig = dataclasses.field(default_factory=FitConfig)
    regularizer: RegularizerSpec = dataclasses.field(default_factory=RegularizerSpec)
    schedule: AgeSchedule = dataclasses.field(default_factory=AgeSchedule)
    train: TrainOptions = dataclasses.field(default_factory=TrainOptions)
    synth: SynthConfig = dataclasses.field(default_factory=SynthConfig)
    seed: int = 0

    def to_dict(self) -> dict:
        out: dict = {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}
        out["seed"] = self.seed
        return out


def _section_from_dict(cls, name: str, payload: dict):
    field_names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(payload) - field_names
    if unknown:
        raise ConfigError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    return cls(**payload)


def run_config_from_dict(payload: dict) -> RunConfig:
    unknown = set(payload) - set(SECTIONS) - {"seed"}
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    kwargs = {}
    for name, cls in SECTIONS.items():
        section = payload.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"config section {name!r} must be an object")
        kwargs[name] = _section_from_dict(cls, name, section)
    seed = payload.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return RunConfig(seed=seed, **kwargs)


def run_config_from_file(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return run_config_from_dict(payload)


def schema_json() -> str:
    """The default configuration document with every key present."""
    return json.dumps(RunConfig().to_dict(), sort_keys=True, indent=2)
