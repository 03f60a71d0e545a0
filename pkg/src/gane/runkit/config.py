"""Run configuration and its flat ``key = value`` file format.

Grammar: one ``key = value`` pair per line; ``#`` starts a comment running
to the end of the line and blank lines are ignored; keys are :class:`RunConfig` field names; booleans
are ``true``/``false``. Unknown keys are an error.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from ..envs import get_spec

__all__ = ["RunConfig", "ConfigError", "parse_config", "load_config", "OUTPUT_ROOT_ENV"]

OUTPUT_ROOT_ENV = "GANE_OUTPUT_ROOT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    env: str = "CartPole"
    population_size: int = 64
    generations: int = 300
    sigma: float = 0.1
    run_seed: int = 0
    holdout_seed_count: int = 10
    eval_every: int = 10
    matches_per_agent: int = 1
    elite_unmutated: bool = False
    checkpoint_every: int = 50
    output_dir: str = "runs/default"

    def __post_init__(self):
        try:
            spec = get_spec(self.env)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "env", spec.name)
        if self.population_size < 2 or self.population_size % 2:
            raise ConfigError("population_size must be even and >= 2")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.holdout_seed_count < 1:
            raise ConfigError("holdout_seed_count must be >= 1")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        if self.matches_per_agent < 1:
            raise ConfigError("matches_per_agent must be >= 1")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0 (0 disables)")
        if self.run_seed < 0:
            raise ConfigError("run_seed must be >= 0")
        if any(c in self.output_dir for c in "#\n\r"):
            raise ConfigError("output_dir may not contain '#' or line breaks")

    def with_overrides(self, pairs) -> "RunConfig":
        """Apply ``key=value`` strings (CLI ``--override``)."""
        updates = {}
        for pair in pairs:
            if "=" not in pair:
                raise ConfigError(f"override {pair!r} is not key=value")
            key, value = (s.strip() for s in pair.split("=", 1))
            updates[key] = _coerce(key, value)
        return dataclasses.replace(self, **updates)

    def resolved_output_dir(self) -> Path:
        path = Path(self.output_dir)
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not path.is_absolute():
            path = Path(root) / path
        return path

    def payload_dict(self) -> dict:
        """Fields that define the computation (output location excluded)."""
        d = dataclasses.asdict(self)
        d.pop("output_dir")
        return d

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str):
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _TYPES[key]
    try:
        if kind == "bool":
            low = value.lower()
            if low not in ("true", "false"):
                raise ValueError
            return low == "true"
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value {value!r} for {key} ({kind})") from None
    return value


def parse_config(text: str) -> RunConfig:
    """Parse the flat config grammar.

    One ``key = value`` per line; ``#`` starts a comment that runs to the
    end of the line; blank lines are ignored. Unknown or repeated keys are
    errors, and omitted keys take their defaults.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.partition("#")[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, value)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
