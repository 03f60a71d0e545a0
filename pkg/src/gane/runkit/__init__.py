"""Configuration, run loop, checkpoints and the command-line harness."""

from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, payload_digest, save_checkpoint
from .config import ConfigError, RunConfig, load_config, parse_config
from .runner import RunError, evaluate_checkpoint, export_figures_data, resume, run

__all__ = [
    "Checkpoint",
    "CheckpointError",
    "ConfigError",
    "RunConfig",
    "RunError",
    "evaluate_checkpoint",
    "export_figures_data",
    "load_checkpoint",
    "load_config",
    "parse_config",
    "payload_digest",
    "resume",
    "run",
    "save_checkpoint",
]
