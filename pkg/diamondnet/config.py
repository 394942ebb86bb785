"""Configuration management."""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

import yaml

from diamondnet.models import Config

logger = logging.getLogger(__name__)


def load_config(config_path: Optional[Path] = None) -> Config:
    """Load configuration from YAML file."""
    if config_path is None:
        config_path = Path("diamondnet.yaml")

    if not config_path.exists():
        # Return default config
        return Config()

    with open(config_path) as f:
        data = yaml.safe_load(f) or {}

    logger.info(f"Loaded settings from {config_path}")
    return Config(**data)


@lru_cache(maxsize=1)
def default_config() -> Config:
    """Defaults (plus DIAMONDNET_* environment overrides), built once per process."""
    return Config()


def resolve_config(config: Optional[Config]) -> Config:
    return default_config() if config is None else config
