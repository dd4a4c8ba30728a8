__doc__ = """
Load `lumipower.ini` run-configuration files
"""

import os
from configparser import ConfigParser, ExtendedInterpolation
from pathlib import Path

__all__ = ["load_config", "parse_config"]


def parse_config(text: str) -> ConfigParser:
    """Parse configuration text; `${section:key}` references are interpolated."""
    config = ConfigParser(interpolation=ExtendedInterpolation())
    config.read_string(text)
    return config


def load_config(path: str | Path = "lumipower.ini") -> ConfigParser:
    """
    Load `lumipower.ini` file
    """
    if isinstance(path, Path):
        path = path.as_posix()
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"Configuration file {path} is missing. Please copy the configuration template "
            "(template/lumipower.ini) from the repository."
        )
    with open(path, "r", encoding="utf-8") as file:
        return parse_config(file.read())
