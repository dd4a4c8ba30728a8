__doc__ = """
Run configuration: one INI file (``key : value``) whose sections map onto the
configuration dataclasses. ``${section:key}`` references are interpolated.
"""

import dataclasses
import typing
from configparser import Error as ConfigParserError
from dataclasses import dataclass, field
from pathlib import Path

from lumipower.data.config import DataConfig
from lumipower.errors import ConfigError
from lumipower.evaluation.config import CrossValidationConfig
from lumipower.model.spec import ModelSpec
from lumipower.synth.config import SyntheticModuleConfig
from lumipower.training.config import TrainConfig
from lumipower.utility.load_config import load_config, parse_config

SECTIONS = {
    "MODEL": ("model", ModelSpec),
    "TRAIN": ("train", TrainConfig),
    "DATA": ("data", DataConfig),
    "SYNTH": ("synth", SyntheticModuleConfig),
    "CV": ("cv", CrossValidationConfig),
}

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_value(text: str, annotation, where: str):
    text = text.strip()
    origin = typing.get_origin(annotation)
    try:
        if origin is tuple:
            (item_type, *_) = typing.get_args(annotation)
            return tuple(_parse_value(part, item_type, where) for part in text.split(",") if part.strip())
        if annotation is bool:
            lowered = text.lower()
            if lowered not in _TRUE | _FALSE:
                raise ValueError(f"not a boolean: {text!r}")
            return lowered in _TRUE
        if annotation is int:
            return int(text)
        if annotation is float:
            return float(text)
    except ValueError as err:
        raise ConfigError(f"{where}: {err}") from err
    return text


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class RunConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)
    synth: SyntheticModuleConfig = field(default_factory=SyntheticModuleConfig)
    cv: CrossValidationConfig = field(default_factory=CrossValidationConfig)

    @classmethod
    def from_parser(cls, config) -> "RunConfig":
        unknown_sections = [s for s in config.sections() if s not in SECTIONS]
        if unknown_sections:
            raise ConfigError(f"Unknown configuration sections {unknown_sections}; expected {list(SECTIONS)}")
        defaults = set(config.defaults())
        parts = {}
        for section, (attribute, schema) in SECTIONS.items():
            hints = typing.get_type_hints(schema)
            names = [f.name for f in dataclasses.fields(schema)]
            values = {}
            if config.has_section(section):
                for key in config[section]:
                    if key not in names:
                        if key in defaults:
                            continue
                        raise ConfigError(f"Unknown key {key!r} in [{section}]; expected one of {names}")
                    try:
                        raw = config[section][key]
                    except ConfigParserError as err:
                        raise ConfigError(f"[{section}] {key}: {err}") from err
                    values[key] = _parse_value(raw, hints[key], f"[{section}] {key}")
            parts[attribute] = schema(**values)
        return cls(**parts)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        try:
            parser = parse_config(text)
        except ConfigParserError as err:
            raise ConfigError(f"Malformed configuration: {err}") from err
        return cls.from_parser(parser)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            parser = load_config(path)
        except ConfigParserError as err:
            raise ConfigError(f"Malformed configuration {path}: {err}") from err
        return cls.from_parser(parser)

    @classmethod
    def from_echo(cls, echo: dict, model: ModelSpec | None = None) -> "RunConfig":
        """Rebuild from a checkpoint echo; sections it lacks keep their defaults."""
        parts = {}
        for attribute, schema in SECTIONS.values():
            if isinstance(echo.get(attribute), dict):
                try:
                    parts[attribute] = schema.from_dict(echo[attribute])
                except (KeyError, TypeError) as err:
                    raise ConfigError(f"Invalid {attribute} echo: {err}") from err
        if model is not None:
            parts["model"] = model
        return cls(**parts)

    def to_ini(self) -> str:
        """Canonical serialization: schema order, every key, canonical values."""
        lines = []
        for section, (attribute, schema) in SECTIONS.items():
            part = getattr(self, attribute)
            lines.append(f"[{section}]")
            width = max(len(f.name) for f in dataclasses.fields(schema))
            for f in dataclasses.fields(schema):
                lines.append(f"{f.name:<{width}} : {_format_value(getattr(part, f.name))}")
            lines.append("")
        return "\n".join(lines)

    def echo(self) -> dict:
        """Plain-dict form stored inside checkpoints."""
        return {attribute: getattr(self, attribute).to_dict() for attribute, _ in SECTIONS.values()}
