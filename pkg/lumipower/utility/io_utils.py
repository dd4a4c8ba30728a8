import dataclasses
import os

import yaml


def _plain(value):
    """Tuples and numpy scalars to YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return value.item()
    return value


class DataclassYamlSaveLoadMixin:
    """
    YAML (de)serialization for flat configuration dataclasses.
    Dataclasses are expected to coerce lists back to tuples in `__post_init__`.
    """

    def to_dict(self) -> dict:
        return {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, data: dict):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise KeyError(f"Unknown fields for {cls.__name__}: {sorted(unknown)}")
        return cls(**data)

    def to_yaml_str(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml_str(cls, text: str):
        return cls.from_dict(yaml.safe_load(text) or {})

    @classmethod
    def from_yaml(cls, file_path: str):
        """
        Load current dataclass from a yaml file.
        """
        if not os.path.exists(file_path):
            raise FileNotFoundError(f"File not found: {file_path}")
        with open(file_path, "r", encoding="utf-8") as file:
            return cls.from_yaml_str(file.read())

    def to_yaml(self, file_path: str):
        """
        Save current dataclass to a yaml file.
        """
        with open(file_path, "w", encoding="utf-8") as file:
            file.write(self.to_yaml_str())
