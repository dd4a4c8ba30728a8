import os
from pathlib import Path
from typing import Dict, List

import h5py
import numpy as np
import pandas as pd

from lumipower.errors import DataError
from lumipower.utility.logging import get_script_logger

from .cross_validation import CrossValidationResult
from .metrics import SAMPLE_COLUMNS, EvalSummary

STORE_NAME = "cv_store.h5"


def raise_if_outside_context(method):  # pragma: no cover
    def decorator(self, *args, **kwargs):
        if self._file is None:
            raise RuntimeError("This method should be called from inside context.")
        return method(self, *args, **kwargs)

    return decorator


class CrossValidationStore:
    """
    HDF5 store of a cross-validation run:

        /variants/<name>/samples/<column>     per-sample predictions
        /variants/<name>/maps/sample_<index>  held-out regression map
        attrs["config"]                       canonical run configuration

    Use as a context manager; `mode` follows h5py.
    """

    def __init__(self, path: str | Path, mode: str = "r"):
        self.path = Path(path)
        self.mode = mode
        self._file = None
        self.logger = get_script_logger(os.path.basename(__file__))

    def __enter__(self):
        if self.mode == "r" and not self.path.exists():
            raise FileNotFoundError(f"Cross-validation store not found: {self.path}")
        self._file = h5py.File(self.path, self.mode)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self._file.close()
        self._file = None

    @raise_if_outside_context
    def write_result(self, result: CrossValidationResult, config_text: str = ""):
        self._file.attrs["config"] = config_text
        for name, summary in result.summaries.items():
            group = self._file.require_group(f"/variants/{name}")
            if "samples" in group:
                del group["samples"]
            samples = group.create_group("samples")
            for column in summary.samples.columns:
                values = summary.samples[column].to_numpy()
                if values.dtype == object:
                    values = values.astype("S")
                samples.create_dataset(column, data=values)
            for index, regression_map in result.maps.get(name, {}).items():
                maps = group.require_group("maps")
                dataset = maps.require_dataset(
                    f"sample_{index:04d}", shape=regression_map.shape, dtype=np.float64
                )
                dataset[...] = regression_map.values
        self.logger.debug(f"stored {len(result.summaries)} variants in {self.path}")

    @property
    @raise_if_outside_context
    def config_text(self) -> str:
        value = self._file.attrs.get("config", "")
        return value.decode("utf-8") if isinstance(value, bytes) else str(value)

    @raise_if_outside_context
    def variants(self) -> List[str]:
        return sorted(self._file.get("variants", {}).keys())

    @raise_if_outside_context
    def load_summary(self, variant: str) -> EvalSummary:
        if f"/variants/{variant}/samples" not in self._file:
            raise DataError(f"Variant {variant!r} not in {self.path}")
        samples = self._file[f"/variants/{variant}/samples"]
        data = {}
        for column in samples:
            values = samples[column][...]
            data[column] = values.astype(str) if values.dtype.kind == "S" else values
        ordered = SAMPLE_COLUMNS + sorted(set(data) - set(SAMPLE_COLUMNS))
        return EvalSummary(variant, pd.DataFrame(data, columns=ordered))

    @raise_if_outside_context
    def load_maps(self, variant: str) -> Dict[int, np.ndarray]:
        group = self._file.get(f"/variants/{variant}/maps")
        if group is None:
            return {}
        return {int(key.split("_")[1]): group[key][...] for key in group}
