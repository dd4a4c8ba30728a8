import os
import pathlib
from dataclasses import replace

import pytest

from lumipower.persistence.run_config import RunConfig


@pytest.fixture(scope="session")
def template_config_path():
    # Within pytest: access "../template/lumipower.ini"
    return pathlib.Path(os.path.dirname(__file__)).resolve().parent / "template" / "lumipower.ini"


@pytest.fixture(scope="session")
def quick_config_path(template_config_path, tmp_path_factory):
    """Template with a tiny 2x2-cell synthetic module and short training."""
    run = RunConfig.load(template_config_path)
    run.synth = replace(run.synth, rows=2, cols=2, cell_px=8, cycle_presets=False, defect_density=0.8)
    run.train = replace(run.train, epochs=2, batch_size=4, augment=False)
    path = tmp_path_factory.mktemp("config") / "lumipower.ini"
    path.write_text(run.to_ini(), encoding="utf-8")

    assert os.path.exists(path)
    return path
