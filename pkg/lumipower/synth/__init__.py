from .config import MODULE_TYPES, SyntheticModuleConfig
from .generator import (
    MANIFEST_COLUMNS,
    MANIFEST_NAME,
    GroundTruth,
    expected_relative_power,
    generate_dataset,
    generate_sample,
    load_cell_fractions,
    render_module,
    sample_config,
    truth_paths,
)
