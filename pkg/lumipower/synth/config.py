from dataclasses import dataclass

from lumipower.errors import ConfigError
from lumipower.utility.io_utils import DataclassYamlSaveLoadMixin

MIN_CELL_PX = 8

# module type -> (rows, cols, nominal power [Wp])
MODULE_TYPES = {
    "A": (6, 10, 230.0),
    "B": (6, 10, 240.0),
    "C": (6, 12, 345.0),
    "D": (6, 10, 240.0),
    "E": (6, 10, 235.0),
    "F": (6, 10, 245.0),
}


@dataclass
class SyntheticModuleConfig(DataclassYamlSaveLoadMixin):
    """
    Parameters of one synthetic photoluminescence module image.

    Attributes
    ----------
    rows, cols : int
        Cell grid.
    cell_px : int
        Side length of one cell in pixels (>= 8).
    nominal_power_wp : float
    defect_density : float
        Probability that a cell carries an inactive region.
    density_spread : float
        Half width of the per-module density: each module draws its own density
        uniformly from defect_density +- density_spread, clipped to [0, 1].
    intensity_ambiguity : float
        Probability that an inactive region renders bright instead of dark.
    noise_sigma : float
        Gaussian sensor noise in counts.
    rng_seed : int
    module_type : str
        Tag written to the manifest.
    cycle_presets : bool
        `generate_dataset` cycles the module types A-F instead of using
        rows/cols/nominal_power_wp.
    """

    rows: int = 6
    cols: int = 10
    cell_px: int = 32
    nominal_power_wp: float = 240.0
    defect_density: float = 0.3
    density_spread: float = 0.0
    intensity_ambiguity: float = 0.5
    noise_sigma: float = 300.0
    rng_seed: int = 0
    module_type: str = "B"
    cycle_presets: bool = True

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"Grid must be positive, got {self.rows}x{self.cols}")
        if not 0.0 <= self.defect_density <= 1.0:
            raise ConfigError(f"defect_density must be in [0, 1], got {self.defect_density}")
        if not 0.0 <= self.density_spread <= 1.0:
            raise ConfigError(f"density_spread must be in [0, 1], got {self.density_spread}")
        if not 0.0 <= self.intensity_ambiguity <= 1.0:
            raise ConfigError(f"intensity_ambiguity must be in [0, 1], got {self.intensity_ambiguity}")
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.nominal_power_wp <= 0:
            raise ConfigError(f"nominal_power_wp must be positive, got {self.nominal_power_wp}")

    @classmethod
    def from_module_type(cls, module_type: str, **overrides) -> "SyntheticModuleConfig":
        if module_type not in MODULE_TYPES:
            raise ConfigError(f"Unknown module type {module_type!r}")
        rows, cols, p_nom = MODULE_TYPES[module_type]
        return cls(rows=rows, cols=cols, nominal_power_wp=p_nom, module_type=module_type, **overrides)

    @property
    def image_shape(self):
        return self.rows * self.cell_px, self.cols * self.cell_px
