from dataclasses import dataclass
from typing import Tuple

from lumipower.errors import ConfigError
from lumipower.utility.io_utils import DataclassYamlSaveLoadMixin

HEAD_KINDS = ("embedding_linear", "regression_map")
# "identity" skips the negation; it only exists to compare the map head with
# global-average-pool + linear on equal weights.
MAP_NEGATIONS = ("relu", "abs", "identity")

PRESET_WIDTHS = {
    "full": (64, 128, 256, 512),
    "mini": (8, 16, 32, 64),
}


@dataclass
class ModelSpec(DataclassYamlSaveLoadMixin):
    """
    Architecture description of the power-regression network.

    Attributes
    ----------
    stage_widths : Tuple[int, ...]
        Channel count per residual stage (full preset matches ResNet18).
    blocks_per_stage : int
        Basic blocks per stage (2 for ResNet18).
    head_kind : str
        "embedding_linear" (global average pool + linear, no bias) or
        "regression_map" (1x1 convolution to a nonpositive loss map).
    map_negation : str
        "relu" (default) or "abs"; how the 1x1 projection becomes a loss map.
    map_bias : bool
        Whether the 1x1 projection carries a bias.
    input_shape : Tuple[int, int, int]
        Nominal (channels, H, W). Any H, W divisible by the stride are accepted.
    """

    stage_widths: Tuple[int, ...] = PRESET_WIDTHS["mini"]
    blocks_per_stage: int = 2
    head_kind: str = "regression_map"
    map_negation: str = "relu"
    map_bias: bool = True
    input_shape: Tuple[int, int, int] = (1, 192, 320)

    def __post_init__(self):
        self.stage_widths = tuple(int(w) for w in self.stage_widths)
        self.input_shape = tuple(int(v) for v in self.input_shape)
        if not self.stage_widths or any(w < 1 for w in self.stage_widths):
            raise ConfigError(f"stage_widths must be positive, got {self.stage_widths}")
        if self.blocks_per_stage < 1:
            raise ConfigError(f"blocks_per_stage must be >= 1, got {self.blocks_per_stage}")
        if self.head_kind not in HEAD_KINDS:
            raise ConfigError(f"head_kind must be one of {HEAD_KINDS}, got {self.head_kind!r}")
        if self.map_negation not in MAP_NEGATIONS:
            raise ConfigError(f"map_negation must be one of {MAP_NEGATIONS}, got {self.map_negation!r}")
        if len(self.input_shape) != 3:
            raise ConfigError(f"input_shape must be (channels, H, W), got {self.input_shape}")

    @classmethod
    def preset(cls, name: str, **overrides) -> "ModelSpec":
        if name not in PRESET_WIDTHS:
            raise ConfigError(f"Unknown model preset {name!r}; choose from {sorted(PRESET_WIDTHS)}")
        return cls(stage_widths=PRESET_WIDTHS[name], **overrides)

    @property
    def in_channels(self) -> int:
        return self.input_shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.stage_widths[-1]

    @property
    def stride(self) -> int:
        # stem conv /2, max-pool /2, every stage after the first /2
        return 4 * 2 ** (len(self.stage_widths) - 1)

    def map_shape(self, height: int, width: int) -> Tuple[int, int]:
        return height // self.stride, width // self.stride
