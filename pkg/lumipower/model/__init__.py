from .layers import Module
from .network import (
    ForwardOutput,
    PowerRegressionNet,
    RegressionMap,
    count_parameters,
    forward_embedding,
    forward_map,
)
from .spec import HEAD_KINDS, MAP_NEGATIONS, ModelSpec
