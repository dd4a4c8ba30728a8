from .config import DataConfig
from .dataset import Batch, ModuleDataset
from .folds import FoldSplit, stratified_k_fold, stratified_three_fold
from .manifest import ModuleSample, load_manifest
from .transforms import augment, fit_normalization, normalize, prepare_image, preprocess, read_image
