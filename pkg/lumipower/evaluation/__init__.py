from .config import CrossValidationConfig
from .metrics import EvalSummary, absolute_power, baseline_mean_predictor, mae, prediction_table, rmse, summary_frame
from .cross_validation import BASELINE, CrossValidationResult, run_cross_validation, variant_name
from .export import export_scatter, scatter_frame, write_cross_validation
from .store import STORE_NAME, CrossValidationStore
