import multiprocessing as mp
import os
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from lumipower.data import DataConfig, FoldSplit, ModuleDataset, ModuleSample, stratified_k_fold
from lumipower.errors import DataError, LumipowerError
from lumipower.model import ModelSpec, RegressionMap
from lumipower.powermaps import CellGrid, count_defective_cells, integrate_cells, localization_score
from lumipower.synth import load_cell_fractions
from lumipower.training import TrainConfig, TrainReport, predict, train
from lumipower.utility.logging import get_script_logger

from .config import CrossValidationConfig
from .metrics import EvalSummary, baseline_mean_predictor, prediction_table, summary_frame

BASELINE = "baseline"
MIN_DEFECTIVE_CELLS = 3

logger = get_script_logger(os.path.basename(__file__))


def variant_name(head_kind: str, config: TrainConfig) -> str:
    return f"{head_kind}_pretrained" if config.init_from_checkpoint else head_kind


@dataclass
class FoldOutcome:
    fold: int
    test_indices: np.ndarray
    y_hat: np.ndarray
    maps: Dict[int, RegressionMap]
    report: TrainReport


@dataclass
class CrossValidationResult:
    """
    Attributes
    ----------
    split : FoldSplit
    summaries : Dict[str, EvalSummary]
        Joined held-out predictions per variant, the baseline included.
    maps : Dict[str, Dict[int, RegressionMap]]
        Held-out regression maps of the map variants by sample index.
    reports : Dict[str, List[TrainReport]]
        Training report of every fold.
    underperforming : List[str]
        Variants whose MAE exceeds the baseline's.
    """

    split: FoldSplit
    summaries: Dict[str, EvalSummary]
    maps: Dict[str, Dict[int, RegressionMap]] = field(default_factory=dict)
    reports: Dict[str, List[TrainReport]] = field(default_factory=dict)
    underperforming: List[str] = field(default_factory=list)

    @property
    def variants(self) -> List[str]:
        return [name for name in self.summaries if name != BASELINE]

    def summary_frame(self) -> pd.DataFrame:
        return summary_frame(list(self.summaries.values()))


def _localization(sample: ModuleSample, regression_map: RegressionMap) -> float:
    fractions = load_cell_fractions(sample.image_path)
    if fractions is None or fractions.shape != sample.geometry:
        return float("nan")
    if count_defective_cells(fractions) < MIN_DEFECTIVE_CELLS:
        return float("nan")
    try:
        table = integrate_cells(regression_map, CellGrid(sample.rows, sample.cols, regression_map.shape), sample.p_nom_wp)
        return localization_score(table, fractions)
    except DataError:
        return float("nan")


def _run_fold(
    fold: int,
    dataset: ModuleDataset,
    split: FoldSplit,
    spec: ModelSpec,
    config: TrainConfig,
    checkpoint_dir: Optional[Path] = None,
    name: str = "",
    config_echo: Optional[dict] = None,
) -> FoldOutcome:
    train_indices, test_indices = split.train_indices(fold), split.test_indices(fold)
    stats = split.normalization_stats[fold]
    checkpoint_path = None if checkpoint_dir is None else checkpoint_dir / f"{name}_fold{fold}.lpw"
    try:
        result = train(
            dataset,
            train_indices,
            spec,
            config,
            stats=stats,
            checkpoint_path=checkpoint_path,
            config_echo=config_echo,
        )
        y_hat, maps = predict(result.model, dataset, test_indices, stats, config.batch_size)
    except (LumipowerError, FileNotFoundError) as err:
        raise type(err)(f"fold {fold} of {name}: {err}") from err
    return FoldOutcome(fold=fold, test_indices=test_indices, y_hat=y_hat, maps=maps, report=result.report)


def _joined_table(samples: Sequence[ModuleSample], split: FoldSplit, outcomes: Sequence[FoldOutcome]) -> pd.DataFrame:
    tables = []
    for outcome in outcomes:
        chosen = [samples[i] for i in outcome.test_indices]
        tables.append(
            prediction_table(
                outcome.test_indices,
                [s.y for s in chosen],
                outcome.y_hat,
                [s.p_nom_wp for s in chosen],
                [s.module_type for s in chosen],
                fold=outcome.fold,
            )
        )
    return pd.concat(tables).sort_values("sample_index", kind="stable").reset_index(drop=True)


def _baseline(samples: Sequence[ModuleSample], split: FoldSplit) -> EvalSummary:
    ys = np.array([s.y for s in samples])
    tables = []
    for fold in range(split.n_folds):
        train_indices, test_indices = split.train_indices(fold), split.test_indices(fold)
        chosen = [samples[i] for i in test_indices]
        summary = baseline_mean_predictor(ys[train_indices], ys[test_indices], [s.p_nom_wp for s in chosen], fold)
        tables.append(
            summary.samples.assign(sample_index=test_indices, module_type=[s.module_type for s in chosen])
        )
    table = pd.concat(tables).sort_values("sample_index", kind="stable").reset_index(drop=True)
    return EvalSummary(BASELINE, table)


def run_cross_validation(
    samples: Sequence[ModuleSample],
    spec: ModelSpec,
    train_config: TrainConfig,
    cv_config: Optional[CrossValidationConfig] = None,
    data_config: Optional[DataConfig] = None,
    checkpoint_dir: Optional[str | Path] = None,
) -> CrossValidationResult:
    """
    Stratified k-fold cross-validation of every configured head variant and
    the mean-predictor baseline on identical splits. Every sample is predicted
    exactly once per variant.
    """
    cv_config = cv_config or CrossValidationConfig()
    data_config = data_config or DataConfig()
    samples = list(samples)
    if len(samples) < max(3, cv_config.k):
        raise DataError(f"Cross-validation needs at least {max(3, cv_config.k)} samples, got {len(samples)}")
    split = stratified_k_fold(samples, cv_config.k, cv_config.seed)
    dataset = ModuleDataset(samples, data_config, stride=spec.stride)
    if data_config.stats_over_all:
        stats = dataset.fit_normalization(range(len(samples)))
        split.normalization_stats = {fold: stats for fold in range(split.n_folds)}
    else:
        split.normalization_stats = {
            fold: dataset.fit_normalization(split.train_indices(fold)) for fold in range(split.n_folds)
        }
    if checkpoint_dir is not None:
        checkpoint_dir = Path(checkpoint_dir)
        checkpoint_dir.mkdir(parents=True, exist_ok=True)

    baseline = _baseline(samples, split)
    result = CrossValidationResult(split=split, summaries={})
    for head_kind in cv_config.variants:
        name = variant_name(head_kind, train_config)
        variant_spec = replace(spec, head_kind=head_kind)
        variant_config = replace(train_config, learning_rate=cv_config.learning_rate(head_kind))
        run = partial(
            _run_fold,
            dataset=dataset,
            split=split,
            spec=variant_spec,
            config=variant_config,
            checkpoint_dir=checkpoint_dir,
            name=name,
            config_echo={
                "model": variant_spec.to_dict(),
                "data": data_config.to_dict(),
                "cv": cv_config.to_dict(),
            },
        )
        folds = range(split.n_folds)
        if cv_config.processes > 1:
            with mp.Pool(processes=min(cv_config.processes, split.n_folds)) as pool:
                outcomes = list(tqdm(pool.imap(run, folds), total=split.n_folds, desc=name))
        else:
            outcomes = [run(fold) for fold in tqdm(folds, desc=name)]

        table = _joined_table(samples, split, outcomes)
        maps = {index: m for outcome in outcomes for index, m in outcome.maps.items()}
        if maps:
            table["localization_rho"] = [_localization(samples[i], maps[i]) for i in table["sample_index"]]
            result.maps[name] = maps
        result.summaries[name] = EvalSummary(name, table)
        result.reports[name] = [outcome.report for outcome in outcomes]

        if result.summaries[name].mae_rel > baseline.mae_rel:
            result.underperforming.append(name)
            logger.warning(f"{name} underperforms the mean predictor baseline")
        logger.info(f"{name}: MAE {result.summaries[name].mae_pct:.3f} % ({result.summaries[name].mae_wp:.2f} Wp)")
    result.summaries[BASELINE] = baseline
    return result
