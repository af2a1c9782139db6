"""Perceptually weighted rank correlation for image quality assessment.

The public API re-exports the pieces most callers need; the submodules hold
the rest.
"""
__version__ = "0.1.0"

from .benchmark import delta_d_n, delta_mos, disagreement_count, grouped_mean
from .classic import generalized_gamma, kendall_tau, mistaken_pair_count, spearman_rho
from .core import (
    NormalizedScoreSet,
    PredictionPolarity,
    PredictionSet,
    RankVector,
    ScorePolarity,
    ScoreSet,
    TiePolicy,
    ground_truth_pairing,
    normalize,
    rank_transform,
)
from .estimator import PWRCScorer, ScoreNormalizer
from .evaluation import IndicatorConfig, calibrate, evaluate_grouped, evaluate_metric
from .exceptions import (
    AlignmentError,
    DegenerateDataError,
    PWRCError,
    TiedRanksError,
    ValidationError,
)
from .harness import SplitSpec, generate_splits, load_dataset, run_protocol, synthesize_panel
from .indicator import (
    ActivationConfig,
    SaStCurve,
    activation,
    auc_ca,
    derive_c1,
    detection,
    importance_weights,
    pwrc,
    sa_st_curve,
    threshold_range,
)
