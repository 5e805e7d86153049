"""Global interval-rule explanations for black-box classifiers.

Pipeline: local attributions per sample -> important feature sets -> closed
frequent feature-set mining per predicted class -> axis-aligned candidate
boxes with tree refinement -> greedy cover into one DNF per class -> the
rule model that best reproduces the black-box, chosen across explainers.
"""

from .attribution import (
    AttributionVector,
    ExplainerParams,
    ImportantFeatureSet,
    important_features,
    integrated_gradients,
    kernel_shap,
    lime_local,
)
from .blackbox import (
    BlackBox,
    MlpConfig,
    RashomonEnsemble,
    gradient_check,
    load_prediction_oracle,
    train_ensemble,
    train_mlp,
)
from .boxes import Box, BoxParams, CandidateTerm, learn_terms, minimal_box, term_covers
from .dataset import ClassBlock, Dataset, SplitSpec, class_block, load_csv, split
from .errors import CfireError, ConfigError, DataError
from .evaluation import EnsembleReport, EvalReport, evaluate, evaluate_ensemble, prec_local
from .itemsets import ClosedSet, TransactionDB, count_frequent, enumerate_closed, support
from .rulemodel import (
    ClassDNF,
    PipelineParams,
    Prediction,
    RuleModel,
    cfire,
    cfire_multi,
    deserialize,
    greedy_select,
    predict_rules,
    serialize,
)

__version__ = "0.1.0"
