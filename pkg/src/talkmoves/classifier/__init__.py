"""Talk-move classification engines: rule baseline, trainable hashed-feature
softmax model, and the external-inference adapter."""

from .adapter import AdapterConfig, AdapterUnreachable, BadResponse, external_classify
from .features import FeatureConfig, featurize
from .model import (
    DivergenceError,
    ModelParams,
    Prediction,
    TrainConfig,
    grid_search,
    predict,
    predict_batch,
    train,
)
from .model_io import (
    CorruptModel,
    VersionMismatch,
    load_model,
    load_model_file,
    save_model,
    save_model_file,
)
from .rules import DEFAULT_MATH_LEXICON, rule_classify

__all__ = [
    "AdapterConfig",
    "AdapterUnreachable",
    "BadResponse",
    "CorruptModel",
    "DEFAULT_MATH_LEXICON",
    "DivergenceError",
    "FeatureConfig",
    "ModelParams",
    "Prediction",
    "TrainConfig",
    "VersionMismatch",
    "external_classify",
    "featurize",
    "grid_search",
    "load_model",
    "load_model_file",
    "predict",
    "predict_batch",
    "rule_classify",
    "save_model",
    "save_model_file",
    "train",
]
