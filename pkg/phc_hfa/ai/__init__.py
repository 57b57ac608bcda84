from phc_hfa.ai.dataset import FeatureRecorder, build_samples, generate_dataset, generate_replication, iqr_filter
from phc_hfa.ai.evaluation import evaluate_flowwise, evaluate_stationwise, train_and_evaluate, train_station_models
from phc_hfa.ai.features import (
    FEATURE_NAMES,
    LABEL_COLUMN,
    SCHEMA_VERSION,
    extract_features,
    feature_matrix,
    read_samples,
    write_samples,
)
from phc_hfa.ai.los_scoring import LosKnnModel, knn_fit, knn_predict, mape

__all__ = [
    "FeatureRecorder",
    "build_samples",
    "generate_dataset",
    "generate_replication",
    "iqr_filter",
    "evaluate_flowwise",
    "evaluate_stationwise",
    "train_and_evaluate",
    "train_station_models",
    "FEATURE_NAMES",
    "LABEL_COLUMN",
    "SCHEMA_VERSION",
    "extract_features",
    "feature_matrix",
    "read_samples",
    "write_samples",
    "LosKnnModel",
    "knn_fit",
    "knn_predict",
    "mape",
]
