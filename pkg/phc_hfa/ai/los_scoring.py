"""
PHC Sim-ML - LOS Scoring Module
k-nearest-neighbor regression of the real-time length of stay
"""

import os
import logging

import joblib
import numpy as np
import pandas as pd
from sklearn.metrics import mean_absolute_percentage_error
from sklearn.model_selection import train_test_split
from sklearn.neighbors import KNeighborsRegressor
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import MinMaxScaler

from phc_hfa.ai.features import FEATURE_NAMES, LABEL_COLUMN, SCHEMA_VERSION, feature_matrix
from phc_hfa.errors import DatasetError, MetricError

logger = logging.getLogger(__name__)

DEFAULT_MODEL_PATH = "models/knn_los_model.joblib"
MODEL_FORMAT_VERSION = 1
# distances closer than this are treated as ties
TIE_TOLERANCE = 1e-12


def mape(actuals, predictions):
    """Mean absolute percentage error in percent."""
    actuals = np.asarray(actuals, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    if actuals.shape != predictions.shape:
        raise MetricError(f"MAPE needs equal lengths, got {actuals.shape} and {predictions.shape}")
    if actuals.size == 0:
        raise MetricError("MAPE of an empty sample is undefined")
    if np.any(actuals == 0):
        raise MetricError("MAPE is undefined when an actual value is zero")
    return float(mean_absolute_percentage_error(actuals, predictions) * 100.0)


class LosKnnModel:
    """
    Min-max scaled k-NN regressor (uniform weights, Manhattan distance).
    Neighbor ties at equal distance go to the lower training-row index.
    """

    def __init__(self, k=2, metric="manhattan", model_path=None, feature_names=FEATURE_NAMES, label=LABEL_COLUMN):
        self.k = int(k)
        self.metric = metric
        self.model_path = model_path or os.getenv("PHC_MODEL_PATH", DEFAULT_MODEL_PATH)
        self.feature_names = tuple(feature_names)
        self.label = label
        self.pipeline = None
        self.targets = None
        self.train_scaled = None
        if self.k < 1:
            raise DatasetError(f"k must be >= 1, got {self.k}")

    @property
    def fitted(self):
        return self.pipeline is not None

    def _matrix(self, frame):
        if isinstance(frame, pd.DataFrame):
            if self.feature_names == FEATURE_NAMES:
                return feature_matrix(frame)
            return frame.loc[:, list(self.feature_names)].to_numpy(dtype=float)
        matrix = np.asarray(frame, dtype=float)
        return matrix.reshape(1, -1) if matrix.ndim == 1 else matrix

    def fit(self, train):
        X = self._matrix(train)
        y = train[self.label].to_numpy(dtype=float)
        if len(y) < self.k:
            raise DatasetError(f"need at least k={self.k} training samples, got {len(y)}")
        self.pipeline = Pipeline([
            ('scale', MinMaxScaler()),
            ('knn', KNeighborsRegressor(n_neighbors=self.k, weights='uniform', metric=self.metric, algorithm='kd_tree')),
        ])
        self.pipeline.fit(X, y)
        self.targets = y
        self.train_scaled = self.pipeline.named_steps['scale'].transform(X)
        logger.info(f"Fitted {self.k}-NN on {len(y)} samples with {X.shape[1]} features")
        return self

    def _require_fitted(self):
        if not self.fitted:
            raise DatasetError("KNN model is not fitted")

    def predict(self, features):
        """Mean label of the k nearest training rows for each query row."""
        self._require_fitted()
        Q = self.pipeline.named_steps['scale'].transform(self._matrix(features))
        knn = self.pipeline.named_steps['knn']
        n_train = len(self.targets)
        probe = min(self.k + 1, n_train)
        distances, indices = knn.kneighbors(Q, n_neighbors=probe)
        out = np.empty(len(Q))
        for row in range(len(Q)):
            chosen = indices[row, : self.k]
            boundary_tie = probe > self.k and distances[row, self.k] - distances[row, self.k - 1] <= TIE_TOLERANCE
            if boundary_tie:
                chosen = self._ordered_neighbors(Q[row])
            out[row] = self.targets[np.sort(chosen)].mean()
        return out

    def _ordered_neighbors(self, query):
        distances = np.abs(self.train_scaled - query).sum(axis=1)
        # round away float noise so exact ties sort by index
        distances = np.round(distances, 12)
        order = np.lexsort((np.arange(len(distances)), distances))
        return order[: self.k]

    def exhaustive_predict(self, features):
        """Reference scan over every training row; same result as `predict`."""
        self._require_fitted()
        Q = self.pipeline.named_steps['scale'].transform(self._matrix(features))
        return np.array([self.targets[self._ordered_neighbors(q)].mean() for q in Q])

    def score(self, test):
        return mape(test[self.label].to_numpy(dtype=float), self.predict(test))

    def save(self, path=None):
        self._require_fitted()
        path = path or self.model_path
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        joblib.dump(
            {
                'format': MODEL_FORMAT_VERSION,
                'schema_version': SCHEMA_VERSION,
                'k': self.k,
                'metric': self.metric,
                'feature_names': list(self.feature_names),
                'label': self.label,
                'pipeline': self.pipeline,
                'targets': self.targets,
                'train_scaled': self.train_scaled,
            },
            path,
        )
        logger.info(f"Model saved to {path}")
        return path

    @classmethod
    def load(cls, path=None, feature_names=FEATURE_NAMES):
        path = path or os.getenv("PHC_MODEL_PATH", DEFAULT_MODEL_PATH)
        if not os.path.exists(path):
            raise DatasetError(f"no model file at {path}")
        try:
            payload = joblib.load(path)
        except Exception as e:
            raise DatasetError(f"failed to load model {path}: {e}") from e
        if payload.get('schema_version') != SCHEMA_VERSION:
            raise DatasetError(f"model {path} has schema {payload.get('schema_version')}, expected {SCHEMA_VERSION}")
        if feature_names is not None and tuple(payload['feature_names']) != tuple(feature_names):
            raise DatasetError(f"model {path} was trained on a different feature list")
        model = cls(payload['k'], payload['metric'], path, payload['feature_names'], payload['label'])
        model.pipeline = payload['pipeline']
        model.targets = np.asarray(payload['targets'], dtype=float)
        model.train_scaled = np.asarray(payload['train_scaled'], dtype=float)
        logger.info(f"Loaded model from {path}")
        return model


def split_dataset(dataset, split=0.75, seed=42):
    if not 0 < split < 1:
        raise DatasetError(f"train share must be in (0, 1), got {split}")
    if len(dataset) < 2:
        raise DatasetError(f"need at least 2 samples to split, got {len(dataset)}")
    train, test = train_test_split(dataset, train_size=split, random_state=seed, shuffle=True)
    return train.reset_index(drop=True), test.reset_index(drop=True)


def knn_fit(dataset, k=2, split=0.75, seed=42, model_path=None):
    """Deterministic train/test split, then fit on the training share; returns (model, test)."""
    if len(dataset) < k / (1.0 - split):
        raise DatasetError(f"{len(dataset)} samples are too few for k={k} with a {split:.0%} training share")
    train, test = split_dataset(dataset, split, seed)
    model = LosKnnModel(k=k, model_path=model_path).fit(train)
    if len(test):
        logger.info(f"Training completed with test MAPE: {model.score(test):.3f}%")
    return model, test


def knn_predict(model, features):
    return model.predict(features)
