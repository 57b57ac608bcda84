"""
Feature schema for the Sim-ML predictor.

One vector describes the candidate facility at decision time t: per station
the queue at t, the expected remaining service time at t, and the AQT
projection of both to the patient's arrival at that station. The doctor
reports its queue per class. Travel time, the age flag and the predictor's
mean outpatient interarrival complete the vector.
"""

import logging

import numpy as np
import pandas as pd

from phc_hfa.errors import DatasetError
from phc_hfa.facility.models import StationId

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "v1"
SCHEMA_HEADER = "# schema "
LABEL_COLUMN = "label_los_min"
META_PREFIX = "meta_"

_SIMPLE_STATIONS = (
    ("n", StationId.NCD_NURSE, "ncd"),
    ("l", StationId.LABORATORY, "lab"),
    ("p", StationId.PHARMACY, "pharmacy"),
)

FEATURE_NAMES = (
    "n_queue_now",
    "n_remaining_now",
    "n_queue_future",
    "n_remaining_future",
    "d_queue_outpatient_now",
    "d_queue_inpatient_now",
    "d_queue_childbirth_now",
    "d_remaining_now",
    "d_queue_outpatient_future",
    "d_queue_priority_future",
    "d_remaining_future",
    "l_queue_now",
    "l_remaining_now",
    "l_queue_future",
    "l_remaining_future",
    "p_queue_now",
    "p_remaining_now",
    "p_queue_future",
    "p_remaining_future",
    "delta",
    "age_over_threshold",
    "interarrival",
)


def extract_features(patient, observation, delta, prediction, age_threshold=30):
    """
    Feature dict in FEATURE_NAMES order for `patient` (a record or an age)
    considering a facility whose stations were observed as `observation` and
    whose AQT projection is `prediction` (a DetailedPrediction).
    """
    age = getattr(patient, "age", patient)
    projected = {"ncd": prediction.ncd, "lab": prediction.lab, "pharmacy": prediction.pharmacy}
    features = {}
    for code, station, part in _SIMPLE_STATIONS:
        if code == "l":
            features.update(_doctor_features(observation[StationId.DOCTOR], prediction.doctor))
        state = observation[station]
        future = projected[part]
        features[f"{code}_queue_now"] = float(state.queue_len)
        features[f"{code}_remaining_now"] = future.remaining_now
        features[f"{code}_queue_future"] = future.queue_len
        features[f"{code}_remaining_future"] = future.remaining
    features["delta"] = float(delta)
    features["age_over_threshold"] = 1.0 if age >= age_threshold else 0.0
    features["interarrival"] = float(prediction.interarrival)
    return {name: features[name] for name in FEATURE_NAMES}


def _doctor_features(state, future):
    return {
        "d_queue_outpatient_now": float(state.queue_len_outpatient),
        "d_queue_inpatient_now": float(state.queue_len_inpatient),
        "d_queue_childbirth_now": float(state.queue_len_childbirth),
        "d_remaining_now": future.remaining_now,
        "d_queue_outpatient_future": future.queue_len,
        "d_queue_priority_future": future.queue_len_priority,
        "d_remaining_future": future.remaining,
    }


def feature_matrix(frame):
    """Feature columns of a dataset frame as a float array in schema order."""
    missing = [name for name in FEATURE_NAMES if name not in frame.columns]
    if missing:
        raise DatasetError(f"dataset is missing feature columns: {', '.join(missing)}")
    return frame.loc[:, list(FEATURE_NAMES)].to_numpy(dtype=float)


def write_samples(frame, path):
    """Write a dataset CSV under a `# schema <version>` header line."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"{SCHEMA_HEADER}{SCHEMA_VERSION}\n")
        frame.to_csv(f, index=False, float_format="%.6f")
    return path


def read_samples(path):
    try:
        with open(path, encoding="utf-8") as f:
            first = f.readline()
            if first.startswith(SCHEMA_HEADER):
                version = first[len(SCHEMA_HEADER):].strip()
                if version != SCHEMA_VERSION:
                    raise DatasetError(f"dataset {path} has schema {version}, expected {SCHEMA_VERSION}")
            else:
                logger.warning(f"Dataset {path} has no schema header, assuming {SCHEMA_VERSION}")
                f.seek(0)
            frame = pd.read_csv(f)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetError(f"cannot read dataset {path}: {e}") from e
    if LABEL_COLUMN not in frame.columns:
        raise DatasetError(f"dataset {path} has no '{LABEL_COLUMN}' column")
    feature_matrix(frame)
    return frame


def is_finite(features):
    return bool(np.all(np.isfinite(np.fromiter(features.values(), dtype=float))))
