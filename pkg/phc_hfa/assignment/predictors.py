"""
Real-time LOS predictors used by the assignment layer.

Each predictor answers `predict(network, facility_index, patient, t, delta)`
with the expected LOS of `patient` at that facility if it arrives at t + delta,
and accepts `set_interarrival(facility_index, value)` so calibration can feed
it an effective outpatient interarrival time.
"""

import logging
from enum import Enum

from phc_hfa.ai.features import extract_features
from phc_hfa.ai.los_scoring import knn_predict
from phc_hfa.assignment.oracle import DEFAULT_GUARD_DAYS, actual_los_oracle
from phc_hfa.aqt import AqtPredictor
from phc_hfa.errors import ConfigurationError

logger = logging.getLogger(__name__)


class PredictorKind(str, Enum):
    ACTUAL = "actual"
    AQT = "aqt"
    SIMML = "simml"


class _InterarrivalOverrides:
    def __init__(self, configs, interarrivals=None):
        self.configs = list(configs)
        self.interarrivals = dict(interarrivals or {})

    def interarrival(self, facility_index):
        value = self.interarrivals.get(facility_index)
        return self.configs[facility_index].outpatient_mean_interarrival if value is None else value

    def set_interarrival(self, facility_index, value):
        self.interarrivals[facility_index] = float(value)


class ActualLosPredictor(_InterarrivalOverrides):
    """Clairvoyant LOS from a forward run of a clone of the candidate facility."""

    kind = PredictorKind.ACTUAL

    def __init__(self, configs, interarrivals=None, guard_days=DEFAULT_GUARD_DAYS):
        super().__init__(configs, interarrivals)
        self.guard_days = guard_days

    def predict(self, network, facility_index, patient, t, delta):
        # spawn is deterministic in the key: every candidate clone gets the same draws
        rng = network.kernel.streams.spawn(("oracle", patient.patient_id))
        return actual_los_oracle(
            network,
            facility_index,
            patient,
            t,
            delta,
            rng=rng,
            interarrival=self.interarrival(facility_index),
            guard_days=self.guard_days,
        )


class AqtLosPredictor:
    """AQT prediction from the candidate facility's observed state at t."""

    kind = PredictorKind.AQT

    def __init__(self, configs, interarrivals=None, debug=False):
        self.predictors = [AqtPredictor(config, debug=debug) for config in configs]
        for index, value in (interarrivals or {}).items():
            self.set_interarrival(index, value)

    def set_interarrival(self, facility_index, value):
        self.predictors[facility_index].interarrival = float(value)

    def detailed(self, network, facility_index, patient, t, delta):
        observation = network.facilities[facility_index].observe(t)
        return self.predictors[facility_index].predict_detailed(patient.age, observation, delta)

    def predict(self, network, facility_index, patient, t, delta):
        return self.detailed(network, facility_index, patient, t, delta).total


class SimMlLosPredictor:
    """Fitted KNN over the same features the training samples were built from."""

    kind = PredictorKind.SIMML

    def __init__(self, model, configs, interarrivals=None):
        if model is None or not model.fitted:
            raise ConfigurationError("the Sim-ML predictor needs a fitted KNN model")
        self.model = model
        self.aqt = AqtLosPredictor(configs, interarrivals)

    def set_interarrival(self, facility_index, value):
        self.aqt.set_interarrival(facility_index, value)

    def predict(self, network, facility_index, patient, t, delta):
        facility = network.facilities[facility_index]
        observation = facility.observe(t)
        detailed = self.aqt.predictors[facility_index].predict_detailed(patient.age, observation, delta)
        features = extract_features(patient, observation, delta, detailed, facility.config.ncd_age_threshold)
        return float(knn_predict(self.model, [list(features.values())])[0])


def build_predictor(kind, configs, model=None, interarrivals=None):
    kind = PredictorKind(kind)
    if kind is PredictorKind.ACTUAL:
        return ActualLosPredictor(configs, interarrivals)
    if kind is PredictorKind.AQT:
        return AqtLosPredictor(configs, interarrivals)
    return SimMlLosPredictor(model, configs, interarrivals)
