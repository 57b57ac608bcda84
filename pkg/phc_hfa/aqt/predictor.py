"""
AQT predictor: chains the four subsystem predictors for one facility and
weights them into the total real-time LOS of an outpatient.
"""

import logging
import os
from dataclasses import dataclass, field

import pandas as pd

from phc_hfa.aqt.extrapolation import ExtrapolatedState
from phc_hfa.aqt.subsystems import (
    DoctorExtrapolation,
    predict_los_doctor,
    predict_los_lab,
    predict_los_ncd,
    predict_los_pharmacy,
)
from phc_hfa.errors import PriorityInstabilityError
from phc_hfa.facility.models import StationId

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LosPrediction:
    ncd: float
    doctor: float
    lab: float
    pharmacy: float
    weights: tuple
    total: float

    @property
    def subsystems(self):
        return (self.ncd, self.doctor, self.lab, self.pharmacy)


def total_los(patient, los_vector, age_threshold=30, lab_weight=0.5):
    """
    Weighted sum of the (NCD, doctor, laboratory, pharmacy) LOS values.
    The NCD term counts only for patients at or above the age threshold;
    the doctor and pharmacy are always visited, the laboratory with
    probability `lab_weight`. `patient` is a record with an `age` or an age.
    """
    age = getattr(patient, "age", patient)
    ncd, doctor, lab, pharmacy = los_vector
    w_ncd = 1.0 if age >= age_threshold else 0.0
    if w_ncd == 0.0:
        ncd = 0.0
    weights = (w_ncd, 1.0, lab_weight, 1.0)
    total = w_ncd * ncd + doctor + lab_weight * lab + pharmacy
    return LosPrediction(ncd, doctor, lab, pharmacy, weights, total)


@dataclass
class DetailedPrediction:
    age: int
    delta: float
    interarrival: float
    ncd: ExtrapolatedState
    doctor: DoctorExtrapolation
    lab: ExtrapolatedState
    pharmacy: ExtrapolatedState
    los: LosPrediction
    fallback: bool = False

    @property
    def total(self):
        return self.los.total

    def to_row(self):
        row = {"age": self.age, "delta": self.delta, "interarrival": self.interarrival, "fallback": self.fallback}
        for prefix, part in (("n", self.ncd), ("d", self.doctor), ("l", self.lab), ("p", self.pharmacy)):
            for key, value in part.to_dict().items():
                row[f"{prefix}_{key}"] = value
        row["total"] = self.los.total
        return row


@dataclass
class AqtPredictor:
    """
    AQT predictor for one facility configuration. `interarrival` overrides the
    configured mean outpatient interarrival (e.g. with a calibrated value).
    With `debug` on, every prediction's intermediate values are kept for
    `dump_debug`.
    """

    config: object
    interarrival: float = None
    debug: bool = False
    debug_rows: list = field(default_factory=list)

    @property
    def outpatient_interarrival(self):
        return self.config.outpatient_mean_interarrival if self.interarrival is None else self.interarrival

    def predict_detailed(self, age, observation, delta):
        config = self.config
        interarrival = self.outpatient_interarrival
        visited_ncd = age >= config.ncd_age_threshold

        ncd = predict_los_ncd(
            observation[StationId.NCD_NURSE], delta, interarrival, config.age_over_threshold_prob, config=config
        )
        ncd_los = ncd.los if visited_ncd else 0.0

        fallback = False
        doctor_args = (observation[StationId.DOCTOR], delta, ncd_los, visited_ncd, config)
        try:
            doctor = predict_los_doctor(*doctor_args, ncd.remaining_now, interarrival)
        except PriorityInstabilityError as e:
            logger.warning(f"{config.name}: {e}; using the naive doctor delay")
            doctor = predict_los_doctor(*doctor_args, ncd.remaining_now, interarrival, priority_correction=False)
            fallback = True

        lab = predict_los_lab(observation[StationId.LABORATORY], delta, ncd_los, doctor.los, doctor.queue_len, config)
        pharmacy = predict_los_pharmacy(
            observation[StationId.PHARMACY],
            delta,
            ncd_los,
            doctor.los,
            lab.los,
            doctor.queue_len,
            observation[StationId.LABORATORY].queue_len,
            config,
        )
        los = total_los(
            age,
            (ncd.los, doctor.los, lab.los, pharmacy.los),
            age_threshold=config.ncd_age_threshold,
            lab_weight=config.lab_visit_prob,
        )
        detailed = DetailedPrediction(age, delta, interarrival, ncd, doctor, lab, pharmacy, los, fallback)
        if self.debug:
            self.debug_rows.append(detailed.to_row())
        return detailed

    def predict_total(self, age, observation, delta):
        return self.predict_detailed(age, observation, delta).total

    def dump_debug(self, path):
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        pd.DataFrame(self.debug_rows).to_csv(path, index=False, float_format="%.6f")
        logger.info(f"Wrote {len(self.debug_rows)} AQT debug rows to {path}")
        return path
