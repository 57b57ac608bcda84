"""
Real-time facility assignment: send each outpatient to the facility that
minimizes travel time plus predicted real-time LOS, subject to compliance.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

from phc_hfa.errors import ConfigurationError, MetricError, PredictionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Candidate:
    facility: int
    delta: float
    predicted_los: Optional[float] = None

    @property
    def score(self):
        return math.inf if self.predicted_los is None else self.delta + self.predicted_los


@dataclass
class AssignmentDecision:
    patient_id: int
    decision_time: float
    preferred: int
    candidates: List[Candidate] = field(default_factory=list)
    chosen: int = 0
    complied: bool = True
    visited: int = 0

    @property
    def diverted(self):
        return self.visited != self.preferred

    def to_dict(self):
        row = {
            'patient_id': self.patient_id,
            'decision_time': self.decision_time,
            'preferred': self.preferred,
            'chosen': self.chosen,
            'complied': self.complied,
            'visited': self.visited,
        }
        for c in self.candidates:
            row[f'delta_{c.facility}'] = c.delta
            row[f'predicted_los_{c.facility}'] = c.predicted_los
            row[f'score_{c.facility}'] = None if c.predicted_los is None else c.score
        return row


def assign(patient, network, predictor, t, candidates=None):
    """
    Score every candidate facility as delta + predicted LOS and pick the
    smallest score, ties to the lower index. A facility whose prediction fails
    is left out; when all fail the preferred facility is chosen.
    """
    origin = patient.preferred_facility
    indices = range(len(network.facilities)) if candidates is None else candidates
    scored = []
    for j in indices:
        delta = network.travel[origin][j]
        try:
            los = float(predictor.predict(network, j, patient, t, delta))
        except PredictionError as e:
            logger.warning(f"Prediction for patient {patient.patient_id} at facility {j} failed: {e}")
            los = None
        scored.append(Candidate(j, delta, los))

    usable = [c for c in scored if c.predicted_los is not None]
    if not usable:
        logger.warning(f"No facility could be scored for patient {patient.patient_id}; keeping facility {origin}")
        chosen = origin
    else:
        chosen = min(usable, key=lambda c: (c.score, c.facility)).facility
    return AssignmentDecision(
        patient_id=patient.patient_id,
        decision_time=t,
        preferred=origin,
        candidates=scored,
        chosen=chosen,
        complied=True,
        visited=chosen,
    )


def comply(decision, compliance_rate, rng):
    """Bernoulli compliance: follow the recommendation with probability `compliance_rate`."""
    if not 0.0 <= compliance_rate <= 1.0:
        raise ConfigurationError(f"compliance rate must be in [0, 1], got {compliance_rate}")
    # always draw so the compliance stream advances once per decision
    decision.complied = bool(rng.random() < compliance_rate)
    decision.visited = decision.chosen if decision.complied else decision.preferred
    return decision.visited


class RtHfaRouter:
    """Network router running assignment and compliance for every outpatient."""

    def __init__(self, predictor, compliance_rate=1.0):
        if not 0.0 <= compliance_rate <= 1.0:
            raise ConfigurationError(f"compliance rate must be in [0, 1], got {compliance_rate}")
        self.predictor = predictor
        self.compliance_rate = compliance_rate

    def __call__(self, network, patient, now):
        decision = assign(patient, network, self.predictor, now)
        comply(decision, self.compliance_rate, network.kernel.streams.get(("compliance",)))
        return decision


def beta_diverted(decisions):
    """Percent of outpatients who visited a facility other than their preferred one."""
    if not decisions:
        raise MetricError("diverted share of an empty decision list is undefined")
    diverted = sum(1 for d in decisions if d.diverted)
    return 100.0 * diverted / len(decisions)
