from phc_hfa.assignment.assign import AssignmentDecision, Candidate, RtHfaRouter, assign, beta_diverted, comply
from phc_hfa.assignment.calibration import LambdaCalibration, effective_lambda, measured_interarrival
from phc_hfa.assignment.oracle import actual_los_oracle
from phc_hfa.assignment.predictors import (
    ActualLosPredictor,
    AqtLosPredictor,
    PredictorKind,
    SimMlLosPredictor,
    build_predictor,
)

__all__ = [
    "AssignmentDecision",
    "Candidate",
    "RtHfaRouter",
    "assign",
    "beta_diverted",
    "comply",
    "LambdaCalibration",
    "effective_lambda",
    "measured_interarrival",
    "actual_los_oracle",
    "ActualLosPredictor",
    "AqtLosPredictor",
    "PredictorKind",
    "SimMlLosPredictor",
    "build_predictor",
]
