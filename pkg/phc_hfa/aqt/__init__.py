from phc_hfa.aqt.extrapolation import ExtrapolatedState, extrapolate_mgm
from phc_hfa.aqt.predictor import AqtPredictor, DetailedPrediction, LosPrediction, total_los
from phc_hfa.aqt.residual import quantile_anchors, remaining_service_time, remaining_service_time_exact
from phc_hfa.aqt.subsystems import (
    DoctorExtrapolation,
    geometric_priority_delay,
    net_priority_interarrival,
    predict_los_doctor,
    predict_los_lab,
    predict_los_ncd,
    predict_los_pharmacy,
    priority_service_mean,
)

__all__ = [
    "ExtrapolatedState",
    "extrapolate_mgm",
    "AqtPredictor",
    "DetailedPrediction",
    "LosPrediction",
    "total_los",
    "quantile_anchors",
    "remaining_service_time",
    "remaining_service_time_exact",
    "DoctorExtrapolation",
    "geometric_priority_delay",
    "net_priority_interarrival",
    "predict_los_doctor",
    "predict_los_lab",
    "predict_los_ncd",
    "predict_los_pharmacy",
    "priority_service_mean",
]
