"""
Operational outcomes of one replication and their aggregation across
replications.
"""

import logging

import numpy as np
import pandas as pd

from phc_hfa.assignment import beta_diverted
from phc_hfa.errors import MetricError
from phc_hfa.facility import StationId

logger = logging.getLogger(__name__)

UTILIZATION_OUTCOMES = {
    "rho_doctor": StationId.DOCTOR,
    "rho_ncd": StationId.NCD_NURSE,
    "rho_pharmacy": StationId.PHARMACY,
    "rho_lab": StationId.LABORATORY,
}
WAIT_OUTCOMES = {
    "w_opd": StationId.DOCTOR,
    "w_pharmacy": StationId.PHARMACY,
    "w_lab": StationId.LABORATORY,
    "w_ncd": StationId.NCD_NURSE,
}
OUTCOMES = (*UTILIZATION_OUTCOMES, *WAIT_OUTCOMES, "los")


def delta_net(values):
    """Spread between the largest and smallest facility value, in percent of the largest."""
    values = [float(v) for v in values]
    if len(values) < 2:
        raise MetricError(f"the network spread needs at least 2 facilities, got {len(values)}")
    high, low = max(values), min(values)
    if high == 0:
        return 0.0
    return abs(high - low) / high * 100.0


def _mean_or_zero(values):
    return float(np.mean(values)) if values else 0.0


def facility_outcomes(network, facility, measured_days):
    """Utilization per station plus mean outpatient waits and LOS of the measured records."""
    records = [r for r in network.measured_records() if r.facility == facility.index]
    row = {name: facility.utilization(station, measured_days) for name, station in UTILIZATION_OUTCOMES.items()}
    for name, station in WAIT_OUTCOMES.items():
        waits = [v.wait for r in records if (v := r.visit(station)) is not None and v.wait is not None]
        row[name] = _mean_or_zero(waits)
    row["los"] = _mean_or_zero([r.los for r in records])
    row["outpatients"] = len(records)
    return row


def replication_outcomes(network, measured_days, replication=0):
    """Wide row: `<facility>_<outcome>`, `beta_pct` and `delta_net_<outcome>`."""
    row = {"replication": replication}
    per_facility = []
    for facility in network.facilities:
        values = facility_outcomes(network, facility, measured_days)
        per_facility.append(values)
        for name, value in values.items():
            row[f"{facility.name}_{name}"] = value

    decisions = [d for d in network.decisions if d.decision_time >= network.warmup_end]
    row["beta_pct"] = beta_diverted(decisions) if decisions else 0.0
    if len(per_facility) > 1:
        for name in OUTCOMES:
            row[f"delta_net_{name}"] = delta_net([values[name] for values in per_facility])
    return row


def summarize(outcomes):
    """Mean and SD (ddof=1, 0 for a single replication) of every outcome column."""
    if outcomes.empty:
        raise MetricError("no replications to summarize")
    rows = []
    for column in outcomes.columns:
        if column == "replication":
            continue
        values = outcomes[column].to_numpy(dtype=float)
        rows.append({
            "metric": column,
            "mean": float(np.mean(values)),
            "sd": float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
            "replications": len(values),
        })
    return pd.DataFrame(rows)
