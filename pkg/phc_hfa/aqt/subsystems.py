"""
Real-time LOS predictors for the four PHC subsystems. Each works on the
station's state observed at decision time t and projects it to the instant
the patient reaches that station: t + delta at the NCD nurse, then adding
the upstream LOS predictions for the doctor, laboratory and pharmacy.
"""

import logging
import math
from dataclasses import asdict, dataclass

from phc_hfa.aqt.extrapolation import (
    ExtrapolatedState,
    completions,
    extrapolate_mgm,
    projected_residual,
    station_residual,
    whole,
)
from phc_hfa.errors import PriorityInstabilityError
from phc_hfa.facility.models import StationId

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DoctorExtrapolation:
    """Doctor-queue projection; `queue_len` counts outpatients, `queue_len_priority` the rest."""

    queue_len: float = 0.0
    queue_len_priority: float = 0.0
    elapsed: float = 0.0
    remaining: float = 0.0
    naive_delay: float = 0.0
    delay: float = 0.0
    los: float = 0.0
    arrivals: float = 0.0
    arrivals_priority: float = 0.0
    completed: float = 0.0
    completed_priority: float = 0.0
    remaining_now: float = 0.0
    priority_interarrival: float = math.inf
    priority_service: float = 0.0
    stable: bool = True

    def to_dict(self):
        return asdict(self)


def net_priority_interarrival(inpatient_gap, childbirth_gap):
    """Mean interarrival of the merged inpatient and childbirth streams (rates add)."""
    rate = sum(1.0 / lam for lam in (inpatient_gap, childbirth_gap) if lam is not None and math.isfinite(lam))
    return math.inf if rate == 0 else 1.0 / rate


def priority_service_mean(inpatient_gap, inpatient_service, childbirth_gap, childbirth_service):
    """Higher-priority service mean weighted by each class's arrival rate."""
    pairs = ((inpatient_gap, inpatient_service), (childbirth_gap, childbirth_service))
    weighted = [(1.0 / gap, service) for gap, service in pairs if math.isfinite(gap)]
    if not weighted:
        # no priority demand: plain average so queued priority work still has a duration
        return (inpatient_service + childbirth_service) / 2.0
    total = sum(rate for rate, _ in weighted)
    return sum(rate * service for rate, service in weighted) / total


def geometric_priority_delay(naive_delay, priority_interarrival, priority_service):
    """
    Delay once higher-priority arrivals during the wait are added, each
    bringing `priority_service` minutes: naive / (1 - service / interarrival).
    """
    if not math.isfinite(priority_interarrival):
        return naive_delay
    if priority_service >= priority_interarrival:
        raise PriorityInstabilityError(priority_interarrival, priority_service)
    return naive_delay * priority_interarrival / (priority_interarrival - priority_service)


def _mean_interarrival(dist):
    return math.inf if dist is None else dist.mean


def predict_los_ncd(ncd_state, delta, outpatient_interarrival, ncd_share, config=None, dist=None, servers=1):
    """
    NCD nurse LOS at t + delta. Only the age >= threshold share of outpatients
    visits the nurse, so its mean interarrival is the outpatient one divided by
    that share.
    """
    if ncd_share <= 0:
        return ExtrapolatedState()
    if config is not None:
        dist = dist or config.ncd_service
        servers = config.servers[StationId.NCD_NURSE]
    return extrapolate_mgm(ncd_state, delta, outpatient_interarrival / ncd_share, dist, servers)


def predict_los_doctor(
    doctor_state,
    delta,
    ncd_los,
    visited_ncd,
    config,
    ncd_residual=0.0,
    outpatient_interarrival=None,
    priority_correction=True,
):
    """
    Doctor LOS for an outpatient joining the OPD queue at t2 = t + delta + ncd_los.

    Outpatient arrivals come straight from the catchment (the under-threshold
    share) and, for NCD visitors, from the nurse's completions. Higher-priority
    patients are served ahead of every waiting outpatient; the naive delay is
    inflated by the geometric series of priority arrivals during the wait.
    Raises PriorityInstabilityError when that series diverges, unless
    `priority_correction` is off.
    """
    if not visited_ncd:
        ncd_los = 0.0
    if outpatient_interarrival is None:
        outpatient_interarrival = config.outpatient_mean_interarrival
    ncd_share = config.age_over_threshold_prob
    doctor = config.doctor_service
    mean_o = doctor.outpatient.mean
    servers = config.servers[StationId.DOCTOR]
    horizon = delta + ncd_los

    residual_now, busy = station_residual(doctor_state, doctor.for_class)

    # the under-threshold share arrives straight at the doctor
    direct_share = 1.0 - ncd_share
    direct = horizon * direct_share / outpatient_interarrival if math.isfinite(outpatient_interarrival) else 0.0
    from_nurse = completions(horizon, ncd_residual, config.ncd_service.mean) if visited_ncd else 0.0
    arrivals_o = max(direct + from_nurse - 1.0, 0.0)

    inpatient_gap = _mean_interarrival(config.inpatient_interarrival)
    childbirth_gap = _mean_interarrival(config.childbirth_interarrival)
    arrivals_i = horizon / inpatient_gap if math.isfinite(inpatient_gap) else 0.0
    arrivals_c = horizon / childbirth_gap if math.isfinite(childbirth_gap) else 0.0
    priority_interarrival = net_priority_interarrival(inpatient_gap, childbirth_gap)
    priority_service = priority_service_mean(
        inpatient_gap, doctor.inpatient.mean, childbirth_gap, doctor.childbirth.mean
    )

    priority_work = doctor_state.queue_len_priority + arrivals_i + arrivals_c
    completed_h = min(priority_work, completions(horizon, residual_now, priority_service, servers))
    queue_h = max(priority_work - completed_h, 0.0)

    # outpatients are only served in doctor time the priority patients leave over
    free_time = horizon - completed_h * priority_service / servers
    completed_o = min(
        doctor_state.queue_len_outpatient + arrivals_o / 2.0,
        completions(free_time, residual_now, mean_o, servers),
    )
    queue_o = max(doctor_state.queue_len_outpatient + arrivals_o - completed_o, 0.0)

    elapsed, remaining = projected_residual(doctor_state, horizon, doctor.for_class, doctor.outpatient, busy)
    naive = (queue_o * mean_o + queue_h * priority_service) / servers + remaining

    stable = True
    if priority_correction:
        delay = geometric_priority_delay(naive, priority_interarrival, priority_service)
    else:
        delay = naive
        stable = not (math.isfinite(priority_interarrival) and priority_service >= priority_interarrival)

    return DoctorExtrapolation(
        queue_len=queue_o,
        queue_len_priority=queue_h,
        elapsed=elapsed,
        remaining=remaining,
        naive_delay=naive,
        delay=delay,
        los=delay + mean_o,
        arrivals=arrivals_o,
        arrivals_priority=arrivals_i + arrivals_c,
        completed=completed_o,
        completed_priority=completed_h,
        remaining_now=residual_now,
        priority_interarrival=priority_interarrival,
        priority_service=priority_service,
        stable=stable,
    )


def _downstream(state, horizon, arrivals, dist, servers):
    mean_service = dist.mean
    residual_now, busy = station_residual(state, lambda _cls: dist)
    completed = completions(horizon, residual_now, mean_service, servers)
    queue_len = max(state.queue_len + arrivals - completed, 0.0)
    elapsed, remaining = projected_residual(state, horizon, lambda _cls: dist, dist, busy)
    delay = queue_len * mean_service / servers + remaining
    return ExtrapolatedState(
        queue_len=queue_len,
        elapsed=elapsed,
        remaining=remaining,
        delay=delay,
        los=delay + mean_service,
        arrivals=arrivals,
        completed=completed,
        remaining_now=residual_now,
    )


def predict_los_lab(lab_state, delta, ncd_los, doctor_los, doctor_queue, config):
    """Laboratory LOS after the NCD and doctor stays; arrivals are the referred share of the doctor queue."""
    mean_o = config.doctor_service.outpatient.mean
    arrivals = min(config.lab_visit_prob * doctor_queue, whole(doctor_los / mean_o))
    return _downstream(
        lab_state,
        delta + ncd_los + doctor_los,
        arrivals,
        config.lab_service,
        config.servers[StationId.LABORATORY],
    )


def predict_los_pharmacy(pharmacy_state, delta, ncd_los, doctor_los, lab_los, doctor_queue, lab_queue_now, config):
    """Pharmacy LOS after the NCD, doctor and laboratory stays; fed by the doctor and the laboratory."""
    cap = whole(doctor_los / config.doctor_service.outpatient.mean)
    cap += whole(lab_los / config.lab_service.mean)
    arrivals = min(doctor_queue + lab_queue_now, cap)
    return _downstream(
        pharmacy_state,
        delta + ncd_los + doctor_los + lab_los,
        arrivals,
        config.pharmacy_service,
        config.servers[StationId.PHARMACY],
    )


__all__ = [
    "DoctorExtrapolation",
    "geometric_priority_delay",
    "net_priority_interarrival",
    "priority_service_mean",
    "predict_los_ncd",
    "predict_los_doctor",
    "predict_los_lab",
    "predict_los_pharmacy",
]
