"""
Projection of a single-class M/G/m station from its state at t to the
expected state at t + delta, and the delay and length of stay seen by an
entity joining at t + delta.
"""

import math
from dataclasses import asdict, dataclass

from phc_hfa.aqt.residual import remaining_service_time

# absorbs float noise in ratios such as 1.74 / 0.87 before flooring
FLOOR_TOLERANCE = 1e-9


def whole(value):
    return math.floor(value + FLOOR_TOLERANCE)


def completions(horizon, residual, mean_service, servers=1):
    """Services finishing in `horizon` after the current one's `residual`, summed over servers."""
    return servers * max(whole((horizon - residual) / mean_service), 0)


@dataclass(frozen=True)
class ExtrapolatedState:
    queue_len: float = 0.0
    elapsed: float = 0.0
    remaining: float = 0.0
    delay: float = 0.0
    los: float = 0.0
    arrivals: float = 0.0
    completed: float = 0.0
    remaining_now: float = 0.0

    def to_dict(self):
        return asdict(self)


def station_residual(state, dist_for):
    """
    Net remaining service time at observation: the minimum over servers.
    Returns (residual, busy); an idle server means the next entity starts at once.
    `dist_for(patient_class)` gives the service distribution of the class in service.
    """
    residuals = []
    for elapsed, patient_class in zip(state.elapsed_service, state.in_service_class):
        if patient_class is None:
            return 0.0, False
        residuals.append(remaining_service_time(dist_for(patient_class), elapsed))
    if not residuals:
        return 0.0, False
    return min(residuals), True


def projected_residual(state, horizon, dist_for, projected_dist, busy):
    """
    (elapsed, remaining) of the entity in service `horizon` minutes after
    observation. Elapsed times wrap modulo the mean of `projected_dist`, the
    service of whoever is expected in service then; a zero horizon keeps the
    observed elapsed times.
    """
    if not busy:
        return 0.0, 0.0
    servers = list(zip(state.elapsed_service, state.in_service_class))
    if horizon == 0:
        candidates = [(x, dist_for(c)) for x, c in servers]
    else:
        period = projected_dist.mean
        candidates = [
            (abs(horizon - remaining_service_time(dist_for(c), x)) % period, projected_dist) for x, c in servers
        ]
    remaining, elapsed = min((remaining_service_time(d, x), x) for x, d in candidates)
    return elapsed, remaining


def extrapolate_mgm(state, delta, interarrival, dist, servers=1):
    """
    Expected state of a single-class station `delta` minutes after `state`
    was observed, with Poisson arrivals every `interarrival` minutes on
    average and `servers` identical servers with service `dist`.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if not interarrival > 0:
        raise ValueError(f"mean interarrival must be > 0, got {interarrival}")
    mean_service = dist.mean
    queue_now = state.queue_len
    residual_now, busy = station_residual(state, lambda _cls: dist)

    arrivals = max(delta / interarrival - 1.0, 0.0)
    completed = min(queue_now + arrivals / 2.0, completions(delta, residual_now, mean_service, servers))
    queue_len = max(queue_now + arrivals - completed, 0.0)
    elapsed, remaining = projected_residual(state, delta, lambda _cls: dist, dist, busy)

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
