"""
Effective outpatient interarrival times under assignment.

Diversion changes each facility's arrival rate, and the predictors need that
rate. Starting from the configured values, the network runs in windows
of `window_days`; after each window the predictors are fed the interarrival time
measured in it, until consecutive values differ by less than `epsilon` at
every facility.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from typing import List

import pandas as pd

from phc_hfa.assignment.assign import RtHfaRouter
from phc_hfa.errors import ConfigurationError
from phc_hfa.facility import Network
from phc_hfa.sim import MINUTES_PER_DAY, Kernel, RngStreams

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_DAYS = 90.0
DEFAULT_EPSILON = 0.1
DEFAULT_MAX_ITERATIONS = 20


@dataclass
class LambdaCalibration:
    window_days: float
    epsilon: float
    # one list per facility; entry 0 is the configured value, entry i the one measured in window i
    trace: List[List[float]] = field(default_factory=list)
    arrivals: List[List[int]] = field(default_factory=list)
    converged: bool = False

    @property
    def windows(self):
        return len(self.arrivals[0]) if self.arrivals else 0

    @property
    def lambda_eff(self):
        return [values[-1] for values in self.trace]

    def to_frame(self):
        rows = []
        for facility, values in enumerate(self.trace):
            for window, value in enumerate(values):
                rows.append({
                    'facility': facility,
                    'window': window,
                    'day': window * self.window_days,
                    'lambda': value,
                    'arrivals': self.arrivals[facility][window - 1] if window else None,
                })
        return pd.DataFrame(rows)

    def write(self, path):
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.6f")
        logger.info(f"Lambda trace written to {path}")
        return path


def measured_interarrival(window_days, opd_minutes, arrivals, cap):
    """Mean interarrival in OPD minutes over a window; `cap` when nothing arrived."""
    if arrivals == 0:
        return cap
    return min(window_days * opd_minutes / arrivals, cap)


def effective_lambda(
    configs,
    predictor,
    compliance_rate=1.0,
    travel=None,
    seed=0,
    window_days=DEFAULT_WINDOW_DAYS,
    epsilon=DEFAULT_EPSILON,
    max_iterations=DEFAULT_MAX_ITERATIONS,
    lambda_cap=None,
):
    """
    Fixed-point estimate of every facility's outpatient interarrival time
    under assignment, from one continuous run. `predictor` must support
    `set_interarrival`.
    """
    if window_days < 1:
        raise ConfigurationError(f"calibration window must be at least one day, got {window_days}")
    if epsilon <= 0:
        raise ConfigurationError(f"calibration tolerance must be positive, got {epsilon}")
    if max_iterations < 1:
        raise ConfigurationError(f"need at least one calibration window, got {max_iterations}")

    kernel = Kernel(RngStreams(seed))
    network = Network(configs, kernel, travel, router=RtHfaRouter(predictor, compliance_rate))
    network.start()

    current = [c.outpatient_mean_interarrival for c in configs]
    calibration = LambdaCalibration(window_days, epsilon)
    calibration.trace = [[value] for value in current]
    calibration.arrivals = [[] for _ in configs]
    for j, value in enumerate(current):
        predictor.set_interarrival(j, value)

    previous_counts = network.outpatient_arrivals()
    for window in range(1, max_iterations + 1):
        kernel.run_until(window * window_days * MINUTES_PER_DAY)
        counts = network.outpatient_arrivals()
        measured = []
        for j, config in enumerate(configs):
            arrivals = counts[j] - previous_counts[j]
            cap = lambda_cap if lambda_cap is not None else window_days * config.opd_minutes
            measured.append(measured_interarrival(window_days, config.opd_minutes, arrivals, cap))
            calibration.arrivals[j].append(arrivals)
            calibration.trace[j].append(measured[j])
        previous_counts = counts

        changes = [abs(m - c) for m, c in zip(measured, current)]
        logger.info(
            f"Calibration window {window}: "
            + ", ".join(f"{network.facilities[j].name} {m:.3f} min" for j, m in enumerate(measured))
        )
        if all(math.isfinite(d) and d < epsilon for d in changes):
            calibration.converged = True
            break
        current = measured
        for j, value in enumerate(current):
            predictor.set_interarrival(j, value)

    if not calibration.converged:
        logger.warning(f"Calibration did not converge within {max_iterations} windows of {window_days:g} days")
    return calibration
