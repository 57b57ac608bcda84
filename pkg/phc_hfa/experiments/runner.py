"""
Scenario execution: independent replications seeded with seed + index, fanned
out with joblib and reduced in replication order.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import pandas as pd
from joblib import Parallel, delayed

from phc_hfa.ai.los_scoring import LosKnnModel
from phc_hfa.assignment import PredictorKind, RtHfaRouter, build_predictor, effective_lambda
from phc_hfa.errors import ConfigurationError, ReplicationError
from phc_hfa.experiments.stats import replication_outcomes, summarize
from phc_hfa.facility import simulate

logger = logging.getLogger(__name__)


@dataclass
class ReplicationResult:
    index: int
    outcomes: dict
    decisions: list = field(default_factory=list)
    patients: list = field(default_factory=list)


@dataclass
class ScenarioResult:
    scenario: object
    outcomes: pd.DataFrame
    summary: pd.DataFrame
    assignments: pd.DataFrame
    patients: pd.DataFrame
    calibration: Optional[object] = None


def load_model(scenario):
    """Fitted KNN for a Sim-ML scenario, None otherwise."""
    if scenario.assignment is None or scenario.assignment.predictor is not PredictorKind.SIMML:
        return None
    return LosKnnModel.load(scenario.assignment.model_path)


def make_router(scenario, model=None, interarrivals=None):
    if scenario.assignment is None:
        return None
    predictor = build_predictor(scenario.assignment.predictor, scenario.facilities, model, interarrivals)
    return RtHfaRouter(predictor, scenario.assignment.compliance)


def calibrate(scenario, model=None, seed=None):
    """Effective interarrival times under the scenario's assignment policy."""
    if scenario.assignment is None:
        raise ConfigurationError(f"scenario '{scenario.name}' has no assignment block to calibrate")
    settings = scenario.calibration
    predictor = build_predictor(scenario.assignment.predictor, scenario.facilities, model)
    return effective_lambda(
        scenario.facilities,
        predictor,
        compliance_rate=scenario.assignment.compliance,
        travel=scenario.travel,
        seed=scenario.seed if seed is None else seed,
        window_days=settings.window_days,
        epsilon=settings.epsilon,
        max_iterations=settings.max_iterations,
        lambda_cap=settings.lambda_cap,
    )


def run_replication(scenario, index, model=None, interarrivals=None, trace_path=None, keep_records=False):
    try:
        router = make_router(scenario, model, interarrivals)
        trace = open(trace_path, "w", encoding="utf-8") if trace_path else None
        try:
            network = simulate(
                scenario.facilities,
                scenario.horizon_days,
                scenario.warmup_days,
                seed=scenario.seed + index,
                travel=scenario.travel,
                router=router,
                trace=trace,
            )
        finally:
            if trace is not None:
                trace.close()
        outcomes = replication_outcomes(network, scenario.measured_days, index)
    except Exception as e:
        raise ReplicationError(index, e) from e
    result = ReplicationResult(index, outcomes)
    if keep_records:
        result.decisions = [d.to_dict() for d in network.decisions]
        result.patients = [r.to_dict() for r in network.records]
    logger.info(f"Replication {index} of '{scenario.name}' finished")
    return result


def run_scenario(scenario, jobs=1, model=None, interarrivals=None, trace_path=None):
    """
    Run every replication of `scenario` and aggregate. With calibration
    enabled and no `interarrivals` given, the effective interarrival times are
    estimated first and fed to the predictors.
    """
    logger.info(f"Running scenario '{scenario.name}': {scenario.replications} replications, {jobs} job(s)")
    if model is None:
        model = load_model(scenario)
    calibration = None
    if interarrivals is None and scenario.assignment is not None and scenario.calibration.enabled:
        calibration = calibrate(scenario, model)
        interarrivals = dict(enumerate(calibration.lambda_eff))

    results = Parallel(n_jobs=jobs)(
        delayed(run_replication)(
            scenario,
            index,
            model,
            interarrivals,
            trace_path if index == 0 else None,
            keep_records=(index == 0),
        )
        for index in range(scenario.replications)
    )
    results = sorted(results, key=lambda r: r.index)

    outcomes = pd.DataFrame([r.outcomes for r in results])
    summary = summarize(outcomes)
    first = results[0]
    logger.info(f"Scenario '{scenario.name}' finished")
    return ScenarioResult(
        scenario,
        outcomes,
        summary,
        pd.DataFrame(first.decisions),
        pd.DataFrame(first.patients),
        calibration,
    )


def compliance_sweep(scenario, rates=None, jobs=1, model=None):
    """One scenario run per compliance rate; returns (plot-ready table, {rate: ScenarioResult})."""
    if scenario.assignment is None:
        raise ConfigurationError(f"scenario '{scenario.name}' has no assignment block to sweep")
    rates = list(scenario.sweep_rates if rates is None else rates)
    if model is None:
        model = load_model(scenario)
    rows = []
    results = {}
    for rate in rates:
        variant = scenario.with_overrides(compliance=rate)
        result = run_scenario(variant, jobs=jobs, model=model)
        results[rate] = result
        means = dict(zip(result.summary["metric"], result.summary["mean"]))
        row = {"compliance": rate}
        for metric in ("delta_net_rho_doctor", "delta_net_w_opd", "delta_net_los", "beta_pct"):
            row[metric] = means.get(metric)
        for name in scenario.facility_names:
            row[f"{name}_los"] = means.get(f"{name}_los")
        rows.append(row)
    return pd.DataFrame(rows), results
