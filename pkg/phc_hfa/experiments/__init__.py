from phc_hfa.experiments.config import (
    AssignmentConfig,
    CalibrationConfig,
    ScenarioConfig,
    SimMlConfig,
    env_jobs,
    load_scenario,
    parse_scenario,
)
from phc_hfa.experiments.report import merge_reports, summary_markdown, write_csv, write_scenario, write_sweep
from phc_hfa.experiments.runner import (
    ReplicationResult,
    ScenarioResult,
    calibrate,
    compliance_sweep,
    load_model,
    make_router,
    run_replication,
    run_scenario,
)
from phc_hfa.experiments.stats import OUTCOMES, delta_net, facility_outcomes, replication_outcomes, summarize

__all__ = [
    "AssignmentConfig",
    "CalibrationConfig",
    "ScenarioConfig",
    "SimMlConfig",
    "env_jobs",
    "load_scenario",
    "parse_scenario",
    "merge_reports",
    "summary_markdown",
    "write_csv",
    "write_scenario",
    "write_sweep",
    "ReplicationResult",
    "ScenarioResult",
    "calibrate",
    "compliance_sweep",
    "load_model",
    "make_router",
    "run_replication",
    "run_scenario",
    "OUTCOMES",
    "delta_net",
    "facility_outcomes",
    "replication_outcomes",
    "summarize",
]
