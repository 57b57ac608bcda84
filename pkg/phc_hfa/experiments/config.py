"""
Scenario files: YAML validated into pydantic models.

Every facility field defaults to the PHC input parameters, so a minimal
facility block is a name plus an outpatient interarrival time:

    facilities:
      - name: PHC1
        outpatient_interarrival: exp(9)
      - name: PHC2
        outpatient_interarrival: exp(2)
"""

import os
import logging
from typing import List, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from phc_hfa.assignment import PredictorKind
from phc_hfa.errors import ConfigurationError
from phc_hfa.facility import FacilityConfig, default_travel_matrix

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "results"
DEFAULT_SWEEP_RATES = (1.0, 0.75, 0.5, 0.25)


def env_output_dir():
    return os.getenv("PHC_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)


def env_jobs():
    try:
        return max(1, int(os.getenv("PHC_JOBS", 1)))
    except ValueError as e:
        raise ConfigurationError(f"PHC_JOBS must be an integer, got {os.getenv('PHC_JOBS')!r}") from e


class AssignmentConfig(BaseModel):
    predictor: PredictorKind = PredictorKind.AQT
    compliance: float = Field(1.0, ge=0.0, le=1.0)
    # None falls back to PHC_MODEL_PATH
    model_path: Optional[str] = None


class CalibrationConfig(BaseModel):
    enabled: bool = False
    window_days: float = Field(90.0, ge=1.0)
    epsilon: float = Field(0.1, gt=0.0)
    max_iterations: int = Field(20, ge=1)
    lambda_cap: Optional[float] = Field(None, gt=0.0)


class SimMlConfig(BaseModel):
    samples: Optional[int] = Field(None, ge=1)
    k: int = Field(2, ge=1)
    train_share: float = Field(0.75, gt=0.0, lt=1.0)
    split_seed: int = 42
    filter_outliers: bool = True


class ScenarioConfig(BaseModel):
    name: str = "scenario"
    facilities: List[FacilityConfig] = Field(min_length=1)
    travel: Optional[List[List[float]]] = None
    horizon_days: float = Field(545.0, gt=0.0)
    warmup_days: float = Field(180.0, ge=0.0)
    replications: int = Field(1, ge=1)
    seed: int = 0
    assignment: Optional[AssignmentConfig] = None
    calibration: CalibrationConfig = CalibrationConfig()
    simml: SimMlConfig = SimMlConfig()
    sweep_rates: List[float] = Field(default_factory=lambda: list(DEFAULT_SWEEP_RATES))
    output_dir: str = Field(default_factory=env_output_dir)

    @field_validator("sweep_rates")
    @classmethod
    def _rates_are_probabilities(cls, value):
        for rate in value:
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"compliance rate {rate} is not in [0, 1]")
        return value

    @model_validator(mode="after")
    def _check_shape(self):
        if self.horizon_days <= self.warmup_days:
            raise ValueError(f"horizon_days ({self.horizon_days}) must exceed warmup_days ({self.warmup_days})")
        m = len(self.facilities)
        if self.travel is None:
            self.travel = default_travel_matrix(m)
        elif len(self.travel) != m or any(len(row) != m for row in self.travel):
            raise ValueError(f"travel must be a {m}x{m} matrix")
        elif any(value < 0 for row in self.travel for value in row):
            raise ValueError("travel times must be non-negative")
        names = [f.name for f in self.facilities]
        if len(set(names)) != len(names):
            raise ValueError(f"facility names must be unique, got {names}")
        return self

    @property
    def measured_days(self):
        return self.horizon_days - self.warmup_days

    @property
    def facility_names(self):
        return [f.name for f in self.facilities]

    def with_overrides(self, seed=None, replications=None, output_dir=None, compliance=None, predictor=None):
        """Copy with CLI flags applied on top of the file values."""
        update = {}
        if seed is not None:
            update["seed"] = int(seed)
        if replications is not None:
            if replications < 1:
                raise ConfigurationError(f"replications must be at least 1, got {replications}")
            update["replications"] = int(replications)
        if output_dir is not None:
            update["output_dir"] = output_dir
        if compliance is not None or predictor is not None:
            assignment = self.assignment or AssignmentConfig()
            changes = assignment.model_dump()
            if compliance is not None:
                changes["compliance"] = compliance
            if predictor is not None:
                changes["predictor"] = predictor
            try:
                update["assignment"] = AssignmentConfig.model_validate(changes)
            except ValidationError as e:
                raise ConfigurationError(_describe(e)) from e
        return self.model_copy(update=update)


def _describe(error):
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "invalid scenario: " + "; ".join(parts)


def parse_scenario(data, source="<memory>"):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: a scenario must be a mapping, got {type(data).__name__}")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"{source}: {_describe(e)}") from e


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read scenario file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"malformed YAML in {path}: {e}") from e
    scenario = parse_scenario(data, source=path)
    logger.info(f"Loaded scenario '{scenario.name}' from {path} ({len(scenario.facilities)} facilities)")
    return scenario
