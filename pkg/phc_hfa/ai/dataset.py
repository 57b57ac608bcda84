"""
Labeled Sim-ML samples from simulation runs: features of the visited
facility at each outpatient's decision instant, labeled with the realized
length of stay.
"""

import logging
import math

import pandas as pd

from phc_hfa.ai.features import LABEL_COLUMN, META_PREFIX, extract_features
from phc_hfa.aqt import AqtPredictor
from phc_hfa.errors import DatasetError
from phc_hfa.facility import STATIONS, simulate

logger = logging.getLogger(__name__)

MAX_DATASET_REPLICATIONS = 1000


class FeatureRecorder:
    """Network observer keeping features and the AQT projection for every routed outpatient."""

    def __init__(self, predictors):
        self.predictors = predictors
        self.samples = {}

    def __call__(self, network, patient, now, target):
        facility = network.facilities[target]
        delta = network.travel[patient.preferred_facility][target]
        observation = facility.observe(now)
        detailed = self.predictors[target].predict_detailed(patient.age, observation, delta)
        features = extract_features(patient, observation, delta, detailed, facility.config.ncd_age_threshold)
        self.samples[patient.patient_id] = (features, detailed)


def build_samples(records, recorder, replication=0):
    rows = []
    for record in records:
        sample = recorder.samples.get(record.patient_id)
        if sample is None or record.los is None:
            continue
        features, detailed = sample
        row = dict(features)
        row[LABEL_COLUMN] = record.los
        row[f"{META_PREFIX}replication"] = replication
        row[f"{META_PREFIX}patient_id"] = record.patient_id
        row[f"{META_PREFIX}facility"] = record.facility
        row[f"{META_PREFIX}preferred"] = record.preferred_facility
        row[f"{META_PREFIX}arrival_time"] = record.arrival_time
        row[f"{META_PREFIX}routing_case"] = record.routing_case
        for station in STATIONS:
            sojourn = record.sojourn(station)
            row[f"{META_PREFIX}sojourn_{station.value}"] = math.nan if sojourn is None else sojourn
        for code, los in zip("ndlp", detailed.los.subsystems):
            row[f"{META_PREFIX}aqt_{code}"] = los
        row[f"{META_PREFIX}aqt_total"] = detailed.total
        rows.append(row)
    return pd.DataFrame(rows)


def generate_replication(scenario, replication, router=None, predictors=None):
    """Samples from one replication of `scenario`, seeded with seed + replication."""
    configs = scenario.facilities
    if predictors is None:
        predictors = [AqtPredictor(c) for c in configs]
    recorder = FeatureRecorder(predictors)
    network = simulate(
        configs,
        scenario.horizon_days,
        scenario.warmup_days,
        seed=scenario.seed + replication,
        travel=scenario.travel,
        router=router,
        observers=[recorder],
    )
    return build_samples(network.measured_records(), recorder, replication)


def generate_dataset(scenario, n_target=None, router_factory=None):
    """
    Run replications of `scenario` until `n_target` samples exist (all
    configured replications when no target is given). `router_factory(index)`
    may supply a router so samples reflect assignment traffic.
    """
    frames = []
    total = 0
    replication = 0
    while True:
        router = router_factory(replication) if router_factory is not None else None
        frame = generate_replication(scenario, replication, router)
        frames.append(frame)
        total += len(frame)
        logger.info(f"Dataset replication {replication}: {len(frame)} samples ({total} total)")
        replication += 1
        if n_target is None and replication >= scenario.replications:
            break
        if n_target is not None and total >= n_target:
            break
        if replication >= MAX_DATASET_REPLICATIONS:
            raise DatasetError(f"only {total} samples after {replication} replications, target {n_target}")
    dataset = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    if n_target is not None:
        dataset = dataset.iloc[:n_target].reset_index(drop=True)
    return dataset


def iqr_filter(dataset, column=LABEL_COLUMN, whisker=1.5):
    """Drop samples whose label lies outside the box-and-whisker fences."""
    if dataset is None or len(dataset) == 0:
        raise DatasetError("cannot filter an empty dataset")
    q1, q3 = dataset[column].quantile([0.25, 0.75])
    spread = q3 - q1
    low, high = q1 - whisker * spread, q3 + whisker * spread
    kept = dataset[(dataset[column] >= low) & (dataset[column] <= high)]
    dropped = len(dataset) - len(kept)
    if dropped:
        logger.info(f"IQR filter dropped {dropped} of {len(dataset)} samples outside [{low:.3f}, {high:.3f}]")
    return kept.reset_index(drop=True)
