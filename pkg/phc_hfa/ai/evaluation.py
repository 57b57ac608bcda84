"""
MAPE tables for the LOS predictors: flow-wise by routing case and
station-wise by PHC subsystem, each as mean (SD) over replications.
"""

import logging

import numpy as np
import pandas as pd

from phc_hfa.ai.dataset import iqr_filter
from phc_hfa.ai.features import LABEL_COLUMN, META_PREFIX
from phc_hfa.ai.los_scoring import LosKnnModel, knn_fit, mape, split_dataset
from phc_hfa.facility import ROUTING_CASES, STATIONS

logger = logging.getLogger(__name__)

REPLICATION_COLUMN = f"{META_PREFIX}replication"
CASE_COLUMN = f"{META_PREFIX}routing_case"


def _case_label(case):
    return "->".join(s.value for s in ROUTING_CASES[case])


def _mape_by_replication(frame, actual_column, prediction_column):
    values = []
    for _, group in frame.groupby(REPLICATION_COLUMN, sort=True):
        usable = group[[actual_column, prediction_column]].dropna()
        usable = usable[usable[actual_column] > 0]
        if len(usable):
            values.append(mape(usable[actual_column], usable[prediction_column]))
    return values


def _summary_row(values):
    if not values:
        return None
    sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return float(np.mean(values)), sd, len(values)


def evaluate_flowwise(test, predictions):
    """
    `predictions` maps a predictor name to the column holding its total-LOS
    prediction. Routing cases without samples are left out of the table.
    """
    rows = []
    for case in ROUTING_CASES:
        stratum = test[test[CASE_COLUMN] == case]
        if stratum.empty:
            logger.warning(f"No test samples for routing case {case} ({_case_label(case)})")
            continue
        row = {"case": case, "path": _case_label(case), "samples": len(stratum)}
        for name, column in predictions.items():
            summary = _summary_row(_mape_by_replication(stratum, LABEL_COLUMN, column))
            if summary is not None:
                row[f"{name}_mape_mean"], row[f"{name}_mape_sd"], row["replications"] = summary
        rows.append(row)
    return pd.DataFrame(rows)


def evaluate_stationwise(test, predictions):
    """
    Station-wise MAPE against the realized sojourn (queue wait + service).
    `predictions` maps a predictor name to a column template containing
    `{station}`, e.g. "meta_aqt_{station}".
    """
    rows = []
    for station in STATIONS:
        actual = f"{META_PREFIX}sojourn_{station.value}"
        stratum = test[test[actual].notna()] if actual in test.columns else test.iloc[0:0]
        if stratum.empty:
            logger.warning(f"No test samples visited station {station.value}")
            continue
        row = {"station": station.value, "samples": len(stratum)}
        for name, template in predictions.items():
            column = template.format(station=station.value)
            if column not in stratum.columns:
                continue
            summary = _summary_row(_mape_by_replication(stratum, actual, column))
            if summary is not None:
                row[f"{name}_mape_mean"], row[f"{name}_mape_sd"], row["replications"] = summary
        rows.append(row)
    return pd.DataFrame(rows)


def train_station_models(train, k=2):
    """One KNN per station, trained on the sojourns of the samples that visited it."""
    models = {}
    for station in STATIONS:
        label = f"{META_PREFIX}sojourn_{station.value}"
        visited = train[train[label].notna()] if label in train.columns else train.iloc[0:0]
        if len(visited) < k:
            logger.warning(f"Too few samples ({len(visited)}) to train the station {station.value} model")
            continue
        models[station] = LosKnnModel(k=k, label=label).fit(visited)
    return models


def train_and_evaluate(dataset, k=2, split=0.75, seed=42, filter_outliers=True):
    """
    Filter, split, fit the flow-wise and station-wise KNN models and score
    them next to the AQT predictions carried in the dataset.
    Returns (model, station_models, flow_table, station_table).
    """
    if filter_outliers:
        dataset = iqr_filter(dataset)
    model, test = knn_fit(dataset, k=k, split=split, seed=seed)
    train, _ = split_dataset(dataset, split, seed)
    station_models = train_station_models(train, k)

    test = test.copy()
    test["knn_total"] = model.predict(test)
    for station, station_model in station_models.items():
        column = f"knn_{station.value}"
        test[column] = np.nan
        visited = test[f"{META_PREFIX}sojourn_{station.value}"].notna()
        if visited.any():
            test.loc[visited, column] = station_model.predict(test[visited])

    flow = evaluate_flowwise(test, {"aqt": f"{META_PREFIX}aqt_total", "knn": "knn_total"})
    stations = evaluate_stationwise(test, {"aqt": f"{META_PREFIX}aqt_{{station}}", "knn": "knn_{station}"})
    logger.info(f"Flow-wise MAPE:\n{flow.to_string(index=False)}")
    logger.info(f"Station-wise MAPE:\n{stations.to_string(index=False)}")
    return model, station_models, flow, stations
