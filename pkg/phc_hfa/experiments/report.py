"""
CSV and markdown output for scenario runs, compliance sweeps and merged
result directories.
"""

import logging
import os
from pathlib import Path

import pandas as pd

from phc_hfa.experiments.stats import OUTCOMES

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"

OUTCOME_LABELS = {
    "rho_doctor": "Doctor utilization",
    "rho_ncd": "NCD nurse utilization",
    "rho_pharmacy": "Pharmacy utilization",
    "rho_lab": "Lab utilization",
    "w_opd": "Outpatient wait, doctor (min)",
    "w_pharmacy": "Wait, pharmacy (min)",
    "w_lab": "Wait, lab (min)",
    "w_ncd": "Wait, NCD nurse (min)",
    "los": "LOS (min)",
}


def write_csv(frame, path):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _cell(stats, metric, percent=False):
    if metric not in stats:
        return "-"
    mean, sd = stats[metric]
    suffix = "%" if percent else ""
    return f"{mean:.3f}{suffix} ({sd:.3f})"


def summary_markdown(summary, facility_names, title):
    """Outcome table with one mean (SD) column per facility and the network spread."""
    stats = {row.metric: (row.mean, row.sd) for row in summary.itertuples(index=False)}
    replications = int(summary["replications"].max()) if len(summary) else 0
    spread = len(facility_names) > 1
    header = ["Outcome", *facility_names] + (["Δnet"] if spread else [])
    lines = [
        f"# {title}",
        "",
        f"Mean (SD) over {replications} replication(s).",
        "",
        "| " + " | ".join(header) + " |",
        "|" + "---|" * len(header),
    ]
    for outcome in OUTCOMES:
        cells = [OUTCOME_LABELS[outcome]]
        cells += [_cell(stats, f"{name}_{outcome}") for name in facility_names]
        if spread:
            cells.append(_cell(stats, f"delta_net_{outcome}", percent=True))
        lines.append("| " + " | ".join(cells) + " |")
    lines += ["", f"Diverted outpatients: {_cell(stats, 'beta_pct', percent=True)}", ""]
    return "\n".join(lines)


def write_scenario(result, out_dir):
    """outcomes.csv, summary.csv and summary.md, plus the first replication's audit logs."""
    scenario = result.scenario
    out = Path(out_dir)
    paths = [
        write_csv(result.outcomes, str(out / "outcomes.csv")),
        write_csv(result.summary, str(out / "summary.csv")),
    ]
    markdown = out / "summary.md"
    markdown.write_text(summary_markdown(result.summary, scenario.facility_names, scenario.name), encoding="utf-8")
    paths.append(str(markdown))
    if not result.assignments.empty:
        paths.append(write_csv(result.assignments, str(out / "assignments.csv")))
    if not result.patients.empty:
        paths.append(write_csv(result.patients, str(out / "patients.csv")))
    if result.calibration is not None:
        paths.append(result.calibration.write(str(out / "lambda_trace.csv")))
    return paths


def write_sweep(table, results, out_dir):
    """Plot-ready sweep table plus one full scenario report per compliance rate."""
    out = Path(out_dir)
    paths = [write_csv(table, str(out / "sweep.csv"))]
    for rate, result in results.items():
        paths += write_scenario(result, str(out / f"compliance_{rate:.2f}"))
    return paths


def merge_reports(results_dir, output=None):
    """Collect every summary.csv below `results_dir` into one markdown file."""
    root = Path(results_dir)
    summaries = sorted(root.rglob("summary.csv"))
    if not summaries:
        logger.warning(f"No summary.csv found under {root}")
    sections = [f"# Results under {root}", ""]
    for path in summaries:
        summary = pd.read_csv(path)
        sections += [f"## {path.parent.relative_to(root) if path.parent != root else '.'}", ""]
        sections.append(_markdown_table(summary))
        sections.append("")
    output = Path(output) if output is not None else root / "report.md"
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text("\n".join(sections), encoding="utf-8")
    logger.info(f"Merged {len(summaries)} summaries into {output}")
    return str(output)


def _markdown_table(frame):
    lines = ["| " + " | ".join(str(c) for c in frame.columns) + " |", "|" + "---|" * len(frame.columns)]
    for row in frame.itertuples(index=False):
        cells = [f"{v:.3f}" if isinstance(v, float) else str(v) for v in row]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines)
