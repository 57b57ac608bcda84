import pickle
from pathlib import Path

import pandas as pd
import pytest

from phc_hfa.assignment import PredictorKind
from phc_hfa.errors import ConfigurationError, MetricError, ReplicationError
from phc_hfa.experiments import (
    OUTCOMES,
    compliance_sweep,
    delta_net,
    env_jobs,
    load_scenario,
    merge_reports,
    parse_scenario,
    replication_outcomes,
    run_replication,
    run_scenario,
    summarize,
    summary_markdown,
    write_scenario,
    write_sweep,
)
from phc_hfa.experiments.config import env_output_dir
from phc_hfa.facility import FacilityConfig, simulate

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def two_facilities(**extra):
    data = {
        "name": "two",
        "facilities": [
            {"name": "PHC1", "outpatient_interarrival": "exp(9)"},
            {"name": "PHC2", "outpatient_interarrival": "exp(2)"},
        ],
        "horizon_days": 3,
        "warmup_days": 1,
        "replications": 2,
        "seed": 11,
    }
    data.update(extra)
    return parse_scenario(data)


class TestScenarioConfig:
    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem)
    def test_shipped_configs_load(self, path):
        scenario = load_scenario(str(path))
        assert scenario.horizon_days > scenario.warmup_days
        assert len(scenario.travel) == len(scenario.facilities)

    def test_defaults(self):
        scenario = parse_scenario({"facilities": [{"name": "PHC1"}, {"name": "PHC2"}]})
        assert scenario.travel == [[15.0, 30.0], [30.0, 15.0]]
        assert scenario.measured_days == 365
        assert scenario.assignment is None
        assert scenario.sweep_rates == [1.0, 0.75, 0.5, 0.25]
        assert scenario.facilities[0].outpatient_mean_interarrival == 9.0

    def test_field_path_in_error(self):
        with pytest.raises(ConfigurationError, match=r"facilities\.0\.lab_visit_prob"):
            parse_scenario({"facilities": [{"name": "PHC1", "lab_visit_prob": 1.5}]})

    def test_bad_distribution(self):
        with pytest.raises(ConfigurationError, match="outpatient_interarrival"):
            parse_scenario({"facilities": [{"name": "PHC1", "outpatient_interarrival": "weibull(3)"}]})

    @pytest.mark.parametrize("data, fragment", [
        ({"facilities": [{"name": "A"}], "horizon_days": 10, "warmup_days": 10}, "horizon_days"),
        ({"facilities": [{"name": "A"}, {"name": "A"}]}, "unique"),
        ({"facilities": [{"name": "A"}, {"name": "B"}], "travel": [[15, 30]]}, "2x2"),
        ({"facilities": [{"name": "A"}], "travel": [[-1]]}, "non-negative"),
        ({"facilities": []}, "facilities"),
        ({"facilities": [{"name": "A"}], "sweep_rates": [1.2]}, "sweep_rates"),
    ])
    def test_invalid_scenarios(self, data, fragment):
        with pytest.raises(ConfigurationError, match=fragment):
            parse_scenario(data)

    def test_not_a_mapping(self):
        with pytest.raises(ConfigurationError):
            parse_scenario(["PHC1"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_scenario(str(tmp_path / "absent.yaml"))

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("facilities: [\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="malformed"):
            load_scenario(str(path))

    def test_overrides(self):
        scenario = two_facilities().with_overrides(seed=5, replications=3, compliance=0.5, predictor="actual")
        assert scenario.seed == 5
        assert scenario.replications == 3
        assert scenario.assignment.compliance == 0.5
        assert scenario.assignment.predictor is PredictorKind.ACTUAL
        assert two_facilities().assignment is None

    @pytest.mark.parametrize("kwargs", [{"replications": 0}, {"compliance": 1.5}, {"predictor": "crystal"}])
    def test_invalid_overrides(self, kwargs):
        with pytest.raises(ConfigurationError):
            two_facilities().with_overrides(**kwargs)

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("PHC_JOBS", "3")
        assert env_jobs() == 3
        monkeypatch.setenv("PHC_JOBS", "many")
        with pytest.raises(ConfigurationError):
            env_jobs()
        monkeypatch.delenv("PHC_OUTPUT_DIR", raising=False)
        assert env_output_dir() == "results"


class TestStats:
    def test_delta_net(self):
        assert delta_net([58.492, 8.582]) == pytest.approx(85.32, abs=0.01)
        assert delta_net([9.674, 9.494]) == pytest.approx(1.86, abs=0.01)
        assert delta_net([0.0, 0.0]) == 0.0
        assert delta_net([4.0, 2.0, 3.0]) == pytest.approx(50.0)

    def test_delta_net_needs_two_facilities(self):
        with pytest.raises(MetricError):
            delta_net([3.0])

    def test_summarize(self):
        frame = pd.DataFrame({"replication": [0, 1], "PHC1_los": [1.0, 3.0]})
        summary = summarize(frame)
        row = summary.iloc[0]
        assert row["metric"] == "PHC1_los"
        assert row["mean"] == pytest.approx(2.0)
        assert row["sd"] == pytest.approx(2 ** 0.5)
        assert row["replications"] == 2

    def test_single_replication_has_zero_sd(self):
        summary = summarize(pd.DataFrame({"replication": [0], "x": [4.0]}))
        assert summary.iloc[0]["sd"] == 0.0

    def test_summarize_nothing(self):
        with pytest.raises(MetricError):
            summarize(pd.DataFrame())

    def test_replication_row(self):
        configs = [FacilityConfig(name="PHC1"), FacilityConfig(name="PHC2", outpatient_interarrival="exp(2)")]
        network = simulate(configs, 3, warmup_days=1, seed=1)
        row = replication_outcomes(network, 2, replication=4)
        assert row["replication"] == 4
        assert row["beta_pct"] == 0.0
        for outcome in OUTCOMES:
            assert f"PHC1_{outcome}" in row and f"PHC2_{outcome}" in row
            assert 0 <= row[f"delta_net_{outcome}"] <= 100
        assert row["PHC2_outpatients"] > row["PHC1_outpatients"]
        assert row["PHC1_w_opd"] >= 0

    def test_single_facility_row_has_no_spread(self):
        network = simulate([FacilityConfig(name="PHC1")], 2, warmup_days=1, seed=1)
        row = replication_outcomes(network, 1)
        assert not any(key.startswith("delta_net_") for key in row)


class TestRunner:
    def test_baseline_scenario(self, tmp_path):
        trace_path = tmp_path / "trace.tsv"
        result = run_scenario(two_facilities(), trace_path=str(trace_path))
        assert list(result.outcomes["replication"]) == [0, 1]
        assert "PHC2_los" in set(result.summary["metric"])
        assert result.assignments.empty
        assert not result.patients.empty
        assert result.calibration is None
        assert trace_path.read_text(encoding="utf-8")

    def test_replications_differ_but_repeat(self):
        first = run_scenario(two_facilities())
        second = run_scenario(two_facilities())
        pd.testing.assert_frame_equal(first.outcomes, second.outcomes)
        assert first.outcomes["PHC1_los"].iloc[0] != first.outcomes["PHC1_los"].iloc[1]

    @pytest.mark.slow
    def test_parallel_matches_serial(self):
        serial = run_scenario(two_facilities())
        parallel = run_scenario(two_facilities(), jobs=2)
        pd.testing.assert_frame_equal(serial.outcomes, parallel.outcomes)

    def test_assignment_with_calibration(self):
        scenario = two_facilities(
            replications=1,
            assignment={"predictor": "aqt", "compliance": 1.0},
            calibration={"enabled": True, "window_days": 1, "epsilon": 0.5, "max_iterations": 2},
        )
        result = run_scenario(scenario)
        assert result.calibration is not None
        assert result.calibration.windows >= 1
        assert {"chosen", "visited", "score_0", "score_1"} <= set(result.assignments.columns)
        assert 0 <= result.outcomes["beta_pct"].iloc[0] <= 100

    def test_failed_replication_carries_its_index(self):
        scenario = two_facilities(assignment={"predictor": "simml"})
        with pytest.raises(ReplicationError) as info:
            run_replication(scenario, 1, model=None)
        assert info.value.index == 1
        assert isinstance(info.value.cause, ConfigurationError)
        restored = pickle.loads(pickle.dumps(info.value))
        assert restored.index == 1

    def test_compliance_sweep(self):
        scenario = two_facilities(replications=1, assignment={"predictor": "aqt"})
        table, results = compliance_sweep(scenario, rates=[1.0, 0.0])
        assert list(table["compliance"]) == [1.0, 0.0]
        assert {"delta_net_rho_doctor", "delta_net_w_opd", "delta_net_los", "beta_pct", "PHC1_los", "PHC2_los"} <= set(
            table.columns
        )
        assert table["beta_pct"].iloc[1] == 0.0
        assert set(results) == {1.0, 0.0}

    def test_sweep_needs_assignment(self):
        with pytest.raises(ConfigurationError):
            compliance_sweep(two_facilities())


class TestReport:
    @pytest.fixture(scope="class")
    def result(self):
        return run_scenario(two_facilities(replications=1, assignment={"predictor": "aqt"}))

    def test_scenario_files(self, result, tmp_path):
        paths = write_scenario(result, str(tmp_path / "two"))
        names = {Path(p).name for p in paths}
        assert {"outcomes.csv", "summary.csv", "summary.md", "assignments.csv", "patients.csv"} <= names
        markdown = (tmp_path / "two" / "summary.md").read_text(encoding="utf-8")
        assert "Δnet" in markdown
        assert "Diverted outpatients" in markdown
        assert "LOS (min)" in markdown

    def test_single_facility_markdown(self):
        summary = pd.DataFrame([{"metric": "PHC1_los", "mean": 12.5, "sd": 1.25, "replications": 3}])
        markdown = summary_markdown(summary, ["PHC1"], "one")
        assert "Δnet" not in markdown
        assert "12.500 (1.250)" in markdown
        assert "over 3 replication(s)" in markdown

    def test_sweep_files(self, result, tmp_path):
        table = pd.DataFrame([{"compliance": 1.0, "beta_pct": 10.0}])
        write_sweep(table, {1.0: result}, str(tmp_path))
        assert (tmp_path / "sweep.csv").exists()
        assert (tmp_path / "compliance_1.00" / "summary.csv").exists()

    def test_merge(self, result, tmp_path):
        write_scenario(result, str(tmp_path / "a"))
        write_scenario(result, str(tmp_path / "b"))
        report = Path(merge_reports(str(tmp_path)))
        text = report.read_text(encoding="utf-8")
        assert report.name == "report.md"
        assert "## a" in text and "## b" in text
        assert (tmp_path / "a" / "summary.md").exists()

    def test_merge_empty_directory(self, tmp_path):
        report = Path(merge_reports(str(tmp_path)))
        assert report.exists()


@pytest.mark.slow
class TestReferenceNetwork:
    """Small-replication runs of the shipped two-PHC scenarios."""

    def test_baseline_outcomes(self):
        scenario = load_scenario(str(CONFIG_DIR / "baseline.yaml")).model_copy(
            update={"horizon_days": 180, "warmup_days": 30, "replications": 3}
        )
        summary = run_scenario(scenario).summary
        means = dict(zip(summary["metric"], summary["mean"]))

        assert 0.40 <= means["PHC1_rho_doctor"] <= 0.50
        assert means["PHC1_rho_ncd"] == pytest.approx(0.50, abs=0.05)
        assert means["PHC1_rho_pharmacy"] == pytest.approx(0.38, abs=0.05)
        assert 6.5 <= means["PHC1_los"] <= 9.6
        for station in ("ncd", "pharmacy", "lab"):
            assert means[f"PHC2_rho_{station}"] > 1.0
        assert means["PHC2_los"] == pytest.approx(58.5, rel=0.25)
        assert means["delta_net_los"] == pytest.approx(85.3, abs=5.0)

    def test_compliance_narrows_the_spread(self):
        scenario = two_facilities(
            horizon_days=40,
            warmup_days=10,
            replications=2,
            assignment={"predictor": "aqt"},
        )
        table, _ = compliance_sweep(scenario, rates=[0.0, 0.5, 1.0])
        spread = list(table["delta_net_rho_doctor"])
        crowded = list(table["PHC2_los"])
        assert spread[0] >= spread[1] >= spread[2]
        assert crowded[0] >= crowded[1] >= crowded[2]
