import math

import pandas as pd
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import empty_observation
from phc_hfa.aqt import (
    AqtPredictor,
    extrapolate_mgm,
    geometric_priority_delay,
    net_priority_interarrival,
    predict_los_doctor,
    predict_los_lab,
    predict_los_ncd,
    predict_los_pharmacy,
    priority_service_mean,
    quantile_anchors,
    remaining_service_time,
    remaining_service_time_exact,
    total_los,
)
from phc_hfa.errors import PriorityInstabilityError, UnsupportedDistributionError
from phc_hfa.facility import FacilityConfig, PatientClass, StationId, SubsystemState
from phc_hfa.sim import ServiceDistribution


def busy(station, elapsed, queue=0, patient_class=PatientClass.OUTPATIENT):
    return SubsystemState(
        station=station,
        queue_len_outpatient=queue,
        elapsed_service=(elapsed,),
        in_service_class=(patient_class,),
    )


def idle(station, queue=0, priority=0):
    return SubsystemState(station=station, queue_len_outpatient=queue, queue_len_inpatient=priority)


class TestRemainingServiceTime:
    @pytest.mark.parametrize("x, expected", [(1.0, 2.5), (3.0, 0.5), (4.0, 0.25), (4.5, 0.25), (6.0, 0.0)])
    def test_uniform_bands(self, x, expected):
        assert remaining_service_time(ServiceDistribution.uniform(2, 5), x) == pytest.approx(expected)

    def test_gaussian_third_band(self):
        assert remaining_service_time(ServiceDistribution.gaussian(0.87, 0.21), 1.2) == pytest.approx(0.15)

    def test_anchors(self):
        assert quantile_anchors(ServiceDistribution.uniform(2, 5)) == pytest.approx((3.5, 4.25, 5.0))
        q50, q75, qext = quantile_anchors(ServiceDistribution.gaussian(10, 2))
        assert (q50, q75, qext) == pytest.approx((10, 11.35, 16))

    def test_exponential_is_unsupported(self):
        with pytest.raises(UnsupportedDistributionError):
            remaining_service_time(ServiceDistribution.exponential(9), 1.0)

    def test_negative_elapsed_rejected(self):
        with pytest.raises(ValueError):
            remaining_service_time(ServiceDistribution.uniform(2, 5), -0.1)

    @pytest.mark.parametrize("dist, x, expected", [
        (ServiceDistribution.uniform(2, 5), 3.0, 1.0),
        (ServiceDistribution.uniform(2, 5), 0.0, 3.5),
        (ServiceDistribution.exponential(9), 4.0, 9.0),
        (ServiceDistribution.gaussian(0.87, 0.21), 0.0, 0.87),
    ])
    def test_exact_reference(self, dist, x, expected):
        assert remaining_service_time_exact(dist, x) == pytest.approx(expected, abs=1e-3)

    @given(
        a=st.floats(min_value=0, max_value=50),
        width=st.floats(min_value=0.1, max_value=50),
        share=st.floats(min_value=0, max_value=1),
    )
    def test_uniform_error_bound(self, a, width, share):
        dist = ServiceDistribution.uniform(a, a + width)
        q50, _, qext = quantile_anchors(dist)
        x = share * qext
        error = abs(remaining_service_time(dist, x) - remaining_service_time_exact(dist, x))
        assert error <= 0.5 * (qext - q50) + 1e-6

    @given(
        mu=st.floats(min_value=0.5, max_value=20),
        sigma=st.floats(min_value=0.1, max_value=5),
        share=st.floats(min_value=0, max_value=1),
    )
    def test_gaussian_error_bound(self, mu, sigma, share):
        dist = ServiceDistribution.gaussian(mu, sigma)
        q50, _, qext = quantile_anchors(dist)
        x = share * qext
        error = abs(remaining_service_time(dist, x) - remaining_service_time_exact(dist, x))
        assert error <= 0.5 * (qext - q50) + 1e-6

    @given(x=st.floats(min_value=0, max_value=6), step=st.floats(min_value=0, max_value=1))
    def test_non_increasing_within_a_band(self, x, step):
        dist = ServiceDistribution.uniform(2, 5)
        anchors = (0.0, *quantile_anchors(dist), math.inf)
        band = next(i for i in range(len(anchors) - 1) if anchors[i] <= x < anchors[i + 1])
        later = x + step
        assume(later < anchors[band + 1])
        assert remaining_service_time(dist, later) <= remaining_service_time(dist, x) + 1e-12


class TestExtrapolateMgm:
    dist = ServiceDistribution.uniform(2, 6)

    def test_busy_station_projection(self):
        state = busy(StationId.NCD_NURSE, 1.0, queue=5)
        result = extrapolate_mgm(state, 11, 5.5, self.dist)
        assert result.remaining_now == pytest.approx(3.0)
        assert result.arrivals == pytest.approx(1.0)
        assert result.completed == pytest.approx(2.0)
        assert result.queue_len == pytest.approx(4.0)
        assert result.elapsed == pytest.approx(0.0)
        assert result.remaining == pytest.approx(4.0)
        assert result.delay == pytest.approx(20.0)
        assert result.los == pytest.approx(24.0)

    def test_elapsed_wraps_modulo_mean_service(self):
        result = extrapolate_mgm(busy(StationId.NCD_NURSE, 1.0, queue=5), 10, 5.5, self.dist)
        assert result.elapsed == pytest.approx(3.0)
        assert result.remaining == pytest.approx(1.0)

    def test_arrival_count_excludes_the_patient(self):
        assert extrapolate_mgm(busy(StationId.NCD_NURSE, 1.0), 18, 9, self.dist).arrivals == pytest.approx(1.0)
        assert extrapolate_mgm(idle(StationId.NCD_NURSE), 2, 9, self.dist).arrivals == 0.0

    def test_zero_delta_keeps_observed_residual(self):
        result = extrapolate_mgm(busy(StationId.NCD_NURSE, 1.0, queue=2), 0, 9, self.dist)
        assert result.remaining == pytest.approx(3.0)
        assert result.los == pytest.approx(2 * 4 + 3 + 4)

    @pytest.mark.parametrize("delta, interarrival", [(-1, 9), (5, 0)])
    def test_invalid_arguments(self, delta, interarrival):
        with pytest.raises(ValueError):
            extrapolate_mgm(idle(StationId.NCD_NURSE), delta, interarrival, self.dist)

    @given(
        queue=st.integers(min_value=0, max_value=30),
        extra=st.integers(min_value=1, max_value=10),
        delta=st.floats(min_value=0, max_value=120),
        elapsed=st.floats(min_value=0, max_value=6),
    )
    def test_los_non_decreasing_in_queue(self, queue, extra, delta, elapsed):
        shorter = extrapolate_mgm(busy(StationId.NCD_NURSE, elapsed, queue), delta, 7, self.dist)
        longer = extrapolate_mgm(busy(StationId.NCD_NURSE, elapsed, queue + extra), delta, 7, self.dist)
        assert longer.los >= shorter.los - 1e-9

    @given(
        queue=st.integers(min_value=0, max_value=30),
        delta=st.floats(min_value=0, max_value=120),
        interarrival=st.floats(min_value=0.5, max_value=30),
        factor=st.floats(min_value=1, max_value=10),
    )
    def test_los_non_increasing_in_interarrival(self, queue, delta, interarrival, factor):
        state = busy(StationId.NCD_NURSE, 1.0, queue)
        busier = extrapolate_mgm(state, delta, interarrival, self.dist)
        calmer = extrapolate_mgm(state, delta, interarrival * factor, self.dist)
        assert calmer.los <= busier.los + 1e-9

    @given(queue=st.integers(min_value=0, max_value=30), delta=st.floats(min_value=0, max_value=500))
    def test_projected_queue_never_negative(self, queue, delta):
        assert extrapolate_mgm(busy(StationId.NCD_NURSE, 2.5, queue), delta, 3, self.dist).queue_len >= 0


class TestNcd:
    def test_waiting_queue_with_idle_nurse(self, config):
        result = predict_los_ncd(idle(StationId.NCD_NURSE, queue=2), 0, 9, 0.5, config=config)
        assert result.los == pytest.approx(10.5)

    def test_empty_station_is_one_service(self, config):
        assert predict_los_ncd(idle(StationId.NCD_NURSE), 0, 9, 0.5, config=config).los == pytest.approx(3.5)

    def test_no_ncd_population(self, config):
        assert predict_los_ncd(idle(StationId.NCD_NURSE, queue=4), 10, 9, 0.0, config=config).los == 0.0


class TestPriorityCorrection:
    def test_geometric_delay(self):
        assert geometric_priority_delay(10, 1440, 32.5) == pytest.approx(10 * 1440 / 1407.5)

    @given(
        naive=st.floats(min_value=0, max_value=500),
        interarrival=st.floats(min_value=10, max_value=5000),
        load=st.floats(min_value=0, max_value=0.9),
    )
    def test_closed_form_matches_series(self, naive, interarrival, load):
        service = load * interarrival
        series = sum(naive * load ** k for k in range(400))
        assert geometric_priority_delay(naive, interarrival, service) == pytest.approx(series, rel=1e-9, abs=1e-9)

    def test_no_priority_stream(self):
        assert geometric_priority_delay(10, math.inf, 32.5) == 10

    def test_unstable_series(self):
        with pytest.raises(PriorityInstabilityError):
            geometric_priority_delay(10, 20, 20)

    def test_merged_streams(self):
        assert net_priority_interarrival(2880, 2880) == pytest.approx(1440)
        assert net_priority_interarrival(None, 2880) == pytest.approx(2880)
        assert net_priority_interarrival(None, None) == math.inf

    def test_rate_weighted_service(self):
        assert priority_service_mean(2880, 20, 2880, 45) == pytest.approx(32.5)
        assert priority_service_mean(1440, 20, math.inf, 45) == pytest.approx(20)


class TestDoctor:
    def test_empty_doctor_without_priority_classes(self):
        config = FacilityConfig(name="PHC1", inpatient_interarrival=None, childbirth_interarrival=None)
        result = predict_los_doctor(idle(StationId.DOCTOR), 0, 0, False, config)
        assert result.los == pytest.approx(0.87)
        assert result.delay == 0

    def test_priority_patient_in_service_delays_outpatient(self, config):
        state = busy(StationId.DOCTOR, 5.0, patient_class=PatientClass.INPATIENT)
        result = predict_los_doctor(state, 0, 0, False, config)
        # inpatient uniform(10,30): 15 minutes left at elapsed 5
        assert result.remaining == pytest.approx(15.0)
        assert result.naive_delay == pytest.approx(15.0)
        assert result.delay == pytest.approx(15.0 * 1440 / 1407.5)

    def test_queued_priority_work_counts(self, config):
        result = predict_los_doctor(idle(StationId.DOCTOR, priority=1), 0, 0, False, config)
        assert result.queue_len_priority == pytest.approx(1.0)
        assert result.naive_delay == pytest.approx(32.5)

    def test_unstable_priority_load(self):
        config = FacilityConfig(
            name="PHC1",
            inpatient_interarrival="exp(20)",
            childbirth_interarrival=None,
            doctor_service={"inpatient": "uniform(10,30)"},
        )
        with pytest.raises(PriorityInstabilityError):
            predict_los_doctor(idle(StationId.DOCTOR), 5, 0, False, config)
        result = predict_los_doctor(idle(StationId.DOCTOR), 5, 0, False, config, priority_correction=False)
        assert not result.stable
        assert result.delay == result.naive_delay

    @given(
        queue=st.integers(min_value=0, max_value=40),
        extra=st.integers(min_value=1, max_value=10),
        delta=st.floats(min_value=0, max_value=60),
    )
    def test_los_non_decreasing_in_outpatient_queue(self, queue, extra, delta):
        config = FacilityConfig(name="PHC1")
        shorter = predict_los_doctor(idle(StationId.DOCTOR, queue), delta, 0, False, config)
        longer = predict_los_doctor(idle(StationId.DOCTOR, queue + extra), delta, 0, False, config)
        assert longer.los >= shorter.los - 1e-9


class TestDownstream:
    def test_lab_arrivals_are_capped_by_doctor_throughput(self, config):
        result = predict_los_lab(idle(StationId.LABORATORY), 0, 0, 1.74, 4, config)
        assert result.arrivals == 2

    def test_pharmacy_arrivals_from_doctor_and_lab(self, config):
        result = predict_los_pharmacy(idle(StationId.PHARMACY), 0, 0, 1.74, 3.45, 3, 1, config)
        assert result.arrivals == 3

    def test_pharmacy_drains_during_upstream_stays(self, config):
        result = predict_los_pharmacy(idle(StationId.PHARMACY, queue=2), 4, 0, 1.74, 3.45, 3, 1, config)
        assert result.completed == 4
        assert result.queue_len == pytest.approx(1.0)
        assert result.los == pytest.approx(2 * 2.08)


class TestTotal:
    def test_ncd_patient(self):
        assert total_los(40, (4, 1, 5, 3)).total == pytest.approx(10.5)

    def test_young_patient_skips_ncd(self):
        prediction = total_los(20, (4, 1, 5, 3))
        assert prediction.total == pytest.approx(6.5)
        assert prediction.ncd == 0.0
        assert prediction.weights == (0.0, 1.0, 0.5, 1.0)


class TestAqtPredictor:
    def test_empty_facility(self, config):
        predictor = AqtPredictor(config)
        total = predictor.predict_total(20, empty_observation(), 0)
        assert total == pytest.approx(0.87 + 0.5 * 3.45 + 2.08)

    def test_ncd_visitor_pays_the_nurse(self, config):
        predictor = AqtPredictor(config)
        young = predictor.predict_total(20, empty_observation(), 0)
        old = predictor.predict_total(40, empty_observation(), 0)
        assert old >= young + 3.5

    def test_interarrival_override(self, config):
        assert AqtPredictor(config).outpatient_interarrival == 9
        assert AqtPredictor(config, interarrival=4.5).outpatient_interarrival == 4.5

    def test_fallback_is_flagged(self):
        config = FacilityConfig(
            name="PHC1",
            inpatient_interarrival="exp(20)",
            childbirth_interarrival=None,
            doctor_service={"inpatient": "uniform(10,30)"},
        )
        detailed = AqtPredictor(config).predict_detailed(20, empty_observation(), 3)
        assert detailed.fallback
        assert math.isfinite(detailed.total)

    def test_longer_queue_never_predicts_less(self, config):
        predictor = AqtPredictor(config)
        calm = predictor.predict_total(20, empty_observation(), 0)
        crowded = predictor.predict_total(20, empty_observation(idle(StationId.DOCTOR, queue=12)), 0)
        assert crowded > calm

    def test_debug_rows_are_dumped(self, config, tmp_path):
        predictor = AqtPredictor(config, debug=True)
        predictor.predict_total(35, empty_observation(), 30)
        predictor.predict_total(20, empty_observation(), 15)
        path = predictor.dump_debug(str(tmp_path / "aqt" / "debug.csv"))
        frame = pd.read_csv(path)
        assert len(frame) == 2
        assert {"age", "delta", "n_los", "d_delay", "l_arrivals", "p_queue_len", "total"} <= set(frame.columns)
