import io

import hypothesis
import numpy as np
import pytest

from phc_hfa.facility import FacilityConfig, PatientClass, PatientRecord, STATIONS, SubsystemState
from phc_hfa.sim import Kernel, RngStreams

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile("fast")


@pytest.fixture
def config():
    return FacilityConfig(name="PHC1")


@pytest.fixture
def quiet_config():
    """No arrivals of any class."""
    return FacilityConfig(
        name="QUIET",
        outpatient_interarrival=None,
        inpatient_interarrival=None,
        childbirth_interarrival=None,
    )


@pytest.fixture
def kernel():
    return Kernel(RngStreams(11))


@pytest.fixture
def trace():
    return io.StringIO()


def empty_observation(*states):
    """Observation of an idle facility with the given station states swapped in."""
    observation = {s: SubsystemState(station=s) for s in STATIONS}
    for state in states:
        observation[state.station] = state
    return observation


def outpatient(patient_id=1, age=20, needs_lab=False, preferred=0):
    return PatientRecord(
        patient_id=patient_id,
        patient_class=PatientClass.OUTPATIENT,
        age=age,
        preferred_facility=preferred,
        needs_lab=needs_lab,
    )


class Collector:
    """Facility owner that keeps every finished patient and sends demand straight in."""

    def __init__(self):
        self.finished = []

    def outpatient_demand(self, facility, patient):
        facility.send(patient, facility.now)

    def patient_finished(self, facility, patient):
        self.finished.append(patient)
