# phc_hfa/facility/models.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class PatientClass(str, Enum):
    OUTPATIENT = "outpatient"
    INPATIENT = "inpatient"
    CHILDBIRTH = "childbirth"

    @property
    def high_priority(self):
        return self is not PatientClass.OUTPATIENT


class StationId(str, Enum):
    NCD_NURSE = "n"
    DOCTOR = "d"
    LABORATORY = "l"
    PHARMACY = "p"


# fixed index order I = [n, d, l, p]
STATIONS = (StationId.NCD_NURSE, StationId.DOCTOR, StationId.LABORATORY, StationId.PHARMACY)

ROUTING_CASES = {
    1: (StationId.NCD_NURSE, StationId.DOCTOR, StationId.PHARMACY),
    2: (StationId.NCD_NURSE, StationId.DOCTOR, StationId.LABORATORY, StationId.PHARMACY),
    3: (StationId.DOCTOR, StationId.LABORATORY, StationId.PHARMACY),
    4: (StationId.DOCTOR, StationId.PHARMACY),
}


@dataclass
class StationVisit:
    station: StationId
    enter_queue: float
    start_service: Optional[float] = None
    end_service: Optional[float] = None

    @property
    def wait(self):
        return None if self.start_service is None else self.start_service - self.enter_queue

    @property
    def sojourn(self):
        return None if self.end_service is None else self.end_service - self.enter_queue


@dataclass
class PatientRecord:
    patient_id: int
    patient_class: PatientClass
    age: int = 0
    preferred_facility: int = 0
    decision_time: float = 0.0
    facility: Optional[int] = None
    arrival_time: Optional[float] = None
    needs_lab: Optional[bool] = None
    # 1 for a first visit, 2 or 3 for a scheduled return
    visit_number: int = 1
    visits: list = field(default_factory=list)
    exit_time: Optional[float] = None

    @property
    def los(self):
        if self.exit_time is None or self.arrival_time is None:
            return None
        return self.exit_time - self.arrival_time

    @property
    def path(self):
        return tuple(v.station for v in self.visits)

    @property
    def routing_case(self):
        for case, path in ROUTING_CASES.items():
            if path == self.path:
                return case
        return 0

    def visit(self, station):
        for v in self.visits:
            if v.station is station:
                return v
        return None

    def sojourn(self, station):
        v = self.visit(station)
        return None if v is None else v.sojourn

    def to_dict(self):
        row = {
            'patient_id': self.patient_id,
            'patient_class': self.patient_class.value,
            'age': self.age,
            'preferred_facility': self.preferred_facility,
            'facility': self.facility,
            'decision_time': self.decision_time,
            'arrival_time': self.arrival_time,
            'needs_lab': self.needs_lab,
            'visit_number': self.visit_number,
            'routing_case': self.routing_case,
        }
        for station in STATIONS:
            v = self.visit(station)
            row[f'{station.value}_enter_queue'] = v.enter_queue if v else None
            row[f'{station.value}_start_service'] = v.start_service if v else None
            row[f'{station.value}_end_service'] = v.end_service if v else None
        row['exit_time'] = self.exit_time
        row['los'] = self.los
        return row


@dataclass(frozen=True)
class SubsystemState:
    """
    Observation of one station at `observed_at`.

    `elapsed_service` and `in_service_class` have one entry per server;
    idle servers report 0 elapsed and class None.
    """

    station: StationId
    queue_len_outpatient: int = 0
    queue_len_inpatient: int = 0
    queue_len_childbirth: int = 0
    elapsed_service: tuple = (0.0,)
    in_service_class: tuple = (None,)
    observed_at: float = 0.0

    @property
    def queue_len(self):
        return self.queue_len_outpatient + self.queue_len_inpatient + self.queue_len_childbirth

    @property
    def queue_len_priority(self):
        return self.queue_len_inpatient + self.queue_len_childbirth

    @property
    def busy(self):
        return tuple(c is not None for c in self.in_service_class)

    @property
    def servers(self):
        return len(self.in_service_class)

    def to_dict(self):
        return {
            'station': self.station.value,
            'queue_len_outpatient': self.queue_len_outpatient,
            'queue_len_inpatient': self.queue_len_inpatient,
            'queue_len_childbirth': self.queue_len_childbirth,
            'elapsed_service': list(self.elapsed_service),
            'in_service_class': [c.value if c else None for c in self.in_service_class],
            'observed_at': self.observed_at,
        }
