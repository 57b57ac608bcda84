from phc_hfa.facility.config import DoctorService, FacilityConfig
from phc_hfa.facility.models import (
    PatientClass,
    PatientRecord,
    ROUTING_CASES,
    STATIONS,
    StationId,
    StationVisit,
    SubsystemState,
)
from phc_hfa.facility.network import Network, default_travel_matrix, simulate
from phc_hfa.facility.phc import Facility, Station, opd_open, route

__all__ = [
    "DoctorService",
    "FacilityConfig",
    "PatientClass",
    "PatientRecord",
    "ROUTING_CASES",
    "STATIONS",
    "StationId",
    "StationVisit",
    "SubsystemState",
    "Network",
    "default_travel_matrix",
    "simulate",
    "Facility",
    "Station",
    "opd_open",
    "route",
]
