"""
Facility configuration. Every default reproduces the reference PHC (input
parameter table plus the daily admin block, return visits and census age
split), so a facility block may give only a name and an outpatient
interarrival time.
"""

from typing import Annotated, Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, field_validator, model_validator

from phc_hfa.errors import ConfigurationError
from phc_hfa.facility.models import PatientClass, StationId
from phc_hfa.sim import MINUTES_PER_DAY
from phc_hfa.sim.distributions import ServiceDistribution


def _parse_distribution(value):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("none", "off", "")):
        return None
    try:
        return ServiceDistribution.parse(value)
    except ConfigurationError as e:
        raise ValueError(str(e)) from e


def _station(key):
    if isinstance(key, StationId):
        return key
    if key in StationId._value2member_map_:
        return StationId(key)
    if str(key).upper() in StationId.__members__:
        return StationId[str(key).upper()]
    raise ValueError(f"unknown station '{key}'")


Distribution = Annotated[
    Optional[ServiceDistribution],
    PlainValidator(_parse_distribution),
    PlainSerializer(lambda d: d.describe() if d is not None else None),
]


class DoctorService(BaseModel):
    model_config = ConfigDict(frozen=True)

    outpatient: Distribution = ServiceDistribution.gaussian(0.87, 0.21)
    inpatient: Distribution = ServiceDistribution.uniform(10, 30)
    childbirth: Distribution = ServiceDistribution.uniform(30, 60)

    def for_class(self, patient_class):
        return getattr(self, patient_class.value)


class FacilityConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    outpatient_interarrival: Distribution = ServiceDistribution.exponential(9)
    inpatient_interarrival: Distribution = ServiceDistribution.exponential(2880)
    childbirth_interarrival: Distribution = ServiceDistribution.exponential(2880)
    doctor_service: DoctorService = DoctorService()
    ncd_service: Distribution = ServiceDistribution.uniform(2, 5)
    lab_service: Distribution = ServiceDistribution.gaussian(3.45, 0.83)
    pharmacy_service: Distribution = ServiceDistribution.gaussian(2.08, 0.72)
    servers: Dict[StationId, int] = Field(default_factory=lambda: {s: 1 for s in StationId})
    lab_visit_prob: float = Field(0.5, ge=0.0, le=1.0)
    ncd_age_threshold: int = Field(30, ge=0)
    # census share of outpatients at or above the NCD age threshold
    age_over_threshold_prob: float = Field(0.422, ge=0.0, le=1.0)
    opd_minutes: float = Field(480.0, gt=0.0, le=1440.0)
    # staffed minutes per day, the utilization denominator
    scheduled_minutes: float = Field(420.0, gt=0.0, le=1440.0)
    # booked once a day when the OPD window closes; it never holds a server
    admin_time: Distribution = ServiceDistribution.gaussian(100, 20, 60, 140)
    admin_stations: Tuple[StationId, ...] = (StationId.DOCTOR, StationId.NCD_NURSE)
    # share of first visits followed by exactly one / exactly two return visits
    two_visit_prob: float = Field(0.2, ge=0.0, le=1.0)
    three_visit_prob: float = Field(0.1, ge=0.0, le=1.0)
    revisit_gap: Distribution = ServiceDistribution.uniform(3 * MINUTES_PER_DAY, 8 * MINUTES_PER_DAY)
    # mean outpatient interarrival fed to the predictors; None means the configured one
    predictor_interarrival: Optional[float] = Field(None, gt=0.0)

    @field_validator("servers", mode="before")
    @classmethod
    def _fill_servers(cls, value):
        merged = {s: 1 for s in StationId}
        for key, count in (value or {}).items():
            merged[_station(key)] = count
        return merged

    @field_validator("servers")
    @classmethod
    def _positive_servers(cls, value):
        for station, count in value.items():
            if count < 1:
                raise ValueError(f"station {station.value} needs at least one server, got {count}")
        return value

    @field_validator("admin_stations", mode="before")
    @classmethod
    def _admin_stations(cls, value):
        if value is None:
            return ()
        if isinstance(value, (str, StationId)):
            value = [value]
        return tuple(_station(key) for key in value)

    @field_validator("ncd_service", "lab_service", "pharmacy_service")
    @classmethod
    def _required_service(cls, value, info):
        if value is None:
            raise ValueError(f"{info.field_name} cannot be disabled")
        return value

    @model_validator(mode="after")
    def _revisits(self):
        if self.two_visit_prob + self.three_visit_prob > 1.0:
            raise ValueError(
                f"two_visit_prob + three_visit_prob must not exceed 1, got {self.two_visit_prob + self.three_visit_prob:g}"
            )
        if self.revisits_enabled and self.revisit_gap is None:
            raise ValueError("revisit_gap is required when return visits are enabled")
        return self

    def service(self, station, patient_class=PatientClass.OUTPATIENT):
        if station is StationId.DOCTOR:
            return self.doctor_service.for_class(patient_class)
        if station is StationId.NCD_NURSE:
            return self.ncd_service
        if station is StationId.LABORATORY:
            return self.lab_service
        return self.pharmacy_service

    def interarrival(self, patient_class):
        return getattr(self, f"{patient_class.value}_interarrival")

    @property
    def revisits_enabled(self):
        return self.two_visit_prob > 0 or self.three_visit_prob > 0

    @property
    def expected_visits(self):
        """Mean visits per first visit, returns included."""
        return 1.0 + self.two_visit_prob + 2.0 * self.three_visit_prob

    @property
    def outpatient_mean_interarrival(self):
        """Mean outpatient interarrival in OPD minutes (infinite when demand is off)."""
        if self.predictor_interarrival is not None:
            return self.predictor_interarrival
        if self.outpatient_interarrival is None:
            return float("inf")
        return self.outpatient_interarrival.mean
