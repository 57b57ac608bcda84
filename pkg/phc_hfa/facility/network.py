"""
Network of PHCs sharing one kernel. Outpatient demand from each catchment is
sent to the preferred facility, or handed to a router (the real-time
assignment layer) that picks the facility to visit.
"""

import logging

from phc_hfa.errors import ConfigurationError
from phc_hfa.facility.models import PatientClass
from phc_hfa.facility.phc import Facility, IdSource
from phc_hfa.sim import MINUTES_PER_DAY, Kernel, RngStreams

logger = logging.getLogger(__name__)

DEFAULT_NEAR_TRAVEL = 15.0
DEFAULT_FAR_TRAVEL = 30.0


def default_travel_matrix(m):
    return [[DEFAULT_NEAR_TRAVEL if i == j else DEFAULT_FAR_TRAVEL for j in range(m)] for i in range(m)]


class Network:
    """
    `travel[i][j]` is the travel time in minutes from catchment i to facility j.
    `router(network, patient, now)` returns an object with a `visited`
    facility index; it is recorded in `decisions`.
    """

    def __init__(self, configs, kernel, travel=None, warmup_end=0.0, router=None):
        if not configs:
            raise ConfigurationError("a network needs at least one facility")
        self.kernel = kernel
        self.travel = travel if travel is not None else default_travel_matrix(len(configs))
        if len(self.travel) != len(configs) or any(len(row) != len(configs) for row in self.travel):
            raise ConfigurationError(f"travel matrix must be {len(configs)}x{len(configs)}")
        self.warmup_end = warmup_end
        self.router = router
        self.ids = IdSource()
        self.facilities = [
            Facility(i, config, kernel, owner=self, warmup_end=warmup_end, ids=self.ids)
            for i, config in enumerate(configs)
        ]
        self.records = []
        self.decisions = []
        # called as observer(network, patient, now, facility_index) once the destination is known
        self.observers = []
        kernel.bind(self)

    def start(self):
        for facility in self.facilities:
            facility.run_day_cycle()

    def handle(self, event):
        self.facilities[event.facility].handle(event)

    def outpatient_demand(self, facility, patient):
        now = self.kernel.clock
        origin = facility.index
        if self.router is None:
            target = origin
        else:
            decision = self.router(self, patient, now)
            self.decisions.append(decision)
            target = decision.visited
        for observer in self.observers:
            observer(self, patient, now, target)
        self.facilities[target].send(patient, now + self.travel[origin][target])

    def patient_finished(self, facility, patient):
        if patient.patient_class is PatientClass.OUTPATIENT:
            self.records.append(patient)

    def measured_records(self):
        """Outpatients that arrived at a facility after warm-up."""
        return [r for r in self.records if r.arrival_time >= self.warmup_end]

    def outpatient_arrivals(self):
        return [f.arrived[PatientClass.OUTPATIENT] for f in self.facilities]


def simulate(configs, horizon_days, warmup_days=0.0, seed=0, travel=None, router=None, observers=(), trace=None):
    """Build a network on a fresh kernel, run it for `horizon_days` (warm-up included) and return it."""
    if horizon_days <= warmup_days:
        raise ConfigurationError(f"horizon ({horizon_days} days) must exceed warm-up ({warmup_days} days)")
    kernel = Kernel(RngStreams(seed), trace=trace)
    network = Network(configs, kernel, travel, warmup_end=warmup_days * MINUTES_PER_DAY, router=router)
    network.observers.extend(observers)
    network.start()
    processed = kernel.run_until(horizon_days * MINUTES_PER_DAY)
    logger.debug(f"Simulated {horizon_days} days (seed {seed}): {processed} events, {len(network.records)} outpatients")
    return network
