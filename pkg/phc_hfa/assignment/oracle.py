"""
Clairvoyant LOS: snapshot one facility at decision time, restore it on a
private kernel, let the patient arrive after the travel time and run the clone
until the patient leaves.

Every clone for one patient draws from a copy of the same oracle stream, so
the candidates are compared under common random numbers. With
`mirror_streams` the clone keeps the snapshot's copies of the network streams
instead and replays the draws the network itself makes next.
"""

import dataclasses
import logging
import math

from phc_hfa.errors import OracleError
from phc_hfa.facility.phc import ADMIN_KIND, DEMAND_KINDS, opd_open
from phc_hfa.sim import MINUTES_PER_DAY, Kernel, RngStreams

logger = logging.getLogger(__name__)

DEFAULT_GUARD_DAYS = 10.0
# new demand is replaced by the synthetic stream; admin bookings never move a patient
SKIPPED_KINDS = DEMAND_KINDS | {ADMIN_KIND}


class _CloneOwner:
    """Stands in for the network inside a clone; adds synthetic outpatient demand."""

    def __init__(self, kernel, rng, interarrival, until):
        self.kernel = kernel
        self.rng = rng
        self.interarrival = interarrival
        self.until = until
        self.facility = None

    def handle(self, event):
        if event.kind == "synthetic":
            self._synthetic_arrival()
        else:
            self.facility.handle(event)

    def schedule_synthetic(self, start):
        if not math.isfinite(self.interarrival):
            return
        t = start + self.rng.exponential(self.interarrival)
        if t < self.until:
            self.kernel.schedule(t, "synthetic", facility=self.facility.index)

    def _synthetic_arrival(self):
        now = self.kernel.clock
        if opd_open(now, self.facility.config.opd_minutes):
            patient = self.facility.new_outpatient(now, self.rng)
            self.facility.send(patient, now)
        self.schedule_synthetic(now)

    def outpatient_demand(self, facility, patient):
        facility.send(patient, self.kernel.clock)

    def patient_finished(self, facility, patient):
        pass


def clone_facility(network, facility_index, t, mirror_streams=False):
    """
    Kernel restored from a snapshot of facility `facility_index` and its
    pending patient-flow events at t. The network and the facility config are
    shared, everything else is a private copy; the network streams are copied
    only with `mirror_streams`.
    """
    facility = network.facilities[facility_index]
    snapshot = network.kernel.snapshot(
        select=lambda e: e.facility == facility_index and e.kind not in SKIPPED_KINDS,
        model=facility,
        keep=(network, facility.config),
        streams=mirror_streams,
    )
    kernel = Kernel(start=t)
    kernel.restore(snapshot)
    return kernel


def actual_los_oracle(
    network,
    facility_index,
    patient,
    t,
    delta,
    rng=None,
    interarrival=None,
    guard_days=DEFAULT_GUARD_DAYS,
    mirror_streams=False,
):
    """
    Realized LOS of `patient` at facility `facility_index` if it arrived at
    t + delta, from a forward run of a copy of that facility's state at t.

    Outpatients who decided before t and are en route keep their arrival
    events; new demand that could still arrive before the patient follows a
    Poisson stream at the facility's `interarrival`.
    """
    facility = network.facilities[facility_index]
    if rng is None:
        rng = network.kernel.streams.spawn(("oracle", patient.patient_id))
    if interarrival is None:
        interarrival = facility.config.outpatient_mean_interarrival

    kernel = clone_facility(network, facility_index, t, mirror_streams)
    clone = kernel.model
    if not mirror_streams:
        kernel.streams = RngStreams.shared(rng)
    owner = kernel.bind(_CloneOwner(kernel, rng, interarrival, until=t + delta))
    owner.facility = clone
    clone.owner = owner

    earliest = t + min(row[facility_index] for row in network.travel)
    owner.schedule_synthetic(max(earliest, t))

    ghost = dataclasses.replace(patient, visits=[], facility=None, arrival_time=None, exit_time=None)
    clone.send(ghost, t + delta)

    limit = t + guard_days * MINUTES_PER_DAY
    while ghost.exit_time is None:
        if kernel.peek() > limit:
            raise OracleError(
                f"clone of {facility.name} ran past {guard_days:g} days without patient {patient.patient_id} leaving"
            )
        if kernel.step() is None:
            raise OracleError(f"clone of {facility.name} ran out of events before patient {patient.patient_id} left")
    return ghost.los
