"""
PHC facility model: NCD nurse, doctor (non-preemptive priority for inpatients
and childbirth patients), laboratory and pharmacy, driven by a daily OPD
calendar.

First visits arrive only inside the daily OPD window and every station keeps
serving after the window closes until its queue drains. Return visits come
back a few days after the first one, at whatever hour that falls on.
Inpatients and childbirth patients arrive around the clock; those arriving
during OPD hours see the doctor, the others go to the duty nurse and leave the
modeled scope. When the window closes the admin block of the day is booked to
the admin stations.
"""

import logging
from collections import Counter
from dataclasses import dataclass

from phc_hfa.errors import ConfigurationError
from phc_hfa.facility.models import PatientClass, PatientRecord, StationId, StationVisit, SubsystemState, STATIONS
from phc_hfa.sim import MINUTES_PER_DAY

logger = logging.getLogger(__name__)

PRIORITY_ARRIVAL_KINDS = {
    "arrive_inpatient": PatientClass.INPATIENT,
    "arrive_childbirth": PatientClass.CHILDBIRTH,
}
# events that create new outpatient demand rather than move patients already committed
DEMAND_KINDS = frozenset({"generate", "revisit"})
ADMIN_KIND = "admin"


def opd_open(t, opd_minutes):
    return (t % MINUTES_PER_DAY) < opd_minutes


def day_start(t):
    return int(t // MINUTES_PER_DAY) * MINUTES_PER_DAY


def next_day_start(t):
    return day_start(t) + MINUTES_PER_DAY


def route(patient, completed, rng, lab_visit_prob=0.5, age_threshold=30):
    """
    Next station after `completed` (None on arrival), or None when the patient
    leaves the modeled scope.

    A lab referral already drawn on the record is honored; otherwise it is
    drawn here.
    """
    if patient.patient_class.high_priority:
        return StationId.DOCTOR if completed is None else None
    if completed is None:
        return StationId.NCD_NURSE if patient.age >= age_threshold else StationId.DOCTOR
    if completed is StationId.NCD_NURSE:
        return StationId.DOCTOR
    if completed is StationId.DOCTOR:
        if patient.needs_lab is None:
            patient.needs_lab = bool(rng.random() < lab_visit_prob)
        return StationId.LABORATORY if patient.needs_lab else StationId.PHARMACY
    if completed is StationId.LABORATORY:
        return StationId.PHARMACY
    return None


class IdSource:
    def __init__(self, start=1):
        self.value = start

    def next(self):
        value = self.value
        self.value += 1
        return value


@dataclass
class RevisitPlan:
    age: int
    next_visit: int
    last_visit: int


class Station:
    def __init__(self, station_id, servers=1, prioritized=False):
        self.station_id = station_id
        self.prioritized = prioritized
        self.queue = []
        self.serving = [None] * servers
        self.started = [0.0] * servers
        # finished service inside the measurement window
        self.busy_time = 0.0
        self.admin_time = 0.0

    def enqueue(self, patient):
        """
        Append FIFO; at a prioritized station higher-priority patients go
        after the waiting higher-priority band and ahead of every outpatient.
        """
        if self.prioritized and patient.patient_class.high_priority:
            position = 0
            while position < len(self.queue) and self.queue[position].patient_class.high_priority:
                position += 1
            self.queue.insert(position, patient)
            return position
        self.queue.append(patient)
        return len(self.queue) - 1

    def free_server(self):
        for i, occupant in enumerate(self.serving):
            if occupant is None:
                return i
        return None

    def server_of(self, patient_id):
        for i, occupant in enumerate(self.serving):
            if occupant is not None and occupant.patient_id == patient_id:
                return i
        raise KeyError(f"patient {patient_id} is not in service at {self.station_id.value}")

    def accrue(self, start, end, window_start):
        """Add the part of the service [start, end] that lies after `window_start`."""
        measured = end - max(start, window_start)
        if measured > 0:
            self.busy_time += measured

    def busy_until(self, now, window_start):
        """Accrued busy time plus the measured part of the services still running at `now`."""
        running = sum(
            max(0.0, now - max(start, window_start))
            for occupant, start in zip(self.serving, self.started)
            if occupant is not None
        )
        return self.busy_time + running

    def observe(self, now):
        counts = Counter(p.patient_class for p in self.queue)
        return SubsystemState(
            station=self.station_id,
            queue_len_outpatient=counts[PatientClass.OUTPATIENT],
            queue_len_inpatient=counts[PatientClass.INPATIENT],
            queue_len_childbirth=counts[PatientClass.CHILDBIRTH],
            elapsed_service=tuple(
                (now - start) if occupant is not None else 0.0
                for occupant, start in zip(self.serving, self.started)
            ),
            in_service_class=tuple(o.patient_class if o is not None else None for o in self.serving),
            observed_at=now,
        )


class Facility:
    """
    One PHC bound to a kernel. `owner` receives finished patients
    (`patient_finished`) and new outpatient demand from this facility's
    catchment (`outpatient_demand`), return visits included.
    """

    def __init__(self, index, config, kernel, owner=None, warmup_end=0.0, ids=None):
        self.index = index
        self.config = config
        self.kernel = kernel
        self.owner = owner
        self.warmup_end = warmup_end
        self.ids = ids if ids is not None else IdSource()
        self.stations = {
            s: Station(s, config.servers[s], prioritized=(s is StationId.DOCTOR)) for s in STATIONS
        }
        self.present = {}
        self.in_transit = {}
        # first-visit patient id -> pending return visits
        self.revisits = {}
        self.arrived = Counter()
        self.exited = Counter()
        self.bypassed = Counter()

    @property
    def name(self):
        return self.config.name

    @property
    def now(self):
        return self.kernel.clock

    def _rng(self, *key):
        return self.kernel.streams.get(key)

    # ------------------------
    # Daily calendar
    # ------------------------

    def run_day_cycle(self):
        """Start the OPD demand stream, the around-the-clock priority arrivals and the daily admin block."""
        for kind, patient_class in PRIORITY_ARRIVAL_KINDS.items():
            dist = self.config.interarrival(patient_class)
            if dist is not None:
                gap = dist.sample(self._rng("arrivals", self.index, patient_class.value))
                self.kernel.schedule(self.now + gap, kind, facility=self.index)
        if self.config.outpatient_interarrival is not None:
            gap = self.config.outpatient_interarrival.sample(self._rng("arrivals", self.index, "outpatient"))
            self.kernel.schedule(self.now + gap, "generate", facility=self.index)
        if self.config.admin_time is not None and self.config.admin_stations:
            close = day_start(self.now) + self.config.opd_minutes
            if close < self.now:
                close += MINUTES_PER_DAY
            self.kernel.schedule(close, ADMIN_KIND, facility=self.index)

    def handle(self, event):
        if event.kind == "service_end":
            self._on_service_end(event.entity, StationId(event.station))
        elif event.kind == "arrive":
            self._on_outpatient_arrival(event.entity)
        elif event.kind == "generate":
            self._on_generate()
        elif event.kind == "revisit":
            self._on_revisit(event.entity)
        elif event.kind in PRIORITY_ARRIVAL_KINDS:
            self._on_priority_arrival(PRIORITY_ARRIVAL_KINDS[event.kind], event.kind)
        elif event.kind == ADMIN_KIND:
            self._on_admin()
        else:
            raise ValueError(f"facility {self.name} cannot handle event kind '{event.kind}'")

    def new_outpatient(self, now, rng=None, age=None, visit_number=1):
        rng = rng if rng is not None else self._rng("routing", self.index)
        if age is None:
            threshold = self.config.ncd_age_threshold
            if threshold == 0 or rng.random() < self.config.age_over_threshold_prob:
                age = int(rng.integers(threshold, max(threshold + 1, 91)))
            else:
                age = int(rng.integers(0, threshold))
        needs_lab = bool(rng.random() < self.config.lab_visit_prob)
        return PatientRecord(
            patient_id=self.ids.next(),
            patient_class=PatientClass.OUTPATIENT,
            age=age,
            preferred_facility=self.index,
            decision_time=now,
            needs_lab=needs_lab,
            visit_number=visit_number,
        )

    def _on_generate(self):
        now = self.now
        if opd_open(now, self.config.opd_minutes):
            patient = self.new_outpatient(now)
            self._plan_revisits(patient)
            self._demand(patient)
            base = now
        else:
            # sampled past the window: discarded, the next day's stream continues
            base = next_day_start(now)
        gap = self.config.outpatient_interarrival.sample(self._rng("arrivals", self.index, "outpatient"))
        self.kernel.schedule(base + gap, "generate", facility=self.index)

    def _plan_revisits(self, patient):
        """Draw the episode length of a first visit and schedule its returns one gap apart."""
        config = self.config
        if not config.revisits_enabled:
            return
        rng = self._rng("revisits", self.index)
        draw = rng.random()
        if draw < config.three_visit_prob:
            last_visit = 3
        elif draw < config.three_visit_prob + config.two_visit_prob:
            last_visit = 2
        else:
            return
        gap = config.revisit_gap.sample(rng)
        self.revisits[patient.patient_id] = RevisitPlan(patient.age, 2, last_visit)
        for k in range(1, last_visit):
            self.kernel.schedule(patient.decision_time + k * gap, "revisit", facility=self.index, entity=patient.patient_id)

    def _on_revisit(self, first_visit_id):
        plan = self.revisits[first_visit_id]
        patient = self.new_outpatient(self.now, age=plan.age, visit_number=plan.next_visit)
        plan.next_visit += 1
        if plan.next_visit > plan.last_visit:
            del self.revisits[first_visit_id]
        self._demand(patient)

    def _demand(self, patient):
        if self.owner is not None:
            self.owner.outpatient_demand(self, patient)
        else:
            self.send(patient, self.now)

    def _on_admin(self):
        duration = self.config.admin_time.sample(self._rng("admin", self.index))
        if self.now >= self.warmup_end:
            for station_id in self.config.admin_stations:
                self.stations[station_id].admin_time += duration
        self.kernel.schedule(self.now + MINUTES_PER_DAY, ADMIN_KIND, facility=self.index)

    # ------------------------
    # Patient flow
    # ------------------------

    def send(self, patient, arrival_time):
        """Put an outpatient en route; it joins the facility at `arrival_time`."""
        self.in_transit[patient.patient_id] = patient
        self.kernel.schedule(arrival_time, "arrive", facility=self.index, entity=patient.patient_id)

    def _on_outpatient_arrival(self, patient_id):
        patient = self.in_transit.pop(patient_id)
        patient.facility = self.index
        patient.arrival_time = self.now
        self.arrived[patient.patient_class] += 1
        self.present[patient_id] = patient
        self._advance(patient, None)

    def _on_priority_arrival(self, patient_class, kind):
        dist = self.config.interarrival(patient_class)
        gap = dist.sample(self._rng("arrivals", self.index, patient_class.value))
        self.kernel.schedule(self.now + gap, kind, facility=self.index)
        self.arrived[patient_class] += 1
        if not opd_open(self.now, self.config.opd_minutes):
            # duty nurse outside OPD hours: no modeled queue
            self.bypassed[patient_class] += 1
            self.exited[patient_class] += 1
            return
        patient = PatientRecord(
            patient_id=self.ids.next(),
            patient_class=patient_class,
            preferred_facility=self.index,
            decision_time=self.now,
            facility=self.index,
            arrival_time=self.now,
        )
        self.present[patient.patient_id] = patient
        self._advance(patient, None)

    def _advance(self, patient, completed):
        nxt = route(
            patient,
            completed,
            self._rng("routing", self.index),
            self.config.lab_visit_prob,
            self.config.ncd_age_threshold,
        )
        if nxt is None:
            self._exit(patient)
            return
        patient.visits.append(StationVisit(nxt, self.now))
        station = self.stations[nxt]
        station.enqueue(patient)
        self._try_start(station)

    def _try_start(self, station):
        while station.queue:
            server = station.free_server()
            if server is None:
                return
            patient = station.queue.pop(0)
            patient.visits[-1].start_service = self.now
            dist = self.config.service(station.station_id, patient.patient_class)
            key = ("service", self.index, station.station_id.value, patient.patient_class.value)
            duration = dist.sample(self._rng(*key))
            station.serving[server] = patient
            station.started[server] = self.now
            self.kernel.schedule(
                self.now + duration,
                "service_end",
                facility=self.index,
                entity=patient.patient_id,
                station=station.station_id.value,
            )

    def _on_service_end(self, patient_id, station_id):
        station = self.stations[station_id]
        server = station.server_of(patient_id)
        patient = station.serving[server]
        station.accrue(station.started[server], self.now, self.warmup_end)
        station.serving[server] = None
        patient.visits[-1].end_service = self.now
        self._advance(patient, station_id)
        self._try_start(station)

    def _exit(self, patient):
        patient.exit_time = self.now
        del self.present[patient.patient_id]
        self.exited[patient.patient_class] += 1
        if self.owner is not None:
            self.owner.patient_finished(self, patient)

    # ------------------------
    # Observation and outcomes
    # ------------------------

    def observe(self, t=None):
        """Per-station queue counts by class and elapsed service times at the current clock."""
        if t is not None and t > self.now:
            raise ValueError(f"cannot observe the future: t={t:.3f} > clock={self.now:.3f}")
        return {s: station.observe(self.now) for s, station in self.stations.items()}

    def in_system(self, patient_class):
        return sum(1 for p in self.present.values() if p.patient_class is patient_class)

    def utilization(self, station_id, measured_days):
        """
        Service and admin time inside the measurement window (warm-up end to
        the current clock) over the staffed minutes of the measured days.
        Exceeds 1 when overtime drains backlogs.
        """
        scheduled = measured_days * self.config.scheduled_minutes
        if scheduled <= 0:
            raise ConfigurationError(f"utilization undefined with zero scheduled time at {self.name}")
        station = self.stations[station_id]
        return (station.busy_until(self.now, self.warmup_end) + station.admin_time) / scheduled
