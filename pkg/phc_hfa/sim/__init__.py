from phc_hfa.sim.distributions import DistributionKind, ServiceDistribution
from phc_hfa.sim.kernel import Event, Kernel, Snapshot
from phc_hfa.sim.streams import RngStreams

MINUTES_PER_DAY = 1440.0

__all__ = [
    "DistributionKind",
    "ServiceDistribution",
    "Event",
    "Kernel",
    "Snapshot",
    "RngStreams",
    "MINUTES_PER_DAY",
]
