"""Exception hierarchy shared by every phc_hfa module."""


class PhcSimulationError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(PhcSimulationError):
    """Invalid scenario, facility or distribution parameters."""


class SchedulingError(PhcSimulationError):
    """An event was scheduled before the current simulation clock."""


class UnsupportedDistributionError(PhcSimulationError):
    """The piecewise residual estimator does not handle this distribution kind."""


class PredictionError(PhcSimulationError):
    """A length-of-stay predictor could not produce a value."""


class PriorityInstabilityError(PredictionError):
    """Higher-priority service mean is not below the net higher-priority interarrival time."""

    def __init__(self, interarrival, service):
        self.interarrival = interarrival
        self.service = service
        super().__init__(
            f"priority delay series diverges: service mean {service:.3f} >= interarrival {interarrival:.3f}"
        )


class OracleError(PredictionError):
    """A clairvoyant clone ran past its guard without the patient leaving."""


class DatasetError(PhcSimulationError):
    """Empty, undersized or malformed Sim-ML dataset or model file."""


class MetricError(PhcSimulationError):
    """A metric was asked for on inputs where it is undefined."""


class ReplicationError(PhcSimulationError):
    """A replication aborted; carries the replication index."""

    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"replication {index} failed: {cause}")

    def __reduce__(self):
        return self.__class__, (self.index, self.cause)
