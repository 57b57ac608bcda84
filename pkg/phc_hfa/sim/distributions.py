"""
Service and interarrival distributions, all parameters in minutes.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum

from phc_hfa.errors import ConfigurationError


_CALL_PATTERN = re.compile(r"^\s*(\w+)\s*\(\s*([^)]*)\)\s*$")


class DistributionKind(str, Enum):
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


_ALIASES = {
    "exp": DistributionKind.EXPONENTIAL,
    "exponential": DistributionKind.EXPONENTIAL,
    "u": DistributionKind.UNIFORM,
    "uniform": DistributionKind.UNIFORM,
    "n": DistributionKind.GAUSSIAN,
    "normal": DistributionKind.GAUSSIAN,
    "gaussian": DistributionKind.GAUSSIAN,
}

_PARAMETER_COUNTS = {
    DistributionKind.EXPONENTIAL: (1,),
    DistributionKind.UNIFORM: (2,),
    DistributionKind.GAUSSIAN: (2, 4),
}


@dataclass(frozen=True)
class ServiceDistribution:
    """
    Exponential(mean), Uniform(a, b) or Gaussian(mu, sigma[, low, high]).

    For the exponential kind `first` is the mean and `second` is unused.
    Gaussian variates are redrawn until they fall in (low, high], which is
    (0, inf] unless bounds are given.
    """

    kind: DistributionKind
    first: float
    second: float = 0.0
    low: float = 0.0
    high: float = math.inf

    def __post_init__(self):
        if self.kind is DistributionKind.EXPONENTIAL:
            if not self.first > 0:
                raise ConfigurationError(f"exponential mean must be > 0, got {self.first}")
        elif self.kind is DistributionKind.UNIFORM:
            if not 0 <= self.first < self.second:
                raise ConfigurationError(f"uniform needs 0 <= a < b, got a={self.first}, b={self.second}")
        elif self.kind is DistributionKind.GAUSSIAN:
            if not (self.first > 0 and self.second > 0):
                raise ConfigurationError(f"gaussian needs mu > 0 and sigma > 0, got mu={self.first}, sigma={self.second}")
            if not 0 <= self.low < self.high:
                raise ConfigurationError(f"gaussian bounds need 0 <= low < high, got low={self.low}, high={self.high}")

    @classmethod
    def exponential(cls, mean):
        return cls(DistributionKind.EXPONENTIAL, float(mean))

    @classmethod
    def uniform(cls, a, b):
        return cls(DistributionKind.UNIFORM, float(a), float(b))

    @classmethod
    def gaussian(cls, mu, sigma, low=0.0, high=math.inf):
        return cls(DistributionKind.GAUSSIAN, float(mu), float(sigma), float(low), float(high))

    @classmethod
    def parse(cls, value):
        """
        Build a distribution from `exp(9)`, `uniform(2,5)`, `normal(0.87,0.21)`,
        `normal(100,20,60,140)` or a mapping.
        """
        if isinstance(value, ServiceDistribution):
            return value
        if isinstance(value, dict):
            kind = _ALIASES.get(str(value.get("kind", "")).lower())
            try:
                if kind is DistributionKind.EXPONENTIAL:
                    return cls.exponential(value["mean"])
                if kind is DistributionKind.UNIFORM:
                    return cls.uniform(value["a"], value["b"])
                if kind is DistributionKind.GAUSSIAN:
                    return cls.gaussian(value["mu"], value["sigma"], value.get("low", 0.0), value.get("high", math.inf))
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigurationError(f"incomplete distribution mapping {value}: {e}") from e
            raise ConfigurationError(f"unknown distribution mapping: {value}")
        match = _CALL_PATTERN.match(str(value))
        if not match or match.group(1).lower() not in _ALIASES:
            raise ConfigurationError(f"cannot parse distribution '{value}'")
        try:
            params = [float(p) for p in match.group(2).split(",") if p.strip()]
        except ValueError as e:
            raise ConfigurationError(f"non-numeric parameter in '{value}'") from e
        kind = _ALIASES[match.group(1).lower()]
        expected = _PARAMETER_COUNTS[kind]
        if len(params) not in expected:
            counts = " or ".join(str(n) for n in expected)
            raise ConfigurationError(f"'{value}' needs {counts} parameter(s), got {len(params)}")
        if kind is DistributionKind.GAUSSIAN:
            return cls.gaussian(*params)
        return cls(kind, *params)

    @property
    def bounded(self):
        return self.kind is DistributionKind.GAUSSIAN and (self.low > 0 or math.isfinite(self.high))

    @property
    def mean(self):
        """E[X]; for the gaussian this is mu (truncation ignored)."""
        if self.kind is DistributionKind.UNIFORM:
            return (self.first + self.second) / 2.0
        return self.first

    def sample(self, rng):
        """Draw one strictly positive variate from a numpy Generator."""
        if self.kind is DistributionKind.EXPONENTIAL:
            return float(rng.exponential(self.first))
        if self.kind is DistributionKind.UNIFORM:
            return float(rng.uniform(self.first, self.second))
        while True:
            value = float(rng.normal(self.first, self.second))
            if self.low < value <= self.high:
                return value

    def describe(self):
        if self.kind is DistributionKind.EXPONENTIAL:
            return f"exp({self.first:g})"
        if self.kind is DistributionKind.UNIFORM:
            return f"uniform({self.first:g},{self.second:g})"
        if self.bounded:
            return f"normal({self.first:g},{self.second:g},{self.low:g},{self.high:g})"
        return f"normal({self.first:g},{self.second:g})"

    def __str__(self):
        return self.describe()
