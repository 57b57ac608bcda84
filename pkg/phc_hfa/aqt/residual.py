"""
Expected remaining service time of the entity in service given its elapsed
service time x.

`remaining_service_time` is the three-band quantile approximation used by the
predictors; `remaining_service_time_exact` integrates the conditional
survival function and serves as the reference in tests and diagnostics.
"""

import math

from scipy import integrate, stats

from phc_hfa.errors import UnsupportedDistributionError
from phc_hfa.sim.distributions import DistributionKind

# z-scores of the 75th percentile and of the extreme quantile for the Gaussian kind
GAUSSIAN_Q75_Z = 0.675
GAUSSIAN_EXTREME_Z = 3.0


def quantile_anchors(dist):
    """(median, 75th percentile, extreme quantile) of a service distribution."""
    if dist.kind is DistributionKind.UNIFORM:
        a, b = dist.first, dist.second
        return (a + b) / 2.0, (a + 3.0 * b) / 4.0, b
    if dist.kind is DistributionKind.GAUSSIAN:
        mu, sigma = dist.first, dist.second
        return mu, mu + GAUSSIAN_Q75_Z * sigma, mu + GAUSSIAN_EXTREME_Z * sigma
    raise UnsupportedDistributionError(
        f"piecewise remaining-time estimate is defined for uniform and gaussian service, not {dist.kind.value}"
    )


def remaining_service_time(dist, x):
    if x < 0:
        raise ValueError(f"elapsed service time must be >= 0, got {x}")
    q50, q75, qext = quantile_anchors(dist)
    if x < q50:
        return q50 - x
    if x < q75:
        return q75 - x
    if x <= qext:
        return (qext - x) / 2.0
    return 0.0


def _frozen(dist):
    if dist.kind is DistributionKind.UNIFORM:
        return stats.uniform(loc=dist.first, scale=dist.second - dist.first), dist.second
    if dist.kind is DistributionKind.GAUSSIAN:
        # sampling redraws non-positive values; the truncation factor cancels for x >= 0
        return stats.norm(loc=dist.first, scale=dist.second), dist.first + 12.0 * dist.second
    raise UnsupportedDistributionError(f"no survival function for {dist.kind.value}")


def remaining_service_time_exact(dist, x):
    """E[X - x | X > x] by numerical integration of the survival function."""
    if x < 0:
        raise ValueError(f"elapsed service time must be >= 0, got {x}")
    if dist.kind is DistributionKind.EXPONENTIAL:
        return dist.mean
    frozen, upper = _frozen(dist)
    if dist.kind is DistributionKind.UNIFORM and x < dist.first:
        # no mass below a: the whole service is still ahead
        return dist.mean - x
    survival = frozen.sf(x)
    if x >= upper or survival <= 0.0 or math.isclose(survival, 0.0, abs_tol=1e-300):
        return 0.0
    area, _ = integrate.quad(frozen.sf, x, upper, limit=200)
    return max(area / survival, 0.0)
