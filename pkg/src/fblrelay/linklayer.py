"""Link-layer model: effective capacity and maximum sustainable data rate.

A transmission period of 2m symbols delivers either r*m bits or nothing,
so the service process increment is Bernoulli.  Under a delay budget of
d symbols that may be violated with probability at most p_d, a Gaussian
approximation of the service process gives a closed-form maximum
sustainable data rate (MSDR, bits per channel use).  The error
probability feeding the Bernoulli law is the fading-averaged overall
relaying error; this module is generic in it and carries no dependency
on the physical-layer code.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class QoSPair:
    """Delay budget in symbols and tolerated violation probability."""

    d: float
    p_d: float

    def __post_init__(self):
        if self.d <= 0.0:
            raise ValueError("delay budget must be positive")
        if not 0.0 < self.p_d < 1.0:
            raise ValueError("violation probability must lie in (0, 1)")


@dataclass(frozen=True)
class ServiceStats:
    """Per-period service increment moments of the Bernoulli delivery."""

    mean: float       # bits per period
    variance: float   # bits^2 per period^2
    eps_bar: float    # overall error probability driving the law

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError("variance must be nonnegative")


@dataclass(frozen=True)
class QosExponentPoint:
    """One point of the effective-capacity curve: exponent and value."""

    theta: float  # QoS exponent, per bit
    ec: float     # effective capacity, bits per period

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ValueError("QoS exponent must be positive")


def service_stats(r, m, eps_bar):
    """Bernoulli moments of the per-period delivered payload r*m."""
    if not 0.0 <= eps_bar <= 1.0:
        raise ValueError("error probability must lie in [0, 1]")
    payload = r * m
    return ServiceStats(payload * (1.0 - eps_bar),
                        payload**2 * eps_bar * (1.0 - eps_bar), eps_bar)

def effective_capacity_clt(stats, theta):
    """Second-order effective capacity: mean - (theta/2) * variance."""
    if theta < 0.0:
        raise ValueError("QoS exponent must be nonnegative")
    return stats.mean - 0.5 * theta * stats.variance

def qos_exponent_point(stats, theta):
    """Bundle an exponent with its effective capacity for curve output."""
    return QosExponentPoint(theta, effective_capacity_clt(stats, theta))

def qos_penalty_factor(m, qos):
    """Dimensionless delay-constraint factor 4m*ln(p_d)/d, always < 0."""
    return 4.0 * m * math.log(qos.p_d) / qos.d

def msdr_feasible(m, eps_bar, qos):
    """Whether the QoS pair is supportable at this error level.

    Requires one full period to fit the delay budget (2m <= d) and a
    nonnegative discriminant, i.e. eps_bar <= 1/(1 - penalty factor).
    """
    if 2.0 * m > qos.d:
        return False
    phi = qos_penalty_factor(m, qos)
    return (1.0 - eps_bar)**2 + phi * eps_bar * (1.0 - eps_bar) >= 0.0

def msdr(r, m, eps_bar, qos):
    """Maximum sustainable data rate in bits per channel use.

    Evaluates r(1-e)/4 + (r/4)*sqrt((1-e)^2 + phi*e(1-e)) with the
    penalty factor phi = 4m*ln(p_d)/d.  Returns 0.0 when the period
    does not fit the delay budget or the discriminant is negative
    (the QoS pair is unsupportable at this error level); sweeps over
    infeasible regions therefore stay total.
    """
    if not 0.0 <= eps_bar <= 1.0:
        raise ValueError("error probability must lie in [0, 1]")
    if not msdr_feasible(m, eps_bar, qos):
        return 0.0
    phi = qos_penalty_factor(m, qos)
    keep = 1.0 - eps_bar
    if phi == 0.0:
        # vanishing penalty (e.g. unbounded delay budget): exactly the
        # blocklength-limited throughput r*(1 - eps)/2
        return 0.5 * r * keep
    disc = keep**2 + phi * eps_bar * keep
    return 0.25 * r * keep + 0.25 * r * math.sqrt(disc)

def msdr_decomposition_check(r, m, eps_bar, qos):
    """Residual of splitting the MSDR into half throughput plus a rest.

    The identity under test: msdr = (r(1-e)/2)/2 + (r/4)*sqrt(1 +
    (phi-2)e + (1-phi)e^2).  Returns the absolute difference, 0.0 for
    infeasible input where both sides are pinned to zero.
    """
    if not msdr_feasible(m, eps_bar, qos):
        return 0.0
    phi = qos_penalty_factor(m, qos)
    half_throughput = 0.5 * (0.5 * r * (1.0 - eps_bar))
    rest = 0.25 * r * math.sqrt(
        1.0 + (phi - 2.0) * eps_bar + (1.0 - phi) * eps_bar**2)
    return abs(msdr(r, m, eps_bar, qos) - (half_throughput + rest))
