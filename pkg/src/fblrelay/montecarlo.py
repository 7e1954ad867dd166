"""Monte Carlo twins of the analytic fading averages.

Every quadrature-based expectation has a sampling estimate here for
cross-validation: fading draws by inverse CDF, two-stage Bernoulli
decode events mirroring the backhaul-then-MRC error composition, and
streaming (Welford) accumulation over seeded substreams.  Chunk streams
are spawned from one SeedSequence and merged in chunk order, so results
are bit-identical for any worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fbl import block_error
from .fading import FadingDraw, avg_snr
from .relay import overall_error_instant

_CHUNK = 1 << 18


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error and provenance."""

    mean: float
    std_err: float
    n: int
    seed: object

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("estimate needs at least one sample")
        if self.std_err < 0.0:
            raise ValueError("standard error must be nonnegative")


def draw_fading(rng, size=None):
    """Independent unit-mean exponential triple(s) by inverse CDF.

    Maps uniforms through z = -ln(1 - u) so the open-interval endpoint
    of the generator cannot produce an infinite variate.
    """
    shape = 3 if size is None else (3, size)
    z = -np.log1p(-rng.random(shape))
    return FadingDraw(z[0], z[1], z[2])


# ---------------------------------------------------------------------------
# chunked streaming accumulation
# ---------------------------------------------------------------------------

def _chunk_layout(n, seed):
    n = int(n)
    sizes = [_CHUNK] * (n // _CHUNK)
    if n % _CHUNK:
        sizes.append(n % _CHUNK)
    return sizes, np.random.SeedSequence(seed).spawn(len(sizes))

def _merge_welford(a, b):
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    d = mb - ma
    return (n, ma + d * nb / n, m2a + m2b + d * d * na * nb / n)

def _stream_welford(sample_chunk, n, seed, workers=1):
    """Mean and standard error of sample_chunk(rng, k) over n draws.

    Chunks are processed on their own substream generators and merged
    in chunk order: the worker count affects speed only.
    """
    sizes, seqs = _chunk_layout(n, seed)

    def one(args):
        seq, k = args
        x = sample_chunk(np.random.default_rng(seq), k)
        mean = float(np.mean(x))
        return (k, mean, float(np.sum((x - mean)**2)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, zip(seqs, sizes)))
    else:
        parts = [one(args) for args in zip(seqs, sizes)]
    total = parts[0]
    for part in parts[1:]:
        total = _merge_welford(total, part)
    cnt, mean, m2 = total
    std = math.sqrt(m2 / (cnt - 1)) if cnt > 1 else 0.0
    return mean, std / math.sqrt(cnt), cnt

def _decode_success(rng, k, r, m, gains, params):
    """Two-stage per-period decode events: backhaul, then MRC given it.

    Simulates the composition of the overall error rather than drawing
    one Bernoulli from the composed probability.
    """
    draw = draw_fading(rng, k)
    e2 = block_error(draw.z2 * avg_snr(gains.g2, params), r, m)
    emrc = block_error(draw.z1 * avg_snr(gains.g1, params)
                       + draw.z3 * avg_snr(gains.g3, params), r, m)
    backhaul_ok = rng.random(k) >= e2
    mrc_ok = rng.random(k) >= emrc
    return backhaul_ok & mrc_ok


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def _check_n(n):
    n = int(n)
    if n < 10000:
        raise ValueError("Monte Carlo estimate needs at least 1e4 samples")
    return n

def mc_expected_overall_error(r, m, gains, params, n=1000000, seed=None,
                              workers=1):
    """Sample mean of the instantaneous overall error over fading."""
    n = _check_n(n)

    def chunk(rng, k):
        return overall_error_instant(draw_fading(rng, k), r, m, gains, params)

    mean, se, cnt = _stream_welford(chunk, n, seed, workers)
    return McEstimate(mean, se, cnt, seed)

def mc_bl_throughput(r, m, gains, params, n=1000000, seed=None, workers=1):
    """Decode-event estimate of the average throughput r/2 per success."""
    n = _check_n(n)

    def chunk(rng, k):
        ok = _decode_success(rng, k, r, m, gains, params)
        return np.where(ok, 0.5 * r, 0.0)

    mean, se, cnt = _stream_welford(chunk, n, seed, workers)
    return McEstimate(mean, se, cnt, seed)


@dataclass(frozen=True)
class McServiceStats:
    """Empirical service-increment moments with their standard errors."""

    mean: McEstimate
    variance: McEstimate
    eps_hat: float  # empirical overall error frequency


def mc_service_stats(r, m, gains, params, n=1000000, seed=None, workers=1):
    """Empirical mean and variance of the per-period payload increments.

    Increments take only the values 0 and r*m, so the success count is
    a sufficient statistic: power sums are exact and both moment
    estimates (and the standard error of the variance, via the exact
    fourth central moment) follow in closed form from the count.
    """
    n = _check_n(n)
    sizes, seqs = _chunk_layout(n, seed)
    successes = 0
    for seq, k in zip(seqs, sizes):
        rng = np.random.default_rng(seq)
        successes += int(np.count_nonzero(
            _decode_success(rng, k, r, m, gains, params)))
    payload = r * m
    q = successes / n
    mean = payload * q
    se_mean = payload * math.sqrt(q * (1.0 - q) / n)
    var = payload**2 * successes * (1.0 - q) / (n - 1)
    # exact central fourth moment of a two-point sample
    m4 = (payload - payload * q)**4 * q + (payload * q)**4 * (1.0 - q)
    se_var = math.sqrt(max(m4 - var**2 * (n - 3) / (n - 1), 0.0) / n)
    return McServiceStats(McEstimate(mean, se_mean, n, seed),
                          McEstimate(var, se_var, n, seed), 1.0 - q)
