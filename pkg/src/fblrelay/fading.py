"""Rayleigh fading model and fading-averaged block error expectations.

Unit-mean exponential fading powers z modulate each link's average SNR.
The expected block error of a hop is a 1-D integral of the normal
approximation against the exponential weight; the maximum-ratio-combined
two-branch error is the corresponding 2-D integral, evaluated as nested
1-D rules.

Quadrature: Gauss-Laguerre (64 nodes default, doubled for a self check)
handles smooth integrands.  At large blocklength the block error drops
from one toward zero across a narrow window in z; when that window is
too narrow for the Laguerre grid the engine switches to tiled
Gauss-Legendre panels on [0, 40] concentrated around the window, then
halves every panel until two successive refinements agree.  Budget
exhaustion raises QuadratureNonConvergence instead of returning a bad
value.

LinkGains/SystemParams are accessed by attribute only (g1, g2, g3,
p_tx, sigma2), so any object with those fields works.
"""

import math
from functools import lru_cache

import numpy as np

from .fbl import block_error, dispersion_complex, shannon_c

LN2 = math.log(2.0)

# truncation of the semi-infinite domain for the panel rule: the
# integrand is a probability times e^{-z}, so the tail mass beyond 40
# is below e^{-40} < 1e-17
Z_CUTOFF = 40.0

# the Q-transition is treated as +-10 dispersion widths around the
# capacity crossing; Q(10) ~ 7.6e-24, far below every tolerance here
_TRANSITION_SIGMAS = 10.0

_TOL_BACKHAUL = 1e-9
_TOL_MRC_OUTER = 1e-8
_TOL_MRC_INNER = 3e-9


class QuadratureNonConvergence(RuntimeError):
    """Successive quadrature refinements failed to agree within budget."""


def avg_snr(gain, params):
    """Average received SNR of a link: gain * p_tx / sigma2."""
    return gain * params.p_tx / params.sigma2


class FadingDraw:
    """One realization (or an array batch) of the three fading powers.

    z1: direct link, z2: source-relay, z3: relay-destination; unit-mean
    exponential, mutually independent, all nonnegative.
    """

    __slots__ = ("z1", "z2", "z3")

    def __init__(self, z1, z2, z3):
        if np.any(np.asarray(z1) < 0) or np.any(np.asarray(z2) < 0) \
                or np.any(np.asarray(z3) < 0):
            raise ValueError("fading powers must be nonnegative")
        self.z1 = z1
        self.z2 = z2
        self.z3 = z3


# ---------------------------------------------------------------------------
# fading density and integrand helpers
# ---------------------------------------------------------------------------

def exp_pdf(z):
    """Density of the unit-mean exponential fading power, e^{-z}."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0):
        raise ValueError("fading power must be nonnegative")
    out = np.exp(-z)
    return out if out.ndim else float(out)

def integrand_arg_backhaul(z2, r, m, gains, params):
    """Normalized capacity margin w(z2) on the backhaul link.

    Defined so that Q(w) equals block_error(z2 * snr2, r, m); at z2 = 0
    the dispersion vanishes and w is the signed limit (-inf for r > 0,
    0 for r = 0).
    """
    return _capacity_margin(np.asarray(z2, dtype=float) * avg_snr(gains.g2, params), r, m)

def integrand_arg_mrc(z1, z3, r, m, gains, params):
    """Normalized capacity margin w(z1, z3) on the combined branch."""
    snr = (np.asarray(z1, dtype=float) * avg_snr(gains.g1, params)
           + np.asarray(z3, dtype=float) * avg_snr(gains.g3, params))
    return _capacity_margin(snr, r, m)

def _capacity_margin(snr, r, m):
    snr = np.asarray(snr, dtype=float)
    c = np.asarray(shannon_c(snr), dtype=float)
    v = np.asarray(dispersion_complex(snr), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (c - r) * np.sqrt(m / v)
    w = np.where(v > 0.0, w, np.where(r > 0.0, -np.inf, 0.0))
    return w if w.ndim else float(w)


# ---------------------------------------------------------------------------
# quadrature engine
# ---------------------------------------------------------------------------

# numpy's laggauss weight recurrence overflows to nan above n ~ 180
_LAGUERRE_MAX = 180

@lru_cache(maxsize=None)
def _laguerre(n):
    if n > _LAGUERRE_MAX:
        raise ValueError(f"Gauss-Laguerre rule unstable beyond {_LAGUERRE_MAX} nodes")
    return np.polynomial.laguerre.laggauss(n)

@lru_cache(maxsize=None)
def _legendre(n):
    return np.polynomial.legendre.leggauss(n)

def _transition_hint(gain, offset, r, m):
    """Locate the block-error drop in z, or None if there is none.

    The integrand block_error(offset + gain*z, r, m) crosses one half
    where capacity meets the rate, i.e. at snr = 2^r - 1.  Returns
    (z_star, halfwidth) of the crossing window in z; z_star can be
    negative when the offset already exceeds the threshold but the
    window still reaches into z > 0.  At r = 0 the error drops from
    one half across a root-dispersion window at the origin.
    """
    if gain <= 0.0:
        return None
    if r <= 0.0:
        # block_error(gain*z, 0, m) = Q(sqrt(m*gain*z/2) * ...) to first
        # order, falling below Q(10) near z = 2*10^2/(m*gain)
        return 0.0, 2.0 * _TRANSITION_SIGMAS**2 / (m * gain)
    z_star = (2.0**r - 1.0 - offset) / gain
    v = dispersion_complex(2.0**r - 1.0)
    c_slope = gain / (2.0**r * LN2)
    h = _TRANSITION_SIGMAS * math.sqrt(v / m) / c_slope
    if z_star + h <= 0.0:
        return None
    return z_star, h

def _panel_edges(hint, extra=()):
    """Panel boundaries on [0, Z_CUTOFF] concentrated at the transition."""
    edges = {0.0, Z_CUTOFF}
    edges.update(e for e in extra if 0.0 < e < Z_CUTOFF)
    if hint is not None:
        z_star, h = hint
        a = min(max(z_star - h, 0.0), Z_CUTOFF)
        b = min(max(z_star + h, 0.0), Z_CUTOFF)
        if b > a:
            edges.update(np.linspace(a, b, 13))
        # geometric growth away from the window, width capped at 3
        w = max(h, 1e-12 * max(abs(z_star), 1.0))
        x = a
        while x > 0.0:
            x = max(x - w, 0.0)
            edges.add(x)
            w = min(2.0 * w, 3.0)
        w = max(h, 1e-12 * max(abs(z_star), 1.0))
        x = b
        while x < Z_CUTOFF:
            x = min(x + w, Z_CUTOFF)
            edges.add(x)
            w = min(2.0 * w, 3.0)
    else:
        w, x = 0.1, 0.0
        while x < Z_CUTOFF:
            x = min(x + w, Z_CUTOFF)
            edges.add(x)
            w = min(1.5 * w, 3.0)
    return np.array(sorted(edges))

def _eval_panels(phi, edges, order=16):
    x, w = _legendre(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    z = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return float(wt @ (np.exp(-z) * phi(z)))

def _halve(edges):
    return np.sort(np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])]))

def exp_average(phi, tol, hint=None, nodes=64, max_rounds=6,
                extra_edges=(), force_panels=False):
    """E[phi(z)] for z ~ Exp(1), with a doubling self check.

    phi must be vectorized and bounded.  hint = (z_star, halfwidth)
    marks a sharp feature; the Laguerre fast path is only trusted when
    its node set actually samples that window, since two global rules
    can agree on a bad value when a narrow sigmoid slips between nodes.
    extra_edges adds panel boundaries for features the hint does not
    describe (e.g. a short-scale weight factor folded into phi).
    """
    hi_nodes = min(2 * nodes, _LAGUERRE_MAX)
    laguerre_ok = not force_panels and hi_nodes > nodes
    if laguerre_ok and hint is not None:
        z_star, h = hint
        x_lo, _ = _laguerre(nodes)
        inside = np.count_nonzero((x_lo >= z_star - h) & (x_lo <= z_star + h))
        laguerre_ok = h >= 2.0 and inside >= 8
    if laguerre_ok:
        x_lo, w_lo = _laguerre(nodes)
        x_hi, w_hi = _laguerre(hi_nodes)
        i_lo = float(w_lo @ phi(x_lo))
        i_hi = float(w_hi @ phi(x_hi))
        if abs(i_hi - i_lo) <= tol:
            return i_hi

    edges = _panel_edges(hint, extra_edges)
    prev = _eval_panels(phi, edges)
    for _ in range(max_rounds):
        edges = _halve(edges)
        cur = _eval_panels(phi, edges)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureNonConvergence(
        f"no agreement within {tol:g} after {max_rounds} refinements "
        f"({len(edges) - 1} panels, last estimate {prev:.12g})")

def _expected_error_1d(gain, offset, r, m, tol, nodes=64):
    """E_z[block_error(offset + gain*z, r, m)], clipped to [0, 1]."""
    if gain <= 0.0:
        return block_error(offset, r, m)
    hint = _transition_hint(gain, offset, r, m)
    val = exp_average(lambda z: block_error(offset + gain * z, r, m),
                      tol, hint=hint, nodes=nodes)
    return min(max(val, 0.0), 1.0)


# ---------------------------------------------------------------------------
# fading-averaged error expectations
# ---------------------------------------------------------------------------

def expected_error_single(r, m, mean_snr, nodes=64):
    """Fading-averaged block error of one Rayleigh link with mean SNR.

    Integrates e^{-z} * block_error(z * mean_snr, r, m) over z to an
    absolute tolerance of 1e-8.
    """
    if r < 0.0:
        raise ValueError("rate must be nonnegative")
    return _expected_error_1d(mean_snr, 0.0, r, m, _TOL_BACKHAUL, nodes=nodes)

def expected_error_backhaul(r, m, gains, params, nodes=64):
    """Fading-averaged block error of the source-relay hop.

    m is taken from the argument, not from params, so blocklength sweeps
    can reuse one params object.
    """
    return expected_error_single(r, m, avg_snr(gains.g2, params), nodes=nodes)

def expected_error_mrc(r, m, gains, params, nodes=64):
    """Fading-averaged block error after combining direct and relay copies.

    Equals the double integral of block_error(z1*snr1 + z3*snr3, r, m)
    against the product exponential weight, absolute tolerance 1e-7.
    The combined SNR is a sum of two independent exponentials, so the
    double integral collapses exactly to a single integral against the
    hypoexponential density; in units of the larger mean snr the weight
    is e^{-u} times a smooth factor handled through expm1 with no
    cancellation.  Exactly symmetric under swapping g1 and g3; a zero
    branch degenerates to the single-link form.
    """
    if r < 0.0:
        raise ValueError("rate must be nonnegative")
    b, a = sorted((avg_snr(gains.g1, params), avg_snr(gains.g3, params)))
    if b <= 0.0:
        return _expected_error_1d(a, 0.0, r, m, _TOL_BACKHAUL, nodes=nodes)

    kappa = (a - b) / b
    if kappa < 1e-15:
        phi = lambda u: u * block_error(a * u, r, m)
        extra = ()
    else:
        coef = a / (a - b)
        phi = lambda u: -np.expm1(-kappa * u) * coef * block_error(a * u, r, m)
        # the weight factor turns on over u ~ 1/kappa near the origin
        extra = tuple(2.0**j / kappa for j in range(-2, 7))
    val = exp_average(phi, _TOL_MRC_OUTER,
                      hint=_transition_hint(a, 0.0, r, m), nodes=nodes,
                      extra_edges=extra, force_panels=kappa > 5.0)
    return min(max(val, 0.0), 1.0)

def expected_error_mrc_nested(r, m, gains, params, nodes=64):
    """Nested-rule evaluation of the combined-branch expected error.

    Integrates the inner link conditionally on each outer node, with the
    larger-SNR branch innermost.  Slower than expected_error_mrc but
    structurally independent of the hypoexponential collapse; kept as a
    cross-check route.
    """
    if r < 0.0:
        raise ValueError("rate must be nonnegative")
    s_out, s_in = sorted((avg_snr(gains.g1, params), avg_snr(gains.g3, params)))
    if s_out <= 0.0:
        return _expected_error_1d(s_in, 0.0, r, m, _TOL_BACKHAUL, nodes=nodes)

    def outer(z_arr):
        out = np.empty(z_arr.shape)
        for i, z in enumerate(z_arr):
            out[i] = _expected_error_1d(s_in, z * s_out, r, m,
                                        _TOL_MRC_INNER, nodes=nodes)
        return out

    # the outer integrand ramps down to a kink at the outage boundary;
    # the kink curvature lives in the usual transition window
    val = exp_average(outer, _TOL_MRC_OUTER,
                      hint=_transition_hint(s_out, 0.0, r, m),
                      nodes=nodes, force_panels=True)
    return min(max(val, 0.0), 1.0)


# ---------------------------------------------------------------------------
# closed-form outage of the combined gains (infinite-blocklength limit)
# ---------------------------------------------------------------------------

def rayleigh_outage_cdf(t, mean_snr):
    """P(mean_snr * z <= t) for unit-mean exponential z."""
    if mean_snr <= 0.0:
        return 1.0 if t >= 0.0 else 0.0
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0.0, -np.expm1(-t / mean_snr), 0.0)
    return out if out.ndim else float(out)

def mrc_outage_cdf(t, mean1, mean3):
    """P(z1*mean1 + z3*mean3 <= t), the two-branch combined outage.

    Two-term hypoexponential CDF for distinct means, written through
    expm1 so the near-equal regime stays accurate; within a relative
    difference of 1e-9 it switches to the Erlang-2 limit.
    """
    if mean1 <= 0.0:
        return rayleigh_outage_cdf(t, mean3)
    if mean3 <= 0.0:
        return rayleigh_outage_cdf(t, mean1)
    t = np.asarray(t, dtype=float)
    tp = np.maximum(t, 0.0)
    b, a = sorted((mean1, mean3))
    if a - b < 1e-9 * a:
        g = 0.5 * (a + b)
        out = -np.expm1(-tp / g) - (tp / g) * np.exp(-tp / g)
    else:
        d = a - b
        out = 1.0 - np.exp(-tp / a) * (1.0 - (b / d) * np.expm1(-tp * d / (a * b)))
    out = np.clip(np.where(t > 0.0, out, 0.0), 0.0, 1.0)
    return out if out.ndim else float(out)
