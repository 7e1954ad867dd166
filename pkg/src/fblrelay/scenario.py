"""Physical setup ingestion: distances and powers to gains and parameters.

The urban reference layout places the relay 200 m from both endpoints
with a 360 m direct path, transmits 30 dBm against -90 dBm noise at
2 GHz, and prices distance with the COST-231 Hata urban-macro formula
(base antenna 30 m, mobile 1.5 m, 0 dB city correction).  Two documented
budget fields complete the link budget: a combined antenna/system gain
on all links and an extra obstruction loss on the (much weaker) direct
path.  A fixed-gains mode bypasses propagation modeling entirely.

Scenario files are flat text, one `key = value` per line with `#`
comments; keys match the field names below, with the QoS pair flattened
to qos_d and qos_p_d.
"""

import math
import warnings
from dataclasses import dataclass, fields, replace

from .linklayer import QoSPair
from .relay import LinkGains, SystemParams

LN2 = math.log(2.0)

_MODELS = ("cost231_hata_urban", "fixed_gains")

# fixed propagation constants of this artifact
_H_BASE = 30.0    # base/relay antenna height, m
_H_MOBILE = 1.5   # terminal antenna height, m
_C_M = 0.0        # city-size correction, dB


@dataclass(frozen=True)
class Scenario:
    """Complete description of one evaluation setup."""

    d_backhaul: float = 200.0
    d_relaying: float = 200.0
    d_direct: float = 360.0
    p_tx_dbm: float = 30.0
    noise_dbm: float = -90.0
    f_c: float = 2.0                 # carrier, GHz
    m: float = 500.0                 # per-hop blocklength
    eta: float = 0.2
    eps_nominal: float = 1e-3
    qos: QoSPair = QoSPair(d=1e4, p_d=1e-2)
    pathloss_model: str = "cost231_hata_urban"
    ant_gain_db: float = 18.0        # combined antenna/system gain, all links
    direct_extra_loss_db: float = 12.0  # obstruction loss, direct path only
    g1: float = 0.0                  # fixed-gains mode only
    g2: float = 0.0
    g3: float = 0.0

    def __post_init__(self):
        for name in ("d_backhaul", "d_relaying", "d_direct"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.f_c <= 0.0:
            raise ValueError("f_c must be positive")
        if self.m < 100:
            raise ValueError("m must be at least 100")
        if not 0.0 < self.eta <= LN2 + 1e-12:
            raise ValueError("eta must lie in (0, ln 2]")
        if not 0.0 < self.eps_nominal < 1.0:
            raise ValueError("eps_nominal must lie in (0, 1)")
        if self.pathloss_model not in _MODELS:
            raise ValueError(
                f"pathloss_model must be one of {_MODELS}, "
                f"got {self.pathloss_model!r}")
        if self.pathloss_model == "fixed_gains":
            if self.g1 <= 0.0 or self.g2 <= 0.0 or self.g3 <= 0.0:
                raise ValueError("g1, g2, g3 must be positive in fixed_gains mode")


def dbm_to_watt(x_dbm):
    return 10.0**((x_dbm - 30.0) / 10.0)

def watt_to_dbm(x_watt):
    return 30.0 + 10.0 * math.log10(x_watt)

def pathloss_db(model, distance_m, f_c):
    """Distance cost in dB at carrier f_c (GHz) under the named model.

    The COST-231 Hata urban-macro fit is nominally valid for 1-20 km
    and 1.5-2 GHz; the reference distances sit below 1 km, so the
    formula is extrapolated there and a warning is emitted rather than
    clamping (clamping would collapse distinct distances to one loss).
    """
    if model != "cost231_hata_urban":
        raise ValueError(f"no path-loss formula for model {model!r}")
    if distance_m <= 0.0:
        raise ValueError("distance_m must be positive")
    d_km = distance_m / 1000.0
    f_mhz = f_c * 1000.0
    if not 1.0 <= d_km <= 20.0 or not 1500.0 <= f_mhz <= 2000.0:
        warnings.warn(
            f"COST-231 Hata evaluated outside its validity range "
            f"(d = {d_km:g} km, f = {f_mhz:g} MHz)", stacklevel=2)
    lf = math.log10(f_mhz)
    a_hm = (1.1 * lf - 0.7) * _H_MOBILE - (1.56 * lf - 0.8)
    return (46.3 + 33.9 * lf - 13.82 * math.log10(_H_BASE) - a_hm
            + (44.9 - 6.55 * math.log10(_H_BASE)) * math.log10(d_km) + _C_M)

def build(scenario):
    """Materialize (LinkGains, SystemParams) from a scenario."""
    if scenario.pathloss_model == "fixed_gains":
        gains = LinkGains(scenario.g1, scenario.g2, scenario.g3)
    else:
        budget = []
        for dist, extra in ((scenario.d_direct, scenario.direct_extra_loss_db),
                            (scenario.d_backhaul, 0.0),
                            (scenario.d_relaying, 0.0)):
            loss = pathloss_db(scenario.pathloss_model, dist, scenario.f_c)
            budget.append(10.0**((scenario.ant_gain_db - loss - extra) / 10.0))
        gains = LinkGains(*budget)
    params = SystemParams(m=scenario.m,
                          p_tx=dbm_to_watt(scenario.p_tx_dbm),
                          sigma2=dbm_to_watt(scenario.noise_dbm),
                          eps_nominal=scenario.eps_nominal,
                          eta=scenario.eta)
    return gains, params


# ---------------------------------------------------------------------------
# flat key=value scenario files
# ---------------------------------------------------------------------------

_FLOAT_KEYS = tuple(f.name for f in fields(Scenario)
                    if f.name not in ("qos", "pathloss_model"))

def save_scenario(scenario, path):
    """Write every field, one key = value per line."""
    lines = []
    for f in fields(Scenario):
        v = getattr(scenario, f.name)
        if f.name == "qos":
            lines.append(f"qos_d = {v.d!r}")
            lines.append(f"qos_p_d = {v.p_d!r}")
        elif f.name == "pathloss_model":
            lines.append(f"pathloss_model = {v}")
        else:
            lines.append(f"{f.name} = {v!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

def load_scenario(path):
    """Parse a flat key = value file back into a Scenario."""
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    kwargs = {}
    qos_d = entries.pop("qos_d", None)
    qos_p_d = entries.pop("qos_p_d", None)
    if (qos_d is None) != (qos_p_d is None):
        raise ValueError("qos_d and qos_p_d must be given together")
    if qos_d is not None:
        kwargs["qos"] = QoSPair(d=float(qos_d), p_d=float(qos_p_d))
    if "pathloss_model" in entries:
        kwargs["pathloss_model"] = entries.pop("pathloss_model")
    for key, value in entries.items():
        if key not in _FLOAT_KEYS:
            raise ValueError(f"unknown scenario key: {key}")
        kwargs[key] = float(value)
    return Scenario(**kwargs)

def with_overrides(scenario, **kwargs):
    """Functional update helper for CLI flag overrides."""
    return replace(scenario, **kwargs)
