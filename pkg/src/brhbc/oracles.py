"""Self-checks comparing the implementation against independent closed forms.

Each oracle returns an :class:`OracleResult`; :func:`run_all` collects them.
They back the ``oracle`` CLI command and double as smoke tests of an install.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bodyline import BodySegment, PerUnitLengthParams, cascade, pul_params, segment_twoport, uniform_line_abcd
from .channel import ChannelResponse, FrequencySweep, band_capacity, find_features
from .constants import ETA0, EPS0, MU0
from .dielectrics import RelaxationParams, complex_permittivity
from .dipole import FREE_SPACE, DipoleSource, FieldPoint, fields_at, radial_poynting, radiated_power


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    detail: str


def uniform_line(n: int = 1000, f: float = 70e6) -> OracleResult:
    """N cascaded lossy sections against the closed-form chain matrix of the whole line."""
    seg = BodySegment(1.5, 0.06, 0.004, 0.04)
    pul = pul_params(seg, f)
    t0 = time.perf_counter()
    tp = cascade([segment_twoport(pul, seg.length / n, f)] * n)
    dt = time.perf_counter() - t0
    ref = uniform_line_abcd(pul, seg.length, f)
    err = float(np.max(np.abs(tp.abcd - ref) / np.abs(ref)))
    return OracleResult("uniform-line cascade", err < 1e-6 and dt < 1.0,
                        f"N={n} max rel err {err:.2e}, {dt * 1e3:.1f} ms")


def quarter_phase_segment() -> OracleResult:
    """L' = 250 nH/m, C' = 100 pF/m, 1 m at 25 MHz is a pi/4 electrical length."""
    pul = PerUnitLengthParams(r=0.0, l=250e-9, g=0.0, c=100e-12)
    a = segment_twoport(pul, 1.0, 25e6).A
    err = abs(complex(a) - np.cos(np.pi / 4))
    return OracleResult("pi/4 lossless segment", err < 1e-12, f"|A - cos(pi/4)| = {err:.1e}")


def wire_over_ground() -> OracleResult:
    """a = 6 cm, axis 10 cm above ground: acosh(5/3) = ln 3."""
    pul = pul_params(BodySegment(1.0, 0.06, 0.004, 0.04), 1e6)
    l_ref = MU0 / (2 * np.pi) * np.log(3)
    c_ref = 2 * np.pi * EPS0 / np.log(3)
    err = max(abs(pul.l / l_ref - 1), abs(pul.c / c_ref - 1))
    return OracleResult("wire-over-ground L', C'", err < 1e-12,
                        f"L'={pul.l * 1e9:.2f} nH/m C'={pul.c * 1e12:.2f} pF/m")


def debye_pole() -> OracleResult:
    p = RelaxationParams(4.0, ((40.0, 1e-9, 0.0),), 0.5)
    eps, _ = complex_permittivity(p, 1 / (2 * np.pi * 1e-9))
    return OracleResult("single-pole relaxation", abs(eps - 24.0) < 1e-9, f"eps_r={eps:.12g}")


def _slope(beta_r):
    src = DipoleSource(1.0, 1e-3, 100e6)
    beta = float(FREE_SPACE.beta(src.frequency))
    r = beta_r / beta
    e = np.abs(fields_at(src, FREE_SPACE, FieldPoint(r, np.pi / 2)).E_theta)
    return float(np.polyfit(np.log10(r), np.log10(e), 1)[0])


def dipole_slopes() -> OracleResult:
    near = _slope(np.logspace(-4, -2, 41))
    far = _slope(np.logspace(2, 4, 41))
    ok = abs(near + 3) <= 0.05 and abs(far + 1) <= 0.05
    return OracleResult("dipole slope law", ok, f"near {near:.4f}, far {far:.4f}")


def dipole_impedance() -> OracleResult:
    src = DipoleSource(1.0, 1e-3, 100e6)
    beta = float(FREE_SPACE.beta(src.frequency))
    r = np.array([20.0, 50.0, 200.0]) / beta
    fld = fields_at(src, FREE_SPACE, FieldPoint(r, np.pi / 2))
    dev = float(np.max(np.abs(np.abs(fld.E_theta / fld.H_phi) / ETA0 - 1)))
    return OracleResult("far-field wave impedance", dev < 5e-3, f"max deviation {dev:.2e}")


def dipole_power() -> OracleResult:
    """Flux of the time-averaged Poynting vector through a sphere (numerical quadrature)."""
    src = DipoleSource(1.0, 1e-2, 100e6)
    r = 3.0

    def integrand(th):
        s = radial_poynting(fields_at(src, FREE_SPACE, FieldPoint(r, th)))
        return float(s) * 2 * np.pi * r**2 * np.sin(th)

    p_num, _ = quad(integrand, 0, np.pi, epsabs=0, epsrel=1e-12)
    p_ref = radiated_power(src)
    err = abs(p_num / p_ref - 1)
    return OracleResult("radiated power", err < 1e-9, f"quadrature {p_num:.6e} W vs {p_ref:.6e} W")


def resonance_q(f0: float = 70e6, q: float = 5.0) -> OracleResult:
    sw = FrequencySweep(10e6, 500e6, 2001)
    f = sw.frequencies()
    h = 1 / (1 + 1j * q * (f / f0 - f0 / f))
    feats = [s for s in find_features(ChannelResponse(f, h)) if s.kind == "peak"]
    if len(feats) != 1:
        return OracleResult("resonance Q", False, f"{len(feats)} peaks found")
    step = float(np.max(np.diff(f)[np.searchsorted(f, f0) - 1: np.searchsorted(f, f0) + 1]))
    s = feats[0]
    ok = abs(s.f_c - f0) <= step and abs(s.q / q - 1) < 0.1
    return OracleResult("resonance Q", ok, f"f_c={s.f_c / 1e6:.3f} MHz Q={s.q:.3f}")


def shannon_flat() -> OracleResult:
    f = np.linspace(0, 50e6, 101) + 1e6
    c = band_capacity(f, np.full(f.size, 1e3), (f[0], f[-1]))
    ref = 50e6 * np.log2(1001)
    return OracleResult("Shannon flat band", abs(c / ref - 1) < 1e-12, f"C={c:.6e} bit/s")


ALL = (uniform_line, quarter_phase_segment, wire_over_ground, debye_pole, dipole_slopes,
       dipole_impedance, dipole_power, resonance_q, shannon_flat)


def run_all() -> list:
    out = []
    for fn in ALL:
        try:
            out.append(fn())
        except Exception as exc:  # an oracle that crashes is a failed oracle
            out.append(OracleResult(fn.__name__, False, f"error: {exc}"))
    return out
