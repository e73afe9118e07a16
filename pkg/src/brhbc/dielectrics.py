"""Frequency-dependent dielectric properties of body tissues.

Two evaluation modes are supported:

* table mode: a :class:`DielectricSpectrum` sampled on a frequency grid and
  interpolated piecewise-linearly in log-frequency;
* parametric mode: a multi-term Cole-Cole :class:`RelaxationParams` evaluated
  analytically.

The bundled skin (dry) and muscle tables cover 100 kHz - 1 GHz and were
generated with :func:`cole_cole` from the literature parameter sets in
:data:`GABRIEL_PARAMS` (see ``notebooks/make_tissue_tables.py``).
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from importlib import resources
from typing import TextIO, Union

import numpy as np

from .constants import EPS0, SIGMA_COPPER


class DielectricError(ValueError):
    """Invalid dielectric data or out-of-range query."""


class TissueKind(str, enum.Enum):
    SKIN = "skin"
    MUSCLE = "muscle"
    COPPER = "copper-reference"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DielectricSpectrum:
    """Tabulated relative permittivity and conductivity versus frequency."""

    tissue: TissueKind
    frequency: np.ndarray
    eps_r: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=float)
        e = np.asarray(self.eps_r, dtype=float)
        s = np.asarray(self.sigma, dtype=float)
        if not (f.ndim == e.ndim == s.ndim == 1 and f.size == e.size == s.size):
            raise DielectricError("frequency, eps_r and sigma must be 1-D and equal length")
        if f.size < 2:
            raise DielectricError("a spectrum needs at least 2 samples")
        if np.any(f <= 0):
            raise DielectricError("frequencies must be positive")
        if np.any(np.diff(f) <= 0):
            raise DielectricError("frequencies must be strictly increasing (no duplicates)")
        if np.any(e < 1):
            raise DielectricError("eps_r must be >= 1")
        if np.any(s < 0):
            raise DielectricError("sigma must be >= 0")
        for name, arr in (("frequency", f), ("eps_r", e), ("sigma", s)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def f_min(self) -> float:
        return float(self.frequency[0])

    @property
    def f_max(self) -> float:
        return float(self.frequency[-1])


@dataclass(frozen=True)
class RelaxationParams:
    """Multi-term Cole-Cole parameterization.

    ``terms`` is a sequence of ``(delta_eps, tau, alpha)`` triples.
    """

    eps_inf: float
    terms: tuple = ()
    sigma_ionic: float = 0.0
    tissue: TissueKind = TissueKind.CUSTOM

    def __post_init__(self):
        if self.eps_inf < 1:
            raise DielectricError("eps_inf must be >= 1")
        if self.sigma_ionic < 0:
            raise DielectricError("sigma_ionic must be >= 0")
        terms = tuple(tuple(float(x) for x in t) for t in self.terms)
        for delta, tau, alpha in terms:
            if tau <= 0:
                raise DielectricError("relaxation time tau must be > 0")
            if not 0 <= alpha < 1:
                raise DielectricError("alpha must lie in [0, 1)")
        object.__setattr__(self, "terms", terms)


@dataclass(frozen=True)
class ConstantMedium:
    """Frequency-independent conductor or dielectric (e.g. the copper reference)."""

    eps_r: float
    sigma: float
    tissue: TissueKind = TissueKind.COPPER


Dielectric = Union[DielectricSpectrum, RelaxationParams, ConstantMedium]

COPPER = ConstantMedium(eps_r=1.0, sigma=SIGMA_COPPER, tissue=TissueKind.COPPER)

# Four-term Cole-Cole parameters (eps_inf, [(delta, tau, alpha)...], sigma_ionic)
# for the two tissues of the cylinder model, from Gabriel, Lau & Gabriel (1996).
GABRIEL_PARAMS = {
    TissueKind.MUSCLE: RelaxationParams(
        eps_inf=4.0,
        terms=(
            (50.0, 7.234e-12, 0.1),
            (7000.0, 353.678e-9, 0.1),
            (1.2e6, 318.310e-6, 0.1),
            (2.5e7, 2.274e-3, 0.0),
        ),
        sigma_ionic=0.2,
        tissue=TissueKind.MUSCLE,
    ),
    TissueKind.SKIN: RelaxationParams(
        eps_inf=4.0,
        terms=(
            (32.0, 7.234e-12, 0.0),
            (1100.0, 32.481e-9, 0.2),
            (0.0, 159.155e-6, 0.2),
            (0.0, 15.915e-3, 0.2),
        ),
        sigma_ionic=0.0002,
        tissue=TissueKind.SKIN,
    ),
}

_TABLE_FILES = {
    TissueKind.SKIN: "skin_dry.csv",
    TissueKind.MUSCLE: "muscle.csv",
}

HEADER = ("frequency_hz", "eps_r", "sigma_s_per_m")


def cole_cole(params: RelaxationParams, f):
    """Evaluate the Cole-Cole model; returns ``(eps_r, sigma)`` arrays."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DielectricError("frequency must be > 0")
    w = 2 * np.pi * f
    eps = np.full(f.shape, params.eps_inf, dtype=complex)
    for delta, tau, alpha in params.terms:
        eps = eps + delta / (1 + (1j * w * tau) ** (1 - alpha))
    eps = eps + params.sigma_ionic / (1j * w * EPS0)
    return eps.real, -eps.imag * w * EPS0


def _interp_log(spectrum: DielectricSpectrum, f: np.ndarray):
    x = np.log(spectrum.frequency)
    xq = np.log(f)
    eps = np.interp(xq, x, spectrum.eps_r)
    sig = np.interp(xq, x, spectrum.sigma)
    # exact table hits return the stored pair untouched
    idx = np.searchsorted(spectrum.frequency, f)
    idx = np.clip(idx, 0, spectrum.frequency.size - 1)
    hit = spectrum.frequency[idx] == f
    eps = np.where(hit, spectrum.eps_r[idx], eps)
    sig = np.where(hit, spectrum.sigma[idx], sig)
    return eps, sig


def complex_permittivity(medium: Dielectric, f):
    """Relative permittivity and conductivity of ``medium`` at frequency ``f``.

    Args:
        medium: tabulated spectrum, Cole-Cole parameters or constant medium.
        f: frequency in Hz, scalar or array.

    Returns:
        ``(eps_r, sigma)`` with the shape of ``f``. The complex absolute
        permittivity is ``EPS0 * eps_r - 1j * sigma / (2 * pi * f)``.

    Raises:
        DielectricError: non-positive frequency, or (table mode) a frequency
            outside the tabulated range.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(~np.isfinite(f_arr)) or np.any(f_arr <= 0):
        raise DielectricError("frequency must be finite and > 0")
    if isinstance(medium, DielectricSpectrum):
        if np.any(f_arr < medium.f_min) or np.any(f_arr > medium.f_max):
            raise DielectricError(
                f"frequency outside tabulated range [{medium.f_min:g}, {medium.f_max:g}] Hz"
            )
        eps, sig = _interp_log(medium, f_arr)
    elif isinstance(medium, RelaxationParams):
        eps, sig = cole_cole(medium, f_arr)
    elif isinstance(medium, ConstantMedium):
        eps = np.full(f_arr.shape, float(medium.eps_r))
        sig = np.full(f_arr.shape, float(medium.sigma))
    else:
        raise TypeError(f"unsupported dielectric description: {type(medium).__name__}")
    if np.ndim(f) == 0:
        return float(eps), float(sig)
    return eps, sig


def complex_conductivity(medium: Dielectric, f):
    """Admittivity ``sigma + j*omega*eps0*eps_r`` in S/m."""
    eps, sig = complex_permittivity(medium, f)
    return sig + 1j * 2 * np.pi * np.asarray(f, dtype=float) * EPS0 * eps


def load_dispersion_table(source: Union[TextIO, str], tissue: TissueKind = TissueKind.CUSTOM) -> DielectricSpectrum:
    """Parse a dispersion CSV (``frequency_hz,eps_r,sigma_s_per_m``).

    Lines starting with ``#`` and blank lines are ignored. Rows must already
    be in strictly increasing frequency order; unsorted or duplicated
    frequencies are rejected rather than silently reordered.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = []
    header_seen = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if not header_seen:
            if tuple(cells) != HEADER:
                raise DielectricError(f"line {lineno}: expected header {','.join(HEADER)}")
            header_seen = True
            continue
        if len(cells) != 3:
            raise DielectricError(f"line {lineno}: expected 3 columns, got {len(cells)}")
        try:
            rows.append(tuple(float(c) for c in cells))
        except ValueError:
            raise DielectricError(f"line {lineno}: non-numeric value in {line!r}") from None
    if not header_seen:
        raise DielectricError("empty dispersion table")
    if not rows:
        raise DielectricError("dispersion table has no data rows")
    arr = np.array(rows)
    return DielectricSpectrum(tissue, arr[:, 0], arr[:, 1], arr[:, 2])


def dump_dispersion_table(spectrum: DielectricSpectrum, comment: str = "") -> str:
    out = io.StringIO()
    for line in comment.splitlines():
        out.write(f"# {line}\n")
    out.write(",".join(HEADER) + "\n")
    for f, e, s in zip(spectrum.frequency, spectrum.eps_r, spectrum.sigma):
        out.write(f"{float(f)!r},{float(e)!r},{float(s)!r}\n")
    return out.getvalue()


_cache: dict = {}


def bundled_spectrum(kind: TissueKind) -> DielectricSpectrum:
    """Return the bundled table for skin or muscle."""
    kind = TissueKind(kind)
    if kind not in _TABLE_FILES:
        raise DielectricError(f"no bundled table for {kind.value!r}")
    if kind not in _cache:
        text = resources.files("brhbc.data").joinpath(_TABLE_FILES[kind]).read_text()
        _cache[kind] = load_dispersion_table(text, tissue=kind)
    return _cache[kind]


def resolve_tissue(tissue) -> Dielectric:
    """Map a tissue label, ``custom:<path>`` string or dielectric object to a dielectric."""
    if isinstance(tissue, (DielectricSpectrum, RelaxationParams, ConstantMedium)):
        return tissue
    if isinstance(tissue, str) and tissue.startswith("custom:"):
        path = tissue.split(":", 1)[1]
        with open(path, newline="") as fh:
            return load_dispersion_table(fh, tissue=TissueKind.CUSTOM)
    try:
        kind = TissueKind(tissue)
    except ValueError:
        raise DielectricError(f"unknown tissue {tissue!r}") from None
    if kind is TissueKind.COPPER:
        return COPPER
    if kind is TissueKind.CUSTOM:
        raise DielectricError("custom tissue requires an attached spectrum ('custom:<csv path>')")
    return bundled_spectrum(kind)


def tissue_label(medium) -> str:
    kind = getattr(medium, "tissue", None)
    return kind.value if isinstance(kind, TissueKind) else str(medium)
