"""Frequency sweeps, air-path superposition, spectral features and capacity."""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.constants import k as K_BOLTZMANN
from scipy.signal import peak_prominences

from .bodyline import BodyChannel, solve
from .dipole import DipoleSource, FieldPoint, Medium, fields_at

EQS_BAND = (1e5, 20e6)
BR_BAND = (30e6, 300e6)
MIN_FEATURE_POINTS = 32
WORKERS_ENV = "BRHBC_WORKERS"


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class FrequencySweep:
    f_start: float
    f_stop: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if not 0 < self.f_start < self.f_stop:
            raise ChannelError("sweep needs 0 < f_start < f_stop")
        if int(self.points) < 2:
            raise ChannelError("sweep needs at least 2 points")
        if self.spacing not in ("log", "linear"):
            raise ChannelError("spacing must be 'log' or 'linear'")

    def frequencies(self) -> np.ndarray:
        if self.spacing == "log":
            f = np.logspace(np.log10(self.f_start), np.log10(self.f_stop), int(self.points))
            f[0], f[-1] = self.f_start, self.f_stop
            return f
        return np.linspace(self.f_start, self.f_stop, int(self.points))


@dataclass
class ChannelResponse:
    """Complex gain ``V_Rx / V_in`` on a frequency grid.

    ``source_current`` (Tx port current per volt of ``v_in``) is kept when the
    response comes from the network solver; the air path needs it. Measured
    responses carry magnitude only: build them with :meth:`from_gain_db`,
    which keeps the dB values exactly as given.
    """

    frequencies: np.ndarray
    complex_gain: np.ndarray
    v_in: float = 1.0
    source_current: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)
    magnitude_db: Optional[np.ndarray] = None

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.complex_gain = np.asarray(self.complex_gain, dtype=complex)
        if self.frequencies.shape != self.complex_gain.shape or self.frequencies.ndim != 1:
            raise ChannelError("frequencies and complex_gain must be 1-D and equal length")

    @classmethod
    def from_gain_db(cls, frequencies, gain_db, **meta) -> "ChannelResponse":
        g = np.asarray(gain_db, dtype=float)
        out = cls(frequencies, 10 ** (g / 20), meta={"phase": "unavailable", **meta})
        out.magnitude_db = g
        return out

    @property
    def gain_db(self) -> np.ndarray:
        if self.magnitude_db is not None:
            return self.magnitude_db
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(self.complex_gain))

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.complex_gain)

    @property
    def v_rx(self) -> np.ndarray:
        return self.complex_gain * self.v_in

    def gain_at(self, f: float) -> float:
        """Gain in dB, interpolated linearly in log-frequency."""
        return float(np.interp(np.log(f), np.log(self.frequencies), self.gain_db))

    def to_csv(self) -> str:
        lines = ["frequency_hz,gain_db,phase_rad,v_rx_volts"]
        for f, g, p, v in zip(self.frequencies, self.gain_db, self.phase, np.abs(self.v_rx)):
            lines.append(f"{float(f)!r},{float(g)!r},{float(p)!r},{float(v)!r}")
        return "\n".join(lines) + "\n"


def _workers(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def sweep_gain(channel: BodyChannel, sweep: FrequencySweep, v_in: float = 1.0,
               workers: Optional[int] = None) -> ChannelResponse:
    """Evaluate the on-body transfer function over ``sweep``.

    Frequencies are split into contiguous chunks evaluated concurrently
    (``BRHBC_WORKERS`` or ``workers``); chunks are merged in index order so
    the result does not depend on the degree of parallelism.
    """
    f = sweep.frequencies()
    n = _workers(workers)
    chunks = np.array_split(np.arange(f.size), min(n, f.size))
    if n == 1:
        sols = [solve(channel, f)]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            sols = list(ex.map(lambda idx: solve(channel, f[idx]), chunks))
    gain = np.concatenate([s.gain for s in sols])
    i_src = np.concatenate([s.source_current for s in sols])
    return ChannelResponse(f, gain, v_in=v_in, source_current=i_src)


# ---------------------------------------------------------------------------
# air path


@dataclass(frozen=True)
class AirPath:
    """Line-of-sight dipole coupling between the Tx and Rx devices.

    The Tx device is a short dipole of length ``tx_length`` carrying the Tx
    port current; the Rx device picks up ``E_theta * rx_length`` scaled by the
    capacitive divider ``coupling`` of its plate and load capacitances.
    """

    los_distance: float
    eps_eff: float = 1.0
    tx_length: float = 0.03
    rx_length: float = 0.03
    coupling: float = 1.0

    def __post_init__(self):
        if not self.los_distance > 0:
            raise ChannelError("los_distance must be > 0")
        if self.eps_eff < 1:
            raise ChannelError("eps_eff must be >= 1")


def air_path_gain(f, source_current, air: AirPath) -> np.ndarray:
    """Air-coupled contribution to ``V_Rx / V_in`` (``source_current`` per volt)."""
    f = np.asarray(f, dtype=float)
    i0 = np.asarray(source_current, dtype=complex)
    medium = Medium(air.eps_eff)
    out = np.empty(f.shape, dtype=complex)
    p = FieldPoint(air.los_distance, np.pi / 2)
    for k, (fk, ik) in enumerate(zip(f, i0)):
        # unit-current field, scaled afterwards so zero current is allowed
        e = fields_at(DipoleSource(1.0, air.tx_length, fk), medium, p).E_theta
        out[k] = e * ik * air.rx_length * air.coupling
    return out


def superpose(body_resp: ChannelResponse, air_gain, scale: float = 1.0) -> ChannelResponse:
    """Complex sum ``body + scale * air`` on the body response grid."""
    air_gain = np.asarray(air_gain, dtype=complex)
    if air_gain.shape != body_resp.complex_gain.shape:
        raise ChannelError("air-path gain must match the body response grid")
    return ChannelResponse(
        body_resp.frequencies,
        body_resp.complex_gain + scale * air_gain,
        v_in=body_resp.v_in,
        source_current=body_resp.source_current,
        meta=dict(body_resp.meta),
    )


def superpose_air_path(body_resp: ChannelResponse, air: AirPath, scale: float = 1.0) -> ChannelResponse:
    """Add the dipole air path to a solver-produced body response."""
    if body_resp.source_current is None:
        raise ChannelError("body response carries no source current; produce it with sweep_gain")
    g = air_path_gain(body_resp.frequencies, body_resp.source_current, air)
    out = superpose(body_resp, g, scale)
    out.meta["air_path"] = {
        "los_distance": air.los_distance,
        "eps_eff": air.eps_eff,
        "tx_length": air.tx_length,
        "rx_length": air.rx_length,
        "coupling": air.coupling,
        "scale": scale,
    }
    return out


# ---------------------------------------------------------------------------
# spectral features


@dataclass(frozen=True)
class SpectralFeature:
    kind: str
    f_c: float
    gain_db: float
    q: float
    bandwidth: float
    prominence_db: float


def _local_extrema(y: np.ndarray) -> np.ndarray:
    """Interior indices strictly above the left neighbour and not below the right.

    On a plateau only the lowest-frequency sample qualifies.
    """
    i = np.arange(1, y.size - 1)
    return i[(y[i] > y[i - 1]) & (y[i] >= y[i + 1])]


def _crossing(f, y, i0, level, step):
    """Frequency where ``y`` first crosses ``level`` walking from ``i0`` by ``step``."""
    j = i0
    while 0 <= j + step < y.size:
        a, b = y[j], y[j + step]
        if (a - level) * (b - level) <= 0 and a != b:
            t = (level - a) / (b - a)
            return f[j] + t * (f[j + step] - f[j])
        j += step
    return None


def _half_power_bandwidth(f, y, i, sign):
    level = y[i] - 3.0 if sign > 0 else y[i] + 3.0
    yy = sign * y
    lvl = sign * level
    lo = _crossing(f, yy, i, lvl, -1)
    hi = _crossing(f, yy, i, lvl, +1)
    if lo is None and hi is None:
        return None
    if lo is None:
        return 2 * (hi - f[i])
    if hi is None:
        return 2 * (f[i] - lo)
    return hi - lo


def find_features(resp: ChannelResponse, prominence_db: float = 3.0) -> list:
    """Peaks and notches with at least ``prominence_db`` of prominence.

    Q is ``f_c / BW`` with BW the -3 dB (peaks) or +3 dB (notches) width,
    crossings interpolated linearly; a one-sided width is doubled. Features
    are returned sorted by frequency.
    """
    f = resp.frequencies
    if f.size < MIN_FEATURE_POINTS:
        raise ChannelError(f"feature detection needs at least {MIN_FEATURE_POINTS} points")
    g = resp.gain_db
    out = []
    for kind, sign in (("peak", 1.0), ("notch", -1.0)):
        y = sign * g
        if not np.all(np.isfinite(y)):
            y = np.nan_to_num(y, neginf=-1e300, posinf=1e300)
        idx = _local_extrema(y)
        if idx.size == 0:
            continue
        prom = peak_prominences(y, idx)[0]
        for i, p in zip(idx, prom):
            if p < prominence_db:
                continue
            bw = _half_power_bandwidth(f, g, i, sign)
            if bw is None or bw <= 0:
                continue
            out.append(SpectralFeature(kind, float(f[i]), float(g[i]), float(f[i] / bw), float(bw), float(p)))
    out.sort(key=lambda s: (s.f_c, s.kind))
    return out


def dominant_peaks(features, within_db: float = 3.0) -> list:
    """Peaks whose gain is within ``within_db`` of the strongest peak."""
    peaks = [s for s in features if s.kind == "peak"]
    if not peaks:
        return []
    top = max(s.gain_db for s in peaks)
    return [s for s in peaks if s.gain_db >= top - within_db]


# ---------------------------------------------------------------------------
# capacity


@dataclass(frozen=True)
class NoiseModel:
    temperature: float = 290.0
    noise_figure_db: float = 5.0
    extra_floor_dbm_per_hz: Optional[float] = None

    def __post_init__(self):
        if not self.temperature > 0:
            raise ChannelError("noise temperature must be > 0")

    def density(self) -> float:
        """Noise power spectral density at the receiver input (W/Hz)."""
        n0 = K_BOLTZMANN * self.temperature * 10 ** (self.noise_figure_db / 10)
        if self.extra_floor_dbm_per_hz is not None:
            n0 += 10 ** (self.extra_floor_dbm_per_hz / 10) * 1e-3
        return n0


@dataclass
class CapacityReport:
    band: tuple
    capacity_bits_per_s: float
    mean_snr_db: float
    reference_band: tuple
    reference_capacity_bits_per_s: float
    comparison_ratio: float
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "band_hz": list(self.band),
            "capacity_bits_per_s": self.capacity_bits_per_s,
            "mean_snr_db": self.mean_snr_db,
            "reference_band_hz": list(self.reference_band),
            "reference_capacity_bits_per_s": self.reference_capacity_bits_per_s,
            "comparison_ratio": self.comparison_ratio,
            **self.meta,
        }


def _cell_edges(f: np.ndarray) -> np.ndarray:
    mid = 0.5 * (f[1:] + f[:-1])
    return np.concatenate([[f[0]], mid, [f[-1]]])


def _cell_widths(f: np.ndarray, band) -> np.ndarray:
    lo, hi = band
    e = _cell_edges(f)
    return np.clip(np.minimum(e[1:], hi) - np.maximum(e[:-1], lo), 0, None)


def snr(resp: ChannelResponse, noise: NoiseModel, tx_power_dbm: float, psd_bandwidth_hz: float = 1e6) -> np.ndarray:
    """Linear SNR per frequency; the Tx power is spread over ``psd_bandwidth_hz``."""
    p_psd = 10 ** (tx_power_dbm / 10) * 1e-3 / psd_bandwidth_hz
    return p_psd * np.abs(resp.complex_gain) ** 2 / noise.density()


def band_capacity(f, snr_lin, band) -> float:
    """``sum(df * log2(1 + SNR))`` with piecewise-constant SNR cells clipped to ``band``."""
    lo, hi = band
    if not hi > lo:
        raise ChannelError("empty band")
    f = np.asarray(f, dtype=float)
    if lo < f[0] * (1 - 1e-12) or hi > f[-1] * (1 + 1e-12):
        raise ChannelError(f"band [{lo:g}, {hi:g}] Hz outside the sweep range [{f[0]:g}, {f[-1]:g}] Hz")
    w = _cell_widths(f, band)
    return float(np.sum(w * np.log2(1 + np.asarray(snr_lin, dtype=float))))


def _mean_snr_db(f, snr_lin, band) -> float:
    w = _cell_widths(np.asarray(f, dtype=float), band)
    with np.errstate(divide="ignore"):
        return float(10 * np.log10(np.sum(w * snr_lin) / np.sum(w)))


def shannon_capacity(resp: ChannelResponse, noise: NoiseModel, tx_power_dbm: float, band=BR_BAND,
                     reference_band=EQS_BAND, psd_bandwidth_hz: float = 1e6) -> CapacityReport:
    """Shannon-Hartley capacity of ``band`` and its ratio to ``reference_band``.

    Both bands see the same transmit power spectral density, so "equal Tx
    power" means equal power per ``psd_bandwidth_hz``.
    """
    s = snr(resp, noise, tx_power_dbm, psd_bandwidth_hz)
    c = band_capacity(resp.frequencies, s, band)
    c_ref = band_capacity(resp.frequencies, s, reference_band)
    ratio = c / c_ref if c_ref > 0 else np.inf
    return CapacityReport(
        band=tuple(float(x) for x in band),
        capacity_bits_per_s=c,
        mean_snr_db=_mean_snr_db(resp.frequencies, s, band),
        reference_band=tuple(float(x) for x in reference_band),
        reference_capacity_bits_per_s=c_ref,
        comparison_ratio=float(ratio),
        meta={
            "tx_power_dbm": tx_power_dbm,
            "psd_bandwidth_hz": psd_bandwidth_hz,
            "noise": {
                "temperature_k": noise.temperature,
                "noise_figure_db": noise.noise_figure_db,
                "extra_floor_dbm_per_hz": noise.extra_floor_dbm_per_hz,
            },
        },
    )


def energy_per_bit(p_tx: float, capacity: float) -> float:
    """Transmit energy per bit (J/bit)."""
    if not capacity > 0:
        raise ChannelError("capacity must be > 0")
    if p_tx < 0:
        raise ChannelError("p_tx must be >= 0")
    return p_tx / capacity


def warn_if_sparse(resp: ChannelResponse) -> bool:
    """True (with a warning) when the sweep is too coarse for feature detection."""
    if resp.frequencies.size < MIN_FEATURE_POINTS:
        warnings.warn(
            f"{resp.frequencies.size} sweep points is below the feature-detection minimum "
            f"of {MIN_FEATURE_POINTS}; features skipped",
            stacklevel=2,
        )
        return True
    return False
