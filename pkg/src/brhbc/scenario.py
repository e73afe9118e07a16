"""Scenario files: sectioned key-value configs describing a full analysis.

Grammar (``configparser`` INI dialect, ``#`` comments)::

    [scenario]        name, description
    [model]           n_segments, radiation_coefficient, body_loss_factor
    [segment:NAME]    length, outer_radius, skin_thickness, height_above_ground,
                      tissue_outer, tissue_inner   (one section per segment)
    [body]            path, tx_stub, rx_stub       (comma-separated segment names)
    [tx_device]       signal_plate_radius, plate_separation, ground_plate_area,
    [rx_device]       ground_plate_thickness, ground_distance, skin_gap, gap_eps_r
    [termination]     r_load (ohm or inf), c_load (F or none)
    [body_ground]     c_b, mode (distributed | lumped)
    [sweep]           f_start, f_stop, points, spacing (log | linear)
    [excitation]      v_in
    [noise]           temperature, noise_figure_db, extra_floor_dbm_per_hz (or none)
    [capacity]        tx_power_dbm, psd_bandwidth_hz, band, reference_band
    [safety]          limits_file (empty = bundled), sar_limit, density,
                      frequency (Hz or peak), sense_resistance
    [leakage]         distances, frequency (Hz or peak), onbody_length
    [air_path]        enabled, los_distance, eps_eff, scale
    [calibration]     measurement, rx_offset, buffer_offset, tx_offset_db, band

Only ``[segment:*]`` and ``[body] path`` are required; everything else has a
default. Unknown sections or keys are rejected so typos cannot pass silently.
Relative file paths resolve against the config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .bodyline import (
    BodyChannel,
    BodyGroundCoupling,
    BodySegment,
    DeviceGeometry,
    LineModel,
    TerminationNetwork,
)
from .channel import BR_BAND, EQS_BAND, AirPath, FrequencySweep, NoiseModel


class ConfigError(ValueError):
    """Config problem; the message names the offending ``[section] key``."""


_DEVICE_KEYS = ("signal_plate_radius", "plate_separation", "ground_plate_area", "ground_plate_thickness",
                "ground_distance", "skin_gap", "gap_eps_r")
_SCHEMA = {
    "scenario": ("name", "description"),
    "model": ("n_segments", "radiation_coefficient", "body_loss_factor"),
    "body": ("path", "tx_stub", "rx_stub"),
    "tx_device": _DEVICE_KEYS,
    "rx_device": _DEVICE_KEYS,
    "termination": ("r_load", "c_load"),
    "body_ground": ("c_b", "mode"),
    "sweep": ("f_start", "f_stop", "points", "spacing"),
    "excitation": ("v_in",),
    "noise": ("temperature", "noise_figure_db", "extra_floor_dbm_per_hz"),
    "capacity": ("tx_power_dbm", "psd_bandwidth_hz", "band", "reference_band"),
    "safety": ("limits_file", "sar_limit", "density", "frequency", "sense_resistance"),
    "leakage": ("distances", "frequency", "onbody_length"),
    "air_path": ("enabled", "los_distance", "eps_eff", "scale"),
    "calibration": ("measurement", "rx_offset", "buffer_offset", "tx_offset_db", "band"),
}
_SEGMENT_KEYS = ("length", "outer_radius", "skin_thickness", "height_above_ground", "tissue_outer", "tissue_inner")


@dataclass(frozen=True)
class CapacitySettings:
    tx_power_dbm: float = -5.0
    psd_bandwidth_hz: float = 1e6
    band: tuple = BR_BAND
    reference_band: tuple = EQS_BAND


@dataclass(frozen=True)
class SafetySettings:
    limits_file: Optional[str] = None
    sar_limit: float = 0.08
    density: float = 1000.0
    frequency: Optional[float] = None  # None = use the BR peak
    sense_resistance: float = 1.0


@dataclass(frozen=True)
class LeakageSettings:
    distances: tuple = (0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 2.0, 5.0, 10.0)
    frequency: Optional[float] = None
    onbody_length: float = 1.5


@dataclass(frozen=True)
class AirPathSettings:
    enabled: bool = False
    los_distance: float = 0.5
    eps_eff: float = 1.0
    scale: float = 1.0


@dataclass(frozen=True)
class CalibrationSettings:
    measurement: Optional[str] = None
    rx_offset: Optional[str] = None
    buffer_offset: Optional[str] = None
    tx_offset_db: float = 0.0
    band: tuple = EQS_BAND


@dataclass
class Scenario:
    name: str
    channel: BodyChannel
    sweep: FrequencySweep
    segments: dict
    v_in: float = 1.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    capacity: CapacitySettings = field(default_factory=CapacitySettings)
    safety: SafetySettings = field(default_factory=SafetySettings)
    leakage: LeakageSettings = field(default_factory=LeakageSettings)
    air_path: AirPathSettings = field(default_factory=AirPathSettings)
    calibration: CalibrationSettings = field(default_factory=CalibrationSettings)
    description: str = ""
    source: Optional[str] = None

    def echo(self) -> dict:
        """Every resolved tunable, for embedding in outputs."""
        ch = self.channel

        def dev(d: DeviceGeometry):
            return {k: getattr(d, k) for k in _DEVICE_KEYS}

        return {
            "scenario": {"name": self.name, "description": self.description},
            "model": {
                "n_segments": ch.model.n_segments,
                "radiation_coefficient": ch.model.radiation_coefficient,
                "body_loss_factor": ch.model.body_loss_factor,
            },
            "segments": {k: s.describe() for k, s in self.segments.items()},
            "body": {
                "path": [self._name_of(s) for s in ch.path],
                "tx_stub": [self._name_of(s) for s in ch.tx_stub],
                "rx_stub": [self._name_of(s) for s in ch.rx_stub],
            },
            "tx_device": dev(ch.dev_tx),
            "rx_device": dev(ch.dev_rx),
            "derived": {
                "tx_coupling_capacitance_f": ch.dev_tx.coupling_capacitance,
                "tx_return_capacitance_f": ch.dev_tx.return_capacitance,
                "rx_coupling_capacitance_f": ch.dev_rx.coupling_capacitance,
                "rx_return_capacitance_f": ch.dev_rx.return_capacitance,
                "rx_plate_capacitance_f": ch.dev_rx.plate_capacitance,
                "total_ground_capacitance_f": ch.total_ground_capacitance(),
            },
            "termination": {
                "r_load": "inf" if not np.isfinite(ch.termination.r_load) else ch.termination.r_load,
                "c_load": ch.termination.c_load,
            },
            "body_ground": {"c_b": ch.coupling.c_b, "mode": "distributed" if ch.coupling.distributed else "lumped"},
            "sweep": {"f_start": self.sweep.f_start, "f_stop": self.sweep.f_stop,
                      "points": self.sweep.points, "spacing": self.sweep.spacing},
            "excitation": {"v_in": self.v_in},
            "noise": {"temperature": self.noise.temperature, "noise_figure_db": self.noise.noise_figure_db,
                      "extra_floor_dbm_per_hz": self.noise.extra_floor_dbm_per_hz},
            "capacity": {"tx_power_dbm": self.capacity.tx_power_dbm,
                         "psd_bandwidth_hz": self.capacity.psd_bandwidth_hz,
                         "band": list(self.capacity.band), "reference_band": list(self.capacity.reference_band)},
            "safety": {"limits_file": self.safety.limits_file, "sar_limit": self.safety.sar_limit,
                       "density": self.safety.density, "frequency": self.safety.frequency or "peak",
                       "sense_resistance": self.safety.sense_resistance},
            "leakage": {"distances": list(self.leakage.distances), "frequency": self.leakage.frequency or "peak",
                        "onbody_length": self.leakage.onbody_length},
            "air_path": {"enabled": self.air_path.enabled, "los_distance": self.air_path.los_distance,
                         "eps_eff": self.air_path.eps_eff, "scale": self.air_path.scale},
            "calibration": {"measurement": self.calibration.measurement, "rx_offset": self.calibration.rx_offset,
                            "buffer_offset": self.calibration.buffer_offset,
                            "tx_offset_db": self.calibration.tx_offset_db, "band": list(self.calibration.band)},
        }

    def _name_of(self, seg):
        for k, s in self.segments.items():
            if s is seg:
                return k
        return "?"


class _Reader:
    def __init__(self, cp: configparser.ConfigParser, base: Path):
        self.cp = cp
        self.base = base

    def raw(self, sec, key, default=None, required=False):
        if self.cp.has_option(sec, key):
            return self.cp.get(sec, key).strip()
        if required:
            raise ConfigError(f"[{sec}] {key}: missing required key")
        return default

    def float(self, sec, key, default=None, required=False, allow_inf=False):
        v = self.raw(sec, key, None, required)
        if v is None:
            return default
        try:
            x = float(v)
        except ValueError:
            raise ConfigError(f"[{sec}] {key}: not a number: {v!r}") from None
        if np.isnan(x) or (np.isinf(x) and not allow_inf):
            raise ConfigError(f"[{sec}] {key}: must be finite")
        return x

    def opt_float(self, sec, key, default=None, none_words=("none", "")):
        v = self.raw(sec, key, None)
        if v is None:
            return default
        if v.lower() in none_words:
            return None
        return self.float(sec, key)

    def int(self, sec, key, default):
        v = self.raw(sec, key, None)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise ConfigError(f"[{sec}] {key}: not an integer: {v!r}") from None

    def bool(self, sec, key, default):
        if not self.cp.has_option(sec, key):
            return default
        try:
            return self.cp.getboolean(sec, key)
        except ValueError:
            raise ConfigError(f"[{sec}] {key}: not a boolean") from None

    def names(self, sec, key):
        v = self.raw(sec, key, "")
        return [x.strip() for x in v.split(",") if x.strip()]

    def floats(self, sec, key, default):
        v = self.raw(sec, key, None)
        if v is None:
            return default
        try:
            return tuple(float(x) for x in v.split(",") if x.strip())
        except ValueError:
            raise ConfigError(f"[{sec}] {key}: expected comma-separated numbers") from None

    def band(self, sec, key, default):
        b = self.floats(sec, key, default)
        if len(b) != 2:
            raise ConfigError(f"[{sec}] {key}: expected 'low, high'")
        return (b[0], b[1])

    def path(self, sec, key):
        v = self.raw(sec, key, None)
        if not v:
            return None
        p = Path(v)
        return str(p if p.is_absolute() else (self.base / p))

    def freq_or_peak(self, sec, key):
        v = self.raw(sec, key, None)
        if v is None or v.lower() == "peak":
            return None
        return self.float(sec, key)


def _guard(sec, key, fn):
    try:
        return fn()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{sec}] {key}: {exc}") from None


def _check_schema(cp):
    for sec in cp.sections():
        if sec.startswith("segment:"):
            allowed = _SEGMENT_KEYS
        elif sec in _SCHEMA:
            allowed = _SCHEMA[sec]
        else:
            raise ConfigError(f"[{sec}]: unknown section")
        for key in cp.options(sec):
            if key not in allowed:
                raise ConfigError(f"[{sec}] {key}: unknown key")


def _device(r: _Reader, sec: str) -> DeviceGeometry:
    d = DeviceGeometry()
    kw = {k: r.float(sec, k, getattr(d, k)) for k in _DEVICE_KEYS}
    return _guard(sec, "geometry", lambda: DeviceGeometry(**kw))


def parse_scenario(text: str, base_dir: Optional[Path] = None, source: Optional[str] = None) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    _check_schema(cp)
    r = _Reader(cp, Path(base_dir or "."))

    model = _guard("model", "parameters", lambda: LineModel(
        radiation_coefficient=r.float("model", "radiation_coefficient", LineModel.radiation_coefficient),
        body_loss_factor=r.float("model", "body_loss_factor", LineModel.body_loss_factor),
        n_segments=r.int("model", "n_segments", LineModel.n_segments),
    ))

    segments = {}
    for sec in cp.sections():
        if not sec.startswith("segment:"):
            continue
        name = sec.split(":", 1)[1].strip()
        vals = {k: r.float(sec, k, required=True) for k in _SEGMENT_KEYS[:4]}
        vals["tissue_outer"] = r.raw(sec, "tissue_outer", "skin")
        vals["tissue_inner"] = r.raw(sec, "tissue_inner", "muscle")
        for k in ("tissue_outer", "tissue_inner"):
            v = vals[k]
            if v.startswith("custom:"):
                p = Path(v.split(":", 1)[1])
                vals[k] = "custom:" + str(p if p.is_absolute() else r.base / p)
        segments[name] = _guard(sec, "segment", lambda: BodySegment(**vals))

    def lookup(key):
        out = []
        for n in r.names("body", key):
            if n not in segments:
                raise ConfigError(f"[body] {key}: unknown segment {n!r}")
            out.append(segments[n])
        return tuple(out)

    path = lookup("path")
    if not path:
        raise ConfigError("[body] path: at least one segment required")

    dflt_term = TerminationNetwork()
    r_load = r.float("termination", "r_load", np.inf, allow_inf=True)
    c_load = r.opt_float("termination", "c_load", dflt_term.c_load)
    term = _guard("termination", "r_load", lambda: TerminationNetwork(r_load, c_load))

    mode = r.raw("body_ground", "mode", "distributed")
    if mode not in ("distributed", "lumped"):
        raise ConfigError("[body_ground] mode: expected 'distributed' or 'lumped'")
    bg = _guard("body_ground", "c_b", lambda: BodyGroundCoupling(
        r.float("body_ground", "c_b", BodyGroundCoupling.c_b), mode == "distributed"))

    channel = BodyChannel(path, _device(r, "tx_device"), _device(r, "rx_device"), term, bg,
                          lookup("tx_stub"), lookup("rx_stub"), model)

    sweep = _guard("sweep", "f_start", lambda: FrequencySweep(
        r.float("sweep", "f_start", 1e5), r.float("sweep", "f_stop", 5e8),
        r.int("sweep", "points", 1024), r.raw("sweep", "spacing", "log")))

    noise = _guard("noise", "temperature", lambda: NoiseModel(
        r.float("noise", "temperature", 290.0), r.float("noise", "noise_figure_db", 5.0),
        r.opt_float("noise", "extra_floor_dbm_per_hz", None)))

    cap = CapacitySettings(
        r.float("capacity", "tx_power_dbm", -5.0), r.float("capacity", "psd_bandwidth_hz", 1e6),
        r.band("capacity", "band", BR_BAND), r.band("capacity", "reference_band", EQS_BAND))
    if not cap.psd_bandwidth_hz > 0:
        raise ConfigError("[capacity] psd_bandwidth_hz: must be > 0")

    saf = SafetySettings(
        r.path("safety", "limits_file"), r.float("safety", "sar_limit", 0.08), r.float("safety", "density", 1000.0),
        r.freq_or_peak("safety", "frequency"), r.float("safety", "sense_resistance", 1.0))
    if not saf.sar_limit > 0:
        raise ConfigError("[safety] sar_limit: must be > 0")
    if not saf.density > 0:
        raise ConfigError("[safety] density: must be > 0")
    if not saf.sense_resistance > 0:
        raise ConfigError("[safety] sense_resistance: must be > 0")

    leak = LeakageSettings(
        r.floats("leakage", "distances", LeakageSettings.distances), r.freq_or_peak("leakage", "frequency"),
        r.float("leakage", "onbody_length", 1.5))

    air = AirPathSettings(
        r.bool("air_path", "enabled", False), r.float("air_path", "los_distance", 0.5),
        r.float("air_path", "eps_eff", 1.0), r.float("air_path", "scale", 1.0))
    _guard("air_path", "los_distance", lambda: AirPath(air.los_distance, air.eps_eff))

    cal = CalibrationSettings(
        r.path("calibration", "measurement"), r.path("calibration", "rx_offset"),
        r.path("calibration", "buffer_offset"), r.float("calibration", "tx_offset_db", 0.0),
        r.band("calibration", "band", EQS_BAND))

    return Scenario(
        name=r.raw("scenario", "name", "unnamed"),
        description=r.raw("scenario", "description", ""),
        channel=channel,
        sweep=sweep,
        segments=segments,
        v_in=r.float("excitation", "v_in", 1.0),
        noise=noise,
        capacity=cap,
        safety=saf,
        leakage=leak,
        air_path=air,
        calibration=cal,
        source=source,
    )


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(p)!r}: {exc.strerror}") from None
    return parse_scenario(text, base_dir=p.parent, source=str(p))


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (e.g. ``reference_body.cfg``)."""
    p = Path(str(resources.files("brhbc.data").joinpath(name)))
    if not p.exists():
        raise ConfigError(f"no bundled config {name!r}")
    return p
