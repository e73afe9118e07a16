"""Induced fields, whole-body SAR and transmitter power versus exposure limits."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from typing import Optional, TextIO, Union

import numpy as np

from .bodyline import BodyChannel, solve

LIMITS_HEADER = ("frequency_hz", "e_limit_v_per_m", "h_limit_a_per_m")
DEFAULT_SAR_LIMIT = 0.08  # W/kg, whole-body average, general public
DEFAULT_DENSITY = 1000.0  # kg/m^3


class SafetyError(ValueError):
    pass


@dataclass(frozen=True)
class ExposureLimits:
    """Reference levels (rms) tabulated against frequency, log-log interpolated."""

    frequency: np.ndarray
    e_limit: np.ndarray
    h_limit: np.ndarray
    sar_limit: float = DEFAULT_SAR_LIMIT

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=float)
        e = np.asarray(self.e_limit, dtype=float)
        h = np.asarray(self.h_limit, dtype=float)
        if f.ndim != 1 or f.size < 2 or e.shape != f.shape or h.shape != f.shape:
            raise SafetyError("limits table needs >= 2 rows of equal length")
        if np.any(np.diff(f) <= 0):
            raise SafetyError("limit frequencies must be strictly increasing")
        if np.any(f <= 0) or np.any(e <= 0) or np.any(h <= 0) or not self.sar_limit > 0:
            raise SafetyError("all limits must be > 0")
        object.__setattr__(self, "frequency", f)
        object.__setattr__(self, "e_limit", e)
        object.__setattr__(self, "h_limit", h)

    def at(self, f: float):
        """``(E_limit, H_limit)`` at ``f``; frequencies outside the table are an error."""
        if not self.frequency[0] <= f <= self.frequency[-1]:
            raise SafetyError(f"no exposure limit tabulated for {f:g} Hz")
        x = np.log(f)
        lf = np.log(self.frequency)
        e = np.exp(np.interp(x, lf, np.log(self.e_limit)))
        h = np.exp(np.interp(x, lf, np.log(self.h_limit)))
        return float(e), float(h)


def load_limits(source: Union[TextIO, str], sar_limit: float = DEFAULT_SAR_LIMIT) -> ExposureLimits:
    if isinstance(source, str):
        source = io.StringIO(source)
    rows, header = [], None
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if header is None:
            if tuple(cells) != LIMITS_HEADER:
                raise SafetyError(f"line {lineno}: expected header {','.join(LIMITS_HEADER)}")
            header = cells
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise SafetyError(f"line {lineno}: non-numeric value") from None
        if len(cells) != 3:
            raise SafetyError(f"line {lineno}: expected 3 columns")
    if not rows:
        raise SafetyError("limits table is empty")
    a = np.array(rows)
    return ExposureLimits(a[:, 0], a[:, 1], a[:, 2], sar_limit)


def default_limits(sar_limit: float = DEFAULT_SAR_LIMIT) -> ExposureLimits:
    """Bundled general-public whole-body reference levels (100 kHz - 2 GHz)."""
    text = resources.files("brhbc.data").joinpath("icnirp2020_general_public.csv").read_text()
    return load_limits(text, sar_limit)


@dataclass(frozen=True)
class TxPowerReport:
    v_r: float
    i_tx: float
    v_tx: float
    p_tx: float


def tx_power(v_in_peak: float, sense_resistance: float, v_r_peak: float) -> TxPowerReport:
    """Transmitter power from the voltage across a series sense resistor.

    Args:
        v_in_peak: peak source amplitude (V).
        sense_resistance: sense resistor (ohm).
        v_r_peak: peak voltage across the sense resistor (V).
    """
    if not sense_resistance > 0:
        raise SafetyError("sense resistance must be > 0")
    i_tx = abs(v_r_peak) / np.sqrt(2) / sense_resistance
    v_tx = abs(v_in_peak) / np.sqrt(2)
    return TxPowerReport(float(v_r_peak), float(i_tx), float(v_tx), float(v_tx * i_tx))


def modeled_tx_power(channel: BodyChannel, f, v_in_peak: float = 1.0, sense_resistance: float = 1.0):
    """Tx power from the modeled source current, as a sense-resistor reading would give it.

    The sense resistor is treated as small against the coupler impedance and
    left out of the network.
    """
    i_src = np.abs(solve(channel, f, v_in=v_in_peak).source_current)
    v_r = i_src * sense_resistance
    i_tx = v_r / np.sqrt(2) / sense_resistance
    v_tx = abs(v_in_peak) / np.sqrt(2)
    return v_tx * i_tx


@dataclass(frozen=True)
class ExposureReport:
    frequency: float
    v_in: float
    induced_e: float
    induced_h: float
    sar_avg: float
    absorbed_power: float
    e_limit: float
    h_limit: float
    sar_limit: float

    @staticmethod
    def _margin(limit, est):
        return np.inf if est == 0 else limit / est

    @property
    def margins(self):
        return (
            self._margin(self.e_limit, self.induced_e),
            self._margin(self.h_limit, self.induced_h),
            self._margin(self.sar_limit, self.sar_avg),
        )

    @property
    def safe(self) -> bool:
        return all(m >= 1 for m in self.margins)

    def as_dict(self) -> dict:
        me, mh, ms = self.margins
        return {
            "frequency_hz": self.frequency,
            "v_in": self.v_in,
            "induced_e_v_per_m": self.induced_e,
            "induced_h_a_per_m": self.induced_h,
            "sar_avg_w_per_kg": self.sar_avg,
            "absorbed_power_w": self.absorbed_power,
            "limits": {"e_v_per_m": self.e_limit, "h_a_per_m": self.h_limit, "sar_w_per_kg": self.sar_limit},
            "margins": {"e": me, "h": mh, "sar": ms},
            "safe": self.safe,
        }


def exposure_estimate(channel: BodyChannel, f: float, v_in_peak: float = 1.0,
                      limits: Optional[ExposureLimits] = None,
                      density: float = DEFAULT_DENSITY) -> ExposureReport:
    """Peak induced fields and whole-body average SAR along the body line.

    The in-body E field is the resistive part of the line's voltage gradient,
    expressed through the local absorbed power density. H is the Ampere
    estimate at the body surface. All reported fields are rms.
    """
    if not density > 0:
        raise SafetyError("density must be > 0")
    limits = limits or default_limits()
    e_lim, h_lim = limits.at(f)
    sol = solve(channel, f, v_in=v_in_peak, profile=True)
    p = sol.profile
    i = np.abs(p["current"])
    # time-averaged absorbed power per unit volume in each cell
    p_vol = 0.5 * i**2 * p["r_loss"] / p["area"]
    e_peak = np.sqrt(2 * p_vol / p["sigma"])
    h_peak = i / (2 * np.pi * p["radius"])
    p_abs = float(np.sum(p_vol * p["area"] * p["dl"]))
    sar = p_abs / (density * channel.body_volume)
    return ExposureReport(
        frequency=float(f),
        v_in=float(v_in_peak),
        induced_e=float(np.max(e_peak) / np.sqrt(2)),
        induced_h=float(np.max(h_peak) / np.sqrt(2)),
        sar_avg=float(sar),
        absorbed_power=p_abs,
        e_limit=e_lim,
        h_limit=h_lim,
        sar_limit=limits.sar_limit,
    )
