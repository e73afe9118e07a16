"""Measurement ingestion, calibration chain and body-ground capacitance fitting."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, TextIO, Union

import numpy as np

from .bodyline import BodyChannel, solve
from .channel import EQS_BAND, ChannelResponse

SWEEP_HEADER = ("frequency_hz", "rx_power_dbm", "tx_power_dbm")
CORRECTION_HEADER = ("frequency_hz", "offset_db")

CB_BOUNDS = (1e-12, 1e-9)
_INVPHI = (math.sqrt(5) - 1) / 2


class CalibrationError(ValueError):
    pass


def _read_rows(source, header, what):
    if isinstance(source, str):
        source = io.StringIO(source)
    rows, seen = [], False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if not seen:
            if tuple(cells) != header:
                raise CalibrationError(f"{what} line {lineno}: expected header {','.join(header)}")
            seen = True
            continue
        if len(cells) != len(header):
            raise CalibrationError(f"{what} line {lineno}: expected {len(header)} columns, got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise CalibrationError(f"{what} line {lineno}: non-numeric value in {line!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise CalibrationError(f"{what} line {lineno}: non-finite value")
        rows.append((lineno, vals))
    if not rows:
        raise CalibrationError(f"{what}: no data rows")
    return rows


@dataclass(frozen=True)
class SweepRecord:
    frequency: float
    rx_power_dbm: float
    tx_power_dbm: float


def ingest_sweep(source: Union[TextIO, str]) -> list:
    """Parse a measurement CSV into frequency-sorted :class:`SweepRecord` objects."""
    rows = _read_rows(source, SWEEP_HEADER, "sweep")
    recs = []
    for lineno, (f, rx, tx) in rows:
        if f <= 0:
            raise CalibrationError(f"sweep line {lineno}: frequency must be > 0")
        recs.append(SweepRecord(f, rx, tx))
    recs.sort(key=lambda r: r.frequency)
    fs = [r.frequency for r in recs]
    dup = [a for a, b in zip(fs, fs[1:]) if a == b]
    if dup:
        raise CalibrationError(f"duplicate frequency {dup[0]:g} Hz in sweep")
    return recs


def dump_sweep(records) -> str:
    lines = [",".join(SWEEP_HEADER)]
    for r in records:
        lines.append(f"{float(r.frequency)!r},{float(r.rx_power_dbm)!r},{float(r.tx_power_dbm)!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CorrectionTable:
    """Frequency-dependent dB offset, linear in log-frequency between samples."""

    frequency: np.ndarray
    offset_db: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=float)
        o = np.asarray(self.offset_db, dtype=float)
        if f.ndim != 1 or f.size < 1 or o.shape != f.shape:
            raise CalibrationError("correction table needs matching 1-D frequency and offset arrays")
        if np.any(f <= 0) or np.any(np.diff(f) <= 0):
            raise CalibrationError("correction frequencies must be positive and strictly increasing")
        object.__setattr__(self, "frequency", f)
        object.__setattr__(self, "offset_db", o)

    def covers(self, f) -> bool:
        f = np.asarray(f, dtype=float)
        return bool(np.all((f >= self.frequency[0]) & (f <= self.frequency[-1])))

    def at(self, f):
        f = np.asarray(f, dtype=float)
        if not self.covers(f):
            raise CalibrationError(
                f"correction table [{self.frequency[0]:g}, {self.frequency[-1]:g}] Hz does not cover the sweep"
            )
        if self.frequency.size == 1:
            return np.full(f.shape, self.offset_db[0])
        return np.interp(np.log(f), np.log(self.frequency), self.offset_db)

    def __add__(self, other: "CorrectionTable") -> "CorrectionTable":
        lo = max(self.frequency[0], other.frequency[0])
        hi = min(self.frequency[-1], other.frequency[-1])
        if lo > hi:
            raise CalibrationError("correction tables do not overlap")
        grid = np.union1d(self.frequency, other.frequency)
        grid = grid[(grid >= lo) & (grid <= hi)]
        return CorrectionTable(grid, self.at(grid) + other.at(grid))

    def __neg__(self) -> "CorrectionTable":
        return CorrectionTable(self.frequency, -self.offset_db)


def load_correction(source: Union[TextIO, str]) -> CorrectionTable:
    rows = _read_rows(source, CORRECTION_HEADER, "correction")
    a = np.array([v for _, v in rows])
    return CorrectionTable(a[:, 0], a[:, 1])


@dataclass(frozen=True)
class CorrectionFactors:
    """Tx offset (scalar) plus Rx and buffer offset tables; ``None`` tables mean zero."""

    tx_offset_db: float = 0.0
    rx_offset_db: Optional[CorrectionTable] = None
    buffer_offset_db: Optional[CorrectionTable] = None

    def rx_total(self, f):
        f = np.asarray(f, dtype=float)
        out = np.zeros(f.shape)
        for tab in (self.rx_offset_db, self.buffer_offset_db):
            if tab is not None:
                out = out + tab.at(f)
        return out

    def __add__(self, other: "CorrectionFactors") -> "CorrectionFactors":
        def add(a, b):
            if a is None:
                return b
            if b is None:
                return a
            return a + b

        return CorrectionFactors(
            self.tx_offset_db + other.tx_offset_db,
            add(self.rx_offset_db, other.rx_offset_db),
            add(self.buffer_offset_db, other.buffer_offset_db),
        )

    def __neg__(self) -> "CorrectionFactors":
        return CorrectionFactors(
            -self.tx_offset_db,
            None if self.rx_offset_db is None else -self.rx_offset_db,
            None if self.buffer_offset_db is None else -self.buffer_offset_db,
        )


def apply_rx_corrections(records, corr: CorrectionFactors) -> list:
    """Records with Rx/buffer offsets added to the received power (Tx untouched)."""
    f = np.array([r.frequency for r in records])
    off = corr.rx_total(f)
    return [replace(r, rx_power_dbm=float(r.rx_power_dbm + o)) for r, o in zip(records, off)]


def calibrated_gain(records, corr: Optional[CorrectionFactors] = None) -> ChannelResponse:
    """Channel gain ``rx + rx_off(f) + buf_off(f) - (tx + tx_off)`` in dB."""
    if not records:
        raise CalibrationError("no records to calibrate")
    corr = corr or CorrectionFactors()
    recs = sorted(records, key=lambda r: r.frequency)
    f = np.array([r.frequency for r in recs])
    if np.any(np.diff(f) <= 0):
        raise CalibrationError("duplicate frequencies in records")
    rx = np.array([r.rx_power_dbm for r in recs])
    tx = np.array([r.tx_power_dbm for r in recs])
    gain = rx + corr.rx_total(f) - (tx + corr.tx_offset_db)
    return ChannelResponse.from_gain_db(f, gain, source="measurement")


# ---------------------------------------------------------------------------
# body-ground capacitance fit


@dataclass(frozen=True)
class FitResult:
    c_b: float
    residual_db: float
    identifiable: bool
    converged: bool
    iterations: int
    message: str = ""


def _band_points(resp: ChannelResponse, band):
    m = (resp.frequencies >= band[0]) & (resp.frequencies <= band[1])
    if np.count_nonzero(m) < 2:
        raise CalibrationError("calibrated response needs at least 2 points inside the fit band")
    return resp.frequencies[m], resp.gain_db[m]


def model_gain_db(channel: BodyChannel, c_b: float, f) -> np.ndarray:
    ch = replace(channel, coupling=replace(channel.coupling, c_b=float(c_b)))
    return 20 * np.log10(np.abs(solve(ch, np.asarray(f, dtype=float)).gain))


def golden_section(fun, lo: float, hi: float, tol: float = 1e-5, max_iter: int = 200):
    """Minimize a unimodal scalar function on ``[lo, hi]``.

    Returns ``(x_min, f_min, iterations, converged)``.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    it = 0
    while abs(b - a) > tol and it < max_iter:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
        it += 1
    x, fx = (c, fc) if fc < fd else (d, fd)
    return x, fx, it, bool(abs(b - a) <= tol)


def fit_body_ground_capacitance(calibrated: ChannelResponse, channel: BodyChannel, band=EQS_BAND,
                                bounds=CB_BOUNDS, tol_decades: float = 1e-5) -> FitResult:
    """Fit C_B so the modeled EQS-band gain matches a calibrated measurement.

    Minimizes the RMS dB error over the points inside ``band`` with a
    golden-section search on ``log10(C_B)``. A minimum pinned to a search
    bound, or an objective that barely changes across the range, is
    reported as non-identifiable (with a warning) rather than returned as
    a confident estimate.
    """
    f, meas = _band_points(calibrated, band)
    lo, hi = np.log10(bounds[0]), np.log10(bounds[1])

    def rms(x):
        return float(np.sqrt(np.mean((model_gain_db(channel, 10**x, f) - meas) ** 2)))

    x, fx, it, conv = golden_section(rms, lo, hi, tol_decades)
    probe = [rms(v) for v in np.linspace(lo, hi, 7)]
    at_bound = min(x - lo, hi - x) < 10 * tol_decades
    flat = max(probe) - min(probe) < 1e-3
    identifiable = not (at_bound or flat)
    msg = ""
    if not identifiable:
        msg = "C_B is not identifiable from this response: " + (
            "objective is flat over the search range" if flat else "optimum lies on a search bound"
        )
        warnings.warn(msg, stacklevel=2)
    if not conv:
        msg = (msg + "; " if msg else "") + "golden-section search did not converge"
    return FitResult(float(10**x), fx, identifiable, conv, it, msg)


def eqs_closed_form_cb(channel: BodyChannel, f: float, gain_mag: float) -> float:
    """Invert the lumped EQS circuit for C_B from one gain magnitude.

    The body is a single node: Tx couplers feed it, the Rx branch and the
    total body capacitance (C_B plus the segments' geometric capacitance)
    load it. Line inductance and losses are neglected.
    """
    w = 2 * np.pi * f
    tx, rx, term = channel.dev_tx, channel.dev_rx, channel.termination
    c_t = 1 / (1 / tx.return_capacitance + 1 / tx.coupling_capacitance)
    z_load = 1 / (term.admittance(f) + 1j * w * rx.plate_capacitance)
    z_rx = 1 / (1j * w * rx.coupling_capacitance) + z_load + 1 / (1j * w * rx.return_capacitance)
    # gain = V_B/V_s * z_load/z_rx with V_s/V_B = 1 + C_tot/c_t + z_tx/z_rx
    m = abs(z_load / z_rx) / gain_mag
    wterm = (1 / (1j * w * c_t)) / z_rx
    disc = m**2 - wterm.imag**2
    if disc < 0:
        raise CalibrationError("gain magnitude not reachable by the lumped EQS circuit")
    x = -wterm.real + np.sqrt(disc)
    c_tot = (x - 1) * c_t
    c_geo = channel.total_ground_capacitance() - channel.coupling.c_b
    return float(c_tot - c_geo)
