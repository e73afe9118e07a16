"""Off-body leakage: how much of the on-body signal reaches a receiver in the air."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bodyline import BodyChannel, DeviceGeometry, TerminationNetwork, solve
from .dipole import DipoleSource, FieldPoint, Medium, fields_at, radiation_zone_radius

DEFAULT_ONBODY_LENGTH = 1.5


class LeakageError(ValueError):
    pass


@dataclass
class LeakageProfile:
    frequency: float
    distances: np.ndarray
    v_off: np.ndarray
    v_on: float
    moment: complex
    r_d: float
    meta: dict = field(default_factory=dict)

    @property
    def ratio(self) -> np.ndarray:
        return self.v_off / self.v_on

    def to_csv(self) -> str:
        lines = ["distance_m,v_off_volts,ratio"]
        for d, v, r in zip(self.distances, self.v_off, self.ratio):
            lines.append(f"{float(d)!r},{float(v)!r},{float(r)!r}")
        return "\n".join(lines) + "\n"


def body_moment(channel: BodyChannel, f: float, v_in: float = 1.0) -> complex:
    """Effective radiating moment ``sum(I * dl)`` of the body's axial current (A*m)."""
    p = solve(channel, f, v_in=v_in, profile=True).profile
    return complex(np.sum(p["current"] * p["dl"]))


def receiver_pickup(dev: DeviceGeometry, term: TerminationNetwork) -> float:
    """Volts at the load per volt of open-circuit plate voltage (capacitive divider)."""
    c_p = dev.plate_capacitance
    c_l = term.c_load or 0.0
    return c_p / (c_p + c_l)


def offbody_profile(channel: BodyChannel, f: float, distances, v_in: float = 1.0,
                    rx_device: Optional[DeviceGeometry] = None,
                    onbody_length: float = DEFAULT_ONBODY_LENGTH) -> LeakageProfile:
    """Off-body received voltage versus line-of-sight distance.

    The body radiates as a short dipole whose moment is the integral of the
    modeled axial current. An off-body receiver of the same build as the
    on-body one sees the broadside ``E_theta`` over its plate separation,
    reduced by its plate/load capacitive divider. ``v_on`` is the on-body
    received voltage for the channel, whose Tx-Rx path should span
    ``onbody_length``.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 1 or d.size == 0 or np.any(d <= 0):
        raise LeakageError("distances must be a non-empty list of positive values")
    if np.any(np.diff(d) <= 0):
        raise LeakageError("distances must be strictly increasing")
    if abs(channel.path_length - onbody_length) > 1e-9 * max(1.0, onbody_length):
        raise LeakageError(
            f"on-body path length {channel.path_length:g} m differs from the fixed "
            f"on-body channel length {onbody_length:g} m"
        )
    rx = rx_device or channel.dev_rx
    sol = solve(channel, f, v_in=v_in, profile=True)
    moment = complex(np.sum(sol.profile["current"] * sol.profile["dl"]))
    v_on = abs(sol.v_rx)
    if v_on == 0:
        raise LeakageError("on-body received voltage is zero; ratio undefined")
    e = fields_at(DipoleSource(1.0, 1.0, f), Medium(1.0), FieldPoint(d, np.pi / 2)).E_theta * moment
    v_off = np.abs(e) * rx.plate_separation * receiver_pickup(rx, channel.termination)
    return LeakageProfile(
        frequency=float(f),
        distances=d,
        v_off=v_off,
        v_on=float(v_on),
        moment=moment,
        r_d=float(radiation_zone_radius(Medium(1.0), f)),
        meta={"rx_length_m": rx.plate_separation, "pickup": receiver_pickup(rx, channel.termination)},
    )
