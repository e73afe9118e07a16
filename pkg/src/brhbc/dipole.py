"""Hertzian (infinitesimal) electric dipole fields.

The dipole is z-directed at the origin; observation points are given in
spherical coordinates. Only ``E_r``, ``E_theta`` and ``H_phi`` are non-zero.
Phasors are peak values with an ``exp(+j*omega*t)`` time convention.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C0, ETA0

NEAR_THRESHOLD = 0.1
FAR_THRESHOLD = 10.0


@dataclass(frozen=True)
class Medium:
    """Homogeneous lossless medium described by its relative permittivity."""

    eps_r: float = 1.0

    def __post_init__(self):
        if self.eps_r < 1:
            raise ValueError("eps_r must be >= 1")

    @property
    def eta(self) -> float:
        return ETA0 / np.sqrt(self.eps_r)

    def wavelength(self, f):
        return C0 / (np.asarray(f, dtype=float) * np.sqrt(self.eps_r))

    def beta(self, f):
        return 2 * np.pi / self.wavelength(f)


FREE_SPACE = Medium(1.0)


@dataclass(frozen=True)
class DipoleSource:
    current: float
    length: float
    frequency: float

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("dipole length must be > 0")
        if self.frequency <= 0:
            raise ValueError("frequency must be > 0")

    @property
    def moment(self):
        return self.current * self.length

    def check_short(self, medium: Medium = FREE_SPACE) -> bool:
        """Warn (and return False) when the dipole is not electrically short."""
        lam = float(medium.wavelength(self.frequency))
        if self.length > lam / 10:
            warnings.warn(
                f"dipole length {self.length:g} m exceeds lambda/10 = {lam / 10:g} m; "
                "Hertzian approximation is poor",
                stacklevel=2,
            )
            return False
        return True


@dataclass(frozen=True)
class FieldPoint:
    r: float
    theta: float = np.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.r) <= 0):
            raise ValueError("r must be > 0 (the dipole location is singular)")
        th = np.asarray(self.theta)
        if np.any(th < 0) or np.any(th > np.pi):
            raise ValueError("theta must lie in [0, pi]")


@dataclass(frozen=True)
class EMField:
    E_r: complex
    E_theta: complex
    E_phi: complex
    H_r: complex
    H_theta: complex
    H_phi: complex

    def __mul__(self, k):
        return EMField(*(getattr(self, n) * k for n in _COMPONENTS))

    __rmul__ = __mul__


_COMPONENTS = ("E_r", "E_theta", "E_phi", "H_r", "H_theta", "H_phi")


def fields_at(src: DipoleSource, medium: Medium, p: FieldPoint) -> EMField:
    """Complete (near + intermediate + far) dipole field at ``p``.

    ``p.r`` and ``p.theta`` may be arrays (broadcast together).
    """
    r = np.asarray(p.r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be > 0")
    theta = np.asarray(p.theta, dtype=float)
    beta = float(medium.beta(src.frequency))
    eta = medium.eta
    il = src.current * src.length
    phase = np.exp(-1j * beta * r)
    br = beta * r

    # cos(pi/2) is not exactly zero in floating point; snap the nodes
    cos_t = np.where(np.isclose(theta, np.pi / 2, rtol=0, atol=1e-15), 0.0, np.cos(theta))
    sin_t = np.where((theta == 0) | (theta == np.pi), 0.0, np.sin(theta))

    e_r = eta * il * cos_t / (2 * np.pi) * (1 / r**2 + 1 / (1j * beta * r**3)) * phase
    e_th = 1j * eta * beta * il * sin_t / (4 * np.pi) * (1 / r + 1 / (1j * br * r) - 1 / (br**2 * r)) * phase
    h_ph = 1j * beta * il * sin_t / (4 * np.pi) * (1 / r + 1 / (1j * br * r)) * phase
    zero = np.zeros(np.broadcast(r, theta).shape, dtype=complex)
    if zero.ndim == 0:
        return EMField(complex(e_r), complex(e_th), 0j, 0j, 0j, complex(h_ph))
    return EMField(e_r + zero, e_th + zero, zero, zero.copy(), zero.copy(), h_ph + zero)


def radiation_zone_radius(medium: Medium, f) -> float:
    """Radius ``lambda / (2*pi) = 1/beta`` separating reactive and radiating zones."""
    return 1 / medium.beta(f)


def region_classify(medium: Medium, r, f, near: float = NEAR_THRESHOLD, far: float = FAR_THRESHOLD) -> str:
    """Label the propagation region at distance ``r``: near, intermediate or far."""
    if r <= 0 or f <= 0:
        raise ValueError("r and f must be > 0")
    br = float(medium.beta(f)) * r
    if br < near:
        return "near"
    if br > far:
        return "far"
    return "intermediate"


def radial_poynting(field: EMField):
    """Time-averaged radial power density ``0.5 * Re(E_theta * conj(H_phi))`` in W/m^2."""
    return 0.5 * np.real(field.E_theta * np.conj(field.H_phi))


def radiated_power(src: DipoleSource, medium: Medium = FREE_SPACE) -> float:
    """Total time-averaged radiated power of the dipole (W)."""
    beta = float(medium.beta(src.frequency))
    return medium.eta * (beta * abs(src.moment)) ** 2 / (12 * np.pi)
