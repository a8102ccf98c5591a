"""Exact propagator for a uniform magnetic field along z, and its free limit.

The magnetic kernel factorizes into a transverse (x, y) part and an axial
(z) part; :func:`magnetic_kernel` is their product. The transverse part is
analytic in T away from caustics, so the only branch choice is the axial
``(1/i)^(1/2) = exp(-i pi/4)``, which gives ``(1/i)^(3/2) = exp(-3i pi/4)``
for the full prefactor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CausticSingular, NonPositiveInterval
from .params import PhysicalParams

SIN_FLOOR = 1e-9


@dataclass(frozen=True)
class KernelPoint:
    """Endpoints of a propagation interval. Coordinates may be arrays."""

    r: tuple
    t: float
    r_prime: tuple
    t_prime: float = 0.0

    @property
    def interval(self) -> float:
        return self.t - self.t_prime


def _check_interval(T: float) -> None:
    if not T > 0:
        raise NonPositiveInterval(f"kernel needs t - t' > 0, got {T}")


def _check_caustic(T: float, omega: float, floor: float) -> None:
    if omega != 0 and abs(np.sin(0.5 * omega * T)) < floor:
        raise CausticSingular(f"|sin(omega T/2)| below {floor} at T={T}")


def _half_angle_terms(T: float, omega: float) -> tuple[float, float]:
    """Return (sinc weight, omega*cot(omega T/2)*T/2) in forms finite at omega = 0.

    sinc weight is sin(omega T/2)/(omega T/2).
    """
    w = np.sinc(0.5 * omega * T / np.pi)
    return w, np.cos(0.5 * omega * T) / w


def axial_kernel(z, z_prime, T: float, params: PhysicalParams):
    """Free 1D kernel along z: (m/2 pi i hbar T)^(1/2) exp(i m dz^2 / 2 hbar T)."""
    _check_interval(T)
    m, hbar = params.mass, params.hbar
    pref = np.exp(-0.25j * np.pi) * np.sqrt(m / (2 * np.pi * hbar * T))
    dz = np.asarray(z) - np.asarray(z_prime)
    return pref * np.exp(0.5j * m * dz ** 2 / (hbar * T))


def transverse_kernel(x, y, x_prime, y_prime, T: float, params: PhysicalParams,
                      floor: float = SIN_FLOOR):
    """Magnetic 2D kernel in the xy plane (symmetric gauge, field along +z)."""
    _check_interval(T)
    omega = params.omega
    _check_caustic(T, omega, floor)
    m, hbar = params.mass, params.hbar
    w, cot_term = _half_angle_terms(T, omega)
    # (m / 2 pi i hbar T) * (omega T/2) / sin(omega T/2)
    pref = -1j * m / (2 * np.pi * hbar * T * w)
    x, y = np.asarray(x), np.asarray(y)
    dx, dy = x - np.asarray(x_prime), y - np.asarray(y_prime)
    quad = (m / T) * cot_term * (dx ** 2 + dy ** 2)
    cross = m * omega * (x * np.asarray(y_prime) - y * np.asarray(x_prime))
    return pref * np.exp(0.5j / hbar * (quad + cross))


def magnetic_kernel(kp: KernelPoint, params: PhysicalParams, floor: float = SIN_FLOOR):
    """Propagator K(r, t; r', t') for the uniform field."""
    T = kp.interval
    x, y, z = kp.r
    xp, yp, zp = kp.r_prime
    return transverse_kernel(x, y, xp, yp, T, params, floor) * axial_kernel(z, zp, T, params)


def free_kernel(kp: KernelPoint, params: PhysicalParams):
    T = kp.interval
    _check_interval(T)
    m, hbar = params.mass, params.hbar
    d2 = sum((np.asarray(a) - np.asarray(b)) ** 2 for a, b in zip(kp.r, kp.r_prime))
    pref = np.exp(-0.75j * np.pi) * (m / (2 * np.pi * hbar * T)) ** 1.5
    return pref * np.exp(0.5j * m * d2 / (hbar * T))


def _signed_magnetic_kernel(kp: KernelPoint, params: PhysicalParams):
    """Kernel formula continued to T < 0 (backward propagation).

    The prefactor uses (m / 2 pi i hbar T)^(3/2) with T negative taken as
    exp(+3i pi/4) |...|^(3/2), the mirror of the forward branch.
    """
    T = kp.interval
    if T == 0:
        raise NonPositiveInterval("zero interval")
    omega, m, hbar = params.omega, params.mass, params.hbar
    x, y, z = (np.asarray(c) for c in kp.r)
    xp, yp, zp = (np.asarray(c) for c in kp.r_prime)
    w, cot_term = _half_angle_terms(T, omega)
    phase = np.exp(-0.75j * np.pi * np.sign(T))
    pref = phase * (m / (2 * np.pi * hbar * abs(T))) ** 1.5 / w
    quad = m * (z - zp) ** 2 / T + (m / T) * cot_term * ((x - xp) ** 2 + (y - yp) ** 2)
    cross = m * omega * (x * yp - y * xp)
    return pref * np.exp(0.5j / hbar * (quad + cross))
