"""Physical and beam parameters.

All internal math is unit agnostic. The default "natural" mode uses
m = e = hbar = 1, and :class:`UnitSystem` converts SI inputs into that
mode and back.

Sign convention: the particle is an electron of charge ``-e`` with
``e > 0`` the elementary charge, and the field points along ``+z``. The
cyclotron frequency ``omega = e B / m`` is signed through ``B``; for
``omega > 0`` the orbit is counterclockwise seen from ``+z``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import ConfigError, ZeroFrequency


class Axis(str, enum.Enum):
    PERPENDICULAR = "perpendicular"
    PARALLEL = "parallel"

    @classmethod
    def parse(cls, value) -> "Axis":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"perp": cls.PERPENDICULAR, "perpendicular": cls.PERPENDICULAR,
                   "par": cls.PARALLEL, "parallel": cls.PARALLEL}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown propagation axis {value!r}") from None


@dataclass(frozen=True)
class PhysicalParams:
    mass: float = 1.0
    charge: float = 1.0
    hbar: float = 1.0
    field: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if not self.hbar > 0:
            raise ConfigError(f"hbar must be positive, got {self.hbar}")
        for name in ("mass", "charge", "hbar", "field"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def omega(self) -> float:
        return cyclotron_frequency(self)


def cyclotron_frequency(params: PhysicalParams) -> float:
    """Signed cyclotron frequency e*B/m."""
    return params.charge * params.field / params.mass


def orbit_momentum(params: PhysicalParams, radius: float) -> float:
    if radius < 0:
        raise ConfigError(f"orbit radius must be non-negative, got {radius}")
    return params.mass * cyclotron_frequency(params) * radius


def period(params: PhysicalParams) -> float:
    omega = cyclotron_frequency(params)
    if omega == 0:
        raise ZeroFrequency("period undefined for zero field; use free propagation")
    return 2 * math.pi / abs(omega)


@dataclass(frozen=True)
class BeamParams:
    """Gaussian packet geometry.

    ``sigma`` is the transverse width, ``length`` the width along the
    propagation axis, ``radius`` the classical orbit radius and
    ``momentum`` the mean momentum along the propagation axis. Use
    :func:`make_beam` to fill one of radius/momentum from the other.
    """

    sigma: float = 1.0
    length: float = 2.0
    radius: float = 8.0
    momentum: float = 8.0
    axis: Axis = Axis.PERPENDICULAR
    oam: int = 1

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis.parse(self.axis))
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not self.length > 0:
            raise ConfigError(f"length must be positive, got {self.length}")
        if self.radius < 0:
            raise ConfigError(f"radius must be non-negative, got {self.radius}")
        if self.oam not in (0, 1):
            raise ConfigError(f"oam must be 0 or 1, got {self.oam}")

    def check_consistent(self, params: PhysicalParams, rtol: float = 1e-12) -> None:
        if self.axis is Axis.PERPENDICULAR:
            expected = orbit_momentum(params, self.radius)
            if not math.isclose(self.momentum, expected, rel_tol=rtol, abs_tol=rtol):
                raise ConfigError(
                    f"perpendicular beam needs p = m*omega*R = {expected}, got {self.momentum}")


def make_beam(params: PhysicalParams, sigma: float = 1.0, length: float = 2.0,
              radius: float | None = None, momentum: float | None = None,
              axis="perpendicular", oam: int = 1) -> BeamParams:
    axis = Axis.parse(axis)
    omega = cyclotron_frequency(params)
    if axis is Axis.PERPENDICULAR:
        if radius is not None:
            momentum = orbit_momentum(params, radius)
        elif momentum is not None:
            if omega == 0:
                raise ConfigError("orbit radius undefined for zero field; give radius=0")
            radius = abs(momentum / (params.mass * omega))
            momentum = orbit_momentum(params, radius) * (1 if momentum >= 0 else -1)
        else:
            radius, momentum = 0.0, 0.0
    else:
        momentum = 0.0 if momentum is None else momentum
        radius = 0.0 if radius is None else radius
    return BeamParams(sigma=sigma, length=length, radius=radius, momentum=momentum,
                      axis=axis, oam=oam)


@dataclass(frozen=True)
class TimeSpec:
    t_max: float
    frame_count: int = 16
    t_min_guard: float | None = None

    def __post_init__(self):
        if not self.t_max > 0:
            raise ConfigError("t_max must be positive")
        if self.frame_count < 1:
            raise ConfigError("frame_count must be >= 1")
        if self.t_min_guard is not None and not self.t_min_guard > 0:
            raise ConfigError("t_min_guard must be positive")

    def frame_times(self) -> list[float]:
        """Frame times ``t_max * k / frame_count`` for k = 0 .. frame_count-1."""
        return [self.t_max * k / self.frame_count for k in range(self.frame_count)]


def default_time_guard(params: PhysicalParams, beam: BeamParams | None = None) -> float:
    """1e-6 of the period, or of the diffraction time m*sigma^2/hbar at zero field."""
    if cyclotron_frequency(params) != 0:
        return 1e-6 * period(params)
    sigma = beam.sigma if beam is not None else 1.0
    return 1e-6 * params.mass * sigma ** 2 / params.hbar


def time_guard(params: PhysicalParams, beam: BeamParams | None = None,
               time: TimeSpec | None = None) -> float:
    if time is not None and time.t_min_guard is not None:
        return time.t_min_guard
    return default_time_guard(params, beam)


@dataclass(frozen=True)
class UnitSystem:
    """Scales of mass, charge, action and length used to reach natural mode.

    Derived scales: time = mass*length^2/action, momentum = action/length,
    field = mass/(charge*time).
    """

    mass: float
    charge: float
    action: float
    length: float

    @property
    def time(self) -> float:
        return self.mass * self.length ** 2 / self.action

    @property
    def momentum(self) -> float:
        return self.action / self.length

    @property
    def field(self) -> float:
        return self.mass / (self.charge * self.time)

    @classmethod
    def natural_for(cls, params: PhysicalParams, length: float | None = None) -> "UnitSystem":
        """Units with m = |e| = hbar = 1 and, unless given, |omega| = 1."""
        if length is None:
            omega = abs(cyclotron_frequency(params))
            if omega == 0:
                raise ZeroFrequency("zero field: pass an explicit length unit")
            length = math.sqrt(params.hbar / (params.mass * omega))
        return cls(mass=params.mass, charge=abs(params.charge), action=params.hbar, length=length)

    def to_natural(self, params: PhysicalParams, beam: BeamParams | None = None):
        nat = PhysicalParams(mass=params.mass / self.mass, charge=params.charge / self.charge,
                             hbar=params.hbar / self.action, field=params.field / self.field)
        if beam is None:
            return nat
        return nat, replace(beam, sigma=beam.sigma / self.length, length=beam.length / self.length,
                            radius=beam.radius / self.length,
                            momentum=beam.momentum / self.momentum)

    def from_natural(self, params: PhysicalParams, beam: BeamParams | None = None):
        si = PhysicalParams(mass=params.mass * self.mass, charge=params.charge * self.charge,
                            hbar=params.hbar * self.action, field=params.field * self.field)
        if beam is None:
            return si
        return si, replace(beam, sigma=beam.sigma * self.length, length=beam.length * self.length,
                           radius=beam.radius * self.length,
                           momentum=beam.momentum * self.momentum)


def desk_scenario(oam: int = 1, axis="perpendicular") -> tuple[PhysicalParams, BeamParams]:
    """Default desk-scale parameters: sigma=1, L=2, R=8, omega=1 in natural units."""
    params = PhysicalParams()
    axis = Axis.parse(axis)
    if axis is Axis.PERPENDICULAR:
        beam = make_beam(params, sigma=1.0, length=2.0, radius=8.0, axis=axis, oam=oam)
    else:
        beam = make_beam(params, sigma=1.0, length=2.0, momentum=2.0, axis=axis, oam=oam)
    return params, beam
