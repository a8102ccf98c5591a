"""Closed-form Gaussian and vortex wave packets in a uniform magnetic field.

Positions are passed as ``r = (x, y, z)`` with broadcastable array entries.

The literal coefficient formulas contain ``cot(omega t/2)`` and ``1/t``
which blow up at t = 0 and at every caustic t = n*tau. The evaluation path
used by :func:`psi0_perp` and friends is rewritten in terms of

    S   = 2 hbar sin(omega t/2) / (m omega)     (hbar t / m at omega = 0)
    D_w = S / w^2 - i cos(omega t/2)

which never vanish together, so every quantity stays finite. The square
root branch is chosen to be continuous in t (see :func:`_transverse_root`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TimeTooSmall
from .params import Axis, BeamParams, PhysicalParams, time_guard


def _norm_const(beam: BeamParams) -> float:
    return 1.0 / math.sqrt(math.pi * beam.sigma ** 2 * math.sqrt(math.pi * beam.length ** 2))


def _require_axis(beam: BeamParams, axis: Axis) -> None:
    if beam.axis is not axis:
        raise ConfigError(f"function needs a {axis.value} beam, got {beam.axis.value}")


def _check_time(t: float, guard: float, strict: bool) -> bool:
    """True when t is inside the initial-condition guard band."""
    if t < 0:
        raise TimeTooSmall(f"negative time {t}")
    if t < guard:
        if strict:
            raise TimeTooSmall(f"t={t} below guard {guard}")
        return True
    return False


# -- initial conditions -----------------------------------------------------

def initial_psi0_perp(r, beam: BeamParams, params: PhysicalParams):
    """Gaussian moving along +y, width sigma in x and z, length L in y."""
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    k = beam.momentum / params.hbar
    expo = -(x ** 2 + z ** 2) / (2 * beam.sigma ** 2) - y ** 2 / (2 * beam.length ** 2) + 1j * k * y
    return _norm_const(beam) * np.exp(expo)


def initial_psi1(r, beam: BeamParams, params: PhysicalParams):
    """One unit of OAM about +y: (-x + i z)/sigma^2 times the zero-OAM packet."""
    x, _, z = (np.asarray(c, dtype=float) for c in r)
    return (-x + 1j * z) / beam.sigma ** 2 * initial_psi0_perp(r, beam, params)


def initial_psi0_parallel(r, beam: BeamParams, params: PhysicalParams):
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    k = beam.momentum / params.hbar
    expo = -(x ** 2 + y ** 2) / (2 * beam.sigma ** 2) - z ** 2 / (2 * beam.length ** 2) + 1j * k * z
    return _norm_const(beam) * np.exp(expo)


def initial_psi1_parallel(r, beam: BeamParams, params: PhysicalParams):
    """(d_x + i d_y) applied to the parallel packet: one unit of L_z."""
    x, y, _ = (np.asarray(c, dtype=float) for c in r)
    return -(x + 1j * y) / beam.sigma ** 2 * initial_psi0_parallel(r, beam, params)


def initial_state(beam: BeamParams, params: PhysicalParams):
    """Initial-condition callable matching the beam's axis and OAM order."""
    table = {
        (Axis.PERPENDICULAR, 0): initial_psi0_perp,
        (Axis.PERPENDICULAR, 1): initial_psi1,
        (Axis.PARALLEL, 0): initial_psi0_parallel,
        (Axis.PARALLEL, 1): initial_psi1_parallel,
    }
    fn = table[(beam.axis, beam.oam)]
    return lambda r: fn(r, beam, params)


@dataclass(frozen=True)
class VortexCoordinates:
    """Transverse radius and vortex azimuth about the y axis.

    ``theta`` is measured from the -x axis, increasing counterclockwise when
    looking along -y, so that ``rho * exp(i theta) = -x + i z``.
    """

    rho: np.ndarray
    theta: np.ndarray


def vortex_coordinates(x, z) -> VortexCoordinates:
    w = -np.asarray(x, dtype=float) + 1j * np.asarray(z, dtype=float)
    return VortexCoordinates(rho=np.abs(w), theta=np.angle(w))


# -- time-dependent pieces --------------------------------------------------

@dataclass(frozen=True)
class _HalfAngle:
    s: float          # sin(omega t/2)
    c: float          # cos(omega t/2)
    S: float          # 2 hbar s/(m omega), finite at omega = 0
    a_s: float        # (m omega / 2 hbar) * s


def _half_angle(t: float, params: PhysicalParams) -> _HalfAngle:
    omega, m, hbar = params.omega, params.mass, params.hbar
    half = 0.5 * omega * t
    s, c = math.sin(half), math.cos(half)
    S = hbar * t / m * float(np.sinc(half / math.pi))
    return _HalfAngle(s=s, c=c, S=S, a_s=0.5 * m * omega / hbar * s)


def _transverse_root(d_u: complex, d_v: complex) -> complex:
    """Continuous square root of d_u*d_v.

    Both factors flip sign every period while their ratio is periodic and
    never crosses the negative real axis, so d_u*sqrt(d_v/d_u) is continuous
    in t and equals -i at t = 0.
    """
    return d_u * np.sqrt(d_v / d_u)


def _transverse_factor(u, v, t, w_u, w_v, k, params):
    """Evolved transverse Gaussian in rotated coordinates (u, v).

    Initial state exp(-u^2/2w_u^2 - v^2/2w_v^2 + i k v) (unnormalized).
    """
    h = _half_angle(t, params)
    d_u = h.S / w_u ** 2 - 1j * h.c
    d_v = h.S / w_v ** 2 - 1j * h.c
    pref = -1j / _transverse_root(d_u, d_v)
    expo = (0.5 * u ** 2 * (1j * h.c / w_u ** 2 - h.a_s) / d_u
            + 0.5 * v ** 2 * (1j * h.c / w_v ** 2 - h.a_s) / d_v
            + k * v / d_v - 0.5 * k ** 2 * h.S / d_v)
    return pref * np.exp(expo)


def _free_factor(z, t, w, k, params):
    """Free 1D Gaussian exp(-z^2/2w^2 + i k z) evolved for time t (unnormalized)."""
    g = 1 + 1j * params.hbar * t / (params.mass * w ** 2)
    v = params.hbar * k / params.mass
    return np.exp((-z ** 2 / (2 * w ** 2) + 1j * k * z - 0.5j * k * v * t) / g) / np.sqrt(g)


def _rotated(x, y, t, params):
    h = _half_angle(t, params)
    return h.c * x + h.s * y, h.c * y - h.s * x


def _perp_transverse(x, y, t, beam, params):
    u, v = _rotated(x, y, t, params)
    return _transverse_factor(u, v, t, beam.sigma, beam.length, beam.momentum / params.hbar, params)


def _perp_axial(z, t, beam, params):
    return _free_factor(z, t, beam.sigma, 0.0, params)


def _f_transverse(x, y, t, beam, params):
    """Transverse part of the OAM prefactor f: -beta_x alpha_x."""
    h = _half_angle(t, params)
    u, _ = _rotated(x, y, t, params)
    return 1j * u / (h.S / beam.sigma ** 2 - 1j * h.c)


def _f_axial(z, t, beam, params):
    """Axial part of f: i beta_z alpha_z with the inverse beta_z."""
    tau_d = params.hbar * t / (params.mass * beam.sigma ** 2)
    return z / (tau_d - 1j)


# -- literal coefficients ---------------------------------------------------

@dataclass(frozen=True)
class EvolutionCoefficients:
    """Coefficient block of the Gaussian integral, with stable combinations.

    The raw fields (``N``, ``alpha_*``, ``beta_*``) follow the literal
    formulas and overflow near t = n*tau. ``prefactor``, ``beta_alpha`` and
    ``exponent`` are the singularity-free products that evaluation uses.
    """

    t: float
    sin_half: float
    cos_half: float
    N: complex
    alpha_x: np.ndarray
    alpha_y: np.ndarray
    alpha_z: np.ndarray
    beta_x: complex
    beta_y: complex
    beta_z: complex
    prefactor: complex
    beta_alpha: tuple
    exponent: np.ndarray

    @property
    def beta_rho(self) -> complex:
        return self.beta_x


def _literal_blocks(x, y, z, t, w_xy, w_y, w_z, k_y, k_z, params, beta_z_inverse):
    m, hbar, omega = params.mass, params.hbar, params.omega
    half = 0.5 * omega * t
    with np.errstate(divide="ignore", invalid="ignore"):
        cot = math.cos(half) / math.sin(half) if omega != 0 else math.inf
        a_cot = 0.5 * m * omega / hbar * cot if omega != 0 else m / (hbar * t)
        N = (np.exp(-0.75j * np.pi) * (m / (2 * np.pi * hbar * t)) ** 1.5
             / float(np.sinc(half / np.pi)))
        a = 0.5 * m * omega / hbar
        alpha_x = -1j * a_cot * x - 1j * a * y
        alpha_y = -1j * a_cot * y + 1j * a * x + 1j * k_y
        alpha_z = -1j * m * z / (hbar * t) + 1j * k_z
        beta_x = 1.0 / (1 / w_xy ** 2 - 1j * a_cot)
        beta_y = 1.0 / (1 / w_y ** 2 - 1j * a_cot)
        inv_z = 1 / w_z ** 2 - 1j * m / (hbar * t)
        beta_z = 1.0 / inv_z if beta_z_inverse else inv_z
    return N, alpha_x, alpha_y, alpha_z, beta_x, beta_y, beta_z, a_cot


def _literal_pieces(x, y, z, t, N, ax, ay, az, bx, by, bz, a_cot, params):
    """Principal-branch prefactor and exponent straight from the Gaussian integral."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pref = N * np.sqrt(2 * np.pi * bx) * np.sqrt(2 * np.pi * by) * np.sqrt(2 * np.pi * bz)
        expo = (0.5j * params.mass / (params.hbar * t) * z ** 2 + 0.5j * a_cot * (x ** 2 + y ** 2)
                + 0.5 * (bx * ax ** 2 + by * ay ** 2 + bz * az ** 2))
    return pref, expo


def psi0_perp_literal(r, t: float, beam: BeamParams, params: PhysicalParams,
                      beta_z_inverse: bool = True):
    """psi0 from the raw coefficients with principal square roots.

    Matches :func:`psi0_perp` only while no square-root branch has been
    crossed (t below roughly tau/2 for typical widths); later times need
    :func:`prefactor_by_unwinding`. Useful as an independent route.
    """
    _require_axis(beam, Axis.PERPENDICULAR)
    if not t > 0:
        raise TimeTooSmall(f"literal path needs t > 0, got {t}")
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    k = beam.momentum / params.hbar
    N, ax, ay, az, bx, by, bz, a_cot = _literal_blocks(
        x, y, z, t, beam.sigma, beam.length, beam.sigma, k, 0.0, params, beta_z_inverse)
    pref, expo = _literal_pieces(x, y, z, t, N, ax, ay, az, bx, by, bz, a_cot, params)
    return _norm_const(beam) * pref * np.exp(expo)


def coeffs_perp(r, t: float, beam: BeamParams, params: PhysicalParams,
                guard: float | None = None, beta_z_inverse: bool = True) -> EvolutionCoefficients:
    """Coefficients for the perpendicular packet.

    ``beta_z_inverse=False`` reproduces the printed (non-inverted) beta_z,
    which is kept only for mutation checks.
    """
    _require_axis(beam, Axis.PERPENDICULAR)
    guard = time_guard(params, beam) if guard is None else guard
    _check_time(t, guard, strict=True)
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    k = beam.momentum / params.hbar
    N, ax, ay, az, bx, by, bz, a_cot = _literal_blocks(
        x, y, z, t, beam.sigma, beam.length, beam.sigma, k, 0.0, params, beta_z_inverse)
    h = _half_angle(t, params)
    u, v = _rotated(x, y, t, params)
    d_x = h.S / beam.sigma ** 2 - 1j * h.c
    d_y = h.S / beam.length ** 2 - 1j * h.c
    tau_d = params.hbar * t / (params.mass * beam.sigma ** 2)
    if beta_z_inverse:
        prefactor = _norm_const(beam) * (-1j / _transverse_root(d_x, d_y)) / np.sqrt(1 + 1j * tau_d)
        ba_z = -1j * z / (tau_d - 1j)
        expo = (0.5 * u ** 2 * (1j * h.c / beam.sigma ** 2 - h.a_s) / d_x
                + 0.5 * v ** 2 * (1j * h.c / beam.length ** 2 - h.a_s) / d_y
                + k * v / d_y - 0.5 * k ** 2 * h.S / d_y
                - z ** 2 / (2 * beam.sigma ** 2 * (1 + 1j * tau_d)))
    else:
        prefactor, expo = _literal_pieces(x, y, z, t, N, ax, ay, az, bx, by, bz, a_cot, params)
        prefactor = prefactor * _norm_const(beam)
        ba_z = bz * az
    ba_x = -1j * u / d_x
    ba_y = (-1j * v + 1j * k * h.S) / d_y
    return EvolutionCoefficients(t=t, sin_half=h.s, cos_half=h.c, N=N, alpha_x=ax, alpha_y=ay,
                                 alpha_z=az, beta_x=bx, beta_y=by, beta_z=bz, prefactor=prefactor,
                                 beta_alpha=(ba_x, ba_y, ba_z), exponent=expo)


def coeffs_parallel(r, t: float, beam: BeamParams, params: PhysicalParams,
                    guard: float | None = None) -> EvolutionCoefficients:
    _require_axis(beam, Axis.PARALLEL)
    guard = time_guard(params, beam) if guard is None else guard
    _check_time(t, guard, strict=True)
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    k = beam.momentum / params.hbar
    N, ax, ay, az, bx, by, bz, _ = _literal_blocks(
        x, y, z, t, beam.sigma, beam.sigma, beam.length, 0.0, k, params, True)
    h = _half_angle(t, params)
    d = h.S / beam.sigma ** 2 - 1j * h.c
    g = 1 + 1j * params.hbar * t / (params.mass * beam.length ** 2)
    u, v = _rotated(x, y, t, params)
    vel = params.hbar * k / params.mass
    expo = (0.5 * (x ** 2 + y ** 2) * (1j * h.c / beam.sigma ** 2 - h.a_s) / d
            + (-z ** 2 / (2 * beam.length ** 2) + 1j * k * z - 0.5j * k * vel * t) / g)
    tau_l = params.hbar * t / (params.mass * beam.length ** 2)
    return EvolutionCoefficients(
        t=t, sin_half=h.s, cos_half=h.c, N=N, alpha_x=ax, alpha_y=ay, alpha_z=az,
        beta_x=bx, beta_y=by, beta_z=bz,
        prefactor=_norm_const(beam) * (-1j / d) / np.sqrt(g),
        beta_alpha=(-1j * u / d, -1j * v / d, (-1j * (z - vel * t)) / (tau_l - 1j)),
        exponent=expo)


# -- evolved wave functions -------------------------------------------------

def psi0_perp(r, t: float, beam: BeamParams, params: PhysicalParams,
              guard: float | None = None, beta_z_inverse: bool = True):
    """Zero-OAM packet launched along +y, evolved to time t."""
    _require_axis(beam, Axis.PERPENDICULAR)
    guard = time_guard(params, beam) if guard is None else guard
    if _check_time(t, guard, strict=False):
        return initial_psi0_perp(r, beam, params)
    if not beta_z_inverse:
        co = coeffs_perp(r, t, beam, params, guard=guard, beta_z_inverse=False)
        return co.prefactor * np.exp(co.exponent)
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    return (_norm_const(beam) * _perp_transverse(x, y, t, beam, params)
            * _perp_axial(z, t, beam, params))


def prefactor_f(r, t: float, beam: BeamParams, params: PhysicalParams,
                guard: float | None = None, beta_z_inverse: bool = True):
    """OAM prefactor f = -beta_x alpha_x + i beta_z alpha_z.

    Its zero set is the nodal line; f(r, 0) = -x + i z.
    """
    _require_axis(beam, Axis.PERPENDICULAR)
    guard = time_guard(params, beam) if guard is None else guard
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    if _check_time(t, guard, strict=False):
        return -x + 1j * z
    if not beta_z_inverse:
        co = coeffs_perp(r, t, beam, params, guard=guard, beta_z_inverse=False)
        return -co.beta_alpha[0] + 1j * co.beta_alpha[2]
    return _f_transverse(x, y, t, beam, params) + _f_axial(z, t, beam, params)


def psi1_perp(r, t: float, beam: BeamParams, params: PhysicalParams,
              guard: float | None = None, beta_z_inverse: bool = True):
    """One-OAM packet: f(r, t)/sigma^2 times psi0_perp (unnormalized, norm 1/sigma^2)."""
    _require_axis(beam, Axis.PERPENDICULAR)
    guard = time_guard(params, beam) if guard is None else guard
    if _check_time(t, guard, strict=False):
        return initial_psi1(r, beam, params)
    f = prefactor_f(r, t, beam, params, guard=guard, beta_z_inverse=beta_z_inverse)
    return f / beam.sigma ** 2 * psi0_perp(r, t, beam, params, guard=guard,
                                           beta_z_inverse=beta_z_inverse)


def psi0_parallel(r, t: float, beam: BeamParams, params: PhysicalParams,
                  guard: float | None = None):
    """Zero-OAM packet launched along the field; depends on x, y only via x^2 + y^2."""
    _require_axis(beam, Axis.PARALLEL)
    guard = time_guard(params, beam) if guard is None else guard
    if _check_time(t, guard, strict=False):
        return initial_psi0_parallel(r, beam, params)
    x, y, z = (np.asarray(c, dtype=float) for c in r)
    rho = np.sqrt(x ** 2 + y ** 2)
    transverse = _transverse_factor(rho, 0.0, t, beam.sigma, beam.sigma, 0.0, params)
    return (_norm_const(beam) * transverse
            * _free_factor(z, t, beam.length, beam.momentum / params.hbar, params))


def evolved_state(beam: BeamParams, params: PhysicalParams, guard: float | None = None,
                  beta_z_inverse: bool = True):
    """Callable (r, t) -> psi for the beam's closed form."""
    if beam.axis is Axis.PERPENDICULAR:
        fn = psi1_perp if beam.oam == 1 else psi0_perp
        return lambda r, t: fn(r, t, beam, params, guard=guard, beta_z_inverse=beta_z_inverse)
    if beam.oam == 1:
        raise ConfigError("no closed form for a parallel beam with OAM; use an oracle method")
    return lambda r, t: psi0_parallel(r, t, beam, params, guard=guard)


# -- separable pieces -------------------------------------------------------

def separable_terms(beam: BeamParams, params: PhysicalParams, t: float,
                    guard: float | None = None):
    """Closed form at time t as a list of (f_xy(x, y), f_z(z)) factor pairs.

    The sum over pairs of f_xy * f_z equals the closed-form wave function.
    """
    guard = time_guard(params, beam) if guard is None else guard
    norm = _norm_const(beam)
    k = beam.momentum / params.hbar
    s2 = beam.sigma ** 2
    if _check_time(t, guard, strict=False):
        if beam.axis is Axis.PERPENDICULAR:
            gxy = lambda x, y: norm * np.exp(-np.asarray(x) ** 2 / (2 * s2)
                                             - np.asarray(y) ** 2 / (2 * beam.length ** 2)
                                             + 1j * k * np.asarray(y))
            gz = lambda z: np.exp(-np.asarray(z) ** 2 / (2 * s2)) + 0j
            if beam.oam == 0:
                return [(gxy, gz)]
            return [(lambda x, y: -np.asarray(x) / s2 * gxy(x, y), gz),
                    (gxy, lambda z: 1j * np.asarray(z) / s2 * gz(z))]
        gxy = lambda x, y: norm * np.exp(-(np.asarray(x) ** 2 + np.asarray(y) ** 2) / (2 * s2)) + 0j
        gz = lambda z: np.exp(-np.asarray(z) ** 2 / (2 * beam.length ** 2) + 1j * k * np.asarray(z))
        if beam.oam == 0:
            return [(gxy, gz)]
        return [(lambda x, y: -(np.asarray(x) + 1j * np.asarray(y)) / s2 * gxy(x, y), gz)]
    if beam.axis is Axis.PERPENDICULAR:
        txy = lambda x, y: norm * _perp_transverse(x, y, t, beam, params)
        tz = lambda z: _perp_axial(z, t, beam, params)
        if beam.oam == 0:
            return [(txy, tz)]
        return [(lambda x, y: _f_transverse(x, y, t, beam, params) / s2 * txy(x, y), tz),
                (txy, lambda z: _f_axial(z, t, beam, params) / s2 * tz(z))]
    if beam.oam == 1:
        raise ConfigError("no closed form for a parallel beam with OAM; use an oracle method")

    def txy(x, y):
        rho = np.sqrt(np.asarray(x) ** 2 + np.asarray(y) ** 2)
        return norm * _transverse_factor(rho, 0.0, t, beam.sigma, beam.sigma, 0.0, params)

    return [(txy, lambda z: _free_factor(z, t, beam.length, k, params))]


# -- nodal line -------------------------------------------------------------

@dataclass(frozen=True)
class NodalLine:
    """Zero line of psi1 in the plane z = 0.

    ``angle`` is continuous in t: omega t/2 - pi/2. ``direction`` is
    (sin(omega t/2), -cos(omega t/2)), so that y = -cot(omega t/2) x.
    """

    t: float
    angle: float
    direction: tuple

    def contains(self, x, y, tol: float = 1e-12) -> bool:
        dx, dy = self.direction
        return abs(x * dy - y * dx) <= tol * max(1.0, math.hypot(x, y))


def nodal_line(t: float, params: PhysicalParams) -> NodalLine:
    if t < 0:
        raise TimeTooSmall(f"negative time {t}")
    half = 0.5 * params.omega * t
    return NodalLine(t=t, angle=half - 0.5 * math.pi, direction=(math.sin(half), -math.cos(half)))


def oam_axis(t: float, params: PhysicalParams) -> np.ndarray:
    """Unit vector of the OAM carried by psi1: +y at t = 0, rotating along the nodal line."""
    half = 0.5 * params.omega * t
    return np.array([-math.sin(half), math.cos(half), 0.0])


def classical_center(t: float, beam: BeamParams, params: PhysicalParams) -> np.ndarray:
    """Packet centre predicted by the classical orbit (perpendicular launch along +y)."""
    if beam.axis is Axis.PARALLEL:
        return np.array([0.0, 0.0, beam.momentum / params.mass * t])
    omega = params.omega
    v = beam.momentum / params.mass
    if omega == 0:
        return np.array([0.0, v * t, 0.0])
    return np.array([-v / omega * (1 - math.cos(omega * t)), v / omega * math.sin(omega * t), 0.0])


def packet_widths(t: float, beam: BeamParams, params: PhysicalParams) -> tuple[float, float, float]:
    """Gaussian width parameters (u, v, z) of psi0 at time t.

    u, v are the rotated transverse directions; the envelope is
    exp(-u^2/2w_u^2 - v^2/2w_v^2 - z^2/2w_z^2) in modulus.
    """
    h = _half_angle(t, params)

    def transverse(w):
        return math.sqrt((w * h.c) ** 2 + (h.S / w) ** 2)

    def free(w):
        return w * math.hypot(1.0, params.hbar * t / (params.mass * w ** 2))

    if beam.axis is Axis.PERPENDICULAR:
        return transverse(beam.sigma), transverse(beam.length), free(beam.sigma)
    return transverse(beam.sigma), transverse(beam.sigma), free(beam.length)


# -- branch cross-check -----------------------------------------------------

def prefactor_by_unwinding(t: float, beam: BeamParams, params: PhysicalParams,
                           points_per_period: int = 2048) -> complex:
    """N*sqrt((2pi)^3 beta_x beta_y beta_z) continued in time on a dense lattice.

    Starts from the principal branch just above t = 0 and flips the sign
    whenever a step would jump by more than the sign-flipped value. Used as
    an independent check of the closed branch choice in psi0_perp.
    """
    _require_axis(beam, Axis.PERPENDICULAR)
    omega = params.omega
    scale = 2 * math.pi / abs(omega) if omega != 0 else params.mass * beam.sigma ** 2 / params.hbar
    n = max(8, int(math.ceil(points_per_period * t / scale)))
    times = np.linspace(t, 0.0, n, endpoint=False)[::-1]
    # avoid landing exactly on a caustic
    if omega != 0:
        period = 2 * math.pi / abs(omega)
        frac = np.abs(times / period - np.round(times / period))
        times = np.where(frac < 1e-9, times + 1e-7 * period, times)
    values = []
    for tk in times:
        N, *_, bx, by, bz, _ = _literal_blocks(0.0, 0.0, 0.0, tk, beam.sigma, beam.length,
                                               beam.sigma, 0.0, 0.0, params, True)
        values.append(N * np.sqrt(2 * np.pi * bx) * np.sqrt(2 * np.pi * by) * np.sqrt(2 * np.pi * bz))
    prev = values[0]
    sign = 1.0
    for val in values[1:]:
        if abs(sign * val - prev) > abs(-sign * val - prev):
            sign = -sign
        prev = sign * val
    return prev * _norm_const(beam)
