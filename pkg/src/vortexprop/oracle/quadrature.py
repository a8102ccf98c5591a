"""Propagation by direct quadrature of the kernel integral.

The magnetic kernel factorizes into a transverse 2D part and a free 1D
part along z. Inside the transverse part the source-dependent phase is

    exp(i A (x'^2 + y'^2)) exp(-i (2 A x + b y) x') exp(-i (2 A y - b x) y')

with A = (m / 2 hbar T) (omega T/2) cot(omega T/2) and b = m omega / 2 hbar.
Each cross term is an outer product in (output, source) coordinates, so a
rank-1 source f(x') g(y') maps to a product of two matrix multiplications.
General sources are split into rank-1 terms by SVD.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, CostExceeded, ResolutionTooCoarse
from ..grid import ComplexField, GridSpec, SeparableField, decompose, low_rank_terms
from ..kernel import SIN_FLOOR, _check_caustic, _check_interval, _half_angle_terms, axial_kernel
from ..params import PhysicalParams

DEFAULT_BUDGET = 5e10     # complex multiply-adds
SUPPORT_FLOOR = 1e-6      # relative amplitude treated as zero when sizing the integrand


def _transverse_constants(T: float, params: PhysicalParams):
    _check_interval(T)
    _check_caustic(T, params.omega, SIN_FLOOR)
    m, hbar = params.mass, params.hbar
    w, cot_term = _half_angle_terms(T, params.omega)
    pref = -1j * m / (2 * math.pi * hbar * T * w)
    A = 0.5 * m * cot_term / (hbar * T)
    b = 0.5 * m * params.omega / hbar
    return pref, A, b


def _extent_and_band(data: np.ndarray, axis: int, coords: np.ndarray, h: float):
    """Source support along ``axis`` and its largest significant wavenumber."""
    other = 1 - axis
    prof = np.abs(data).max(axis=other)
    live = coords[prof > SUPPORT_FLOOR * prof.max()]
    spec = np.abs(np.fft.fft(data, axis=axis)).max(axis=other)
    k = 2 * math.pi * np.fft.fftfreq(coords.size, h)
    return live.min(), live.max(), float(np.abs(k[spec > SUPPORT_FLOOR * spec.max()]).max())


def sampling_ratio(source: ComplexField, g_out: GridSpec, A: float, b: float) -> float:
    """Largest integrand wavenumber times h over 2 pi; must stay below 1.

    The local wavenumber of the integrand in x' is 2A(x' - x) - b y plus the
    source's own, and likewise in y'. The trapezoid sum picks up aliases at
    multiples of 2 pi/h, so every local wavenumber must stay below that.
    """
    worst = 0.0
    if not np.any(source.data):
        return worst
    out_axes = g_out.axes()
    for axis, sign in ((0, 1.0), (1, -1.0)):
        coords = source.grid.axis(axis)
        h = source.grid.spacing[axis]
        lo, hi, k_src = _extent_and_band(source.data, axis, coords, h)
        o = out_axes[axis]
        reach = max(abs(hi - o.min()), abs(o.max() - lo))
        k_max = 2 * abs(A) * reach + abs(b) * np.abs(out_axes[1 - axis]).max() + k_src
        worst = max(worst, k_max * h / (2 * math.pi))
    return worst


def check_sampling(source: ComplexField, g_out: GridSpec, A: float, b: float) -> None:
    worst = sampling_ratio(source, g_out, A, b)
    if worst >= 1.0:
        raise ResolutionTooCoarse(
            f"kernel integrand needs {worst:.2f}x finer source sampling for this output window")


def input_refinement(source: SeparableField, T: float, params: PhysicalParams, g_out: GridSpec,
                     margin: float = 1.1) -> int:
    """Integer factor by which the transverse source grid must be refined for ``g_out``."""
    _, A, b = _transverse_constants(T, params)
    worst = max(sampling_ratio(a, g_out, A, b) for a, _ in source.terms)
    return max(1, math.ceil(worst * margin))


def transverse_apply(source: ComplexField, T: float, params: PhysicalParams,
                     out_grid: GridSpec | None = None, tol: float = 1e-13,
                     budget: float = DEFAULT_BUDGET) -> ComplexField:
    """Apply the transverse kernel to a 2D (x, y) field."""
    g_in = source.grid
    g_out = g_in if out_grid is None else out_grid
    if g_in.ndim != 2 or g_out.ndim != 2:
        raise ConfigError("transverse quadrature needs 2D (x, y) grids")
    pref, A, b = _transverse_constants(T, params)
    check_sampling(source, g_out, A, b)
    xs, ys = g_in.axes()
    xo, yo = g_out.axes()
    hx, hy = g_in.spacing
    terms = low_rank_terms(source.data, tol)
    cost = len(terms) * (xo.size * xs.size * yo.size + yo.size * ys.size * xo.size)
    if cost > budget:
        raise CostExceeded(f"transverse quadrature would need {cost:.3g} operations")
    m1 = np.exp(-2j * A * np.outer(xo, xs))       # [x, x']
    m2 = np.exp(-1j * b * np.outer(yo, xs))       # [y, x']
    n1 = np.exp(-2j * A * np.outer(yo, ys))       # [y, y']
    n2 = np.exp(1j * b * np.outer(xo, ys))        # [x, y']
    chirp_x = np.exp(1j * A * xs ** 2) * hx
    chirp_y = np.exp(1j * A * ys ** 2) * hy
    acc = np.zeros(g_out.shape, dtype=complex)
    for fx, fy in terms:
        X = (m1 * (chirp_x * fx)) @ m2.T             # [x, y]
        Y = (n2 * (chirp_y * fy)) @ n1.T             # [x, y]
        acc += X * Y
    outer_phase = np.exp(1j * A * (xo[:, None] ** 2 + yo[None, :] ** 2))
    return ComplexField(g_out, pref * outer_phase * acc, t=source.t + T, scenario=source.scenario)


def axial_apply(source: ComplexField, T: float, params: PhysicalParams,
                out_grid: GridSpec | None = None) -> ComplexField:
    """Apply the free 1D kernel along z."""
    g_out = source.grid if out_grid is None else out_grid
    zs, zo = source.grid.axis(0), g_out.axis(0)
    K = axial_kernel(zo[:, None], zs[None, :], T, params)
    return ComplexField(g_out, K @ source.data * source.grid.spacing[0],
                        t=source.t + T, scenario=source.scenario)


def propagate_quadrature(field0, t: float, params: PhysicalParams, out_grid=None,
                         guard: float = 0.0, budget: float = DEFAULT_BUDGET):
    """Evolve ``field0`` by time ``t`` through the kernel integral.

    Accepts a 2D (x, y) field, a SeparableField, or a dense 3D field (split
    into separable terms first). ``out_grid`` is a GridSpec of matching
    dimension, or for separable input a (grid_xy, grid_z) pair.
    Below ``guard`` the input is returned unchanged.
    """
    if t < guard:
        return field0
    if isinstance(field0, SeparableField):
        g_xy, g_z = (None, None) if out_grid is None else out_grid
        terms = tuple((transverse_apply(a, t, params, g_xy, budget=budget),
                       axial_apply(b, t, params, g_z)) for a, b in field0.terms)
        return SeparableField(terms, t=field0.t + t, scenario=field0.scenario)
    if not isinstance(field0, ComplexField):
        raise ConfigError("expected a ComplexField or SeparableField")
    if field0.grid.ndim == 2:
        return transverse_apply(field0, t, params, out_grid, budget=budget)
    if field0.grid.ndim == 1:
        return axial_apply(field0, t, params, out_grid)
    sep = decompose(field0)
    n_terms = len(sep.terms)
    nx, ny, nz = field0.grid.counts
    if n_terms * nx * ny * (nx + ny) > budget:
        raise CostExceeded(f"3D quadrature with {n_terms} separable terms exceeds budget")
    if out_grid is not None:
        out_grid = (out_grid.sub(("x", "y")), out_grid.sub(("z",)))
    return propagate_quadrature(sep, t, params, out_grid, budget=budget).to_dense()
