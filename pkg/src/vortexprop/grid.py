"""Complex fields on uniform rectangular grids and the operators acting on them.

Grid points along an axis are ``lo + j*h`` with ``h = (hi - lo)/n`` and the
upper end excluded, which matches the periodic layout used by the FFT
solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .errors import AmplitudeTooSmall, ConfigError, NonFinite, ResolutionTooCoarse, ZeroNorm

RESOLUTION_TOL = 5e-2


@dataclass(frozen=True)
class GridSpec:
    extents: tuple      # ((lo, hi), ...) per axis
    counts: tuple       # points per axis
    labels: tuple = ("x", "y", "z")

    def __post_init__(self):
        extents = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        counts = tuple(int(n) for n in self.counts)
        labels = tuple(self.labels)[: len(counts)] if len(self.labels) > len(counts) else tuple(self.labels)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", labels)
        if not (len(extents) == len(counts) == len(labels)) or not 1 <= len(counts) <= 3:
            raise ConfigError("grid needs 1-3 axes with matching extents, counts and labels")
        for (lo, hi), n in zip(extents, counts):
            if not hi > lo:
                raise ConfigError(f"empty extent [{lo}, {hi}]")
            if n < 8 or n % 2:
                raise ConfigError(f"point counts must be even and >= 8, got {n}")

    @classmethod
    def cube(cls, half_width: float, n: int, labels=("x", "y", "z")) -> "GridSpec":
        return cls(tuple((-half_width, half_width) for _ in labels), (n,) * len(labels), labels)

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, label_or_index) -> np.ndarray:
        i = self.index(label_or_index)
        (lo, _), n, h = self.extents[i], self.counts[i], self.spacing[i]
        return lo + h * np.arange(n)

    def index(self, label_or_index) -> int:
        if isinstance(label_or_index, int):
            return label_or_index
        try:
            return self.labels.index(label_or_index)
        except ValueError:
            raise ConfigError(f"grid has no axis {label_or_index!r}") from None

    def axes(self) -> list:
        return [self.axis(i) for i in range(self.ndim)]

    def mesh(self) -> tuple:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def sub(self, labels) -> "GridSpec":
        idx = [self.index(lab) for lab in labels]
        return GridSpec(tuple(self.extents[i] for i in idx), tuple(self.counts[i] for i in idx),
                        tuple(self.labels[i] for i in idx))


def grid_for_packet(center: Sequence[float], widths: Sequence[float], labels=("x", "y", "z"),
                    spacing: float | None = None, span: float = 5.5, min_points: int = 16) -> GridSpec:
    """Box of +-span*width around ``center`` with spacing snapped so that the
    grid points land on multiples of ``spacing``."""
    if spacing is None:
        spacing = min(widths) / 5
    extents, counts = [], []
    for c, w in zip(center, widths):
        lo = math.floor((c - span * w) / spacing) * spacing
        n = max(min_points, int(math.ceil((c + span * w - lo) / spacing)))
        n += n % 2
        extents.append((lo, lo + n * spacing))
        counts.append(n)
    return GridSpec(tuple(extents), tuple(counts), tuple(labels))


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: GridSpec
    data: np.ndarray
    t: float = 0.0
    scenario: str = ""
    normalized: bool = False
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.shape != self.grid.shape:
            raise ConfigError(f"data shape {data.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFinite("field contains NaN or Inf")
        object.__setattr__(self, "data", data)

    def with_data(self, data, **changes) -> "ComplexField":
        return replace(self, data=data, **changes)

    def __mul__(self, other):
        return self.with_data(self.data * other, normalized=False)

    __rmul__ = __mul__

    def conj(self) -> "ComplexField":
        return self.with_data(np.conj(self.data), normalized=self.normalized)


def sample(fn: Callable, grid: GridSpec, t: float = 0.0, scenario: str = "") -> ComplexField:
    """Evaluate ``fn(coords)`` on every grid point. ``coords`` is the tuple of mesh arrays."""
    values = np.broadcast_to(np.asarray(fn(grid.mesh()), dtype=complex), grid.shape).copy()
    if not np.all(np.isfinite(values)):
        raise NonFinite(f"sampled function is not finite on the grid (t={t})")
    return ComplexField(grid, values, t=t, scenario=scenario)


def inner(a: ComplexField, b: ComplexField) -> complex:
    """<a|b> by the rectangle rule (trapezoid for fields vanishing at the edges)."""
    return complex(np.vdot(a.data, b.data) * a.grid.cell_volume)


def norm(f: ComplexField) -> float:
    """Integral of |psi|^2 over the box."""
    return float(np.sum(np.abs(f.data) ** 2) * f.grid.cell_volume)


def normalize(f: ComplexField) -> ComplexField:
    n = norm(f)
    if not n > 0:
        raise ZeroNorm("cannot normalize a vanishing field")
    return f.with_data(f.data / math.sqrt(n), normalized=True)


def relative_l2(a, b) -> float:
    """||a - b|| / ||b|| for arrays or fields on the same grid."""
    a = a.data if isinstance(a, ComplexField) else np.asarray(a)
    b = b.data if isinstance(b, ComplexField) else np.asarray(b)
    nb = np.linalg.norm(b)
    if nb == 0:
        raise ZeroNorm("reference field vanishes")
    return float(np.linalg.norm(a - b) / nb)


# -- separable fields -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SeparableField:
    """3D field written as sum_k xy_k(x, y) * z_k(z).

    All xy factors share one 2D grid and all z factors one 1D grid.
    """

    terms: tuple
    t: float = 0.0
    scenario: str = ""

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ConfigError("separable field needs at least one term")
        g_xy, g_z = terms[0][0].grid, terms[0][1].grid
        for a, b in terms:
            if a.grid != g_xy or b.grid != g_z:
                raise ConfigError("separable terms must share grids")
        if g_xy.ndim != 2 or g_z.ndim != 1:
            raise ConfigError("separable terms need a 2D xy factor and a 1D z factor")
        object.__setattr__(self, "terms", terms)

    @property
    def grid_xy(self) -> GridSpec:
        return self.terms[0][0].grid

    @property
    def grid_z(self) -> GridSpec:
        return self.terms[0][1].grid

    @property
    def grid(self) -> GridSpec:
        g, gz = self.grid_xy, self.grid_z
        return GridSpec(g.extents + gz.extents, g.counts + gz.counts, g.labels + gz.labels)

    def to_dense(self) -> ComplexField:
        data = sum(np.multiply.outer(a.data, b.data) for a, b in self.terms)
        return ComplexField(self.grid, data, t=self.t, scenario=self.scenario)

    def norm(self) -> float:
        total = 0j
        for a1, b1 in self.terms:
            for a2, b2 in self.terms:
                total += inner(a1, a2) * inner(b1, b2)
        return float(total.real)

    def scaled(self, c) -> "SeparableField":
        return replace(self, terms=tuple((a * c, b) for a, b in self.terms))

    def slice_z(self, offset: float) -> ComplexField:
        """xy plane nearest to z = offset."""
        zs = self.grid_z.axis(0)
        j = int(np.argmin(np.abs(zs - offset)))
        data = sum(a.data * b.data[j] for a, b in self.terms)
        return ComplexField(self.grid_xy, data, t=self.t, scenario=self.scenario,
                            meta={"offset": float(zs[j])})


def sample_separable(terms, grid_xy: GridSpec, grid_z: GridSpec, t: float = 0.0,
                     scenario: str = "") -> SeparableField:
    """Sample (f_xy, f_z) callable pairs into a SeparableField."""
    out = []
    x, y = grid_xy.mesh()
    z = grid_z.axis(0)
    for fxy, fz in terms:
        out.append((sample(lambda _: fxy(x, y), grid_xy, t, scenario),
                    sample(lambda _: fz(z), grid_z, t, scenario)))
    return SeparableField(tuple(out), t=t, scenario=scenario)


# -- finite differences -----------------------------------------------------

_LEFT = (np.array([-25, 48, -36, 16, -3]) / 12.0, np.array([-3, -10, 18, -6, 1]) / 12.0)


def _fd4(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    out = np.empty_like(a)
    out[2:-2] = (a[:-4] - 8 * a[1:-3] + 8 * a[3:-1] - a[4:]) / 12.0
    for i, w in enumerate(_LEFT):
        out[i] = np.tensordot(w, a[:5], axes=(0, 0))
        out[-1 - i] = -np.tensordot(w, a[::-1][:5], axes=(0, 0))
    return np.moveaxis(out / h, 0, axis)


def _fd6_interior(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    out = (-a[:-6] + 9 * a[1:-5] - 45 * a[2:-4] + 45 * a[4:-2] - 9 * a[5:-1] + a[6:]) / (60.0 * h)
    return np.moveaxis(out, 0, axis)


def derivative(f: ComplexField, axis, check: bool = True, tol: float = RESOLUTION_TOL) -> np.ndarray:
    """Fourth-order first derivative along ``axis`` with one-sided closures.

    With ``check`` the interior is compared against a sixth-order stencil;
    a relative gap above ``tol`` means the grid does not resolve the field.
    """
    i = f.grid.index(axis)
    h = f.grid.spacing[i]
    d4 = _fd4(f.data, i, h)
    if check:
        d6 = _fd6_interior(f.data, i, h)
        inner_d4 = np.moveaxis(np.moveaxis(d4, i, 0)[3:-3], 0, i)
        scale = np.linalg.norm(d6)
        if scale > 0 and np.linalg.norm(inner_d4 - d6) > tol * scale:
            raise ResolutionTooCoarse(
                f"derivative along {f.grid.labels[i]} not resolved at h={h:.3g}")
    return d4


def boundary_mask(grid: GridSpec, width: int = 2) -> np.ndarray:
    """True on points whose stencil used a one-sided closure."""
    mask = np.zeros(grid.shape, dtype=bool)
    for ax in range(grid.ndim):
        idx = [slice(None)] * grid.ndim
        idx[ax] = np.r_[0:width, grid.counts[ax] - width:grid.counts[ax]]
        mask[tuple(idx)] = True
    return mask


def _coord(grid: GridSpec, label) -> np.ndarray:
    i = grid.index(label)
    shape = [1] * grid.ndim
    shape[i] = grid.counts[i]
    return grid.axis(i).reshape(shape)


def apply_Ly(f: ComplexField, hbar: float = 1.0, check: bool = True) -> ComplexField:
    """L_y psi = i hbar (x d_z - z d_x) psi."""
    g = f.grid
    out = 1j * hbar * (_coord(g, "x") * derivative(f, "z", check) - _coord(g, "z") * derivative(f, "x", check))
    return f.with_data(out, normalized=False)


def apply_Lz(f: ComplexField, hbar: float = 1.0, check: bool = True) -> ComplexField:
    """L_z psi = -i hbar (x d_y - y d_x) psi."""
    g = f.grid
    out = -1j * hbar * (_coord(g, "x") * derivative(f, "y", check) - _coord(g, "y") * derivative(f, "x", check))
    return f.with_data(out, normalized=False)


def apply_ladder(f: ComplexField, check: bool = True) -> ComplexField:
    """(d_x - i d_z) psi; raises L_y by one unit of hbar."""
    return f.with_data(derivative(f, "x", check) - 1j * derivative(f, "z", check), normalized=False)


class Expectation(NamedTuple):
    value: float
    defect: float     # imaginary part of the sandwich, a Hermiticity check


_POSITION = {"X": "x", "Y": "y", "Z": "z"}
_MOMENTUM = {"Px": "x", "Py": "y", "Pz": "z"}


def apply_operator(f: ComplexField, op: str, hbar: float = 1.0, check: bool = True) -> ComplexField:
    if op == "Ly":
        return apply_Ly(f, hbar, check)
    if op == "Lz":
        return apply_Lz(f, hbar, check)
    if op in _POSITION:
        return f.with_data(_coord(f.grid, _POSITION[op]) * f.data, normalized=False)
    if op in _MOMENTUM:
        return f.with_data(-1j * hbar * derivative(f, _MOMENTUM[op], check), normalized=False)
    raise ConfigError(f"unknown operator {op!r}")


def expectation(f: ComplexField, op: str, hbar: float = 1.0, check: bool = True) -> Expectation:
    """<psi|A|psi>/<psi|psi> by quadrature."""
    n = norm(f)
    if not n > 0:
        raise ZeroNorm("expectation of a vanishing field")
    val = inner(f, apply_operator(f, op, hbar, check)) / n
    return Expectation(val.real, val.imag)


@dataclass(frozen=True)
class Moments:
    centroid: np.ndarray
    widths: np.ndarray      # standard deviations per axis


def moments(f: ComplexField) -> Moments:
    rho = np.abs(f.data) ** 2
    total = rho.sum()
    if not total > 0:
        raise ZeroNorm("moments of a vanishing field")
    cen, wid = [], []
    for i in range(f.grid.ndim):
        axes = tuple(j for j in range(f.grid.ndim) if j != i)
        marginal = rho.sum(axis=axes) / total
        c = f.grid.axis(i)
        mu = float(np.dot(marginal, c))
        cen.append(mu)
        wid.append(math.sqrt(max(float(np.dot(marginal, (c - mu) ** 2)), 0.0)))
    return Moments(np.array(cen), np.array(wid))


# -- interpolation and winding ----------------------------------------------

def interpolate(f: ComplexField, points: np.ndarray, order: int = 3) -> np.ndarray:
    """Values at physical ``points`` (shape (..., ndim)) by spline interpolation."""
    pts = np.asarray(points, dtype=float)
    idx = [(pts[..., i] - f.grid.extents[i][0]) / f.grid.spacing[i] for i in range(f.grid.ndim)]
    coords = np.array(idx).reshape(f.grid.ndim, -1)
    re = ndimage.map_coordinates(f.data.real, coords, order=order, mode="nearest")
    im = ndimage.map_coordinates(f.data.imag, coords, order=order, mode="nearest")
    return (re + 1j * im).reshape(pts.shape[:-1])


class WindingResult(NamedTuple):
    number: int
    raw: float
    margin: float     # distance of raw from the nearest half-integer


def winding_of_samples(values: np.ndarray) -> WindingResult:
    """Net phase winding of a closed loop of complex samples."""
    values = np.asarray(values)
    steps = np.angle(np.roll(values, -1) / values)
    raw = float(steps.sum() / (2 * math.pi))
    number = int(round(raw))
    return WindingResult(number, raw, 0.5 - abs(raw - number))


def phase_winding_circle(f: ComplexField, center, e1, e2, radius: float, n: int = 256,
                         floor: float = 1e-6) -> WindingResult:
    """Winding on the circle center + radius*(cos a e1 + sin a e2), a in [0, 2pi).

    Positive winding means the phase increases counterclockwise about e1 x e2.
    """
    a = 2 * math.pi * np.arange(n) / n
    pts = (np.asarray(center, dtype=float)[None, :] + radius * (np.cos(a)[:, None] * np.asarray(e1, dtype=float)
                                                                + np.sin(a)[:, None] * np.asarray(e2, dtype=float)))
    values = interpolate(f, pts)
    peak = np.abs(f.data).max()
    if not peak > 0 or np.abs(values).min() < floor * peak:
        raise AmplitudeTooSmall("field nearly vanishes on the winding circle")
    return winding_of_samples(values)


def phase_winding(f: ComplexField, plane: str, center, radius: float, n: int = 256,
                  floor: float = 1e-6) -> WindingResult:
    """Winding in the xz plane (about +y) or the xy plane (about +z).

    For 3D fields ``center`` is a 3-vector; for 2D slices it is a 2-vector in
    the slice coordinates.
    """
    if f.grid.ndim == 2:
        e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        if plane == "xz" and f.grid.labels == ("x", "z"):
            e1 = np.array([-1.0, 0.0])
        elif plane != "xz" and plane != "xy":
            raise ConfigError(f"unknown plane {plane!r}")
        return phase_winding_circle(f, center, e1, e2, radius, n, floor)
    if plane == "xz":
        e1, e2 = np.array([-1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
    elif plane == "xy":
        e1, e2 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    else:
        raise ConfigError(f"unknown plane {plane!r}")
    return phase_winding_circle(f, center, e1, e2, radius, n, floor)


# -- slicing ----------------------------------------------------------------

def slice_plane(f: ComplexField, plane: str, offset: float) -> ComplexField:
    """2D slice through the grid point nearest to the requested offset.

    ``plane='xy'`` fixes z, ``plane='xz'`` fixes y. The actual offset is
    stored in ``meta['offset']``.
    """
    if plane not in ("xy", "xz"):
        raise ConfigError(f"unknown plane {plane!r}")
    fixed = "z" if plane == "xy" else "y"
    i = f.grid.index(fixed)
    coords = f.grid.axis(i)
    j = int(np.argmin(np.abs(coords - offset)))
    data = np.take(f.data, j, axis=i)
    keep = [lab for lab in f.grid.labels if lab != fixed]
    return ComplexField(f.grid.sub(keep), data, t=f.t, scenario=f.scenario,
                        meta={"plane": plane, "offset": float(coords[j])})


def low_rank_terms(matrix: np.ndarray, tol: float = 1e-13) -> list:
    """SVD split of a 2D array into (left, right) vector pairs.

    Singular values below ``tol`` times the largest are dropped.
    """
    u, s, vh = np.linalg.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return []
    keep = int(np.count_nonzero(s > tol * s[0]))
    return [(u[:, k] * s[k], vh[k]) for k in range(keep)]


def decompose(f: ComplexField, tol: float = 1e-13) -> SeparableField:
    """Write a dense (x, y, z) field as a SeparableField by SVD over (xy | z)."""
    if f.grid.labels != ("x", "y", "z"):
        raise ConfigError("decompose needs an (x, y, z) grid")
    nx, ny, nz = f.grid.counts
    g_xy, g_z = f.grid.sub(("x", "y")), f.grid.sub(("z",))
    pairs = low_rank_terms(f.data.reshape(nx * ny, nz), tol)
    if not pairs:
        raise ZeroNorm("cannot decompose a vanishing field")
    terms = tuple((ComplexField(g_xy, a.reshape(nx, ny), t=f.t), ComplexField(g_z, b, t=f.t))
                  for a, b in pairs)
    return SeparableField(terms, t=f.t, scenario=f.scenario)


# -- quantities computed straight from separable factors ---------------------

def _as_separable(f) -> SeparableField:
    if isinstance(f, SeparableField):
        return f
    if isinstance(f, ComplexField) and f.grid.ndim == 3:
        return decompose(f)
    raise ConfigError("expected a 3D ComplexField or a SeparableField")


def _gram(fields_a, fields_b) -> np.ndarray:
    return np.array([[inner(a, b) for b in fields_b] for a in fields_a])


def separable_norm(f) -> float:
    sep = _as_separable(f)
    a = [t[0] for t in sep.terms]
    b = [t[1] for t in sep.terms]
    return float(np.sum(_gram(a, a) * _gram(b, b)).real)


def separable_expectation(f, op: str, hbar: float = 1.0, check: bool = True) -> Expectation:
    """<psi|A|psi>/<psi|psi> for psi = sum_k a_k(x, y) b_k(z) without building the 3D array.

    Every supported operator is a sum of products of an xy operator and a z
    operator, so the sandwich reduces to 2D and 1D inner products.
    """
    sep = _as_separable(f)
    a = [t[0] for t in sep.terms]
    b = [t[1] for t in sep.terms]
    ident = lambda fs: fs
    gz = sep.grid_z

    def mul_z(fs):
        z = gz.axis(0)
        return [g.with_data(z * g.data) for g in fs]

    def dz(fs):
        return [g.with_data(derivative(g, "z", check)) for g in fs]

    def xy(op_name):
        return lambda fs: [apply_operator(g, op_name, hbar, check) for g in fs]

    if op == "Ly":
        # i hbar (x d_z - z d_x)
        pairs = [(1j * hbar, lambda fs: [g.with_data(_coord(g.grid, "x") * g.data) for g in fs], dz),
                 (-1j * hbar, lambda fs: [g.with_data(derivative(g, "x", check)) for g in fs], mul_z)]
    elif op in ("Lz", "X", "Y", "Px", "Py"):
        pairs = [(1.0, xy(op), ident)]
    elif op == "Z":
        pairs = [(1.0, ident, mul_z)]
    elif op == "Pz":
        pairs = [(-1j * hbar, ident, dz)]
    else:
        raise ConfigError(f"unknown operator {op!r}")
    n = np.sum(_gram(a, a) * _gram(b, b)).real
    if not n > 0:
        raise ZeroNorm("expectation of a vanishing field")
    total = 0j
    for coef, op_xy, op_z in pairs:
        total += coef * np.sum(_gram(a, op_xy(a)) * _gram(b, op_z(b)))
    val = total / n
    return Expectation(float(val.real), float(val.imag))


@dataclass(frozen=True)
class SeparableMoments:
    centroid: np.ndarray        # (x, y, z)
    widths: np.ndarray          # standard deviations along x, y, z
    cov_xy: np.ndarray          # 2x2 transverse covariance


def separable_moments(f) -> SeparableMoments:
    """First and second moments of |psi|^2 from the xy and z marginals."""
    sep = _as_separable(f)
    a = [t[0] for t in sep.terms]
    b = [t[1] for t in sep.terms]
    ga, gb = _gram(a, a), _gram(b, b)
    A = np.array([t.data for t in a])
    Bz = np.array([t.data for t in b])
    # rho_xy = sum_jk conj(a_j) a_k <b_j|b_k>
    rho_xy = np.einsum("jxy,jk,kxy->xy", A.conj(), gb, A).real * sep.grid_z.cell_volume
    rho_z = np.einsum("jz,jk,kz->z", Bz.conj(), ga, Bz).real * sep.grid_xy.cell_volume
    total = rho_z.sum()
    if not total > 0:
        raise ZeroNorm("moments of a vanishing field")
    x, y = sep.grid_xy.mesh()
    z = sep.grid_z.axis(0)
    wxy = rho_xy / rho_xy.sum()
    mx, my = float((wxy * x).sum()), float((wxy * y).sum())
    cxx = float((wxy * (x - mx) ** 2).sum())
    cyy = float((wxy * (y - my) ** 2).sum())
    cxy = float((wxy * (x - mx) * (y - my)).sum())
    wz = rho_z / total
    mz = float((wz * z).sum())
    czz = float((wz * (z - mz) ** 2).sum())
    return SeparableMoments(np.array([mx, my, mz]),
                            np.sqrt(np.maximum([cxx, cyy, czz], 0.0)),
                            np.array([[cxx, cxy], [cxy, cyy]]))


def separable_values(f, points: np.ndarray, order: int = 3) -> np.ndarray:
    """psi at physical 3D ``points`` (shape (..., 3)) by interpolating each factor."""
    sep = _as_separable(f)
    pts = np.asarray(points, dtype=float)
    out = np.zeros(pts.shape[:-1], dtype=complex)
    for a, b in sep.terms:
        out += interpolate(a, pts[..., :2], order) * interpolate(b, pts[..., 2:3], order)
    return out
