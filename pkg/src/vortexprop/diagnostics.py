"""Physical read-outs from a time series of wave-function frames.

Frames are 3D fields (dense or separable). For each frame we record the
norm, centroid, widths, angular momenta, the in-plane angle of the nodal
line and the phase winding around it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import optimize

from .errors import AmplitudeTooSmall, InsufficientSamples, NoNodeFound
from .grid import (ComplexField, SeparableField, interpolate, separable_expectation,
                   separable_moments, separable_norm, separable_values, winding_of_samples)
from .params import Axis, BeamParams, PhysicalParams

NODE_DEPTH = 0.1
FLAT_TOL = 1e-6


# -- nodal line -------------------------------------------------------------

@dataclass(frozen=True)
class NodalFit:
    angle: float          # in [-pi/2, pi/2)
    offset: float         # signed distance of the line from the centroid
    depth: float          # residual |psi|^2 on the line relative to a typical line


def _line_integral(slice_xy: ComplexField, center, phi, b, half_length, n=64):
    d = np.array([math.cos(phi), math.sin(phi)])
    nrm = np.array([-d[1], d[0]])
    s = np.linspace(-half_length, half_length, n)
    pts = center[None, :] + b * nrm[None, :] + s[:, None] * d[None, :]
    return float(np.mean(np.abs(interpolate(slice_xy, pts)) ** 2))


def fit_nodal_angle(slice_xy: ComplexField, center=None, half_length: float | None = None,
                    depth_limit: float = NODE_DEPTH) -> NodalFit:
    """Direction of the zero line of a vortex field in an (x, y) slice.

    Minimizes the mean |psi|^2 along a segment through ``center`` (default:
    the |psi|^2 centroid) over the segment angle and a normal offset. The
    result is rejected when the best line is not much darker than a typical
    line through the same point.
    """
    rho = np.abs(slice_xy.data) ** 2
    total = rho.sum()
    if not total > 0:
        raise NoNodeFound("empty slice")
    x, y = slice_xy.grid.mesh()
    if center is None:
        center = np.array([(rho * x).sum() / total, (rho * y).sum() / total])
    center = np.asarray(center, dtype=float)
    if half_length is None:
        sx = math.sqrt((rho * (x - center[0]) ** 2).sum() / total)
        sy = math.sqrt((rho * (y - center[1]) ** 2).sum() / total)
        half_length = 2.0 * max(sx, sy)
    angles = -0.5 * math.pi + math.pi * np.arange(90) / 90
    scan = np.array([_line_integral(slice_xy, center, a, 0.0, half_length) for a in angles])
    typical = float(np.median(scan))
    a0 = angles[int(np.argmin(scan))]
    # a genuine node passes near the centroid; keep the offset from sliding out of the packet
    reach = 0.25 * half_length

    def cost(p):
        return _line_integral(slice_xy, center, p[0], float(np.clip(p[1], -reach, reach)), half_length)

    res = optimize.minimize(cost,
                            x0=[a0, 0.0], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-16 * typical, "maxiter": 2000})
    phi, b = float(res.x[0]), float(np.clip(res.x[1], -reach, reach))
    depth = float(res.fun) / typical if typical > 0 else math.inf
    if depth > depth_limit:
        raise NoNodeFound(f"darkest line keeps {depth:.2g} of typical intensity")
    phi = (phi + 0.5 * math.pi) % math.pi - 0.5 * math.pi
    return NodalFit(phi, b, depth)


def unwrap_lines(angles) -> np.ndarray:
    """Continue a sequence of line angles (defined mod pi) assuming |step| < pi/2."""
    out = np.array(angles, dtype=float)
    for i in range(1, out.size):
        if not math.isfinite(out[i]):
            continue
        prev = next((out[j] for j in range(i - 1, -1, -1) if math.isfinite(out[j])), None)
        if prev is None:
            continue
        out[i] += math.pi * round((prev - out[i]) / math.pi)
    return out


# -- per-frame record -------------------------------------------------------

@dataclass(frozen=True)
class FrameRecord:
    t: float
    norm: float
    centroid: np.ndarray
    widths: np.ndarray            # lab-frame standard deviations (x, y, z)
    larmor_widths: np.ndarray     # standard deviations along axes rotated by omega t/2
    kinetic_momentum: np.ndarray  # (x, y) components of <P - qA>
    Ly: float
    Lz: float
    angle: float                  # nodal-line angle (raw, mod pi), nan when absent
    winding: int | None
    winding_margin: float


@dataclass
class DiagnosticSeries:
    times: np.ndarray
    records: list
    angles: np.ndarray = dc_field(default=None)    # unwrapped nodal angles
    oam_axes: np.ndarray = dc_field(default=None)  # in-plane OAM axis per frame (nan if none)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _kinetic_momentum(sep, centroid, params: PhysicalParams, hbar) -> np.ndarray:
    px = separable_expectation(sep, "Px", hbar).value
    py = separable_expectation(sep, "Py", hbar).value
    # electron: P - qA = P + e A with A = (B/2)(-y, x)
    half = 0.5 * params.charge * params.field
    return np.array([px - half * centroid[1], py + half * centroid[0]])


def winding_about(sep, center, axis, radius: float, n: int = 256, floor: float = 1e-6):
    """Phase winding on a circle around ``axis`` (a 3-vector normal to z or along z)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    if abs(axis[2]) > 0.9:
        e1, e2 = np.array([1.0, 0.0, 0.0]), np.cross(axis, [1.0, 0.0, 0.0])
    else:
        e1 = np.array([0.0, 0.0, 1.0])
        e2 = np.cross(axis, e1)
    e2 = e2 / np.linalg.norm(e2)
    a = 2 * math.pi * np.arange(n) / n
    pts = np.asarray(center)[None, :] + radius * (np.cos(a)[:, None] * e1 + np.sin(a)[:, None] * e2)
    vals = separable_values(sep, pts)
    peak = max(np.abs(t[0].data).max() for t in sep.terms) * max(np.abs(t[1].data).max() for t in sep.terms)
    if np.abs(vals).min() < floor * peak:
        raise AmplitudeTooSmall("field nearly vanishes on the winding circle")
    return winding_of_samples(vals)


def analyze_frame(frame, params: PhysicalParams, beam: BeamParams) -> FrameRecord:
    sep = frame if isinstance(frame, SeparableField) else None
    if sep is None:
        from .grid import decompose
        sep = decompose(frame)
    hbar = params.hbar
    mom = separable_moments(sep)
    theta = 0.5 * params.omega * sep.t
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    cov_rot = rot.T @ mom.cov_xy @ rot
    larmor = np.sqrt(np.maximum(np.diag(cov_rot), 0.0))
    pi_xy = _kinetic_momentum(sep, mom.centroid, params, hbar)
    angle = math.nan
    if beam.axis is Axis.PERPENDICULAR and beam.oam == 1:
        try:
            angle = fit_nodal_angle(sep.slice_z(0.0), center=mom.centroid[:2]).angle
        except NoNodeFound:
            angle = math.nan
    return FrameRecord(
        t=sep.t, norm=separable_norm(sep), centroid=mom.centroid, widths=mom.widths,
        larmor_widths=larmor, kinetic_momentum=pi_xy,
        Ly=separable_expectation(sep, "Ly", hbar).value,
        Lz=separable_expectation(sep, "Lz", hbar).value,
        angle=angle, winding=None, winding_margin=math.nan)


def _oam_axes(records, angles) -> np.ndarray:
    """In-plane OAM axis -(cos phi, sin phi) with the sign fixed on the first
    frame so that it points along the kinetic momentum."""
    axes = np.full((len(records), 2), np.nan)
    sign = None
    for i, (r, phi) in enumerate(zip(records, angles)):
        if not math.isfinite(phi):
            continue
        v = -np.array([math.cos(phi), math.sin(phi)])
        if sign is None:
            sign = 1.0 if np.dot(v, r.kinetic_momentum) >= 0 else -1.0
        axes[i] = sign * v
    return axes


def build_series(frames, params: PhysicalParams, beam: BeamParams) -> DiagnosticSeries:
    """Analyze frames in time order, unwrap the nodal angle and measure windings."""
    frames = sorted(frames, key=lambda f: f.t)
    seps = []
    for f in frames:
        if not isinstance(f, SeparableField):
            from .grid import decompose
            f = decompose(f)
        seps.append(f)
    records = [analyze_frame(f, params, beam) for f in seps]
    raw = np.array([r.angle for r in records])
    angles = unwrap_lines(raw)
    axes = _oam_axes(records, angles)
    # keep the unwrapped angle consistent with the anchored axis direction
    if np.isfinite(axes).any():
        first = int(np.argmax(np.isfinite(axes[:, 0])))
        v = -np.array([math.cos(angles[first]), math.sin(angles[first])])
        if np.dot(v, axes[first]) < 0:
            angles = angles + math.pi
    final = []
    for rec, sep, ax in zip(records, seps, axes):
        if beam.axis is Axis.PARALLEL:
            normal = np.array([0.0, 0.0, 1.0])
        elif np.all(np.isfinite(ax)):
            normal = np.array([ax[0], ax[1], 0.0])
        else:
            p = rec.kinetic_momentum
            normal = np.array([p[0], p[1], 0.0]) if np.linalg.norm(p) > 0 else np.array([0.0, 1.0, 0.0])
        radius = 0.5 * float(min(rec.widths))
        try:
            w = winding_about(sep, rec.centroid, normal, radius)
            number, margin = w.number, w.margin
        except AmplitudeTooSmall:
            number, margin = None, math.nan
        final.append(FrameRecord(**{**rec.__dict__, "winding": number, "winding_margin": margin}))
    return DiagnosticSeries(np.array([r.t for r in final]), final, angles, axes)


# -- rates and periods ------------------------------------------------------

@dataclass(frozen=True)
class Precession:
    rate: float           # Omega, rad per unit time
    g_factor: float       # 2 m Omega / (e B); nan at zero field
    residual: float       # rms deviation from the linear fit
    samples: int


def precession_rate(times, angles, params: PhysicalParams, window=None, min_samples: int = 8,
                    min_span: float | None = None) -> Precession:
    """Least-squares slope of the unwrapped nodal angle."""
    t = np.asarray(times, dtype=float)
    a = np.asarray(angles, dtype=float)
    keep = np.isfinite(a)
    if window is not None:
        keep &= (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    t, a = t[keep], a[keep]
    if min_span is None:
        min_span = 0.2 * 2 * math.pi / abs(params.omega) if params.omega != 0 else 0.0
    if t.size < min_samples or (t.size and t.max() - t.min() < min_span):
        raise InsufficientSamples(f"need {min_samples} angle samples spanning {min_span:.3g}")
    slope, icpt = np.polyfit(t, a, 1)
    resid = float(np.sqrt(np.mean((a - (slope * t + icpt)) ** 2)))
    g = 2 * params.mass * slope / (params.charge * params.field) if params.field != 0 else math.nan
    return Precession(float(slope), float(g), resid, int(t.size))


@dataclass(frozen=True)
class Breathing:
    status: str            # "periodic", "flat" or "monotone"
    period: float          # nan unless periodic
    amplitude: float       # (max - min)/mean of the width series


def breathing_period(times, widths, params: PhysicalParams | None = None, min_samples: int = 8,
                     flat_tol: float = FLAT_TOL) -> Breathing:
    """Dominant period of a uniformly sampled width series via autocorrelation."""
    t = np.asarray(times, dtype=float)
    w = np.asarray(widths, dtype=float)
    if t.size < min_samples:
        raise InsufficientSamples(f"need at least {min_samples} width samples")
    if params is not None and params.omega != 0:
        tau = 2 * math.pi / abs(params.omega)
        if t.max() - t.min() < 2 * tau * (1 - 1e-9) - (t[1] - t[0]):
            raise InsufficientSamples("width series must span two periods")
    amp = float((w.max() - w.min()) / w.mean())
    if amp < flat_tol:
        return Breathing("flat", math.nan, amp)
    dw = np.diff(w)
    if np.all(dw > 0) or np.all(dw < 0):
        return Breathing("monotone", math.nan, amp)
    x = w - w.mean()
    n = x.size
    corr = np.empty(n // 2 + 1)
    for lag in range(corr.size):
        a, b = x[: n - lag], x[lag:]
        corr[lag] = np.dot(a, b) / math.sqrt(np.dot(a, a) * np.dot(b, b))
    # first maximum after the correlation has gone negative
    neg = np.nonzero(corr < 0)[0]
    if neg.size == 0:
        return Breathing("monotone", math.nan, amp)
    start = int(neg[0])
    k = start + int(np.argmax(corr[start:]))
    if 0 < k < corr.size - 1:
        y0, y1, y2 = corr[k - 1], corr[k], corr[k + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    dt = t[1] - t[0]
    return Breathing("periodic", float((k + shift) * dt), amp)


# -- conservation -----------------------------------------------------------

@dataclass(frozen=True)
class ConservationReport:
    norm_drift: float
    lz_drift: float | None
    orbit_error: float | None
    orbit_error_fraction: float | None


def conservation_report(series: DiagnosticSeries, params: PhysicalParams, beam: BeamParams,
                        expected_norm: float = 1.0) -> ConservationReport:
    from .oracle.classical import lorentz_orbit

    norms = series.column("norm")
    lz = series.column("Lz")
    lz_drift = float(np.max(np.abs(lz - lz[0]))) if beam.axis is Axis.PARALLEL else None
    orbit_err = frac = None
    if beam.axis is Axis.PERPENDICULAR and params.omega != 0 and beam.radius > 0:
        ref = lorentz_orbit(params, (0.0, 0.0, 0.0), (0.0, beam.momentum / params.mass, 0.0), series.times)
        cen = np.array([r.centroid for r in series.records])
        orbit_err = float(np.max(np.linalg.norm(cen - ref, axis=1)))
        frac = orbit_err / beam.radius
    return ConservationReport(float(np.max(np.abs(norms - expected_norm))), lz_drift, orbit_err, frac)


def alignment(series: DiagnosticSeries) -> np.ndarray:
    """Projection of the unit OAM axis on the unit kinetic-momentum direction per frame."""
    out = np.full(len(series.records), np.nan)
    for i, (r, ax) in enumerate(zip(series.records, series.oam_axes)):
        p = r.kinetic_momentum
        if np.all(np.isfinite(ax)) and np.linalg.norm(p) > 0:
            out[i] = float(np.dot(ax, p) / (np.linalg.norm(ax) * np.linalg.norm(p)))
    return out
