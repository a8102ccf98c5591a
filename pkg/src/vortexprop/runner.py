"""Scenario configuration, frame generation and run directories."""
from __future__ import annotations

import copy
import enum
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from . import closed_form as cf
from . import diagnostics as dg
from . import io
from .errors import ConfigError, InsufficientSamples, MissingFrames, VortexPropError
from .grid import ComplexField, GridSpec, SeparableField, sample_separable
from .kernel import SIN_FLOOR
from .oracle.quadrature import input_refinement, propagate_quadrature
from .oracle.splitstep import RotatingFrameSolver, SolverConfig, free_axial, orbit_box
from .params import Axis, BeamParams, PhysicalParams, TimeSpec, UnitSystem, make_beam, time_guard

SPAN = 5.5
MAX_SLICE_POINTS = 128


class RunMethod(str, enum.Enum):
    ANALYTIC = "analytic"
    QUADRATURE = "quadrature"
    SPLITSTEP = "splitstep"


DEFAULT_CONFIG = {
    "scenario": "perp",
    "units": "natural",
    "params": {"mass": 1.0, "charge": 1.0, "hbar": 1.0, "field": 1.0},
    "beam": {"sigma": 1.0, "length": 2.0, "radius": 8.0, "momentum": None, "oam": 1},
    "time": {"periods": 1.0, "t_max": None, "frames": 16, "guard": None},
    "grid": None,
    "method": "analytic",
    "solver": {"steps": 1024},
    "outputs": {"slices": True, "heatmaps": True, "series": True, "report": True},
}


@dataclass(frozen=True)
class ScenarioConfig:
    params: PhysicalParams
    beam: BeamParams
    time: TimeSpec
    grid: tuple | None = None          # fixed (nx, ny, nz) per frame window, else automatic
    method: RunMethod = RunMethod.ANALYTIC
    steps: int = 1024                  # split-step steps per period
    outputs: dict = dc_field(default_factory=lambda: dict(DEFAULT_CONFIG["outputs"]))
    raw: dict = dc_field(default_factory=dict)

    @property
    def scenario_id(self) -> str:
        axis = "perp" if self.beam.axis is Axis.PERPENDICULAR else "parallel"
        return f"{axis}-l{self.beam.oam}-{self.method.value}"

    @property
    def guard(self) -> float:
        return time_guard(self.params, self.beam, self.time)


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (extra or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config_file(path) -> dict:
    """Read a JSON or YAML mapping."""
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        import yaml
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    return data


def parse_grid(text) -> tuple | None:
    """Parse ``NXxNYxNZ`` (or a 3-sequence) into a tuple of ints."""
    if text is None:
        return None
    if isinstance(text, str):
        try:
            parts = tuple(int(p) for p in text.lower().split("x"))
        except ValueError:
            raise ConfigError(f"bad grid {text!r}; expected NXxNYxNZ") from None
    else:
        parts = tuple(int(p) for p in text)
    if len(parts) != 3 or any(n < 8 or n % 2 for n in parts):
        raise ConfigError(f"grid needs three even counts >= 8, got {parts}")
    return parts


def build_config(raw: dict | None = None) -> ScenarioConfig:
    """Validate a (partial) config mapping and fill defaults."""
    raw = _merge(DEFAULT_CONFIG, raw or {})
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    axis = Axis.parse(raw["scenario"])
    p = raw["params"]
    params = PhysicalParams(mass=float(p["mass"]), charge=float(p["charge"]),
                            hbar=float(p["hbar"]), field=float(p["field"]))
    b = raw["beam"]
    if axis is Axis.PARALLEL and b.get("momentum") is None:
        b = {**b, "momentum": 2.0 * params.hbar / float(b["length"])}
    if raw["units"] == "si":
        units = UnitSystem.natural_for(params)
        beam_si = make_beam(params, sigma=b["sigma"], length=b["length"],
                            radius=b.get("radius") if axis is Axis.PERPENDICULAR else None,
                            momentum=b.get("momentum") if axis is Axis.PARALLEL else None,
                            axis=axis, oam=int(b["oam"]))
        params, beam = units.to_natural(params, beam_si)
    elif raw["units"] == "natural":
        if axis is Axis.PERPENDICULAR:
            if params.omega == 0 and b.get("momentum") is not None:
                beam = BeamParams(sigma=b["sigma"], length=b["length"], radius=0.0,
                                  momentum=float(b["momentum"]), axis=axis, oam=int(b["oam"]))
            elif b.get("momentum") is not None and b.get("radius") is None:
                beam = make_beam(params, b["sigma"], b["length"], momentum=b["momentum"], axis=axis,
                                 oam=int(b["oam"]))
            else:
                beam = make_beam(params, b["sigma"], b["length"], radius=b.get("radius") or 0.0,
                                 axis=axis, oam=int(b["oam"]))
        else:
            beam = make_beam(params, b["sigma"], b["length"], momentum=b["momentum"], axis=axis,
                             oam=int(b["oam"]))
    else:
        raise ConfigError(f"units must be 'natural' or 'si', got {raw['units']!r}")
    t = raw["time"]
    if t.get("t_max") is not None:
        t_max = float(t["t_max"])
    elif params.omega != 0:
        t_max = float(t["periods"]) * 2 * math.pi / abs(params.omega)
    else:
        raise ConfigError("zero field: give time.t_max explicitly")
    time = TimeSpec(t_max=t_max, frame_count=int(t["frames"]), t_min_guard=t.get("guard"))
    method = RunMethod(raw["method"])
    if method is RunMethod.ANALYTIC and axis is Axis.PARALLEL and beam.oam == 1:
        raise ConfigError("no closed form for the parallel OAM state; choose quadrature or splitstep")
    steps = int(raw["solver"]["steps"])
    if steps < 2:
        raise ConfigError("solver.steps must be at least 2")
    cfg = ScenarioConfig(params=params, beam=beam, time=time, grid=parse_grid(raw["grid"]),
                         method=method, steps=steps, outputs=dict(raw["outputs"]), raw=raw)
    validate_method(cfg)
    return cfg


def validate_method(cfg: ScenarioConfig) -> None:
    """Reject configs whose frames the chosen method cannot evaluate."""
    if cfg.method is RunMethod.QUADRATURE and cfg.params.omega != 0:
        for k, t in enumerate(cfg.time.frame_times()):
            if t >= cfg.guard and abs(math.sin(0.5 * cfg.params.omega * t)) < SIN_FLOOR:
                raise ConfigError(f"frame {k} at t={t} sits on a caustic; quadrature cannot evaluate it")


# -- windows ----------------------------------------------------------------

def _sample_times(cfg: ScenarioConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.time.t_max, 257)


def transverse_spacing(cfg: ScenarioConfig) -> float:
    widths = [min(cf.packet_widths(t, cfg.beam, cfg.params)[:2]) for t in _sample_times(cfg)]
    w_min = min(widths)
    k = abs(cfg.beam.momentum) / cfg.params.hbar if cfg.beam.axis is Axis.PERPENDICULAR else 0.0
    return min(w_min / 8, 1.0 / (k + 3.0 / w_min))


def axial_spacing(cfg: ScenarioConfig) -> float:
    w = cfg.beam.sigma if cfg.beam.axis is Axis.PERPENDICULAR else cfg.beam.length
    k = abs(cfg.beam.momentum) / cfg.params.hbar if cfg.beam.axis is Axis.PARALLEL else 0.0
    return min(w / 5, 1.0 / (k + 3.0 / w))


def _axis_window(center: float, half: float, h: float, n: int | None) -> tuple:
    if n is None:
        lo = math.floor((center - half) / h) * h
        n = int(math.ceil((center + half - lo) / h))
        n = max(16, n + n % 2)
        return (lo, lo + n * h), n
    h = 2 * half / n
    mid = round(center / h) * h
    return (mid - 0.5 * n * h, mid + 0.5 * n * h), n


def frame_windows(cfg: ScenarioConfig, t: float) -> tuple[GridSpec, GridSpec]:
    """(x, y) and z grids that follow the packet at time t."""
    center = cf.classical_center(t, cfg.beam, cfg.params)
    wu, wv, wz = cf.packet_widths(t, cfg.beam, cfg.params)
    half_xy = SPAN * max(wu, wv)
    half_z = SPAN * wz
    counts = cfg.grid or (None, None, None)
    hx = transverse_spacing(cfg)
    hz = axial_spacing(cfg)
    ex, nx = _axis_window(center[0], half_xy, hx, counts[0])
    ey, ny = _axis_window(center[1], half_xy, hx, counts[1])
    ez, nz = _axis_window(center[2], half_z, hz, counts[2])
    return GridSpec((ex, ey), (nx, ny), ("x", "y")), GridSpec((ez,), (nz,), ("z",))


def _normalizer(beam: BeamParams) -> float:
    # the OAM state as printed has norm 1/sigma^2
    return beam.sigma if beam.oam == 1 else 1.0


# -- frame generation -------------------------------------------------------

def analytic_frames(cfg: ScenarioConfig, times=None):
    times = cfg.time.frame_times() if times is None else times
    scale = _normalizer(cfg.beam)
    for t in times:
        g_xy, g_z = frame_windows(cfg, t)
        terms = cf.separable_terms(cfg.beam, cfg.params, t, guard=cfg.guard)
        sep = sample_separable(terms, g_xy, g_z, t=t, scenario=cfg.scenario_id)
        yield sep.scaled(scale) if scale != 1.0 else sep


def _initial_terms(cfg: ScenarioConfig):
    return cf.separable_terms(cfg.beam, cfg.params, 0.0, guard=cfg.guard)


def quadrature_frames(cfg: ScenarioConfig, times=None):
    times = cfg.time.frame_times() if times is None else times
    scale = _normalizer(cfg.beam)
    g_xy0, g_z0 = frame_windows(cfg, 0.0)

    def initial(refine: int) -> SeparableField:
        g = GridSpec(g_xy0.extents, tuple(refine * n for n in g_xy0.counts), g_xy0.labels)
        return sample_separable(_initial_terms(cfg), g, g_z0, t=0.0, scenario=cfg.scenario_id).scaled(scale)

    inits = {1: initial(1)}
    for t in times:
        if t < cfg.guard:
            g_xy, g_z = frame_windows(cfg, t)
            yield sample_separable(_initial_terms(cfg), g_xy, g_z, t=t,
                                   scenario=cfg.scenario_id).scaled(scale)
            continue
        g_out = frame_windows(cfg, t)
        # far points on the orbit see a steep chirp; refine the source until it is resolved
        refine = input_refinement(inits[1], t, cfg.params, g_out[0])
        if refine not in inits:
            inits[refine] = initial(refine)
        out = propagate_quadrature(inits[refine], t, cfg.params, g_out)
        yield SeparableField(out.terms, t=t, scenario=cfg.scenario_id)


def splitstep_boxes(cfg: ScenarioConfig) -> tuple[GridSpec, GridSpec]:
    """Periodic boxes for the rotating-frame xy solver and the free z motion."""
    ts = _sample_times(cfg)
    w_xy = max(max(cf.packet_widths(t, cfg.beam, cfg.params)[:2]) for t in ts)
    radius = cfg.beam.radius if cfg.beam.axis is Axis.PERPENDICULAR else 0.0
    h = transverse_spacing(cfg)
    box_xy = orbit_box(radius, (w_xy, w_xy), h)
    hz = axial_spacing(cfg)
    wz = max(cf.packet_widths(t, cfg.beam, cfg.params)[2] for t in ts)
    zc = [cf.classical_center(t, cfg.beam, cfg.params)[2] for t in (0.0, cfg.time.t_max)]
    lo = min(zc) - 8 * wz
    n = int(math.ceil((max(zc) + 8 * wz - lo) / hz))
    n += n % 2
    lo = math.floor(lo / hz) * hz
    return box_xy, GridSpec(((lo, lo + n * hz),), (n,), ("z",))


def splitstep_frames(cfg: ScenarioConfig, times=None, solver_cfg: SolverConfig | None = None):
    times = sorted(cfg.time.frame_times() if times is None else times)
    scale = _normalizer(cfg.beam)
    box_xy, box_z = splitstep_boxes(cfg)
    init = sample_separable(_initial_terms(cfg), box_xy, box_z, t=0.0, scenario=cfg.scenario_id)
    if cfg.params.omega != 0:
        per_time = cfg.steps / (2 * math.pi / abs(cfg.params.omega))
    else:
        per_time = cfg.steps / cfg.time.t_max
    solver_cfg = solver_cfg or SolverConfig(steps=max(2, cfg.steps))
    solvers = [RotatingFrameSolver(a * scale, cfg.params, solver_cfg) for a, _ in init.terms]
    now = 0.0
    for t in times:
        dt = t - now
        if dt > 0:
            n = max(2, int(math.ceil(per_time * dt - 1e-9)))
            for s in solvers:
                s.advance(dt, n)
            now = t
        g_xy, g_z = frame_windows(cfg, t)
        terms = tuple((s.lab_field(g_xy), free_axial(b, t, cfg.params, g_z))
                      for s, (_, b) in zip(solvers, init.terms))
        yield SeparableField(terms, t=t, scenario=cfg.scenario_id)


def generate_frames(cfg: ScenarioConfig, times=None):
    gen = {RunMethod.ANALYTIC: analytic_frames, RunMethod.QUADRATURE: quadrature_frames,
           RunMethod.SPLITSTEP: splitstep_frames}[cfg.method]
    return gen(cfg, times)


# -- run directories --------------------------------------------------------

def _slices(frame: SeparableField, cfg: ScenarioConfig):
    """xy slice through the packet plane and xz slice through the packet centre."""
    center = cf.classical_center(frame.t, cfg.beam, cfg.params)
    xy = frame.slice_z(center[2])
    ys = frame.grid_xy.axis(1)
    j = int(np.argmin(np.abs(ys - center[1])))
    data = sum(np.multiply.outer(a.data[:, j], b.data) for a, b in frame.terms)
    g = GridSpec((frame.grid_xy.extents[0], frame.grid_z.extents[0]),
                 (frame.grid_xy.counts[0], frame.grid_z.counts[0]), ("x", "z"))
    xz = ComplexField(g, data, t=frame.t, scenario=frame.scenario)
    return (("xy", xy.meta["offset"], xy), ("xz", float(ys[j]), xz))


def derived_values(cfg: ScenarioConfig) -> dict:
    omega = cfg.params.omega
    return {"omega": omega, "tau": 2 * math.pi / abs(omega) if omega != 0 else None,
            "p": cfg.beam.momentum, "radius": cfg.beam.radius, "guard": cfg.guard}


def run_simulate(cfg: ScenarioConfig, out_dir) -> Path:
    """Compute every frame and write slices, heatmaps, frames and the manifest."""
    out = Path(out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    files = []
    for k, frame in enumerate(_guarded(generate_frames(cfg))):
        name = f"frames/frame_{k:03d}.npz"
        io.save_frame(out / name, frame)
        files.append(name)
        slices = _slices(frame, cfg)
        if cfg.outputs.get("slices", True):
            (out / "slices").mkdir(exist_ok=True)
            for plane, offset, fld in slices:
                stride = max(1, math.ceil(max(fld.grid.counts) / MAX_SLICE_POINTS))
                name = f"slices/frame_{k:03d}_{plane}.csv"
                io.write_slice_csv(out / name, fld, cfg.scenario_id, plane, offset, stride)
                files.append(name)
        if cfg.outputs.get("heatmaps", True):
            (out / "heatmaps").mkdir(exist_ok=True)
            _, _, xy = slices[0]
            for kind, img in (("abs2", io.intensity_image(xy)), ("re", io.real_part_image(xy))):
                name = f"heatmaps/frame_{k:03d}_xy_{kind}.ppm"
                io.write_ppm(out / name, img)
                files.append(name)
    io.write_manifest(out, cfg.raw, derived_values(cfg), files, __version__)
    if cfg.outputs.get("series", True) or cfg.outputs.get("report", True):
        run_diagnose(out)
    return out


def _guarded(frames):
    k = 0
    it = iter(frames)
    while True:
        try:
            frame = next(it)
        except StopIteration:
            return
        except VortexPropError as exc:
            raise type(exc)(f"frame {k}: {exc}") from exc
        yield frame
        k += 1


SERIES_COLUMNS = ("t", "norm", "cx", "cy", "cz", "wx", "wy", "wz", "wu", "wv", "Ly", "Lz",
                  "angle", "winding", "winding_margin", "alignment")


def _series_rows(series: dg.DiagnosticSeries):
    align = dg.alignment(series)
    for rec, ang, al in zip(series.records, series.angles, align):
        yield (rec.t, rec.norm, *rec.centroid, *rec.widths, *rec.larmor_widths, rec.Ly, rec.Lz,
               ang, rec.winding, rec.winding_margin, al)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def diagnose_frames(frames, cfg: ScenarioConfig) -> tuple[dg.DiagnosticSeries, dict]:
    """Series plus the summary report for a set of frames."""
    series = dg.build_series(frames, cfg.params, cfg.beam)
    params, beam = cfg.params, cfg.beam
    tau = 2 * math.pi / abs(params.omega) if params.omega != 0 else None
    report = {"format_version": io.FORMAT_VERSION, "scenario": cfg.scenario_id,
              "frames": len(series.records), "tau": tau}
    if beam.axis is Axis.PERPENDICULAR and beam.oam == 1:
        report["precession"] = _precession_entry(series, params, tau)
    windings = [r.winding for r in series.records]
    report["winding"] = {"values": sorted({w for w in windings if w is not None}),
                         "missing": sum(w is None for w in windings),
                         "min_margin": float(np.nanmin([r.winding_margin for r in series.records]))
                         if any(w is not None for w in windings) else None}
    try:
        br = dg.breathing_period(series.times, series.column("larmor_widths")[:, 0], params)
        br_lab = dg.breathing_period(series.times, series.column("widths")[:, 0], params)
        report["breathing"] = {"status": br.status, "period": br.period, "amplitude": br.amplitude,
                               "period_over_tau": br.period / tau if tau else None,
                               "lab_x_status": br_lab.status, "lab_x_period": br_lab.period}
    except InsufficientSamples as exc:
        report["breathing"] = {"status": "skipped", "reason": str(exc)}
    cons = dg.conservation_report(series, params, beam)
    report["conservation"] = {"norm_drift": cons.norm_drift, "lz_drift": cons.lz_drift,
                              "orbit_error": cons.orbit_error,
                              "orbit_error_fraction": cons.orbit_error_fraction}
    return series, report


def _precession_entry(series, params, tau) -> dict:
    entry = {}
    window = (0.05 * tau, 0.45 * tau) if tau else None
    try:
        pr = dg.precession_rate(series.times, series.angles, params, window=window)
        entry["window"] = list(window)
    except InsufficientSamples:
        try:
            pr = dg.precession_rate(series.times, series.angles, params)
            entry["window"] = [float(series.times.min()), float(series.times.max())]
        except InsufficientSamples as exc:
            return {"status": "skipped", "reason": str(exc)}
    entry.update({"status": "ok", "rate": pr.rate, "g_L": pr.g_factor, "residual": pr.residual,
                  "samples": pr.samples})
    return entry


def run_diagnose(run_dir) -> dict:
    """Recompute the diagnostic series from stored frames; writes series.csv,
    report.json and figures/*.png. Repeated calls give identical files."""
    run_dir = Path(run_dir)
    manifest = io.read_manifest(run_dir, check=True)
    frame_files = sorted(f for f in manifest["files"] if f.startswith("frames/"))
    if not frame_files:
        raise MissingFrames(f"manifest in {run_dir} lists no frames")
    cfg = build_config(manifest["config"])
    frames = [io.load_frame(run_dir / f) for f in frame_files]
    series, report = diagnose_frames(frames, cfg)
    with open(run_dir / "series.csv", "w") as fh:
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        for row in _series_rows(series):
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    io.write_json(run_dir / "report.json", report)
    from .plotting import render_figures
    render_figures(run_dir / "figures", series, cfg, frames)
    return report
