import math

import numpy as np
import pytest

from vortexprop import closed_form as cf
from vortexprop import diagnostics as dg
from vortexprop.errors import InsufficientSamples, NoNodeFound
from vortexprop.grid import GridSpec, sample
from vortexprop.params import PhysicalParams, make_beam, period
from vortexprop.runner import analytic_frames, build_config

P = PhysicalParams()
TAU = period(P)
B1 = make_beam(P, radius=8.0, oam=1)


def plane_slice(t, beam=B1, half=5.0, n=96):
    c = cf.classical_center(t, beam, P)
    g = GridSpec(((c[0] - half, c[0] + half), (c[1] - half, c[1] + half)), (n, n), ("x", "y"))
    fn = cf.evolved_state(beam, P)
    return sample(lambda m: fn((m[0], m[1], np.zeros_like(m[0])), t), g)


def test_nodal_fit_at_start_is_y_axis():
    fit = dg.fit_nodal_angle(plane_slice(1e-3 * TAU))
    # y axis: angle -pi/2 in [-pi/2, pi/2)
    assert abs(abs(fit.angle) - math.pi / 2) < 1e-2
    assert fit.depth < 1e-3


def test_nodal_fit_at_half_period_is_x_axis():
    fit = dg.fit_nodal_angle(plane_slice(TAU / 2))
    assert abs(fit.angle) < 1e-3


@pytest.mark.parametrize("frac", [0.1, 0.2, 0.35])
def test_nodal_fit_follows_closed_form(frac):
    t = frac * TAU
    fit = dg.fit_nodal_angle(plane_slice(t))
    expected = cf.nodal_line(t, P).angle
    diff = (fit.angle - expected + math.pi / 2) % math.pi - math.pi / 2
    assert abs(diff) < 1e-3


def test_nodal_fit_rejects_nodeless_field():
    b0 = make_beam(P, radius=8.0, oam=0)
    with pytest.raises(NoNodeFound):
        dg.fit_nodal_angle(plane_slice(0.2 * TAU, beam=b0))


def test_unwrap_lines():
    raw = [-1.4, 1.5, 1.2, np.nan, 0.8]
    out = dg.unwrap_lines(raw)
    assert out[1] == pytest.approx(1.5 - math.pi)
    assert np.isnan(out[3])
    assert out[4] == pytest.approx(0.8 - math.pi)


def test_precession_of_analytic_angles():
    times = np.linspace(0.05, 0.45, 17) * TAU
    angles = dg.unwrap_lines([dg.fit_nodal_angle(plane_slice(t)).angle for t in times])
    pr = dg.precession_rate(times, angles, P)
    assert pr.g_factor == pytest.approx(1.0, abs=0.01)
    assert pr.rate == pytest.approx(0.5, rel=5e-3)


def test_precession_flat_series_and_sample_guards():
    p0 = PhysicalParams(field=0.0)
    times = np.linspace(0, 4, 10)
    pr = dg.precession_rate(times, np.full(10, 0.3), p0)
    assert pr.rate == pytest.approx(0.0, abs=1e-14)
    assert math.isnan(pr.g_factor)
    with pytest.raises(InsufficientSamples):
        dg.precession_rate(times[:5], np.zeros(5), P)
    with pytest.raises(InsufficientSamples):
        dg.precession_rate(np.linspace(0, 0.1, 10), np.zeros(10), P)


def test_breathing_of_rotating_width():
    b0 = make_beam(P, radius=8.0, oam=0)
    times = np.linspace(0, 2 * TAU, 64, endpoint=False)
    widths = [cf.packet_widths(t, b0, P)[0] for t in times]
    br = dg.breathing_period(times, widths, P)
    assert br.status == "periodic"
    assert br.period == pytest.approx(TAU, rel=0.01)


def test_breathing_flat_for_matched_width():
    matched = make_beam(P, sigma=math.sqrt(2.0), length=math.sqrt(2.0), radius=8.0, oam=0)
    times = np.linspace(0, 2 * TAU, 64, endpoint=False)
    widths = [cf.packet_widths(t, matched, P)[0] for t in times]
    assert dg.breathing_period(times, widths, P).status == "flat"


def test_breathing_monotone_for_free_packet():
    p0 = PhysicalParams(field=0.0)
    b = make_beam(p0, radius=0.0, oam=0)
    times = np.linspace(0, 10, 40)
    widths = [cf.packet_widths(t, b, p0)[0] for t in times]
    assert dg.breathing_period(times, widths, p0).status == "monotone"
    with pytest.raises(InsufficientSamples):
        dg.breathing_period(times[:4], widths[:4], p0)
    with pytest.raises(InsufficientSamples):
        dg.breathing_period(np.linspace(0, TAU, 20), np.ones(20), P)


def test_series_and_conservation_for_analytic_run():
    cfg = build_config({"beam": {"oam": 0}, "time": {"frames": 8}})
    frames = list(analytic_frames(cfg))
    series = dg.build_series(frames, cfg.params, cfg.beam)
    assert np.all(np.diff(series.times) > 0)
    assert all(r.winding == 0 for r in series.records)
    rep = dg.conservation_report(series, cfg.params, cfg.beam)
    assert rep.norm_drift < 1e-8
    assert rep.lz_drift is None
    assert rep.orbit_error_fraction < 1e-3


def test_parallel_analytic_lz_is_conserved():
    cfg = build_config({"scenario": "parallel", "beam": {"oam": 0}, "time": {"frames": 8}})
    series = dg.build_series(list(analytic_frames(cfg)), cfg.params, cfg.beam)
    rep = dg.conservation_report(series, cfg.params, cfg.beam)
    assert rep.lz_drift < 1e-8
    assert rep.orbit_error is None
