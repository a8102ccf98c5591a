import math

import numpy as np
import pytest

from vortexprop import closed_form as cf
from vortexprop.errors import (AliasingDetected, CausticSingular, ConfigError, CostExceeded,
                               ResolutionTooCoarse, StepTooLarge)
from vortexprop.grid import GridSpec, expectation, relative_l2, sample, separable_expectation
from vortexprop.oracle import (lorentz_orbit, orbit_box, orbit_residual, propagate_quadrature,
                               propagate_splitstep)
from vortexprop.oracle.hamiltonian import adjudicate
from vortexprop.oracle.splitstep import RotatingFrameSolver, SolverConfig, convergence_study
from vortexprop.params import BeamParams, PhysicalParams, make_beam, period
from vortexprop.runner import build_config, splitstep_frames

P = PhysicalParams()
TAU = period(P)
B0 = make_beam(P, radius=8.0, oam=0)
B1 = make_beam(P, radius=8.0, oam=1)


def transverse(beam, t, grid, k=0):
    fxy = cf.separable_terms(beam, P, t)[k][0]
    return sample(lambda m: fxy(*m), grid)


def window(beam, t, n=128, half=6.0):
    c = cf.classical_center(t, beam, P)
    return GridSpec(((c[0] - half, c[0] + half), (c[1] - half - 2, c[1] + half + 2)), (n, n), ("x", "y"))


SOURCE = GridSpec(((-8.0, 8.0), (-11.0, 11.0)), (160, 200), ("x", "y"))


# -- quadrature ---------------------------------------------------------------

def test_quadrature_short_time_returns_input():
    g = GridSpec(((-6.0, 6.0), (-6.0, 6.0)), (256, 256), ("x", "y"))
    f0 = sample(lambda m: np.exp(-(m[0] ** 2 + m[1] ** 2) / 2 + 0.5j * m[1]), g)
    errs = [relative_l2(propagate_quadrature(f0, t, P, g), f0) for t in (0.2, 0.1)]
    assert errs[1] < 0.6 * errs[0] < 0.2
    assert propagate_quadrature(f0, 1e-9, P, g, guard=1e-6) is f0


def test_quadrature_refuses_unresolved_short_time():
    g = GridSpec(((-6.0, 6.0), (-6.0, 6.0)), (96, 96), ("x", "y"))
    f0 = sample(lambda m: np.exp(-(m[0] ** 2 + m[1] ** 2) / 2) + 0j, g)
    with pytest.raises(ResolutionTooCoarse):
        propagate_quadrature(f0, 1e-3, P, g)


def test_quadrature_matches_closed_form_transverse():
    t = 0.3 * TAU
    out = window(B0, t, 128)
    got = propagate_quadrature(transverse(B0, 0.0, SOURCE), t, P, out)
    assert relative_l2(got, transverse(B0, t, out)) < 1e-6


def test_quadrature_axial_is_free_spreading():
    g = GridSpec(((-12.0, 12.0),), (128,), ("z",))
    f0 = sample(lambda m: np.exp(-m[0] ** 2 / 2) + 0j, g)
    t = 1.4
    got = propagate_quadrature(f0, t, P, g)
    ref = sample(lambda m: np.exp(-m[0] ** 2 / (2 * (1 + 1j * t))) / np.sqrt(1 + 1j * t), g)
    assert relative_l2(got, ref) < 1e-10


def test_quadrature_refuses_caustic_and_budget():
    f0 = transverse(B0, 0.0, SOURCE)
    with pytest.raises(CausticSingular):
        propagate_quadrature(f0, TAU, P)
    g3 = GridSpec.cube(4.0, 32)
    dense = sample(lambda m: np.exp(-(m[0] ** 2 + m[1] ** 2 + m[2] ** 2) / 2 + 0.3j * m[0] * m[2] ** 2), g3)
    with pytest.raises(CostExceeded):
        propagate_quadrature(dense, 0.3 * TAU, P, budget=1e3)


# -- split-step ---------------------------------------------------------------

def test_solver_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(steps=1)
    with pytest.raises(ConfigError):
        SolverConfig(margin=0.6)


def test_free_control_matches_spreading_gaussian():
    p0 = PhysicalParams(field=0.0)
    beam = BeamParams(sigma=1.0, length=2.0, radius=0.0, momentum=1.0, oam=0)
    box = GridSpec(((-20.0, 20.0), (-20.0, 20.0)), (256, 256), ("x", "y"))
    f0 = sample(lambda m: cf.separable_terms(beam, p0, 0.0)[0][0](*m), box)
    out = propagate_splitstep(f0, 2.0, p0, SolverConfig(steps=256))
    ref = sample(lambda m: cf.separable_terms(beam, p0, 2.0)[0][0](*m), box)
    assert relative_l2(out, ref) < 1e-8


def test_ground_state_is_stationary():
    ell = math.sqrt(2.0)
    half = 12 * ell / math.sqrt(2)
    g = GridSpec(((-half, half), (-half, half)), (96, 96), ("x", "y"))
    f0 = sample(lambda m: np.exp(-(m[0] ** 2 + m[1] ** 2) / (2 * ell ** 2)) + 0j, g)
    out = propagate_splitstep(f0, TAU, P, SolverConfig(steps=256)).data
    phase = np.vdot(f0.data, out)
    assert relative_l2(out, phase / abs(phase) * f0.data) < 1e-8


@pytest.mark.parametrize("k", [0, 1])
def test_splitstep_matches_closed_form_psi1_terms(k):
    t = 0.3 * TAU
    box = orbit_box(B1.radius, (2.0, 2.0), 0.125)
    out = window(B1, t, 96)
    got = propagate_splitstep(transverse(B1, 0.0, box, k), t, P, SolverConfig(steps=512), out)
    assert relative_l2(got, transverse(B1, t, out, k)) < 1e-3


def test_quadrature_and_splitstep_agree():
    t = 0.3 * TAU
    box = orbit_box(B0.radius, (2.0, 2.0), 0.125)
    out = window(B0, t, 96)
    a = propagate_splitstep(transverse(B0, 0.0, box), t, P, SolverConfig(steps=1024), out)
    b = propagate_quadrature(transverse(B0, 0.0, SOURCE), t, P, out)
    assert relative_l2(a, b) < 1e-3


def test_convergence_is_second_order():
    box = orbit_box(B0.radius, (2.0, 2.0), 0.2)
    f0 = transverse(B0, 0.0, box)
    study = convergence_study(f0, 0.3 * TAU, P, [32, 64, 128, 256], SolverConfig(step_budget=1e-1))
    assert study.monotone
    for row in study.rows[1:]:
        assert 3.5 <= row.ratio <= 4.5
    assert study.order == pytest.approx(2.0, abs=0.15)
    with pytest.raises(ConfigError):
        convergence_study(f0, 1.0, P, [64, 32, 128])


def test_aliasing_and_step_guards():
    g = GridSpec(((-2.0, 2.0), (-2.0, 2.0)), (16, 16), ("x", "y"))
    sharp = sample(lambda m: np.exp(-(m[0] ** 2 + m[1] ** 2) / 0.02) + 0j, g)
    with pytest.raises(AliasingDetected):
        RotatingFrameSolver(sharp, P)
    box = orbit_box(B0.radius, (2.0, 2.0), 0.2)
    with pytest.raises(StepTooLarge):
        propagate_splitstep(transverse(B0, 0.0, box), TAU, P, SolverConfig(steps=2, step_budget=1e-6))


def test_parallel_oam_is_conserved():
    cfg = build_config({"scenario": "parallel", "method": "splitstep", "beam": {"oam": 1},
                        "time": {"frames": 4}})
    values = [separable_expectation(f, "Lz").value for f in splitstep_frames(cfg)]
    assert max(abs(v - values[0]) for v in values) < 1e-4


def test_parallel_psi0_matches_closed_form():
    beam = make_beam(P, momentum=2.0, axis="parallel", oam=0)
    t = 0.3 * TAU
    box = orbit_box(0.0, (1.0, 1.0), 0.125, pad=10.0)
    f0 = transverse(beam, 0.0, box)
    got = propagate_splitstep(f0, t, P, SolverConfig(steps=256))
    assert relative_l2(got, transverse(beam, t, box)) < 1e-3
    assert expectation(got, "Lz", check=False).value == pytest.approx(0.0, abs=1e-10)


# -- classical orbit and Hamiltonian -------------------------------------------

def test_lorentz_orbit_is_the_cyclotron_circle():
    ts = np.linspace(0, TAU, 33)
    orbit = lorentz_orbit(P, (0.0, 0.0, 0.0), (0.0, 8.0, 0.0), ts)
    ref = np.array([cf.classical_center(t, B0, P) for t in ts])
    assert np.abs(orbit - ref).max() < 1e-8
    assert np.linalg.norm(orbit - (-8.0, 0.0, 0.0), axis=1) == pytest.approx(np.full(33, 8.0), rel=1e-9)
    assert orbit_residual(ref, ts, P, (0.0, 0.0, 0.0), (0.0, 8.0, 0.0)) < 1e-8


def test_hamiltonian_adjudication():
    adj = adjudicate(P)
    assert adj.correct_residual < 1e-8
    assert adj.printed_residual > 1e-2
    assert adj.correct_matches and not adj.printed_matches
    assert {row[0] for row in adj.per_field} == {"gaussian", "vortex", "mixed"}
