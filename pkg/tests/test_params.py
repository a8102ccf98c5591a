import math

import pytest

from vortexprop.errors import ConfigError, ZeroFrequency
from vortexprop.params import (Axis, BeamParams, PhysicalParams, TimeSpec, UnitSystem, cyclotron_frequency,
                               default_time_guard, desk_scenario, make_beam, orbit_momentum, period)

E_CHARGE = 1.602176634e-19
M_ELECTRON = 9.1093837015e-31
HBAR = 1.054571817e-34


def test_cyclotron_frequency_natural():
    assert cyclotron_frequency(PhysicalParams()) == 1.0
    assert cyclotron_frequency(PhysicalParams(field=0.0)) == 0.0


def test_cyclotron_frequency_si():
    p = PhysicalParams(mass=M_ELECTRON, charge=E_CHARGE, hbar=HBAR, field=1.0)
    assert cyclotron_frequency(p) == pytest.approx(1.7588e11, rel=1e-4)


def test_frequency_scaling():
    base = PhysicalParams(mass=2.0, field=3.0)
    assert PhysicalParams(mass=2.0, field=6.0).omega == pytest.approx(2 * base.omega)
    assert PhysicalParams(mass=4.0, field=3.0).omega == pytest.approx(base.omega / 2)
    assert PhysicalParams(field=-1.0).omega == -1.0


@pytest.mark.parametrize("m, field, radius, p", [(1, 1, 2, 2), (1, 1, 0, 0), (1, 0.5, 4, 2)])
def test_orbit_momentum(m, field, radius, p):
    assert orbit_momentum(PhysicalParams(mass=m, field=field), radius) == pytest.approx(p)


def test_orbit_momentum_rejects_negative_radius():
    with pytest.raises(ConfigError):
        orbit_momentum(PhysicalParams(), -1.0)


def test_period():
    assert period(PhysicalParams()) == pytest.approx(2 * math.pi)
    assert period(PhysicalParams(field=2 * math.pi)) == pytest.approx(1.0)
    with pytest.raises(ZeroFrequency):
        period(PhysicalParams(field=0.0))


@pytest.mark.parametrize("kwargs", [dict(mass=0.0), dict(hbar=-1.0), dict(field=math.inf)])
def test_physical_params_validation(kwargs):
    with pytest.raises(ConfigError):
        PhysicalParams(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(sigma=0), dict(length=-1), dict(radius=-1), dict(oam=2)])
def test_beam_validation(kwargs):
    with pytest.raises(ConfigError):
        BeamParams(**kwargs)


def test_make_beam_fills_momentum():
    p = PhysicalParams(field=0.5)
    beam = make_beam(p, radius=4.0)
    assert beam.momentum == pytest.approx(2.0)
    beam.check_consistent(p)
    back = make_beam(p, momentum=2.0)
    assert back.radius == pytest.approx(4.0)


def test_inconsistent_perpendicular_beam():
    with pytest.raises(ConfigError):
        BeamParams(radius=8.0, momentum=3.0).check_consistent(PhysicalParams())


def test_axis_parse():
    assert Axis.parse("perp") is Axis.PERPENDICULAR
    assert Axis.parse("Parallel") is Axis.PARALLEL
    with pytest.raises(ConfigError):
        Axis.parse("diagonal")


def test_time_spec():
    ts = TimeSpec(t_max=2.0, frame_count=4)
    assert ts.frame_times() == [0.0, 0.5, 1.0, 1.5]
    with pytest.raises(ConfigError):
        TimeSpec(t_max=0.0)
    with pytest.raises(ConfigError):
        TimeSpec(t_max=1.0, frame_count=0)
    with pytest.raises(ConfigError):
        TimeSpec(t_max=1.0, t_min_guard=0.0)


def test_default_guard():
    assert default_time_guard(PhysicalParams()) == pytest.approx(2e-6 * math.pi)
    assert default_time_guard(PhysicalParams(field=0.0), BeamParams(sigma=2.0)) == pytest.approx(4e-6)


def test_si_round_trip():
    p = PhysicalParams(mass=M_ELECTRON, charge=-E_CHARGE, hbar=HBAR, field=0.37)
    beam = make_beam(PhysicalParams(mass=M_ELECTRON, charge=E_CHARGE, hbar=HBAR, field=0.37),
                     sigma=3e-8, length=6e-8, radius=2.4e-7)
    units = UnitSystem.natural_for(p)
    nat, nbeam = units.to_natural(p, beam)
    assert nat.mass == pytest.approx(1.0) and nat.hbar == pytest.approx(1.0)
    assert abs(nat.omega) == pytest.approx(1.0)
    si, sbeam = units.from_natural(nat, nbeam)
    for a, b in [(si.mass, p.mass), (si.charge, p.charge), (si.hbar, p.hbar), (si.field, p.field),
                 (sbeam.sigma, beam.sigma), (sbeam.radius, beam.radius), (sbeam.momentum, beam.momentum)]:
        assert a == pytest.approx(b, rel=1e-12)


def test_desk_scenario():
    params, beam = desk_scenario()
    assert (beam.sigma, beam.length, beam.radius, beam.momentum) == (1.0, 2.0, 8.0, 8.0)
    _, par = desk_scenario(axis="parallel")
    assert par.axis is Axis.PARALLEL and par.momentum == 2.0
