import math

import mpmath as mp
import numpy as np
import pytest

from vortexprop import closed_form as cf
from vortexprop.errors import ConfigError, TimeTooSmall
from vortexprop.grid import GridSpec, apply_Ly, norm, relative_l2, sample
from vortexprop.params import BeamParams, PhysicalParams, make_beam, period

P = PhysicalParams()
TAU = period(P)


def perp(oam=0, **kw):
    return make_beam(P, sigma=kw.get("sigma", 1.0), length=kw.get("length", 2.0),
                     radius=kw.get("radius", 8.0), oam=oam)


def par(oam=0):
    return make_beam(P, sigma=1.0, length=2.0, momentum=3.0, axis="parallel", oam=oam)


def _mp_coefficients(x, y, z, t, sigma, L, R, w):
    """Gaussian-integral coefficients at 30 digits, m = hbar = 1."""
    mp.mp.dps = 30
    x, y, z, t = map(mp.mpf, (x, y, z, t))
    cot = mp.cot(w * t / 2)
    a = 1j * w / 2
    N = (1 / (2 * mp.pi * 1j * t)) ** mp.mpf(1.5) * (w * t / 2) / mp.sin(w * t / 2) \
        / mp.sqrt(mp.pi * sigma ** 2 * mp.sqrt(mp.pi * L ** 2))
    ax = -a * cot * x - a * y
    ay = -a * cot * y + a * x + 1j * w * R
    az = -1j * z / t
    bx = 1 / (1 / mp.mpf(sigma) ** 2 - a * cot)
    by = 1 / (1 / mp.mpf(L) ** 2 - a * cot)
    bz = 1 / (1 / mp.mpf(sigma) ** 2 - 1j / t)
    pre = N * mp.sqrt(2 * mp.pi * bx) * mp.sqrt(2 * mp.pi * by) * mp.sqrt(2 * mp.pi * bz)
    expo = 1j * z ** 2 / (2 * t) + a / 2 * cot * (x ** 2 + y ** 2) \
        + (bx * ax ** 2 + by * ay ** 2 + bz * az ** 2) / 2
    out = dict(ax=ax, ay=ay, az=az, bx=bx, by=by, bz=bz, psi=pre * mp.exp(expo),
               bax=bx * ax, bay=by * ay, baz=bz * az)
    mp.mp.dps = 15
    return {k: complex(v) for k, v in out.items()}


# -- initial states -----------------------------------------------------------

def test_initial_value_at_origin():
    b = perp()
    expected = (math.pi * 1.0 * math.sqrt(math.pi * 4.0)) ** -0.5
    assert cf.initial_psi0_perp((0.0, 0.0, 0.0), b, P) == pytest.approx(expected)
    assert cf.initial_psi0_parallel((0.0, 0.0, 0.0), par(), P) == pytest.approx(expected)


def test_initial_psi1_node_and_substitution():
    b = perp(1, sigma=1.5)
    assert cf.initial_psi1((0.0, 2.3, 0.0), b, P) == 0
    psi0 = cf.initial_psi0_perp((1.5, 0.0, 0.0), b, P)
    assert cf.initial_psi1((1.5, 0.0, 0.0), b, P) == pytest.approx(-psi0 / 1.5)


def test_initial_parallel_depends_on_rho_only():
    b = par()
    chi = 0.7
    x, y, z = 0.6, -0.4, 0.3
    xr, yr = x * math.cos(chi) - y * math.sin(chi), x * math.sin(chi) + y * math.cos(chi)
    assert cf.initial_psi0_parallel((xr, yr, z), b, P) == pytest.approx(
        cf.initial_psi0_parallel((x, y, z), b, P), rel=1e-14)


def test_initial_norm_and_oam():
    g = GridSpec(((-6.0, 6.0), (-11.0, 11.0), (-6.0, 6.0)), (48, 88, 48))
    b = perp()
    f0 = sample(lambda m: cf.initial_psi0_perp(m, b, P), g)
    f1 = sample(lambda m: cf.initial_psi1(m, b, P), g)
    assert norm(f0) == pytest.approx(1.0, abs=1e-10)
    inner = np.abs(f0.data) > 1e-3 * np.abs(f0.data).max()
    assert np.abs(apply_Ly(f0).data[inner]).max() < 1e-2 * np.abs(f0.data).max()
    resid = apply_Ly(f1).data - f1.data
    assert np.abs(resid[inner]).max() < 1e-2 * np.abs(f1.data).max()


def test_vortex_coordinates():
    vc = cf.vortex_coordinates(np.array([-1.0, 0.0]), np.array([0.0, 2.0]))
    assert np.allclose(vc.rho, [1.0, 2.0])
    assert np.allclose(vc.theta, [0.0, math.pi / 2])


# -- coefficients -------------------------------------------------------------

def test_coefficients_match_high_precision_substitution():
    b = perp(radius=5.0)
    t = 0.3 * TAU
    r = (0.1, 0.2, 0.05)
    co = cf.coeffs_perp(r, t, b, P)
    ref = _mp_coefficients(*r, t, 1.0, 2.0, 5.0, 1.0)
    for name in ("ax", "ay", "az"):
        got = complex(getattr(co, f"alpha_{name[1]}"))
        assert got == pytest.approx(ref[name], rel=1e-12)
    for name in ("bx", "by", "bz"):
        assert complex(getattr(co, f"beta_{name[1]}")) == pytest.approx(ref[name], rel=1e-12)
    for got, key in zip(co.beta_alpha, ("bax", "bay", "baz")):
        assert complex(got) == pytest.approx(ref[key], rel=1e-10)
    assert complex(cf.psi0_perp(r, t, b, P)) == pytest.approx(ref["psi"], rel=1e-10)


def test_coefficients_at_half_period():
    b = perp()
    co = cf.coeffs_perp((0.3, -0.2, 0.0), TAU / 2, b, P)
    assert complex(co.beta_x) == pytest.approx(1.0, abs=1e-14)
    assert complex(co.beta_y) == pytest.approx(4.0, abs=1e-13)
    assert complex(co.alpha_z) == 0


def test_coefficients_reject_small_time():
    with pytest.raises(TimeTooSmall):
        cf.coeffs_perp((0.0, 0.0, 0.0), 1e-9, perp(), P)


def test_stable_products_finite_at_period():
    co = cf.coeffs_perp((0.5, 0.1, 0.2), TAU, perp(), P)
    assert np.isfinite(co.prefactor)
    assert all(np.isfinite(complex(v)) for v in co.beta_alpha)
    assert np.isfinite(complex(co.exponent))


# -- evolved states -----------------------------------------------------------

def test_psi0_unitary_at_03_tau():
    b = perp()
    t = 0.3 * TAU
    c = cf.classical_center(t, b, P)
    g = GridSpec(((c[0] - 9, c[0] + 9), (c[1] - 9, c[1] + 9), (-14.0, 14.0)), (96, 96, 96))
    f = sample(lambda m: cf.psi0_perp(m, t, b, P), g)
    assert norm(f) == pytest.approx(1.0, abs=1e-8)


def test_psi0_zero_field_is_free_gaussian():
    p0 = PhysicalParams(field=0.0)
    b = BeamParams(sigma=1.0, length=2.0, radius=0.0, momentum=1.5, oam=0)
    t = 1.3
    g = GridSpec(((-8.0, 8.0), (-8.0, 12.0), (-8.0, 8.0)), (32, 40, 32))

    def free(m):
        x, y, z = m

        def g1(c, w, k):
            s = 1 + 1j * t / w ** 2
            return (math.pi * w ** 2) ** -0.25 / np.sqrt(s) * np.exp(
                (-c ** 2 / (2 * w ** 2) + 1j * k * c - 0.5j * k ** 2 * t) / s)

        return g1(x, 1.0, 0.0) * g1(y, 2.0, 1.5) * g1(z, 1.0, 0.0)

    got = sample(lambda m: cf.psi0_perp(m, t, b, p0), g)
    assert relative_l2(got, sample(free, g)) < 1e-10


def test_small_time_limit_converges_linearly():
    b = perp(1)
    g = GridSpec(((-6.0, 6.0), (-9.0, 9.0), (-6.0, 6.0)), (24, 36, 24))
    start = sample(lambda m: cf.initial_psi1(m, b, P), g)
    errs = [relative_l2(sample(lambda m: cf.psi1_perp(m, e, b, P, guard=1e-12), g), start)
            for e in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] > 8 and errs[1] / errs[2] > 8


def test_below_guard_returns_initial_condition():
    b = perp(1)
    r = (0.3, 0.4, -0.2)
    assert cf.psi1_perp(r, 1e-9, b, P) == cf.initial_psi1(r, b, P)
    assert cf.prefactor_f(r, 0.0, b, P) == -0.3 - 0.2j


def test_prefactor_limits():
    b = perp(1)
    r = (0.3, 0.4, -0.2)
    assert complex(cf.prefactor_f(r, 1e-5, b, P)) == pytest.approx(-0.3 - 0.2j, abs=1e-4)
    # at half a period only y survives in the transverse part: i m omega sigma^2 y / 2 hbar
    f = complex(cf.prefactor_f((0.3, 0.4, 0.0), TAU / 2, b, P))
    assert f == pytest.approx(0.5j * 0.4, abs=1e-14)


@pytest.mark.parametrize("frac", [0.13, 0.25, 0.5, 0.77])
def test_psi1_vanishes_on_nodal_line(frac):
    b = perp(1)
    t = frac * TAU
    d = cf.nodal_line(t, P).direction
    c = cf.classical_center(t, b, P)
    for s in (-0.8, 0.3, 1.1):
        r = (s * d[0], s * d[1], 0.0)
        assert abs(cf.psi1_perp(r, t, b, P)) < 1e-13
    # the line passes through the classical centre too
    assert abs(c[0] * d[1] - c[1] * d[0]) < 1e-12 * max(1.0, np.linalg.norm(c))


def test_nodal_line_geometry():
    assert cf.nodal_line(0.0, P).direction == pytest.approx((0.0, -1.0))
    assert cf.nodal_line(TAU / 2, P).direction == pytest.approx((1.0, 0.0), abs=1e-15)
    d = cf.nodal_line(TAU / 4, P).direction
    assert d[1] == pytest.approx(-d[0])
    assert cf.nodal_line(TAU, P).angle - cf.nodal_line(0.0, P).angle == pytest.approx(math.pi)
    with pytest.raises(TimeTooSmall):
        cf.nodal_line(-1.0, P)


@pytest.mark.parametrize("n", [1, 2])
def test_caustic_crossing_is_finite_and_bounded(n):
    b = perp(1)
    r = (cf.classical_center(n * TAU, b, P) + np.array([0.3, -0.2, 0.1]))
    vals = [abs(cf.psi1_perp(r, n * TAU + e, b, P)) for e in (-1e-3, -1e-6, 0.0, 1e-6, 1e-3)]
    assert all(np.isfinite(vals))
    assert max(vals) - min(vals) < 1e-2


def test_branch_is_continuous_in_time():
    b = perp(0)
    ts = np.linspace(0.01, 2.2 * TAU, 900)
    vals = np.array([complex(cf.psi0_perp(cf.classical_center(t, b, P), t, b, P)) for t in ts])
    # smooth evolution turns the phase by < 0.6 rad per step here; a branch flip would add pi
    steps = np.abs(np.angle(vals[1:] / vals[:-1]))
    assert steps.max() < 1.5


def test_branch_agrees_with_unwinding():
    b = perp(0)
    for t in (0.4 * TAU, 1.3 * TAU, 1.9 * TAU):
        co = cf.coeffs_perp((0.0, 0.0, 0.0), t, b, P)
        closed = complex(cf.psi0_perp((0.0, 0.0, 0.0), t, b, P)) / complex(np.exp(co.exponent))
        assert closed == pytest.approx(cf.prefactor_by_unwinding(t, b, P), rel=1e-8)


def test_parallel_packet_centre_and_symmetry():
    b = par()
    t = 0.3 * TAU
    zs = np.linspace(-2, 6, 801)
    dens = np.abs(cf.psi0_parallel((np.zeros_like(zs), np.zeros_like(zs), zs), t, b, P)) ** 2
    assert zs[dens.argmax()] == pytest.approx(3.0 * t, abs=0.01)
    chi = 1.1
    x, y, z = 0.7, 0.2, 0.5
    xr, yr = x * math.cos(chi) - y * math.sin(chi), x * math.sin(chi) + y * math.cos(chi)
    assert cf.psi0_parallel((xr, yr, z), t, b, P) == pytest.approx(cf.psi0_parallel((x, y, z), t, b, P),
                                                                   rel=1e-13)


def test_parallel_oam_has_no_closed_form():
    with pytest.raises(ConfigError):
        cf.evolved_state(par(1), P)


def test_separable_terms_reassemble_closed_form():
    b = perp(1)
    t = 0.37 * TAU
    pts = (np.array([-1.0, -2.3, 0.4]), np.array([3.1, 5.2, 4.0]), np.array([0.2, -0.5, 0.9]))
    total = sum(fxy(pts[0], pts[1]) * fz(pts[2]) for fxy, fz in cf.separable_terms(b, P, t))
    assert np.allclose(total, cf.psi1_perp(pts, t, b, P), rtol=1e-13, atol=1e-16)


def test_widths_return_after_one_period():
    b = perp(0)
    for t in (0.2 * TAU, 0.55 * TAU):
        w0 = cf.packet_widths(t, b, P)
        w1 = cf.packet_widths(t + TAU, b, P)
        assert w1[0] == pytest.approx(w0[0], rel=1e-12)
        assert w1[1] == pytest.approx(w0[1], rel=1e-12)
