"""Compare expanded forms of the minimal-coupling Hamiltonian on test fields.

For a charge q in the symmetric gauge A = (B/2)(-y, x, 0),

    (P - qA)^2/2m = P^2/2m - (qB/2m) L_z + kappa (q B)^2/m (x^2 + y^2)

holds with kappa = 1/8. The reference application builds the kinetic
momenta P - qA explicitly and differentiates spectrally, so agreement to
rounding identifies the correct kappa.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grid import ComplexField, GridSpec, relative_l2
from ..params import PhysicalParams

CORRECT_KAPPA = 1.0 / 8.0
PRINTED_KAPPA = 1.0 / 2.0


def _spectral_derivative(data: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    k = 2 * np.pi * np.fft.fftfreq(grid.counts[axis], grid.spacing[axis])
    shape = [1] * data.ndim
    shape[axis] = -1
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(data, axis=axis), axis=axis)


def minimal_coupling(field: ComplexField, params: PhysicalParams, charge: float) -> np.ndarray:
    """(P - qA)^2/2m psi with each kinetic momentum applied in turn."""
    g = field.grid
    x, y = g.mesh()
    hbar, m, B = params.hbar, params.mass, params.field
    qa_x, qa_y = -0.5 * charge * B * y, 0.5 * charge * B * x

    def pi_x(a):
        return -1j * hbar * _spectral_derivative(a, g, 0) - qa_x * a

    def pi_y(a):
        return -1j * hbar * _spectral_derivative(a, g, 1) - qa_y * a

    psi = field.data
    return (pi_x(pi_x(psi)) + pi_y(pi_y(psi))) / (2 * m)


def expanded(field: ComplexField, params: PhysicalParams, charge: float, kappa: float) -> np.ndarray:
    g = field.grid
    x, y = g.mesh()
    hbar, m, B = params.hbar, params.mass, params.field
    psi = field.data
    dx, dy = _spectral_derivative(psi, g, 0), _spectral_derivative(psi, g, 1)
    dxx = _spectral_derivative(dx, g, 0)
    dyy = _spectral_derivative(dy, g, 1)
    kinetic = -hbar ** 2 * (dxx + dyy) / (2 * m)
    lz = -1j * hbar * (x * dy - y * dx)
    return kinetic - charge * B / (2 * m) * lz + kappa * (charge * B) ** 2 / m * (x ** 2 + y ** 2) * psi


@dataclass(frozen=True)
class Adjudication:
    correct_residual: float     # kappa = 1/8
    printed_residual: float     # kappa = 1/2
    per_field: tuple            # (name, correct, printed)

    @property
    def correct_matches(self) -> bool:
        return self.correct_residual <= 1e-8

    @property
    def printed_matches(self) -> bool:
        return self.printed_residual <= 1e-8


def probe_fields(grid: GridSpec) -> list:
    """Deterministic smooth fields: a moving Gaussian, a vortex and an off-centre mix."""
    x, y = grid.mesh()
    g0 = np.exp(-(x ** 2 + y ** 2) / 2)
    fields = [
        ("gaussian", g0 * np.exp(1.5j * y)),
        ("vortex", (x + 1j * y) * g0),
        ("mixed", np.exp(-((x - 1.0) ** 2) / 1.5 - ((y + 0.5) ** 2) / 0.8) * np.exp(0.7j * x - 0.4j * y)
         + 0.3 * (x - 1j * y) ** 2 * g0),
    ]
    return [(name, ComplexField(grid, data)) for name, data in fields]


def adjudicate(params: PhysicalParams, charge: float | None = None, grid: GridSpec | None = None) -> Adjudication:
    """Residuals of both expansions against the explicit minimal-coupling form."""
    if grid is None:
        grid = GridSpec(((-12.0, 12.0), (-12.0, 12.0)), (128, 128), ("x", "y"))
    q = params.charge if charge is None else charge
    rows = []
    for name, f in probe_fields(grid):
        ref = minimal_coupling(f, params, q)
        rows.append((name, relative_l2(expanded(f, params, q, CORRECT_KAPPA), ref),
                     relative_l2(expanded(f, params, q, PRINTED_KAPPA), ref)))
    return Adjudication(max(r[1] for r in rows), max(r[2] for r in rows), tuple(rows))
