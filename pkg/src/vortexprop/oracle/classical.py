"""Classical cyclotron orbits, integrated numerically as an Ehrenfest reference."""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from ..params import PhysicalParams


def lorentz_orbit(params: PhysicalParams, r0, v0, times, rtol: float = 1e-11, atol: float = 1e-12):
    """Positions at ``times`` for an electron (charge -e) in the field B z-hat.

    m r'' = -e r' x B, i.e. x'' = -omega y', y'' = omega x'.
    """
    omega = params.omega

    def rhs(_, s):
        x, y, z, vx, vy, vz = s
        return [vx, vy, vz, -omega * vy, omega * vx, 0.0]

    times = np.asarray(times, dtype=float)
    state0 = np.concatenate([np.asarray(r0, float), np.asarray(v0, float)])
    sol = solve_ivp(rhs, (0.0, float(times.max()) if times.size else 0.0), state0, t_eval=times,
                    method="DOP853", rtol=rtol, atol=atol)
    return sol.y[:3].T


def orbit_residual(centroids, times, params: PhysicalParams, r0, v0) -> float:
    """Largest distance between measured centroids and the integrated orbit."""
    ref = lorentz_orbit(params, r0, v0, times)
    return float(np.max(np.linalg.norm(np.asarray(centroids) - ref, axis=1)))
