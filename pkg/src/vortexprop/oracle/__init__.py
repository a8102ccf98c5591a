"""Independent propagators used to cross-check the closed forms."""
from .classical import lorentz_orbit, orbit_residual
from .quadrature import propagate_quadrature
from .splitstep import (ConvergenceStudy, Method, RotatingFrameSolver, SolverConfig,
                        convergence_study, orbit_box, propagate_splitstep)

__all__ = [
    "ConvergenceStudy", "Method", "RotatingFrameSolver", "SolverConfig", "convergence_study",
    "lorentz_orbit", "orbit_box", "orbit_residual", "propagate_quadrature", "propagate_splitstep",
]
