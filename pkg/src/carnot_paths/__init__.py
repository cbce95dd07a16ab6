"""Geodesics and path-space topology for step-two Carnot groups."""
import os as _os

# CARNOT_THREADS caps BLAS worker threads; it must be applied before numpy loads
if _os.environ.get("CARNOT_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["CARNOT_THREADS"])

from .census import (CensusReport, CriticalManifold, base_energy, enumerate_l1,  # noqa: E402
                     enumerate_l2, growth_diagnostics, manifold_index, morse_bott_polynomial,
                     torus_rank_check)
from .coarea import LambdaCurves, slope_check, tau_commuting, tau_numeric  # noqa: E402
from .core import (CarnotStructure, GenericityReport, SkewSpectrum, genericity_scan,  # noqa: E402
                   heisenberg, omega_matrix, skew_spectrum, validate_structure)
from .endpoint import (Control, EndPoint, ExponentialControl, endpoint_ode,  # noqa: E402
                       endpoint_quadratic, energy, shoot, solve_endpoint)
from .topology import (ArcSet, BettiTable, IndexProfile, betti_from_profile,  # noqa: E402
                       index_profile_analytic, index_profile_finite, relative_betti,
                       sublevel_arcs, total_betti_via_maxima)

__all__ = [
    "ArcSet", "BettiTable", "CarnotStructure", "CensusReport", "Control", "CriticalManifold",
    "EndPoint", "ExponentialControl", "GenericityReport", "IndexProfile", "LambdaCurves",
    "SkewSpectrum", "base_energy", "betti_from_profile", "endpoint_ode",
    "endpoint_quadratic", "energy", "enumerate_l1", "enumerate_l2", "genericity_scan",
    "growth_diagnostics", "heisenberg", "index_profile_analytic", "index_profile_finite",
    "manifold_index", "morse_bott_polynomial", "omega_matrix", "relative_betti", "shoot",
    "skew_spectrum", "slope_check", "solve_endpoint", "sublevel_arcs", "tau_commuting",
    "tau_numeric", "torus_rank_check", "total_betti_via_maxima", "validate_structure",
]
