"""Symbol calculus and spectral trace expansions on flat tori.

The package predicts the small-t power expansion of tr(A f(tL)) for
classical operators A and real elliptic L on T^n (n = 2, 3), identifies the
constant term with the non-commutative residue (window functions) or the
canonical trace (plateau functions), and verifies the predictions against
exact lattice and dense-eigendecomposition oracles.
"""

__version__ = "0.1.0"

from .fourier import TorusFourierSeries
from .symbols import (CutoffSpec, EllipticOperator, HomogeneousSymbol,
                      PolyHomogeneousSymbol)
from .spheregrid import (SphereGrid, sphere_monomial_moment,
                         sphere_torus_integral, weighted_coefficient_integral)
from .calculus import adjoint_expansion, compose_expansion
from .parametrix import ResolventSymbol, build_parametrix, verify_parametrix
from .funcalc import FunctionalSymbolExpansion, fc_symbols
from .testfunctions import (TestFunction, bump, plateau, poly,
                            smoothstep_fall, smoothstep_rise)
from .traces import (canonical_trace, residue_density_integrated,
                     smoothing_trace)
from .expand import (ExpansionPrediction, FunctionalTermSum, mellin_moment,
                     predict_expansion_res, predict_expansion_tr,
                     reduce_trace_term, tr_integral_Et)
from .hs import (AlmostAnalyticExtension, HSIntegrator, HSQuadratureSpec,
                 cauchy_pompeiu_residual, matrix_function_eig,
                 matrix_function_hs, mellin_seminorm)
from .oracle import (OracleSeries, PowerFit, TruncatedOperatorOracle,
                     fit_powers, geometric_grid, matrix_trace,
                     multiplier_trace, verify_expansion)
from .config import ExperimentConfig

__all__ = [
    "TorusFourierSeries", "CutoffSpec", "EllipticOperator",
    "HomogeneousSymbol", "PolyHomogeneousSymbol", "SphereGrid",
    "sphere_monomial_moment", "sphere_torus_integral",
    "weighted_coefficient_integral", "adjoint_expansion", "compose_expansion",
    "ResolventSymbol", "build_parametrix", "verify_parametrix",
    "FunctionalSymbolExpansion", "fc_symbols", "TestFunction", "bump",
    "plateau", "poly", "smoothstep_fall", "smoothstep_rise",
    "canonical_trace", "residue_density_integrated", "smoothing_trace",
    "ExpansionPrediction", "FunctionalTermSum", "mellin_moment",
    "predict_expansion_res", "predict_expansion_tr", "reduce_trace_term",
    "tr_integral_Et", "AlmostAnalyticExtension", "HSIntegrator",
    "HSQuadratureSpec", "cauchy_pompeiu_residual", "matrix_function_eig",
    "matrix_function_hs", "mellin_seminorm", "OracleSeries", "PowerFit",
    "TruncatedOperatorOracle", "fit_powers", "geometric_grid", "matrix_trace",
    "multiplier_trace", "verify_expansion", "ExperimentConfig",
]
