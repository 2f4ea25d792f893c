"""Renormalized perturbation determinants and low-regularity conservation
laws for KdV, NLS and mKdV-type flows on the torus."""

from .alpha import (AlphaReport, DReport, FallacyResult, alpha_akns, alpha_kdv_det2,
                    alpha_kdv_series, d_diagnostic, det2_log, fallacy_log_det, kappa_gate)
from .errors import (BlowUpError, ConfigurationError, ConsistencyError, DivergenceError,
                     DomainError, PertdetError)
from .evolution import FlowSpec, Trajectory, classical_invariants, evolve, reflect_for_reversal
from .norms import (NormSpec, WeightKind, besov_norm, surrogate_norm, weight, weighted_form,
                    xy_norm, xy_surrogate)
from .operators import (SandwichMatrix, akns_trace, build_akns_block, build_sandwich,
                        hs_closed_form, operator_hs_squared, perturbed_sandwich, trace_power)
from .spectral import (FourierField, TorusGrid, analyze, derivative, multiply, sobolev_norm,
                       synthesize)

__version__ = "0.1.0"
