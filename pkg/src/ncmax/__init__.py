"""Spectral Hardy–Littlewood maximal function on finite trace models."""

from .ingest import (DenseMatrix, GeneratorSpec, profile_from_matrix, profile_from_stepfn,
                     random_profile)
from .maximal import (MaximalEvaluation, classical_max_point, ma_grid_oracle, ma_operator,
                      ma_point, verify_16_bound)
from .rearrange import (CesaroCurve, SpectralProfile, StepFunction, cesaro, distribution,
                        integral_of_cesaro, integrate_mu, mu_from_distribution, mu_of_profile,
                        profile, split_at_value, submajorized_by_cesaro, submajorizes)
from .spaces import (NormResult, f_space_witness, least_concave_majorant,
                     lorentz_range_condition, norm_l1_cap_linf, norm_l1_plus_linf,
                     norm_lorentz, norm_lp, norm_lpq, norm_marcinkiewicz, phi_floor_condition,
                     psi_from_phi_inv)
from .suites import ReportDocument, emit_curve, run_example, run_suite

__version__ = "0.1.0"
