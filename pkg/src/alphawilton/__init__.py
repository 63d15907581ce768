"""alpha-continued fractions, their Wilton functions, matching and entropy."""
from ._accel import HAVE_NUMBA, USE_NUMBA
from .alpha_cf import (AlphaParam, OrbitTerminated, orbit, contraction_rate, contraction_regime,
                       folded_step, unfolded_step, unfolded_expansion, semiconjugacy_check)
from .entropy import constancy_report, entropy_estimate, invariant_histogram
from .exact import INF, DomainError, Mat2, rcf_expansions
from .matching import (MatchingData, NoMatch, exceptional_check_bounded, exponents_from_pseudocenter,
                       find_matching_exponents, local_form, pseudocenter_check)
from .singularity import NotTypeA, average_probe, bmo_witness, classify, probe_pattern
from .sync import NoStateMatch, diff_series_25, h_B_to_D, monitors, supnorm_scan, sync_trace, validate_trace
from .wilton import (brjuno_eval, grid_emit, integral_near_zero, q_series_eval, wilton_condition_diag,
                     wilton_eval, wilton_many, wilton_partial, wilton_unfolded)

__version__ = "0.1.0"
