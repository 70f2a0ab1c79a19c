"""Exact joints geometry, heavy-plane weights and factorisation certificates."""

from .errors import AuditError, ConvergenceError, DegenerateError, InputError, SaturationError
from .fields import GF, QQ, parse_field
from .geometry import Line, Subspace, canonical_line, line_through, span
from .joints import LineFamily, MultiFamily, apply_T, joint_summary, zhang_report
from .heavy import (
    DirectionWeights, build_S, find_heavy_chain, lightness_audit, main_estimate_ratio,
    verify_admissibility,
)
from .duality import (
    DiscreteInstance, diag_offdiag_constants, dual_value, inner_min, minimax_gap, primal_solve,
    reduce_to_q1, symmetrize_tables,
)
from .factorisation import (
    evaluate_g, factorise, line_closure, multijoint_factorise, verify_certificate, verify_multi,
)
from .radical import Radical

__version__ = "0.1.0"
