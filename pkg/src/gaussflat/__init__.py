"""Differential geometry of graphs of degenerate convex functions.

Fields, curvature reports, rulings of ``det D^2u = 0`` solutions, and
decay-based rigidity verdicts.
"""

from .affinity import (
    RulingError,
    RulingSegment,
    affinity_check,
    euclidean_combination_identity,
    flatness_residuals,
    hessian_kernel,
    htilde_second_derivative,
    htilde_terms,
    lemma_report,
    trace_ruling,
)
from .corpus import corpus_by_name
from .curvature import (
    causal_type,
    curvature_report,
    laplacian,
    ma_residual,
    principal_curvatures,
    quantity_values,
)
from .expr import ParseError, parse_expression
from .field import (
    AffineSubspace,
    DomainError,
    EvaluationError,
    GridSpec,
    directional_jet,
    fd_crosscheck,
    grid_field,
    jet2_at,
    mixed_directional,
    parse_field,
    read_grid_csv,
    sample_grid,
    write_grid_csv,
)
from .rigidity import (
    decay_profile,
    developability_scan,
    evaluate_witness,
    rigidity_verdict,
    sphere_sup,
    timelike_scan,
)
from .tolerances import Tolerances

__all__ = [name for name in dir() if not name.startswith("_")]
