"""Exact F_p toolkit: linear algebra, ECC instances, refutation checkers, games."""

from .errors import (
    BudgetExceeded,
    IllegalMove,
    InfeasibleParams,
    LinresError,
    MalformedProof,
    NeverReached,
    NotFound,
    NotUnsat,
    ParseError,
    PreconditionFailed,
    RetriesExhausted,
)
from .linalg import (
    AffinePoly,
    AffineSpan,
    Field,
    PartialAssignment,
    reduce_min_weight,
    restrict,
    rref,
    span_contains,
    truncated_span,
    weight,
)
from .instances import (
    EccInstance,
    LinearSystem,
    code_distance,
    gen_instance,
    load_instance,
    optimal_rate_check,
    save_instance,
    zero_one_image,
    zero_one_sat,
)

__version__ = "0.1.0"
