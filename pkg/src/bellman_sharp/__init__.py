"""Sharp Bellman function for the quadratically perturbed martingale transform."""
from .domain import (
    AuditFailure, BellmanError, ConvergenceError, DomainError, GridError,
    HypothesisError, Params, PointX, PointY, Region, RegionError, ShapeError,
    canonicalize, classify_region, to_x, to_y,
)
from .bellman import (
    BellmanValue, CharacteristicSolution, bellman_eval, bellman_p2,
    bellman_values, burkholder_relation_check, characteristic_u,
    evaluate_batch, explicit_value, g_fn, implicit_solve,
)

__version__ = "0.1.0"
