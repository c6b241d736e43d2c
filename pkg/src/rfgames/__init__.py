"""Reaction-function games: fixed points, equilibria and investment games."""
from .core import StrategicGame, best_replies, maxmin, nash_equilibria, pareto_dominates, pareto_frontier
from .errors import RFGError
from .reaction import (
    NO_FIXED_POINT,
    Profile,
    ReactionFunction,
    construct_isolation,
    construct_promise_threat,
    construct_sequential,
    fixed_point_report,
    is_rfe,
    is_supported,
)

__version__ = "0.1.0"
