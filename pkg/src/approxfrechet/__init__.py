"""Exact and approximate continuous Fréchet distance between polygonal chains."""

from .approxdecide import (
    DecisionOutcome,
    Failure,
    IntervalKey,
    Orientation,
    Success,
    approx_decide,
    cost_bound,
)
from .freespace import (
    ContractError,
    Correspondence,
    compose_correspondences,
    correspondence_cost,
    exact_correspondence,
    exact_decide,
    exact_frechet,
    exact_frechet_with_correspondence,
    segment_chain_decide,
)
from .geometry import Box, Chain, ParamRange, Segment, point_at
from .grid import GridSpec, box_of, choose_offsets, classify
from .optimize import (
    ApproxResult,
    SimplificationResult,
    approx_frechet,
    candidate_distances,
    nu_simplify,
    simplification_correspondence,
)

__all__ = [
    "ApproxResult",
    "Box",
    "Chain",
    "ContractError",
    "Correspondence",
    "DecisionOutcome",
    "Failure",
    "GridSpec",
    "IntervalKey",
    "Orientation",
    "ParamRange",
    "Segment",
    "SimplificationResult",
    "Success",
    "approx_decide",
    "approx_frechet",
    "box_of",
    "candidate_distances",
    "choose_offsets",
    "classify",
    "compose_correspondences",
    "correspondence_cost",
    "cost_bound",
    "exact_correspondence",
    "exact_decide",
    "exact_frechet",
    "exact_frechet_with_correspondence",
    "nu_simplify",
    "point_at",
    "segment_chain_decide",
    "simplification_correspondence",
]
