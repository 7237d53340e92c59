"""Sub-blocked coded computation: MDS and product codes against stragglers."""

from .mds import GeneratorMatrix, decode, encode, make_generator
from .product_code import CodedTaskGrid, ErasurePattern, build_grid, peel_decodable, peel_decode
from .scheduling import ScheduleOrder, make_order
from .simulator import LatencyModel, estimate_mean, simulate_trial

__all__ = [
    "GeneratorMatrix", "decode", "encode", "make_generator",
    "CodedTaskGrid", "ErasurePattern", "build_grid", "peel_decodable", "peel_decode",
    "ScheduleOrder", "make_order",
    "LatencyModel", "estimate_mean", "simulate_trial",
]
