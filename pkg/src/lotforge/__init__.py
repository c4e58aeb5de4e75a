"""Exact-rational solver suite for non-uniform capacitated multi-item lot sizing."""

from .instance import (CmilsInstance, FractionalSolution, OrderSchedule,
                       gen_kc_gap, gen_random, load, save)
from .cmils_master import CoveringCut, PipelineResult, run_pipeline

__all__ = [
    "CmilsInstance",
    "FractionalSolution",
    "OrderSchedule",
    "CoveringCut",
    "PipelineResult",
    "gen_kc_gap",
    "gen_random",
    "load",
    "save",
    "run_pipeline",
]
