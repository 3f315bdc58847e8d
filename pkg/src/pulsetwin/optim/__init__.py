"""Optimization algorithms: CMA-ES, L-BFGS, finite differences, hybrid."""

from .cmaes import Cmaes, CmaesOptions, cmaes_ask, cmaes_minimize, cmaes_tell
from .gradients import fd_gradient
from .hybrid import cma_pre_lbfgs
from .lbfgs import lbfgs_minimize
from .result import JsonlLogger, OptResult, iteration_record

__all__ = [
    "Cmaes",
    "CmaesOptions",
    "cmaes_ask",
    "cmaes_tell",
    "cmaes_minimize",
    "lbfgs_minimize",
    "fd_gradient",
    "cma_pre_lbfgs",
    "OptResult",
    "JsonlLogger",
    "iteration_record",
]
