"""Two-phase optimizer: global CMA-ES exploration, then local L-BFGS polish.

The evolution strategy runs until one of its convergence criteria fires
(typically stop_at_convergence or stop_at_sigma), after which L-BFGS with
finite-difference gradients descends from the best point found. Histories
of both phases are concatenated with a phase marker so a single log tells
the whole story.
"""

import numpy as np

from .cmaes import CmaesOptions, cmaes_minimize
from .gradients import fd_gradient
from .lbfgs import lbfgs_minimize
from .result import OptResult


def cma_pre_lbfgs(f, x0, cmaes_options, lbfgs_options=None, seed=None,
                  logger=None) -> OptResult:
    """Global-then-local minimization of f starting at x0.

    cmaes_options: CmaesOptions or dict; lbfgs_options: {maxfun, eps}.
    n_evals counts raw objective calls in both phases, including the
    finite-difference probes.
    """
    if isinstance(cmaes_options, dict):
        cmaes_options = CmaesOptions.from_dict(cmaes_options)
    lbfgs_options = dict(lbfgs_options or {})
    maxfun = int(lbfgs_options.get("maxfun", 50))
    eps = float(lbfgs_options.get("eps", 1e-6))

    calls = {"n": 0}

    def counted(x):
        calls["n"] += 1
        return float(f(x))

    global_phase = cmaes_minimize(counted, x0, cmaes_options, seed=seed, logger=logger)
    cma_evals = calls["n"]

    local_phase = lbfgs_minimize(
        counted,
        lambda x: fd_gradient(counted, x, eps),
        global_phase.best_x,
        maxfun=maxfun,
        logger=logger,
        iter_offset=len(global_phase.history),
    )

    if local_phase.best_f <= global_phase.best_f:
        best_x, best_f = local_phase.best_x, local_phase.best_f
    else:
        best_x, best_f = global_phase.best_x, global_phase.best_f
    history = global_phase.history + local_phase.history
    # Rewrite the local phase's eval counters to run-cumulative numbers.
    for record in history[len(global_phase.history):]:
        record["fevals"] = cma_evals + record["fevals"]
    return OptResult(
        np.asarray(best_x),
        best_f,
        calls["n"],
        f"cmaes:{global_phase.termination}+lbfgs:{local_phase.termination}",
        history,
    )
