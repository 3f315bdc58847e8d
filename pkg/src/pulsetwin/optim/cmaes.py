"""Covariance matrix adaptation evolution strategy with an ask-tell loop.

Implements the standard (mu/mu_w, lambda) update: weighted recombination,
cumulation paths for covariance and step-size, rank-one plus rank-mu
covariance update. Written against Hansen's reference equations; no
external optimizer package involved. Coordinates are the scaled [-1, 1]
parameter space, so spread=1 means the initial sampling std spans the
whole feasible box.
"""

from dataclasses import dataclass

import numpy as np

from .result import OptResult, iteration_record


@dataclass
class CmaesOptions:
    popsize: int | None = None
    maxfevals: int | None = None
    tolfun: float | None = None
    ftarget: float | None = None
    stop_at_convergence: int | None = None
    stop_at_sigma: float | None = None
    spread: float = 0.5
    init_point: bool = False

    def __post_init__(self):
        if not 0.0 < self.spread <= 1.0:
            raise ValueError("spread must lie in (0, 1]")
        if self.popsize is not None and self.popsize < 2:
            raise ValueError("popsize must be >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "CmaesOptions":
        return cls(**d)


class Cmaes:
    """Ask-tell CMA-ES state over R^N, seeded and fully reproducible."""

    def __init__(self, x0, options: CmaesOptions, seed=None):
        x0 = np.asarray(x0, dtype=np.float64)
        self.n = x0.size
        self.opts = options
        self.rng = np.random.default_rng(seed)
        self.xmean = x0.copy()
        self.x0 = x0.copy()
        self.sigma = float(options.spread)

        n = float(self.n)
        self.lam = options.popsize or 4 + int(3 * np.log(n))
        self.mu = self.lam // 2
        w = np.log((self.lam + 1) / 2.0) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights**2)
        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2.0 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.damps = 2 * self.mueff / self.lam + 0.3 + self.cs

        self.pc = np.zeros(self.n)
        self.ps = np.zeros(self.n)
        self.cov = np.eye(self.n)
        self.counteval = 0
        self.generation = 0
        self.best_x = x0.copy()
        self.best_f = np.inf
        self.termination = None
        self._pending = None
        self._prev_gen_best = None
        self._stall_generations = 0

    def _sampling_transform(self):
        # C = B diag(d^2) B^T; the sampler needs B diag(d), the step-size
        # path needs C^(-1/2).
        evals, basis = np.linalg.eigh(self.cov)
        evals = np.maximum(evals, 1e-20)
        d = np.sqrt(evals)
        return basis * d, (basis / d) @ basis.T

    def ask(self) -> list:
        """Sample the next generation; the first one may include x0 verbatim."""
        if self.termination is not None:
            raise RuntimeError(f"optimizer already terminated ({self.termination})")
        if self._pending is not None:
            raise RuntimeError("ask called twice without tell")
        bd, _ = self._sampling_transform()
        zs = self.rng.standard_normal((self.lam, self.n))
        xs = self.xmean[None, :] + self.sigma * zs @ bd.T
        if self.opts.init_point and self.generation == 0:
            xs[0] = self.x0
        self._pending = xs
        return [xs[i].copy() for i in range(self.lam)]

    def tell(self, fvals):
        """Rank the pending generation and update mean, paths, C and sigma."""
        if self._pending is None:
            raise RuntimeError("tell called without a pending ask")
        fvals = np.asarray(fvals, dtype=np.float64)
        if fvals.shape != (self.lam,):
            raise ValueError(f"expected {self.lam} objective values, got {fvals.shape}")
        xs = self._pending
        self._pending = None
        self.counteval += self.lam
        self.generation += 1

        order = np.argsort(fvals, kind="stable")
        gen_best = float(fvals[order[0]])
        improved = gen_best < self.best_f
        if improved:
            self.best_f = gen_best
            self.best_x = xs[order[0]].copy()
        self._stall_generations = 0 if improved else self._stall_generations + 1

        xold = self.xmean.copy()
        selected = xs[order[: self.mu]]
        self.xmean = self.weights @ selected
        y = (self.xmean - xold) / self.sigma

        _, inv_sqrt = self._sampling_transform()
        n = float(self.n)
        self.ps = (1 - self.cs) * self.ps + np.sqrt(self.cs * (2 - self.cs) * self.mueff) * (inv_sqrt @ y)
        hsig = float(
            np.sum(self.ps**2) / n / (1 - (1 - self.cs) ** (2 * self.counteval / self.lam)) < 2 + 4.0 / (n + 1)
        )
        self.pc = (1 - self.cc) * self.pc + hsig * np.sqrt(self.cc * (2 - self.cc) * self.mueff) * y

        art = (selected - xold[None, :]) / self.sigma
        rank_mu = art.T @ (self.weights[:, None] * art)
        self.cov = (
            (1 - self.c1 - self.cmu) * self.cov
            + self.c1 * (np.outer(self.pc, self.pc) + (1 - hsig) * self.cc * (2 - self.cc) * self.cov)
            + self.cmu * rank_mu
        )
        self.sigma *= np.exp(min(1.0, (self.cs / self.damps) * (np.sum(self.ps**2) / n - 1) / 2.0))

        self._check_termination(gen_best)
        return self.termination

    def _check_termination(self, gen_best: float):
        o = self.opts
        if o.ftarget is not None and self.best_f <= o.ftarget:
            self.termination = "ftarget"
        elif o.maxfevals is not None and self.counteval >= o.maxfevals:
            self.termination = "maxfevals"
        elif o.stop_at_sigma is not None and self.sigma < o.stop_at_sigma:
            self.termination = "stop_at_sigma"
        elif o.stop_at_convergence is not None and self._stall_generations >= o.stop_at_convergence:
            self.termination = "stop_at_convergence"
        elif o.tolfun is not None and self._prev_gen_best is not None:
            if abs(self._prev_gen_best - gen_best) < o.tolfun:
                self.termination = "tolfun"
        self._prev_gen_best = gen_best


def cmaes_ask(state: Cmaes) -> list:
    return state.ask()


def cmaes_tell(state: Cmaes, fvals):
    return state.tell(fvals)


def cmaes_minimize(f, x0, options: CmaesOptions, seed=None, logger=None,
                   phase: str = "cmaes", iter_offset: int = 0) -> OptResult:
    """Drive ask-tell to termination, recording every candidate."""
    o = options
    if all(v is None for v in (o.maxfevals, o.tolfun, o.ftarget, o.stop_at_convergence, o.stop_at_sigma)):
        raise ValueError("no termination criterion configured")
    es = Cmaes(x0, options, seed)
    history = []
    while es.termination is None:
        xs = es.ask()
        fvals = [float(f(x)) for x in xs]
        es.tell(fvals)
        record = iteration_record(
            iter_offset + es.generation, phase, es.counteval, xs, fvals, es.best_f, es.sigma
        )
        history.append(record)
        if logger is not None:
            logger.write(record)
    return OptResult(es.best_x, es.best_f, es.counteval, es.termination, history)
