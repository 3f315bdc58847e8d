"""The three closed-loop stages: pulse optimization, device calibration,
and model learning.

Stage one minimizes average gate-set infidelity on the simulation model
with L-BFGS and finite differences. Stage two calibrates the same scaled
parameters against the blackbox device using the mean error population of
fixed random Clifford sequences as the loss, logging every evaluation
into a dataset. Stage three re-simulates selected dataset records while
varying model parameters and descends the resulting likelihood with the
CMA-ES-then-L-BFGS hybrid, recovering what the device actually is.
"""

from dataclasses import dataclass, field

import numpy as np

from .dataset import CalibrationRecord, Dataset
from .experiment import DEFAULT_STATE_LABELS
from .optim import CmaesOptions, cma_pre_lbfgs, cmaes_minimize, fd_gradient, lbfgs_minimize
from .rb import build_clifford_table, single_length_rb

#: Per-evaluation sequence batch for the calibration loss: enough
#: averaging to put the shot-noise floor near the tolfun setting.
ORBIT_DEFAULTS = {"rb_number": 20, "rb_length": 5, "shots": 1000, "target": 0}


def excited_population(pops, state_labels=DEFAULT_STATE_LABELS) -> float:
    excited = {s for group in state_labels for s in group}
    return float(sum(pops[s] for s in excited if s < len(pops)))


def orbit_loss(runner, params, opt_map, seqs, shots, recorder=None,
               pmap=None, state_labels=DEFAULT_STATE_LABELS) -> float:
    """Mean measured error population over the given sequences.

    runner is anything exposing run_sequences (the blackbox) or, for
    noise-free sanity checks, an Experiment; in the latter case exact
    populations stand in for measurement. When recorder and pmap are
    given, the evaluation is appended to the dataset with plain-unit
    parameter values.
    """
    if hasattr(runner, "run_sequences"):
        results, results_std = runner.run_sequences(params, opt_map, seqs, shots)
    else:
        runner.pmap.set_opt_map(opt_map)
        runner.pmap.set_vector(params)
        results = [excited_population(runner.simulate_sequence(s).pops, state_labels) for s in seqs]
        results_std = [1.0 / (2.0 * shots)] * len(seqs)
    if recorder is not None and pmap is not None:
        pmap.set_vector(params)
        recorder(
            CalibrationRecord(
                params=pmap.get_physical(),
                opt_map=[[list(a) for a in group] for group in pmap.opt_map],
                seqs=[list(s) for s in seqs],
                results=[float(r) for r in results],
                results_std=[float(s) for s in results_std],
                shots=[int(shots)] * len(seqs),
            )
        )
    return float(np.mean(results))


def run_optimal_control(exp, opt_map, maxfun: int = 150, logger=None,
                        subspace=(0, 1), eps: float = 1e-6):
    """Minimize average gate-set infidelity over the opt_map vector.

    Returns the OptResult; the experiment's parameters are left at the
    best point found. maxfun counts L-BFGS point evaluations, matching
    the usual bounded-call convention of quasi-Newton drivers.
    """
    exp.pmap.set_opt_map(opt_map)
    x0 = exp.pmap.get_vector()

    def objective(x):
        exp.pmap.set_vector(x)
        return exp.gateset_infidelity(subspace)

    result = lbfgs_minimize(
        objective,
        lambda x: fd_gradient(objective, x, eps),
        x0,
        maxfun=maxfun,
        logger=logger,
    )
    exp.pmap.set_vector(result.best_x)
    return result


def run_calibration(blackbox, pmap, options: CmaesOptions, seed,
                    orbit: dict | None = None, logger=None,
                    gateset_meta: dict | None = None,
                    state_labels=DEFAULT_STATE_LABELS):
    """Closed-loop calibration of pulse parameters against the blackbox.

    pmap is the nominal parameter map with the calibration opt_map set;
    its current vector (normally the stage-one result) seeds the search.
    Sequences are drawn once from the seed and reused for every
    evaluation, so the loss landscape is fixed up to shot noise and the
    dataset is coherent for model learning. Returns (OptResult, Dataset).
    """
    orbit = {**ORBIT_DEFAULTS, **(orbit or {})}
    ss = np.random.SeedSequence(seed)
    seq_seed, cma_seed = ss.spawn(2)
    seqs = single_length_rb(
        orbit["rb_number"], orbit["rb_length"], orbit["target"],
        np.random.default_rng(seq_seed),
    )
    opt_map = [[list(a) for a in group] for group in pmap.opt_map]
    ds = Dataset(
        metadata={
            "opt_map": opt_map,
            "seed": seed,
            "gateset": gateset_meta or {},
            "orbit": {k: orbit[k] for k in sorted(orbit)},
        }
    )

    def objective(x):
        return orbit_loss(
            blackbox, x, opt_map, seqs, orbit["shots"],
            recorder=ds.append, pmap=pmap, state_labels=state_labels,
        )

    result = cmaes_minimize(objective, pmap.get_vector(), options, seed=cma_seed, logger=logger)
    pmap.set_vector(result.best_x)
    return result, ds


def learning_loss(exp, records, beta, model_opt_map,
                  state_labels=DEFAULT_STATE_LABELS) -> float:
    """Likelihood-style distance between recorded and re-simulated results.

    f = (1/2N) sum over all sequence results of ((m - m_sim)/std)^2 - 1:
    zero residuals give -1/2, residuals at exactly one standard error
    give 0. beta writes the scaled model parameters; each record then
    restores its own pulse settings before re-simulation.
    """
    if not records:
        raise ValueError("no records selected")
    exp.pmap.set_opt_map(model_opt_map)
    exp.pmap.set_vector(beta)
    total = 0.0
    count = 0
    for rec in records:
        exp.pmap.set_opt_map(rec.opt_map)
        exp.pmap.set_physical(rec.params)
        for seq, m, std in zip(rec.seqs, rec.results, rec.results_std):
            if std <= 0.0:
                raise ValueError("record has non-positive results_std")
            m_sim = excited_population(exp.simulate_sequence(seq).pops, state_labels)
            total += ((m - m_sim) / std) ** 2 - 1.0
            count += 1
    return total / (2.0 * count)


def select_records(records, batch_size: int, sampling: str, rng=None) -> list:
    """Pick batch_size records by the configured strategy.

    high_std prefers the noisiest records (largest mean std, index
    breaking ties), even spreads uniformly over the run, random draws
    without replacement.
    """
    n = len(records)
    if n == 0:
        raise ValueError("empty dataset")
    k = min(batch_size, n)
    if sampling == "high_std":
        ranked = sorted(range(n), key=lambda i: (-records[i].mean_std(), i))
        idx = sorted(ranked[:k])
    elif sampling == "even":
        idx = sorted({int(round(i * (n - 1) / max(k - 1, 1))) for i in range(k)})
    elif sampling == "random":
        if rng is None:
            raise ValueError("random sampling needs an rng")
        idx = sorted(rng.choice(n, size=k, replace=False))
    else:
        raise ValueError(f"unknown sampling strategy {sampling!r}")
    return [records[i] for i in idx]


@dataclass
class LearningConfig:
    datafiles: dict
    batch_sizes: dict
    sampling: str = "high_std"
    state_labels: tuple = DEFAULT_STATE_LABELS
    algorithm: str = "cma_pre_lbfgs"
    cmaes_options: dict = field(default_factory=dict)
    lbfgs_options: dict = field(default_factory=dict)
    seed: int = 0


def run_model_learning(cfg: LearningConfig, exp, model_opt_map,
                       datasets: dict | None = None, logger=None):
    """Recover model parameters from calibration data.

    datasets may be preloaded {name: Dataset}; otherwise cfg.datafiles
    is read. Each objective evaluation re-simulates a batch of records
    per dataset (batch_sizes) under trial model parameters. Returns the
    OptResult in scaled coordinates; the experiment's model holds the
    learned values afterwards.
    """
    from .dataset import load_dataset

    if datasets is None:
        datasets = {name: load_dataset(path) for name, path in cfg.datafiles.items()}
    for name in cfg.batch_sizes:
        if name not in datasets:
            raise ValueError(f"batch_sizes names unknown dataset {name!r}")
    if not datasets or all(len(ds) == 0 for ds in datasets.values()):
        raise ValueError("no records to learn from")

    ss = np.random.SeedSequence(cfg.seed)
    sample_seed, opt_seed = ss.spawn(2)
    sample_rng = np.random.default_rng(sample_seed)

    exp.pmap.set_opt_map(model_opt_map)
    x0 = exp.pmap.get_vector()

    def objective(beta):
        batch = []
        for name, ds in sorted(datasets.items()):
            size = cfg.batch_sizes.get(name, len(ds.records))
            batch.extend(select_records(ds.records, size, cfg.sampling, sample_rng))
        return learning_loss(exp, batch, beta, model_opt_map, cfg.state_labels)

    if cfg.algorithm != "cma_pre_lbfgs":
        raise ValueError(f"unknown learning algorithm {cfg.algorithm!r}")
    result = cma_pre_lbfgs(
        objective, x0,
        cmaes_options=CmaesOptions.from_dict(cfg.cmaes_options) if cfg.cmaes_options else CmaesOptions(),
        lbfgs_options=cfg.lbfgs_options,
        seed=opt_seed,
        logger=logger,
    )
    exp.pmap.set_opt_map(model_opt_map)
    exp.pmap.set_vector(result.best_x)
    return result
