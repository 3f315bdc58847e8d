"""Command-line front-end: run the three stages or simulate sequences.

`run --stage c1|c2|c3|all` executes pulse optimization, blackbox
calibration and model learning, chaining through artifacts in the output
directory (stage-one parameters, the calibration dataset). `simulate`
prints populations for sequences from a JSON file. Exit codes: 0 on
success, 1 on runtime or numeric failure, 2 on usage and config errors.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, build_blackbox, build_experiment, load_config
from .dataset import load_dataset, save_dataset
from .optim import CmaesOptions, JsonlLogger
from .report import export_convergence, export_learning_trajectory
from .workflows import LearningConfig, run_calibration, run_model_learning, run_optimal_control


def stage_seeds(master: int) -> dict:
    """Independent per-component seeds derived from the master seed."""
    state = np.random.SeedSequence(master).generate_state(4)
    return {
        "blackbox": int(state[0]),
        "calibration": int(state[1]),
        "learning": int(state[2]),
    }


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _params_doc(pmap, result) -> dict:
    return {
        "scaled": [float(v) for v in result.best_x],
        "physical": pmap.get_physical(),
        "best_f": float(result.best_f),
        "n_evals": int(result.n_evals),
        "termination": result.termination,
    }


def cmd_c1(cfg: dict, out: Path, threads: int = 1) -> int:
    exp = build_experiment(cfg, threads)
    oc = cfg.get("optimal_control", {})
    with JsonlLogger(out / "c1_log.jsonl") as log:
        result = run_optimal_control(
            exp, cfg["opt_map"],
            maxfun=oc.get("maxfun", 150), eps=oc.get("eps", 1e-6), logger=log,
        )
    _write_json(out / "c1_params.json", _params_doc(exp.pmap, result))
    export_convergence(
        result.history, out / "c1_convergence.csv", out / "c1_convergence.png",
        "pulse optimization", "avg gate-set infidelity",
    )
    print(f"c1: final average gate-set infidelity {result.best_f:.3e} "
          f"({result.n_evals} evaluations, {result.termination})")
    return 0


def cmd_c2(cfg: dict, out: Path, threads: int = 1) -> int:
    exp = build_experiment(cfg, threads)
    seeds = stage_seeds(cfg["seed"])
    bb = build_blackbox(cfg, exp, seed=seeds["blackbox"])
    c1_file = out / "c1_params.json"
    if c1_file.exists():
        with open(c1_file) as fh:
            exp.pmap.set_vector(json.load(fh)["scaled"])
    else:
        print("c2: no stage-one parameters found, starting from defaults")
    cal = dict(cfg.get("calibration", {}))
    orbit = cal.pop("orbit", None)
    options = CmaesOptions.from_dict(
        {"popsize": 10, "maxfevals": 300, "tolfun": 0.01, "spread": 0.1,
         "init_point": True, **cal}
    )
    initial = None
    with JsonlLogger(out / "c2_log.jsonl") as log:
        result, ds = run_calibration(
            bb, exp.pmap, options, seed=seeds["calibration"], orbit=orbit,
            logger=log, gateset_meta=cfg.get("gateset", {}),
        )
    save_dataset(out / "dataset.json", ds)
    _write_json(out / "c2_params.json", _params_doc(exp.pmap, result))
    export_convergence(
        result.history, out / "c2_generations.csv", out / "c2_generations.png",
        "closed-loop calibration", "mean error population",
    )
    if ds.records:
        initial = float(np.mean(ds.records[0].results))
    print(f"c2: best loss {result.best_f:.4f} from initial {initial:.4f} "
          f"({result.n_evals} evaluations, {result.termination})")
    return 0


def cmd_c3(cfg: dict, out: Path, threads: int = 1) -> int:
    if "model_learning" not in cfg:
        raise ConfigError("config has no model_learning section")
    ml = cfg["model_learning"]
    datafiles = ml.get("datafiles", {"orbit": str(out / "dataset.json")})
    datasets = {}
    for name, path in datafiles.items():
        if not Path(path).exists():
            raise ConfigError(f"dataset {name!r} not found at {path}")
        datasets[name] = load_dataset(path)
    exp = build_experiment(cfg, threads)
    seeds = stage_seeds(cfg["seed"])
    lcfg = LearningConfig(
        datafiles=datafiles,
        batch_sizes=ml.get("batch_sizes", {name: 2 for name in datafiles}),
        sampling=ml.get("sampling", "high_std"),
        state_labels=tuple(tuple(g) for g in ml.get("state_labels", [[1], [2]])),
        algorithm=ml.get("algorithm", "cma_pre_lbfgs"),
        cmaes_options=ml.get("cmaes", {}),
        lbfgs_options=ml.get("lbfgs", {}),
        seed=seeds["learning"],
    )
    with JsonlLogger(out / "c3_log.jsonl") as log:
        result = run_model_learning(lcfg, exp, ml["opt_map"], datasets=datasets, logger=log)
    exp.pmap.set_opt_map(ml["opt_map"])
    learned = exp.pmap.get_physical()
    address = tuple(ml["opt_map"][0][0])
    quantity = exp.pmap.resolve(address)
    truth = None
    for entry in cfg.get("blackbox", {}).get("overrides", []):
        if (entry["qubit"], entry["param"]) == address:
            truth = entry["value"]
    export_learning_trajectory(
        result.history, quantity, "-".join(address),
        out / "c3_trajectory.csv", out / "c3_trajectory.png", truth=truth,
    )
    _write_json(out / "c3_result.json", {
        "learned": learned,
        "opt_map": ml["opt_map"],
        "best_f": float(result.best_f),
        "n_evals": int(result.n_evals),
        "termination": result.termination,
    })
    line = f"c3: learned {'-'.join(address)} = {quantity!r} ({result.n_evals} evaluations)"
    if truth is not None:
        line += f", true value {truth:g}"
    print(line)
    return 0


def cmd_simulate(cfg: dict, sequence_file: str, threads: int = 1) -> int:
    try:
        with open(sequence_file) as fh:
            seqs = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"sequence file not found: {sequence_file}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"sequence file is not valid JSON: {err}") from err
    if not isinstance(seqs, list) or not all(isinstance(s, list) for s in seqs):
        raise ConfigError("sequence file must hold a JSON list of gate-name lists")
    exp = build_experiment(cfg, threads)
    for seq in seqs:
        for name in seq:
            if name not in exp.instructions:
                raise ConfigError(f"unknown gate name {name!r}")
    out = []
    for seq in seqs:
        pops = exp.simulate_sequence(seq)
        out.append({"gates": list(seq), "pops": [float(p) for p in pops.pops]})
    print(json.dumps(out, indent=1))
    return 0


STAGES = {"c1": cmd_c1, "c2": cmd_c2, "c3": cmd_c3}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pulsetwin",
        description="Pulse optimization, device calibration and model learning "
                    "for a simulated superconducting qubit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute calibration stages")
    run_p.add_argument("--config", required=True, help="run configuration JSON")
    run_p.add_argument("--stage", choices=["c1", "c2", "c3", "all"], default="all")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--threads", type=int, default=1, help="worker threads for propagation")
    run_p.add_argument("--out", default=None, help="output directory (default runs/<run_name>)")
    run_p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="KEY=VALUE", help="dotted-path config override, repeatable")

    sim_p = sub.add_parser("simulate", help="print populations for gate sequences")
    sim_p.add_argument("--config", required=True)
    sim_p.add_argument("--sequences", required=True, help="JSON file: list of gate-name lists")
    sim_p.add_argument("--threads", type=int, default=1)
    sim_p.add_argument("--set", action="append", default=[], dest="overrides", metavar="KEY=VALUE")

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, overrides=args.overrides,
                          seed=getattr(args, "seed", None))
        if args.command == "simulate":
            return cmd_simulate(cfg, args.sequences, args.threads)
        out = Path(args.out) if args.out else Path("runs") / cfg["run_name"]
        out.mkdir(parents=True, exist_ok=True)
        stages = ["c1", "c2", "c3"] if args.stage == "all" else [args.stage]
        for stage in stages:
            code = STAGES[stage](cfg, out, args.threads)
            if code != 0:
                return code
        return 0
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # numeric/runtime failures
        print(f"runtime failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
