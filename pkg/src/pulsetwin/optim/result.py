"""Shared optimizer result container and the per-iteration JSON-lines log."""

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptResult:
    """Outcome of one optimization run.

    history holds one record per iteration: {iter, phase, fevals,
    candidates: [{x_scaled, f}], best_f, sigma}; best_f entries are
    best-so-far and therefore non-increasing.
    """

    best_x: np.ndarray
    best_f: float
    n_evals: int
    termination: str
    history: list = field(default_factory=list)


def iteration_record(iteration, phase, fevals, xs, fs, best_f, sigma=None) -> dict:
    return {
        "iter": int(iteration),
        "phase": phase,
        "fevals": int(fevals),
        "candidates": [
            {"x_scaled": [float(v) for v in np.atleast_1d(x)], "f": float(fv)}
            for x, fv in zip(xs, fs)
        ],
        "best_f": float(best_f),
        "sigma": None if sigma is None else float(sigma),
    }


class JsonlLogger:
    """Append-only iteration log; one JSON document per line, no timestamps."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w") if path else None

    def write(self, record: dict):
        if self._fh is not None:
            self._fh.write(json.dumps(record) + "\n")
            self._fh.flush()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
