"""Calibration dataset: every measured evaluation, written once, read often.

A run produces one JSON document: metadata (opt_map, seed, gate-set
configuration) plus a record per objective evaluation holding the pulse
parameters with units, the sequences, and the measured statistics. Model
learning later re-simulates exactly these records, so values round-trip
bit-exact and nothing here depends on wall-clock state.
"""

import json
from dataclasses import dataclass, field


@dataclass
class CalibrationRecord:
    """One evaluation: parameter setting, sequences, measured results."""

    params: list
    opt_map: list
    seqs: list
    results: list
    results_std: list
    shots: list

    def __post_init__(self):
        n = len(self.seqs)
        if not (len(self.results) == len(self.results_std) == len(self.shots) == n):
            raise ValueError("seqs, results, results_std and shots must have equal length")
        if any(r < 0.0 or r > 1.0 for r in self.results):
            raise ValueError("results must lie in [0, 1]")

    def mean_std(self) -> float:
        return sum(self.results_std) / len(self.results_std)

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "opt_map": self.opt_map,
            "seqs": self.seqs,
            "results": self.results,
            "results_std": self.results_std,
            "shots": self.shots,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationRecord":
        return cls(
            params=d["params"],
            opt_map=[[list(a) for a in group] for group in d["opt_map"]],
            seqs=d["seqs"],
            results=d["results"],
            results_std=d["results_std"],
            shots=d["shots"],
        )


@dataclass
class Dataset:
    metadata: dict
    records: list = field(default_factory=list)

    def append(self, record: CalibrationRecord):
        self.records.append(record)

    def __len__(self):
        return len(self.records)


def save_dataset(path, ds: Dataset):
    doc = {
        "metadata": ds.metadata,
        "records": [r.to_dict() for r in ds.records],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_dataset(path) -> Dataset:
    with open(path) as fh:
        doc = json.load(fh)
    return Dataset(doc["metadata"], [CalibrationRecord.from_dict(r) for r in doc["records"]])
