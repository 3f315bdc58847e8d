"""Shared helpers for the test suite."""

import numpy as np

from pulsetwin.experiment import Experiment
from pulsetwin.gateset import GATE_XY_ANGLES, default_gateset
from pulsetwin.model import DeviceModel, Drive, Quantity, Qubit
from pulsetwin.signals import SignalChain

#: Pulse-parameter operating point found by the stage-one optimizer on the
#: shipped single-qubit model; frozen so sequence-level tests can assert
#: well-calibrated behavior without re-running the optimization.
CALIBRATED = {"amp": 0.380725, "delta": -0.612336, "freq_offset": -53e6, "framechange": 0.0554177}


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (z + z.conj().T) / 2.0


def make_model(freq=5e9, anhar=-210e6, dim=3) -> DeviceModel:
    q = Qubit(
        "Q1",
        Quantity(freq, 4.995e9, 5.005e9, "Hz 2pi"),
        Quantity(anhar, -380e6, -120e6, "Hz 2pi"),
        dim,
    )
    return DeviceModel([q], [Drive("d1", ["Q1"])])


def chain_config() -> dict:
    return {
        "devices": {
            "lo": {"kind": "LO", "params": {}},
            "awg": {"kind": "AWG", "params": {"sample_rate": 2e9}},
            "dac": {"kind": "DigitalToAnalog", "params": {"sample_rate": 100e9}},
            "mixer": {"kind": "Mixer", "params": {}},
            "v2hz": {"kind": "VoltsToHertz", "params": {"factor": 2.3e8}},
        },
        "chains": {
            "d1": {"lo": [], "awg": [], "dac": ["awg"], "mixer": ["lo", "dac"], "v2hz": ["mixer"]}
        },
    }


def default_opt_map() -> list:
    return [
        [(f"{g}[0]", "d1", "gauss", p) for g in GATE_XY_ANGLES]
        for p in ("amp", "delta", "freq_offset", "framechange")
    ]


def make_experiment(threads: int = 1, gateset_overrides=None, **model_kw) -> Experiment:
    return Experiment(
        make_model(**model_kw),
        SignalChain(chain_config()),
        default_gateset(overrides=gateset_overrides),
        opt_map=default_opt_map(),
        threads=threads,
    )


def calibrate(exp: Experiment) -> Experiment:
    """Write the frozen operating point through the default opt_map."""
    exp.pmap.set_physical(
        [CALIBRATED["amp"], CALIBRATED["delta"], CALIBRATED["freq_offset"], CALIBRATED["framechange"]]
    )
    return exp
