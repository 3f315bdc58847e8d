"""Digital-twin pulse control: simulate, optimize, calibrate, learn back.

The package models a driven superconducting qudit together with its
control electronics, optimizes pulse parameters on the model, calibrates
them against an emulated device with hidden parameters, and finally
learns the device parameters from the recorded calibration data.
"""

__version__ = "0.1.0"

from . import config, dataset, experiment, gateset, model, optim, qcore, rb, signals, workflows

__all__ = [
    "qcore",
    "model",
    "signals",
    "gateset",
    "experiment",
    "optim",
    "rb",
    "dataset",
    "workflows",
    "config",
    "__version__",
]
