"""Finite-difference gradients for objectives without analytic derivatives."""

import numpy as np


def fd_gradient(f, x, eps: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of f at x, one coordinate at a time.

    eps is an absolute step in the (scaled) coordinates. Non-finite
    samples are rejected immediately; silently differencing a NaN would
    send any caller downhill into garbage.
    """
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = eps
        f_plus = f(x + step)
        f_minus = f(x - step)
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise FloatingPointError(f"non-finite objective near x[{i}] = {x[i]}")
        g[i] = (f_plus - f_minus) / (2.0 * eps)
    return g
