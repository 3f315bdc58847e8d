"""Dense complex linear algebra for piecewise-constant qudit dynamics.

Operators live in the Fock basis as plain numpy arrays. Propagation of a
sliced Hamiltonian uses a Hermitian eigendecomposition per slice, which
keeps every factor exactly unitary up to floating point, and a pairwise
binary-tree product over the slices.
"""

import functools

import numpy as np

# Module-level tolerances. Callers may tighten or relax these for a whole
# process; the defaults are what the test suite pins.
UNITARITY_TOL = 1e-9
HERMITICITY_TOL = 1e-10


def ladder(dim: int) -> np.ndarray:
    """Annihilation operator b with b[n-1, n] = sqrt(n).

    Parameters
    ----------
    dim : int
        Hilbert space dimension, at least 2.

    Returns
    -------
    np.ndarray
        dim x dim complex matrix.
    """
    if dim < 2:
        raise ValueError(f"ladder operator needs dim >= 2, got {dim}")
    b = np.zeros((dim, dim), dtype=np.complex128)
    ns = np.arange(1, dim)
    b[ns - 1, ns] = np.sqrt(ns)
    return b


def number_op(dim: int) -> np.ndarray:
    """Number operator b†b = diag(0, 1, ..., dim-1)."""
    return np.diag(np.arange(dim, dtype=np.complex128))


def is_hermitian(h: np.ndarray, tol: float = None) -> bool:
    if tol is None:
        tol = HERMITICITY_TOL
    return bool(np.linalg.norm(h - h.conj().T) < tol * max(1.0, np.linalg.norm(h)))


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of U†U - I."""
    d = u.shape[-1]
    return float(np.linalg.norm(u.conj().T @ u - np.eye(d)))


def expm_hermitian_generator(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) for Hermitian h (angular frequency units, rad/s).

    Uses the eigendecomposition of h, so the result is unitary by
    construction up to roundoff.
    """
    if not is_hermitian(h):
        raise ValueError("generator is not Hermitian within tolerance")
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * w * dt)
    return (v * phases[None, :]) @ v.conj().T


def _expm_batch(h_slices: np.ndarray, dt: float) -> np.ndarray:
    # One eigh call over the whole stack; numpy batches over the leading axis.
    w, v = np.linalg.eigh(h_slices)
    phases = np.exp(-1j * w * dt)
    return (v * phases[..., None, :]) @ np.conjugate(np.swapaxes(v, -1, -2))


def tree_product(mats: np.ndarray) -> np.ndarray:
    """Time-ordered product mats[-1] @ ... @ mats[0] by pairwise reduction.

    Odd counts carry the trailing (latest) factor to the next level
    unchanged; no identity padding.
    """
    mats = np.asarray(mats)
    while mats.shape[0] > 1:
        n = mats.shape[0]
        paired = np.matmul(mats[1 : 2 * (n // 2) : 2], mats[0 : 2 * (n // 2) : 2])
        if n % 2:
            paired = np.concatenate([paired, mats[-1:]], axis=0)
        mats = paired
    return mats[0]


def fold_product(mats) -> np.ndarray:
    """Sequential left-fold reference for tree_product (U = dU_n ... dU_1)."""
    mats = np.asarray(mats)
    return functools.reduce(lambda acc, m: m @ acc, mats[1:], mats[0].copy())


def propagate(h_slices, dt: float) -> np.ndarray:
    """Propagator for a piecewise-constant Hamiltonian.

    Parameters
    ----------
    h_slices : array-like, shape (n_slices, dim, dim)
        Hermitian generator per slice, in rad/s, earliest slice first.
    dt : float
        Slice duration in seconds.

    Returns
    -------
    np.ndarray
        U = dU_n ... dU_1 with dU_j = exp(-i h_j dt); the earliest slice
        acts first.
    """
    h_slices = np.asarray(h_slices, dtype=np.complex128)
    if h_slices.ndim == 2:
        h_slices = h_slices[None]
    if h_slices.shape[0] == 0:
        raise ValueError("propagate needs at least one slice")
    defect = np.abs(h_slices - np.conjugate(np.swapaxes(h_slices, -1, -2))).max()
    scale = max(1.0, np.abs(h_slices).max())
    if defect > HERMITICITY_TOL * scale:
        raise ValueError("propagate: non-Hermitian slice encountered")
    return tree_product(_expm_batch(h_slices, dt))


def unitary_fidelity(u: np.ndarray, u_ideal: np.ndarray, subspace) -> float:
    """Overlap fidelity |Tr(P u† P u_ideal) / d_s|² on a computational subspace.

    `u` is the simulated propagator on the full space; `u_ideal` may be
    given on the subspace only (d_s x d_s) or on the full space. Leakage
    out of the subspace lowers the value below 1 even for exactly unitary
    inputs.
    """
    subspace = list(subspace)
    dim = u.shape[0]
    if any(i < 0 or i >= dim for i in subspace):
        raise IndexError(f"subspace indices {subspace} out of range for dim {dim}")
    d_s = len(subspace)
    block = u[np.ix_(subspace, subspace)]
    if u_ideal.shape[0] != d_s:
        u_ideal = u_ideal[np.ix_(subspace, subspace)]
    tr = np.trace(block.conj().T @ u_ideal) / d_s
    return float(np.abs(tr) ** 2)


def avg_gateset_infidelity(us: dict, ideals: dict, subspace) -> float:
    """1 - mean subspace fidelity over a gate set.

    `us` and `ideals` must have identical key sets.
    """
    if not us:
        raise ValueError("empty gate set")
    if set(us) != set(ideals):
        raise KeyError(
            f"gate sets differ: {sorted(set(us) ^ set(ideals))}"
        )
    fids = [unitary_fidelity(us[k], ideals[k], subspace) for k in sorted(us)]
    return 1.0 - float(np.mean(fids))
