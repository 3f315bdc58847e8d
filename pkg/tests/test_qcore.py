"""Operator construction, slice exponentials and product ordering.

Expected matrices below are frozen from closed forms: rotations
exp(-i theta/2 sigma) evaluated by hand, fidelities from trace overlaps.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_unitary
from pulsetwin.qcore import (
    avg_gateset_infidelity,
    expm_hermitian_generator,
    fold_product,
    is_hermitian,
    ladder,
    number_op,
    propagate,
    tree_product,
    unitarity_defect,
    unitary_fidelity,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def test_ladder_dim2():
    np.testing.assert_array_equal(ladder(2), [[0, 1], [0, 0]])


def test_ladder_dim3_matrix_elements():
    b = ladder(3)
    assert b[0, 1] == 1.0
    assert b[1, 2] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(b) == 2


def test_ladder_number_operator():
    for dim in (2, 3, 5):
        b = ladder(dim)
        np.testing.assert_allclose(b.conj().T @ b, number_op(dim), atol=1e-15)


def test_ladder_rejects_dim1():
    with pytest.raises(ValueError):
        ladder(1)


def test_number_op_diagonal():
    np.testing.assert_array_equal(np.diag(number_op(4)).real, [0, 1, 2, 3])


def test_is_hermitian():
    assert is_hermitian(SIGMA_X)
    assert not is_hermitian(1j * SIGMA_X + SIGMA_Z)


def test_expm_quarter_turn():
    # exp(-i (pi/4) sigma_x) = [[cos, -i sin], [-i sin, cos]] at pi/4
    h = (np.pi / 4) * SIGMA_X
    u = expm_hermitian_generator(h, 1.0)
    c = 1 / np.sqrt(2)
    np.testing.assert_allclose(u, [[c, -1j * c], [-1j * c, c]], atol=1e-14)


def test_expm_half_turn():
    u = expm_hermitian_generator((np.pi / 2) * SIGMA_X, 1.0)
    np.testing.assert_allclose(u, [[0, -1j], [-1j, 0]], atol=1e-14)


def test_expm_scales_with_dt():
    h = 0.3 * SIGMA_Z + 0.1 * SIGMA_X
    u1 = expm_hermitian_generator(h, 0.5)
    u2 = expm_hermitian_generator(0.5 * h, 1.0)
    np.testing.assert_allclose(u1, u2, atol=1e-14)


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        expm_hermitian_generator(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_tree_matches_fold():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 7, 64, 1000):
        mats = np.stack([random_unitary(3, rng) for _ in range(n)])
        np.testing.assert_allclose(tree_product(mats), fold_product(mats), atol=1e-10)


def test_product_time_ordering():
    # Earliest slice acts first: U = exp(-iB dt) exp(-iA dt) for slices [A, B].
    a = (np.pi / 4) * SIGMA_X
    b = (np.pi / 4) * SIGMA_Z
    expected = expm_hermitian_generator(b, 1.0) @ expm_hermitian_generator(a, 1.0)
    np.testing.assert_allclose(propagate([a, b], 1.0), expected, atol=1e-13)
    # and the reversed order differs (the factors do not commute)
    swapped = propagate([b, a], 1.0)
    assert np.abs(swapped - expected).max() > 0.1


def test_propagate_single_slice():
    h = 0.7 * SIGMA_X
    np.testing.assert_allclose(
        propagate(h, 0.2), expm_hermitian_generator(h, 0.2), atol=1e-14
    )


def test_propagate_empty_raises():
    with pytest.raises(ValueError):
        propagate(np.zeros((0, 2, 2)), 1.0)


def test_propagate_rejects_non_hermitian_slice():
    bad = np.array([[[0, 1], [0, 0]]], dtype=complex)
    with pytest.raises(ValueError):
        propagate(bad, 1.0)


def test_fidelity_identity_vs_x90():
    x90 = expm_hermitian_generator((np.pi / 4) * SIGMA_X, 1.0)
    assert unitary_fidelity(np.eye(2), x90, (0, 1)) == pytest.approx(0.5, abs=1e-12)


def test_fidelity_global_phase_invariant():
    rng = np.random.default_rng(3)
    u = random_unitary(2, rng)
    for phi in (0.0, 0.4, np.pi, -2.2):
        assert unitary_fidelity(np.exp(1j * phi) * u, u, (0, 1)) == pytest.approx(
            1.0, abs=1e-12
        )


def test_fidelity_subspace_of_qutrit():
    # Embedded qubit identity with junk in level 2 still has unit
    # subspace fidelity; amplitude leaking out of the block lowers it.
    u = np.eye(3, dtype=complex)
    u[2, 2] = np.exp(1j * 1.3)
    assert unitary_fidelity(u, np.eye(2), (0, 1)) == pytest.approx(1.0, abs=1e-12)
    theta = 0.3
    leak = expm_hermitian_generator(
        theta * np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex), 1.0
    )
    f = unitary_fidelity(leak, np.eye(2), (0, 1))
    assert f == pytest.approx(((1 + np.cos(theta)) / 2) ** 2, abs=1e-12)


def test_fidelity_subspace_out_of_range():
    with pytest.raises(IndexError):
        unitary_fidelity(np.eye(2), np.eye(2), (0, 2))


def test_avg_infidelity_three_perfect_one_half():
    x90 = expm_hermitian_generator((np.pi / 4) * SIGMA_X, 1.0)
    us = {"a": np.eye(2), "b": np.eye(2), "c": np.eye(2), "d": np.eye(2)}
    ideals = {"a": np.eye(2), "b": np.eye(2), "c": np.eye(2), "d": x90}
    assert avg_gateset_infidelity(us, ideals, (0, 1)) == pytest.approx(
        0.125, abs=1e-12
    )


def test_avg_infidelity_empty_raises():
    with pytest.raises(ValueError):
        avg_gateset_infidelity({}, {}, (0, 1))


def test_avg_infidelity_key_mismatch():
    with pytest.raises(KeyError):
        avg_gateset_infidelity({"a": np.eye(2)}, {"b": np.eye(2)}, (0, 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 40))
def test_propagation_stays_unitary(seed, dim, n_slices):
    rng = np.random.default_rng(seed)
    slices = np.stack([random_hermitian(dim, rng, scale=3.0) for _ in range(n_slices)])
    u = propagate(slices, 0.1)
    assert unitarity_defect(u) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_tree_fold_agree_property(seed, n_slices):
    rng = np.random.default_rng(seed)
    mats = np.stack([random_unitary(3, rng) for _ in range(n_slices)])
    np.testing.assert_allclose(tree_product(mats), fold_product(mats), atol=1e-10)
