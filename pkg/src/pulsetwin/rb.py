"""Clifford bookkeeping for randomized-benchmarking style sequences.

The 24 single-qubit Cliffords are decomposed into words over the four
quarter-turn generators by breadth-first search, shortest word first with
a lexicographic tie-break, so the table is reproducible down to the gate
strings. ORBIT sequences concatenate random Clifford words and close with
the unique inverting Clifford, making every ideal sequence the identity.
"""

from dataclasses import dataclass

import numpy as np

from .gateset import GATE_XY_ANGLES, ideal_gate

CLIFFORD_GROUP_SIZE = 24
MAX_WORD_LENGTH = 5

#: Phase-invariant unitary match threshold.
MATCH_TOL = 1e-9


def phase_invariant_match(u: np.ndarray, v: np.ndarray) -> bool:
    d = u.shape[0]
    return abs(np.trace(u.conj().T @ v) / d) ** 2 > 1.0 - MATCH_TOL


def word_unitary(word, gates: dict) -> np.ndarray:
    """Ideal product of a gate word, first gate applied first."""
    u = np.eye(2, dtype=np.complex128)
    for name in word:
        u = gates[name] @ u
    return u


@dataclass
class CliffordTable:
    words: list
    unitaries: list

    def __len__(self):
        return len(self.words)


def build_clifford_table(gates: dict | None = None) -> CliffordTable:
    """Shortest generator words realizing each of the 24 Cliffords.

    gates maps generator name to its 2x2 unitary; defaults to the four
    quarter turns. Breadth-first expansion in sorted gate order makes the
    first word found for each element both minimal and lexicographically
    smallest; the identity gets the empty word.
    """
    if gates is None:
        gates = {g: ideal_gate(g) for g in GATE_XY_ANGLES}
    order = sorted(gates)
    words = [()]
    unitaries = [np.eye(2, dtype=np.complex128)]
    frontier = [((), np.eye(2, dtype=np.complex128))]
    for _ in range(MAX_WORD_LENGTH):
        if len(words) == CLIFFORD_GROUP_SIZE:
            break
        next_frontier = []
        for word, u in frontier:
            for g in order:
                w2 = word + (g,)
                u2 = gates[g] @ u
                if any(phase_invariant_match(u2, known) for known in unitaries):
                    continue
                words.append(w2)
                unitaries.append(u2)
                next_frontier.append((w2, u2))
        frontier = next_frontier
    if len(words) != CLIFFORD_GROUP_SIZE:
        raise RuntimeError(
            f"generator set spans only {len(words)} of {CLIFFORD_GROUP_SIZE} "
            f"Cliffords within word length {MAX_WORD_LENGTH}"
        )
    return CliffordTable(words, unitaries)


def invert_index(table: CliffordTable, u: np.ndarray) -> int:
    """Index of the unique Clifford undoing u (up to global phase)."""
    for i, c in enumerate(table.unitaries):
        if phase_invariant_match(c @ u, np.eye(2)):
            return i
    raise RuntimeError("no inverting Clifford found; input is not a Clifford product")


def single_length_rb(rb_number: int, rb_length: int, target: int, rng,
                     table: CliffordTable | None = None) -> list:
    """rb_number sequences of rb_length random Cliffords plus the inverse.

    Gate names carry the target suffix ("rx90p[0]"). Under ideal gates
    every sequence multiplies to the identity up to a global phase.
    """
    if rb_number < 1 or rb_length < 1:
        raise ValueError("rb_number and rb_length must be >= 1")
    if table is None:
        table = build_clifford_table()
    gates = {g: ideal_gate(g) for g in GATE_XY_ANGLES}
    sequences = []
    for _ in range(rb_number):
        draws = rng.integers(0, len(table), size=rb_length)
        word = []
        for i in draws:
            word.extend(table.words[i])
        inv = invert_index(table, word_unitary(word, gates))
        word.extend(table.words[inv])
        sequences.append([f"{g}[{target}]" for g in word])
    return sequences
