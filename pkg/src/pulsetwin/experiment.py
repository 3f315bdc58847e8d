"""Binding of device model, signal chain and gate-set into one simulator.

An Experiment computes gate propagators (signal chain -> H(t) slices ->
piecewise-constant propagation -> rotating-frame correction), multiplies
them into sequence unitaries, and emulates projective measurement with
shot noise. The Blackbox wraps a second, perturbed Experiment behind a
measurement-only interface and stands in for the actual device.
"""

import copy
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qcore
from .gateset import ParameterMap

#: Population sum tolerance for a valid probability vector.
POPS_TOL = 1e-9

#: Qudit levels counted as "excited" when reducing populations to one number.
DEFAULT_STATE_LABELS = ((1,), (2,))


@dataclass
class PopulationResult:
    pops: np.ndarray
    labels: tuple

    def __post_init__(self):
        self.pops = np.asarray(self.pops, dtype=np.float64)
        if np.any(self.pops < -POPS_TOL) or abs(self.pops.sum() - 1.0) > POPS_TOL:
            raise ValueError(f"not a probability vector: {self.pops}")


class Experiment:
    """Device model + signal chain + instructions, with a propagator cache.

    The cache is keyed on the ParameterMap version counter: any parameter
    write invalidates every stored unitary. Propagation per instruction
    is independent, so a thread pool may split the gate-set.
    """

    def __init__(self, model, chain, instructions, opt_map=None, threads: int = 1):
        self.model = model
        self.chain = chain
        self.instructions = instructions
        self.pmap = ParameterMap(instructions, model, opt_map)
        self.threads = max(1, int(threads))
        self.propagation_count = 0
        self._cache = {}
        self._cache_version = None

    # -- propagators ---------------------------------------------------

    def _compute_one(self, name: str) -> np.ndarray:
        instr = self.instructions[name]
        if not instr.channels:
            raise RuntimeError(f"instruction {name!r} drives no channel")
        dt = 1.0 / self.chain.sim_rate
        h0 = self.model.drift_hamiltonian()
        slices = None
        omega_d = 0.0
        for channel in sorted(instr.channels):
            params = instr.chain_params(channel)
            try:
                signal = self.chain.execute(channel, params, instr.t_final)
            except Exception as err:
                raise RuntimeError(f"signal chain failed for instruction {name!r}: {err}") from err
            hc = self.model.control_hamiltonian(channel)
            term = signal.values.real[:, None, None] * hc[None, :, :]
            slices = h0[None, :, :] + term if slices is None else slices + term
            # Effective single-sideband tone of this channel; the last
            # channel wins, which is unambiguous for one drive line.
            omega_d = 2.0 * np.pi * (params["lo_freq"] - params.get("freq_offset", 0.0))
        u = qcore.propagate(slices, dt)
        self.propagation_count += 1
        n_op = qcore.number_op(self.model.total_dim)
        # Rotating-frame (virtual-Z) correction at the drive tone, plus the
        # instruction's own frame advance.
        fc = sum(instr.framechange(ch) for ch in instr.channels)
        phases = np.exp(1j * (omega_d * instr.t_final + fc) * np.diag(n_op).real)
        return phases[:, None] * u

    def compute_propagators(self, names=None) -> dict:
        """Unitaries for the requested (default: all) instructions, cached."""
        if self._cache_version != self.pmap.version:
            self._cache = {}
            self._cache_version = self.pmap.version
        names = sorted(self.instructions) if names is None else list(names)
        missing = [n for n in names if n not in self._cache]
        for n in missing:
            if n not in self.instructions:
                raise KeyError(f"unknown instruction {n!r}")
        if self.threads > 1 and len(missing) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                for n, u in zip(missing, pool.map(self._compute_one, missing)):
                    self._cache[n] = u
        else:
            for n in missing:
                self._cache[n] = self._compute_one(n)
        return {n: self._cache[n] for n in names}

    # -- simulation ----------------------------------------------------

    def ground_state(self) -> np.ndarray:
        psi = np.zeros(self.model.total_dim, dtype=np.complex128)
        psi[0] = 1.0
        return psi

    def simulate_sequence(self, seq, psi0=None) -> PopulationResult:
        """Populations after applying the gates of seq in order to psi0."""
        for name in seq:
            if name not in self.instructions:
                raise KeyError(f"unknown gate name {name!r} in sequence")
        props = self.compute_propagators(sorted(set(seq)))
        psi = self.ground_state() if psi0 is None else np.asarray(psi0, dtype=np.complex128)
        for name in seq:
            psi = props[name] @ psi
        pops = np.abs(psi) ** 2
        return PopulationResult(pops / pops.sum(), tuple(range(len(pops))))

    def ideal_gates(self) -> dict:
        return {n: i.ideal for n, i in self.instructions.items()}

    def gateset_infidelity(self, subspace=(0, 1)) -> float:
        props = self.compute_propagators()
        return qcore.avg_gateset_infidelity(props, self.ideal_gates(), list(subspace))

    def copy(self) -> "Experiment":
        return copy.deepcopy(self)


def measure_with_shots(pops: PopulationResult, shots: int, rng,
                       state_labels=DEFAULT_STATE_LABELS):
    """Finite-shot estimate of the excited population and its std error.

    Draws one multinomial sample over all levels, sums the counts of the
    states named in state_labels, and reports the binomial standard error
    sqrt(p(1-p)/shots) of the estimate, floored at 1/(2*shots) so an
    all-or-nothing sample never claims zero uncertainty.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    counts = rng.multinomial(shots, pops.pops)
    excited = {s for group in state_labels for s in group}
    p_hat = sum(counts[s] for s in excited if s < len(counts)) / shots
    std = np.sqrt(p_hat * (1.0 - p_hat) / shots)
    return p_hat, max(std, 1.0 / (2.0 * shots))


class Blackbox:
    """The stand-in device: measurement access only, parameters hidden.

    Holds a private Experiment whose model deviates from the nominal one
    (detuned frequency by default) and a private shot-noise stream. The
    public surface accepts pulse parameters and sequences and returns
    measured statistics; nothing else leaks out.
    """

    def __init__(self, experiment: Experiment, seed, state_labels=DEFAULT_STATE_LABELS):
        self._exp = experiment
        self._rng = np.random.default_rng(seed)
        self._state_labels = tuple(tuple(g) for g in state_labels)

    def run_sequences(self, params, opt_map, seqs, shots: int):
        """Measured (results, results_std) per sequence at the given params.

        params is the scaled [-1, 1] vector over opt_map groups; shots is
        the per-sequence sample size.
        """
        self._exp.pmap.set_opt_map(opt_map)
        self._exp.pmap.set_vector(params)
        results = []
        results_std = []
        for seq in seqs:
            pops = self._exp.simulate_sequence(seq)
            r, s = measure_with_shots(pops, shots, self._rng, self._state_labels)
            results.append(r)
            results_std.append(s)
        return results, results_std


def blackbox_run_sequences(bb: Blackbox, params, opt_map, seqs, shots):
    return bb.run_sequences(params, opt_map, seqs, shots)


def make_blackbox(experiment: Experiment, overrides, seed,
                  state_labels=DEFAULT_STATE_LABELS) -> Blackbox:
    """Clone an experiment, apply hidden parameter overrides, wrap it.

    overrides is a list of {qubit, param, value} entries applied to the
    clone's model, e.g. the true qubit frequency the nominal model gets
    wrong.
    """
    twin = experiment.copy()
    for entry in overrides:
        q = twin.model.parameter(entry["qubit"], entry["param"])
        if q.set_value(entry["value"]):
            raise ValueError(
                f"override {entry['qubit']}/{entry['param']}={entry['value']} "
                f"is outside the parameter bounds [{q.min_val}, {q.max_val}]"
            )
    twin.pmap.touch()
    return Blackbox(twin, seed, state_labels)
