"""Digital twin of the control electronics.

A drive line is a small DAG of devices: an arbitrary waveform generator
producing complex IQ samples at coarse resolution (2 GS/s here), a DAC
interpolating them onto the fine simulation grid (100 GS/s), an IQ mixer
combining them with the local oscillator carrier, and a line transfer
factor turning voltage into an angular drive rate. Executing a chain
yields the sampled coefficient c(t) multiplying the coupling operator.

Signals carry a unit tag ("V", "Hz 2pi", or "" for the dimensionless
carrier) and every device checks its input units, so a miswired chain
fails loudly instead of feeding volts where a rate belongs.
"""

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2 * np.pi

#: Input arity of every known device kind.
DEVICE_ARITY = {
    "LO": 0,
    "AWG": 0,
    "DigitalToAnalog": 1,
    "Mixer": 2,
    "VoltsToHertz": 1,
}


@dataclass
class SampledSignal:
    """Samples on a uniform midpoint time grid with a unit tag."""

    ts: np.ndarray
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=np.float64)
        self.values = np.asarray(self.values)
        if self.ts.shape != self.values.shape:
            raise ValueError("ts and values must have matching shapes")
        if self.ts.size > 1:
            steps = np.diff(self.ts)
            if np.max(np.abs(steps - steps[0])) > 1e-12 * abs(steps[0]) + 1e-30:
                raise ValueError("sample times must be uniformly spaced")

    @property
    def rate(self) -> float:
        if self.ts.size > 1:
            return 1.0 / (self.ts[1] - self.ts[0])
        return 1.0 / (2.0 * self.ts[0])


def time_grid(t_final: float, rate: float) -> np.ndarray:
    """Midpoint sampling grid (k + 0.5)/rate covering [0, t_final]."""
    n = int(round(t_final * rate))
    if n < 1:
        raise ValueError(f"grid for t_final={t_final} at rate={rate} has no samples")
    return (np.arange(n) + 0.5) / rate


def gauss_env(t: np.ndarray, t_final: float, sigma: float):
    """Offset-subtracted normalized Gaussian and its time derivative.

    The raw Gaussian is shifted so the envelope is exactly zero at t = 0
    and t = t_final (no turn-on discontinuity) and rescaled to unit peak.
    Returns (env, denv_dt).
    """
    centered = t - t_final / 2.0
    g = np.exp(-(centered**2) / (2.0 * sigma**2))
    g_edge = np.exp(-(t_final**2) / (8.0 * sigma**2))
    norm = 1.0 - g_edge
    env = (g - g_edge) / norm
    denv = -centered / sigma**2 * g / norm
    return env, denv


def awg_generate(params: dict, t_final: float, awg_rate: float) -> SampledSignal:
    """Complex IQ envelope samples (V) at the AWG rate.

    params holds plain-unit floats: amp (V), sigma (s), xy_angle (rad),
    freq_offset (Hz), delta (dimensionless second-quadrature weight). The
    quadrature is the envelope derivative taken against normalized time
    t/t_final, so delta trades off directly against the product of gate
    time and anharmonicity; with that scaling Table-I-sized values of
    order one are the right magnitude.
    """
    if t_final <= 0:
        raise ValueError("envelope duration must be positive")
    ts = time_grid(t_final, awg_rate)
    sigma = params.get("sigma", t_final / 6.0)
    env, denv = gauss_env(ts, t_final, sigma)
    quadrature = params["delta"] * t_final * denv / TWO_PI
    complex_env = env + 1j * quadrature
    phase = TWO_PI * params["freq_offset"] * ts + params["xy_angle"]
    values = params["amp"] * complex_env * np.exp(1j * phase)
    return SampledSignal(ts, values.astype(np.complex128), unit="V")


def dac_resample(signal: SampledSignal, t_final: float, sim_rate: float) -> SampledSignal:
    """Linear interpolation of AWG samples onto the simulation grid.

    Endpoints are held flat outside the source grid. Downsampling is
    refused; the simulation grid must be at least as fine as the source.
    """
    if sim_rate < signal.rate * (1.0 - 1e-12):
        raise ValueError(f"cannot resample down: sim rate {sim_rate} < source rate {signal.rate}")
    ts = time_grid(t_final, sim_rate)
    re = np.interp(ts, signal.ts, signal.values.real)
    im = np.interp(ts, signal.ts, signal.values.imag)
    return SampledSignal(ts, re + 1j * im, unit=signal.unit)


def lo_generate(freq: float, t_final: float, sim_rate: float) -> SampledSignal:
    """Local oscillator carrier exp(i·2π·freq·t) on the simulation grid."""
    ts = time_grid(t_final, sim_rate)
    return SampledSignal(ts, np.exp(1j * TWO_PI * freq * ts), unit="")


def mixer_mix(lo: SampledSignal, env: SampledSignal) -> SampledSignal:
    """IQ upconversion: I·cos(ω_lo t) + Q·sin(ω_lo t) = Re(env · lo*).

    An envelope tone at +f_offset therefore lands at f_lo - f_offset; the
    single sideband below the carrier is selected by a negative offset.
    """
    if lo.ts.shape != env.ts.shape or abs(lo.ts[0] - env.ts[0]) > 1e-15:
        raise ValueError("mixer inputs must share one time grid")
    if env.unit != "V":
        raise ValueError(f"mixer envelope input must be V, got {env.unit!r}")
    return SampledSignal(lo.ts, np.real(env.values * np.conj(lo.values)), unit="V")


def volts_to_hertz(signal: SampledSignal, factor: float) -> SampledSignal:
    """Line transfer: voltage to angular drive rate, c(t) = 2π·factor·u(t)."""
    if signal.unit != "V":
        raise ValueError(f"VoltsToHertz input must be V, got {signal.unit!r}")
    return SampledSignal(signal.ts, TWO_PI * factor * signal.values, unit="Hz 2pi")


@dataclass
class SignalDevice:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DEVICE_ARITY:
            raise ValueError(f"unknown device kind {self.kind!r}; expected one of {sorted(DEVICE_ARITY)}")


class SignalChain:
    """Named devices wired per drive line, executable to a c(t) signal.

    config layout (JSON-compatible)::

        {
          "devices": {
            "lo":  {"kind": "LO", "params": {}},
            "awg": {"kind": "AWG", "params": {"sample_rate": 2e9}},
            "dac": {"kind": "DigitalToAnalog", "params": {"sample_rate": 100e9}},
            "mixer": {"kind": "Mixer", "params": {}},
            "v2hz": {"kind": "VoltsToHertz", "params": {"factor": 2.3e8}}
          },
          "chains": {
            "d1": {"lo": [], "awg": [], "dac": ["awg"],
                   "mixer": ["lo", "dac"], "v2hz": ["mixer"]}
          }
        }

    Chain values list the input devices feeding each node; the output
    node is the one nothing else consumes. Unknown names, arity
    mismatches and cycles are rejected at construction so a config typo
    cannot surface as a shape error three layers down.
    """

    def __init__(self, config: dict):
        self.devices = {name: SignalDevice(d["kind"], d.get("params", {})) for name, d in config["devices"].items()}
        self.chains = {}
        for line, wiring in config["chains"].items():
            self.chains[line] = self._validate_chain(line, wiring)
        self.sim_rate = float(self._rate_of("DigitalToAnalog", default=100e9))
        self.awg_rate = float(self._rate_of("AWG", default=2e9))

    def _rate_of(self, kind, default):
        for dev in self.devices.values():
            if dev.kind == kind and "sample_rate" in dev.params:
                return dev.params["sample_rate"]
        return default

    def _validate_chain(self, line: str, wiring: dict) -> dict:
        known = sorted(self.devices)
        names = set(wiring)
        for name, inputs in wiring.items():
            if name not in self.devices:
                raise ValueError(f"unknown device {name!r} in chain {line!r}; available: {known}")
            kind = self.devices[name].kind
            if len(inputs) != DEVICE_ARITY[kind]:
                raise ValueError(
                    f"device {name!r} ({kind}) in chain {line!r} takes "
                    f"{DEVICE_ARITY[kind]} input(s), got {len(inputs)}"
                )
            for src in inputs:
                if src not in names:
                    raise ValueError(
                        f"device {name!r} in chain {line!r} reads from {src!r}, "
                        f"which is not part of this chain"
                    )
        consumed = {src for inputs in wiring.values() for src in inputs}
        sinks = sorted(names - consumed)
        if len(sinks) != 1:
            raise ValueError(f"chain {line!r} must have exactly one output device, found {sinks}")
        order = _topological(line, wiring)
        return {"wiring": dict(wiring), "order": order, "sink": sinks[0]}

    def lines(self):
        return sorted(self.chains)

    def execute(self, line: str, params: dict, t_final: float) -> SampledSignal:
        """Run one drive line to its c(t) output (Hz 2pi unit, angular values).

        params carries the per-instruction floats: the AWG envelope
        settings plus "lo_freq" for the carrier.
        """
        if line not in self.chains:
            raise ValueError(f"unknown drive line {line!r}; available: {self.lines()}")
        chain = self.chains[line]
        outputs = {}
        for name in chain["order"]:
            inputs = [outputs[src] for src in chain["wiring"][name]]
            outputs[name] = self._run_device(name, inputs, params, t_final)
        out = outputs[chain["sink"]]
        if out.unit != "Hz 2pi":
            raise ValueError(f"chain {line!r} terminates in {out.unit!r}, expected 'Hz 2pi'")
        return out

    def _run_device(self, name, inputs, params, t_final):
        dev = self.devices[name]
        if dev.kind == "LO":
            freq = params.get("lo_freq", dev.params.get("freq"))
            if freq is None:
                raise ValueError(f"LO device {name!r} has no frequency (no lo_freq and no default)")
            return lo_generate(freq, t_final, self.sim_rate)
        if dev.kind == "AWG":
            return awg_generate(params, t_final, self.awg_rate)
        if dev.kind == "DigitalToAnalog":
            return dac_resample(inputs[0], t_final, self.sim_rate)
        if dev.kind == "Mixer":
            return mixer_mix(inputs[0], inputs[1])
        if dev.kind == "VoltsToHertz":
            return volts_to_hertz(inputs[0], dev.params["factor"])
        raise ValueError(f"unknown device kind {dev.kind!r}")


def _topological(line: str, wiring: dict) -> list:
    """Dependency order by Kahn's algorithm; raises on cycles."""
    remaining = {name: set(inputs) for name, inputs in wiring.items()}
    order = []
    while remaining:
        ready = sorted(n for n, deps in remaining.items() if not deps)
        if not ready:
            raise ValueError(f"chain {line!r} has a cycle among {sorted(remaining)}")
        for n in ready:
            order.append(n)
            del remaining[n]
        for deps in remaining.values():
            deps.difference_update(ready)
    return order


def chain_execute(config_or_chain, line: str, params: dict, t_final: float) -> SampledSignal:
    """One-shot convenience wrapper around SignalChain.execute."""
    chain = config_or_chain if isinstance(config_or_chain, SignalChain) else SignalChain(config_or_chain)
    return chain.execute(line, params, t_final)
