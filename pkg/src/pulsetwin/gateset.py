"""Gate definitions and the flat scaled parameter vector over them.

The gate-set is four quarter-turn rotations rx90p, ry90p, rx90m, ry90m
realized by one shared Gaussian waveform whose carrier phase selects the
rotation axis. Every pulse setting is a bounded Quantity; a ParameterMap
groups addresses like ("rx90p[0]", "d1", "gauss", "amp") so that one
optimizer scalar writes through to all four gates at once.
"""

import numpy as np

from .model import Quantity

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)

#: Rotation axis phase per gate; this is the only difference between them.
GATE_XY_ANGLES = {
    "rx90p": 0.0,
    "ry90p": 0.5 * np.pi,
    "rx90m": np.pi,
    "ry90m": 1.5 * np.pi,
}


def ideal_gate(name: str) -> np.ndarray:
    """Target 2x2 unitary exp(∓i(π/4)σ_{x|y}) for a gate name.

    Accepts bare names ("rx90p") and indexed ones ("rx90p[0]").
    """
    base = name.split("[")[0]
    axis = {"rx90p": SIGMA_X, "ry90p": SIGMA_Y, "rx90m": SIGMA_X, "ry90m": SIGMA_Y}
    sign = {"rx90p": 1.0, "ry90p": 1.0, "rx90m": -1.0, "ry90m": -1.0}
    if base not in axis:
        raise ValueError(f"unknown gate {name!r}; expected one of {sorted(axis)}")
    theta = sign[base] * np.pi / 4.0
    return np.cos(theta) * np.eye(2) - 1j * np.sin(theta) * axis[base]


class EnvelopeSpec:
    """One pulse envelope: a shape identifier plus its bounded parameters."""

    def __init__(self, shape: str, params: dict):
        if params["t_final"].get_value() <= 0 or params["sigma"].get_value() <= 0:
            raise ValueError("t_final and sigma must be positive")
        self.shape = shape
        self.params = params


class CarrierSpec:
    """Local oscillator settings of one drive channel."""

    def __init__(self, params: dict):
        self.params = params


class Instruction:
    """A named gate: per-channel envelope + carrier, and its ideal unitary."""

    def __init__(self, name: str, channels: dict, ideal: np.ndarray, t_final: float):
        self.name = name
        self.channels = channels
        self.ideal = np.asarray(ideal, dtype=np.complex128)
        self.t_final = float(t_final)

    def component(self, channel: str, comp: str):
        try:
            return self.channels[channel][comp]
        except KeyError:
            raise KeyError(f"instruction {self.name!r} has no component ({channel!r}, {comp!r})") from None

    def chain_params(self, channel: str) -> dict:
        """Flat float dict driving the signal chain for one channel."""
        out = {}
        for comp in self.channels[channel].values():
            if isinstance(comp, CarrierSpec):
                out["lo_freq"] = comp.params["freq"].get_value()
            else:
                for pname, q in comp.params.items():
                    out[pname] = q.get_value()
        return out

    def framechange(self, channel: str) -> float:
        for comp in self.channels[channel].values():
            if isinstance(comp, EnvelopeSpec):
                return comp.params["framechange"].get_value()
        return 0.0


def _envelope_defaults(t_final: float) -> dict:
    # Starting values sit near the known good operating point so a local
    # optimizer only has to descend, not search.
    return {
        "amp": Quantity(0.5, 0.1, 0.7, "V"),
        "t_final": Quantity(t_final, 0.5 * t_final, 2.0 * t_final, "s"),
        "sigma": Quantity(t_final / 6.0, t_final / 12.0, t_final / 2.0, "s"),
        "delta": Quantity(-1.0, -5.0, 3.0, ""),
        "freq_offset": Quantity(-50e6, -53e6, -47e6, "Hz 2pi"),
        "xy_angle": Quantity(0.0, -0.5 * np.pi, 2.5 * np.pi, "rad"),
        "framechange": Quantity(0.0, -np.pi, 3.0 * np.pi, "rad"),
    }


def default_gateset(drive: str = "d1", target: int = 0, t_final: float = 7e-9,
                    carrier_freq: float = 4.95e9, overrides: dict | None = None) -> dict:
    """The four-gate set on one drive line, keyed by indexed name.

    overrides maps envelope parameter names to Quantity dicts
    ({value, min, max, unit}) replacing the built-in defaults; carrier
    frequency bounds span the sideband geometry 4.5-6 GHz.
    """
    instructions = {}
    for gate, xy in GATE_XY_ANGLES.items():
        env_params = _envelope_defaults(t_final)
        for pname, spec in (overrides or {}).items():
            env_params[pname] = Quantity.from_dict(spec)
        env_params["xy_angle"].set_value(xy)
        name = f"{gate}[{target}]"
        channels = {
            drive: {
                "gauss": EnvelopeSpec("gauss", env_params),
                "carrier": CarrierSpec({"freq": Quantity(carrier_freq, 4.5e9, 6e9, "Hz 2pi")}),
            }
        }
        instructions[name] = Instruction(name, channels, ideal_gate(gate), t_final)
    return instructions


def gateset_from_dict(cfg: dict) -> dict:
    return default_gateset(
        drive=cfg.get("drive", "d1"),
        target=cfg.get("target", 0),
        t_final=cfg.get("t_final", 7e-9),
        carrier_freq=cfg.get("carrier_freq", 4.95e9),
        overrides=cfg.get("envelope", None),
    )


class ParameterMap:
    """Grouped view of instruction and model Quantities as one flat vector.

    opt_map is a list of groups; a group is a list of addresses sharing a
    single optimizable value. Addresses have four elements (instruction,
    channel, component, parameter) for pulse settings or two (qubit,
    parameter) for model settings. All Quantities in one group must agree
    on bounds and unit, otherwise the shared scaled value is ambiguous.

    Writes bump a version counter; anything caching derived state (gate
    propagators, mainly) compares against it instead of guessing.
    """

    def __init__(self, instructions: dict, model, opt_map=None):
        self.instructions = instructions
        self.model = model
        self.version = 0
        self.opt_map = []
        if opt_map is not None:
            self.set_opt_map(opt_map)

    def resolve(self, address) -> Quantity:
        address = tuple(address)
        if len(address) == 2:
            return self.model.parameter(*address)
        if len(address) == 4:
            instr, channel, comp, param = address
            if instr not in self.instructions:
                raise KeyError(f"unknown instruction {instr!r} in address {address}")
            component = self.instructions[instr].component(channel, comp)
            try:
                return component.params[param]
            except KeyError:
                raise KeyError(f"component {comp!r} has no parameter {param!r} (address {address})") from None
        raise ValueError(f"address {address} must have 2 or 4 elements")

    def set_opt_map(self, opt_map):
        groups = [[tuple(a) for a in group] for group in opt_map]
        for group in groups:
            if not group:
                raise ValueError("opt_map group may not be empty")
            quantities = [self.resolve(a) for a in group]
            ref = quantities[0]
            for a, q in zip(group[1:], quantities[1:]):
                if (q.min_val, q.max_val, q.unit) != (ref.min_val, ref.max_val, ref.unit):
                    raise ValueError(f"address {a} bounds/unit differ from group leader {group[0]}")
        self.opt_map = groups

    @property
    def dim(self) -> int:
        return len(self.opt_map)

    def group_quantities(self, g: int):
        return [self.resolve(a) for a in self.opt_map[g]]

    def get_vector(self) -> np.ndarray:
        """Scaled values in [-1, 1], one per group (read from the leader)."""
        return np.array([self.resolve(group[0]).get_scaled() for group in self.opt_map])

    def set_vector(self, v) -> list:
        """Write scaled values through every group member; returns clamp flags."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"vector length {v.shape} does not match {self.dim} groups")
        clamped = []
        for s, group in zip(v, self.opt_map):
            flags = [self.resolve(a).set_scaled(float(s)) for a in group]
            clamped.append(any(flags))
        self.version += 1
        return clamped

    def get_physical(self) -> list:
        """Value+unit dicts per group, for dataset records."""
        out = []
        for group in self.opt_map:
            q = self.resolve(group[0])
            out.append({"value": q.get_value(), "unit": q.unit})
        return out

    def set_physical(self, values) -> list:
        """Write plain-unit values (floats or {value,...} dicts) per group."""
        if len(values) != self.dim:
            raise ValueError(f"got {len(values)} values for {self.dim} groups")
        clamped = []
        for val, group in zip(values, self.opt_map):
            if isinstance(val, dict):
                val = val["value"]
            flags = [self.resolve(a).set_value(float(val)) for a in group]
            clamped.append(any(flags))
        self.version += 1
        return clamped

    def touch(self):
        """Mark derived caches stale after an out-of-band Quantity write."""
        self.version += 1

    def print_parameters(self) -> str:
        lines = []
        for group in self.opt_map:
            q = self.resolve(group[0])
            lines.append(f"{'-'.join(group[0])}: {q!r}")
        return "\n".join(lines)


def pmap_get_vector(pm: ParameterMap) -> np.ndarray:
    return pm.get_vector()


def pmap_set_vector(pm: ParameterMap, v) -> list:
    return pm.set_vector(v)
