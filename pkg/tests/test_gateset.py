"""Gate definitions and the grouped parameter vector.

Ideal-gate matrices are frozen from exp(∓i(π/4)σ): entries 1/√2 with the
signs of each axis. The default scaled vector is frozen from the bound
arithmetic s = 2(v - lo)/(hi - lo) - 1.
"""

import numpy as np
import pytest

from pulsetwin.gateset import (
    GATE_XY_ANGLES,
    ParameterMap,
    default_gateset,
    gateset_from_dict,
    ideal_gate,
    pmap_get_vector,
    pmap_set_vector,
)
from pulsetwin.model import DeviceModel, Drive, Quantity, Qubit

C = 1 / np.sqrt(2)


def make_model():
    q = Qubit(
        "Q1",
        Quantity(5e9, 4.995e9, 5.005e9, "Hz 2pi"),
        Quantity(-210e6, -380e6, -120e6, "Hz 2pi"),
        3,
    )
    return DeviceModel([q], [Drive("d1", ["Q1"])])


def opt_map_all_gates(param):
    return [[f"{g}[0]", "d1", "gauss", param] for g in GATE_XY_ANGLES]


def default_opt_map():
    return [opt_map_all_gates(p) for p in ("amp", "delta", "freq_offset", "framechange")]


def make_pmap():
    return ParameterMap(default_gateset(), make_model(), default_opt_map())


def test_ideal_gate_matrices():
    np.testing.assert_allclose(ideal_gate("rx90p"), C * np.array([[1, -1j], [-1j, 1]]), atol=1e-15)
    np.testing.assert_allclose(ideal_gate("ry90p"), C * np.array([[1, -1], [1, 1]]), atol=1e-15)
    np.testing.assert_allclose(ideal_gate("rx90m"), C * np.array([[1, 1j], [1j, 1]]), atol=1e-15)
    np.testing.assert_allclose(ideal_gate("ry90m"), C * np.array([[1, 1], [-1, 1]]), atol=1e-15)


def test_ideal_gate_inverses():
    np.testing.assert_allclose(ideal_gate("rx90p") @ ideal_gate("rx90m"), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(ideal_gate("ry90p") @ ideal_gate("ry90m"), np.eye(2), atol=1e-15)


def test_ideal_gate_fourth_power():
    u = np.linalg.matrix_power(ideal_gate("rx90p"), 4)
    np.testing.assert_allclose(u, -np.eye(2), atol=1e-14)


def test_ideal_gate_axis_conjugation():
    # y axis is the x axis seen through a quarter frame turn
    rz = lambda phi: np.diag([np.exp(-1j * phi / 2), np.exp(1j * phi / 2)])
    lhs = ideal_gate("ry90p")
    rhs = rz(np.pi / 2) @ ideal_gate("rx90p") @ rz(-np.pi / 2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_ideal_gate_indexed_and_unknown():
    np.testing.assert_array_equal(ideal_gate("rx90p[0]"), ideal_gate("rx90p"))
    with pytest.raises(ValueError):
        ideal_gate("cnot")


def test_gate_xy_angles():
    assert GATE_XY_ANGLES == {
        "rx90p": 0.0,
        "ry90p": 0.5 * np.pi,
        "rx90m": np.pi,
        "ry90m": 1.5 * np.pi,
    }


def test_default_gateset_shape():
    gs = default_gateset()
    assert sorted(gs) == ["rx90m[0]", "rx90p[0]", "ry90m[0]", "ry90p[0]"]
    for name, instr in gs.items():
        assert instr.t_final == 7e-9
        env = instr.component("d1", "gauss")
        base = name.split("[")[0]
        assert env.params["xy_angle"].get_value() == pytest.approx(GATE_XY_ANGLES[base])
        assert env.params["amp"].get_value() == 0.5
        assert (env.params["amp"].min_val, env.params["amp"].max_val) == (0.1, 0.7)
        assert (env.params["freq_offset"].min_val, env.params["freq_offset"].max_val) == (-53e6, -47e6)
        carrier = instr.component("d1", "carrier")
        assert carrier.params["freq"].get_value() == 4.95e9


def test_default_gateset_instances_are_independent():
    gs = default_gateset()
    gs["rx90p[0]"].component("d1", "gauss").params["amp"].set_value(0.3)
    assert gs["ry90p[0]"].component("d1", "gauss").params["amp"].get_value() == 0.5


def test_gateset_overrides():
    gs = default_gateset(overrides={"amp": {"value": 0.2, "min": 0.1, "max": 0.4, "unit": "V"}})
    for instr in gs.values():
        assert instr.component("d1", "gauss").params["amp"].get_value() == 0.2


def test_gateset_from_dict():
    gs = gateset_from_dict({"drive": "dQ", "target": 3, "t_final": 5e-9, "carrier_freq": 5.1e9})
    assert "rx90p[3]" in gs
    instr = gs["rx90p[3]"]
    assert instr.t_final == 5e-9
    assert instr.component("dQ", "carrier").params["freq"].get_value() == 5.1e9


def test_chain_params_flattens():
    instr = default_gateset()["ry90p[0]"]
    p = instr.chain_params("d1")
    assert p["lo_freq"] == 4.95e9
    assert p["amp"] == 0.5
    assert p["xy_angle"] == pytest.approx(np.pi / 2)
    assert p["freq_offset"] == -50e6
    assert instr.framechange("d1") == 0.0


def test_component_lookup_errors():
    instr = default_gateset()["rx90p[0]"]
    with pytest.raises(KeyError):
        instr.component("d1", "nope")
    with pytest.raises(KeyError):
        instr.component("d9", "gauss")


def test_pmap_default_vector_frozen():
    # amp 0.5 in [0.1, 0.7] -> 1/3; delta -1 in [-5, 3] -> 0;
    # offset -50M in [-53M, -47M] -> 0; framechange 0 in [-pi, 3pi] -> -1/2
    np.testing.assert_allclose(
        make_pmap().get_vector(), [1 / 3, 0.0, 0.0, -0.5], atol=1e-12
    )


def test_pmap_dim_and_resolution():
    pm = make_pmap()
    assert pm.dim == 4
    q = pm.resolve(("rx90p[0]", "d1", "gauss", "amp"))
    assert q.get_value() == 0.5
    assert float(pm.resolve(("Q1", "freq"))) == 5e9


def test_pmap_set_vector_writes_all_members():
    pm = make_pmap()
    pm.set_vector([0.0, 0.0, 0.0, -0.5])
    for g in GATE_XY_ANGLES:
        assert pm.resolve((f"{g}[0]", "d1", "gauss", "amp")).get_value() == pytest.approx(0.4)


def test_pmap_set_vector_clamp_flags():
    pm = make_pmap()
    flags = pm.set_vector([2.0, 0.0, 0.0, -0.5])
    assert flags == [True, False, False, False]
    assert pm.resolve(("rx90p[0]", "d1", "gauss", "amp")).get_value() == 0.7


def test_pmap_set_vector_length_check():
    with pytest.raises(ValueError):
        make_pmap().set_vector([0.0, 0.0])


def test_pmap_round_trip():
    pm = make_pmap()
    v = np.array([0.8, -0.3, 0.1, 0.7])
    pm.set_vector(v)
    np.testing.assert_allclose(pm.get_vector(), v, atol=1e-12)


def test_pmap_version_counter():
    pm = make_pmap()
    v0 = pm.version
    pm.set_vector(pm.get_vector())
    assert pm.version == v0 + 1
    pm.touch()
    assert pm.version == v0 + 2


def test_pmap_physical_round_trip():
    pm = make_pmap()
    doc = pm.get_physical()
    assert doc[0] == {"value": 0.5, "unit": "V"}
    assert doc[2]["unit"] == "Hz 2pi"
    pm.set_physical([0.35, -0.7, -51e6, 0.2])
    assert pm.get_physical()[0]["value"] == pytest.approx(0.35)
    pm.set_physical(doc)
    assert pm.get_physical()[0]["value"] == 0.5


def test_pmap_model_address_group():
    pm = ParameterMap(default_gateset(), make_model(), [[("Q1", "freq")]])
    pm.set_vector([0.2])
    assert float(pm.resolve(("Q1", "freq"))) == pytest.approx(5.001e9, rel=1e-12)


def test_pmap_group_coherence_enforced():
    gs = default_gateset()
    with pytest.raises(ValueError, match="bounds/unit"):
        ParameterMap(
            gs, make_model(),
            [[("rx90p[0]", "d1", "gauss", "amp"), ("rx90p[0]", "d1", "gauss", "delta")]],
        )


def test_pmap_empty_group_rejected():
    with pytest.raises(ValueError):
        ParameterMap(default_gateset(), make_model(), [[]])


def test_pmap_address_errors():
    pm = ParameterMap(default_gateset(), make_model())
    with pytest.raises(KeyError):
        pm.resolve(("rz90p[0]", "d1", "gauss", "amp"))
    with pytest.raises(KeyError):
        pm.resolve(("rx90p[0]", "d1", "gauss", "wavelength"))
    with pytest.raises(ValueError):
        pm.resolve(("rx90p[0]", "d1", "gauss"))


def test_pmap_no_opt_map_is_inert():
    pm = ParameterMap(default_gateset(), make_model())
    assert pm.dim == 0
    assert pm.get_vector().shape == (0,)
    assert pm.set_vector([]) == []


def test_pmap_function_wrappers():
    pm = make_pmap()
    v = pmap_get_vector(pm)
    flags = pmap_set_vector(pm, v * 0.5)
    assert flags == [False] * 4
    np.testing.assert_allclose(pmap_get_vector(pm), v * 0.5, atol=1e-12)


def test_print_parameters_mentions_addresses():
    text = make_pmap().print_parameters()
    assert "rx90p[0]-d1-gauss-amp" in text
    assert "mV" in text or "V" in text
