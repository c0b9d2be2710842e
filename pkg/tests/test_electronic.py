import json
import math

import numpy as np
import pytest

from diatom.electronic import (
    BUILTIN_MODELS,
    PROTON_MASS,
    Constant,
    ElectronicModel,
    ElectronicState,
    Morse,
    NuclearData,
    Symmetry,
    Tabulated,
    builtin_model,
    drude_harmonic,
    load_model,
    model_from_dict,
    morse_pair,
    resolve_model,
    two_level,
)
from diatom.errors import ConfigError, DomainError, ExtrapolationError, SelectionRuleError

import oracles


def _single(curve, **kw):
    states = (ElectronicState(0, Symmetry.SIGMA, curve), ElectronicState(1, Symmetry.SIGMA, Constant(1.0)))
    return ElectronicModel(states, {}, NuclearData(1, 1, PROTON_MASS, PROTON_MASS), **kw)


class TestPotential:
    def test_morse_minimum(self):
        m = _single(Morse(0.1, 1.0, 2.0, 0.0))
        assert m.potential(0, 2.0) == pytest.approx(-0.1, abs=1e-15)

    def test_morse_asymptote(self):
        m = _single(Morse(0.1, 1.0, 2.0, 0.0))
        assert abs(m.potential(0, 60.0)) < 1e-12

    def test_morse_closed_form(self):
        m = _single(Morse(0.1, 1.0, 2.0, 0.0))
        expected = oracles.morse(2.5, 0.1, 1.0, 2.0)
        assert expected == pytest.approx(-0.0845182, abs=1e-7)
        assert m.potential(0, 2.5) == pytest.approx(expected, rel=1e-14)

    def test_domain_and_index_errors(self):
        m = two_level()
        with pytest.raises(DomainError):
            m.potential(0, 0.0)
        with pytest.raises(DomainError):
            m.potential(0, -1.0)
        with pytest.raises(IndexError):
            m.potential(2, 1.0)

    def test_tabulated_interpolates_and_refuses_extrapolation(self):
        R = np.linspace(1.0, 5.0, 41)
        curve = Tabulated(R, [oracles.morse(r, 0.1, 1.0, 2.0) for r in R])
        m = _single(curve)
        assert m.potential(0, 2.5) == pytest.approx(oracles.morse(2.5, 0.1, 1.0, 2.0), abs=5e-6)
        assert m.potential(0, R[7]) == pytest.approx(oracles.morse(R[7], 0.1, 1.0, 2.0), abs=1e-15)
        with pytest.raises(ExtrapolationError):
            m.potential(0, 5.5)
        with pytest.raises(ExtrapolationError):
            m.potential(0, 0.9)

    @pytest.mark.parametrize(
        "R, vals",
        [([1, 2, 3], [0, 1, 2]), ([1, 3, 2, 4], [0, 1, 2, 3]), ([1, 2, 2, 4], [0, 1, 2, 3])],
    )
    def test_tabulated_rejects_bad_grids(self, R, vals):
        with pytest.raises(ConfigError):
            Tabulated(R, vals)

    @pytest.mark.parametrize("name", sorted(BUILTIN_MODELS))
    def test_continuity_and_slope(self, name, rng):
        m = builtin_model(name)
        h = 1e-6
        for R in rng.uniform(1.0, 8.0, 100):
            for n in range(m.n_states):
                dE = m.potential(n, R + h) - m.potential(n, R)
                slope = m.potential_derivative(n, R)
                assert abs(dE - slope * h) <= 1e-6 * max(abs(slope * h), 1e-12) + 1e-12


class TestDipoles:
    def test_two_level_transition(self):
        m = two_level()
        for R in (0.5, 1.4, 7.0):
            np.testing.assert_array_equal(m.transition_dipole(0, 1, R), [0.0, 0.0, 1.0])

    @pytest.mark.parametrize("name", ["two_level", "drude_harmonic", "sigma_pi"])
    def test_homonuclear_sigma_diagonal_is_zero(self, name):
        m = builtin_model(name)
        for n in range(m.n_states):
            np.testing.assert_array_equal(m.transition_dipole(n, n, 1.4), [0.0, 0.0, 0.0])

    def test_drude_matches_oscillator_matrix_element(self):
        # <0|x|1> = sqrt(1/(2 m w)) with m = 1
        m = drude_harmonic(omega0=0.5)
        expected = math.sqrt(1 / (2 * 0.5))
        np.testing.assert_allclose(m.transition_dipole(0, 1, 2.0), [0, 0, expected], rtol=1e-15)
        assert m.transition_dipole(0, 1, 2.0)[2] == pytest.approx(1.0, rel=1e-15)
        np.testing.assert_array_equal(m.transition_dipole(0, 2, 2.0), [0, 0, 0])

    @pytest.mark.parametrize("name", sorted(BUILTIN_MODELS))
    def test_symmetric_in_pair(self, name, rng):
        m = builtin_model(name)
        for R in rng.uniform(0.5, 8.0, 50):
            D = m.dipole_tensor(R)
            np.testing.assert_array_equal(D, D.transpose(1, 0, 2))
            for i in range(m.n_states):
                for j in range(m.n_states):
                    np.testing.assert_array_equal(m.transition_dipole(i, j, R), m.transition_dipole(j, i, R))

    def test_selection_rule_zeros_are_exact(self):
        m = builtin_model("sigma_pi")
        d = m.transition_dipole(0, 2, 1.4)
        assert d[0] == 0.7 and d[1] == 0.0 and d[2] == 0.0
        d = m.transition_dipole(0, 1, 1.4)
        assert d[0] == 0.0 and d[1] == 0.0

    def test_constructor_enforces_selection_rules(self):
        states = (ElectronicState(0, Symmetry.SIGMA, Constant(0.0)), ElectronicState(1, Symmetry.SIGMA, Constant(0.2)))
        nuc = NuclearData(1, 1, 1.0, 1.0)
        with pytest.raises(SelectionRuleError):
            ElectronicModel(states, {(0, 1): {"x": Constant(1.0)}}, nuc)
        states_pi = (states[0], ElectronicState(1, Symmetry.PI, Constant(0.2)))
        with pytest.raises(SelectionRuleError):
            ElectronicModel(states_pi, {(0, 1): {"z": Constant(1.0)}}, nuc)

    def test_ground_must_be_sigma(self):
        states = (ElectronicState(0, Symmetry.PI, Constant(0.0)), ElectronicState(1, Symmetry.SIGMA, Constant(0.2)))
        with pytest.raises(ConfigError):
            ElectronicModel(states, {}, NuclearData(1, 1, 1.0, 1.0))


class TestNuclear:
    def test_homonuclear_dipole_vanishes(self):
        m = two_level(nuclear=NuclearData(1, 1, 1836.15, 1836.15))
        for R in (0.3, 1.4, 9.0):
            assert m.nuclear_dipole_z(R) == 0.0

    def test_hd_like(self):
        m = two_level(nuclear=NuclearData(1, 1, 1836.15, 2 * 1836.15))
        assert m.nuclear.kappa == pytest.approx(1 / 3, rel=1e-15)
        assert m.nuclear_dipole_z(1.4) == pytest.approx(1.4 / 3, rel=1e-14)

    def test_kappa_zero_for_charge_mass_balance(self):
        mp = 1836.15
        m = two_level(nuclear=NuclearData(3, 1, 3 * mp, mp))
        assert m.nuclear_dipole_z(3.0) == 0.0

    def test_linear_in_R(self, rng):
        m = morse_pair()
        for R in rng.uniform(0.1, 10, 20):
            assert m.nuclear_dipole_z(2 * R) == pytest.approx(2 * m.nuclear_dipole_z(R), rel=1e-14)

    def test_reduced_mass(self):
        n = NuclearData(1, 1, 1836.15, 2 * 1836.15)
        assert n.reduced_mass == pytest.approx(1224.1, rel=1e-12)
        assert n.total_mass == pytest.approx(3 * 1836.15)


class TestSerialization:
    def test_roundtrip_through_json(self, tmp_path):
        m = morse_pair()
        path = tmp_path / "model.json"
        path.write_text(json.dumps(m.to_dict()))
        m2 = load_model(path)
        for R in (2.0, 3.3, 5.0):
            np.testing.assert_array_equal(m.energies(R), m2.energies(R))
            np.testing.assert_array_equal(m.dipole_tensor(R), m2.dipole_tensor(R))
        assert m2.nuclear == m.nuclear
        assert m2.r_eq == m.r_eq

    def test_tabulated_model_from_dict(self):
        R = list(np.linspace(1, 6, 12))
        data = {
            "nuclear": {"Z_A": 1, "Z_B": 1, "m_A": 1836.15, "m_B": 1836.15},
            "states": [
                {"symmetry": "Sigma", "potential": {"kind": "table", "table": {"R": R, "values": [(r - 3) ** 2 for r in R]}}},
                {"symmetry": "Sigma", "potential": {"kind": "constant", "params": {"value": 0.3}}},
            ],
            "dipoles": [{"i": 1, "j": 0, "component": "z", "kind": "table", "table": {"R": R, "values": [1.0] * 12}}],
            "ground_index": 0,
        }
        m = model_from_dict(data)
        assert m.transition_dipole(0, 1, 2.0)[2] == pytest.approx(1.0)
        assert m.r_eq == pytest.approx(R[np.argmin([(r - 3) ** 2 for r in R])])
        with pytest.raises(ExtrapolationError):
            m.transition_dipole(0, 1, 7.0)

    def test_resolve_builtin_by_name_and_dict(self):
        assert resolve_model("two_level").name == "two_level"
        m = resolve_model({"builtin": "drude_harmonic", "params": {"n_excited": 3}})
        assert m.n_states == 4
        with pytest.raises(ConfigError):
            builtin_model("nope")
