import math

import numpy as np
import pytest

from diatom.electronic import (
    PROTON_MASS,
    Constant,
    ElectronicModel,
    ElectronicState,
    Harmonic,
    NuclearData,
    Symmetry,
    morse_pair,
    two_level,
)
from diatom.errors import ConfigError, DomainError, PropagationError
from diatom.fields import ConstantEnvelope, FieldSpec, GaussianBeam, GaussianEnvelope
from diatom.perturbation import PolarizabilityCurve, polarizability_curve, static_polarizability
from diatom.rovib import (
    EffectiveHamiltonian,
    LineGrid,
    RadialGrid,
    RotorBasis,
    build_effective,
    com_trap_dynamics,
    cos2_theta_matrix,
    cos_theta_matrix,
    expectation,
    gaussian_packet,
    oscillation_frequency,
    propagate,
    rotor_state,
    rovib_state,
    trap_frequency,
    trap_ground_state,
    vibrational_eigenstates,
)

import oracles

HD = NuclearData(1, 1, PROTON_MASS, 2 * PROTON_MASS)


class TestAngularMatrices:
    def test_spec_values(self):
        b = RotorBasis(4)
        C, C2 = cos_theta_matrix(b), cos2_theta_matrix(b)
        assert C2[0, 0] == pytest.approx(1 / 3, rel=1e-15)
        assert C[0, 1] == pytest.approx(0.5773502691896258, rel=1e-15)
        assert C2[0, 2] == pytest.approx(2 / (3 * math.sqrt(5)), rel=1e-14)
        assert C2[0, 2] == pytest.approx(0.2981423969999719, rel=1e-14)

    @pytest.mark.parametrize("m", [0, 1, 3])
    def test_against_quadrature(self, m):
        b = RotorBasis(12, m)
        C, C2 = cos_theta_matrix(b), cos2_theta_matrix(b)
        for a, j1 in enumerate(b.j):
            for c, j2 in enumerate(b.j):
                assert C[a, c] == pytest.approx(oracles.angular_element(j1, j2, m, lambda x: x), abs=1e-13)
                assert C2[a, c] == pytest.approx(oracles.angular_element(j1, j2, m, lambda x: x * x), abs=1e-13)

    def test_structure(self):
        b = RotorBasis(20)
        C, C2 = cos_theta_matrix(b), cos2_theta_matrix(b)
        i, k = np.indices(C.shape)
        assert not C[np.abs(i - k) != 1].any()
        assert not C2[(np.abs(i - k) != 0) & (np.abs(i - k) != 2)].any()
        assert np.array_equal(C, C.T) and np.array_equal(C2, C2.T)

    def test_basis_validation(self):
        with pytest.raises(ConfigError):
            RotorBasis(-1)
        with pytest.raises(ConfigError):
            RotorBasis(2, 3)
        with pytest.raises(IndexError):
            RotorBasis(4).index(5)


class TestExpectation:
    def test_ground(self):
        psi = rotor_state(RotorBasis(10), 0)
        assert expectation(psi, "cos2_theta") == pytest.approx(1 / 3, rel=1e-15)
        assert expectation(psi, "cos_theta") == 0.0

    def test_superposition(self):
        psi = rotor_state(RotorBasis(10), {0: 1.0, 1: 1.0})
        assert expectation(psi, "cos_theta") == pytest.approx(1 / math.sqrt(3), rel=1e-14)

    def test_populations_sum(self, rng):
        b = RotorBasis(15)
        for _ in range(20):
            amps = {j: complex(*rng.normal(size=2)) for j in range(16)}
            p = expectation(rotor_state(b, amps), "j_populations")
            assert abs(p.sum() - 1) < 1e-12

    def test_unknown_observable(self):
        with pytest.raises(ConfigError):
            expectation(rotor_state(RotorBasis(3), 0), "x_mean")


def _rigid_hd_model():
    # kappa R_e = 1.2 / 3 = 0.4
    return two_level(r_eq=1.2, nuclear=HD)


class TestEffectiveHamiltonian:
    def test_field_free_spectrum(self):
        m = two_level()
        H = build_effective(m, None, None, "rotor", "dc", basis=RotorBasis(10))
        B = 1 / (2 * m.nuclear.reduced_mass * 1.4**2)
        j = np.arange(11)
        np.testing.assert_allclose(np.linalg.eigvalsh(H.matrix()), B * j * (j + 1), rtol=1e-13, atol=1e-20)

    def test_dc_first_order_coefficient(self):
        field = FieldSpec("dc", 0.01)
        H = build_effective(_rigid_hd_model(), None, field, "rotor", "dc", basis=RotorBasis(5))
        c1, c2, off = H.coefficients(0.0)
        assert c1 == pytest.approx(-0.004, rel=1e-14)
        assert c2 == pytest.approx(-0.5 * 1e-4 * 10.0, rel=1e-14)
        assert off == 0.0

    def test_ac_second_order_coefficient(self):
        field = FieldSpec("ac", 0.01, 0.1)
        curve = PolarizabilityCurve(0, "length", 0.1, np.array([1.4]), np.array([13.333]), np.array([0.0]))
        H = build_effective(two_level(), curve, field, "rotor", "ac", basis=RotorBasis(5))
        c1, c2, _ = H.coefficients(0.0)
        assert c1 == 0.0
        assert c2 == pytest.approx(-0.25 * 1e-4 * 13.333, rel=1e-14)

    def test_rejects_momentum_gauge(self):
        m = two_level()
        curve = polarizability_curve(m, 0, [1.4], 0.1, "momentum")
        with pytest.raises(ConfigError):
            build_effective(m, curve, FieldSpec("ac", 0.01, 0.1), "rotor", "ac")

    def test_rejects_frequency_and_kind_mismatch(self):
        m = two_level()
        with pytest.raises(ConfigError):
            build_effective(m, polarizability_curve(m, 0, [1.4], 0.05), FieldSpec("ac", 0.01, 0.1), "rotor", "ac")
        with pytest.raises(ConfigError):
            build_effective(m, None, FieldSpec("dc", 0.01), "rotor", "ac")

    def test_hermitian(self):
        b = RotorBasis(8)
        H = build_effective(morse_pair(), None, FieldSpec("dc", 0.02), "rotor", "dc", basis=b)
        assert np.array_equal(H.matrix(), H.matrix().conj().T)
        grid = RadialGrid(1.5, 8.0, 40)
        Hr = build_effective(morse_pair(), None, FieldSpec("dc", 0.02), "rovib", "dc", basis=b, grid=grid)
        blocks = Hr.angular_blocks(0.0)
        assert np.array_equal(blocks, blocks.transpose(0, 2, 1))
        assert np.array_equal(Hr._T, Hr._T.T)

    def test_cycle_average_gives_ac(self):
        m = two_level()
        b = RotorBasis(12)
        E, omega = 0.01, 0.057
        a_par, a_perp = static_polarizability(m, 0, m.r_eq)

        class Carrier(ConstantEnvelope):
            def __call__(self, t):
                return math.cos(omega * t)

        dc = build_effective(m, None, FieldSpec("dc", E, envelope=Carrier()), "rotor", "dc", basis=b)
        n = 64
        T = 2 * math.pi / omega
        avg = sum(dc.matrix(k * T / n) for k in range(n)) / n
        ac = EffectiveHamiltonian("rotor", "ac", FieldSpec("ac", E, omega), basis=b,
                                  mass=m.nuclear.reduced_mass, R=m.r_eq, mu_perm=0.0, a_par=a_par, a_perp=a_perp)
        assert np.max(np.abs(avg - ac.matrix())) < 1e-10

    def test_pendular_limit(self):
        m = _rigid_hd_model()
        b = RotorBasis(60)
        gaps = []
        for E in (0.01, 0.04, 0.16):
            H = build_effective(m, None, FieldSpec("dc", E), "rotor", "dc", basis=b)
            c1, c2, off = H.coefficients(0.0)
            e0 = np.linalg.eigvalsh(H.matrix())[0]
            vmin = c1 + c2 + off
            zpe = math.sqrt(2 * H.B * (abs(c1) + 2 * abs(c2)))
            gaps.append(abs((e0 - vmin) / zpe - 1))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.05

    def test_diagnostics_report_ratio(self):
        H = build_effective(two_level(), None, FieldSpec("ac", 0.01, 0.057), "rotor", "ac")
        d = H.diagnostics()
        assert d["omega_times_T_rot"] == pytest.approx(0.057 * H.rotation_period())


class TestRotorPropagation:
    def test_stationary_ground(self):
        b = RotorBasis(10)
        H = build_effective(two_level(), None, None, "rotor", "dc", basis=b)
        seen = []
        psi = propagate(rotor_state(b, 0), H, 0, 5000, 50, callback=lambda p: seen.append(expectation(p, "cos2_theta")))
        np.testing.assert_allclose(seen, 1 / 3, rtol=1e-13)
        assert abs(psi.coefficients[0]) == pytest.approx(1.0, abs=1e-14)

    def test_revival(self):
        b = RotorBasis(20)
        H = build_effective(two_level(), None, None, "rotor", "dc", basis=b)
        psi0 = rotor_state(b, {0: 0.6, 1: 0.3j, 2: -0.5, 3: 0.2, 5: 0.4})
        T = H.rotation_period()
        for t in (137.0, 900.0):
            a = propagate(psi0, H, 0, t, 10.0)
            c = propagate(a, H, t, t + T, 10.0)
            assert expectation(c, "cos2_theta") == pytest.approx(expectation(a, "cos2_theta"), abs=1e-8)

    def test_weak_sudden_pulse_against_first_order(self):
        m = two_level()
        b = RotorBasis(12)
        E, omega = 3.2e-3, 0.057
        H = build_effective(m, None, FieldSpec("ac", E, omega), "rotor", "ac", basis=b)
        c1, c2, _ = H.coefficients(0.0)
        w20 = 6 * H.B
        tau = math.pi / w20
        psi = propagate(rotor_state(b, 0), H, 0.0, tau, tau / 2000)
        P2 = expectation(psi, "j_populations")[2]
        M20 = cos2_theta_matrix(b)[2, 0]
        ref = oracles.first_order_transition(lambda t: c2 * M20, w20, 0.0, tau)
        assert 5e-5 < ref < 2e-4
        assert P2 == pytest.approx(ref, rel=0.05)

    def test_weak_gaussian_pulse_against_first_order(self):
        m = two_level()
        b = RotorBasis(12)
        E, omega, sigma, t0 = 3e-3, 0.057, 2e-6, 1500.0
        env = GaussianEnvelope(sigma, t0)
        H = build_effective(m, None, FieldSpec("ac", E, omega, env), "rotor", "ac", basis=b)
        c2_peak = H.coefficients(t0)[1]
        M20 = cos2_theta_matrix(b)[2, 0]
        w20 = 6 * H.B
        psi = propagate(rotor_state(b, 0), H, 0.0, 3000.0, 1.0)
        ref = oracles.first_order_transition(lambda t: c2_peak * env(t) ** 2 * M20, w20, 0.0, 3000.0)
        assert expectation(psi, "j_populations")[2] == pytest.approx(ref, rel=0.05)

    def test_energy_conserved_for_static_field(self):
        b = RotorBasis(30)
        H = build_effective(morse_pair(), None, FieldSpec("dc", 0.005), "rotor", "dc", basis=b)
        psi0 = rotor_state(b, {0: 1.0, 1: 0.5, 2: 0.25j})
        psi = propagate(psi0, H, 0.0, 1e5, 10.0)
        assert abs(H.energy(psi) - H.energy(psi0)) < 1e-9
        assert abs(psi.norm - 1) <= 1e-9 * 1e5

    def test_norm_band_under_time_dependent_field(self):
        b = RotorBasis(24)
        H = build_effective(two_level(), None, FieldSpec("ac", 0.02, 0.057, GaussianEnvelope(1e-6, 3000.0)),
                            "rotor", "ac", basis=b)
        norms = []
        propagate(rotor_state(b, 0), H, 0.0, 5e4, 5.0, callback=lambda p: norms.append((p.time, p.norm)))
        assert len(norms) == 10001
        for t, n in norms:
            assert abs(n - 1) <= 1e-9 * t + 1e-12

    def test_truncation_detected(self):
        b = RotorBasis(3)
        H = build_effective(two_level(), None, FieldSpec("ac", 0.05, 0.057), "rotor", "ac", basis=b)
        with pytest.raises(PropagationError, match="j_max"):
            propagate(rotor_state(b, 0), H, 0.0, 5000.0, 5.0)

    def test_bad_arguments(self):
        b = RotorBasis(3)
        H = build_effective(two_level(), None, None, "rotor", "dc", basis=b)
        with pytest.raises(DomainError):
            propagate(rotor_state(b, 0), H, 0.0, 10.0, 0.0)
        with pytest.raises(ConfigError):
            propagate(rotor_state(RotorBasis(4), 0), H, 0.0, 10.0, 1.0)

    def test_step_lands_on_end_time(self):
        b = RotorBasis(3)
        H = build_effective(two_level(), None, None, "rotor", "dc", basis=b)
        assert propagate(rotor_state(b, 0), H, 0.0, 10.0, 3.0).time == 10.0


def _harmonic_model(k=0.3, R_e=2.0):
    states = (ElectronicState(0, Symmetry.SIGMA, Harmonic(k, R_e)), ElectronicState(1, Symmetry.SIGMA, Constant(1.0)))
    return ElectronicModel(states, {}, HD, 0, R_e, "harmonic")


class TestVibration:
    def test_morse_low_levels(self):
        m = morse_pair()
        levels = vibrational_eigenstates(m, RadialGrid(1.0, 12.0, 255), 3)
        expected = oracles.morse_levels(0.17, 0.85, HD.reduced_mass, 3)
        np.testing.assert_allclose(levels.energies, expected, atol=1e-7)
        assert levels.converged and not levels.warnings

    def test_harmonic_levels(self):
        m = _harmonic_model()
        levels = vibrational_eigenstates(m, RadialGrid(0.2, 3.8, 127), 5)
        w = math.sqrt(0.3 / HD.reduced_mass)
        np.testing.assert_allclose(levels.energies, w * (np.arange(5) + 0.5), rtol=1e-9)

    def test_bound_state_count(self):
        m = morse_pair()
        n_expected = oracles.morse_bound_count(0.17, 0.85, HD.reduced_mass)
        assert n_expected == 24
        levels = vibrational_eigenstates(m, RadialGrid(1.0, 45.0, 1400), 30, check_convergence=False)
        assert int(np.sum(levels.energies < 0)) == n_expected

    def test_orthonormal_functions(self):
        levels = vibrational_eigenstates(morse_pair(), RadialGrid(1.0, 12.0, 127), 6, check_convergence=False)
        np.testing.assert_allclose(levels.functions.T @ levels.functions, np.eye(6), atol=1e-12)

    def test_warns_on_coarse_or_tight_grid(self):
        levels = vibrational_eigenstates(morse_pair(), RadialGrid(2.5, 12.0, 32), 3)
        text = " ".join(levels.warnings)
        assert "inner grid edge" in text
        assert "de Broglie" in text
        assert "refinement" in text
        assert not levels.converged

    def test_rovib_vibrational_ground_is_stationary(self):
        m = morse_pair()
        grid = RadialGrid(1.0, 10.0, 96)
        b = RotorBasis(4)
        v0 = vibrational_eigenstates(m, grid, 1, check_convergence=False)
        H = build_effective(m, None, None, "rovib", "dc", basis=b, grid=grid)
        psi0 = rovib_state(b, grid, v0.functions[:, 0])
        psi = propagate(psi0, H, 0.0, 2000.0, 0.25)
        overlap = abs(np.vdot(psi0.coefficients, psi.coefficients))
        assert overlap == pytest.approx(1.0, abs=1e-9)
        assert H.energy(psi0) == pytest.approx(v0.energies[0], abs=1e-10)

    def test_rovib_dc_orients_and_conserves(self):
        m = morse_pair()
        grid = RadialGrid(1.5, 7.0, 48)
        b = RotorBasis(22)
        v0 = vibrational_eigenstates(m, grid, 1, check_convergence=False)
        H = build_effective(m, None, FieldSpec("dc", 0.002), "rovib", "dc", basis=b, grid=grid)
        psi0 = rovib_state(b, grid, v0.functions[:, 0])
        psi = propagate(psi0, H, 0.0, 5000.0, 0.5)
        assert abs(psi.norm - 1) < 1e-9 * 5000
        assert abs(H.energy(psi) - H.energy(psi0)) < 1e-9
        assert expectation(psi.normalized(), "j_populations").sum() == pytest.approx(1.0, abs=1e-12)
        assert expectation(psi, "cos_theta") > 0.01


def _trap_field(E0=0.01, waist=1000.0):
    return FieldSpec("ac", E0, 0.057, profile=GaussianBeam(waist, 0.0))


class TestTrap:
    def test_frequency_formula(self):
        m = two_level()
        Om = trap_frequency(m, 5.0, _trap_field())
        assert Om == pytest.approx(math.sqrt(5.0 * 1e-4 / (m.nuclear.total_mass * 1e6)), rel=1e-14)

    def test_ground_state_width(self):
        m = two_level()
        Om = trap_frequency(m, 5.0, _trap_field())
        _, wp = trap_ground_state(m, 5.0, _trap_field(), LineGrid(-400.0, 400.0, 512))
        x2 = expectation(wp, "x2_mean")
        assert x2 == pytest.approx(1 / (2 * m.nuclear.total_mass * Om), rel=0.01)

    def test_free_spreading(self):
        m = two_level()
        grid = LineGrid(-1500.0, 1500.0, 1024)
        sigma = 10.0
        psi0 = gaussian_packet(grid, 0.0, sigma)
        traj = com_trap_dynamics(m, 5.0, _trap_field(E0=0.0), psi0, 0.0, 1e6, 1e4, record_every=10)
        Mt = m.nuclear.total_mass
        x20 = traj.x2_mean[0]
        assert x20 == pytest.approx(sigma**2, rel=1e-6)
        expected = x20 + traj.t**2 / (4 * Mt**2 * x20)
        np.testing.assert_allclose(traj.x2_mean, expected, rtol=1e-6)
        np.testing.assert_allclose(traj.norm, 1.0, atol=1e-12)

    def test_displaced_oscillation(self):
        m = two_level()
        field = _trap_field()
        Om = trap_frequency(m, 5.0, field)
        T = 2 * math.pi / Om
        grid = LineGrid(-400.0, 400.0, 512)
        sigma = math.sqrt(1 / (2 * m.nuclear.total_mass * Om))
        psi0 = gaussian_packet(grid, 50.0, sigma)
        traj = com_trap_dynamics(m, 5.0, field, psi0, 0.0, 3 * T, T / 400)
        assert oscillation_frequency(traj.t, traj.x_mean) == pytest.approx(Om, rel=0.02)
        amp = 0.5 * (traj.x_mean.max() - traj.x_mean.min())
        assert amp == pytest.approx(50.0, rel=0.02)
        assert not traj.warnings

    def test_edge_warning(self):
        m = two_level()
        grid = LineGrid(-100.0, 100.0, 64)
        psi0 = gaussian_packet(grid, 0.0, 3.0, p0=0.5)
        traj = com_trap_dynamics(m, 5.0, _trap_field(E0=0.0), psi0, 0.0, 2e5, 1e3)
        assert any("edge" in w for w in traj.warnings)

    def test_rejects_blue_detuned(self):
        m = two_level()
        psi0 = gaussian_packet(LineGrid(-100.0, 100.0, 64), 0.0, 3.0)
        with pytest.raises(DomainError):
            com_trap_dynamics(m, -1.0, _trap_field(), psi0, 0.0, 10.0, 1.0)

    def test_oscillation_frequency_helper(self):
        t = np.linspace(0, 50, 5001)
        assert oscillation_frequency(t, 3 + np.sin(0.7 * t)) == pytest.approx(0.7, rel=1e-4)
