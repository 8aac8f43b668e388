"""Entropy-symmetrization maps: gradients, round trips, potentials and the
finite-difference symmetrizer oracle."""

import numpy as np
import pytest

from esdflow import flux, state as st, thermo


def rand_state(rng, mix, d):
    """Random admissible state, scaled to the mixture's natural units.

    The nondimensional ideal gas (r = 1) gets order-one states; SI
    mixtures get laboratory-scale ones.
    """
    nondim = mix.r_i[0] > 0.5
    rho = rng.uniform(0.2, 3.0)
    T = rng.uniform(0.5, 3.0) if nondim else rng.uniform(200.0, 1200.0)
    v = rng.uniform(-1.5, 1.5, d) if nondim else rng.uniform(-300.0, 300.0, d)
    Y = rng.uniform(0.05, 1.0, mix.n_species)
    Y = Y / Y.sum()
    return st.conserved_from_primitive(mix, rho, v, T, Y)


class TestPrimitiveRoundTrip:
    def test_stationary_uniform(self, ideal_mix):
        u = st.conserved_from_primitive(ideal_mix, 2.0, [0.0], 1.5, [1.0])
        prim = st.primitive_from_conserved(ideal_mix, u, 1)
        assert prim.v[0] == 0.0
        assert prim.T == pytest.approx(1.5, rel=1e-13)

    def test_round_trip(self, rng, perfect_pair):
        for d in (1, 2):
            u = rand_state(rng, perfect_pair, d)
            prim = st.primitive_from_conserved(perfect_pair, u, d)
            u2 = st.conserved_from_primitive(perfect_pair, prim.rho, prim.v,
                                             prim.T, prim.Y)
            assert np.allclose(u2, u, rtol=1e-12)

    def test_moving_interface_state_recovers_temperature(self, h2n2):
        # pure hydrogen at 1 atm / 300 K moving at 100 m/s
        r = thermo.mixture_gas_constant(h2n2, [1.0, 0.0])
        rho = 101325.0 / (r * 300.0)
        u = st.conserved_from_primitive(h2n2, rho, [100.0], 300.0, [1.0, 0.0])
        prim = st.primitive_from_conserved(h2n2, u, 1)
        assert prim.T == pytest.approx(300.0, rel=1e-10)


class TestEntropyVars:
    def test_last_component(self, rng, perfect_pair):
        u = rand_state(rng, perfect_pair, 2)
        v = st.entropy_vars(perfect_pair, u, 2)
        prim = st.primitive_from_conserved(perfect_pair, u, 2)
        assert v[-1] == pytest.approx(-1.0 / prim.T, rel=1e-12)

    def test_single_species_length(self, ideal_mix, rng):
        u = rand_state(rng, ideal_mix, 1)
        v = st.entropy_vars(ideal_mix, u, 1)
        assert v.shape == (3,)

    def test_gradient_of_entropy_function(self, rng, perfect_pair):
        """v(u) = dU/du against central finite differences."""
        for d in (1, 2):
            u = rand_state(rng, perfect_pair, d)
            v = st.entropy_vars(perfect_pair, u, d)
            for k in range(u.size):
                h = 1e-6 * max(abs(u[k]), 1.0)
                up, um = u.copy(), u.copy()
                up[k] += h
                um[k] -= h
                g = (st.entropy_function(perfect_pair, up, d)
                     - st.entropy_function(perfect_pair, um, d)) / (2 * h)
                assert g == pytest.approx(v[k], rel=1e-6, abs=1e-9 * abs(v).max())

    def test_frozen_pair_temperature_recovery(self, rng, perfect_pair):
        u = rand_state(rng, perfect_pair, 1)
        prim = st.primitive_from_conserved(perfect_pair, u, 1)
        sp = thermo.star_properties(perfect_pair, prim.T, prim.Y)
        v = st.entropy_vars(perfect_pair, u, 1,
                            fp=(float(sp.gamma_star), float(sp.e0_star)))
        assert v[-1] == pytest.approx(-1.0 / prim.T, rel=1e-12)


class TestInverseMap:
    def test_round_trip_u_v_u(self, rng, perfect_pair):
        for d in (1, 2):
            for _ in range(20):
                u = rand_state(rng, perfect_pair, d)
                v = st.entropy_vars(perfect_pair, u, d)
                u2 = st.conserved_from_entropy(perfect_pair, v, d)
                assert np.allclose(u2, u, rtol=1e-8)

    def test_temperature_recovery(self, perfect_pair, rng):
        u = rand_state(rng, perfect_pair, 1)
        v = st.entropy_vars(perfect_pair, u, 1)
        v[-1] = -1.0 / 300.0
        u2 = st.conserved_from_entropy(perfect_pair, v, 1)
        prim = st.primitive_from_conserved(perfect_pair, u2, 1)
        assert prim.T == pytest.approx(300.0, rel=1e-10)

    def test_two_species_partial_densities(self, rng, perfect_pair):
        for _ in range(20):
            u = rand_state(rng, perfect_pair, 1)
            v = st.entropy_vars(perfect_pair, u, 1)
            u2 = st.conserved_from_entropy(perfect_pair, v, 1)
            rho_i = st.species_densities(u, 2, 1)
            rho_i2 = st.species_densities(u2, 2, 1)
            assert np.allclose(rho_i2, rho_i, rtol=1e-8)

    def test_invalid_entropy_state(self, perfect_pair, rng):
        u = rand_state(rng, perfect_pair, 1)
        v = st.entropy_vars(perfect_pair, u, 1)
        v[-1] = 0.5
        with pytest.raises(st.InvalidEntropyStateError):
            st.conserved_from_entropy(perfect_pair, v, 1)


class TestEntropyPairPotential:
    def test_zero_velocity_zero_flux(self, perfect_pair):
        u = st.conserved_from_primitive(perfect_pair, 1.3, [0.0], 400.0,
                                        [0.4, 0.6])
        U, calF = st.entropy_pair(perfect_pair, u, 1)
        assert calF[0] == 0.0

    def test_density_scaling_matches_direct_evaluation(self, perfect_pair):
        rho, T, Y = 1.1, 500.0, np.array([0.3, 0.7])
        for scale in (1.0, 2.0):
            u = st.conserved_from_primitive(perfect_pair, scale * rho, [10.0],
                                            T, Y)
            U, _ = st.entropy_pair(perfect_pair, u, 1)
            s = thermo.mixture_entropy(perfect_pair, scale * rho, T, Y)
            assert U == pytest.approx(-scale * rho * s, rel=1e-12)

    def test_isentropic_profile_constant_entropy(self, ideal_mix):
        # p = rho^gamma with r = 1 and gamma = 1.4 is an isentrope
        rho = np.linspace(2.0, 3.0, 8)
        T = rho ** 0.4
        s_vals = [float(thermo.mixture_entropy(ideal_mix, r_, T_, [1.0]))
                  for r_, T_ in zip(rho, T)]
        assert np.ptp(s_vals) < 1e-12 * max(abs(np.max(s_vals)), 1.0)

    def test_potential_zero_velocity(self, perfect_pair):
        u = st.conserved_from_primitive(perfect_pair, 1.0, [0.0], 300.0,
                                        [0.5, 0.5])
        assert st.entropy_potential(perfect_pair, u, 1)[0] == 0.0

    def test_potential_nondimensional(self, ideal_mix):
        u = st.conserved_from_primitive(ideal_mix, 2.0, [3.0], 1.2, [1.0])
        psi = st.entropy_potential(ideal_mix, u, 1)
        assert psi[0] == pytest.approx(2.0 * 3.0, rel=1e-13)

    def test_psi_identity(self, rng, perfect_pair):
        """psi = F^T v - calF componentwise on random states."""
        for d in (1, 2):
            for _ in range(10):
                u = rand_state(rng, perfect_pair, d)
                v = st.entropy_vars(perfect_pair, u, d)
                _, calF = st.entropy_pair(perfect_pair, u, d)
                psi = st.entropy_potential(perfect_pair, u, d)
                for j in range(d):
                    nrm = np.zeros(d)
                    nrm[j] = 1.0
                    F = flux.physical_flux(perfect_pair, u, nrm)
                    lhs = F @ v - calF[j]
                    assert lhs == pytest.approx(psi[j], rel=1e-10,
                                                abs=1e-10 * abs(psi[j]) + 1e-8)

    def test_contraction_identity(self, rng, perfect_pair):
        """v . (dF/du w) = d(calF)/du . w by finite differences."""
        d = 1
        u = rand_state(rng, perfect_pair, d)
        v = st.entropy_vars(perfect_pair, u, d)
        nrm = np.ones(1)
        for _ in range(5):
            w = rng.standard_normal(u.size)
            h = 1e-6
            scale = h * np.abs(u) / max(np.linalg.norm(w), 1e-12)
            dw = w * np.max(scale)
            Fp = flux.physical_flux(perfect_pair, u + dw, nrm)
            Fm = flux.physical_flux(perfect_pair, u - dw, nrm)
            _, cFp = st.entropy_pair(perfect_pair, u + dw, d)
            _, cFm = st.entropy_pair(perfect_pair, u - dw, d)
            lhs = v @ (Fp - Fm)
            rhs = (cFp - cFm)[0]
            assert lhs == pytest.approx(rhs, rel=2e-5, abs=1e-7 * abs(rhs) + 1e-6)


class TestJacobianOracle:
    def test_symmetry_and_definiteness(self, rng, perfect_pair):
        for d in (1, 2):
            u = rand_state(rng, perfect_pair, d)
            A = st.entropy_jacobian_fd(perfect_pair, u, d)
            assert np.linalg.norm(A - A.T) / np.linalg.norm(A) < 1e-6
            assert np.min(np.linalg.eigvalsh(0.5 * (A + A.T))) > 0.0

    def test_single_species_closed_form(self, ideal_mix, rng):
        """n = 1, d = 1: the symmetrizer has the closed form
        sigma L L^T + rho T N N^T + rho cv T^2 E E^T with L = (1, v, E_tot),
        N = (0, 1, v), E = (0, 0, 1) and sigma = rho / r."""
        u = rand_state(rng, ideal_mix, 1)
        prim = st.primitive_from_conserved(ideal_mix, u, 1)
        rho, T, vx = float(prim.rho), float(prim.T), float(prim.v[0])
        r = ideal_mix.r_i[0]
        cv = float(ideal_mix.cv_star_species(T)[0])
        E_tot = cv * T + 0.5 * vx * vx
        L = np.array([1.0, vx, E_tot])
        N = np.array([0.0, 1.0, vx])
        E = np.array([0.0, 0.0, 1.0])
        A_closed = (rho / r * np.outer(L, L) + rho * T * np.outer(N, N)
                    + rho * cv * T ** 2 * np.outer(E, E))
        A_fd = st.entropy_jacobian_fd(ideal_mix, u, 1)
        assert np.linalg.norm(A_fd - A_closed) / np.linalg.norm(A_closed) < 1e-6
