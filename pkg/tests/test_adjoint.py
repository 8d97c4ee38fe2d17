import numpy as np
import pytest

import wavetomo as wt
from conftest import random_field, random_potential
from reference import (backprop_three_vector, backprop_unrolled_plain,
                       dense_A_matrix, dense_domain_matrix, fd_gradient)
from wavetomo.errors import DimensionError


class TestDataFidelity:
    def test_values(self, rng):
        y = random_field(rng, (9,))
        assert wt.data_fidelity(y, y) == 0.0
        assert wt.data_fidelity(np.zeros(9), y) == pytest.approx(
            0.5 * float(np.vdot(y, y).real))

    def test_normalized_fit_algebra(self, rng):
        z = random_field(rng, (7,))
        y = random_field(rng, (7,))
        ratio = wt.data_fidelity(z, y) / wt.data_fidelity(np.zeros(7), y)
        expect = float(np.vdot(z - y, z - y).real / np.vdot(y, y).real)
        assert ratio == pytest.approx(expect, rel=1e-12)

    def test_sensor_count_mismatch(self, rng):
        with pytest.raises(DimensionError):
            wt.data_fidelity(np.zeros(5), np.zeros(6))


class TestBackpropOperators:
    def test_Sk_trivial(self, small_setup, rng):
        grid, G, _, _ = small_setup
        v = random_field(rng, grid.shape)
        f = random_potential(rng, grid)
        assert np.allclose(wt.apply_Sk(f, 0.0, v, G), v)
        got = wt.apply_Sk(np.zeros(grid.shape), 0.3, v, G)
        assert np.allclose(got, 0.7 * v)

    def test_Sk_dense_oracle(self, small_setup, rng):
        grid, G, _, _ = small_setup
        f = random_potential(rng, grid)
        v = random_field(rng, grid.shape)
        A = dense_A_matrix(grid, f)
        S = np.eye(grid.size) - 0.8 * (A.conj().T @ A)
        expect = (S @ v.ravel()).reshape(grid.shape)
        got = wt.apply_Sk(f, 0.8, v, G)
        assert np.linalg.norm(got - expect) <= 1e-11 * np.linalg.norm(expect)

    def test_Tk_trivial(self, small_setup, rng):
        grid, G, _, u_in = small_setup
        f = random_potential(rng, grid)
        s = random_field(rng, grid.shape)
        assert np.all(wt.apply_Tk(f, s, np.zeros(grid.shape, dtype=complex),
                                  u_in, G) == 0)
        # s = u_in with f = 0 kills the residual term
        v = random_field(rng, grid.shape)
        got = wt.apply_Tk(np.zeros(grid.shape), u_in, v, u_in, G)
        expect = np.conj(u_in) * G.apply_adjoint(v)
        assert np.allclose(got, expect)

    def test_Tk_dense_oracle(self, small_setup, rng):
        grid, G, _, u_in = small_setup
        f = random_potential(rng, grid)
        s = random_field(rng, grid.shape)
        v = random_field(rng, grid.shape)
        Gd = dense_domain_matrix(grid)
        A = dense_A_matrix(grid, f)
        resid = A @ s.ravel() - u_in.ravel()
        T = (np.diag(Gd.conj().T @ resid).conj().T
             + np.diag(s.ravel()).conj().T @ Gd.conj().T @ A)
        expect = (T @ v.ravel()).reshape(grid.shape)
        got = wt.apply_Tk(f, s, v, u_in, G)
        assert np.linalg.norm(got - expect) <= 1e-10 * np.linalg.norm(expect)


class TestGradient:
    def test_zero_residual_gives_zero(self, small_setup, rng):
        grid, G, H, u_in = small_setup
        f = random_potential(rng, grid)
        cfg = wt.ForwardConfig(K=6)
        z = wt.forward_solve(f, u_in, G, H, cfg).z
        grad = wt.gradient_data_fidelity(f, z, u_in, G, H, cfg)
        assert np.all(grad == 0)

    def test_f_zero_closed_form(self, small_setup, rng):
        grid, G, H, u_in = small_setup
        y = random_field(rng, (len(H.sensors),))
        cfg = wt.ForwardConfig(K=4)
        grad = wt.gradient_data_fidelity(np.zeros(grid.shape), y, u_in, G, H, cfg)
        expect = -np.real(np.conj(u_in) * H.apply_adjoint(y))
        assert np.allclose(grad, expect, rtol=1e-12, atol=1e-14)
        assert grad.dtype.kind == "f"

    @pytest.mark.parametrize("K", [1, 5])
    def test_fixed_step_fd_match(self, small_setup, rng, K):
        grid, G, H, u_in = small_setup
        f = random_potential(rng, grid)
        y = random_field(rng, (len(H.sensors),))
        y *= np.mean(np.abs(wt.forward_solve(f, u_in, G, H,
                                             wt.ForwardConfig(K=K)).z))
        cfg = wt.ForwardConfig(K=K, step_mode="fixed",
                               nu=wt.estimate_fixed_step(f, G))
        grad = wt.gradient_data_fidelity(f, y, u_in, G, H, cfg)

        def D_of(fv):
            return wt.data_fidelity(wt.forward_solve(fv, u_in, G, H, cfg).z, y)

        fd = fd_gradient(D_of, f, 1e-5 * np.max(np.abs(f)))
        assert np.linalg.norm(grad - fd) / np.linalg.norm(fd) <= 1e-6

    def test_linearity_in_residual(self, small_setup, rng):
        grid, G, H, u_in = small_setup
        f = random_potential(rng, grid)
        cfg = wt.ForwardConfig(K=5)
        trace = wt.forward_solve(f, u_in, G, H, cfg)
        y1 = random_field(rng, (len(H.sensors),))
        # y2 doubles the residual z - y at the same trace
        y2 = trace.z - 2.0 * (trace.z - y1)
        g1 = wt.gradient_from_trace(f, y1, u_in, G, H, trace)
        g2 = wt.gradient_from_trace(f, y2, u_in, G, H, trace)
        assert np.allclose(g2, 2.0 * g1, rtol=1e-12, atol=1e-12)

    def test_matches_three_vector_form(self, small_setup, rng):
        grid, G, H, u_in = small_setup
        f = random_potential(rng, grid)
        y = random_field(rng, (len(H.sensors),))
        for K in (1, 2, 6):
            cfg = wt.ForwardConfig(K=K)
            trace = wt.forward_solve(f, u_in, G, H, cfg)
            got = wt.gradient_from_trace(f, y, u_in, G, H, trace)
            expect = backprop_three_vector(f, y, u_in, G, H, trace)
            assert np.allclose(got, expect, rtol=1e-12, atol=1e-13)

    def test_zero_momentum_matches_unrolled_chain_rule(self, rng):
        grid = wt.centered_grid((6, 6), spacing=0.5 / 16, wavelength=0.5)
        G = wt.build_domain_operator(grid)
        sensors = wt.ring_sensors(9, radius=0.35)
        H = wt.build_sensor_operator(grid, sensors)
        u_in = wt.Transmitter("point", position=(0.4, 0.03)).field_on_grid(grid)
        f = random_potential(rng, grid)
        y = random_field(rng, (9,))
        cfg = wt.ForwardConfig(K=7, momentum=False)
        trace = wt.forward_solve(f, u_in, G, H, cfg)
        got = wt.gradient_from_trace(f, y, u_in, G, H, trace)
        expect = backprop_unrolled_plain(f, y, u_in, G, H, trace)
        assert np.allclose(got, expect, rtol=1e-12, atol=1e-13)

    def test_K1_boundary_case(self, small_setup, rng):
        grid, G, H, u_in = small_setup
        f = random_potential(rng, grid)
        y = random_field(rng, (len(H.sensors),))
        cfg = wt.ForwardConfig(K=1, step_mode="fixed",
                               nu=wt.estimate_fixed_step(f, G))
        grad = wt.gradient_data_fidelity(f, y, u_in, G, H, cfg)

        def D_of(fv):
            return wt.data_fidelity(wt.forward_solve(fv, u_in, G, H, cfg).z, y)

        fd = fd_gradient(D_of, f, 1e-5 * np.max(np.abs(f)))
        assert np.linalg.norm(grad - fd) / np.linalg.norm(fd) <= 1e-6
