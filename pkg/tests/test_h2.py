from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import ortho_group

from freqperf import (StabilityError, StateSpaceModel, VerificationError,
                      assemble_broadcast, assemble_dapi, assemble_primal_dual,
                      build_from_edges, build_path,
                      closed_form_broadcast_gramian, gramian_residual, h2_norm,
                      solve_lyapunov, verify_generalized_gramian)


def scalar_model(a=-1.0, b=1.0, c=1.0):
    return StateSpaceModel(
        A=np.array([[a]]), B=np.array([[b]]), C=np.array([[c]]),
        blocks=(("frequency", 1),), controller_tag="swing")


class TestSolveLyapunov:
    def test_scalar(self):
        X = solve_lyapunov(np.array([[-1.0]]), np.array([[1.0]]))
        assert X == pytest.approx(np.array([[0.5]]))

    def test_negative_identity(self):
        X = solve_lyapunov(-np.eye(4), 2.0 * np.eye(4))
        assert X == pytest.approx(np.eye(4), abs=1e-12)

    def test_random_stable_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            A = rng.normal(size=(8, 8)) - 8.0 * np.eye(8)
            C = rng.normal(size=(3, 8))
            Q = C.T @ C
            X = solve_lyapunov(A, Q)
            assert gramian_residual(X, A, C) <= 1e-8 * max(1.0, np.abs(Q).max())
            # symmetric and PSD
            assert np.abs(X - X.T).max() <= 1e-12
            assert np.linalg.eigvalsh(X).min() >= -1e-10

    def test_unstable_rejected(self):
        with pytest.raises(StabilityError):
            solve_lyapunov(np.array([[1.0]]), np.array([[1.0]]))


class TestGramianResidual:
    def test_zero_case(self):
        assert gramian_residual(np.zeros((2, 2)), -np.eye(2),
                                np.zeros((1, 2))) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            gramian_residual(np.eye(2), -np.eye(3), np.zeros((1, 3)))

    def test_linear_growth_in_perturbation(self):
        A = -np.eye(3) - 0.1 * np.ones((3, 3))
        C = np.eye(3)
        X = solve_lyapunov(A, C.T @ C)
        base = gramian_residual(X, A, C)
        for eps in (1e-6, 1e-4, 1e-2):
            Xp = X.copy()
            Xp[0, 1] += eps
            res = gramian_residual(Xp, A, C)
            # perturbation dominates the floating point floor
            assert res == pytest.approx(
                eps * (abs(A[1, 1]) + abs(A[0, 0])), rel=0.5, abs=base)


class TestH2Norm:
    def test_scalar_ou(self):
        result = h2_norm(scalar_model())
        assert result.value == pytest.approx(0.5)
        assert result.method == "lyapunov"
        assert result.diagnostics["observable"]

    def test_broadcast_table_value(self, path5, table_params):
        value = h2_norm(assemble_broadcast(path5, table_params)).value
        assert value == pytest.approx(0.0833, abs=1e-3)

    def test_pd_alpha0_table_value(self, path5, table_params):
        value = h2_norm(assemble_primal_dual(path5, table_params)).value
        assert value == pytest.approx(0.4167, abs=1e-3)

    def test_input_rotation_invariance(self, path5, table_params):
        model = assemble_dapi(path5, table_params)
        base = h2_norm(model).value
        rng = np.random.default_rng(5)
        for _ in range(3):
            U = ortho_group.rvs(model.B.shape[1], random_state=rng)
            rotated = StateSpaceModel(model.A, model.B @ U, model.C,
                                      model.blocks, model.controller_tag)
            assert h2_norm(rotated).value == pytest.approx(base, abs=1e-10)

    def test_state_similarity_invariance(self, path5, table_params):
        model = assemble_broadcast(path5, table_params)
        base = h2_norm(model).value
        T = ortho_group.rvs(model.n_states, random_state=3)
        rotated = StateSpaceModel(T @ model.A @ T.T, T @ model.B,
                                  model.C @ T.T, model.blocks,
                                  model.controller_tag)
        assert h2_norm(rotated).value == pytest.approx(base, abs=1e-10)

    def test_input_scaling_quadratic(self, path5, table_params):
        model = assemble_broadcast(path5, table_params)
        base = h2_norm(model).value
        for c in (0.5, 2.0, 3.0):
            scaled = StateSpaceModel(model.A, c * model.B, model.C,
                                     model.blocks, model.controller_tag)
            assert h2_norm(scaled).value == pytest.approx(c**2 * base,
                                                          rel=1e-12)


class TestClosedFormBroadcastGramian:
    def test_path5_entries(self, path5, table_params):
        X = closed_form_broadcast_gramian(path5, table_params)
        s_w = slice(4, 9)
        assert X[s_w, s_w] == pytest.approx(np.full((5, 5), 1.0 / 60.0))
        assert X[s_w, -1] == pytest.approx(np.full(5, 0.5))
        assert X[-1, -1] == pytest.approx(15.625)
        assert np.abs(X[:4, :]).max() == 0.0

    def test_solves_lyapunov_equation(self, path5, table_params):
        X = closed_form_broadcast_gramian(path5, table_params)
        model = assemble_broadcast(path5, table_params)
        assert gramian_residual(X, model.A, model.C) <= 1e-9

    def test_trace_matches_formula(self, path5, table_params):
        X = closed_form_broadcast_gramian(path5, table_params)
        model = assemble_broadcast(path5, table_params)
        value = np.trace(model.B.T @ X @ model.B)
        assert value == pytest.approx(1.0 / 12.0, rel=1e-10)

    def test_requires_uniform_parameters(self, path5, table_params):
        with pytest.raises(VerificationError):
            closed_form_broadcast_gramian(
                path5, replace(table_params, m=(1, 2, 3, 4, 5)))


class TestVerifyGeneralizedGramian:
    def test_alpha5_bound_and_lmi(self, path5, table_params):
        params = replace(table_params, alpha=5.0)
        model = assemble_primal_dual(path5, params)
        max_eig, bound = verify_generalized_gramian(model, params, 5.0)
        assert max_eig <= 1e-9
        assert bound == pytest.approx(5.0 / 12.0 + 25.0 / 2.0, rel=1e-12)
        assert h2_norm(model).value <= bound

    def test_single_bus_bound(self):
        from freqperf import GridParameters
        params = GridParameters(m=2.0, b=1.5, k=3.0, tau_mu=4.0, tau_nu=4.0,
                                alpha=1.0)
        model = assemble_primal_dual(build_path(1), params)
        _, bound = verify_generalized_gramian(model, params, 1.0)
        expected = 1.5**2 / (2 * 4.0) + 1.5**2 / (2 * 2.0)
        assert bound == pytest.approx(expected, rel=1e-12)

    def test_alpha_zero_rejected(self, path5, table_params):
        model = assemble_primal_dual(path5, table_params)
        with pytest.raises(VerificationError):
            verify_generalized_gramian(model, table_params, 0.0)

    def test_wrong_controller_rejected(self, path5, table_params):
        model = assemble_dapi(path5, table_params)
        with pytest.raises(VerificationError):
            verify_generalized_gramian(model, table_params, 1.0)

    def test_cyclic_rejected(self, table_params):
        g = build_from_edges(3, [(1, 2, 1), (2, 3, 1), (1, 3, 1)])
        params = replace(table_params, alpha=1.0)
        model = assemble_primal_dual(g, params)
        with pytest.raises(VerificationError, match="tree"):
            verify_generalized_gramian(model, params, 1.0)
