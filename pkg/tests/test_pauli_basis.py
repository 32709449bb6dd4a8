import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosonic_dd.pauli_basis import (
    ALL_PAIRS,
    PAIR_I,
    PAIR_X,
    PAIR_Y,
    PAIR_Z,
    expand_in_basis,
    gamma_set,
    gamma_tilde_set,
    product_index,
    pulse_generator,
    pulse_index,
    pulse_matrix,
    s_matrix,
    symplectic_form_index,
    symplectic_inner_product,
    verify_adjoint_action,
)
from bosonic_dd.symplectic import (
    ModeLayout,
    is_in_sp_algebra,
    is_symplectic,
    matrix_exponential,
    symplectic_form,
)

index_strategy = st.lists(st.sampled_from(ALL_PAIRS), min_size=1, max_size=4).map(tuple)


class TestSMatrix:
    def test_identity_index(self):
        assert np.array_equal(s_matrix((PAIR_I, PAIR_I)), np.eye(4))

    def test_y_factor(self):
        assert np.array_equal(s_matrix((PAIR_Y,)),
                              np.array([[0.0, -1.0], [1.0, 0.0]]))

    def test_form_is_minus_y_tensor_identity(self):
        # J on 2^m modes equals -S_{(1,1),(0,0),...}
        for m in (1, 2):
            J = symplectic_form(ModeLayout(2 ** m, 0))
            assert np.array_equal(-s_matrix(symplectic_form_index(m)), J)

    def test_signed_permutation(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            alpha = tuple(ALL_PAIRS[i] for i in rng.integers(0, 4, size=3))
            S = s_matrix(alpha)
            assert set(np.unique(S)) <= {-1.0, 0.0, 1.0}
            assert np.array_equal(np.abs(S) @ np.ones(8), np.ones(8))
            assert np.array_equal(np.abs(S).T @ np.ones(8), np.ones(8))


class TestGammaSets:
    @pytest.mark.parametrize("m,expected", [(0, 3), (1, 10), (2, 36), (3, 136)])
    def test_gamma_count(self, m, expected):
        assert len(gamma_set(m)) == expected
        assert expected == 2 * 2 ** (2 * m) + 2 ** m

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_gamma_members_in_algebra(self, m):
        J = symplectic_form(ModeLayout(2 ** m, 0))
        for alpha in gamma_set(m):
            assert is_in_sp_algebra(s_matrix(alpha), J, tol=1e-14)

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_gamma_spans_algebra(self, m):
        # the Gram matrix of Frobenius inner products is 2^{m+1} I
        mats = [s_matrix(a).ravel() for a in gamma_set(m)]
        G = np.array(mats) @ np.array(mats).T
        assert np.array_equal(G, 2 ** (m + 1) * np.eye(len(mats)))

    def test_gamma_tilde_m0(self):
        assert set(gamma_tilde_set(0)) == {(PAIR_I,), (PAIR_Y,)}

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_gamma_tilde_count(self, m):
        assert len(gamma_tilde_set(m)) == 2 * 4 ** m

    def test_gamma_tilde_orthogonal_symplectic(self):
        m = 2
        J = symplectic_form(ModeLayout(4, 0))
        for beta in gamma_tilde_set(m):
            S = s_matrix(beta)
            assert is_symplectic(S, J, tol=1e-12)
            assert np.abs(S.T @ S - np.eye(8)).max() < 1e-12

    def test_resource_guard(self):
        with pytest.raises(ValueError):
            gamma_set(5)


class TestInnerProduct:
    @given(index_strategy)
    def test_alternating(self, alpha):
        assert symplectic_inner_product(alpha, alpha) == 0

    def test_x_z_anticommute(self):
        assert symplectic_inner_product((PAIR_X,), (PAIR_Z,)) == 1

    def test_identity_commutes(self):
        assert symplectic_inner_product((PAIR_Y,), (PAIR_I,)) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            symplectic_inner_product((PAIR_X,), (PAIR_X, PAIR_I))

    @given(index_strategy, index_strategy)
    def test_matches_commutation_sign(self, alpha, beta):
        # <a,b> = 1 exactly when the dense matrices anticommute
        n = max(len(alpha), len(beta))
        alpha = alpha + (PAIR_I,) * (n - len(alpha))
        beta = beta + (PAIR_I,) * (n - len(beta))
        Sa, Sb = s_matrix(alpha), s_matrix(beta)
        sign = -1.0 if symplectic_inner_product(alpha, beta) else 1.0
        assert np.array_equal(Sa @ Sb, sign * (Sb @ Sa))


class TestAdjointAction:
    def test_m0_x_under_y(self):
        report = verify_adjoint_action(0)
        assert report.passed and report.exhaustive
        # explicit sign for the x/y pair
        x, y = s_matrix((PAIR_X,)), s_matrix((PAIR_Y,))
        assert symplectic_inner_product((PAIR_X,), (PAIR_Y,)) == 1
        assert np.array_equal(y.T @ x @ y, -x)

    def test_m1_exhaustive(self):
        report = verify_adjoint_action(1, tol=1e-12)
        assert report.passed
        assert report.n_checked == 10 * 8

    def test_self_pair_sign(self):
        for alpha in set(gamma_set(1)) & set(gamma_tilde_set(1)):
            S = s_matrix(alpha)
            assert np.array_equal(S.T @ S @ S, S)


class TestExpandInBasis:
    def test_form_coefficient(self):
        m = 1
        J = symplectic_form(ModeLayout(2, 0))
        coeffs = expand_in_basis(J, m)
        nonzero = {a: c for a, c in coeffs.items() if c != 0.0}
        assert nonzero == {symplectic_form_index(m): -1.0}

    def test_zero(self):
        coeffs = expand_in_basis(np.zeros((4, 4)), 1)
        assert all(c == 0.0 for c in coeffs.values())

    def test_roundtrip_random(self):
        rng = np.random.default_rng(5)
        m = 2
        layout = ModeLayout(4, 0)
        J = symplectic_form(layout)
        for _ in range(10):
            A = rng.uniform(-1, 1, (8, 8))
            X = ((A + A.T) / 2) @ J
            coeffs = expand_in_basis(X, m)
            recon = sum(c * s_matrix(a) for a, c in coeffs.items())
            assert np.abs(recon - X).max() < 1e-12

    def test_rejects_non_algebra(self):
        with pytest.raises(ValueError):
            expand_in_basis(np.eye(4), 1)


class TestProductIndex:
    def test_empty(self):
        assert product_index([]) == ((PAIR_I,), 1)

    def test_self_product_squares(self):
        for alpha in gamma_set(1):
            idx, sign = product_index([alpha, alpha])
            assert idx == (PAIR_I, PAIR_I)
            dense = s_matrix(alpha) @ s_matrix(alpha)
            assert np.array_equal(dense, sign * np.eye(4))

    def test_xz_gives_y(self):
        idx, sign = product_index([(PAIR_X,), (PAIR_Z,)])
        assert idx == (PAIR_Y,)
        assert np.array_equal(s_matrix((PAIR_X,)) @ s_matrix((PAIR_Z,)),
                              sign * s_matrix((PAIR_Y,)))

    def test_dense_agreement_random(self):
        # 500 seeded tuples for m <= 2
        rng = np.random.default_rng(11)
        for _ in range(500):
            m = int(rng.integers(0, 3))
            s = int(rng.integers(1, 5))
            alphas = [tuple(ALL_PAIRS[i] for i in rng.integers(0, 4, size=m + 1))
                      for _ in range(s)]
            idx, sign = product_index(alphas)
            dense = np.eye(2 ** (m + 1))
            for a in alphas:
                dense = dense @ s_matrix(a)
            assert np.array_equal(dense, sign * s_matrix(idx))


class TestPulses:
    def test_y0_is_y_tensor_identity(self):
        assert np.array_equal(pulse_matrix("y", 0, 1),
                              np.kron(s_matrix((PAIR_Y,)), np.eye(2)))

    def test_x1_swaps_modes(self):
        # I (x) x permutes the two modes in both the Q and the P sector
        W = pulse_matrix("x", 1, 1)
        perm = np.zeros((4, 4))
        perm[0, 1] = perm[1, 0] = perm[2, 3] = perm[3, 2] = 1.0
        assert np.array_equal(W, perm)

    def test_z1_is_diagonal_signs(self):
        W = pulse_matrix("z", 1, 1)
        assert np.array_equal(W, np.diag([1.0, -1.0, 1.0, -1.0]))

    def test_pulses_live_in_gamma_tilde(self):
        m = 2
        by_index = {beta: s_matrix(beta) for beta in gamma_tilde_set(m)}
        for axis, qubit in [("y", 0), ("x", 1), ("y", 1), ("z", 1),
                            ("x", 2), ("y", 2), ("z", 2)]:
            assert pulse_index(axis, qubit, m) in by_index

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            pulse_index("x", 0, 1)
        with pytest.raises(ValueError):
            pulse_index("z", 3, 2)
        with pytest.raises(ValueError):
            pulse_index("w", 1, 1)

    @pytest.mark.parametrize("m", [1, 2])
    def test_generators_exponentiate_to_pulses(self, m):
        # every pulse is +-exp(G) for an algebra element G
        J = symplectic_form(ModeLayout(2 ** m, 0))
        labels = [("y", 0)] + [(ax, i) for i in range(1, m + 1)
                               for ax in ("x", "y", "z")]
        for axis, qubit in labels:
            G = pulse_generator(axis, qubit, m)
            assert is_in_sp_algebra(G, J, tol=1e-12)
            E = matrix_exponential(G)
            W = pulse_matrix(axis, qubit, m)
            assert min(np.abs(E - W).max(), np.abs(E + W).max()) < 1e-13
