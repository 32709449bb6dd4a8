import math

import numpy as np
import pytest

from bosonic_dd.spin_boson import (
    BathSpec,
    ChannelParams,
    added_noise,
    channel_apply,
    channel_params,
    coupling_matrix,
    cross_validate,
    even_flip_train,
    f_filter,
    noise_spectrum_value,
    pair_shear,
    shear_parameter,
    thermal_covariance,
    uncontrolled_propagator,
    y_filter,
)
from bosonic_dd.symplectic import (
    ModeLayout,
    is_symplectic,
    matrix_exponential,
    symplectic_form,
)


def seeded_bath(seed, n, beta=1.0, scale=0.3):
    rng = np.random.default_rng(seed)
    om = rng.uniform(0.2, 1.0, n)
    om /= om.max()
    lam = scale * rng.uniform(0.5, 1.0, n)
    return BathSpec(couplings=tuple(lam), frequencies=tuple(om), beta=beta)


class TestBathSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            BathSpec(couplings=(1.0,), frequencies=(1.0, 2.0), beta=1.0)
        with pytest.raises(ValueError):
            BathSpec(couplings=(1.0,), frequencies=(0.0,), beta=1.0)
        with pytest.raises(ValueError):
            BathSpec(couplings=(1.0,), frequencies=(1.0,), beta=-1.0)

    def test_vacuum_flag(self):
        bath = BathSpec(couplings=(0.1,), frequencies=(1.0,), beta=math.inf)
        assert bath.thermal_weights() == pytest.approx([1.0])


class TestFilters:
    def test_y_vanishes_at_zero(self):
        for L, deltas in [(2, (0.25, 0.75)), (4, even_flip_train(4))]:
            assert abs(y_filter(0.0, deltas)) < 1e-15

    def test_y_frozen_value(self):
        # L=2, deltas (1/4, 3/4), z = 2pi: 2(-i + -i) + 1 - 1 = -4i
        val = y_filter(2 * math.pi, (0.25, 0.75))
        assert val == pytest.approx(-4j, abs=1e-12)

    def test_odd_train_rejected(self):
        with pytest.raises(ValueError):
            y_filter(1.0, (0.5,))
        with pytest.raises(ValueError):
            f_filter(1.0, (0.1, 0.5, 0.9))

    @pytest.mark.parametrize("n_pulses,zlo,zhi", [
        (1, -3.0, -1.5), (2, -3.0, -1.5), (3, -2.0, -1.0), (4, -1.5, -0.75),
    ])
    def test_small_z_suppression_order(self, n_pulses, zlo, zhi):
        # |y_L(z)| = O(z^{N+1}) for the (completed) Uhrig train; the window
        # moves with N to stay above the double-precision cancellation floor
        deltas = even_flip_train(n_pulses)
        zs = np.logspace(zlo, zhi, 8)
        vals = [abs(y_filter(z, deltas)) for z in zs]
        slope = np.polyfit(np.log(zs), np.log(vals), 1)[0]
        assert slope == pytest.approx(n_pulses + 1, abs=0.25)

    def test_f_identities_on_grid(self):
        deltas = even_flip_train(3)
        for z in np.linspace(0.05, 12.0, 100):
            fl = f_filter(z, deltas)
            yl = y_filter(z, deltas)
            assert fl.real - math.sin(z) == pytest.approx(yl.imag, abs=1e-12)
            assert fl.imag + 1.0 - math.cos(z) == pytest.approx(yl.real, abs=1e-12)

    def test_even_train_completion(self):
        assert len(even_flip_train(1)) == 2
        assert even_flip_train(1)[-1] == 1.0
        assert len(even_flip_train(2)) == 2
        assert len(even_flip_train(3)) == 4


class TestChannelScalars:
    def test_zero_coupling(self):
        bath = BathSpec(couplings=(0.0, 0.0), frequencies=(0.5, 1.0), beta=2.0)
        deltas = (0.25, 0.75)
        assert shear_parameter(1.0, bath, deltas) == 0.0
        assert added_noise(1.0, bath, deltas) == 0.0

    def test_shear_is_beta_independent(self):
        deltas = even_flip_train(2)
        vals = []
        for beta in (0.1, 1.0, 10.0):
            bath = seeded_bath(5, 3, beta=beta)
            vals.append(shear_parameter(0.9, bath, deltas))
        assert max(vals) - min(vals) < 1e-12

    def test_noise_nonnegative_and_beta_monotone(self):
        deltas = even_flip_train(2)
        for seed in range(8):
            y_prev = math.inf
            for beta in (0.1, 0.5, 2.0, 10.0):
                bath = seeded_bath(seed, 3, beta=beta)
                y = added_noise(0.7, bath, deltas)
                assert y >= 0.0
                assert y <= y_prev + 1e-15
                y_prev = y

    @pytest.mark.parametrize("n_pulses", [1, 2])
    def test_noise_small_time_scaling(self, n_pulses):
        # y ~ T^{2(N+1)} as T -> 0 under the (completed) Uhrig train
        bath = seeded_bath(2, 3)
        deltas = even_flip_train(n_pulses)
        Ts = np.logspace(-2.5, -1.0, 8)
        ys = [added_noise(T, bath, deltas) for T in Ts]
        slope = np.polyfit(np.log(Ts), np.log(ys), 1)[0]
        assert slope == pytest.approx(2 * (n_pulses + 1), abs=0.4)

    def test_spectrum_entry_point_equals_noise(self):
        deltas = even_flip_train(2)
        for seed in range(20):
            bath = seeded_bath(seed, 1 + seed % 4, beta=0.5 + 0.3 * seed)
            assert noise_spectrum_value(bath, 0.8, deltas) == pytest.approx(
                added_noise(0.8, bath, deltas), rel=1e-14)

    def test_zero_filter_line_contributes_nothing(self):
        # a single line at a frequency where y_L vanishes adds no noise
        deltas = (0.5, 1.0)
        z = 4.0 * math.pi  # y_L(2 pi k) = 0 for this train
        assert abs(y_filter(z, deltas)) < 1e-12
        bath = BathSpec(couplings=(0.3,), frequencies=(1.0,), beta=1.0)
        assert added_noise(z / 1.0, bath, deltas) == pytest.approx(0.0, abs=1e-24)


class TestThermalCovariance:
    def test_vacuum(self):
        bath = BathSpec(couplings=(0.1, 0.1), frequencies=(0.5, 1.0), beta=math.inf)
        assert np.array_equal(thermal_covariance(bath), np.eye(4))

    def test_coth_value(self):
        # beta omega = 2 -> coth(1)
        bath = BathSpec(couplings=(0.1,), frequencies=(1.0,), beta=2.0)
        M = thermal_covariance(bath)
        assert M[0, 0] == pytest.approx(1.3130352854993312, rel=1e-12)

    def test_entries_at_least_one(self):
        for seed in range(5):
            bath = seeded_bath(seed, 4, beta=0.3 + seed)
            assert thermal_covariance(bath).diagonal().min() >= 1.0


class TestUncontrolledPropagator:
    def test_time_zero(self):
        bath = seeded_bath(1, 3)
        assert np.array_equal(uncontrolled_propagator(bath, 0.0), np.eye(8))

    def test_uncoupled_rotation(self):
        bath = BathSpec(couplings=(0.0, 0.0), frequencies=(0.5, 1.2), beta=1.0)
        t = 0.7
        S = uncontrolled_propagator(bath, t)
        assert np.array_equal(S[:2, :2], np.eye(2))
        c = np.cos(np.array([0.5, 1.2]) * t)
        s = np.sin(np.array([0.5, 1.2]) * t)
        assert np.allclose(S[2:4, 2:4], np.diag(c))
        assert np.allclose(S[2:4, 4:6], -np.diag(s))
        assert np.allclose(S[4:6, 2:4], np.diag(s))

    def test_matches_exponential_oracle(self):
        # 50 seeded (bath, t) pairs against expm(t X)
        rng = np.random.default_rng(9)
        J = None
        for k in range(50):
            bath = seeded_bath(k, int(rng.integers(1, 5)))
            t = float(rng.uniform(0.0, 3.0))
            layout = ModeLayout(1, bath.n_modes)
            X = coupling_matrix(bath) @ symplectic_form(layout)
            S_closed = uncontrolled_propagator(bath, t)
            assert np.abs(S_closed - matrix_exponential(t * X)).max() < 1e-10

    def test_symplectic(self):
        bath = seeded_bath(3, 4)
        layout = ModeLayout(1, 4)
        J = symplectic_form(layout)
        for t in (0.3, 1.1, 2.7):
            assert is_symplectic(uncontrolled_propagator(bath, t), J, tol=1e-10)


class TestChannelApply:
    def test_identity_channel(self):
        params = ChannelParams(x_shear=0.0, y_noise=0.0, total_time=1.0,
                               deltas=(0.25, 0.75))
        M0 = np.array([[1.5, 0.2], [0.2, 0.9]])
        assert np.array_equal(channel_apply(M0, params), M0)

    def test_shear_of_identity(self):
        a, y = 0.4, 0.05
        params = ChannelParams(x_shear=a, y_noise=y, total_time=1.0,
                               deltas=(0.25, 0.75))
        out = channel_apply(np.eye(2), params)
        expected = np.array([[1 + a * a + y, a], [a, 1.0]])
        assert np.abs(out - expected).max() < 1e-15

    def test_determinant_grows_by_noise(self):
        # for M0 = I: det(M_out) = 1 + y
        params = ChannelParams(x_shear=0.7, y_noise=0.3, total_time=1.0,
                               deltas=(0.5, 1.0))
        out = channel_apply(np.eye(2), params)
        assert np.linalg.det(out) == pytest.approx(1.3, rel=1e-12)

    def test_shear_matrix_is_symplectic(self):
        sh = np.array([[1.0, 0.83], [0.0, 1.0]])
        assert np.linalg.det(sh) == 1.0

    def test_negative_noise_rejected(self):
        with pytest.raises(ValueError):
            ChannelParams(x_shear=0.0, y_noise=-0.1, total_time=1.0,
                          deltas=(0.5, 1.0))


class TestCrossValidation:
    def test_uncoupled_exact(self):
        bath = BathSpec(couplings=(0.0, 0.0, 0.0),
                        frequencies=(0.4, 0.7, 1.0), beta=1.0)
        report = cross_validate(bath, even_flip_train(2), 0.8)
        assert report.max_deviation < 1e-12

    def test_seeded_bath_oracle_equivalence(self):
        bath = seeded_bath(11, 3)
        for T in (0.3, 0.9, 1.7):
            report = cross_validate(bath, even_flip_train(2), T)
            assert report.max_deviation < 1e-8

    def test_asymmetric_train(self):
        # breaks the Uhrig symmetry, exercising the pulse-pair shear part
        bath = seeded_bath(12, 2)
        assert abs(pair_shear(1.1, bath, (0.2, 0.55))) > 1e-6
        report = cross_validate(bath, (0.2, 0.55), 1.1)
        assert report.max_deviation < 1e-10

    def test_covariance_choice_immaterial(self):
        bath = seeded_bath(13, 3)
        report = cross_validate(bath, even_flip_train(2), 0.6,
                                covariances=(np.eye(2), np.diag([4.0, 0.25])))
        assert all(d < 1e-8 for d in report.deviations)

    def test_bath_size_guard(self):
        bath = seeded_bath(1, 6)
        with pytest.raises(ValueError):
            cross_validate(bath, (0.25, 0.75), 1.0)

    def test_channel_params_helper(self):
        bath = seeded_bath(14, 2)
        p = channel_params(bath, 0.5, even_flip_train(2))
        assert p.y_noise >= 0
        assert p.total_time == 0.5
