import numpy as np
import pytest

from keygait import (
    ContractiveAutoencoder,
    DetectorConfig,
    ManhattanDetector,
    MeanEnsemble,
    OneClassSvm,
    TiedAutoencoder,
    TrainingError,
    VariationalAutoencoder,
    build_detector,
)
from keygait.detectors import autoencoder as ae
from keygait.detectors import contractive as cae
from keygait.detectors import variational as vae
from keygait.detectors.ocsvm import project_capped_simplex, rbf_kernel

from oracles import central_difference, max_relative_error, ocsvm_dual_oracle


def _flat(params, keys):
    arrays = []
    for k in keys:
        v = params[k]
        arrays.extend(v if isinstance(v, list) else [v])
    return np.concatenate([a.ravel() for a in arrays])


def _assign(params, keys, vec):
    pos = 0
    for k in keys:
        v = params[k]
        for a in v if isinstance(v, list) else [v]:
            a[...] = vec[pos : pos + a.size].reshape(a.shape)
            pos += a.size


class TestManhattan:
    def test_score_is_negative_l1_to_mean(self):
        det = ManhattanDetector().fit(np.array([[0.0, 0.0], [2.0, 2.0]]))
        assert det.score(np.array([1.0, 1.0])) == 0.0
        assert det.score(np.array([3.0, 0.0])) == -3.0

    def test_scaled_variant(self):
        x = np.array([[0.0], [2.0], [4.0]])
        det = ManhattanDetector(scaled=True).fit(x)
        # mean 2, mean absolute deviation 4/3
        assert det.score(np.array([6.0])) == pytest.approx(-4.0 / (4.0 / 3.0))

    def test_score_before_fit_raises(self):
        with pytest.raises(RuntimeError):
            ManhattanDetector().score(np.zeros(3))


class TestTiedAutoencoder:
    KEYS = ("W", "b", "c")

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(5)
        for _ in range(4):
            dims = [6, 5, 4, 3]
            params = ae.init_params(rng, dims)
            X = rng.uniform(0.0, 1.0, size=(3, 6))
            _, grads = ae.loss_and_grads(params, X)

            theta0 = _flat(params, self.KEYS)

            def f(theta):
                _assign(params, self.KEYS, theta)
                value = ae.loss_and_grads(params, X)[0]
                _assign(params, self.KEYS, theta0)
                return value

            numeric = central_difference(f, theta0.copy())
            assert max_relative_error(_flat(grads, self.KEYS), numeric) < 1e-4

    def test_training_reduces_loss(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(0.2, 0.8, size=(4, 7))
        init = TiedAutoencoder(epochs=0, seed=3).fit(X)
        trained = TiedAutoencoder(epochs=300, seed=3).fit(X)
        loss_init = ae.loss_and_grads(init.params_, X)[0]
        loss_trained = ae.loss_and_grads(trained.params_, X)[0]
        assert loss_trained < loss_init

    def test_deterministic_given_seed(self):
        X = np.random.default_rng(1).uniform(size=(4, 7))
        q = np.full(7, 0.4)
        a = TiedAutoencoder(epochs=50, seed=9).fit(X).score(q)
        b = TiedAutoencoder(epochs=50, seed=9).fit(X).score(q)
        assert a == b
        c = TiedAutoencoder(epochs=50, seed=10).fit(X).score(q)
        assert a != c

    def test_score_is_negated_squared_error(self):
        X = np.random.default_rng(2).uniform(size=(3, 5))
        det = TiedAutoencoder(epochs=0, seed=0).fit(X)
        q = X[0]
        recon = ae.reconstruct(det.params_, q.reshape(1, -1))[0]
        assert det.score(q) == pytest.approx(-float(((q - recon) ** 2).sum()))

    def test_nonfinite_loss_raises_with_epoch(self):
        X = np.array([[0.5, np.nan, 0.5, 0.5], [0.4, 0.4, 0.4, 0.4]])
        with pytest.raises(TrainingError, match="epoch 0"):
            TiedAutoencoder(epochs=50, seed=0).fit(X)


class TestContractiveAutoencoder:
    KEYS = ("W", "bh", "by")

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(11)
        for _ in range(4):
            params = cae.init_params(rng, 5, 7)
            X = rng.uniform(0.0, 1.0, size=(3, 5))
            lam = 1.5
            _, grads = cae.loss_and_grads(params, X, lam)

            theta0 = _flat(params, self.KEYS)

            def f(theta):
                _assign(params, self.KEYS, theta)
                value = cae.loss_and_grads(params, X, lam)[0]
                _assign(params, self.KEYS, theta0)
                return value

            numeric = central_difference(f, theta0.copy())
            assert max_relative_error(_flat(grads, self.KEYS), numeric) < 1e-4

    def test_penalty_matches_finite_difference_jacobian(self):
        rng = np.random.default_rng(21)
        for _ in range(3):
            params = cae.init_params(rng, 6, 9)
            X = rng.uniform(0.1, 0.9, size=(2, 6))
            analytic = cae.contractive_penalty(params, X)

            total = 0.0
            h = 1e-5
            for r in range(X.shape[0]):
                for j in range(X.shape[1]):
                    up = X[r].copy()
                    up[j] += h
                    down = X[r].copy()
                    down[j] -= h
                    col = (
                        cae.encode(params, up.reshape(1, -1))
                        - cae.encode(params, down.reshape(1, -1))
                    ) / (2.0 * h)
                    total += float((col**2).sum())
            assert abs(analytic - total) / max(abs(total), 1e-12) < 1e-5

    def test_penalty_weight_changes_training(self):
        X = np.random.default_rng(3).uniform(size=(4, 6))
        a = ContractiveAutoencoder(hidden_dim=8, epochs=40, seed=1).fit(X)
        b = ContractiveAutoencoder(
            hidden_dim=8, epochs=40, reg_weight=0.0, seed=1
        ).fit(X)
        assert a.score(X[0]) != b.score(X[0])

    def test_deterministic_given_seed(self):
        X = np.random.default_rng(4).uniform(size=(4, 6))
        q = np.full(6, 0.5)
        a = ContractiveAutoencoder(hidden_dim=16, epochs=30, seed=2).fit(X).score(q)
        b = ContractiveAutoencoder(hidden_dim=16, epochs=30, seed=2).fit(X).score(q)
        assert a == b


class TestVariationalAutoencoder:
    def test_frozen_noise_gradients_match_finite_differences(self):
        rng = np.random.default_rng(17)
        for _ in range(3):
            params = vae.init_params(rng, 6, (5, 5), 3)
            X = rng.uniform(0.05, 0.95, size=(2, 6))
            eps = rng.standard_normal((2, 3))
            _, grads = vae.loss_and_grads(params, X, eps)

            arrays = vae.param_list(params)
            theta0 = np.concatenate([a.ravel() for a in arrays])

            def f(theta):
                pos = 0
                for a in arrays:
                    a[...] = theta[pos : pos + a.size].reshape(a.shape)
                    pos += a.size
                value = vae.loss_and_grads(params, X, eps)[0]
                pos = 0
                for a in arrays:
                    a[...] = theta0[pos : pos + a.size].reshape(a.shape)
                    pos += a.size
                return value

            numeric = central_difference(f, theta0.copy())
            analytic = np.concatenate([g.ravel() for g in vae.param_list(grads)])
            assert max_relative_error(analytic, numeric) < 1e-4

    def test_kl_divergence_zero_at_standard_normal(self):
        mu = np.zeros((3, 2))
        logvar = np.zeros((3, 2))
        assert vae.kl_divergence(mu, logvar) == 0.0

    def test_scoring_is_deterministic_after_fit(self):
        X = np.random.default_rng(6).uniform(size=(4, 6))
        det = VariationalAutoencoder(epochs=5, seed=8).fit(X)
        q = np.full(6, 0.5)
        assert det.score(q) == det.score(q)

    def test_fit_deterministic_given_seed(self):
        X = np.random.default_rng(7).uniform(size=(4, 6))
        q = np.full(6, 0.3)
        a = VariationalAutoencoder(epochs=10, seed=5).fit(X).score(q)
        b = VariationalAutoencoder(epochs=10, seed=5).fit(X).score(q)
        assert a == b

    def test_training_improves_reconstruction(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(0.3, 0.7, size=(6, 5))
        init = VariationalAutoencoder(epochs=0, seed=4).fit(X)
        trained = VariationalAutoencoder(epochs=300, seed=4).fit(X)
        assert vae.reconstruction_loss(trained.params_, X) < vae.reconstruction_loss(
            init.params_, X
        )


class TestProjection:
    def test_hand_cases(self):
        out = project_capped_simplex(np.array([10.0, 0.0, 0.0]), cap=0.5)
        assert np.allclose(out, [0.5, 0.25, 0.25])
        out = project_capped_simplex(np.zeros(4), cap=0.3)
        assert np.allclose(out, 0.25)

    def test_infeasible_cap_raises(self):
        with pytest.raises(TrainingError):
            project_capped_simplex(np.zeros(2), cap=0.4)

    def test_projection_characterization(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n = int(rng.integers(2, 8))
            cap = float(rng.uniform(1.0 / n, 1.2))
            v = rng.normal(0.0, 3.0, size=n)
            a = project_capped_simplex(v, cap)
            assert abs(a.sum() - 1.0) < 1e-12
            assert np.all(a >= -1e-15) and np.all(a <= cap + 1e-15)
            free = (a > 1e-12) & (a < cap - 1e-12)
            if free.any():
                tau = (v[free] - a[free]).mean()
                assert np.allclose(np.clip(v - tau, 0.0, cap), a, atol=1e-9)

    def test_projection_is_nearest_feasible_point(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            n = 5
            cap = 0.4
            v = rng.normal(size=n)
            a = project_capped_simplex(v, cap)
            d_a = float(((v - a) ** 2).sum())
            for _ in range(200):
                b = project_capped_simplex(rng.normal(size=n), cap)
                assert d_a <= ((v - b) ** 2).sum() + 1e-9


class TestOneClassSvm:
    def test_dual_objective_matches_enumeration_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            X = rng.uniform(size=(4, 6))
            det = OneClassSvm(nu=0.5, gamma=0.9).fit(X)
            K = rbf_kernel(X, X, 0.9)
            expected, _ = ocsvm_dual_oracle(K, 0.5)
            assert det.dual_objective() == pytest.approx(expected, abs=1e-6)

    def test_interior_support_vectors_score_zero(self):
        rng = np.random.default_rng(13)
        found_interior = 0
        for _ in range(6):
            X = rng.uniform(size=(4, 5))
            det = OneClassSvm(nu=0.5, gamma=0.9).fit(X)
            cap = 1.0 / (0.5 * 4)
            eps = 1e-9 * cap
            for i, a in enumerate(det.alpha_):
                if eps < a < cap - eps:
                    found_interior += 1
                    assert abs(det.score(X[i])) < 1e-8
        assert found_interior > 0

    def test_kkt_residual_small(self):
        X = np.random.default_rng(14).uniform(size=(6, 4))
        det = OneClassSvm(nu=0.3, gamma=1.2).fit(X)
        assert det.kkt_residual() < 1e-9

    def test_nu_one_puts_every_alpha_at_cap(self):
        X = np.random.default_rng(15).uniform(size=(4, 3))
        det = OneClassSvm(nu=1.0, gamma=0.9).fit(X)
        assert np.allclose(det.alpha_, 0.25)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            OneClassSvm(nu=0.0)
        with pytest.raises(ValueError):
            OneClassSvm(nu=1.5)
        with pytest.raises(ValueError):
            OneClassSvm(gamma=-1.0)


class TestEnsemble:
    def test_mean_of_member_scores(self):
        x = np.array([[0.0, 0.0], [2.0, 2.0]])
        members = [ManhattanDetector(), ManhattanDetector(scaled=True)]
        det = MeanEnsemble(members).fit(x)
        q = np.array([3.0, 1.0])
        expected = np.mean([m.score(q) for m in members])
        assert det.score(q) == pytest.approx(expected)

    def test_requires_two_members(self):
        with pytest.raises(ValueError):
            MeanEnsemble([ManhattanDetector()])


class TestBuildDetector:
    def test_all_names_construct(self):
        for name in ("manhattan", "autoencoder", "contractive", "variational", "ocsvm"):
            det = build_detector(DetectorConfig(name=name))
            assert hasattr(det, "fit")

    def test_unknown_name_raises(self):
        with pytest.raises(ValueError, match="unknown detector"):
            build_detector(DetectorConfig(name="nope"))

    def test_params_and_seed_injection(self):
        config = DetectorConfig(name="autoencoder", params={"epochs": 7, "hidden_sizes": [4, 3]})
        det = build_detector(config, seed=42)
        assert det.epochs == 7
        assert det.hidden_sizes == (4, 3)
        assert det.seed == 42

    def test_seed_ignored_for_unseeded_detectors(self):
        det = build_detector(DetectorConfig(name="manhattan", params={"seed": 5}))
        assert not hasattr(det, "seed")

    def test_ensemble_members_get_distinct_seeds(self):
        config = DetectorConfig(
            name="ensemble",
            members=(
                DetectorConfig(name="autoencoder", params={"epochs": 1}),
                DetectorConfig(name="autoencoder", params={"epochs": 1}),
            ),
        )
        det = build_detector(config, seed=100)
        assert [m.seed for m in det.members] == [101, 102]

    def test_ensemble_needs_members(self):
        with pytest.raises(ValueError):
            build_detector(DetectorConfig(name="ensemble"))
