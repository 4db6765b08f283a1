import numpy as np
import pytest

from factored_sdp.linalg import gram, symmetrize
from factored_sdp.objective import SampleObjective, sensing_generate
from factored_sdp.solvers import (
    DivergedError,
    RunRecord,
    SolverConfig,
    epoch_cost,
    run_fgd,
    run_projgd,
    run_sfgd,
    run_svrg,
)
from factored_sdp.stepsize import StallError, bb, fixed, sbb


class ConstantObjective(SampleObjective):
    """f(X) = 3 with an exactly-zero gradient."""

    def __init__(self, p, n=4):
        self.p = p
        self.n = n

    def eval_sample(self, i, X):
        return 3.0

    def grad_sample(self, i, X):
        return np.zeros((self.p, self.p))


class LinearObjective(SampleObjective):
    """f(X) = <C, X>: constant nonzero gradient."""

    def __init__(self, C):
        self.C = symmetrize(C)
        self.p = C.shape[0]
        self.n = 1

    def eval_sample(self, i, X):
        return float(np.vdot(self.C, X))

    def grad_sample(self, i, X):
        return self.C.copy()


def svrg_config(**kw):
    base = dict(algorithm="svrg-fixed", r=2, epochs=3, seed=0, m=5,
                schedule=fixed(0.01))
    base.update(kw)
    return SolverConfig(**base)


class TestSolverConfig:
    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            SolverConfig(algorithm="fgd", r=0, epochs=1, seed=0)
        with pytest.raises(ValueError):
            SolverConfig(algorithm="fgd", r=1, epochs=0, seed=0)
        with pytest.raises(ValueError):
            SolverConfig(algorithm="svrg-fixed", r=1, epochs=1, seed=0, m=0)
        with pytest.raises(ValueError):
            SolverConfig(algorithm="fgd", r=1, epochs=1, seed=0, eval_every=0)

    def test_rejects_factor_shape_mismatch(self):
        prob = sensing_generate(4, 2, 8, seed=0)
        with pytest.raises(ValueError):
            run_fgd(prob, SolverConfig(algorithm="fgd", r=2, epochs=1, seed=0,
                                       eta=0.1), np.zeros((4, 3)))


class TestEpochCost:
    def test_known_counts(self):
        assert epoch_cost("svrg-sbb", 100, 100) == 200
        assert epoch_cost("fgd", 100) == 100
        assert epoch_cost("sfgd", 100) == 100
        assert epoch_cost("projgd", 100) == 100

    def test_svrg_requires_m(self):
        with pytest.raises(ValueError):
            epoch_cost("svrg-fixed", 100)

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            epoch_cost("sgd", 100)

    def test_counts_recorded_in_rows(self):
        prob = sensing_generate(4, 2, 8, seed=1)
        rng = np.random.default_rng(2)
        U0 = rng.standard_normal((4, 2))
        rec = run_svrg(prob, svrg_config(epochs=4, m=3), U0)
        for row in rec.rows:
            assert row.sample_grads == row.epoch * (8 + 3)


class TestSvrg:
    def test_zero_gradient_fixed_point(self):
        obj = ConstantObjective(3)
        U0 = np.random.default_rng(3).standard_normal((3, 2))
        rec = run_svrg(obj, svrg_config(epochs=4), U0)
        np.testing.assert_array_equal(rec.final_U, U0)
        assert all(row.f == 3.0 for row in rec.rows)

    def test_first_inner_step_ignores_sampling(self):
        # with m=1 the stochastic terms cancel at t=0, so one outer
        # iteration is the deterministic anchor step no matter the seed
        prob = sensing_generate(4, 2, 10, seed=4)
        U0 = np.random.default_rng(5).standard_normal((4, 2))
        eta = 0.01
        outs = []
        for seed in (0, 1, 2):
            cfg = svrg_config(epochs=1, m=1, seed=seed, schedule=fixed(eta))
            outs.append(run_svrg(prob, cfg, U0).final_U)
        X0 = gram(U0)
        expected = U0 - eta * (prob.grad_full(X0) @ U0)
        for out in outs:
            assert np.abs(out - expected).max() <= 1e-12

    def test_single_sample_matches_fgd(self):
        # n=1 collapses the variance-reduced direction to the full
        # gradient, so m inner steps replay m FGD iterations
        rng = np.random.default_rng(6)
        Ustar = rng.standard_normal((4, 2))
        A = symmetrize(rng.standard_normal((4, 4)))[None, :, :]
        b = np.array([np.vdot(A[0], gram(Ustar))])
        from factored_sdp.objective import SensingProblem

        prob = SensingProblem(A, b)
        U0 = rng.standard_normal((4, 2))
        eta = 0.02
        svrg = run_svrg(prob, svrg_config(epochs=2, m=3, schedule=fixed(eta)), U0)
        fgd = run_fgd(prob, SolverConfig(algorithm="fgd", r=2, epochs=6, seed=0,
                                         eta=eta), U0)
        assert np.abs(svrg.final_U - fgd.final_U).max() <= 1e-12

    def test_direction_unbiased(self):
        prob = sensing_generate(5, 2, 30, seed=7)
        rng = np.random.default_rng(8)
        Utilde = rng.standard_normal((5, 2))
        U = rng.standard_normal((5, 2))
        Xt = gram(Utilde)
        g_anchor = prob.grad_full(Xt) @ Utilde
        mean = np.zeros_like(U)
        for i in range(prob.n):
            cur = prob.grad_sample_times_factor(i, None, U)
            anc = prob.grad_sample_times_factor(i, Xt, Utilde)
            mean += cur - anc + g_anchor
        mean /= prob.n
        full = prob.grad_full(gram(U)) @ U
        assert np.abs(mean - full).max() <= 1e-10

    def test_deterministic_per_seed(self):
        prob = sensing_generate(5, 2, 12, seed=9)
        U0 = np.random.default_rng(10).standard_normal((5, 2))
        a = run_svrg(prob, svrg_config(seed=42, schedule=sbb(0.1, 5, eta0=0.01)),
                     U0, X_ref=prob.Xstar, U_ref=prob.Ustar)
        b = run_svrg(prob, svrg_config(seed=42, schedule=sbb(0.1, 5, eta0=0.01)),
                     U0, X_ref=prob.Xstar, U_ref=prob.Ustar)
        assert a.rows == b.rows
        np.testing.assert_array_equal(a.final_U, b.final_U)

    def test_stall_propagates(self):
        obj = LinearObjective(np.diag([1.0, 2.0, 3.0]))
        U0 = np.random.default_rng(11).standard_normal((3, 2))
        cfg = svrg_config(epochs=3, schedule=bb(5, eta0=1e-3))
        with pytest.raises(StallError):
            run_svrg(obj, cfg, U0)

    def test_decreases_error_toward_planted_optimum(self):
        prob = sensing_generate(8, 2, 80, seed=12)
        rng = np.random.default_rng(13)
        G = rng.standard_normal(prob.Ustar.shape)
        U0 = prob.Ustar + 0.05 * G / np.linalg.norm(G)
        cfg = svrg_config(epochs=8, m=80, schedule=fixed(0.002), r=2)
        rec = run_svrg(prob, cfg, U0, X_ref=prob.Xstar, U_ref=prob.Ustar)
        errs = [row.error_U for row in rec.rows]
        assert errs[-1] < errs[0] * 1e-2

    def test_mean_error_curve_monotone(self):
        # seed-averaged distance to the planted factor is nonincreasing
        # for a well-conditioned instance started near the optimum
        prob = sensing_generate(6, 2, 40, seed=14)
        rng = np.random.default_rng(15)
        G = rng.standard_normal(prob.Ustar.shape)
        U0 = prob.Ustar + 0.1 * G / np.linalg.norm(G)
        curves = []
        for seed in range(20):
            cfg = svrg_config(epochs=6, m=40, seed=seed, schedule=fixed(0.004))
            rec = run_svrg(prob, cfg, U0, U_ref=prob.Ustar)
            curves.append([row.error_U for row in rec.rows])
        mean = np.mean(np.array(curves), axis=0)
        for a, b in zip(mean, mean[1:]):
            assert b <= a * (1 + 1e-3)


class TestFgd:
    def test_zero_step_is_constant(self):
        prob = sensing_generate(4, 2, 8, seed=16)
        U0 = np.random.default_rng(17).standard_normal((4, 2))
        rec = run_fgd(prob, SolverConfig(algorithm="fgd", r=2, epochs=3, seed=0,
                                         eta=0.0), U0)
        np.testing.assert_array_equal(rec.final_U, U0)

    def test_zero_gradient_is_constant(self):
        obj = ConstantObjective(4)
        U0 = np.random.default_rng(18).standard_normal((4, 2))
        rec = run_fgd(obj, SolverConfig(algorithm="fgd", r=2, epochs=3, seed=0,
                                        eta=0.5), U0)
        np.testing.assert_array_equal(rec.final_U, U0)

    def test_descent_with_small_step(self):
        prob = sensing_generate(6, 2, 40, seed=19)
        U0 = np.random.default_rng(20).standard_normal((6, 2))
        rec = run_fgd(prob, SolverConfig(algorithm="fgd", r=2, epochs=30, seed=0,
                                         eta=0.003), U0)
        fs = [row.f for row in rec.rows]
        for a, b in zip(fs, fs[1:]):
            assert b <= a + 1e-12

    def test_divergence_reported_with_partial_record(self):
        prob = sensing_generate(5, 2, 10, seed=21)
        U0 = np.random.default_rng(22).standard_normal((5, 2))
        cfg = SolverConfig(algorithm="fgd", r=2, epochs=50, seed=0, eta=1e6)
        with pytest.raises(DivergedError) as info:
            run_fgd(prob, cfg, U0, X_ref=prob.Xstar)
        err = info.value
        assert isinstance(err.record, RunRecord)
        assert err.record.diverged
        assert err.record.diverged_epoch == err.epoch
        assert 1 <= err.epoch <= 50
        last = err.record.rows[-1]
        assert last.epoch == err.epoch
        assert np.isnan(last.f)
        assert np.isnan(last.error_X)
        grads = [row.sample_grads for row in err.record.rows]
        assert grads == sorted(grads)


class TestSfgd:
    def test_single_sample_fixed_step_matches_fgd(self):
        rng = np.random.default_rng(23)
        Ustar = rng.standard_normal((4, 2))
        A = symmetrize(rng.standard_normal((4, 4)))[None, :, :]
        b = np.array([np.vdot(A[0], gram(Ustar))])
        from factored_sdp.objective import SensingProblem

        prob = SensingProblem(A, b)
        U0 = rng.standard_normal((4, 2))
        import math

        sfgd = run_sfgd(prob, SolverConfig(algorithm="sfgd", r=2, epochs=5, seed=0,
                                           eta0=0.02, t0=math.inf), U0)
        fgd = run_fgd(prob, SolverConfig(algorithm="fgd", r=2, epochs=5, seed=0,
                                         eta=0.02), U0)
        assert np.abs(sfgd.final_U - fgd.final_U).max() <= 1e-12

    def test_expected_direction_is_full_gradient(self):
        prob = sensing_generate(5, 2, 25, seed=24)
        U = np.random.default_rng(25).standard_normal((5, 2))
        mean = np.zeros_like(U)
        for i in range(prob.n):
            mean += prob.grad_sample_times_factor(i, None, U)
        mean /= prob.n
        assert np.abs(mean - prob.grad_full(gram(U)) @ U).max() <= 1e-10

    def test_deterministic_per_seed(self):
        prob = sensing_generate(5, 2, 15, seed=26)
        U0 = np.random.default_rng(27).standard_normal((5, 2))
        cfg = dict(algorithm="sfgd", r=2, epochs=4, seed=7, eta0=0.01)
        a = run_sfgd(prob, SolverConfig(**cfg), U0, U_ref=prob.Ustar)
        b = run_sfgd(prob, SolverConfig(**cfg), U0, U_ref=prob.Ustar)
        assert a.rows == b.rows
        np.testing.assert_array_equal(a.final_U, b.final_U)

    def test_recorded_step_decays_per_epoch(self):
        prob = sensing_generate(4, 2, 6, seed=28)
        U0 = 0.01 * np.random.default_rng(29).standard_normal((4, 2))
        rec = run_sfgd(prob, SolverConfig(algorithm="sfgd", r=2, epochs=3, seed=0,
                                          eta0=0.1), U0)
        # t0 defaults to n, so the first step of epoch k uses 0.1 / (1 + k)
        etas = [row.eta for row in rec.rows[:3]]
        np.testing.assert_allclose(etas, [0.1, 0.05, 0.1 / 3.0], rtol=1e-12)
        assert rec.rows[-1].eta == 0.0


class TestProjGd:
    def test_zero_gradient_nearly_constant(self):
        obj = ConstantObjective(4)
        X0 = gram(np.random.default_rng(30).standard_normal((4, 2)))
        cfg = SolverConfig(algorithm="projgd", r=1, epochs=3, seed=0, eta=0.5)
        rec = run_projgd(obj, cfg, X0)
        assert np.abs(rec.final_X - X0).max() <= 1e-12 * max(1, np.abs(X0).max())

    def test_iterates_stay_psd(self):
        prob = sensing_generate(4, 2, 20, seed=31)
        X0 = symmetrize(np.random.default_rng(32).standard_normal((4, 4)))
        assert np.linalg.eigvalsh(X0).min() < 0
        cfg = SolverConfig(algorithm="projgd", r=1, epochs=1, seed=0, eta=0.01)
        rec = run_projgd(prob, cfg, X0)
        assert np.linalg.eigvalsh(rec.final_X).min() >= -1e-10

    def test_descent_on_convex_instance(self):
        prob = sensing_generate(5, 2, 30, seed=33)
        X0 = gram(np.random.default_rng(34).standard_normal((5, 2)))
        cfg = SolverConfig(algorithm="projgd", r=1, epochs=25, seed=0, eta=0.01)
        rec = run_projgd(prob, cfg, X0, X_ref=prob.Xstar)
        fs = [row.f for row in rec.rows]
        for a, b in zip(fs, fs[1:]):
            assert b <= a + 1e-12
        assert all(row.error_U is None for row in rec.rows)


class TestRowLayout:
    def test_eval_every_thins_rows(self):
        prob = sensing_generate(4, 2, 8, seed=35)
        U0 = np.random.default_rng(36).standard_normal((4, 2))
        cfg = SolverConfig(algorithm="fgd", r=2, epochs=10, seed=0, eta=0.001,
                           eval_every=3)
        rec = run_fgd(prob, cfg, U0)
        assert [row.epoch for row in rec.rows] == [0, 3, 6, 9, 10]

    def test_last_row_is_final_state_with_zero_eta(self):
        prob = sensing_generate(4, 2, 8, seed=37)
        U0 = np.random.default_rng(38).standard_normal((4, 2))
        rec = run_svrg(prob, svrg_config(epochs=3), U0, X_ref=prob.Xstar,
                       U_ref=prob.Ustar)
        assert [row.epoch for row in rec.rows] == [0, 1, 2, 3]
        assert rec.rows[-1].eta == 0.0
        assert all(row.eta > 0 for row in rec.rows[:-1])

    def test_exact_recovery_smoke(self):
        prob = sensing_generate(10, 2, 120, seed=39)
        rng = np.random.default_rng(40)
        G = rng.standard_normal(prob.Ustar.shape)
        U0 = prob.Ustar + 0.05 * G / np.linalg.norm(G)
        cfg = svrg_config(epochs=40, m=120, schedule=fixed(0.002), r=2)
        rec = run_svrg(prob, cfg, U0, X_ref=prob.Xstar)
        assert rec.rows[-1].error_X < 1e-9
