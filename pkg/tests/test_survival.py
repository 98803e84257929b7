import numpy as np
import pytest

from seasruin import (
    DimensionMismatch,
    MassBoundsError,
    MassSequence,
    Regime,
    RiskModel,
    SimConfig,
    ValidationError,
    ZeroDivisor,
    characteristic_roots,
    classify_regime,
    convolve,
    displaced_poisson,
    estimate_survival,
    extend_masses,
    finite_survival,
    finite_table,
    solve_boundary,
    survival_via_block_recurrence,
    truncate,
    ultimate_survival,
)
from conftest import (
    enumerate_finite_survival,
    random_net_profit_model,
    value_iteration_survival,
)

ULTIMATE_REF_1 = {0: 0.442, 1: 0.650, 2: 0.790, 3: 0.876, 4: 0.928, 5: 0.958, 10: 0.997, 15: 1.0}
ULTIMATE_REF_2 = {0: 0.048, 1: 0.127, 2: 0.209, 3: 0.286, 4: 0.355, 5: 0.417,
          10: 0.649, 20: 0.873, 30: 0.954, 40: 0.983, 50: 0.994}


class TestRegime:
    def test_net_profit(self, ex1):
        assert classify_regime(ex1) is Regime.NET_PROFIT

    def test_supercritical(self):
        m = RiskModel(kappa=1, seasons=(finite_table([0.0, 0.0, 1.0]),))
        assert classify_regime(m) is Regime.SUPERCRITICAL

    def test_degenerate(self):
        m = RiskModel(kappa=1, seasons=(finite_table([1.0]), finite_table([0, 0, 1.0])))
        assert classify_regime(m) is Regime.DEGENERATE

    def test_critical_nondegenerate(self):
        m = RiskModel(
            kappa=1,
            seasons=(finite_table([0.5, 0.0, 0.5]), finite_table([0.0, 1.0])),
        )
        assert classify_regime(m) is Regime.CRITICAL_NONDEGENERATE


class TestExtendMasses:
    def test_cumulative_masses_give_phi(self, ex1):
        rs = characteristic_roots(ex1)
        seq = extend_masses(ex1, solve_boundary(ex1, rs), 8)
        assert seq.m[0, :3].sum() == pytest.approx(ULTIMATE_REF_1[3], abs=1e-3)

    def test_shifted_support_extension(self, ex2):
        rs = characteristic_roots(ex2)
        seq = extend_masses(ex2, solve_boundary(ex2, rs), 12)
        assert seq.m[0, :10].sum() == pytest.approx(ULTIMATE_REF_2[10], abs=1e-3)

    def test_vanishing_tail_masses(self, ex3):
        # float64 lane: the boundary masses carry ~1e-13 of error which the
        # forward recurrence amplifies, so "zero" means below the clamp scale
        rs = characteristic_roots(ex3)
        seq = extend_masses(ex3, solve_boundary(ex3, rs), 10)
        assert np.max(np.abs(seq.m[0, 2:])) <= 1e-9

    def test_mass_sum_approaches_one(self, ex1):
        # sum_n m_n^(1) -> 1 under net profit; phi(u) = partial sum up to u-1
        t = ultimate_survival(ex1, 60)
        assert t[25] < t[60] <= 1.0
        assert t[60] >= 1 - 1e-4

    def test_n_max_precondition(self, ex1):
        rs = characteristic_roots(ex1)
        with pytest.raises(ValidationError):
            extend_masses(ex1, solve_boundary(ex1, rs), 1)

    def test_min_support_beyond_kappa_is_rejected(self):
        # one season's claims always exceed the per-period premium
        m = RiskModel(
            kappa=1,
            seasons=(
                finite_table([0, 0, 1.0]),
                finite_table([1.0]),
                finite_table([0.9, 0.1]),
            ),
        )
        fake = MassSequence(m=np.zeros((3, 1)))
        with pytest.raises((ZeroDivisor, DimensionMismatch)):
            ultimate_survival(m, 3)

    def test_clamping_bounds(self):
        seq = MassSequence(m=np.array([[0.5, -5e-10]]))
        assert seq.m[0, 1] == 0.0
        with pytest.raises(MassBoundsError):
            MassSequence(m=np.array([[0.5, -1e-6]]))


class TestUltimateSurvival:
    def test_table1(self, ex1):
        t = ultimate_survival(ex1, 15)
        for u, want in ULTIMATE_REF_1.items():
            assert t[u] == pytest.approx(want, abs=1e-3)

    def test_table2_deep_extension(self, ex2):
        t = ultimate_survival(ex2, 50)
        for u, want in ULTIMATE_REF_2.items():
            assert t[u] == pytest.approx(want, abs=1e-3)

    def test_exact_rational_model(self, ex3):
        t = ultimate_survival(ex3, 8)
        assert t[0] == pytest.approx(0.9728, abs=1e-12)
        assert t[1] == pytest.approx(0.9984, abs=1e-12)
        for u in range(2, 9):
            assert t[u] == pytest.approx(1.0, abs=1e-12)

    def test_supercritical_is_zero(self):
        m = RiskModel(kappa=1, seasons=(finite_table([0.1, 0.1, 0.8]),))
        assert ultimate_survival(m, 5).phi == (0.0,) * 6

    def test_critical_nondegenerate_is_zero(self):
        m = RiskModel(
            kappa=1, seasons=(finite_table([0.5, 0.0, 0.5]), finite_table([0.0, 1.0]))
        )
        assert ultimate_survival(m, 5).phi == (0.0,) * 6

    def test_degenerate_threshold(self):
        m = RiskModel(kappa=1, seasons=(finite_table([1.0]), finite_table([0, 0, 1.0])))
        t = ultimate_survival(m, 4)
        assert t.phi == (0.0, 1.0, 1.0, 1.0, 1.0)
        assert t.regime is Regime.DEGENERATE

    def test_value_iteration_oracle_random_models(self):
        rng = np.random.default_rng(314)
        for _ in range(6):
            model = random_net_profit_model(rng, kappa_max=2, n_max=3, support_max=4)
            got = ultimate_survival(model, 6)
            want = value_iteration_survival(model, 6, cap=300)
            assert np.allclose(got.phi, want, atol=1e-8)

    def test_classical_bernoulli_closed_form(self):
        p = 0.7
        model = RiskModel(kappa=1, seasons=(finite_table([p, 0.0, 1 - p]),))
        t = ultimate_survival(model, 10)
        assert t[0] == pytest.approx(2 * p - 1, abs=1e-12)
        for u in range(1, 11):
            assert t[u] == pytest.approx(1 - ((1 - p) / p) ** u, abs=1e-12)


class TestBlockRecurrence:
    def test_phi0_from_first_block(self, ex1):
        t = ultimate_survival(ex1, 4)
        phi = survival_via_block_recurrence(ex1, [t[1], t[2], t[3], t[4]], 4)
        assert phi[0] == pytest.approx(0.442, abs=1e-3)

    def test_exact_rational_phi0(self, ex3):
        t = ultimate_survival(ex3, 6)
        phi = survival_via_block_recurrence(ex3, [t[u] for u in range(1, 7)], 6)
        assert phi[0] == pytest.approx(0.9728, abs=1e-12)

    def test_agrees_with_mass_extension(self, ex1, ex2, ex3):
        # the handoff phi(1..kappa*N) must be at working precision: the
        # recurrence amplifies input error like |1/alpha_min|**u
        from seasruin._numerics import pick_numerics
        from seasruin.survival import _ultimate_ctx

        for model, u_max in ((ex1, 50), (ex2, 50), (ex3, 50)):
            rs = characteristic_roots(model)
            num = pick_numerics(u_max, rs.min_nonzero_abs())
            phi_ctx = _ultimate_ctx(model, rs, u_max, num)
            kn = model.period_degree
            phi = survival_via_block_recurrence(
                model, phi_ctx[1: kn + 1], u_max, precision=num.dps
            )
            assert np.allclose(phi, [float(v) for v in phi_ctx], atol=1e-9)

    def test_phi_init_length_checked(self, ex1):
        with pytest.raises(ValidationError):
            survival_via_block_recurrence(ex1, [0.5, 0.6], 10)

    def test_bernoulli_value_iteration(self):
        p = 0.7
        model = RiskModel(kappa=1, seasons=(finite_table([p, 0.0, 1 - p]),))
        t = ultimate_survival(model, 1)
        phi = survival_via_block_recurrence(model, [t[1]], 10)
        want = value_iteration_survival(model, 10, cap=400)
        assert np.allclose(phi, want, atol=1e-9)


class TestFiniteSurvival:
    def test_one_period_is_cdf(self, ex4):
        f = finite_survival(ex4, 5, 1)
        assert f.at(0, 1) == pytest.approx(0.532, abs=1e-3)
        for u in range(6):
            assert f.at(u, 1) == pytest.approx(ex4.seasons[0].cdf(u + 4), abs=1e-12)

    def test_cdf_saturates(self, ex3):
        # u + kappa - 1 beyond the largest claim: survival certain for T = 1
        f = finite_survival(ex3, 4, 1)
        assert f.at(4, 1) == pytest.approx(1.0, abs=1e-15)

    def test_matches_enumeration(self):
        rng = np.random.default_rng(77)
        for _ in range(5):
            model = random_net_profit_model(rng, kappa_max=2, n_max=3, support_max=4)
            f = finite_survival(model, 3, 5)
            for u in range(4):
                for t in range(1, 6):
                    want = enumerate_finite_survival(model, u, t)
                    assert f.at(u, t) == pytest.approx(want, abs=1e-12)

    def test_horizon_anti_monotone_and_dominates_ultimate(self, ex1):
        f = finite_survival(ex1, 8, 40)
        assert np.all(np.diff(f.grid, axis=0) <= 1e-12)
        t = ultimate_survival(ex1, 8)
        for u in range(9):
            for T in (1, 5, 40):
                assert t[u] <= f.at(u, T) + 1e-9

    def test_converges_to_ultimate(self, ex1):
        # T*N = 2000 periods within 5e-3 of the ultimate values
        f = finite_survival(ex1, 5, 2000)
        t = ultimate_survival(ex1, 5)
        for u in range(6):
            assert f.at(u, 2000) == pytest.approx(t[u], abs=5e-3)

    def test_works_without_net_profit(self):
        m = RiskModel(kappa=1, seasons=(finite_table([0.1, 0.1, 0.8]),))
        f = finite_survival(m, 2, 4)
        assert 0 <= f.at(2, 4) <= f.at(2, 1) <= 1

    def test_long_horizons_cross_checked_by_monte_carlo(self, ex4):
        # independent check of the DP at horizons spanning several cycles
        from seasruin import SimConfig, survival_curve

        grid = finite_survival(ex4, 10, 30)
        z99 = 2.5758293035489004
        for u in (0, 5, 10):
            curve = survival_curve(
                ex4, SimConfig(paths=400_000, horizon=30, seed=6060 + u, u=u)
            )
            for t in (10, 20, 30):
                p_hat = curve[t - 1]
                half = z99 * np.sqrt(p_hat * (1 - p_hat) / 400_000)
                assert abs(grid.at(u, t) - p_hat) <= half + 1e-4


class TestDistributionalContract:
    def test_supremum_shift_identity(self):
        # (M_1 + X_N - kappa)^+ has the distribution of M_N
        from seasruin._numerics import pick_numerics
        from seasruin.boundary import _solve_ctx
        from seasruin.survival import _extend_ctx

        rng = np.random.default_rng(5150)
        checked = 0
        while checked < 4:
            model = random_net_profit_model(
                rng, kappa_max=2, n_max=3, support_max=3, margin_floor=0.25
            )
            depth = 80
            rs = characteristic_roots(model)
            num = pick_numerics(depth, rs.min_nonzero_abs())
            seqs = _extend_ctx(model, _solve_ctx(model, rs, num), depth, num)
            m1 = np.array([float(v) for v in seqs[0]])
            mN = np.array([float(v) for v in seqs[-1]])
            if m1.sum() < 1 - 1e-7:  # slowly decaying tail; skip shallow cases
                continue
            xn = model.seasons[-1]
            conv = np.convolve(m1, np.asarray(xn.probs))
            collapsed = np.zeros(len(conv))
            k = model.kappa
            collapsed[0] = conv[: k + 1].sum()
            collapsed[1: len(conv) - k] = conv[k + 1:]
            assert np.max(np.abs(collapsed[: depth - 5] - mN[: depth - 5])) <= 1e-6
            checked += 1

    def test_no_survival_without_net_profit_monte_carlo(self):
        # supercritical: linear drift down, ruin frequency ~ 1 at long horizons
        super_model = RiskModel(kappa=1, seasons=(finite_table([0.1, 0.1, 0.8]),))
        for u in (0, 5):
            est = estimate_survival(
                super_model, SimConfig(paths=4000, horizon=10_000, seed=17, u=u)
            )
            assert 1.0 - est.p_hat >= 0.999
        # critical non-degenerate: ruin is certain but only at the CLT rate
        # ~ c*u/sqrt(T), so the frequency approaches 1 slowly from below
        crit = RiskModel(
            kappa=1, seasons=(finite_table([0.5, 0.0, 0.5]), finite_table([0.0, 1.0]))
        )
        for u in (0, 5):
            short = estimate_survival(crit, SimConfig(paths=6000, horizon=100, seed=17, u=u))
            long = estimate_survival(crit, SimConfig(paths=6000, horizon=10_000, seed=17, u=u))
            assert 1.0 - long.p_hat >= 0.9
            assert long.p_hat <= short.p_hat


class TestTableValidation:
    def test_phi_monotone_enforced(self):
        from seasruin.survival import SurvivalTable

        with pytest.raises(MassBoundsError):
            SurvivalTable(phi=(0.5, 0.4), regime=Regime.NET_PROFIT)
        with pytest.raises(MassBoundsError):
            SurvivalTable(phi=(0.5, 1.5), regime=Regime.NET_PROFIT)
