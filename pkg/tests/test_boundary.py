import numpy as np
import pytest

from seasruin import (
    BoundaryMasses,
    MassBoundsError,
    RiskModel,
    RootSet,
    SeasruinError,
    ValidationError,
    build_system,
    characteristic_roots,
    finite_table,
    net_profit_margin,
    probe_conjecture,
    solve_boundary,
)
from seasruin.roots import Root
from conftest import random_net_profit_model, value_iteration_survival


def _solution_vector(model, system, masses):
    return np.array([masses.m[j - 1, i] for j, i in system.column_map])


class TestWorkedSystems:
    def test_bi_seasonal_poisson_4x4(self, ex1):
        rs = characteristic_roots(ex1)
        system = build_system(ex1, rs)
        assert system.matrix.shape == (4, 4)
        assert system.rhs[-1] == pytest.approx(1.0)
        assert system.row_tags[-1] == "mean"
        masses = solve_boundary(ex1, rs)
        want = [[0.6501, 0.1395], [0.5083, 0.1855]]
        assert np.allclose(masses.m, want, atol=5e-5)

    def test_shifted_support_reduces_to_2x2(self, ex2):
        rs = characteristic_roots(ex2)
        system = build_system(ex2, rs)
        assert system.matrix.shape == (2, 2)
        assert system.column_map == ((1, 0), (2, 0))
        masses = solve_boundary(ex2, rs)
        assert masses.m[0, 0] == pytest.approx(0.1270, abs=5e-5)
        assert masses.m[1, 0] == pytest.approx(0.1315, abs=5e-5)
        assert masses.m[0, 1] == 0.0 and masses.m[1, 1] == 0.0

    def test_double_root_6x6_with_derivative_row(self, ex3):
        rs = characteristic_roots(ex3)
        system = build_system(ex3, rs)
        assert system.matrix.shape == (6, 6)
        assert sum(":d^1" in tag for tag in system.row_tags) == 1
        assert len(set(system.row_tags)) == len(system.row_tags)
        assert system.rhs[-1] == pytest.approx(net_profit_margin(ex3), abs=1e-14)
        assert np.max(np.abs(system.rhs[:-1])) == 0.0
        masses = solve_boundary(ex3, rs)
        want = [[0.9984, 0.0016, 0.0], [1.0, 0.0, 0.0]]
        assert np.allclose(masses.m, want, atol=1e-6)

    def test_ten_seasonal_50x50(self, ex4):
        rs = characteristic_roots(ex4)
        masses = solve_boundary(ex4, rs)
        want = [0.1821, 0.0604, 0.0583, 0.0545, 0.0504]
        assert np.allclose(masses.m[0], want, atol=5e-5)

    def test_single_season_closed_form(self):
        # kappa = 1, N = 1: the system is the 1x1 mean equation
        model = RiskModel(kappa=1, seasons=(finite_table([0.6, 0.0, 0.4]),))
        rs = characteristic_roots(model)
        masses = solve_boundary(model, rs)
        assert masses.m[0, 0] == pytest.approx((1 - 0.8) / 0.6, abs=1e-14)
        # independent value-iteration oracle for phi(1) = m_0
        phi = value_iteration_survival(model, 1)
        assert masses.m[0, 0] == pytest.approx(phi[1], abs=1e-9)


class TestResiduals:
    @pytest.mark.parametrize("fixture", ["ex1", "ex2", "ex3", "ex4"])
    def test_solution_satisfies_rows(self, fixture, request):
        model = request.getfixturevalue(fixture)
        rs = characteristic_roots(model)
        system = build_system(model, rs)
        sol = _solution_vector(model, system, solve_boundary(model, rs))
        residuals = system.matrix @ sol - system.rhs
        for tag, res in zip(system.row_tags, residuals):
            if tag == "mean":
                assert abs(res) <= 1e-10
            elif ":d^" in tag:
                assert abs(res) <= 1e-6
            else:
                assert abs(res) <= 1e-8

    def test_row_order_invariance(self, ex3):
        rs = characteristic_roots(ex3)
        base = solve_boundary(ex3, rs).m
        for perm_seed in (1, 2, 3):
            rng = np.random.default_rng(perm_seed)
            order = rng.permutation(len(rs.roots))
            shuffled = RootSet(roots=tuple(rs.roots[i] for i in order))
            assert np.max(np.abs(solve_boundary(ex3, shuffled).m - base)) <= 1e-10


class TestVandermondeStructure:
    def test_single_season_determinant(self):
        rng = np.random.default_rng(31)
        checked = 0
        while checked < 10:
            model = random_net_profit_model(
                rng, kappa_max=4, n_max=1, support_max=6, x0_positive=True
            )
            if model.kappa < 2:
                continue
            rs = characteristic_roots(model)
            if any(r.multiplicity > 1 or r.at_origin for r in rs.roots):
                continue
            system = build_system(model, rs)
            alphas = [r.value for r in rs.nonzero_roots]
            x0 = model.seasons[0].probs[0]
            want = x0 ** model.kappa / (-1) ** (model.kappa + 1)
            for a in alphas:
                want *= a - 1
            for j in range(len(alphas)):
                for i in range(j):
                    want *= alphas[j] - alphas[i]
            got = np.linalg.det(system.matrix)
            assert got == pytest.approx(want, rel=1e-8)
            checked += 1


class TestSolutionGuards:
    def test_bogus_roots_rejected(self, ex1):
        fake = RootSet(
            roots=(
                Root(value=0.5 + 0.0j, multiplicity=1),
                Root(value=-0.1294 + 0.4087j, multiplicity=1),
                Root(value=-0.1294 - 0.4087j, multiplicity=1),
            )
        )
        with pytest.raises(SeasruinError):
            solve_boundary(ex1, fake)

    def test_mass_bounds_validated(self):
        with pytest.raises(MassBoundsError):
            BoundaryMasses(m=np.array([[1.2, 0.0]]))
        with pytest.raises(MassBoundsError):
            BoundaryMasses(m=np.array([[-1e-6, 0.1]]))
        b = BoundaryMasses(m=np.array([[-1e-10, 0.5]]))
        assert b.m[0, 0] == 0.0  # clamped


class TestConjectureProbe:
    def test_desk_scale_probe_finds_no_singularity(self):
        report = probe_conjecture(3, 3, trials=100, seed=42)
        assert report["singular_count"] == 0
        assert report["findings"] == []
        assert report["min_abs_det"] > 0
        assert report["max_condition"] < 1e12

    def test_trials_precondition(self):
        with pytest.raises(ValidationError):
            probe_conjecture(3, 3, trials=0, seed=1)

    def test_one_by_one_case_determinant_is_x0(self):
        report = probe_conjecture(1, 1, trials=25, seed=3)
        # the 1x1 system matrix is (x_0), so cond == 1 and det = x_0 > 0
        assert report["max_condition"] == pytest.approx(1.0)
        assert 0 < report["min_abs_det"] <= 1.0
        assert report["singular_count"] == 0
