"""Shared fixtures: the worked example models, random model generators, and
independent oracles (value iteration, path enumeration) used to cross-check
the analytic pipeline."""

import itertools
from pathlib import Path

import numpy as np
import pytest

from seasruin import RiskModel, displaced_poisson, finite_table, net_profit_margin

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ex1():
    return RiskModel(kappa=2, seasons=(displaced_poisson(1.0), displaced_poisson(2.0)))


@pytest.fixture(scope="session")
def ex2():
    return RiskModel(kappa=2, seasons=(displaced_poisson(1.0, 1), displaced_poisson(0.9, 1)))


@pytest.fixture(scope="session")
def ex3():
    return RiskModel(
        kappa=3,
        seasons=(
            finite_table([0.4096, 0.4096, 0.1536, 0.0256, 0.0016]),
            finite_table([0.04, 0.32, 0.64]),
        ),
    )


@pytest.fixture(scope="session")
def ex4():
    return RiskModel(
        kappa=5,
        seasons=tuple(displaced_poisson(k / (k + 1) + 4.0) for k in range(1, 11)),
    )


DIST_A = finite_table([0.4096, 0.4096, 0.1536, 0.0256, 0.0016])
DIST_B = finite_table([0.04, 0.32, 0.64])


def random_table(rng, support_max=5, x0_positive=False):
    size = int(rng.integers(2, support_max + 1))
    w = rng.random(size) + 0.02
    if x0_positive:
        w[0] += 0.3
    return finite_table(w / w.sum())


def random_net_profit_model(rng, kappa_max=3, n_max=4, support_max=5,
                            x0_positive=False, margin_floor=0.05):
    """Random finite-table model satisfying the net profit condition."""
    for _ in range(500):
        kappa = int(rng.integers(1, kappa_max + 1))
        n = int(rng.integers(1, n_max + 1))
        seasons = tuple(random_table(rng, support_max, x0_positive) for _ in range(n))
        model = RiskModel(kappa=kappa, seasons=seasons)
        if net_profit_margin(model) > margin_floor * model.period_degree:
            return model
    raise RuntimeError("failed to sample a net-profit model")


def enumerate_finite_survival(model, u, horizon):
    """phi(u, horizon) by brute force over all claim sequences.

    Only usable for finite tables with small supports; checks W(n) > 0 for
    every prefix, which is the definition itself.
    """
    supports = []
    for n in range(horizon):
        probs = model.seasons[n % model.n_seasons].probs
        supports.append(list(enumerate(probs)))
    total = 0.0
    for combo in itertools.product(*supports):
        weight = 1.0
        wealth = u
        alive = True
        for n, (claim, p) in enumerate(combo, start=1):
            weight *= p
            wealth += model.kappa - claim
            if wealth <= 0:
                alive = False
                break
        if alive:
            total += weight
    return total


def value_iteration_survival(model, u_max, cap=400, sweeps=20000, tol=1e-12):
    """Ultimate survival by iterating the one-step equations on a capped grid.

    States are (season, surplus); surpluses above `cap` are treated as safe.
    Converges to phi from above like the finite-horizon probabilities.
    """
    kappa, n = model.kappa, model.n_seasons
    tables = [np.asarray(d.pmf_array(cap + kappa), dtype=float) for d in model.seasons]
    v = np.ones((n, cap + kappa + 1))  # entries beyond cap pinned at 1
    for _ in range(sweeps):
        nxt = np.ones_like(v)
        for j in range(n):
            jn = (j + 1) % n
            conv = np.convolve(tables[j], v[jn])
            idx = np.arange(cap + 1) + kappa
            # drop the i = u + kappa term (claim that empties the surplus)
            nxt[j, : cap + 1] = conv[idx] - tables[j][idx] * v[jn][0]
        delta = np.max(np.abs(nxt - v))
        v = nxt
        if delta < tol:
            break
    return v[0][: u_max + 1]
