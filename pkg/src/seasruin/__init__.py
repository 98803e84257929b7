"""Survival and ruin probabilities for the N-seasonal discrete-time risk model.

The insurer's wealth is W(n) = u + kappa*n - (X_1 + ... + X_n) with integer
premium rate kappa and claim distributions repeating with period N.  Ultimate
and finite-time survival probabilities are computed from the roots of
s**(kappa*N) = G_{S_N}(s) in the unit disk, the boundary linear system for the
supremum masses, and the associated recurrences; a seeded Monte Carlo engine
cross-checks everything.
"""

__version__ = "0.1.0"

from .distributions import (
    DiscreteDist,
    TruncatedDist,
    convolve,
    displaced_poisson,
    finite_table,
    from_spec,
    to_spec,
    truncate,
)
from .errors import (
    DimensionMismatch,
    DomainError,
    ImaginaryResidue,
    MassBoundsError,
    NetProfitViolated,
    ParseError,
    PoleProximity,
    RootCountMismatch,
    SeasruinError,
    SingularSystem,
    ValidationError,
    ZeroDivisor,
)
from .model import RiskModel, net_profit_margin
from .roots import Root, RootConfig, RootSet, characteristic_roots, cluster_multiplicities
from .boundary import (
    AssembledSystem,
    BoundaryMasses,
    build_system,
    probe_conjecture,
    solve_boundary,
)
from .survival import (
    FiniteSurvivalTable,
    MassSequence,
    Regime,
    SurvivalTable,
    classify_regime,
    extend_masses,
    finite_survival,
    survival_via_block_recurrence,
    ultimate_survival,
)
from .genfun import XiFunction, xi_eval, xi_series
from .montecarlo import (
    RNG_ID,
    Estimate,
    SimConfig,
    estimate_survival,
    simulate_path,
    survival_curve,
    trajectory,
)
from .cli import parse_model, emit_model

__all__ = [
    "DiscreteDist", "TruncatedDist", "finite_table", "displaced_poisson",
    "convolve", "truncate", "from_spec", "to_spec",
    "RiskModel", "net_profit_margin",
    "Root", "RootConfig", "RootSet", "characteristic_roots", "cluster_multiplicities",
    "AssembledSystem", "BoundaryMasses", "build_system", "solve_boundary",
    "probe_conjecture",
    "Regime", "SurvivalTable", "FiniteSurvivalTable", "MassSequence",
    "classify_regime", "extend_masses", "ultimate_survival", "finite_survival",
    "survival_via_block_recurrence",
    "XiFunction", "xi_eval", "xi_series",
    "SimConfig", "Estimate", "estimate_survival", "simulate_path",
    "survival_curve", "trajectory", "RNG_ID",
    "parse_model", "emit_model",
    "SeasruinError", "DomainError", "ValidationError", "ParseError",
    "NetProfitViolated", "RootCountMismatch", "SingularSystem", "DimensionMismatch",
    "ImaginaryResidue", "MassBoundsError", "ZeroDivisor", "PoleProximity",
]
