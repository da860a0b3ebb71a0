"""Scores from paired-comparison profiles, and checkers for the axioms they satisfy."""

from .axioms import (
    AXIOMS,
    check_self_consistency,
    fuzz_axiom,
    majorizes,
    performance_multiset,
    permuted_dominance,
)
from .errors import ProtocolError, RanklabError, SolverError, ValidationError
from .generate import GeneratorConfig, generate_profiles
from .implicit import ImplicitProcedureSpec, SolverConfig, SolveReport, residual, solve
from .orders import (
    choice_from_scores,
    closeness_to_unanimity_choice,
    inversion_distance,
    kemeny_median,
    ranking_from_scores,
)
from .paretian import build_paretian, extend_evaluate, implicit_form_witness, triples_paretian_check
from .procedures import ProcedureHandle, get_procedure
from .profile import (
    LobbyWeights,
    PositionalWeights,
    Profile,
    ScoreVector,
    from_approval_ballots,
    from_linear_orders,
    from_upper,
    from_weak_orders,
    validate_profile,
)
from .scores import (
    convex_combination_scores,
    copeland_scores,
    down_sided_borda,
    extended_borda,
    factored_borda,
    lobby_size_scores,
    point_scores,
    up_sided_borda,
)

__version__ = "0.1.0"
