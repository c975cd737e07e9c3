"""Deterministic collective-robustness certification for bagged ensembles.

Library surface: vote/budget/certificate types (core), hash-based
subsampling (hash_bagging), per-row certificates and the breakable-set
filter (samplewise), attack problem builders (bilp), the anytime
branch-and-bound certifier (solver), testset decomposition (decompose),
tolerable-budget bounds (bound), and brute-force verification (oracle).
"""

from .bilp import (
    BilpProblem,
    ConstraintRow,
    GroupCap,
    Mode,
    StandardBilp,
    TargetRow,
    build_p1,
    build_p2,
    to_standard_form,
)
from .bound import (
    UNCOVERABLE,
    BudgetBound,
    tolerable_budget_exact,
    tolerable_budget_greedy,
)
from .core import (
    Budget,
    Certificate,
    CertStatus,
    InstanceTooLargeError,
    VoteMatrix,
    ensemble_predict,
    prediction_changed,
    relative_gap,
    rival_deficit,
    tally_row,
    vote_swing,
)
from .decompose import (
    GroupReport,
    certify_decomposed,
    certify_decomposed_report,
    group_by_winner_overlap,
    partition_testset,
)
from .hash_bagging import (
    Membership,
    PairStructure,
    SampleRecord,
    canonical_hash,
    fnv1a64,
    influenced_classifiers,
    records_from_lines,
    subsample,
)
from .oracle import brute_force_p1, brute_force_p2, single_row_breakable
from .samplewise import (
    SampleCertificate,
    breakable_under_pair_caps,
    min_controlled_to_break,
    omega,
    row_margin,
    sample_certificates,
    samplewise_collective_count,
)
from .solver import (
    SolveResult,
    SolveStatus,
    build_problem,
    certify,
    evaluate_attack,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "BilpProblem",
    "Budget",
    "BudgetBound",
    "Certificate",
    "CertStatus",
    "ConstraintRow",
    "GroupCap",
    "GroupReport",
    "InstanceTooLargeError",
    "Membership",
    "Mode",
    "PairStructure",
    "SampleCertificate",
    "SampleRecord",
    "SolveResult",
    "SolveStatus",
    "StandardBilp",
    "TargetRow",
    "UNCOVERABLE",
    "VoteMatrix",
    "breakable_under_pair_caps",
    "brute_force_p1",
    "brute_force_p2",
    "build_p1",
    "build_p2",
    "build_problem",
    "canonical_hash",
    "certify",
    "certify_decomposed",
    "certify_decomposed_report",
    "ensemble_predict",
    "evaluate_attack",
    "fnv1a64",
    "group_by_winner_overlap",
    "influenced_classifiers",
    "min_controlled_to_break",
    "omega",
    "partition_testset",
    "prediction_changed",
    "records_from_lines",
    "relative_gap",
    "rival_deficit",
    "row_margin",
    "sample_certificates",
    "samplewise_collective_count",
    "single_row_breakable",
    "solve",
    "subsample",
    "tally_row",
    "to_standard_form",
    "tolerable_budget_exact",
    "tolerable_budget_greedy",
    "vote_swing",
]
