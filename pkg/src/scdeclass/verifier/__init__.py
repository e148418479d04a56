"""Bounded verification of PC-security, declassification and manifestness."""

from .checks import (
    check_adequacy,
    check_declass,
    check_manifest,
    check_manifest_form,
    check_pc,
    check_remainder,
    declass_policy,
    low_equiv,
    low_projection,
    manifest_lows,
    pc_policy,
    replay,
    run_states,
    theorem_declassifier,
    theorem_policy,
)
from .domains import (
    EXHAUSTIVE,
    RANDOM,
    Bits,
    Const,
    DomainError,
    DomainSpec,
    Interval,
    StateSpace,
    Values,
    all_states,
    domain_from_dict,
    domain_spec_from_dict,
    domain_spec_to_dict,
    domain_to_dict,
    exhaustive_pair_count,
    low_equal_space,
    pairs,
    parse_domain,
)
from .verdict import (
    ADEQUACY_VIOLATION,
    EXIT_CODES,
    FAULT,
    INSECURE,
    MANIFEST_VIOLATION,
    SECURE,
    SECURE_SAMPLED,
    STORE_LEAK,
    TRANSCRIPT_LEAK,
    Counterexample,
    FaultWitness,
    Verdict,
    headline,
    render,
    worst,
)

__all__ = [
    "check_adequacy", "check_declass", "check_manifest", "check_manifest_form", "check_pc",
    "check_remainder", "declass_policy", "low_equiv", "low_projection", "manifest_lows",
    "pc_policy", "replay", "run_states", "theorem_declassifier", "theorem_policy",
    "EXHAUSTIVE", "RANDOM", "Bits", "Const", "DomainError", "DomainSpec", "Interval",
    "StateSpace", "Values", "all_states", "domain_from_dict", "domain_spec_from_dict",
    "domain_spec_to_dict", "domain_to_dict", "exhaustive_pair_count", "low_equal_space",
    "pairs", "parse_domain",
    "ADEQUACY_VIOLATION", "EXIT_CODES", "FAULT", "INSECURE", "MANIFEST_VIOLATION", "SECURE",
    "SECURE_SAMPLED", "STORE_LEAK", "TRANSCRIPT_LEAK", "Counterexample", "FaultWitness",
    "Verdict", "headline", "render", "worst",
]
