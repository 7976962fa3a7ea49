"""Exact capacity, optimal schemes and brute-force oracles for 3-user linear computation broadcast."""

from .capacity import CapacityReport, LambdaAllocation, RankVector, capacity_report, solve, two_user_cost, waterfill
from .decomposition import DecompositionBases, decompose, verify_properties
from .field import FieldElement, FieldSpec, make_field
from .instance import (
    LcbcInstance,
    SubspaceFamily,
    entropic_profile,
    fixture,
    make_instance,
    normalize,
    parse_instance,
    random_instance,
    signal_spaces,
)
from .linalg import MatrixFq
from .oracle import build_confusability, exhaustive_decode_check, scalar_optimal_cost
from .scheme import BroadcastScheme, build_scheme, decode, encode, verify_scheme

__version__ = "0.1.0"
