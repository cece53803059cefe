"""Randomized identity testing for arithmetic circuits with exponentiation gates."""

from .builders import InvalidDims, build_example
from .circuit import (
    Circuit,
    CircuitBuilder,
    CircuitParseError,
    CyclicGraph,
    DanglingReference,
    DualValue,
    FanInViolation,
    Gate,
    NestedExponentiation,
    ValidationError,
    difference,
)
from .exppoly import EmptyDomainError, ExpPoly, ExpTerm, SignClass, TermBlowup
from .field import FieldParams, generate_prime_pair, is_prime, mod_inv, mod_pow
from .intpoly import SparsePoly
from .pit import (
    Decision,
    OracleResult,
    TestPlan,
    Verdict,
    Witness,
    exact_zero_oracle,
    real_model_test,
    select_params,
    test_equiv,
    test_zero,
)

__all__ = [
    "Circuit",
    "CircuitBuilder",
    "CircuitParseError",
    "CyclicGraph",
    "DanglingReference",
    "Decision",
    "DualValue",
    "EmptyDomainError",
    "ExpPoly",
    "ExpTerm",
    "FanInViolation",
    "FieldParams",
    "Gate",
    "InvalidDims",
    "NestedExponentiation",
    "OracleResult",
    "SignClass",
    "SparsePoly",
    "TermBlowup",
    "TestPlan",
    "ValidationError",
    "Verdict",
    "Witness",
    "build_example",
    "difference",
    "exact_zero_oracle",
    "generate_prime_pair",
    "is_prime",
    "mod_inv",
    "mod_pow",
    "real_model_test",
    "select_params",
    "test_equiv",
    "test_zero",
]
