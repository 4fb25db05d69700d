"""Unsteerability certificates and local hidden state models for two-qubit states."""

__version__ = "0.1.0"

from steerlab.canonical import (  # noqa: E402
    BobMarginalPure,
    CanonicalState,
    bob_whitening,
    canonicalize,
    diagonalize_correlation,
)
from steerlab.criterion import (  # noqa: E402
    CriterionReport,
    assemblage,
    criterion_value_at,
    evaluate_criterion,
    steered_eigs,
    steered_state,
)
from steerlab.kernels import BACKEND  # noqa: E402
from steerlab.lhs import NotReproducible, analytic_lhs_steered, fit_response, simulate_assemblage  # noqa: E402
from steerlab.qubit import PauliForm, StateError, pauli_compose, pauli_decompose  # noqa: E402

__all__ = [
    "__version__",
    "BobMarginalPure",
    "CanonicalState",
    "bob_whitening",
    "canonicalize",
    "diagonalize_correlation",
    "CriterionReport",
    "assemblage",
    "criterion_value_at",
    "evaluate_criterion",
    "steered_eigs",
    "steered_state",
    "BACKEND",
    "NotReproducible",
    "analytic_lhs_steered",
    "fit_response",
    "simulate_assemblage",
    "PauliForm",
    "StateError",
    "pauli_compose",
    "pauli_decompose",
]
