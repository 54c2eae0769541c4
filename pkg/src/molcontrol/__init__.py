"""Qubit-encoded molecular control: Pauli algebra, product-formula dynamics and a hybrid optimisation loop."""

from .pauli import PauliString, PauliSum, decompose, reconstruct
from .problems import ControlProblem, build_problem, evaluate_objective
from .statevector import StateVector
from .trotter import DrivenHamiltonian, TrotterPlan

__all__ = [
    "ControlProblem",
    "DrivenHamiltonian",
    "PauliString",
    "PauliSum",
    "StateVector",
    "TrotterPlan",
    "build_problem",
    "decompose",
    "evaluate_objective",
    "reconstruct",
]
__version__ = "0.1.0"
