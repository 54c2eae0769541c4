"""The three molecular control problems and their objective functionals.

* ``build_morse_hf``: HF bond stretching on a Morse potential (4 qubits).
* ``build_coupled_rotors``: orientation of two dipole-coupled planar OCS
  rotors (6 qubits).
* ``build_fmo_dimer``: excitation transfer in a two-chromophore unit with
  one vibrational mode, in the rotating frame (5 qubits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import units
from .encoding import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    BasisSpec,
    LocalTerm,
    RegisterLayout,
    encode_hamiltonian,
    encode_operator,
    ho_ladder_matrices,
    ho_position_matrix,
    kinetic_matrix,
    operator_function_of_position,
    rotor_operators,
)
from .fields import CosineComb, FieldParam, GaussianComb
from .oracle import exact_evolve_many
from .pauli import PauliSum
from .statevector import StateVector
from .trotter import DrivenHamiltonian, TrotterPlan, evolve_many, plan_for_duration

BOUND_TOL = 1e-9


# -- objectives ---------------------------------------------------------------


@dataclass
class TargetExpectation:
    """``(<A> - target)**2``."""

    observable: PauliSum
    target: float

    def member_values(self, psi: np.ndarray, A: np.ndarray) -> np.ndarray:
        return (_expect(psi, A) - self.target) ** 2

    lower, upper = 0.0, math.inf


@dataclass
class NormalizedOrientation:
    """``1 - <A> / norm``."""

    observable: PauliSum
    normalization: float

    def __post_init__(self):
        if not self.normalization > 0:
            raise ValueError("normalization must be positive")

    def member_values(self, psi: np.ndarray, A: np.ndarray) -> np.ndarray:
        return 1.0 - _expect(psi, A) / self.normalization

    lower, upper = 0.0, 2.0


@dataclass
class EnsembleProjection:
    """``1 - <P>`` per ensemble member, averaged with the ensemble weights."""

    observable: PauliSum

    def member_values(self, psi: np.ndarray, A: np.ndarray) -> np.ndarray:
        return 1.0 - _expect(psi, A)

    lower, upper = 0.0, 1.0


ObjectiveSpec = TargetExpectation | NormalizedOrientation | EnsembleProjection


def _expect(psi: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Column-wise ``<psi|A|psi>``."""
    vals = np.einsum("ik,ij,jk->k", psi.conj(), A, psi)
    if np.abs(vals.imag).max(initial=0.0) > 1e-10 * max(1.0, np.abs(vals.real).max(initial=0.0)):
        raise ValueError("observable expectation is not real")
    return vals.real


# -- problem container --------------------------------------------------------


@dataclass
class ControlProblem:
    """Encoded drift/control Hamiltonian, initial ensemble and objective.

    Attributes:
        name: short model name.
        layout: register layout.
        drift: encoded drift Hamiltonian (hartree).
        control: encoded control operator (hartree per field unit).
        initial_ensemble: ``(state, weight)`` pairs; a single pair for pure states.
        objective: objective specification.
        T: control window in atomic time units.
        dt_target: nominal step length before rounding to an integer step count.
        field_unit: unit of ``f(t)``.
        base_frequencies: default carrier frequencies for cosine fields.
        params: physical parameters used to build the model.
    """

    name: str
    layout: RegisterLayout
    drift: PauliSum
    control: PauliSum
    initial_ensemble: list[tuple[StateVector, float]]
    objective: ObjectiveSpec
    T: float
    dt_target: float
    field_unit: str = "au"
    base_frequencies: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array([c for _, c in self.initial_ensemble])
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("ensemble weights must be nonnegative and sum to 1")
        self._observable_dense = self.objective.observable.to_matrix()
        self._base_hamiltonian = None

    @property
    def width(self) -> int:
        return self.layout.width

    @property
    def weights(self) -> np.ndarray:
        return np.array([c for _, c in self.initial_ensemble])

    def initial_states(self) -> np.ndarray:
        return np.stack([s.amplitudes for s, _ in self.initial_ensemble], axis=1)

    def hamiltonian(self, f=None) -> DrivenHamiltonian:
        if self._base_hamiltonian is None:
            self._base_hamiltonian = DrivenHamiltonian(self.drift, self.control)
        if f is None:
            return self._base_hamiltonian
        return self._base_hamiltonian.with_field(f)

    def plan(self, order: int = 1, n: int = 1, midpoint: bool = False) -> TrotterPlan:
        return plan_for_duration(order, n, self.T, self.dt_target, midpoint)

    def objective_values(self, psi: np.ndarray) -> np.ndarray:
        return self.objective.member_values(psi, self._observable_dense)

    def default_field(self, rng: np.random.Generator | None = None) -> FieldParam:
        """Zero-amplitude field of the model's default waveform family."""
        if self.name == "fmo":
            K = 10
            return GaussianComb(self.T, np.zeros(K), (np.arange(K) + 0.5) / K, np.full(K, 0.1), 2.0)
        return CosineComb(self.T, self.base_frequencies, 1.0)


@dataclass
class ObjectiveResult:
    value: float
    members: np.ndarray
    weights: np.ndarray
    states: np.ndarray


def evaluate_objective(problem: ControlProblem, params: FieldParam | None, plan: TrotterPlan,
                       method: str = "trotter", detail: bool = False) -> float | ObjectiveResult:
    """Evolve every ensemble member and return the (weighted) objective.

    Args:
        method: ``"trotter"`` for the product formula in ``plan`` or
            ``"exact"`` for exact per-step propagation.
        detail: return an ``ObjectiveResult`` with per-member values.
    """
    H = problem.hamiltonian(params)
    psi0 = problem.initial_states()
    if plan.n_steps == 0:
        psi = psi0.copy()
    elif method == "trotter":
        psi = evolve_many(psi0, H, plan)
    elif method == "exact":
        psi = exact_evolve_many(psi0, H, plan)
    else:
        raise ValueError(f"unknown method {method!r}")
    members = problem.objective_values(psi)
    obj = problem.objective
    if not np.all(np.isfinite(members)):
        raise FloatingPointError("objective is not finite")
    if np.any(members < obj.lower - BOUND_TOL) or np.any(members > obj.upper + BOUND_TOL):
        raise AssertionError(f"objective outside [{obj.lower}, {obj.upper}]: {members}")
    w = problem.weights
    value = float(w @ members)
    if detail:
        return ObjectiveResult(value, members, w, psi)
    return value


def thermal_weights(nu: float, T_vib: float, v_max: int) -> np.ndarray:
    """Boltzmann weights of levels ``nu * v`` (cm^-1) for v = 0..v_max."""
    if not T_vib > 0:
        raise ValueError("temperature must be positive")
    if v_max < 0:
        raise ValueError("v_max must be >= 0")
    beta = 1.0 / (units.BOLTZMANN_CM_PER_K * T_vib)
    x = np.exp(-beta * nu * np.arange(v_max + 1))
    return x / x.sum()


# -- HF Morse oscillator ------------------------------------------------------

HF_DEFAULTS = dict(
    d=16, mass=1732.0, r0=1.75, D=0.2101, alpha=1.22, mu0=0.4541, beta=0.0064,
    T_fs=290.0, dt_fs=0.024, target_factor=1.5, n_components=4, field_scale=0.01,
)


def morse_frequency(D: float, alpha: float, mass: float) -> float:
    """Harmonic frequency of the Morse well at its minimum."""
    return alpha * math.sqrt(2.0 * D / mass)


def build_morse_hf(**overrides) -> ControlProblem:
    """HF Morse oscillator in a harmonic-oscillator basis.

    The displacement ``x = r - r0`` is diagonalised in an 8x larger basis to
    build the potential and dipole, then truncated to ``d`` levels.
    """
    p = {**HF_DEFAULTS, **overrides}
    d, m, r0, D, alpha = p["d"], p["mass"], p["r0"], p["D"], p["alpha"]
    mu0, beta = p["mu0"], p["beta"]
    omega = p.get("omega") or morse_frequency(D, alpha, m)
    spec = BasisSpec("harmonic_oscillator", d, mass=m, frequency=omega)
    layout = RegisterLayout((spec,))

    kin = kinetic_matrix(d, m, omega)
    V = operator_function_of_position(lambda x: D * (1 - np.exp(-alpha * x)) ** 2 - D, d, m, omega)
    mu = operator_function_of_position(lambda x: mu0 * (x + r0) * np.exp(-beta * (x + r0) ** 4), d, m, omega)
    g0, gc = encode_hamiltonian([LocalTerm(kin + V, (0,), "H0")], [LocalTerm(-mu, (0,), "-mu")], layout)

    r_op = r0 * np.eye(d) + ho_position_matrix(d, m, omega)
    r_sum = encode_operator([LocalTerm(r_op, (0,), "r")], layout)
    gamma = p["target_factor"] * r0

    evals = np.linalg.eigvalsh(g0.to_matrix())
    K = int(p["n_components"])
    base = np.diff(evals[: K + 1])
    return ControlProblem(
        name="morse_hf",
        layout=layout,
        drift=g0,
        control=gc,
        initial_ensemble=[(StateVector.basis(layout.width, 0), 1.0)],
        objective=TargetExpectation(r_sum, gamma),
        T=units.fs_to_au(p["T_fs"]),
        dt_target=units.fs_to_au(p["dt_fs"]),
        field_unit="au (electric field)",
        base_frequencies=base,
        params={**p, "omega": omega},
    )


# -- coupled planar rotors ----------------------------------------------------

ROTOR_DEFAULTS = dict(
    M=3, B_joule=4.03e-24, R12=3e-9, theta12=math.pi / 2, mu_cm=2.36e-30,
    T_s=1.31e-9, dt_s=1.87e-12, n_components=10, coupling=True, field_scale=1e6,
)


def rotor_coupling_matrix(M: int, theta12: float) -> np.ndarray:
    """Angular factor of the dipole-dipole interaction on the two-rotor space."""
    _, cos, sin = rotor_operators(M)
    c, s = math.cos(theta12), math.sin(theta12)
    return ((1 - 3 * c * c) * np.kron(cos, cos) + (1 - 3 * s * s) * np.kron(sin, sin)
            - 3 * s * c * (np.kron(cos, sin) + np.kron(sin, cos)))


def build_coupled_rotors(**overrides) -> ControlProblem:
    """Two planar rotors with dipole-dipole coupling; field in V/m."""
    p = {**ROTOR_DEFAULTS, **overrides}
    M = int(p["M"])
    d = 2 * M + 1
    spec = BasisSpec("planar_rotor", d, cutoff=M)
    layout = RegisterLayout((spec, spec))
    L2, cos, _ = rotor_operators(M)
    B = units.joule_to_hartree(p["B_joule"])
    k = units.joule_to_hartree(p["mu_cm"] ** 2 / (4 * math.pi * units.EPSILON_0 * p["R12"] ** 3))
    mu = units.coulomb_meter_to_hartree_per_field(p["mu_cm"])

    drift = [LocalTerm(B * L2, (0,), "B L1^2"), LocalTerm(B * L2, (1,), "B L2^2")]
    if p["coupling"]:
        drift.append(LocalTerm(k * rotor_coupling_matrix(M, p["theta12"]), (0, 1), "V12"))
    control = [LocalTerm(-mu * cos, (0,), "-mu cos1"), LocalTerm(-mu * cos, (1,), "-mu cos2")]
    g0, gc = encode_hamiltonian(drift, control, layout)

    obs = encode_operator([LocalTerm(cos, (0,), "cos1"), LocalTerm(cos, (1,), "cos2")], layout)
    norm = float(np.abs(np.linalg.eigvalsh(obs.to_matrix())).max())
    ground = rotor_ground_index(M)
    w = spec.width
    psi0 = StateVector.basis(layout.width, (ground << w) | ground)
    K = int(p["n_components"])
    base = B * (2 * np.arange(K) + 1)
    return ControlProblem(
        name="rotors",
        layout=layout,
        drift=g0,
        control=gc,
        initial_ensemble=[(psi0, 1.0)],
        objective=NormalizedOrientation(obs, norm),
        T=units.seconds_to_au(p["T_s"]),
        dt_target=units.seconds_to_au(p["dt_s"]),
        field_unit="V/m",
        base_frequencies=base,
        params={**p, "B": B, "k": k, "mu": mu},
    )


def rotor_ground_index(M: int) -> int:
    """Register index of m = 0 in the ordering m = -M..M."""
    return M


# -- FMO dimer with one vibrational mode --------------------------------------

FMO_DEFAULTS = dict(
    E3=12205.0, E4=12135.0, omega0=12200.0, J34=53.5, nu=180.0, J4v=84.4,
    mu_debye=6.3, f3=0.32, f4=0.92, d=8, T_vib=300.0, v_max=7,
    T_fs=508.0, n_steps=300, number_map="pauli_z", field_scale=1e-4,
)


def number_operator(number_map: str) -> np.ndarray:
    """Two-level excitation number with ground |0> and excited |1>.

    ``pauli_z`` drops the identity shift of ``(I - Z)/2``, which changes
    the vibronic coupling term as well as adding a global phase.
    """
    if number_map == "pauli_z":
        return -SIGMA_Z / 2
    if number_map == "projector":
        return (np.eye(2) - SIGMA_Z) / 2
    raise ValueError(f"unknown number map {number_map!r}")


def build_fmo_dimer(**overrides) -> ControlProblem:
    """Chromophores 3 and 4 plus a vibrational mode on 4, rotating frame, energies in cm^-1."""
    p = {**FMO_DEFAULTS, **overrides}
    d = int(p["d"])
    tl = BasisSpec("two_level", 2)
    vib = BasisSpec("harmonic_oscillator", d, frequency=units.cm_to_hartree(p["nu"]))
    layout = RegisterLayout((tl, tl, vib))
    cm = units.cm_to_hartree
    n_op = number_operator(p["number_map"])
    a, ad = ho_ladder_matrices(d)
    E3 = p.get("E3_tilde", p["E3"] - p["omega0"])
    E4 = p.get("E4_tilde", p["E4"] - p["omega0"])
    hop = np.kron(SIGMA_PLUS, SIGMA_MINUS) + np.kron(SIGMA_MINUS, SIGMA_PLUS)
    drift = [
        LocalTerm(cm(E3) * n_op, (0,), "E3 n3"),
        LocalTerm(cm(E4) * n_op, (1,), "E4 n4"),
        LocalTerm(cm(p["J34"]) * hop, (0, 1), "J34 hop"),
        LocalTerm(cm(p["nu"]) * (ad @ a), (2,), "nu a^dag a"),
        LocalTerm(cm(p["J4v"]) * np.kron(n_op, a + ad), (1, 2), "J4v n4 x"),
    ]
    mu = units.debye_to_au(p["mu_debye"])
    control = [
        LocalTerm(p["f3"] * mu * SIGMA_X, (0,), "mu3 x3"),
        LocalTerm(p["f4"] * mu * SIGMA_X, (1,), "mu4 x4"),
    ]
    g0, gc = encode_hamiltonian(drift, control, layout)

    proj = np.kron(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))  # |g3 e4><g3 e4|
    P = encode_operator([LocalTerm(proj, (0, 1), "P")], layout)
    weights = thermal_weights(p["nu"], p["T_vib"], int(p["v_max"]))
    ensemble = [(StateVector.basis(layout.width, v), float(c)) for v, c in enumerate(weights)]
    T = units.fs_to_au(p["T_fs"])
    return ControlProblem(
        name="fmo",
        layout=layout,
        drift=g0,
        control=gc,
        initial_ensemble=ensemble,
        objective=EnsembleProjection(P),
        T=T,
        dt_target=T / int(p["n_steps"]),
        field_unit="au",
        base_frequencies=None,
        params={**p, "E3_tilde": E3, "E4_tilde": E4, "mu_au": mu},
    )


BUILDERS = {
    "morse_hf": build_morse_hf,
    "rotors": build_coupled_rotors,
    "fmo": build_fmo_dimer,
}


def build_problem(name: str, **overrides) -> ControlProblem:
    try:
        return BUILDERS[name](**overrides)
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(BUILDERS)}") from None


def swap_registers(problem: ControlProblem, psi: np.ndarray) -> np.ndarray:
    """Exchange the two rotor registers in a state array (dim, k)."""
    w = problem.layout.widths[0]
    d = 1 << w
    k = psi.shape[1]
    return psi.reshape(d, d, k).transpose(1, 0, 2).reshape(d * d, k)
