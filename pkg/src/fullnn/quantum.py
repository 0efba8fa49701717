"""Small complex-matrix kernel: states, measurements and Born-rule behaviors.

Bilocal tensor legs are ordered (A, B-left, B-right, C). Star sources are
given per branch as two-qubit states over (branch, center); the central
measurement acts on (center_1, ..., center_n) with center_1 the most
significant qubit. Binary outcome 0 is the +1 eigenspace of an observable.
"""
from __future__ import annotations

import logging
import string
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.optimize import minimize

from fullnn.scenario import (
    Behavior,
    ScenarioMismatchError,
    behavior_new,
    bilocal_scenario,
    star_scenario,
)

logger = logging.getLogger(__name__)

TOL_STATE = 1e-12
TOL_PSD = 1e-10
TOL_MEASUREMENT = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class QuantumValidationError(ValueError):
    """Raised for matrices that are not valid states, measurements or observables."""


def _hermitian_gap(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


@dataclass(frozen=True)
class StateMatrix:
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QuantumValidationError(f"state must be square, got {m.shape}")
        if _hermitian_gap(m) > TOL_STATE:
            raise QuantumValidationError("state is not Hermitian")
        if abs(np.trace(m) - 1.0) > TOL_STATE:
            raise QuantumValidationError(f"state trace {np.trace(m).real:.3e} != 1")
        if float(np.linalg.eigvalsh(m).min()) < -TOL_PSD:
            raise QuantumValidationError("state is not positive semidefinite")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def expectation(self, operator: np.ndarray) -> float:
        return float(np.real(np.trace(operator @ self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class Measurement:
    elements: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if not self.elements:
            raise QuantumValidationError("a measurement needs at least one element")
        dim = self.elements[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for element in self.elements:
            if element.shape != (dim, dim):
                raise QuantumValidationError("measurement elements differ in dimension")
            if _hermitian_gap(element) > TOL_MEASUREMENT:
                raise QuantumValidationError("measurement element is not Hermitian")
            if float(np.linalg.eigvalsh(element).min()) < -TOL_MEASUREMENT:
                raise QuantumValidationError("measurement element is not positive")
            total = total + element
        if float(np.max(np.abs(total - np.eye(dim)))) > TOL_MEASUREMENT:
            raise QuantumValidationError("measurement elements do not sum to identity")

    @property
    def dim(self) -> int:
        return int(self.elements[0].shape[0])

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class Observable:
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = self.matrix
        if _hermitian_gap(m) > TOL_MEASUREMENT:
            raise QuantumValidationError("observable is not Hermitian")
        if float(np.max(np.abs(m @ m - np.eye(m.shape[0])))) > TOL_MEASUREMENT:
            raise QuantumValidationError("observable does not square to identity")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def projectors(self) -> np.ndarray:
        """(1 + O)/2 and (1 - O)/2 stacked along the first axis."""
        eye = np.eye(self.dim, dtype=complex)
        return np.stack([(eye + self.matrix) / 2, (eye - self.matrix) / 2])


def ket(*amplitudes: complex) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def projector(vector: np.ndarray) -> np.ndarray:
    return np.outer(vector, vector.conj())


def singlet() -> StateMatrix:
    psi_minus = ket(0, 1, -1, 0) / np.sqrt(2)
    return StateMatrix(projector(psi_minus))


def werner(v: float) -> StateMatrix:
    if not 0.0 <= v <= 1.0:
        raise QuantumValidationError(f"visibility must lie in [0, 1], got {v}")
    return StateMatrix(v * singlet().matrix + (1.0 - v) / 4.0 * np.eye(4, dtype=complex))


def maximally_mixed(dim: int = 4) -> StateMatrix:
    return StateMatrix(np.eye(dim, dtype=complex) / dim)


def pauli(k: int) -> Observable:
    try:
        return Observable({1: SIGMA_X, 2: SIGMA_Y, 3: SIGMA_Z}[k])
    except KeyError:
        raise QuantumValidationError(f"pauli index must be 1, 2 or 3, got {k}") from None


def xz_observable(angle: float) -> Observable:
    """cos(angle) Z + sin(angle) X."""
    return Observable(np.cos(angle) * SIGMA_Z + np.sin(angle) * SIGMA_X)


def bsm_protocol_observables() -> dict[str, Observable]:
    """Alice measures X, Z; Charlie measures (Z + X)/sqrt2, (Z - X)/sqrt2."""
    return {
        "A0": pauli(1),
        "A1": pauli(3),
        "C0": xz_observable(np.pi / 4),
        "C1": xz_observable(-np.pi / 4),
    }


def ejm_vectors(theta: float) -> np.ndarray:
    if not 0.0 <= theta <= np.pi / 2 + 1e-15:
        raise QuantumValidationError(f"theta must lie in [0, pi/2], got {theta}")
    r_plus = (1 + np.exp(1j * theta)) / np.sqrt(2)
    r_minus = (1 - np.exp(1j * theta)) / np.sqrt(2)
    phase = lambda k: np.exp(1j * k * np.pi / 4)  # noqa: E731
    rows = [
        [phase(-1), -r_plus, -r_minus, phase(-3)],
        [phase(1), r_minus, r_plus, phase(3)],
        [phase(-3), r_minus, r_plus, phase(-1)],
        [phase(3), -r_plus, -r_minus, phase(1)],
    ]
    return np.asarray(rows, dtype=complex) / 2


def ejm_basis(theta: float) -> Measurement:
    return Measurement(tuple(projector(v) for v in ejm_vectors(theta)))


def bell_vectors() -> dict[str, np.ndarray]:
    s = 1 / np.sqrt(2)
    return {
        "phi+": ket(s, 0, 0, s),
        "phi-": ket(s, 0, 0, -s),
        "psi+": ket(0, s, s, 0),
        "psi-": ket(0, s, -s, 0),
    }


def partial_bsm() -> Measurement:
    """{phi+, phi-, 1 - phi+ - phi-}."""
    bell = bell_vectors()
    phi_plus = projector(bell["phi+"])
    phi_minus = projector(bell["phi-"])
    return Measurement((phi_plus, phi_minus, np.eye(4, dtype=complex) - phi_plus - phi_minus))


def _kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, ops)


def ghz_basis(n: int) -> Measurement:
    """Joint eigenbasis of Z..Z and X_1 X_{j+1} (Z elsewhere), j = 1..n-1.

    Outcome b = (b_1, ..., b_n), b_1 the most significant bit, is the state
    with Z..Z = (-1)**b_1 and X_1 X_{j+1} = (-1)**(b_1 + b_{j+1}). For n = 2
    this is the Bell basis.
    """
    if n < 2:
        raise QuantumValidationError(f"n must be at least 2, got {n}")
    dim = 2**n
    eye = np.eye(dim, dtype=complex)
    parity = _kron_all([SIGMA_Z] * n)
    flips = []
    for j in range(1, n):
        ops = [SIGMA_Z] * n
        ops[0] = SIGMA_X
        ops[j] = SIGMA_X
        flips.append(_kron_all(ops))
    elements = []
    for b in range(dim):
        bits = [(b >> (n - 1 - k)) & 1 for k in range(n)]
        element = (eye + (-1) ** bits[0] * parity) / 2
        for j, flip in enumerate(flips, start=1):
            element = element @ (eye + (-1) ** (bits[0] + bits[j]) * flip) / 2
        elements.append(element)
    return Measurement(tuple(elements))


def _stack_projectors(observables: Sequence[Observable]) -> np.ndarray:
    return np.stack([o.projectors() for o in observables])


def bilocal_behavior(
    rho_ab: StateMatrix,
    rho_bc: StateMatrix,
    alice: Sequence[Observable],
    bob: Measurement,
    charlie: Sequence[Observable],
) -> Behavior:
    """p(a,b,c|x,z) = Tr[(P_a|x (x) E_b (x) Q_c|z) rho_AB (x) rho_BC]."""
    if rho_ab.dim != 4 or rho_bc.dim != 4:
        raise ScenarioMismatchError("bilocal sources must be two-qubit states")
    if not isinstance(bob, Measurement) or bob.dim != 4:
        raise ScenarioMismatchError("Bob needs a two-qubit measurement")
    if any(o.dim != 2 for o in [*alice, *charlie]):
        raise ScenarioMismatchError("Alice and Charlie measure single qubits")
    proj_a = _stack_projectors(alice)
    proj_c = _stack_projectors(charlie)
    rab = rho_ab.matrix.reshape(2, 2, 2, 2)
    rbc = rho_bc.matrix.reshape(2, 2, 2, 2)
    left = np.einsum("xaij,jRiC->xaRC", proj_a, rab)
    right = np.einsum("zcij,RjCi->zcRC", proj_c, rbc)
    elements = np.stack(bob.elements).reshape(len(bob), 2, 2, 2, 2)
    probs = np.einsum("bikjl,xaji,zclk->xzabc", elements, left, right).real
    scenario = bilocal_scenario(len(alice), len(charlie), len(bob))
    return behavior_new(scenario, probs[:, None, :, :, :, :])


def ejm_correlations(theta: float, v: float) -> Behavior:
    """Werner sources, Pauli X, Y, Z for Alice and Charlie, EJM for Bob."""
    paulis = [pauli(k) for k in (1, 2, 3)]
    rho = werner(v)
    return bilocal_behavior(rho, rho, paulis, ejm_basis(theta), paulis)


def bsm_protocol_behavior(v: float = 1.0) -> Behavior:
    obs = bsm_protocol_observables()
    rho = werner(v)
    return bilocal_behavior(rho, rho, [obs["A0"], obs["A1"]], partial_bsm(), [obs["C0"], obs["C1"]])


def star_behavior(
    n: int,
    states: Sequence[StateMatrix],
    branch_obs: Sequence[Sequence[Observable]],
    central: Measurement,
) -> Behavior:
    if n < 2:
        raise ScenarioMismatchError(f"a star network needs n >= 2 branches, got {n}")
    if len(states) != n or len(branch_obs) != n:
        raise ScenarioMismatchError("one state and one observable pair per branch are required")
    if any(s.dim != 4 for s in states):
        raise ScenarioMismatchError("star sources must be two-qubit states")
    if central.dim != 2**n or len(central) != 2**n:
        raise ScenarioMismatchError(f"central measurement must have 2**{n} outcomes on {n} qubits")
    if any(len(obs) != 2 for obs in branch_obs):
        raise ScenarioMismatchError("each branch party has two settings")

    letters = iter(string.ascii_letters)
    xs = [next(letters) for _ in range(n)]
    outs = [next(letters) for _ in range(n)]
    rows = [next(letters) for _ in range(n)]
    cols = [next(letters) for _ in range(n)]
    b = next(letters)

    branch_ops = []
    for k in range(n):
        proj = _stack_projectors(branch_obs[k])
        rho = states[k].matrix.reshape(2, 2, 2, 2)
        # branch legs traced against the projectors; center legs stay open
        branch_ops.append(np.einsum("xaij,jRiC->xaRC", proj, rho))
    elements = np.stack(central.elements).reshape((2**n,) + (2,) * (2 * n))
    operands = [elements] + branch_ops
    subscripts = [b + "".join(cols) + "".join(rows)]
    subscripts += [xs[k] + outs[k] + rows[k] + cols[k] for k in range(n)]
    target = "".join(xs) + "".join(outs) + b
    probs = np.einsum(",".join(subscripts) + "->" + target, *operands, optimize="greedy").real
    shape = (2,) * n + (1,) + (2,) * n + (2**n,)
    return behavior_new(star_scenario(n), probs.reshape(shape))


def default_branch_observables(n: int) -> list[list[Observable]]:
    """Setting 0 -> (Z + X)/sqrt2, setting 1 -> (Z - X)/sqrt2 on every branch."""
    return [[xz_observable(np.pi / 4), xz_observable(-np.pi / 4)] for _ in range(n)]


def star_quantum_behavior(n: int, v: float = 1.0) -> Behavior:
    states = [werner(v)] * n
    return star_behavior(n, states, default_branch_observables(n), ghz_basis(n))


def optimize_branch_observables(
    n: int,
    states: Sequence[StateMatrix],
    central: Measurement,
    start: Sequence[float] | None = None,
) -> tuple[list[list[Observable]], float]:
    """Maximise S_n over X-Z plane branch observables.

    Starts from the default observables unless ``start`` gives the 2n angles
    (branch-major). Returns the best observables and their S_n value.
    """
    from fullnn.witness import sn

    def build(angles: np.ndarray) -> list[list[Observable]]:
        return [[xz_observable(angles[2 * k]), xz_observable(angles[2 * k + 1])] for k in range(n)]

    def objective(angles: np.ndarray) -> float:
        return -sn(star_behavior(n, states, build(angles), central), n)

    x0 = np.asarray(start if start is not None else [np.pi / 4, -np.pi / 4] * n, dtype=float)
    initial = -objective(x0)
    result = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000 * n},
    )
    best_angles = result.x if -result.fun >= initial else x0
    best = max(-float(result.fun), initial)
    logger.info("branch observable search: S_%d %.12f -> %.12f", n, initial, best)
    return build(best_angles), best
