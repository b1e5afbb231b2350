"""
Teleportation and entanglement swapping on top of the hyperentangled analyzer
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from errors import NormalizationError
from hbsa import (
    BellLabelT,
    HyperBellLabel,
    analyze_hyper_bell,
    identify_hyper_bell,
    prepare_hyper_bell,
)
from optics import polarization_rotation
from qnd import BellLabelP
from statevec import (
    NORM_TOLERANCE,
    SLOT_L,
    SLOT_S,
    BranchChoice,
    CompositeBasis,
    PathLabel,
    PhotonBasis,
    Polarization,
    StateVector,
    inner,
    map_photon,
    tensor,
)
from utils import SplitMix64

CHANNEL = HyperBellLabel(BellLabelP.PHI_PLUS, BellLabelT.PHI_PLUS)


class CorrectionOp(StrEnum):
    I = "I"  # noqa: E741
    Z = "Z"
    X = "X"
    ZX = "ZX"

    @property
    def matrix(self) -> np.ndarray:
        return CORRECTION_MATRICES[self]


_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

# X acts first in ZX
CORRECTION_MATRICES = {
    CorrectionOp.I: np.eye(2),
    CorrectionOp.Z: _PAULI_Z,
    CorrectionOp.X: _PAULI_X,
    CorrectionOp.ZX: _PAULI_Z @ _PAULI_X,
}

_OP_BY_FAMILY = {
    ("Phi", "+"): CorrectionOp.I,
    ("Phi", "-"): CorrectionOp.Z,
    ("Psi", "+"): CorrectionOp.X,
    ("Psi", "-"): CorrectionOp.ZX,
}


@dataclass(frozen=True)
class CorrectionOps:
    pol_op: CorrectionOp
    tb_op: CorrectionOp

    def __str__(self) -> str:
        return f"({self.pol_op}, {self.tb_op})"


@dataclass(frozen=True)
class TwoQubitPhotonState:
    """
    Single photon in (α|H⟩ + β|V⟩) ⊗ (δ|S⟩ + η|L⟩)

    Each degree of freedom must be normalized on its own.
    """

    alpha: complex
    beta: complex
    delta: complex
    eta: complex
    tolerance: float = NORM_TOLERANCE

    def __post_init__(self):
        pol_norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        tb_norm = abs(self.delta) ** 2 + abs(self.eta) ** 2
        for dof, norm in (("polarization", pol_norm), ("time-bin", tb_norm)):
            if abs(norm - 1.0) > self.tolerance:
                raise NormalizationError(f"{dof} amplitudes have squared norm {norm:.12g}")

    @classmethod
    def random(cls, rng: SplitMix64) -> TwoQubitPhotonState:
        """Two independent Haar-random qubits, polarization drawn first"""
        alpha, beta = rng.haar_qubit()
        delta, eta = rng.haar_qubit()
        return cls(alpha, beta, delta, eta)

    def to_state(self, name: str = "X", path: PathLabel = PathLabel.PORT_A) -> StateVector:
        terms = {}
        for pol, a in ((Polarization.H, self.alpha), (Polarization.V, self.beta)):
            for slot, b in ((SLOT_S, self.delta), (SLOT_L, self.eta)):
                terms[CompositeBasis((PhotonBasis(pol, slot, path),))] = a * b
        return StateVector((name,), terms)


@dataclass(frozen=True)
class TeleportBranch:
    label: HyperBellLabel
    probability: float
    bob_state: StateVector
    corrected_state: StateVector
    fidelity: float
    uncorrected_fidelity: float


@dataclass(frozen=True)
class SwapBranch:
    charlie_label: HyperBellLabel
    ab_label: HyperBellLabel
    probability: float
    state: StateVector

    @property
    def match(self) -> bool:
        return self.charlie_label == self.ab_label


def _op_for(label: StrEnum) -> CorrectionOp:
    # labels read (Phi|Psi)(P|T)(+|-)
    return _OP_BY_FAMILY[(label.value[:3], label.value[-1])]


def correction_for(label: HyperBellLabel) -> CorrectionOps:
    """
    Unitaries that return Bob's photon to the teleported state

    Args:
        label: Outcome of the hyperentangled analysis on photons X and A

    Returns:
        One operator per degree of freedom
    """
    return CorrectionOps(_op_for(label.pol), _op_for(label.tb))


def timebin_rotation(s: StateVector, photon: str, matrix: np.ndarray) -> StateVector:
    """2x2 unitary on the (S, L) slots of one photon, indexed [output, input]"""
    slots = (SLOT_S, SLOT_L)

    def rotate(p: PhotonBasis) -> list[tuple[complex, PhotonBasis]]:
        column = slots.index(p.slot)
        return [
            (complex(matrix[row, column]), p.with_slot(slot))
            for row, slot in enumerate(slots)
            if matrix[row, column] != 0
        ]

    return map_photon(s, photon, rotate)


def apply_correction(s: StateVector, photon: str, ops: CorrectionOps) -> StateVector:
    """Apply the polarization and time-bin corrections to one photon"""
    s = polarization_rotation(s, photon, ops.pol_op.matrix)
    return timebin_rotation(s, photon, ops.tb_op.matrix)


def _fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner(a, b)) ** 2


def teleport(input_state: TwoQubitPhotonState, choice: BranchChoice) -> list[TeleportBranch]:
    """
    Teleport both qubits of photon X onto photon B

    Alice holds X (port A) and A (port B) of the (Φ+P, Φ+T) channel; Bob holds
    B on a remote path. Alice runs the two-step analysis on (X, A) and Bob
    applies correction_for(label).

    Args:
        input_state: State of photon X
        choice: Exhaustive (16 branches) or seeded sampling (one)

    Returns:
        One entry per measurement branch
    """
    channel = prepare_hyper_bell(CHANNEL, ("A", "B"), (PathLabel.PORT_B, PathLabel.REMOTE))
    s = tensor(input_state.to_state("X", PathLabel.PORT_A), channel)
    target = input_state.to_state("B", PathLabel.REMOTE)

    branches = []
    for branch in analyze_hyper_bell(s, choice, ("X", "A")):
        corrected = apply_correction(branch.state, "B", correction_for(branch.outcome))
        branches.append(
            TeleportBranch(
                label=branch.outcome,
                probability=branch.probability,
                bob_state=branch.state,
                corrected_state=corrected,
                fidelity=_fidelity(target, corrected),
                uncorrected_fidelity=_fidelity(target, branch.state),
            )
        )
    logging.debug(f"Teleported {input_state} over {len(branches)} branches")
    return branches


def uncorrected_mean_fidelity(branches: list[TeleportBranch]) -> float:
    """Probability-weighted fidelity of Bob's photon when no correction is applied"""
    return math.fsum(b.probability * b.uncorrected_fidelity for b in branches)


def swap(choice: BranchChoice) -> list[SwapBranch]:
    """
    Entanglement swapping between two (Φ+P, Φ+T) pairs

    Charlie holds C1 and C2 and runs the analysis on them; A and B, which
    never interacted, are left in the hyperentangled state Charlie found.

    Args:
        choice: Exhaustive (16 branches) or seeded sampling (one)

    Returns:
        Charlie's label and the identified AB label per branch
    """
    left = prepare_hyper_bell(CHANNEL, ("A", "C1"), (PathLabel.REMOTE, PathLabel.PORT_A))
    right = prepare_hyper_bell(CHANNEL, ("C2", "B"), (PathLabel.PORT_B, PathLabel.REMOTE))
    s = tensor(left, right)

    branches = []
    for branch in analyze_hyper_bell(s, choice, ("C1", "C2")):
        ab = identify_hyper_bell(branch.state, ("A", "B"), (PathLabel.REMOTE, PathLabel.REMOTE))
        branches.append(SwapBranch(branch.outcome, ab, branch.probability, branch.state))
    return branches
