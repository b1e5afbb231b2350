"""
Step one of the analyzer: nondemolition readout of the polarization Bell state

Two cross-Kerr QNDs share one layout. Each splits the photons on PBSs so that
both can meet in the UPPER or LOWER arm, tags the arms on its probe beam
(+θ upper, −θ lower) and recombines them onto their ports. The first reads
parity (Φ vs Ψ); the second, behind a HWP on each photon, reads the relative
phase.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum

from errors import InconsistentBranchError, TimeBinDisturbedError, WiringError
from optics import HomodyneOutcome, PbsWiring, homodyne, hwp, kerr_tag, pbs, pbs_merge
from statevec import (
    NORM_TOLERANCE,
    Branch,
    BranchChoice,
    PathLabel,
    StateVector,
    overlap_fidelity,
    timebin_density_matrix,
)

ANALYZER_PORTS = (PathLabel.PORT_A, PathLabel.PORT_B)
DEFAULT_PHOTONS = ("A", "B")

ZERO, TWO = HomodyneOutcome.ZERO, HomodyneOutcome.TWO


class BellLabelP(StrEnum):
    PHI_PLUS = "PhiP+"
    PHI_MINUS = "PhiP-"
    PSI_PLUS = "PsiP+"
    PSI_MINUS = "PsiP-"


# Original state, shift on probe 1, shift on probe 2, new state
TABLE_I = (
    (BellLabelP.PHI_PLUS, ZERO, ZERO, BellLabelP.PHI_PLUS),
    (BellLabelP.PHI_MINUS, ZERO, TWO, BellLabelP.PSI_PLUS),
    (BellLabelP.PSI_PLUS, TWO, ZERO, BellLabelP.PHI_MINUS),
    (BellLabelP.PSI_MINUS, TWO, TWO, BellLabelP.PSI_MINUS),
)


@dataclass(frozen=True)
class Step1Record:
    shift1: HomodyneOutcome
    shift2: HomodyneOutcome
    original: BellLabelP
    relabeled: BellLabelP


def decode_shifts(shift1: HomodyneOutcome, shift2: HomodyneOutcome) -> BellLabelP:
    """Original polarization Bell state for a pair of homodyne outcomes"""
    for original, s1, s2, _ in TABLE_I:
        if (s1, s2) == (shift1, shift2):
            return original
    raise KeyError(f"No Table I row for shifts ({shift1}, {shift2})")


def relabel(original: BellLabelP) -> BellLabelP:
    """Polarization Bell state left behind by the phase QND's HWPs"""
    for row_original, _, _, new_state in TABLE_I:
        if row_original is original:
            return new_state
    raise KeyError(f"No Table I row for {original}")


def _qnd_interaction(
    s: StateVector, probe: int, choice: BranchChoice, photons: tuple[str, str]
) -> list[Branch[HomodyneOutcome]]:
    first, second = photons
    for name, port in zip(photons, ANALYZER_PORTS, strict=True):
        if {p.path for p in s.photon_labels(name)} != {port}:
            raise WiringError(f"Photon {name} must enter the QND on {port}")
    if any(basis.probes.get(probe) for basis in s):
        raise WiringError(f"Probe {probe} must start with a zero counter")

    # V from port A and H from port B meet in the upper arm
    split_first = PbsWiring(
        first, frozenset({PathLabel.PORT_A}), output_h=PathLabel.LOWER, output_v=PathLabel.UPPER
    )
    split_second = PbsWiring(
        second, frozenset({PathLabel.PORT_B}), output_h=PathLabel.UPPER, output_v=PathLabel.LOWER
    )
    s = pbs(pbs(s, split_first), split_second)
    s = kerr_tag(s, PathLabel.UPPER, probe, +1)
    s = kerr_tag(s, PathLabel.LOWER, probe, -1)
    s = pbs_merge(pbs_merge(s, split_first), split_second)
    return homodyne(s, probe, choice)


def parity_qnd(
    s: StateVector, choice: BranchChoice, photons: tuple[str, str] = DEFAULT_PHOTONS
) -> list[Branch[HomodyneOutcome]]:
    """
    First QND: ZERO for Φ±, TWO for Ψ±

    Args:
        s: State with the photons on ports A and B, probe 1 at zero
        choice: Exhaustive or seeded sampling
        photons: Photons entering ports A and B

    Returns:
        Homodyne branches with the photons back on their ports
    """
    return _qnd_interaction(s, 1, choice, photons)


def phase_qnd(
    s: StateVector, choice: BranchChoice, photons: tuple[str, str] = DEFAULT_PHOTONS
) -> list[Branch[HomodyneOutcome]]:
    """
    Second QND: HWP on both photons, then the parity readout on probe 2

    Args:
        s: State after parity_qnd
        choice: Exhaustive or seeded sampling
        photons: Photons entering ports A and B

    Returns:
        Homodyne branches; the HWPs are not undone
    """
    first, second = photons
    s = hwp(hwp(s, first), second)
    return _qnd_interaction(s, 2, choice, photons)


def polarization_bsa(
    s: StateVector,
    choice: BranchChoice,
    photons: tuple[str, str] = DEFAULT_PHOTONS,
    require_bell: bool = True,
) -> list[Branch[Step1Record]]:
    """
    Complete polarization Bell-state analysis (parity QND, then phase QND)

    With require_bell the QND branches are enumerated exhaustively whatever
    the choice: a Bell input has exactly one (shift1, shift2) outcome, and its
    time-bin reduced state must come out unchanged.

    Args:
        s: State with the analyzed photons on ports A and B
        choice: Exhaustive or seeded sampling
        photons: Photons entering ports A and B
        require_bell: Enforce the Bell-input contract

    Returns:
        Branches labelled with Table I records
    """
    qnd_choice = BranchChoice.exhaustive() if require_bell else choice
    branches = []
    for parity in parity_qnd(s, qnd_choice, photons):
        for phase in phase_qnd(parity.state, qnd_choice, photons):
            original = decode_shifts(parity.outcome, phase.outcome)
            record = Step1Record(parity.outcome, phase.outcome, original, relabel(original))
            branches.append(Branch(record, parity.probability * phase.probability, phase.state))

    if not require_bell:
        return branches

    if len(branches) != 1:
        outcomes = ", ".join(f"({b.outcome.shift1}, {b.outcome.shift2})" for b in branches)
        raise InconsistentBranchError(f"Polarization state is not a Bell state: {outcomes}")
    (branch,) = branches
    fidelity = overlap_fidelity(
        timebin_density_matrix(s, photons), timebin_density_matrix(branch.state, photons)
    )
    if abs(fidelity - 1.0) > NORM_TOLERANCE:
        raise TimeBinDisturbedError(f"Time-bin fidelity {fidelity:.12g} after step one")
    logging.debug(f"Step one: {branch.outcome}")
    return branches
