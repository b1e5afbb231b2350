"""
Complete analysis of the 16 hyperentangled Bell states

Step one (qnd) reads the polarization Bell state without destroying it and
leaves the relabeled ("new") polarization state behind. Step two sends each
photon through an SPBSA; the detection pair names one of four groups, and
within a group the new polarization state fixes the time-bin state.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import qnd
from errors import AmbiguousResidualError, InconsistentBranchError, TableMismatchError
from qnd import DEFAULT_PHOTONS, BellLabelP, Step1Record, polarization_bsa
from spbsa import SingleBell, analyze_photon, detect_bell, spbsa_chain
from statevec import (
    NORM_TOLERANCE,
    SLOT_L,
    SLOT_S,
    Branch,
    BranchChoice,
    CompositeBasis,
    PathLabel,
    PhotonBasis,
    Polarization,
    StateVector,
    inner,
)

H, V = Polarization.H, Polarization.V


class BellLabelT(StrEnum):
    PHI_PLUS = "PhiT+"
    PHI_MINUS = "PhiT-"
    PSI_PLUS = "PsiT+"
    PSI_MINUS = "PsiT-"


# (photon A label, photon B label, sign) of the two kets of each Bell state
POLARIZATION_BELL_TERMS = {
    BellLabelP.PHI_PLUS: ((H, H, 1), (V, V, 1)),
    BellLabelP.PHI_MINUS: ((H, H, 1), (V, V, -1)),
    BellLabelP.PSI_PLUS: ((H, V, 1), (V, H, 1)),
    BellLabelP.PSI_MINUS: ((H, V, 1), (V, H, -1)),
}
TIMEBIN_BELL_TERMS = {
    BellLabelT.PHI_PLUS: ((SLOT_S, SLOT_S, 1), (SLOT_L, SLOT_L, 1)),
    BellLabelT.PHI_MINUS: ((SLOT_S, SLOT_S, 1), (SLOT_L, SLOT_L, -1)),
    BellLabelT.PSI_PLUS: ((SLOT_S, SLOT_L, 1), (SLOT_L, SLOT_S, 1)),
    BellLabelT.PSI_MINUS: ((SLOT_S, SLOT_L, 1), (SLOT_L, SLOT_S, -1)),
}


@dataclass(frozen=True)
class HyperBellLabel:
    pol: BellLabelP
    tb: BellLabelT

    def __str__(self) -> str:
        return f"{self.pol} {self.tb}"

    @classmethod
    def parse(cls, text: str) -> HyperBellLabel:
        """Parse `PhiP+ PsiT-`: polarization token, then time-bin token"""
        tokens = text.split()
        if len(tokens) != 2:
            raise ValueError(f"Expected two label tokens, got {text!r}")
        try:
            return cls(BellLabelP(tokens[0]), BellLabelT(tokens[1]))
        except ValueError:
            raise ValueError(
                f"Malformed label {text!r}; expected (Phi|Psi)P(+|-) (Phi|Psi)T(+|-)"
            ) from None

    @classmethod
    def all(cls) -> list[HyperBellLabel]:
        """The 16 labels, polarization-major"""
        return [cls(p, t) for p, t in itertools.product(BellLabelP, BellLabelT)]


@dataclass(frozen=True)
class MeasurementRecord:
    step1: Step1Record
    det_a: SingleBell
    det_b: SingleBell

    @property
    def detection(self) -> str:
        return f"{self.det_a}/{self.det_b}"


@dataclass(frozen=True)
class Table2Group:
    group_id: int
    members: tuple[tuple[BellLabelP, BellLabelT], ...]
    detections: frozenset[tuple[SingleBell, SingleBell]]

    def timebin_for(self, relabeled: BellLabelP) -> BellLabelT:
        return dict(self.members)[relabeled]


@dataclass(frozen=True)
class Classification:
    label: HyperBellLabel
    branches: tuple[Branch[MeasurementRecord], ...]


def _group(group_id, members, detections) -> Table2Group:
    bell_p = {"Phi+": BellLabelP.PHI_PLUS, "Phi-": BellLabelP.PHI_MINUS}
    bell_p |= {"Psi+": BellLabelP.PSI_PLUS, "Psi-": BellLabelP.PSI_MINUS}
    bell_t = {"Phi+": BellLabelT.PHI_PLUS, "Phi-": BellLabelT.PHI_MINUS}
    bell_t |= {"Psi+": BellLabelT.PSI_PLUS, "Psi-": BellLabelT.PSI_MINUS}
    return Table2Group(
        group_id,
        tuple((bell_p[p], bell_t[t]) for p, t in members),
        frozenset((SingleBell(a), SingleBell(b)) for a, b in detections),
    )


# New polarization state ⊗ time-bin state, and the detection pairs it can fire
TABLE_II = (
    _group(
        1,
        [("Phi+", "Phi+"), ("Phi-", "Phi-"), ("Psi+", "Psi+"), ("Psi-", "Psi-")],
        [("phi+", "phi+"), ("phi-", "phi-"), ("psi+", "psi+"), ("psi-", "psi-")],
    ),
    _group(
        2,
        [("Phi+", "Psi+"), ("Phi-", "Psi-"), ("Psi+", "Phi+"), ("Psi-", "Phi-")],
        [("phi+", "psi+"), ("phi-", "psi-"), ("psi+", "phi+"), ("psi-", "phi-")],
    ),
    _group(
        3,
        [("Phi+", "Phi-"), ("Phi-", "Phi+"), ("Psi+", "Psi-"), ("Psi-", "Psi+")],
        [("phi+", "phi-"), ("phi-", "phi+"), ("psi+", "psi-"), ("psi-", "psi+")],
    ),
    _group(
        4,
        [("Phi+", "Psi-"), ("Phi-", "Psi+"), ("Psi+", "Phi-"), ("Psi-", "Phi+")],
        [("phi+", "psi-"), ("phi-", "psi+"), ("psi+", "phi-"), ("psi-", "phi+")],
    ),
)


def prepare_hyper_bell(
    label: HyperBellLabel,
    photons: Sequence[str] = DEFAULT_PHOTONS,
    paths: Sequence[PathLabel] = (PathLabel.PORT_A, PathLabel.PORT_B),
) -> StateVector:
    """
    Polarization Bell state ⊗ time-bin Bell state of two photons

    Args:
        label: Which of the 16 states
        photons: Names of the two photons
        paths: Path of each photon

    Returns:
        Four-term state, every amplitude ±1/2, probes at zero
    """
    path_a, path_b = paths
    terms = {}
    for pol_a, pol_b, pol_sign in POLARIZATION_BELL_TERMS[label.pol]:
        for slot_a, slot_b, tb_sign in TIMEBIN_BELL_TERMS[label.tb]:
            basis = CompositeBasis(
                (PhotonBasis(pol_a, slot_a, path_a), PhotonBasis(pol_b, slot_b, path_b))
            )
            terms[basis] = pol_sign * tb_sign / 2.0
    return StateVector(tuple(photons), terms)


def table2_lookup(relabeled: BellLabelP, det_a: SingleBell, det_b: SingleBell) -> BellLabelT:
    """
    Time-bin state implied by a detection pair and the new polarization state

    Args:
        relabeled: Polarization Bell state left by step one
        det_a: SPBSA result of photon A
        det_b: SPBSA result of photon B

    Returns:
        The time-bin Bell state
    """
    for group in TABLE_II:
        if (det_a, det_b) in group.detections:
            return group.timebin_for(relabeled)
    raise KeyError(f"Detection pair {det_a}/{det_b} is in no Table II group")


def decode(record: MeasurementRecord) -> HyperBellLabel:
    """The classifier: a pure function of the measurement record"""
    step1 = record.step1
    tb = table2_lookup(step1.relabeled, record.det_a, record.det_b)
    return HyperBellLabel(step1.original, tb)


def measure_hyper_bell(
    s: StateVector,
    choice: BranchChoice,
    photons: tuple[str, str] = DEFAULT_PHOTONS,
    require_bell: bool = False,
) -> list[Branch[MeasurementRecord]]:
    """
    Run both steps on two photons and return every leaf of the measurement

    Args:
        s: State with the analyzed photons on ports A and B
        choice: Exhaustive or seeded sampling
        photons: Photons entering ports A and B
        require_bell: Enforce the Bell-input contract in step one

    Returns:
        Leaves with path probabilities and the state of the remaining photons
    """
    first, second = photons
    leaves = []
    for step1 in polarization_bsa(s, choice, photons, require_bell):
        # chains on different photons commute with either detection
        analyzed = spbsa_chain(spbsa_chain(step1.state, first), second)
        for det_a in detect_bell(analyzed, first, choice):
            for det_b in detect_bell(det_a.state, second, choice):
                record = MeasurementRecord(step1.outcome, det_a.outcome, det_b.outcome)
                probability = step1.probability * det_a.probability * det_b.probability
                leaves.append(Branch(record, probability, det_b.state))
    return leaves


def classify(
    s: StateVector, choice: BranchChoice, photons: tuple[str, str] = DEFAULT_PHOTONS
) -> Classification:
    """
    Identify which of the 16 hyperentangled Bell states two photons are in

    Args:
        s: One of the prepared states, up to a global phase
        choice: Exhaustive or seeded sampling
        photons: Photons entering ports A and B

    Returns:
        The label and the measurement branches that produced it
    """
    leaves = measure_hyper_bell(s, choice, photons, require_bell=True)
    labels = {decode(leaf.outcome) for leaf in leaves}
    if len(labels) != 1:
        raise InconsistentBranchError(
            f"Branches disagree: {', '.join(sorted(str(x) for x in labels))}"
        )
    (label,) = labels
    return Classification(label, tuple(leaves))


def analyze_hyper_bell(
    s: StateVector, choice: BranchChoice, photons: tuple[str, str] = DEFAULT_PHOTONS
) -> list[Branch[HyperBellLabel]]:
    """
    Two-step analysis of an arbitrary pair, one branch per decoded label

    Several measurement records decode to the same label; they project the
    remaining photons onto the same state up to a global phase, so they are
    merged into one branch carrying their summed probability.

    Args:
        s: State with the analyzed photons on ports A and B
        choice: Exhaustive (one branch per label) or seeded sampling (one branch)
        photons: Photons entering ports A and B

    Returns:
        Branches labelled by HyperBellLabel, holding the state of the other photons
    """
    grouped: dict[HyperBellLabel, list[Branch[MeasurementRecord]]] = {}
    for leaf in measure_hyper_bell(s, BranchChoice.exhaustive(), photons):
        grouped.setdefault(decode(leaf.outcome), []).append(leaf)

    branches = []
    for label, leaves in grouped.items():
        state = leaves[0].state
        for leaf in leaves[1:]:
            if abs(abs(inner(state, leaf.state)) - 1.0) > NORM_TOLERANCE:
                raise InconsistentBranchError(
                    f"Records decoding to {label} leave different states: {leaf.outcome.detection}"
                )
        branches.append(Branch(label, sum(leaf.probability for leaf in leaves), state))
    return choice.select(branches)


def identify_hyper_bell(
    s: StateVector,
    photons: Sequence[str] = DEFAULT_PHOTONS,
    paths: Sequence[PathLabel] = (PathLabel.PORT_A, PathLabel.PORT_B),
) -> HyperBellLabel:
    """
    The hyperentangled Bell state with unit overlap with `s`

    Args:
        s: Two-photon state
        photons: Photon names, in the order `s` stores them
        paths: Paths the photons occupy

    Returns:
        The unique matching label; raises AmbiguousResidualError otherwise
    """
    matches = [
        label
        for label in HyperBellLabel.all()
        if abs(abs(inner(prepare_hyper_bell(label, photons, paths), s)) - 1.0) <= NORM_TOLERANCE
    ]
    if len(matches) != 1:
        raise AmbiguousResidualError(f"{len(matches)} hyperentangled Bell states match")
    return matches[0]


def derive_table1() -> list[Step1Record]:
    """
    Table I as observed in simulation

    Every polarization Bell state is run with each time-bin Bell state; the
    shifts come from the homodyne outcomes and the new state from the
    overlap of the output with the prepared states.
    """
    rows: list[Step1Record] = []
    for label in HyperBellLabel.all():
        (branch,) = polarization_bsa(prepare_hyper_bell(label), BranchChoice.exhaustive())
        after = identify_hyper_bell(branch.state)
        if after.tb is not label.tb:
            raise TableMismatchError(f"Step one turned {label.tb} into {after.tb}")
        row = Step1Record(branch.outcome.shift1, branch.outcome.shift2, label.pol, after.pol)
        if row not in rows:
            rows.append(row)
    return rows


def verify_table1() -> list[Step1Record]:
    """Derive Table I and fail if it differs from the transcription"""
    derived = derive_table1()
    transcribed = [Step1Record(s1, s2, original, new) for original, s1, s2, new in qnd.TABLE_I]
    if derived != transcribed:
        raise TableMismatchError(f"Table I differs: simulated {derived}")
    return derived


def derive_table2() -> list[Table2Group]:
    """
    Table II as observed in simulation

    Each of the 16 products (new polarization state ⊗ time-bin state) goes
    through both SPBSAs with every branch kept. Products with the same
    detection support form one group; groups are numbered in order of
    appearance.
    """
    supports: dict[frozenset, list[tuple[BellLabelP, BellLabelT]]] = {}
    for label in HyperBellLabel.all():
        state = prepare_hyper_bell(label)
        weights: dict[tuple[SingleBell, SingleBell], float] = {}
        for det_a in analyze_photon(state, "A", BranchChoice.exhaustive()):
            for det_b in analyze_photon(det_a.state, "B", BranchChoice.exhaustive()):
                pair = (det_a.outcome, det_b.outcome)
                weights[pair] = weights.get(pair, 0.0) + det_a.probability * det_b.probability
        if any(abs(w - 0.25) > NORM_TOLERANCE for w in weights.values()):
            raise TableMismatchError(f"{label} detections are not uniform: {weights}")
        supports.setdefault(frozenset(weights), []).append((label.pol, label.tb))

    return [
        Table2Group(i, tuple(members), support)
        for i, (support, members) in enumerate(supports.items(), start=1)
    ]


def verify_table2() -> list[Table2Group]:
    """
    Derive Table II and fail if any support differs from the transcription

    Returns:
        The reconstructed groups, numbered as in the transcription
    """
    derived = derive_table2()
    reconstructed = []
    for group in TABLE_II:
        match = [g for g in derived if set(g.members) == set(group.members)]
        if len(match) != 1 or match[0].detections != group.detections:
            raise TableMismatchError(f"Table II group {group.group_id} differs from simulation")
        reconstructed.append(Table2Group(group.group_id, group.members, match[0].detections))
    if len(derived) != len(TABLE_II) or sum(len(g.detections) for g in derived) != 16:
        raise TableMismatchError("Simulated detections do not partition into four groups")
    logging.debug("Table II reproduced")
    return reconstructed
