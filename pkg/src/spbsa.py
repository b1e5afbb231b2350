"""
Single-photon Bell-state analyzer (SPBSA)

Projects one photon onto the Bell basis of its own polarization and time-bin:

    φ± = (|H L⟩ ± |V S⟩)/√2        ψ± = (|H S⟩ ± |V L⟩)/√2

Element chain for the default layout:

    PC_L ─ PBS ┬ ARM_H ─ PC_S ─ PBS ┬ SHORT_H ──────────┬ PBS ─ HWP ─ PBS ─ D1 (+) / D2 (−)
               │                    └ LONG_H ─ delay +1 ┘
               └ ARM_V ─ PC_S ─ PBS ┬ SHORT_V ──────────┬ PBS ─ HWP ─ PBS ─ D3 (+) / D4 (−)
                                    └ LONG_V ─ delay +1 ┘

After PC_L each Bell pair has a definite polarization, so the first PBS sorts
φ± and ψ± into separate arms. PC_S then ties polarization to arrival time in
each arm, and each unbalanced interferometer sends the early polarization down
its long arm so both components leave in slot L. The relative sign is then
read in the diagonal basis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from functools import cache

from errors import AmbiguousMappingError, IndefiniteSlotError, WiringError
from optics import (
    DetectorPort,
    PbsWiring,
    Sign,
    delay,
    detect_polarization,
    pbs,
    pbs_merge,
    pockels,
)
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
    TimeSlot,
)

H, V = Polarization.H, Polarization.V

SPBSA_INPUTS = frozenset({PathLabel.PORT_A, PathLabel.PORT_B})
DETECTOR_PATHS = (PathLabel.ARM_H, PathLabel.ARM_V)
DETECTOR_NAMES = {
    DetectorPort(PathLabel.ARM_H, Sign.PLUS): "D1",
    DetectorPort(PathLabel.ARM_H, Sign.MINUS): "D2",
    DetectorPort(PathLabel.ARM_V, Sign.PLUS): "D3",
    DetectorPort(PathLabel.ARM_V, Sign.MINUS): "D4",
}


class SingleBell(StrEnum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


# (polarization, slot, relative sign) of the two components
SINGLE_BELL_TERMS = {
    SingleBell.PHI_PLUS: ((H, SLOT_L, 1), (V, SLOT_S, 1)),
    SingleBell.PHI_MINUS: ((H, SLOT_L, 1), (V, SLOT_S, -1)),
    SingleBell.PSI_PLUS: ((H, SLOT_S, 1), (V, SLOT_L, 1)),
    SingleBell.PSI_MINUS: ((H, SLOT_S, 1), (V, SLOT_L, -1)),
}


@dataclass(frozen=True)
class SpbsaLayout:
    """
    Which Pockels cell fires first and which polarization takes the long arm
    of the interferometer behind each output of the first PBS.
    """

    first_cell: TimeSlot = SLOT_L
    arm_h_long: Polarization = V
    arm_v_long: Polarization = H

    @property
    def second_cell(self) -> TimeSlot:
        return SLOT_S if self.first_cell == SLOT_L else SLOT_L

    @classmethod
    def swapped_cells(cls) -> SpbsaLayout:
        """PC_S first; the early component then flips polarization in both arms"""
        return cls(first_cell=SLOT_S, arm_h_long=H, arm_v_long=V)


DEFAULT_LAYOUT = SpbsaLayout()


@dataclass(frozen=True)
class DetectorMap:
    mapping: tuple[tuple[DetectorPort, SingleBell], ...]

    def decode(self, port: DetectorPort) -> SingleBell:
        for candidate, bell in self.mapping:
            if candidate == port:
                return bell
        raise KeyError(f"Port {port} is not in the detector map")

    def rows(self) -> list[tuple[str, DetectorPort, SingleBell]]:
        return [(DETECTOR_NAMES[port], port, bell) for port, bell in self.mapping]


def prepare_single_bell(
    bell: SingleBell, name: str = "A", path: PathLabel = PathLabel.PORT_A
) -> StateVector:
    """One photon prepared in a single-photon Bell state on `path`"""
    terms = {
        CompositeBasis((PhotonBasis(pol, slot, path),)): sign / math.sqrt(2.0)
        for pol, slot, sign in SINGLE_BELL_TERMS[bell]
    }
    return StateVector((name,), terms)


def spbsa_chain(s: StateVector, photon: str, layout: SpbsaLayout = DEFAULT_LAYOUT) -> StateVector:
    """
    Unitary part of the analyzer, up to the detectors

    Args:
        s: State with `photon` on an analyzer input port
        photon: Photon to analyze
        layout: Cell order and interferometer routing

    Returns:
        State with the photon on ARM_H or ARM_V, all components in one slot
    """
    paths = {p.path for p in s.photon_labels(photon)}
    if len(paths) != 1 or not paths <= SPBSA_INPUTS:
        raise WiringError(
            f"Photon {photon} must enter the SPBSA on one input port, found {sorted(paths)}"
        )
    (port,) = paths

    s = pockels(s, photon, layout.first_cell)
    family = PbsWiring(
        photon, frozenset({port}), output_h=PathLabel.ARM_H, output_v=PathLabel.ARM_V
    )
    s = pbs(s, family)
    s = pockels(s, photon, layout.second_cell)

    interferometers = (
        (PathLabel.ARM_H, layout.arm_h_long, PathLabel.LONG_H, PathLabel.SHORT_H, PathLabel.ARM_V),
        (PathLabel.ARM_V, layout.arm_v_long, PathLabel.LONG_V, PathLabel.SHORT_V, PathLabel.ARM_H),
    )
    for arm, long_pol, long_path, short_path, other_arm in interferometers:
        output_h, output_v = (long_path, short_path) if long_pol is H else (short_path, long_path)
        wiring = PbsWiring(
            photon, frozenset({arm}), output_h, output_v, bypass=frozenset({other_arm})
        )
        s = pbs(s, wiring)
        s = delay(s, photon, long_path, +1)
        s = pbs_merge(s, wiring)

    slots = {p.slot for p in s.photon_labels(photon)}
    if len(slots) != 1:
        raise IndefiniteSlotError(
            f"Time bins of photon {photon} did not merge: slots {sorted(slots)}"
        )
    return s


@cache
def derive_detector_map(layout: SpbsaLayout = DEFAULT_LAYOUT) -> DetectorMap:
    """
    Port assignment of the analyzer, found by simulating each Bell input

    Args:
        layout: Analyzer layout

    Returns:
        Bijection from the four detector ports to the single-photon Bell states
    """
    mapping: dict[DetectorPort, SingleBell] = {}
    for bell in SingleBell:
        s = spbsa_chain(prepare_single_bell(bell), "A", layout)
        fired = detect_polarization(s, "A", BranchChoice.exhaustive(), DETECTOR_PATHS)
        if len(fired) != 1 or abs(fired[0].probability - 1.0) > NORM_TOLERANCE:
            ports = ", ".join(f"{b.outcome} ({b.probability:.3f})" for b in fired)
            raise AmbiguousMappingError(f"{bell} fires {ports}")
        port = fired[0].outcome
        if port in mapping:
            raise AmbiguousMappingError(f"{bell} and {mapping[port]} both fire {port}")
        mapping[port] = bell

    detector_map = DetectorMap(tuple(sorted(mapping.items())))
    logging.debug(f"Detector map: {detector_map.rows()}")
    return detector_map


def detect_bell(
    s: StateVector,
    photon: str,
    choice: BranchChoice,
    layout: SpbsaLayout = DEFAULT_LAYOUT,
) -> list[Branch[SingleBell]]:
    """Detection stage only, for a photon that already went through spbsa_chain"""
    detector_map = derive_detector_map(layout)
    return [
        Branch(detector_map.decode(b.outcome), b.probability, b.state)
        for b in detect_polarization(s, photon, choice, DETECTOR_PATHS)
    ]


def analyze_photon(
    s: StateVector,
    photon: str,
    choice: BranchChoice,
    layout: SpbsaLayout = DEFAULT_LAYOUT,
) -> list[Branch[SingleBell]]:
    """
    Measure one photon in the single-photon Bell basis

    Args:
        s: State with `photon` on an analyzer input port
        photon: Photon to analyze
        choice: Exhaustive or seeded sampling
        layout: Analyzer layout

    Returns:
        Branches labelled by the decoded Bell state; the photon is traced out
    """
    return detect_bell(spbsa_chain(s, photon, layout), photon, choice, layout)
