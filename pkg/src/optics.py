"""
Optical elements of the analyzer circuits

Every element is a label map over the sparse state: polarizing beam splitters,
wave plates, Pockels cells, delay lines, cross-Kerr phase taggers, the
homodyne probe readout and the single-photon detectors.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Collection
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from errors import CounterOverflowError, IndefiniteSlotError, UnexpectedCounterError, WiringError
from statevec import (
    Branch,
    BranchChoice,
    CompositeBasis,
    PathLabel,
    PhotonBasis,
    Polarization,
    StateVector,
    TimeSlot,
    apply_label_map,
    map_photon,
    measure,
    remove_photon,
)

# Hadamard plate, indexed [output polarization, input polarization]
HWP_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)

MAX_PROBE_COUNTER = 2


class HomodyneOutcome(StrEnum):
    """Magnitude class of the probe phase shift; the sign is never exposed"""

    ZERO = "0"
    TWO = "±2θ"


class Sign(StrEnum):
    PLUS = "+"
    MINUS = "-"


class MeasurementBasis(StrEnum):
    DIAGONAL = "diagonal"
    RECTILINEAR = "rectilinear"


@dataclass(frozen=True, order=True)
class DetectorPort:
    path: PathLabel
    sign: Sign

    def __str__(self) -> str:
        return f"{self.path}{self.sign}"


@dataclass(frozen=True)
class PbsWiring:
    """
    Routing of one photon through a polarizing beam splitter.

    H is transmitted to `output_h`, V reflected to `output_v`. Paths in
    `bypass` belong to a parallel arm and pass untouched.
    """

    photon: str
    inputs: frozenset[PathLabel]
    output_h: PathLabel
    output_v: PathLabel
    bypass: frozenset[PathLabel] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.output_h == self.output_v:
            raise WiringError(f"PBS outputs coincide on {self.output_h}")
        if {self.output_h, self.output_v} & (self.inputs | self.bypass):
            raise WiringError("PBS outputs overlap its input or bypass paths")

    @property
    def merged_path(self) -> PathLabel:
        """The single input path a merging PBS returns both outputs to"""
        if len(self.inputs) != 1:
            raise WiringError(f"Cannot merge back onto {len(self.inputs)} input paths")
        return next(iter(self.inputs))


def polarization_rotation(s: StateVector, photon: str, matrix: np.ndarray) -> StateVector:
    """
    Apply a 2x2 Jones matrix to the polarization of one photon

    Args:
        s: Input state
        photon: Photon name
        matrix: Unitary indexed [output, input] over (H, V)

    Returns:
        State with slot and path untouched
    """

    def rotate(p: PhotonBasis) -> list[tuple[complex, PhotonBasis]]:
        return [
            (complex(matrix[out, p.pol]), p.with_pol(out))
            for out in Polarization
            if matrix[out, p.pol] != 0
        ]

    return map_photon(s, photon, rotate)


def hwp(s: StateVector, photon: str) -> StateVector:
    """Half-wave plate: |H⟩→(|H⟩+|V⟩)/√2, |V⟩→(|H⟩−|V⟩)/√2"""
    return polarization_rotation(s, photon, HWP_MATRIX)


def pbs(s: StateVector, w: PbsWiring) -> StateVector:
    """
    Split a photon by polarization

    Args:
        s: Input state
        w: Wiring of the splitter

    Returns:
        State with H routed to w.output_h and V to w.output_v
    """

    def route(p: PhotonBasis) -> list[tuple[complex, PhotonBasis]]:
        if p.path in w.bypass:
            return [(1, p)]
        if p.path not in w.inputs:
            raise WiringError(
                f"Photon {w.photon} on {p.path} reached a PBS fed by {sorted(w.inputs)}"
            )
        out = w.output_h if p.pol is Polarization.H else w.output_v
        return [(1, p.with_path(out))]

    return map_photon(s, w.photon, route)


def pbs_merge(s: StateVector, w: PbsWiring) -> StateVector:
    """
    Recombine the two outputs of `w` onto its input path

    Args:
        s: State after pbs(s, w) and any per-arm elements
        w: Wiring of the splitter being undone

    Returns:
        State with the photon back on w.merged_path
    """
    merged = w.merged_path

    def route(p: PhotonBasis) -> list[tuple[complex, PhotonBasis]]:
        if p.path in w.bypass:
            return [(1, p)]
        if (p.path, p.pol) in ((w.output_h, Polarization.H), (w.output_v, Polarization.V)):
            return [(1, p.with_path(merged))]
        if p.path in (w.output_h, w.output_v):
            raise WiringError(f"{p.pol} on {p.path} would leave through the dark port")
        raise WiringError(f"Photon {w.photon} on {p.path} is not on an output of the PBS")

    return map_photon(s, w.photon, route)


def pockels(s: StateVector, photon: str, active_slot: TimeSlot) -> StateVector:
    """Bit flip H↔V on the components of `photon` present during `active_slot`"""

    def flip(p: PhotonBasis) -> list[tuple[complex, PhotonBasis]]:
        if p.slot != active_slot:
            return [(1, p)]
        return [(1, p.with_pol(Polarization(1 - p.pol)))]

    return map_photon(s, photon, flip)


def delay(s: StateVector, photon: str, path: PathLabel, shift: int) -> StateVector:
    """Shift the time slot of the components of `photon` travelling on `path`"""

    def retard(p: PhotonBasis) -> list[tuple[complex, PhotonBasis]]:
        return [(1, p.with_slot(p.slot + shift) if p.path == path else p)]

    return map_photon(s, photon, retard)


def kerr_tag(s: StateVector, watched_path: PathLabel, probe: int, sign: int) -> StateVector:
    """
    Cross-Kerr phase tagger on one spatial mode

    Args:
        s: Input state
        watched_path: Mode coupled to the probe
        probe: Probe beam (1 or 2)
        sign: +1 or -1, the sign of θ on this mode

    Returns:
        State whose probe counter moved by sign × (photons on the mode)
    """

    def tag(basis: CompositeBasis) -> list[tuple[complex, CompositeBasis]]:
        count = sum(1 for p in basis.photons if p.path == watched_path)
        probes = basis.probes.shifted(probe, sign * count)
        if abs(probes.get(probe)) > MAX_PROBE_COUNTER:
            raise CounterOverflowError(f"Probe {probe} counter reached {probes.get(probe)}")
        return [(1, basis.with_probes(probes))]

    return apply_label_map(s, tag)


def homodyne(
    s: StateVector,
    probe: int,
    choice: BranchChoice,
    readout_phase: float = 0.0,
    feed_forward: bool = True,
) -> list[Branch[HomodyneOutcome]]:
    """
    X-quadrature readout of a probe, resolving |k| but not its sign

    The readout leaves e^{i·sgn(k)·readout_phase} on the k = ±2 terms; the
    feed-forward multiplies the k = -2 terms by e^{2i·readout_phase} so the
    photonic state comes back up to a global phase. The probe counter is reset
    to 0 afterwards.

    Args:
        s: State with probe counters in {-2, 0, +2}
        probe: Probe beam (1 or 2)
        choice: Exhaustive or seeded sampling
        readout_phase: Outcome-dependent phase left by the readout
        feed_forward: Apply the classical phase correction

    Returns:
        Branches labelled ZERO or TWO
    """
    for basis in s:
        if basis.probes.get(probe) not in (-MAX_PROBE_COUNTER, 0, MAX_PROBE_COUNTER):
            k = basis.probes.get(probe)
            raise UnexpectedCounterError(f"Probe {probe} counter {k} on {basis}")

    def magnitude(basis: CompositeBasis) -> HomodyneOutcome:
        return HomodyneOutcome.TWO if basis.probes.get(probe) else HomodyneOutcome.ZERO

    def settle(basis: CompositeBasis) -> list[tuple[complex, CompositeBasis]]:
        k = basis.probes.get(probe)
        phase = cmath.exp(1j * math.copysign(readout_phase, k)) if k else 1
        if feed_forward and k < 0:
            phase *= cmath.exp(2j * readout_phase)
        return [(phase, basis.with_probes(basis.probes.reset(probe)))]

    return [
        Branch(b.outcome, b.probability, apply_label_map(b.state, settle))
        for b in measure(s, magnitude, choice)
    ]


def detect_polarization(
    s: StateVector,
    photon: str,
    choice: BranchChoice,
    paths: Collection[PathLabel],
    basis: MeasurementBasis = MeasurementBasis.DIAGONAL,
) -> list[Branch[DetectorPort]]:
    """
    Destructive polarization detection on the detector-facing paths

    A diagonal detector is a HWP followed by a PBS and two detectors: |+⟩
    fires the (path, +) port and |−⟩ the (path, −) port. The detected photon
    is removed from the returned states.

    Args:
        s: Input state
        photon: Photon to detect
        choice: Exhaustive or seeded sampling
        paths: Paths that face detectors
        basis: Diagonal or rectilinear (H ↦ +, V ↦ −)

    Returns:
        Branches labelled by the fired port
    """
    labels = s.photon_labels(photon)
    slots = {p.slot for p in labels}
    if len(slots) != 1:
        raise IndefiniteSlotError(f"Photon {photon} reaches the detectors in slots {sorted(slots)}")
    stray = {p.path for p in labels} - set(paths)
    if stray:
        raise WiringError(f"Photon {photon} on {sorted(stray)}, which face no detector")

    if basis is MeasurementBasis.DIAGONAL:
        s = hwp(s, photon)
    i = s.index(photon)

    def port(b: CompositeBasis) -> DetectorPort:
        p = b.photons[i]
        return DetectorPort(p.path, Sign.PLUS if p.pol is Polarization.H else Sign.MINUS)

    return [
        Branch(b.outcome, b.probability, remove_photon(b.state, photon))
        for b in measure(s, port, choice)
    ]
