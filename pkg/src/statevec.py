"""
Sparse state vectors over labelled photonic and probe basis states

A basis label fixes, for every photon, its polarization, time slot and spatial
path, plus the integer phase counters of the two coherent probe beams. A state
maps basis labels to complex amplitudes; every operation returns a new state.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from collections.abc import Callable, Hashable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from enum import IntEnum, StrEnum
from functools import cached_property
from types import MappingProxyType
from typing import Generic, TypeVar

import numpy as np

from errors import (
    IndefiniteLabelError,
    NonUnitaryError,
    NormalizationError,
    PhotonMismatchError,
    ZeroStateError,
)
from utils import SplitMix64

PRUNE_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-9

T = TypeVar("T", bound=Hashable)


class Polarization(IntEnum):
    H = 0
    V = 1

    def __str__(self) -> str:
        return self.name


# Time slots are plain integers in units of one time-bin interval
TimeSlot = int
SLOT_S: TimeSlot = 0
SLOT_L: TimeSlot = 1


class PathLabel(IntEnum):
    """Spatial modes of the circuit, in canonical order"""

    PORT_A = 0
    PORT_B = 1
    UPPER = 2  # QND arms, shared by both photons
    LOWER = 3
    ARM_H = 4  # single-photon analyzer arms after the family PBS
    ARM_V = 5
    SHORT_H = 6
    LONG_H = 7
    SHORT_V = 8
    LONG_V = 9
    REMOTE = 10  # photons that never enter the analyzer

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class PhotonBasis:
    pol: Polarization
    slot: TimeSlot
    path: PathLabel

    # hot path: plain constructors instead of dataclasses.replace
    def with_pol(self, pol: Polarization) -> PhotonBasis:
        return PhotonBasis(pol, self.slot, self.path)

    def with_slot(self, slot: TimeSlot) -> PhotonBasis:
        return PhotonBasis(self.pol, slot, self.path)

    def with_path(self, path: PathLabel) -> PhotonBasis:
        return PhotonBasis(self.pol, self.slot, path)

    def __str__(self) -> str:
        return f"{self.pol} {self.slot} {self.path}"


@dataclass(frozen=True, order=True)
class ProbeCounters:
    k1: int = 0
    k2: int = 0

    def get(self, probe: int) -> int:
        return self.k1 if probe == 1 else self.k2

    def shifted(self, probe: int, delta: int) -> ProbeCounters:
        if probe == 1:
            return ProbeCounters(self.k1 + delta, self.k2)
        return ProbeCounters(self.k1, self.k2 + delta)

    def reset(self, probe: int) -> ProbeCounters:
        return ProbeCounters(0, self.k2) if probe == 1 else ProbeCounters(self.k1, 0)

    def __add__(self, other: ProbeCounters) -> ProbeCounters:
        return ProbeCounters(self.k1 + other.k1, self.k2 + other.k2)


@dataclass(frozen=True, order=True)
class CompositeBasis:
    photons: tuple[PhotonBasis, ...]
    probes: ProbeCounters = field(default_factory=ProbeCounters)

    def with_photon(self, index: int, photon: PhotonBasis) -> CompositeBasis:
        photons = self.photons[:index] + (photon,) + self.photons[index + 1 :]
        return CompositeBasis(photons, self.probes)

    def without_photon(self, index: int) -> CompositeBasis:
        return CompositeBasis(self.photons[:index] + self.photons[index + 1 :], self.probes)

    def with_probes(self, probes: ProbeCounters) -> CompositeBasis:
        return CompositeBasis(self.photons, probes)

    @cached_property
    def key(self) -> tuple:
        """Plain-integer form of the label, ordered like the dataclass fields"""
        photons = tuple((int(p.pol), p.slot, int(p.path)) for p in self.photons)
        return photons, self.probes.k1, self.probes.k2

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        labels = " ; ".join(str(p) for p in self.photons)
        return f"|{labels} ; {self.probes.k1} {self.probes.k2}⟩"


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Immutable sparse state.

    Terms are pruned below `tolerance` and stored in canonical basis order, so
    iteration and serialization are deterministic.
    """

    names: tuple[str, ...]
    terms: Mapping[CompositeBasis, complex]
    tolerance: float = PRUNE_TOLERANCE

    def __post_init__(self):
        kept = {}
        for basis, amplitude in sorted(self.terms.items(), key=lambda term: term[0].key):
            amplitude = complex(amplitude)
            if not (math.isfinite(amplitude.real) and math.isfinite(amplitude.imag)):
                raise ValueError(f"Non-finite amplitude on {basis}")
            if len(basis.photons) != len(self.names):
                raise PhotonMismatchError(
                    f"Basis {basis} does not match photons {', '.join(self.names)}"
                )
            if abs(amplitude) >= self.tolerance:
                kept[basis] = amplitude
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "terms", MappingProxyType(kept))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[CompositeBasis]:
        return iter(self.terms)

    def items(self) -> Iterable[tuple[CompositeBasis, complex]]:
        return self.terms.items()

    def amplitude(self, basis: CompositeBasis) -> complex:
        return self.terms.get(basis, 0j)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise PhotonMismatchError(f"No photon named {name!r} in {self.names}") from None

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def scaled(self, factor: complex) -> StateVector:
        return StateVector(self.names, {b: a * factor for b, a in self.items()}, self.tolerance)

    def photon_labels(self, name: str) -> set[PhotonBasis]:
        """Distinct labels of one photon across the support"""
        i = self.index(name)
        return {basis.photons[i] for basis in self.terms}

    def serialize(self) -> str:
        """Canonical text form, one line per term"""
        lines = []
        for basis, amplitude in self.items():
            # adding 0.0 turns -0.0 into 0.0
            re, im = amplitude.real + 0.0, amplitude.imag + 0.0
            lines.append(f"{re:+.12g}{im:+.12g}i {basis}")
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.serialize()


@dataclass(frozen=True)
class Branch(Generic[T]):
    """One measurement outcome with its probability and collapsed state"""

    outcome: T
    probability: float
    state: StateVector


class BranchMode(StrEnum):
    SAMPLING = "sampling"
    EXHAUSTIVE = "exhaustive"


@dataclass
class BranchChoice:
    """
    How measurements resolve their outcomes.

    Exhaustive keeps every branch; sampling draws one branch from the seeded
    generator, which is confined to a single trial.
    """

    mode: BranchMode = BranchMode.EXHAUSTIVE
    rng: SplitMix64 | None = None

    @classmethod
    def exhaustive(cls) -> BranchChoice:
        return cls(BranchMode.EXHAUSTIVE)

    @classmethod
    def sampling(cls, seed: int) -> BranchChoice:
        return cls(BranchMode.SAMPLING, SplitMix64(seed))

    @property
    def is_exhaustive(self) -> bool:
        return self.mode is BranchMode.EXHAUSTIVE

    def select(self, branches: list[Branch[T]]) -> list[Branch[T]]:
        if self.is_exhaustive or len(branches) <= 1:
            return branches
        if self.rng is None:
            raise ValueError("Sampling mode needs a seeded generator")
        u = self.rng.random()
        cumulative = 0.0
        for branch in branches:
            cumulative += branch.probability
            if u < cumulative:
                return [branch]
        return [branches[-1]]


LabelMap = Callable[[CompositeBasis], Iterable[tuple[complex, CompositeBasis]]]
PhotonMap = Callable[[PhotonBasis], Iterable[tuple[complex, PhotonBasis]]]


def make_basis_state(basis: CompositeBasis, names: Sequence[str] = ("A", "B")) -> StateVector:
    """
    Single basis state with amplitude 1

    Args:
        basis: Composite label
        names: Photon names, one per photon in the label

    Returns:
        Normalized state with exactly one term
    """
    return StateVector(tuple(names), {basis: 1.0 + 0j})


def superpose(
    pairs: Sequence[tuple[complex, StateVector]], renormalize: bool = False
) -> StateVector:
    """
    Linear combination of states over the same photons

    Args:
        pairs: (coefficient, state) pairs, at least one
        renormalize: Rescale the result to unit norm instead of checking it

    Returns:
        The combined state, pruned below tolerance
    """
    if not pairs:
        raise ValueError("superpose needs at least one (amplitude, state) pair")
    names = pairs[0][1].names
    tolerance = pairs[0][1].tolerance
    combined: dict[CompositeBasis, complex] = defaultdict(complex)
    for coefficient, state in pairs:
        if state.names != names:
            raise PhotonMismatchError(f"Cannot superpose {state.names} with {names}")
        for basis, amplitude in state.items():
            combined[basis] += coefficient * amplitude

    result = StateVector(names, combined, tolerance)
    if not len(result):
        raise ZeroStateError("All amplitudes cancelled")
    norm = result.norm()
    if renormalize:
        return result.scaled(1.0 / norm)
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"Superposition has norm {norm:.12g}, expected 1")
    return result


def inner(a: StateVector, b: StateVector) -> complex:
    """⟨a|b⟩, conjugate-linear in the first argument"""
    if a.names != b.names:
        raise PhotonMismatchError(f"Inner product of states over {a.names} and {b.names}")
    if len(a) > len(b):
        return sum((a.amplitude(k).conjugate() * v for k, v in b.items()), 0j)
    return sum((v.conjugate() * b.amplitude(k) for k, v in a.items()), 0j)


def apply_label_map(s: StateVector, f: LabelMap) -> StateVector:
    """
    Expand every term through a label map and merge like terms

    Args:
        s: Input state
        f: Map from one basis label to (amplitude, label) pairs

    Returns:
        The mapped state; raises NonUnitaryError if the norm changed
    """
    out: dict[CompositeBasis, complex] = defaultdict(complex)
    for basis, amplitude in s.items():
        for coefficient, image in f(basis):
            out[image] += amplitude * coefficient

    result = StateVector(s.names, out, s.tolerance)
    if abs(result.norm() - s.norm()) > NORM_TOLERANCE:
        raise NonUnitaryError(
            f"Label map changed the norm from {s.norm():.12g} to {result.norm():.12g}"
        )
    return result


def map_photon(s: StateVector, name: str, f: PhotonMap) -> StateVector:
    """Apply a single-photon label map to the named photon of every term"""
    i = s.index(name)

    def lifted(basis: CompositeBasis) -> list[tuple[complex, CompositeBasis]]:
        return [(c, basis.with_photon(i, p)) for c, p in f(basis.photons[i])]

    return apply_label_map(s, lifted)


def measure(
    s: StateVector, partition: Callable[[CompositeBasis], T], choice: BranchChoice
) -> list[Branch[T]]:
    """
    Projective measurement over a labelled partition of the basis

    Args:
        s: State to measure
        partition: Outcome label of each basis state
        choice: Exhaustive or seeded sampling

    Returns:
        Branches in order of first appearance in the canonical term order
    """
    groups: dict[T, dict[CompositeBasis, complex]] = {}
    for basis, amplitude in s.items():
        groups.setdefault(partition(basis), {})[basis] = amplitude

    total_norm = s.norm() ** 2
    branches = []
    for outcome, terms in groups.items():
        weight = sum(abs(a) ** 2 for a in terms.values())
        scale = 1.0 / math.sqrt(weight)
        collapsed = StateVector(s.names, {b: a * scale for b, a in terms.items()}, s.tolerance)
        branches.append(Branch(outcome, weight / total_norm, collapsed))

    if abs(sum(b.probability for b in branches) - 1.0) > NORM_TOLERANCE:
        raise NormalizationError("Measurement probabilities do not sum to 1")
    return choice.select(branches)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Product state over the disjoint photon sets of a and b"""
    if set(a.names) & set(b.names):
        raise PhotonMismatchError(f"Photon names overlap: {a.names} and {b.names}")
    terms = {
        CompositeBasis(x.photons + y.photons, x.probes + y.probes): u * v
        for (x, u), (y, v) in itertools.product(a.items(), b.items())
    }
    return StateVector(a.names + b.names, terms, a.tolerance)


def remove_photon(s: StateVector, name: str) -> StateVector:
    """
    Drop a photon whose labels are identical in every term

    Args:
        s: State after a projective detection of the photon
        name: Photon to remove

    Returns:
        State of the remaining photons
    """
    labels = s.photon_labels(name)
    if len(labels) != 1:
        raise IndefiniteLabelError(f"Photon {name} has {len(labels)} distinct labels")
    i = s.index(name)
    names = s.names[:i] + s.names[i + 1 :]
    return StateVector(names, {b.without_photon(i): a for b, a in s.items()}, s.tolerance)


def timebin_density_matrix(
    s: StateVector, photons: Sequence[str], slots: Sequence[TimeSlot] = (SLOT_S, SLOT_L)
) -> np.ndarray:
    """
    Reduced density matrix of the time slots of the named photons

    Everything else (polarizations, paths, other photons, probes) is traced
    out. Rows and columns run over `slots` ** len(photons) in product order.
    """
    indices = [s.index(n) for n in photons]
    position = {key: i for i, key in enumerate(itertools.product(slots, repeat=len(photons)))}
    environments: dict[tuple, np.ndarray] = {}

    for basis, amplitude in s.items():
        kept = tuple(basis.photons[i].slot for i in indices)
        if kept not in position:
            raise ValueError(f"Slot pattern {kept} outside {tuple(slots)}")
        environment = (
            tuple(
                (p.pol, p.path) if i in indices else (p.pol, p.slot, p.path)
                for i, p in enumerate(basis.photons)
            ),
            basis.probes,
        )
        vector = environments.setdefault(environment, np.zeros(len(position), dtype=complex))
        vector[position[kept]] += amplitude

    rho = np.zeros((len(position), len(position)), dtype=complex)
    for vector in environments.values():
        rho += np.outer(vector, vector.conj())
    return rho


def overlap_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Tr(ρσ); the fidelity whenever one of the two states is pure"""
    return float(np.real(np.trace(rho @ sigma)))
