"""
Unit tests for the single-photon Bell-state analyzer
"""

import math

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from errors import IndefiniteSlotError, WiringError
from optics import DetectorPort, Sign, detect_polarization
from spbsa import (
    DETECTOR_PATHS,
    SingleBell,
    SpbsaLayout,
    analyze_photon,
    derive_detector_map,
    prepare_single_bell,
    spbsa_chain,
)
from statevec import (
    SLOT_L,
    SLOT_S,
    BranchChoice,
    CompositeBasis,
    PathLabel,
    PhotonBasis,
    Polarization,
    StateVector,
    inner,
)

H, V = Polarization.H, Polarization.V

components = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


def horizontal_early(path):
    return StateVector(("A",), {CompositeBasis((PhotonBasis(H, SLOT_S, path),)): 1.0})


@pytest.fixture(autouse=True)
def fresh_detector_map():
    derive_detector_map.cache_clear()
    yield
    derive_detector_map.cache_clear()


@pytest.mark.parametrize("bell", list(SingleBell), ids=str)
def test_each_bell_state_fires_one_detector(bell):
    """Test that every single-photon Bell state reaches one port with probability 1"""
    s = spbsa_chain(prepare_single_bell(bell), "A")

    assert {p.slot for p in s.photon_labels("A")} == {SLOT_L}
    (branch,) = detect_polarization(s, "A", BranchChoice.exhaustive(), DETECTOR_PATHS)
    assert branch.probability == pytest.approx(1.0, abs=1e-9)


def test_default_detector_map():
    """Test the port assignment of the default layout"""
    detector_map = derive_detector_map()
    assert [(name, str(port), str(bell)) for name, port, bell in detector_map.rows()] == [
        ("D1", "ARM_H+", "psi+"),
        ("D2", "ARM_H-", "psi-"),
        ("D3", "ARM_V+", "phi+"),
        ("D4", "ARM_V-", "phi-"),
    ]


def test_swapped_cells_layout_is_a_bijection():
    """Test that firing PC_S first moves the ψ pair to the other arm"""
    detector_map = derive_detector_map(SpbsaLayout.swapped_cells())
    assert {bell for _, bell in detector_map.mapping} == set(SingleBell)
    assert detector_map.decode(DetectorPort(PathLabel.ARM_V, Sign.PLUS)) is SingleBell.PSI_PLUS


def test_inconsistent_layout_leaves_split_time_bins():
    """Test that sending the late component down a long arm is caught"""
    layout = SpbsaLayout(arm_h_long=Polarization.H)
    with pytest.raises(IndefiniteSlotError):
        derive_detector_map(layout)


def test_photon_must_enter_on_an_input_port():
    """Test that a photon already inside the analyzer is a wiring error"""
    s = prepare_single_bell(SingleBell.PHI_PLUS, path=PathLabel.ARM_H)
    with pytest.raises(WiringError):
        spbsa_chain(s, "A")


def test_analyze_photon_decodes_bell_states():
    """Test that analyze_photon returns the prepared Bell state"""
    for bell in SingleBell:
        (branch,) = analyze_photon(prepare_single_bell(bell), "A", BranchChoice.exhaustive())
        assert branch.outcome is bell
        assert branch.state.names == ()


def test_analyze_photon_on_a_product_state():
    """Test that |H S⟩ = (ψ+ + ψ−)/√2 gives the two ψ outcomes with equal weight"""
    hs = horizontal_early(PathLabel.PORT_A)
    branches = analyze_photon(hs, "A", BranchChoice.exhaustive())

    assert {b.outcome for b in branches} == {SingleBell.PSI_PLUS, SingleBell.PSI_MINUS}
    assert [b.probability for b in branches] == pytest.approx([0.5, 0.5])


def test_analyze_photon_sampling_picks_one_branch():
    """Test that sampling keeps exactly one outcome"""
    hs = horizontal_early(PathLabel.PORT_B)
    branches = analyze_photon(hs, "A", BranchChoice.sampling(11))
    assert len(branches) == 1


@settings(
    max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
@given(st.lists(components, min_size=8, max_size=8))
def test_outcome_probabilities_are_bell_overlaps(parts):
    """Test that each outcome probability is the squared overlap with its Bell state"""
    amplitudes = [complex(re, im) for re, im in zip(parts[:4], parts[4:], strict=True)]
    norm = math.sqrt(sum(abs(a) ** 2 for a in amplitudes))
    assume(norm > 1e-3)
    labels = [(H, SLOT_S), (H, SLOT_L), (V, SLOT_S), (V, SLOT_L)]
    terms = {
        CompositeBasis((PhotonBasis(pol, slot, PathLabel.PORT_A),)): a / norm
        for (pol, slot), a in zip(labels, amplitudes, strict=True)
    }
    s = StateVector(("A",), terms)

    branches = analyze_photon(s, "A", BranchChoice.exhaustive())
    probabilities = {b.outcome: b.probability for b in branches}
    for bell in SingleBell:
        expected = abs(inner(prepare_single_bell(bell), s)) ** 2
        assert probabilities.get(bell, 0.0) == pytest.approx(expected, abs=1e-9)
