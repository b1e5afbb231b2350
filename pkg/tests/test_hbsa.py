"""
Unit tests for the complete hyperentangled Bell-state analysis
"""

import dataclasses

import pytest

import hbsa
from errors import AmbiguousResidualError, InconsistentBranchError, TableMismatchError
from hbsa import (
    TABLE_II,
    BellLabelT,
    HyperBellLabel,
    analyze_hyper_bell,
    classify,
    decode,
    derive_table2,
    identify_hyper_bell,
    measure_hyper_bell,
    prepare_hyper_bell,
    table2_lookup,
    verify_table1,
    verify_table2,
)
from optics import HomodyneOutcome, hwp
from qnd import BellLabelP
from spbsa import SingleBell, prepare_single_bell
from statevec import BranchChoice, PathLabel, inner, tensor

ALL_LABELS = HyperBellLabel.all()


def test_label_parse_and_format():
    """Test the label grammar"""
    label = HyperBellLabel.parse("PhiP-  PsiT+")
    assert label == HyperBellLabel(BellLabelP.PHI_MINUS, BellLabelT.PSI_PLUS)
    assert str(label) == "PhiP- PsiT+"


@pytest.mark.parametrize("text", ["PhiP+", "PhiT+ PhiP+", "PhiX+ PhiT+", "PhiP+ PhiT+ PhiT+", ""])
def test_malformed_labels(text):
    """Test that malformed labels raise ValueError"""
    with pytest.raises(ValueError):
        HyperBellLabel.parse(text)


def test_all_labels():
    """Test that there are 16 distinct labels in polarization-major order"""
    assert len(set(ALL_LABELS)) == 16
    assert str(ALL_LABELS[0]) == "PhiP+ PhiT+"
    assert str(ALL_LABELS[5]) == "PhiP- PhiT-"


@pytest.mark.parametrize("label", ALL_LABELS, ids=str)
def test_prepared_states_are_orthonormal(label):
    """Test amplitudes ±1/2 and orthogonality to every other label"""
    s = prepare_hyper_bell(label)
    assert len(s) == 4
    assert all(abs(abs(a) - 0.5) < 1e-12 for _, a in s.items())
    for other in ALL_LABELS:
        expected = 1.0 if other == label else 0.0
        assert abs(inner(prepare_hyper_bell(other), s)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("label", ALL_LABELS, ids=str)
def test_classify_every_label_on_every_branch(label):
    """Test complete discrimination: every branch decodes to the prepared label"""
    result = classify(prepare_hyper_bell(label), BranchChoice.exhaustive())

    assert result.label == label
    assert len(result.branches) == 4
    assert all(decode(b.outcome) == label for b in result.branches)
    assert sum(b.probability for b in result.branches) == pytest.approx(1.0, abs=1e-9)
    assert all(b.probability == pytest.approx(0.25, abs=1e-9) for b in result.branches)


def test_phi_minus_phi_minus_worked_example():
    """Test the (Φ−P, Φ−T) example: shifts (0, ±2θ), new state Ψ+P, group 4 detections"""
    label = HyperBellLabel(BellLabelP.PHI_MINUS, BellLabelT.PHI_MINUS)
    result = classify(prepare_hyper_bell(label), BranchChoice.exhaustive())

    group4 = next(g for g in TABLE_II if g.group_id == 4)
    for branch in result.branches:
        record = branch.outcome
        assert record.step1.shift1 is HomodyneOutcome.ZERO
        assert record.step1.shift2 is HomodyneOutcome.TWO
        assert record.step1.relabeled is BellLabelP.PSI_PLUS
        assert (record.det_a, record.det_b) in group4.detections
    assert result.label == label


def test_classify_with_sampling():
    """Test that sampling returns one branch and the same label"""
    label = HyperBellLabel(BellLabelP.PSI_MINUS, BellLabelT.PSI_PLUS)
    result = classify(prepare_hyper_bell(label), BranchChoice.sampling(42))
    assert len(result.branches) == 1
    assert result.label == label


def test_classify_rejects_non_bell_input():
    """Test that a state outside the 16 is rejected"""
    s = hwp(prepare_hyper_bell(ALL_LABELS[0]), "A")
    with pytest.raises(InconsistentBranchError):
        classify(s, BranchChoice.exhaustive())


def test_measure_hyper_bell_on_non_bell_input():
    """Test that the raw measurement spreads a non-Bell input over several labels"""
    s = hwp(prepare_hyper_bell(ALL_LABELS[0]), "A")
    leaves = measure_hyper_bell(s, BranchChoice.exhaustive())

    assert len({decode(leaf.outcome) for leaf in leaves}) > 1
    assert sum(leaf.probability for leaf in leaves) == pytest.approx(1.0, abs=1e-9)


def test_table2_lookup():
    """Test the in-group lookup of the time-bin state"""
    assert table2_lookup(BellLabelP.PSI_PLUS, SingleBell.PSI_MINUS, SingleBell.PHI_PLUS) is (
        BellLabelT.PHI_MINUS
    )
    assert table2_lookup(BellLabelP.PHI_PLUS, SingleBell.PHI_PLUS, SingleBell.PSI_MINUS) is (
        BellLabelT.PSI_MINUS
    )
    assert table2_lookup(BellLabelP.PHI_PLUS, SingleBell.PSI_MINUS, SingleBell.PSI_MINUS) is (
        BellLabelT.PHI_PLUS
    )


def test_tables_reproduce():
    """Test that both tables are reproduced by simulation"""
    assert len(verify_table1()) == 4
    groups = verify_table2()
    assert [g.group_id for g in groups] == [1, 2, 3, 4]
    assert all(len(g.detections) == 4 for g in groups)


def test_derived_groups_partition_the_products():
    """Test that the 16 products fall into four groups of four"""
    groups = derive_table2()
    assert len(groups) == 4
    members = [m for g in groups for m in g.members]
    assert len(set(members)) == 16


def test_corrupted_table2_is_detected(monkeypatch):
    """Test that a wrong transcription fails verification"""
    first, second, *rest = TABLE_II
    corrupted = (
        dataclasses.replace(first, detections=second.detections),
        dataclasses.replace(second, detections=first.detections),
        *rest,
    )
    monkeypatch.setattr(hbsa, "TABLE_II", corrupted)
    with pytest.raises(TableMismatchError):
        verify_table2()


def test_identify_hyper_bell():
    """Test identification by overlap, and the ambiguous case"""
    label = HyperBellLabel(BellLabelP.PSI_PLUS, BellLabelT.PHI_MINUS)
    paths = (PathLabel.REMOTE, PathLabel.REMOTE)
    s = prepare_hyper_bell(label, ("A", "B"), paths).scaled(-1j)
    assert identify_hyper_bell(s, ("A", "B"), paths) == label

    with pytest.raises(AmbiguousResidualError):
        identify_hyper_bell(hwp(prepare_hyper_bell(label), "A"))


def test_analyze_hyper_bell_merges_records_per_label():
    """Test one branch per label for a superposition of two hyperentangled Bell states"""
    # (Φ−P + Ψ+P)/√2 ⊗ Φ+T
    s = hwp(prepare_hyper_bell(ALL_LABELS[0]), "A")
    branches = analyze_hyper_bell(s, BranchChoice.exhaustive())

    assert {b.outcome for b in branches} == {
        HyperBellLabel(BellLabelP.PHI_MINUS, BellLabelT.PHI_PLUS),
        HyperBellLabel(BellLabelP.PSI_PLUS, BellLabelT.PHI_PLUS),
    }
    assert [b.probability for b in branches] == pytest.approx([0.5, 0.5])


def test_analyze_hyper_bell_on_a_product_pair():
    """Test that photon X and half of a (Φ+P, Φ+T) pair yield 16 labels at 1/16 each"""
    x = prepare_single_bell(SingleBell.PSI_PLUS, "X", PathLabel.PORT_A)
    pair = prepare_hyper_bell(ALL_LABELS[0], ("A", "B"), (PathLabel.PORT_B, PathLabel.REMOTE))
    branches = analyze_hyper_bell(tensor(x, pair), BranchChoice.exhaustive(), ("X", "A"))

    assert {b.outcome for b in branches} == set(ALL_LABELS)
    assert all(b.probability == pytest.approx(1 / 16, abs=1e-9) for b in branches)
    assert all(b.state.names == ("B",) for b in branches)

    (sampled,) = analyze_hyper_bell(tensor(x, pair), BranchChoice.sampling(3), ("X", "A"))
    assert sampled.probability == pytest.approx(1 / 16, abs=1e-9)
