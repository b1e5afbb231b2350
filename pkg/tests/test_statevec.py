"""
Unit tests for the sparse state vector
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from errors import (
    IndefiniteLabelError,
    NonUnitaryError,
    NormalizationError,
    PhotonMismatchError,
    ZeroStateError,
)
from statevec import (
    PRUNE_TOLERANCE,
    SLOT_L,
    SLOT_S,
    BranchChoice,
    CompositeBasis,
    PathLabel,
    PhotonBasis,
    Polarization,
    ProbeCounters,
    StateVector,
    apply_label_map,
    inner,
    make_basis_state,
    measure,
    overlap_fidelity,
    remove_photon,
    superpose,
    tensor,
    timebin_density_matrix,
)

H, V = Polarization.H, Polarization.V
A, B = PathLabel.PORT_A, PathLabel.PORT_B


def basis(pol_a, slot_a, pol_b, slot_b, probes=ProbeCounters()):
    return CompositeBasis((PhotonBasis(pol_a, slot_a, A), PhotonBasis(pol_b, slot_b, B)), probes)


@pytest.fixture
def phi_plus_timebin():
    """|H S, H S⟩ + |H L, H L⟩"""
    r = 1 / math.sqrt(2)
    return StateVector(("A", "B"), {basis(H, SLOT_S, H, SLOT_S): r, basis(H, SLOT_L, H, SLOT_L): r})


amplitudes = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def test_terms_are_pruned_and_ordered():
    """Test that tiny amplitudes are dropped and terms are stored in canonical order"""
    terms = {
        basis(V, SLOT_L, V, SLOT_L): 1.0,
        basis(H, SLOT_S, H, SLOT_S): 1e-15,
        basis(H, SLOT_L, V, SLOT_S): 0.0,
    }
    s = StateVector(("A", "B"), terms)
    assert len(s) == 1
    assert list(s) == [basis(V, SLOT_L, V, SLOT_L)]


@settings(max_examples=50)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(list(Polarization)),
            st.sampled_from([SLOT_S, SLOT_L]),
            st.sampled_from(list(Polarization)),
            st.integers(min_value=-1, max_value=2),
            st.integers(min_value=-2, max_value=2),
        ),
        min_size=2,
        max_size=8,
    )
)
def test_basis_key_matches_field_order(labels):
    """Test that the integer key sorts and hashes like the basis labels themselves"""
    bases = [basis(pa, sa, pb, sb, ProbeCounters(k, 0)) for pa, sa, pb, sb, k in labels]
    assert sorted(bases) == sorted(bases, key=lambda b: b.key)
    for x in bases:
        for y in bases:
            assert (x == y) == (x.key == y.key)
    assert len(set(bases)) == len({b.key for b in bases})


def test_photon_count_must_match_names():
    """Test that a basis label with the wrong number of photons is rejected"""
    with pytest.raises(PhotonMismatchError):
        StateVector(("A",), {basis(H, SLOT_S, H, SLOT_S): 1.0})


def test_non_finite_amplitude_rejected():
    """Test that NaN amplitudes are rejected"""
    with pytest.raises(ValueError):
        StateVector(("A", "B"), {basis(H, SLOT_S, H, SLOT_S): float("nan")})


def test_serialize_is_canonical(phi_plus_timebin):
    """Test the canonical text form"""
    expected = (
        "+0.707106781187+0i |H 0 PORT_A ; H 0 PORT_B ; 0 0⟩\n"
        "+0.707106781187+0i |H 1 PORT_A ; H 1 PORT_B ; 0 0⟩"
    )
    assert phi_plus_timebin.serialize() == expected


def test_superpose_checks_norm():
    """Test that superpose refuses unnormalized results unless asked to renormalize"""
    hh = make_basis_state(basis(H, SLOT_S, H, SLOT_S))
    vv = make_basis_state(basis(V, SLOT_S, V, SLOT_S))

    with pytest.raises(NormalizationError):
        superpose([(1.0, hh), (1.0, vv)])

    s = superpose([(1.0, hh), (1.0, vv)], renormalize=True)
    assert math.isclose(s.norm(), 1.0)


def test_superpose_zero_state():
    """Test that complete cancellation is an error"""
    hh = make_basis_state(basis(H, SLOT_S, H, SLOT_S))
    with pytest.raises(ZeroStateError):
        superpose([(1.0, hh), (-1.0, hh)])
    with pytest.raises(ValueError):
        superpose([])


def test_inner_product(phi_plus_timebin):
    """Test inner products and photon-set checks"""
    assert math.isclose(abs(inner(phi_plus_timebin, phi_plus_timebin)), 1.0)
    other = make_basis_state(basis(V, SLOT_S, V, SLOT_S))
    assert inner(phi_plus_timebin, other) == 0

    with pytest.raises(PhotonMismatchError):
        inner(phi_plus_timebin, make_basis_state(basis(H, SLOT_S, H, SLOT_S), ("X", "Y")))


def test_label_map_must_preserve_norm(phi_plus_timebin):
    """Test that a non-unitary label map raises"""
    with pytest.raises(NonUnitaryError):
        apply_label_map(phi_plus_timebin, lambda b: [(2.0, b)])


@settings(max_examples=50)
@given(amplitudes, amplitudes, amplitudes)
def test_permutation_preserves_norm(x, y, z):
    """Test that a basis permutation keeps the norm of arbitrary states"""
    terms = {basis(H, SLOT_S, H, SLOT_S): x, basis(V, SLOT_S, H, SLOT_L): y}
    terms[basis(V, SLOT_L, V, SLOT_L)] = z
    s = StateVector(("A", "B"), terms)

    def swap_polarizations(b):
        photons = tuple(PhotonBasis(Polarization(1 - p.pol), p.slot, p.path) for p in b.photons)
        return [(1, CompositeBasis(photons, b.probes))]

    mapped = apply_label_map(s, swap_polarizations)
    assert math.isclose(mapped.norm(), s.norm(), rel_tol=1e-9, abs_tol=1e-9)


unit_amplitudes = st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False)


def hadamard_on_first(b):
    r = 1 / math.sqrt(2)
    p = b.photons[0]
    sign = 1 if p.pol is H else -1
    return [
        (r, b.with_photon(0, PhotonBasis(H, p.slot, p.path))),
        (sign * r, b.with_photon(0, PhotonBasis(V, p.slot, p.path))),
    ]


@settings(max_examples=50)
@given(
    unit_amplitudes,
    unit_amplitudes,
    st.lists(unit_amplitudes, min_size=3, max_size=3),
    st.lists(unit_amplitudes, min_size=3, max_size=3),
)
def test_label_map_is_linear(alpha, beta, xs, ys):
    """Test f(αs + βt) = αf(s) + βf(t) for a branching label map"""
    keys = [basis(H, SLOT_S, H, SLOT_S), basis(V, SLOT_S, H, SLOT_L), basis(V, SLOT_L, V, SLOT_L)]
    s = StateVector(("A", "B"), dict(zip(keys, xs, strict=True)))
    t = StateVector(("A", "B"), dict(zip(keys, ys, strict=True)))
    combined = StateVector(
        ("A", "B"), {k: alpha * s.amplitude(k) + beta * t.amplitude(k) for k in keys}
    )

    mapped = apply_label_map(combined, hadamard_on_first)
    mapped_s = apply_label_map(s, hadamard_on_first)
    mapped_t = apply_label_map(t, hadamard_on_first)
    for k in set(mapped) | set(mapped_s) | set(mapped_t):
        expected = alpha * mapped_s.amplitude(k) + beta * mapped_t.amplitude(k)
        # terms below the pruning threshold may be dropped on either side
        assert abs(mapped.amplitude(k) - expected) <= 4 * PRUNE_TOLERANCE


@settings(max_examples=50)
@given(st.lists(amplitudes, min_size=4, max_size=4))
def test_measure_branches_are_orthogonal(xs):
    """Test that exhaustive branches are normalized and mutually orthogonal"""
    keys = [
        basis(H, SLOT_S, H, SLOT_S),
        basis(V, SLOT_S, H, SLOT_L),
        basis(H, SLOT_L, V, SLOT_S),
        basis(V, SLOT_L, V, SLOT_L),
    ]
    s = StateVector(("A", "B"), dict(zip(keys, xs, strict=True)))
    assume(s.norm() > 1e-3)

    branches = measure(s, lambda b: b.photons[0].pol, BranchChoice.exhaustive())
    assert sum(b.probability for b in branches) == pytest.approx(1.0)
    for i, first in enumerate(branches):
        assert first.state.norm() == pytest.approx(1.0)
        for second in branches[i + 1 :]:
            assert abs(inner(first.state, second.state)) <= 1e-12


def test_measure_exhaustive(phi_plus_timebin):
    """Test that exhaustive measurement returns every outcome with its probability"""
    branches = measure(phi_plus_timebin, lambda b: b.photons[0].slot, BranchChoice.exhaustive())

    assert [b.outcome for b in branches] == [SLOT_S, SLOT_L]
    assert all(math.isclose(b.probability, 0.5) for b in branches)
    assert all(math.isclose(b.state.norm(), 1.0) for b in branches)


def test_measure_sampling_is_seeded(phi_plus_timebin):
    """Test that sampling keeps one branch and repeats for the same seed"""

    def slot(b):
        return b.photons[0].slot

    first = measure(phi_plus_timebin, slot, BranchChoice.sampling(3))
    second = measure(phi_plus_timebin, slot, BranchChoice.sampling(3))
    assert len(first) == 1
    assert first[0].outcome == second[0].outcome


def test_tensor_and_remove_photon():
    """Test that tensor appends photons and remove_photon drops a definite one"""
    x = StateVector(("X",), {CompositeBasis((PhotonBasis(V, SLOT_L, PathLabel.REMOTE),)): 1.0})
    pair = make_basis_state(basis(H, SLOT_S, V, SLOT_L))
    s = tensor(x, pair)

    assert s.names == ("X", "A", "B")
    assert remove_photon(s, "X").names == ("A", "B")
    with pytest.raises(PhotonMismatchError):
        tensor(pair, pair)


def test_remove_photon_needs_definite_label(phi_plus_timebin):
    """Test that a photon in superposition cannot be removed"""
    with pytest.raises(IndefiniteLabelError):
        remove_photon(phi_plus_timebin, "A")


def test_timebin_density_matrix(phi_plus_timebin):
    """Test the reduced time-bin state of a time-bin Bell pair"""
    rho = timebin_density_matrix(phi_plus_timebin, ("A", "B"))
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 0.5

    np.testing.assert_allclose(rho, expected, atol=1e-12)
    assert math.isclose(overlap_fidelity(rho, rho), 1.0)


def test_timebin_density_matrix_traces_polarization():
    """Test that polarization entanglement leaves a mixed time-bin state"""
    r = 1 / math.sqrt(2)
    s = StateVector(("A", "B"), {basis(H, SLOT_S, H, SLOT_S): r, basis(V, SLOT_L, V, SLOT_L): r})
    rho = timebin_density_matrix(s, ("A", "B"))
    assert math.isclose(overlap_fidelity(rho, rho), 0.5)
