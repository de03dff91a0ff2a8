from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import sqrtm

from kagome_mbqc import gates, ops
from kagome_mbqc.gates import Scheme
from kagome_mbqc.ops import H, X, Z, phase_distance


def _is_clifford(u):
    paulis = [X, Z, X @ Z]
    return all(ops.identify_pauli(u @ p @ u.conj().T) is not None for p in paulis)


def test_sweep_counts_and_matches():
    reports = gates.verification_sweep()
    assert len(reports) == 16 + 2 * 5 * 16 + 64
    assert all(r["matched"] for r in reports)
    assert max(r["byproduct_distance"] for r in reports) < 1e-10


def test_valid_outcome_counts():
    assert len(gates.valid_outcomes(Scheme.decouple())) == 16
    assert len(gates.valid_outcomes(Scheme.entangle())) == 64
    assert not any(o.heralded_invalid for o in gates.valid_outcomes(Scheme.rotate(0.3)))


@pytest.mark.parametrize("scheme", [Scheme.decouple(), Scheme.rotate(0.7), Scheme.rotate(0.7, "right"), Scheme.entangle()])
def test_closed_form_kets_agree_with_pulse_sequence(scheme):
    # two independent routes to the projection ket: algebraic form and pulse composition
    for o in gates.valid_outcomes(scheme):
        a = gates.projection_state(o)
        b = gates.pulse_projection_state(o)
        assert abs(abs(np.vdot(a, b)) - 1) < 1e-10


def test_fluorescence_basis_is_orthonormal():
    for sch in (Scheme.decouple(), Scheme.entangle(), Scheme.rotate(1.1)):
        _, kets = gates.fluorescence_basis(sch)
        assert np.allclose(kets.conj() @ kets.T, np.eye(64), atol=1e-12)


def test_q_sign_tuples_collapse_fourfold():
    reps = {gates.canonical_q_values(o.values) for o in gates.valid_outcomes(Scheme.entangle())}
    assert len(reps) == 16
    for r in reps:
        for tri in (r[:3], r[3:]):
            assert sum(q == 1 for q in tri) <= 1


def test_decouple_example_outcome():
    # both wires carry H; the left pair fired so the right wire picks up X
    o = gates.d_outcome(Scheme.decouple(), 1, 1, 0, 1)
    a = gates.extract_gate(Scheme.decouple(), o).matrix
    assert phase_distance(a, np.kron(H, X @ H)) < 1e-12


def test_heralded_d_outcomes():
    assert gates.d_outcome(Scheme.decouple(), 1, 1, 1, 1).heralded_invalid
    assert gates.d_outcome(Scheme.decouple(), 1, 0, 0, 1).heralded_invalid
    assert gates.d_outcome(Scheme.decouple(), 1, 2, 0, 1).heralded_invalid


def test_rotation_success_flag():
    s = Scheme.rotate(0.5)
    assert gates.d_outcome(s, 1, 0, 1, 1).rotation_succeeded
    assert not gates.d_outcome(s, 1, 1, 0, 1).rotation_succeeded
    assert gates.d_outcome(Scheme.rotate(0.5, "right"), 1, 1, 0, 1).rotation_succeeded


def test_g_identities():
    assert phase_distance(ops.g_phi(0), Z) < 1e-12
    sqrt_x = sqrtm(X)
    assert phase_distance(ops.g_phi(np.pi / 2), Z @ sqrt_x) < 1e-12
    assert phase_distance(ops.g_phi(np.pi), Z @ X) < 1e-12


def test_g_half_pi_is_clifford_and_squares_to_identity():
    g = ops.g_phi(np.pi / 2)
    assert _is_clifford(g)
    assert phase_distance(g @ g, np.eye(2)) < 1e-12


@pytest.mark.parametrize("phi", [np.pi / 4, 1.2345])
def test_non_clifford_witness(phi):
    assert not _is_clifford(ops.g_phi(phi))


def test_g_products_generate_x_rotations():
    a, b = 0.4, 1.5
    assert phase_distance(ops.g_phi(a) @ ops.g_phi(b), ops.rx(b - a)) < 1e-12


def test_q_entangles_product_input():
    m = ops.entangler()
    out = m @ np.array([1, 0, 0, 0], dtype=complex)
    assert ops.entanglement_entropy(out) == pytest.approx(np.log(2))
    # the full ideal map includes the Hadamard dressing, which disentangles |00>
    assert ops.entanglement_entropy(m @ np.kron(H, H) @ [1, 0, 0, 0]) == pytest.approx(0.0, abs=1e-12)


def test_zt_full_tilde_reading_fails_on_half_the_outcomes():
    sch = Scheme.entangle()
    bad = 0
    for o in gates.valid_outcomes(sch):
        a = gates.extract_gate(sch, o).matrix
        c = gates.claimed_circuit(sch, o, "full-tilde").matrix()
        bad += phase_distance(a, c) > 1e-8
    assert bad == 32
    with pytest.raises(ValueError):
        gates.claimed_circuit(sch, o, "other")


def test_describe_mentions_gates():
    o = gates.valid_outcomes(Scheme.rotate(0.3))[0]
    text = gates.claimed_circuit(Scheme.rotate(0.3), o).describe()
    assert "H" in text and "[L]" in text


def test_retry_counts_frozen():
    res = gates.single_qubit_success_probability(4)
    assert res["counts"] == [131072, 65536, 32768, 16384, 8192]
    assert res["K"] == Fraction(1, 2)
    assert res["failure"] == [Fraction(1, 2**k) for k in range(1, 5)]
    assert all(c == Fraction(1, 2) for c in res["conditional"])
    with pytest.raises(ValueError):
        gates.single_qubit_success_probability(0)


def test_retry_patch_conditional_by_enumeration():
    assert gates.retry_patch_conditional() == Fraction(1, 2)


def test_scheme_validation():
    with pytest.raises(ValueError):
        Scheme("X")
    with pytest.raises(ValueError):
        Scheme("Dphi", 0.1, "up")
    assert Scheme.rotate(0.5).label().startswith("Dphi[left")


@settings(max_examples=40, deadline=None)
@given(st.floats(-np.pi, np.pi), st.sampled_from(["left", "right"]), st.integers(0, 15))
def test_rotation_outcomes_match_claim_for_any_angle(phi, side, k):
    sch = Scheme.rotate(phi, side)
    o = gates.valid_outcomes(sch)[k]
    rep = gates.verify_against_claim(sch, o)
    assert rep["matched"]
    a = gates.extract_gate(sch, o).matrix
    assert gates.is_pauli_dressed(a, gates.ideal_operator(sch, o))
    assert ops.proportional_to_unitary(a)


def test_every_unheralded_pattern_gives_a_unitary():
    for sch in (Scheme.decouple(), Scheme.entangle()):
        for pattern in range(64):
            o = gates.outcome_from_pattern(sch, pattern)
            if o.heralded_invalid:
                continue
            assert ops.proportional_to_unitary(gates.extract_gate(sch, o).matrix)
