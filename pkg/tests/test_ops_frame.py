import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kagome_mbqc import ops
from kagome_mbqc.frame import AdaptiveCorrectionRequired, PauliFrame, compose_frame
from kagome_mbqc.ops import CNOT, H, X, Z, kron


def frames(n):
    bits = st.lists(st.integers(0, 1), min_size=n, max_size=n)
    return st.builds(PauliFrame, bits, bits, st.integers(0, 3))


def test_tilde():
    assert ops.tilde(1) == 0 and ops.tilde(-1) == 1
    with pytest.raises(ValueError):
        ops.tilde(0)


def test_g_phi_definitions():
    for phi in (0.0, 0.3, np.pi / 2):
        assert np.allclose(ops.g_phi(phi), Z @ ops.rx(phi))
        assert np.allclose(ops.g_phi_mirrored(phi), X @ ops.rz(phi))


def test_entangler_definition():
    assert np.allclose(ops.entangler(), CNOT @ np.kron(H, X) @ CNOT)


def test_phase_distance():
    u = ops.rx(0.4)
    assert ops.phase_distance(u, np.exp(1.1j) * 3 * u) < 1e-12
    assert ops.phase_distance(u, np.zeros((2, 2))) == pytest.approx(np.sqrt(2))
    assert ops.phase_distance(X, Z) == pytest.approx(np.sqrt(2))


def test_identify_pauli():
    bits, ph = ops.identify_pauli(1j * kron(X @ Z, Z))
    assert bits == (1, 1, 0, 1) and ph == pytest.approx(1j)
    assert ops.identify_pauli(H) is None


def test_entropy():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert ops.entanglement_entropy(bell) == pytest.approx(np.log(2))
    assert ops.entanglement_entropy([1, 0, 0, 0]) == pytest.approx(0.0)


def test_frame_from_bits_round_trip():
    f = PauliFrame.from_bits((1, 0, 1, 1), phase=2)
    assert f.bits == (1, 0, 1, 1) and f.n == 2
    assert np.allclose(f.matrix(), -kron(X, X @ Z))
    with pytest.raises(ValueError):
        PauliFrame((0,), (0, 1))


def test_through_g_adaptive():
    f = PauliFrame((0,), (1,))
    with pytest.raises(AdaptiveCorrectionRequired):
        f.through_g(0, 0.3)
    # X passes through any angle
    PauliFrame((1,), (0,)).through_g(0, 0.3)
    # at a Clifford angle Z passes too
    g = ops.g_phi(np.pi / 2)
    out = f.through_g(0, np.pi / 2)
    assert np.allclose(out.matrix(), g @ f.matrix() @ g.conj().T)


@settings(max_examples=50, deadline=None)
@given(frames(2), frames(2))
def test_compose_is_operator_product(a, b):
    assert np.allclose(a.compose(b).matrix(), b.matrix() @ a.matrix())
    assert compose_frame(a, b) == a.compose(b)
    # a bare bit tuple carries no phase
    assert compose_frame(a, b.bits) == a.compose(PauliFrame(b.x, b.z))


@settings(max_examples=50, deadline=None)
@given(frames(2), st.integers(0, 1))
def test_through_h_matches_dense(f, w):
    u = kron(*(H if k == w else np.eye(2) for k in range(2)))
    assert np.allclose(f.through_h(w).matrix(), u @ f.matrix() @ u.conj().T)


@settings(max_examples=50, deadline=None)
@given(frames(2))
def test_through_cnot_and_entangler_match_dense(f):
    assert np.allclose(f.through_cnot(0, 1).matrix(), CNOT @ f.matrix() @ CNOT)
    m = ops.entangler()
    assert np.allclose(f.through_entangler(0, 1).matrix(), m @ f.matrix() @ m.conj().T)
    assert np.allclose(f.through_dense(m, [0, 1]).matrix(), m @ f.matrix() @ m.conj().T)


@settings(max_examples=50, deadline=None)
@given(frames(3))
def test_restriction_and_identity(f):
    sub = f.restricted([0, 2])
    assert sub.x == (f.x[0], f.x[2]) and sub.z == (f.z[0], f.z[2])
    assert f.compose(PauliFrame.identity(3)) == f
