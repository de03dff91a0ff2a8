"""Small dense-matrix helpers shared by every module.

Single-qubit gates, Kronecker products on few wires and comparison of
operators up to a global phase.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# control on the first (left) wire
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KETP = (KET0 + KET1) / np.sqrt(2)
KETM = (KET0 - KET1) / np.sqrt(2)

#: virtual-leg label -> ket in the computational basis
LABEL_KETS = {"0": KET0, "1": KET1, "+": KETP, "-": KETM}


def kron(*mats):
    """Kronecker product of the arguments, first argument most significant."""
    return reduce(np.kron, mats, np.ones((1, 1), dtype=complex)) if mats else np.eye(1)


def rx(phi: float) -> np.ndarray:
    """Rotation exp(-i phi X / 2)."""
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(phi: float) -> np.ndarray:
    """Rotation exp(-i phi Z / 2)."""
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def g_phi(phi: float) -> np.ndarray:
    """The single-qubit gate ``Z Rx(phi)`` induced by the rotation scheme."""
    return Z @ rx(phi)


def g_phi_mirrored(phi: float) -> np.ndarray:
    """``X Rz(phi)``, equal to ``H G_phi H``; used when the wire is on the right."""
    return X @ rz(phi)


def entangler() -> np.ndarray:
    """Byproduct-free two-wire gate ``CNOT (H x X) CNOT`` (control on the left)."""
    return CNOT @ np.kron(H, X) @ CNOT


def pauli(x: int, z: int) -> np.ndarray:
    """``X^x Z^z`` on one wire."""
    return np.linalg.matrix_power(X, x % 2) @ np.linalg.matrix_power(Z, z % 2)


def tilde(q: int) -> int:
    """Map a +-1 outcome to a bit, ``(1 - q) / 2``."""
    if q not in (1, -1):
        raise ValueError(f"tilde expects +1 or -1, got {q!r}")
    return (1 - q) // 2


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between normalized ``a`` and ``b`` minimized over a global phase.

    Both operands are scaled to unit Frobenius norm first, so the result lies
    in ``[0, sqrt(2)]``.  A zero operand gives ``sqrt(2)``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return float(np.sqrt(2))
    a, b = a / na, b / nb
    ov = np.vdot(b, a)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - ph * b))


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < atol)


def proportional_to_unitary(a: np.ndarray, atol: float = 1e-10) -> bool:
    """True when ``a^dag a = c I`` with ``c > 0``."""
    g = a.conj().T @ a
    c = np.trace(g).real / g.shape[0]
    if c <= atol:
        return False
    return bool(np.max(np.abs(g / c - np.eye(g.shape[0]))) < atol)


def identify_pauli(op: np.ndarray, atol: float = 1e-9):
    """Return ``(bits, phase)`` with ``op = phase * (X^x1 Z^z1 (x) ...)``, or None.

    ``bits`` is a tuple ``(x1, z1, x2, z2, ...)`` for ``log2(dim)`` wires.
    """
    op = np.asarray(op, dtype=complex)
    n = int(round(np.log2(op.shape[0])))
    norm = np.linalg.norm(op) / np.sqrt(op.shape[0])
    if norm == 0:
        return None
    for flat in range(4**n):
        bits = tuple((flat >> (2 * n - 1 - k)) & 1 for k in range(2 * n))
        p = kron(*(pauli(bits[2 * w], bits[2 * w + 1]) for w in range(n)))
        ov = np.trace(p.conj().T @ op) / op.shape[0]
        if abs(abs(ov) - norm) < atol * max(1.0, norm):
            return bits, ov / norm
    return None


def entanglement_entropy(psi: np.ndarray) -> float:
    """Von Neumann entropy (natural log) of the left wire of a two-wire state."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    s = np.linalg.svd(psi.reshape(2, 2), compute_uv=False) ** 2
    s = s[s > 1e-300]
    return float(-np.sum(s * np.log(s)))
