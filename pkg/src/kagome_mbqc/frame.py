"""Pauli frames and their conjugation through the gates of the scheme.

A frame on ``n`` wires is the operator ``i^k (X^x1 Z^z1) (x) ... (x) (X^xn Z^zn)``
with the first wire most significant.  Pushing a frame ``F`` through a gate
``U`` returns ``F' = U F U^dag``, so that ``U F = F' U``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ops import H, X, Z, identify_pauli, kron, pauli


class AdaptiveCorrectionRequired(ArithmeticError):
    """A Z byproduct cannot be pushed through a non-Clifford ``G_phi``.

    The rotation angle has to be chosen adaptively (its sign flipped) instead.
    """


@dataclass(frozen=True)
class PauliFrame:
    """Per-wire X/Z exponents and a global phase ``i^phase``."""

    x: tuple
    z: tuple
    phase: int = 0

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z exponent lists differ in length")
        object.__setattr__(self, "x", tuple(int(b) % 2 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) % 2 for b in self.z))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls((0,) * n, (0,) * n)

    @classmethod
    def from_bits(cls, bits, phase: int = 0) -> "PauliFrame":
        """From ``(x1, z1, x2, z2, ...)``."""
        bits = list(bits)
        return cls(tuple(bits[0::2]), tuple(bits[1::2]), phase)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def bits(self) -> tuple:
        return tuple(b for w in range(self.n) for b in (self.x[w], self.z[w]))

    def is_identity(self) -> bool:
        return not any(self.x) and not any(self.z)

    def matrix(self) -> np.ndarray:
        return (1j) ** self.phase * kron(*(pauli(self.x[w], self.z[w]) for w in range(self.n)))

    def _replace(self, w, x, z, dphase) -> "PauliFrame":
        xs, zs = list(self.x), list(self.z)
        xs[w], zs[w] = x, z
        return PauliFrame(tuple(xs), tuple(zs), self.phase + dphase)

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        """Operator product ``other . self`` (``other`` applied after ``self``)."""
        if other.n != self.n:
            raise ValueError("frames act on different wire counts")
        ph = self.phase + other.phase
        # X^a Z^b X^c Z^d = (-1)^(b c) X^(a+c) Z^(b+d)
        for w in range(self.n):
            ph += 2 * other.z[w] * self.x[w]
        return PauliFrame(
            tuple(a ^ c for a, c in zip(self.x, other.x)),
            tuple(b ^ d for b, d in zip(self.z, other.z)),
            ph,
        )

    def restricted(self, wires) -> "PauliFrame":
        return PauliFrame(tuple(self.x[w] for w in wires), tuple(self.z[w] for w in wires))

    # conjugation rules ------------------------------------------------

    def through_h(self, w: int) -> "PauliFrame":
        """``H X^x Z^z H = (-1)^(xz) X^z Z^x``."""
        x, z = self.x[w], self.z[w]
        return self._replace(w, z, x, 2 * x * z)

    def through_x(self, w: int) -> "PauliFrame":
        return self._replace(w, self.x[w], self.z[w], 2 * self.z[w])

    def through_z(self, w: int) -> "PauliFrame":
        return self._replace(w, self.x[w], self.z[w], 2 * self.x[w])

    def through_cnot(self, c: int, t: int) -> "PauliFrame":
        """X on the control spreads to the target, Z on the target to the control."""
        xs, zs = list(self.x), list(self.z)
        xs[t] ^= self.x[c]
        zs[c] ^= self.z[t]
        return PauliFrame(tuple(xs), tuple(zs), self.phase)

    def through_entangler(self, a: int, b: int) -> "PauliFrame":
        """Through ``CNOT (H x X) CNOT`` with control ``a``."""
        f = self.through_cnot(a, b).through_h(a).through_x(b)
        return f.through_cnot(a, b)

    def through_dense(self, u: np.ndarray, wires) -> "PauliFrame":
        """Conjugate the frame's restriction to ``wires`` by the dense gate ``u``.

        Raises :class:`AdaptiveCorrectionRequired` when the image is not a
        Pauli operator.
        """
        wires = list(wires)
        sub = self.restricted(wires)
        img = u @ sub.matrix() @ u.conj().T
        found = identify_pauli(img)
        if found is None:
            raise AdaptiveCorrectionRequired("conjugated byproduct is not a Pauli operator")
        bits, ph = found
        k = int(np.round(np.angle(ph) / (np.pi / 2))) % 4
        xs, zs = list(self.x), list(self.z)
        for j, w in enumerate(wires):
            xs[w], zs[w] = bits[2 * j], bits[2 * j + 1]
        return PauliFrame(tuple(xs), tuple(zs), self.phase + k)

    def through_g(self, w: int, phi: float) -> "PauliFrame":
        """Through ``G_phi = Z Rx(phi)``.

        X always passes (picking a sign).  Z passes only when ``G_phi`` is
        Clifford, i.e. ``phi`` a multiple of pi/2; otherwise the rotation sense
        has to be flipped adaptively (``G_phi Z = +-Z G_-phi``).
        """
        from .ops import g_phi

        if self.z[w] and not np.isclose(np.sin(2 * phi), 0.0, atol=1e-12):
            raise AdaptiveCorrectionRequired(f"Z byproduct meets G_phi with phi={phi}")
        return self.through_dense(g_phi(phi), [w])


def compose_frame(frame: PauliFrame, byproducts) -> PauliFrame:
    """Apply byproducts after ``frame``; ``byproducts`` is a frame or a bit tuple."""
    if not isinstance(byproducts, PauliFrame):
        byproducts = PauliFrame.from_bits(byproducts)
    return frame.compose(byproducts)


__all__ = ["PauliFrame", "AdaptiveCorrectionRequired", "compose_frame", "H", "X", "Z"]
