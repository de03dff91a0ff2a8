"""Exact dynamics of small Rydberg clusters under a hard blockade constraint.

Atoms within one blockade radius can host at most one excitation, so a
cluster of ``n`` atoms lives in an ``n + 1`` dimensional space spanned by the
vacuum and the ``n`` single excitations.  The drive

    H = 1/2 (Omega |e><g| + Omega^* |g><e|) - Delta n

is restricted to that space and exponentiated exactly.  Three pulses are
provided:

* pulse I, a detuned two-atom pulse whose fluorescence readout measures the
  excitation "position" in a rotated basis;
* pulse II, a resonant three-atom pulse projecting a triangle onto one of four
  equal-weight superpositions;
* pulse III, a phase imprint on the excited state of chosen atoms.

A resonant pi/2 pulse on an isolated atom (the ``g +- e`` readout of edge
atoms) is also provided.

Basis ordering is fixed: the vacuum comes first, then the single excitations
in the order the atoms are listed.  For the two-atom clusters the order is
(top, bottom); for triangles it is (left link, top-right link, bottom-right
link).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PULSE_ONE_RATIO = np.sqrt(2.0 / 3.0)  # Delta / |Omega|
PULSE_TOL = 1e-12


@dataclass(frozen=True)
class PulseParams:
    """Drive parameters of one pulse.

    Parameters
    ----------
    rabi_amplitude : complex
        Complex Rabi frequency Omega (angular frequency units).
    detuning : float
        Detuning Delta (angular frequency units).
    duration : float
        Pulse duration tau.
    phase_shift : float
        Imprinted phase, only meaningful for ``kind="III"``.
    kind : str
        ``"I"``, ``"II"``, ``"III"``, ``"edge"`` or ``"generic"``.  The named
        kinds are validated against their defining constraints.
    """

    rabi_amplitude: complex
    detuning: float
    duration: float
    phase_shift: float = 0.0
    kind: str = "generic"

    def __post_init__(self):
        om = abs(self.rabi_amplitude)
        if self.kind == "I":
            if om == 0 or abs(self.detuning / om - PULSE_ONE_RATIO) > PULSE_TOL * PULSE_ONE_RATIO:
                raise ValueError("pulse I needs Delta/|Omega| = sqrt(2/3)")
            if abs(self.duration * self.detuning - np.pi) > PULSE_TOL * np.pi:
                raise ValueError("pulse I needs tau * Delta = pi")
        elif self.kind == "II":
            if self.detuning != 0:
                raise ValueError("pulse II needs Delta = 0")
            target = 4 * np.pi / (3 * np.sqrt(3))
            if abs(self.duration * om - target) > PULSE_TOL * target:
                raise ValueError("pulse II needs tau * |Omega| = 4 pi / (3 sqrt 3)")
        elif self.kind == "III":
            if not np.isfinite(self.phase_shift):
                raise ValueError("pulse III phase must be finite")
        elif self.kind == "edge":
            if self.detuning != 0 or abs(self.duration * om - np.pi / 2) > PULSE_TOL:
                raise ValueError("edge pulse is a resonant pi/2 pulse")
        elif self.kind != "generic":
            raise ValueError(f"unknown pulse kind {self.kind!r}")

    @classmethod
    def pulse_one(cls, omega: float = 1.0) -> "PulseParams":
        """Pulse I with real Rabi frequency ``omega``."""
        delta = PULSE_ONE_RATIO * omega
        return cls(complex(omega), delta, np.pi / delta, kind="I")

    @classmethod
    def pulse_two(cls, omega: float = 1.0) -> "PulseParams":
        """Pulse II with Omega = -i omega, i.e. ``<g|H|e> = i omega / 2``."""
        return cls(-1j * omega, 0.0, 4 * np.pi / (3 * np.sqrt(3) * omega), kind="II")

    @classmethod
    def pulse_three(cls, phi: float) -> "PulseParams":
        return cls(0j, 0.0, 0.0, phase_shift=float(phi), kind="III")

    @classmethod
    def edge(cls, omega: float = 1.0) -> "PulseParams":
        """Resonant pi/2 pulse; Omega = +i omega so that an excited readout means ``g + e``."""
        return cls(1j * omega, 0.0, np.pi / (2 * omega), kind="edge")


def effective_rabi_diagnostic(params: PulseParams) -> float:
    """Return ``sqrt(2|Omega|^2 + Delta^2) - 2 Delta``; zero for pulse I."""
    om = abs(params.rabi_amplitude)
    return float(np.sqrt(2 * om**2 + params.detuning**2) - 2 * params.detuning)


@dataclass(frozen=True)
class BlockadedBasis:
    """Legal excitation configurations of a fully blockaded cluster.

    ``states`` holds bitmasks over the ``cluster_size`` atoms (bit ``k`` set
    when atom ``k`` is excited).  The canonical order is vacuum first, then
    single excitations in atom order.
    """

    cluster_size: int
    states: tuple = field(default=())

    def __post_init__(self):
        if self.cluster_size not in (1, 2, 3):
            raise ValueError("clusters hold 1, 2 or 3 atoms")
        if not self.states:
            object.__setattr__(self, "states", canonical_states(self.cluster_size))
        for s in self.states:
            if s < 0 or s >= 1 << self.cluster_size:
                raise ValueError(f"state {s} outside the cluster")
            if bin(s).count("1") > 1:
                raise ValueError(f"state {s:b} violates the blockade")
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate basis states")

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, mask: int) -> int:
        return self.states.index(mask)


def canonical_states(n: int) -> tuple:
    return (0,) + tuple(1 << k for k in range(n))


@dataclass(frozen=True)
class ClusterState:
    """A ket on a blockaded basis."""

    basis: BlockadedBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.dim,):
            raise ValueError("amplitude vector does not match the basis")
        object.__setattr__(self, "amplitudes", amp)

    def normalized(self) -> "ClusterState":
        return ClusterState(self.basis, self.amplitudes / np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class EffectiveMeasurement:
    """Projective measurement on a blockaded basis.

    ``vectors[k]`` is the (normalized) ket the cluster is projected on when
    outcome ``labels[k]`` is read out; ``projectors[k]`` is its projector.
    ``patterns[k]`` is the fluorescence bitmask that produced it.
    """

    basis: BlockadedBasis
    labels: tuple
    vectors: tuple
    patterns: tuple

    @property
    def projectors(self) -> list:
        return [np.outer(v, v.conj()) for v in self.vectors]

    def vector(self, label) -> np.ndarray:
        return self.vectors[self.labels.index(label)]


def build_blockaded_hamiltonian(params: PulseParams, basis: BlockadedBasis) -> np.ndarray:
    """Matrix of the drive restricted to ``basis``.

    Diagonal entries are ``-Delta * (number excited)``; configurations that
    differ by one excitation are coupled by ``Omega / 2`` (``|e><g|``) and
    ``Omega^* / 2`` (``|g><e|``).
    """
    for s in basis.states:
        if bin(s).count("1") > 1:
            raise ValueError("basis contains a blockade-violating configuration")
    d = basis.dim
    om = complex(params.rabi_amplitude)
    h = np.zeros((d, d), dtype=complex)
    for i, si in enumerate(basis.states):
        h[i, i] = -params.detuning * bin(si).count("1")
        for j, sj in enumerate(basis.states):
            diff = si ^ sj
            if diff and not diff & (diff - 1):
                # si has one more excitation than sj: <si|H|sj> = Omega/2
                if si & diff:
                    h[i, j] = om / 2
                else:
                    h[i, j] = om.conjugate() / 2
    return h


def evolve(params: PulseParams, basis: BlockadedBasis) -> np.ndarray:
    """``exp(-i H tau)`` by Hermitian eigendecomposition.

    A pulse-III parameter set returns the phase imprint on every atom of the
    cluster.
    """
    if params.kind == "III":
        return np.diag([np.exp(1j * params.phase_shift * bin(s).count("1")) for s in basis.states])
    h = build_blockaded_hamiltonian(params, basis)
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * w * params.duration)) @ v.conj().T
    if np.max(np.abs(u.conj().T @ u - np.eye(basis.dim))) > 1e-12:
        raise FloatingPointError("non-unitary evolution")
    return u


def fluorescence_states(unitary: np.ndarray) -> list:
    """Kets projected on before the pulse: ``U^dag |k>`` for each readout ``k``."""
    u = np.asarray(unitary)
    return [u.conj().T[:, k].copy() for k in range(u.shape[0])]


def pulse_one_unitary(omega: float = 1.0) -> np.ndarray:
    return evolve(PulseParams.pulse_one(omega), BlockadedBasis(2))


def pulse_two_unitary(omega: float = 1.0) -> np.ndarray:
    return evolve(PulseParams.pulse_two(omega), BlockadedBasis(3))


def edge_unitary(omega: float = 1.0) -> np.ndarray:
    return evolve(PulseParams.edge(omega), BlockadedBasis(1))


def effective_observable_pulse1() -> np.ndarray:
    """``U^dag P U`` with ``P = diag(0, -1, 1)`` on (vacuum, top, bottom)."""
    u = pulse_one_unitary()
    return u.conj().T @ np.diag([0, -1, 1]).astype(complex) @ u


def effective_measurement_pulse1() -> EffectiveMeasurement:
    """Pulse I followed by fluorescence on a two-atom cluster.

    Readout of the vacuum, the top atom or the bottom atom gives
    ``p = 0, -1, +1``, projecting on the vacuum, ``(top - i bottom)/sqrt2``
    and ``(top + i bottom)/sqrt2`` respectively (up to phases).
    """
    basis = BlockadedBasis(2)
    vecs = fluorescence_states(pulse_one_unitary())
    return EffectiveMeasurement(basis, (0, -1, 1), tuple(vecs), basis.states)


def effective_measurement_pulse2() -> EffectiveMeasurement:
    """Pulse II followed by fluorescence on a triangle (left, top-right, bottom-right).

    Labels are ``(x, p_up, p_down)``; each entry is ``+1`` when the left,
    top-right or bottom-right link respectively is seen excited.
    """
    basis = BlockadedBasis(3)
    vecs = fluorescence_states(pulse_two_unitary())
    labels = tuple(pulse_two_label(s) for s in basis.states)
    return EffectiveMeasurement(basis, labels, tuple(vecs), basis.states)


def pulse_two_label(mask: int) -> tuple:
    """``(x, p_up, p_down)`` for a fluorescence bitmask over (left, top-right, bottom-right)."""
    return tuple(1 if mask >> k & 1 else -1 for k in range(3))


def pulse_two_closed_form(label: tuple) -> np.ndarray:
    """``1/2 (vac - p_up p_down L - x p_up BR - x p_down TR)`` on (vac, L, TR, BR)."""
    x, pu, pd = label
    return 0.5 * np.array([1, -pu * pd, -x * pd, -x * pu], dtype=complex)


def edge_measurement() -> EffectiveMeasurement:
    """Resonant pi/2 pulse and readout of one atom; ``x = +1`` projects on ``(g + e)/sqrt2``."""
    basis = BlockadedBasis(1)
    vecs = fluorescence_states(edge_unitary())
    return EffectiveMeasurement(basis, (-1, 1), tuple(vecs), basis.states)


def apply_phase_shift(state: ClusterState, site_index: int, phi: float) -> ClusterState:
    """Multiply amplitudes of configurations with ``site_index`` excited by ``exp(i phi)``."""
    n = state.basis.cluster_size
    if not 0 <= site_index < n:
        raise IndexError(f"site {site_index} not in a {n}-atom cluster")
    ph = np.array([np.exp(1j * phi) if s >> site_index & 1 else 1.0 for s in state.basis.states])
    return ClusterState(state.basis, state.amplitudes * ph)


def pulse_one_closed_form() -> np.ndarray:
    """Entries of the printed pulse-I evolution, q = (1+i)/2 (vacuum entry -1)."""
    q = (1 + 1j) / 2
    return np.array([[-1, 0, 0], [0, -q, q.conjugate()], [0, q.conjugate(), -q]])


def pulse_two_closed_form_unitary() -> np.ndarray:
    return -0.5 * np.array(
        [[1, -1, -1, -1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]], dtype=complex
    )


def pulse_one_observable_closed_form() -> np.ndarray:
    return np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]])


def pulse_two_projected_states() -> list:
    """The four kets ``U^dag |k>`` of pulse II as printed, ``k`` = (none, left, TR, BR)."""
    rows = [[-1, 1, 1, 1], [-1, 1, -1, -1], [-1, -1, 1, -1], [-1, -1, -1, 1]]
    return [0.5 * np.array(r, dtype=complex) for r in rows]
