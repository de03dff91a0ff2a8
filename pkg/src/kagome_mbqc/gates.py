"""Measurement schemes on one bowtie and the logical gates they induce.

Three schemes act on the two virtual wires crossing a bowtie:

``D0`` (wire decoupling)
    The two edge atoms L and R are read out in the ``g +- e`` basis
    (outcomes ``x_L``, ``x_R``).  A -pi/2 phase is imprinted on the two upper
    atoms of the central cross, then pulse I acts on the left pair (UL, LL)
    and on the right pair (UR, LR) (outcomes ``p_L``, ``p_R``).  Exactly one
    of ``p_L``, ``p_R`` vanishes on a perfect dimer state.
``Dphi`` (single-qubit rotation)
    As ``D0``, with an extra phase ``phi`` imprinted on the leftmost atom
    (``side="left"``) or on the rightmost atom (``side="right"``) before its
    readout.
``Q`` (entangling gate)
    A pi phase on UL, LL and R, then pulse II on each triangle.  Each
    triangle yields ``(x, p_up, p_down)``.

Every outcome selects a projection ket of the six atoms; contracting it with
the bowtie tensor gives the 4x4 correlation-space operator (see
:mod:`kagome_mbqc.peps` for the index convention).  Up to Pauli byproducts
these operators are ``H (x) H`` for ``D0``, ``G_phi H (x) H`` after a
successful left rotation, ``H (x) G'_phi H`` after a successful right
rotation, and ``M (H (x) H)`` for ``Q``, where ``G_phi = Z Rx(phi)``,
``G'_phi = X Rz(phi) = H G_phi H`` and ``M = CNOT (H (x) X) CNOT``.

Atom configurations of a bowtie are 6-bit masks over the roles
``(L, UL, LL, UR, LR, R)`` (bit k is role k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from . import blockade
from .dimer import ROLES, boundary_condition, chain_retry_patch, retry_patch
from .frame import AdaptiveCorrectionRequired, PauliFrame, compose_frame
from .ops import (
    CNOT,
    H,
    I2,
    X,
    Z,
    entangler,
    g_phi,
    g_phi_mirrored,
    identify_pauli,
    kron,
    pauli,
    phase_distance,
    tilde,
)
from .peps import PepsTensor, VirtualOperator, build_peps_tensor, project_physical, role_mask

RI = {r: i for i, r in enumerate(ROLES)}
#: phase imprinted on the two upper cross atoms before pulse I
DECOUPLE_PHASE = -np.pi / 2
MATCH_TOL = 1e-10
PHI_GRID = (0.0, np.pi / 4, np.pi / 2, np.pi, 1.2345)

__all__ = [
    "Scheme",
    "OutcomeRecord",
    "ClaimedCircuit",
    "PauliFrame",
    "AdaptiveCorrectionRequired",
    "compose_frame",
    "decouple_projection_state",
    "q_projection_state",
    "extract_gate",
    "claimed_circuit",
    "verify_against_claim",
    "verification_sweep",
    "byproduct_frame",
    "ideal_operator",
    "single_qubit_success_probability",
    "fluorescence_basis",
]


@dataclass(frozen=True)
class Scheme:
    """A measurement scheme: ``"D0"``, ``"Dphi"`` or ``"Q"``.

    ``phi`` and ``side`` only matter for ``Dphi``; ``side`` names the edge
    atom carrying the phase and hence the wire that is rotated.
    """

    kind: str
    phi: float = 0.0
    side: str = "left"

    def __post_init__(self):
        if self.kind not in ("D0", "Dphi", "Q"):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        object.__setattr__(self, "phi", float(self.phi))

    @classmethod
    def decouple(cls) -> "Scheme":
        return cls("D0")

    @classmethod
    def rotate(cls, phi: float, side: str = "left") -> "Scheme":
        return cls("Dphi", phi, side)

    @classmethod
    def entangle(cls) -> "Scheme":
        return cls("Q")

    @property
    def is_d(self) -> bool:
        return self.kind in ("D0", "Dphi")

    def label(self) -> str:
        if self.kind == "Dphi":
            return f"Dphi[{self.side},{self.phi:.6g}]"
        return self.kind


@dataclass(frozen=True)
class OutcomeRecord:
    """Outcome of one scheme on one bowtie.

    ``values`` is ``(x_L, p_L, p_R, x_R)`` for D-schemes, with ``p = 2``
    meaning both atoms of the pair fluoresced, and
    ``(x^L, pu^L, pd^L, x^R, pu^R, pd^R)`` for ``Q``, where a triangle with
    several excitations is recorded as zeros.  ``pattern`` is the raw
    six-bit fluorescence mask when known.
    """

    scheme: Scheme
    values: tuple
    heralded_invalid: bool = False
    pattern: int | None = None

    @property
    def rotation_succeeded(self) -> bool:
        """For ``Dphi``: whether ``G_phi`` acted on the rotated wire."""
        if self.scheme.kind != "Dphi" or self.heralded_invalid:
            return False
        _, pl, pr, _ = self.values
        return pr != 0 if self.scheme.side == "left" else pl != 0

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.label(),
            "values": [int(v) for v in self.values],
            "heralded_invalid": bool(self.heralded_invalid),
        }


def d_outcome(scheme: Scheme, x_l, p_l, p_r, x_r, pattern=None) -> OutcomeRecord:
    bad = (p_l == 0) == (p_r == 0) or 2 in (p_l, p_r)
    return OutcomeRecord(scheme, (x_l, p_l, p_r, x_r), bad, pattern)


def valid_outcomes(scheme: Scheme) -> list:
    """16 non-heralded tuples for D-schemes, all 64 sign tuples for Q."""
    if scheme.is_d:
        out = []
        for xl, xr in product((1, -1), repeat=2):
            for pl, pr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                out.append(d_outcome(scheme, xl, pl, pr, xr))
        return out
    return [OutcomeRecord(scheme, v) for v in product((1, -1), repeat=6)]


# closed-form projection kets ---------------------------------------------


def _product_ket(factors) -> np.ndarray:
    """Ket over 64 configurations from cluster factors ``(roles, {local_mask: amp})``."""
    psi = np.zeros(64, dtype=complex)
    psi[0] = 1.0
    for roles, amps in factors:
        bits = [RI[r] for r in roles]
        new = np.zeros(64, dtype=complex)
        for c in np.nonzero(psi)[0]:
            for loc, a in amps.items():
                m = int(c)
                for j, b in enumerate(bits):
                    if loc >> j & 1:
                        m |= 1 << b
                new[m] += psi[c] * a
        psi = new
    return psi / np.linalg.norm(psi)


def _pair_amps(p) -> dict:
    # local bit 0 = upper atom, bit 1 = lower atom
    if p == 0:
        return {0: 1.0}
    if p == 2:
        return {3: 1.0}
    return {1: 1.0, 2: float(p)}


def decouple_projection_state(outcome: OutcomeRecord) -> np.ndarray:
    """Normalized six-atom ket selected by a D-scheme outcome.

    Edge atoms contribute ``g + x e`` (``g + x e^{-i phi} e`` on the atom
    carrying the phase) and each pair ``vac`` for ``p = 0`` or
    ``top + p bottom`` otherwise.  Heralded tuples give the corresponding
    inconsistent product ket.
    """
    sch = outcome.scheme
    if not sch.is_d:
        raise ValueError("not a D-scheme outcome")
    xl, pl, pr, xr = outcome.values
    ph_l = np.exp(-1j * sch.phi) if sch.kind == "Dphi" and sch.side == "left" else 1.0
    ph_r = np.exp(-1j * sch.phi) if sch.kind == "Dphi" and sch.side == "right" else 1.0
    return _product_ket(
        [
            (("L",), {0: 1.0, 1: xl * ph_l}),
            (("UL", "LL"), _pair_amps(pl)),
            (("UR", "LR"), _pair_amps(pr)),
            (("R",), {0: 1.0, 1: xr * ph_r}),
        ]
    )


def q_projection_state(outcome: OutcomeRecord) -> np.ndarray:
    """Normalized ket of the two-triangle projection of the ``Q`` scheme."""
    if outcome.scheme.kind != "Q":
        raise ValueError("not a Q outcome")
    xl, ul, dl, xr, ur, dr = outcome.values
    # left triangle local bits (L, UL, LL); right triangle (R, UR, LR)
    left = {0: 1.0, 1: -ul * dl, 4: xl * ul, 2: xl * dl}
    right = {0: 1.0, 1: ur * dr, 4: -xr * ur, 2: -xr * dr}
    return _product_ket([(("L", "UL", "LL"), left), (("R", "UR", "LR"), right)])


def projection_state(outcome: OutcomeRecord) -> np.ndarray:
    if outcome.scheme.is_d:
        return decouple_projection_state(outcome)
    return q_projection_state(outcome)


# pulse composition on six atoms -----------------------------------------


def _embed(local_u: np.ndarray, roles) -> np.ndarray:
    """Lift a blockaded-cluster unitary to the 64-dim space of a bowtie.

    Configurations with several excitations inside the cluster are left
    untouched (they are far off resonance).
    """
    bits = [RI[r] for r in roles]
    k = len(bits)
    basis = blockade.canonical_states(k)
    full_local = np.eye(1 << k, dtype=complex)
    for i, si in enumerate(basis):
        for j, sj in enumerate(basis):
            full_local[si, sj] = local_u[i, j]
    cmask = sum(1 << b for b in bits)
    out = np.zeros((64, 64), dtype=complex)
    for c in range(64):
        loc = sum(((c >> b) & 1) << j for j, b in enumerate(bits))
        rest = c & ~cmask
        for loc2 in range(1 << k):
            amp = full_local[loc2, loc]
            if amp != 0:
                m = rest
                for j, b in enumerate(bits):
                    if loc2 >> j & 1:
                        m |= 1 << b
                out[m, c] += amp
    return out


def _phase(roles, phi) -> np.ndarray:
    d = np.ones(64, dtype=complex)
    for c in range(64):
        for r in roles:
            if c >> RI[r] & 1:
                d[c] *= np.exp(1j * phi)
    return np.diag(d)


@lru_cache(maxsize=2)
def _base_unitary(kind: str) -> np.ndarray:
    if kind == "D":
        p1 = blockade.pulse_one_unitary()
        e = blockade.edge_unitary()
        seq = [
            _phase(("UL", "UR"), DECOUPLE_PHASE),
            _embed(p1, ("UL", "LL")),
            _embed(p1, ("UR", "LR")),
            _embed(e, ("L",)),
            _embed(e, ("R",)),
        ]
    else:
        p2 = blockade.pulse_two_unitary()
        seq = [
            _phase(("UL", "LL", "R"), np.pi),
            _embed(p2, ("L", "UL", "LL")),
            _embed(p2, ("R", "UR", "LR")),
        ]
    u = np.eye(64, dtype=complex)
    for s in seq:
        u = s @ u
    return u


def scheme_unitary(scheme: Scheme) -> np.ndarray:
    """Full pulse sequence of a scheme on the six atoms (before fluorescence).

    The phase imprint of ``Dphi`` is diagonal and acts first, so it is
    appended to the cached decoupling sequence.
    """
    if scheme.kind == "Q":
        return _base_unitary("Q")
    u = _base_unitary("D")
    if scheme.kind == "Dphi":
        u = u @ _phase(("L",) if scheme.side == "left" else ("R",), scheme.phi)
    return u


def _pair_label(top: int, bottom: int) -> int:
    return {(0, 0): 0, (1, 0): -1, (0, 1): 1, (1, 1): 2}[(top, bottom)]


def outcome_from_pattern(scheme: Scheme, pattern: int) -> OutcomeRecord:
    """Outcome labels read from a six-bit fluorescence mask."""
    b = {r: pattern >> RI[r] & 1 for r in ROLES}
    if scheme.is_d:
        return d_outcome(
            scheme,
            1 if b["L"] else -1,
            _pair_label(b["UL"], b["LL"]),
            _pair_label(b["UR"], b["LR"]),
            1 if b["R"] else -1,
            pattern,
        )
    vals, bad = [], False
    for tri in (("L", "UL", "LL"), ("R", "UR", "LR")):
        n = sum(b[r] for r in tri)
        if n > 1:
            bad = True
            vals += [0, 0, 0]
        else:
            vals += [1 if b[r] else -1 for r in tri]
    return OutcomeRecord(scheme, tuple(vals), bad, pattern)


@lru_cache(maxsize=64)
def fluorescence_basis(scheme: Scheme) -> tuple:
    """``(outcomes, kets)`` for all 64 fluorescence patterns of a scheme.

    ``kets[f] = U^dag |f>`` with ``U`` the scheme's pulse sequence; the kets
    form an orthonormal basis of the six-atom space.
    """
    u = scheme_unitary(scheme)
    kets = u.conj().T
    outs = tuple(outcome_from_pattern(scheme, f) for f in range(64))
    return outs, np.ascontiguousarray(kets.T)


def canonical_q_values(values) -> tuple:
    """Fluorescence-realizable representative of a ``Q`` sign tuple.

    Flipping all three signs of a triangle leaves its ket unchanged, so each
    triangle has four distinct outcomes: none or exactly one atom seen.
    """
    out = []
    for tri in (values[:3], values[3:]):
        if sum(1 for q in tri if q == 1) >= 2:
            tri = tuple(-q for q in tri)
        out += list(tri)
    return tuple(out)


def pulse_projection_state(outcome: OutcomeRecord) -> np.ndarray:
    """Projection ket of a realizable outcome rebuilt from the pulse sequence."""
    outs, kets = fluorescence_basis(outcome.scheme)
    want = outcome.values
    if outcome.scheme.kind == "Q" and not outcome.heralded_invalid:
        want = canonical_q_values(want)
    for o, k in zip(outs, kets):
        if o.values == want:
            return k
    raise ValueError(f"{outcome.values} is not produced by fluorescence")


# operators and claimed circuits ------------------------------------------


@lru_cache(maxsize=1)
def _tensor() -> PepsTensor:
    return build_peps_tensor()


def extract_gate(scheme: Scheme, outcome: OutcomeRecord, tensor=None) -> VirtualOperator:
    """Correlation-space operator of ``outcome`` on a bowtie tensor.

    ``tensor`` defaults to the perfect dimer tensor; any dense
    ``(64, 2, 2, 2, 2)`` array may be supplied.  Raises
    :class:`~kagome_mbqc.peps.ImpossibleOutcomeError` for outcomes of
    probability zero.
    """
    if outcome.scheme != scheme:
        outcome = OutcomeRecord(scheme, outcome.values, outcome.heralded_invalid, outcome.pattern)
    psi = projection_state(outcome)
    return project_physical(_tensor() if tensor is None else tensor, psi, outcome)


def _tilde0(p: int) -> int:
    return 0 if p == 0 else tilde(p)


@dataclass(frozen=True)
class GateOp:
    """One symbolic gate: ``name`` in {H, X, Z, G, Gm, CNOT}, acting on wires."""

    name: str
    wires: tuple
    power: int = 1
    param: float = 0.0

    def matrix(self) -> np.ndarray:
        if self.power % 2 == 0 and self.name in ("H", "X", "Z", "CNOT"):
            return np.eye(2 ** len(self.wires), dtype=complex)
        if self.name == "CNOT":
            return CNOT
        if self.name in ("G", "Gm"):
            m = g_phi(self.param) if self.name == "G" else g_phi_mirrored(self.param)
            return np.linalg.matrix_power(m, self.power)
        return {"H": H, "X": X, "Z": Z}[self.name]


@dataclass(frozen=True)
class ClaimedCircuit:
    """Ordered list of gates on the (left, right) wire pair, in time order."""

    ops: tuple

    def matrix(self) -> np.ndarray:
        u = np.eye(4, dtype=complex)
        for op in self.ops:
            if op.wires == (0, 1):
                g = op.matrix()
            elif op.wires == (0,):
                g = np.kron(op.matrix(), I2)
            else:
                g = np.kron(I2, op.matrix())
            u = g @ u
        return u

    def describe(self) -> str:
        parts = []
        for op in self.ops:
            w = "".join("LR"[k] for k in op.wires)
            if op.name in ("G", "Gm"):
                parts.append(f"{op.name}({op.param:.4g})^{op.power}[{w}]")
            else:
                parts.append(f"{op.name}^{op.power}[{w}]")
        return " ".join(parts)


def claimed_circuit(scheme: Scheme, outcome: OutcomeRecord, zt_reading: str = "multiplier") -> ClaimedCircuit:
    """The printed circuit for an outcome, byproducts included.

    For ``Q`` the top dressing exponent is ``pu^R pd^L * tilde(x^W pd^W)``
    (``zt_reading="multiplier"``, the ``+-1`` prefactor read as a sign of the
    exponent) or ``tilde(x^W pd^W pu^R pd^L)`` (``"full-tilde"``).
    """
    v = outcome.values
    if scheme.is_d:
        xl, pl, pr, xr = v
        ex_l = (pl * _tilde0(pl) + pr * tilde(xl)) % 2
        ez_r = (pr * _tilde0(pr) + pl * tilde(xr)) % 2
        left_mid = GateOp("Z", (0,), abs(pr))
        right_mid = GateOp("X", (1,), abs(pl))
        if scheme.kind == "Dphi" and scheme.side == "left":
            left_mid = GateOp("G", (0,), abs(pr), scheme.phi)
        if scheme.kind == "Dphi" and scheme.side == "right":
            right_mid = GateOp("Gm", (1,), abs(pl), scheme.phi)
        return ClaimedCircuit(
            (
                GateOp("H", (0,)),
                left_mid,
                GateOp("X", (0,), ex_l),
                GateOp("H", (1,)),
                right_mid,
                GateOp("Z", (1,), ez_r),
            )
        )
    xl, ul, dl, xr, ur, dr = v
    zb_l, zb_r = tilde(xl * ul), tilde(xr * ur)
    if zt_reading == "multiplier":
        zt_l = (ur * dl * tilde(xl * dl)) % 2
        zt_r = (ur * dl * tilde(xr * dr)) % 2
    elif zt_reading == "full-tilde":
        zt_l = tilde(xl * dl * ur * dl)
        zt_r = tilde(xr * dr * ur * dl)
    else:
        raise ValueError(f"unknown reading {zt_reading!r}")
    return ClaimedCircuit(
        (
            GateOp("H", (1,)),
            GateOp("Z", (0,), zt_l),
            GateOp("Z", (1,), zt_r),
            # Q1 = (Z x I) CNOT (H x X) CNOT
            GateOp("CNOT", (0, 1)),
            GateOp("H", (0,)),
            GateOp("X", (1,)),
            GateOp("CNOT", (0, 1)),
            GateOp("Z", (0,)),
            GateOp("Z", (0,), zb_l),
            GateOp("Z", (1,), zb_r),
            GateOp("H", (0,)),
        )
    )


def q1_matrix() -> np.ndarray:
    """Undressed two-wire map ``(Z x I) CNOT (H x X) CNOT``."""
    return np.kron(Z, I2) @ entangler()


def ideal_operator(scheme: Scheme, outcome: OutcomeRecord) -> np.ndarray:
    """Byproduct-free operator ``C`` with ``A ~ B C`` (``B`` a Pauli)."""
    if scheme.kind == "Q":
        return entangler() @ np.kron(H, H)
    _, pl, pr, _ = outcome.values
    left, right = H, H
    if scheme.kind == "Dphi" and scheme.side == "left" and pr != 0:
        left = g_phi(scheme.phi) @ H
    if scheme.kind == "Dphi" and scheme.side == "right" and pl != 0:
        right = g_phi_mirrored(scheme.phi) @ H
    return np.kron(left, right)


def byproduct_frame(scheme: Scheme, outcome: OutcomeRecord) -> PauliFrame:
    """Output-side Pauli ``B`` of an outcome, as a two-wire frame (phase dropped)."""
    v = outcome.values
    if scheme.is_d:
        xl, pl, pr, xr = v
        ex_l = (pl * _tilde0(pl) + pr * tilde(xl)) % 2
        ez_r = (pr * _tilde0(pr) + pl * tilde(xr)) % 2
        zl = abs(pr) % 2
        xr_bit = abs(pl) % 2
        if scheme.kind == "Dphi" and scheme.side == "left" and pr != 0:
            zl = 0
        if scheme.kind == "Dphi" and scheme.side == "right" and pl != 0:
            xr_bit = 0
        return PauliFrame((ex_l, xr_bit), (zl, ez_r))
    t = [tilde(q) for q in v]
    txl, tul, tdl, txr, tur, tdr = t
    a_l = txl ^ tul ^ txr ^ tdr ^ 1
    b_l = txl ^ tdl ^ txr ^ tdr
    a_r = txl ^ tdl ^ txr ^ tdr ^ 1
    b_r = tur ^ tdr
    return PauliFrame((a_l, a_r), (b_l, b_r))


# verification -------------------------------------------------------------


def verify_against_claim(scheme: Scheme, outcome: OutcomeRecord, tolerance: float = MATCH_TOL) -> dict:
    """Compare an extracted operator with its printed circuit up to global phase."""
    a = extract_gate(scheme, outcome).matrix
    c = claimed_circuit(scheme, outcome).matrix()
    d = phase_distance(a, c)
    b = byproduct_frame(scheme, outcome).matrix() @ ideal_operator(scheme, outcome)
    return {
        "scheme": scheme.label(),
        "outcome": [int(q) for q in outcome.values],
        "distance": d,
        "matched": bool(d < tolerance),
        "byproduct_distance": phase_distance(a, b),
    }


def verification_sweep(schemes=None, tolerance: float = MATCH_TOL) -> list:
    """Reports for every valid outcome of every scheme (default: D0, Dphi on the grid, Q)."""
    if schemes is None:
        schemes = [Scheme.decouple()]
        schemes += [Scheme.rotate(p, s) for s in ("left", "right") for p in PHI_GRID]
        schemes += [Scheme.entangle()]
    out = []
    for sch in schemes:
        for o in valid_outcomes(sch):
            out.append(verify_against_claim(sch, o, tolerance))
    return out


def is_pauli_dressed(a: np.ndarray, c: np.ndarray) -> bool:
    """Whether ``a (c)^dag`` is proportional to a Pauli operator."""
    return identify_pauli(a @ c.conj().T / np.sqrt(np.trace(a.conj().T @ a).real / 4)) is not None


# retry statistics ---------------------------------------------------------

_RIGHT_EMPTY = [c for c in range(64) if not c & (role_mask(("UR",)) | role_mask(("LR",)))]
_LEFT_EMPTY = [c for c in range(64) if not c & (role_mask(("UL",)) | role_mask(("LL",)))]


def _fail_configs(k: int) -> list:
    # bowtie k of the wire holds it on its left for even k, on its right for odd k
    from .peps import LEGAL_CONFIGS

    empty = _RIGHT_EMPTY if k % 2 == 0 else _LEFT_EMPTY
    return [c for c in LEGAL_CONFIGS if c in empty]


def failure_counts(n_max: int, patch=None) -> tuple:
    """Covering counts for ``n`` consecutive failed rotation attempts, ``n = 0..n_max``.

    Uses :func:`~kagome_mbqc.dimer.chain_retry_patch` with free boundaries;
    returns ``(counts, patch)`` with ``counts[0]`` the total.
    """
    from .peps import count_configurations

    patch = patch or chain_retry_patch(n_max)
    wire = [patch.bowtie_index(k, 1 - k % 2) for k in range(n_max)]
    counts = [count_configurations(patch)]
    allowed = {}
    for n in range(1, n_max + 1):
        allowed[wire[n - 1]] = _fail_configs(n - 1)
        counts.append(count_configurations(patch, allowed=dict(allowed)))
    return counts, patch


def single_qubit_success_probability(n: int) -> dict:
    """Exact probabilities that the first ``n`` rotation attempts all fail.

    Returns a dict with ``failure`` (list of :class:`~fractions.Fraction`,
    entry ``k`` for ``k + 1`` attempts), ``success`` (complements), ``K``
    (the single-attempt failure probability), ``conditional`` (ratios of
    consecutive failure probabilities) and ``law`` (``K / 2^(k)``).
    """
    if n < 1:
        raise ValueError("need at least one attempt")
    counts, _ = failure_counts(n)
    total = counts[0]
    fail = [Fraction(c, total) for c in counts[1:]]
    k = fail[0]
    return {
        "failure": fail,
        "success": [1 - f for f in fail],
        "K": k,
        "conditional": [Fraction(counts[i + 1], counts[i]) for i in range(1, n)],
        "law": [k / 2**i for i in range(n)],
        "counts": counts,
    }


def retry_patch_conditional() -> Fraction:
    """``P(p_L = 0 on the lower bowtie | p_R = 0 on the upper one)`` on the five-bowtie patch.

    Counted by brute-force enumeration, independently of the tensor network.
    """
    from .dimer import enumerate_coverings

    patch = retry_patch()
    up = patch.bowties[patch.bowtie_index(0, 1)]
    low = patch.bowties[patch.bowtie_index(1, 0)]
    bit = {s: patch.site_index(s) for s in patch.sites}
    num = den = 0
    for cov in enumerate_coverings(patch):
        m = cov.excited_sites
        if m >> bit[up.site("UR")] & 1 or m >> bit[up.site("LR")] & 1:
            continue
        den += 1
        if not (m >> bit[low.site("UL")] & 1 or m >> bit[low.site("LL")] & 1):
            num += 1
    return Fraction(num, den)
