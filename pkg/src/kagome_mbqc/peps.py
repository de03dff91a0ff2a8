"""PEPS description of the Kagome dimer state.

Each bowtie carries a rank-5 tensor with a physical leg over the 2^6 atom
configurations of its six links and four virtual legs TL, TR, BL, BR of
dimension two.  Only eight entries are nonzero, one per local excitation
pattern compatible with the dimer constraint, and all equal one.  The labels
of the virtual legs encode whether the nearest outer vertex is covered by the
bowtie's own links:

=====  =========  ===========
leg    covered    not covered
=====  =========  ===========
TL     ``1``      ``0``
TR     ``-``      ``+``
BL     ``+``      ``-``
BR     ``0``      ``1``
=====  =========  ===========

Tensors are stored in the computational basis of the virtual legs.  Bonds are
plain index contractions: BL of an upper bowtie with TR of the bowtie below
it on the same wire, BR with TL.

Correlation-space convention
----------------------------
Projecting the physical leg on a ket ``psi`` gives the operator

    A[(bl, br), (tl, tr)] = sum_c conj(psi_c) T[c, tl, tr, bl, br]

acting from the top legs (input) to the bottom legs (output), with the left
wire the most significant tensor factor.  See :data:`IO_CONVENTION`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .dimer import LEG_LABELS, LEGS, ROLES, DimerState, KagomePatch, boundary_condition
from .ops import LABEL_KETS

#: ``A[(bl, br), (tl, tr)]``: top legs are the input, bottom legs the output,
#: left wire first.
IO_CONVENTION = "A[(bl,br),(tl,tr)] = sum_c conj(psi_c) T[c,tl,tr,bl,br]"

N_CONFIGS = 64
MAX_OUTPUT_ENTRIES = 8**7

#: the eight nonzero entries: excited roles, top labels (TL TR), bottom labels (BL BR)
ENTRY_TABLE = (
    (("UR",), "0-", "-1"),
    (("LR",), "0+", "-0"),
    (("UL",), "1+", "-1"),
    (("LL",), "0+", "+1"),
    (("UR", "L"), "1-", "+1"),
    (("LR", "L"), "1+", "+0"),
    (("UL", "R"), "1-", "-0"),
    (("LL", "R"), "0-", "+0"),
)


def role_mask(roles) -> int:
    """Bitmask over the six roles (bit k is ``ROLES[k]``)."""
    m = 0
    for r in roles:
        m |= 1 << ROLES.index(r)
    return m


LEGAL_CONFIGS = tuple(role_mask(e[0]) for e in ENTRY_TABLE)


class ImpossibleOutcomeError(ValueError):
    """Projection gives the zero operator on this tensor."""


class ContractionTooLargeError(MemoryError):
    pass


@dataclass(frozen=True)
class PepsTensor:
    """Bowtie tensor.

    Attributes
    ----------
    entries : dict
        Sparse labelled entries ``(config, (tl, tr, bl, br)) -> value`` with
        leg labels from ``{"0", "1", "+", "-"}``.
    dense : ndarray, shape (64, 2, 2, 2, 2)
        The same tensor in the computational basis of every virtual leg.
    """

    entries: dict
    dense: np.ndarray = field(repr=False)

    @property
    def nonzero_configs(self) -> list:
        return sorted({c for (c, _), v in self.entries.items() if v != 0})

    def as_matrix(self) -> np.ndarray:
        """``(64, 16)`` view: physical index against (tl, tr, bl, br)."""
        return self.dense.reshape(N_CONFIGS, 16)


def labelled_vector(labels: str) -> np.ndarray:
    """Tensor product of leg kets, e.g. ``"0-"``."""
    out = np.ones(1, dtype=complex)
    for lab in labels:
        out = np.kron(out, LABEL_KETS[lab])
    return out


def build_peps_tensor() -> PepsTensor:
    entries = {}
    dense = np.zeros((N_CONFIGS, 2, 2, 2, 2), dtype=complex)
    for roles, top, bottom in ENTRY_TABLE:
        c = role_mask(roles)
        entries[(c, tuple(top + bottom))] = 1.0
        dense[c] += labelled_vector(top + bottom).reshape(2, 2, 2, 2)
    return PepsTensor(entries, dense)


def leg_label(leg: str, covered: bool) -> str:
    return LEG_LABELS[leg][covered]


@dataclass(frozen=True)
class VirtualOperator:
    """4x4 operator on (left wire) x (right wire) induced by one bowtie.

    ``leakage`` is the squared norm of the projection state outside the eight
    legal configurations.
    """

    matrix: np.ndarray
    outcome: object = None
    leakage: float = 0.0

    def is_proportional_to_unitary(self, atol: float = 1e-10) -> bool:
        from .ops import proportional_to_unitary

        return proportional_to_unitary(self.matrix, atol)


def operator_from_dense(dense: np.ndarray, physical_state) -> np.ndarray:
    """Contract the physical leg of a (64, 2, 2, 2, 2) tensor with ``conj(psi)``."""
    psi = np.asarray(physical_state, dtype=complex)
    a = np.einsum("c,cabde->deab", psi.conj(), dense)
    return a.reshape(4, 4)


def project_physical(tensor: PepsTensor, physical_state, outcome=None, allow_zero: bool = False) -> VirtualOperator:
    """Operator induced on the virtual wires by projecting on ``physical_state``.

    Parameters
    ----------
    tensor : PepsTensor or ndarray
        A bowtie tensor, or any dense ``(64, 2, 2, 2, 2)`` array (e.g. a
        perturbed tensor).
    physical_state : array_like, shape (64,)
        Ket over the six-atom configurations.
    allow_zero : bool
        Return a zero operator instead of raising.
    """
    psi = np.asarray(physical_state, dtype=complex)
    if psi.shape != (N_CONFIGS,):
        raise ValueError("physical state must have 64 components")
    dense = tensor.dense if isinstance(tensor, PepsTensor) else np.asarray(tensor)
    a = operator_from_dense(dense, psi)
    legal = np.zeros(N_CONFIGS, dtype=bool)
    legal[list(LEGAL_CONFIGS)] = True
    leak = float(np.sum(np.abs(psi[~legal]) ** 2))
    if not allow_zero and np.max(np.abs(a)) < 1e-14:
        raise ImpossibleOutcomeError("projection annihilates the tensor")
    return VirtualOperator(a, outcome, leak)


def mirror_entry(roles, top: str, bottom: str):
    """Image of a labelled entry under the left-right mirror of the bowtie.

    Links swap L<->R, UL<->UR, LL<->LR; legs swap TL<->TR and BL<->BR, with
    each label replaced by the one carrying the same coverage on the new leg.
    """
    swap = {"L": "R", "R": "L", "UL": "UR", "UR": "UL", "LL": "LR", "LR": "LL"}
    new_roles = tuple(sorted((swap[r] for r in roles), key=ROLES.index))

    def relabel(lab, leg, new_leg):
        covered = {v: k for k, v in LEG_LABELS[leg].items()}[lab]
        return LEG_LABELS[new_leg][covered]

    tl, tr = top
    bl, br = bottom
    new_top = relabel(tr, "TR", "TL") + relabel(tl, "TL", "TR")
    new_bottom = relabel(br, "BR", "BL") + relabel(bl, "BL", "BR")
    return new_roles, new_top, new_bottom


# patch contraction -----------------------------------------------------


def _leg_vectors(patch: KagomePatch, modes: dict) -> dict:
    out = {}
    for k, leg, v in patch.boundary_legs():
        mode = modes[v]
        cov = LABEL_KETS[LEG_LABELS[leg][True]]
        unc = LABEL_KETS[LEG_LABELS[leg][False]]
        out[(k, leg)] = {"exact": cov, "empty": unc, "free": cov + unc}[mode]
    return out


@lru_cache(maxsize=1)
def _base_dense() -> np.ndarray:
    d = build_peps_tensor().dense
    d.setflags(write=False)
    return d


@lru_cache(maxsize=1)
def _legal_block() -> np.ndarray:
    """The tensor with its physical leg restricted to the eight legal configurations."""
    b = _base_dense()[list(LEGAL_CONFIGS)]
    b.setflags(write=False)
    return b


_PATHS: dict = {}


def _contract(ops, out):
    # the contraction order depends only on the operand shapes, so reuse it across boundary fixings
    key = (tuple(np.shape(o) if k % 2 == 0 else tuple(o) for k, o in enumerate(ops)), tuple(out))
    path = _PATHS.get(key)
    if path is None:
        path = _PATHS[key] = np.einsum_path(*ops, out, optimize="greedy")[0]
    return np.einsum(*ops, out, optimize=path)


def _network(patch: KagomePatch, boundary, blocks):
    """Operands for einsum.  ``blocks[k]`` is the (n_k, 2, 2, 2, 2) tensor of bowtie ``k``."""
    modes = boundary_condition(patch, boundary)
    label = {}
    nxt = [len(patch.bowties)]  # physical output labels are 0..nb-1

    def new():
        nxt[0] += 1
        return nxt[0] - 1

    for a, b in patch.bonds():
        label[a] = label[b] = new()
    ops = []
    for k in range(len(patch.bowties)):
        for leg in LEGS:
            if (k, leg) not in label:
                label[(k, leg)] = new()
        ops += [blocks[k], [k] + [label[(k, leg)] for leg in LEGS]]
    for key, vec in _leg_vectors(patch, modes).items():
        ops += [vec, [label[key]]]
    return ops


def _site_bits(patch: KagomePatch, k: int) -> list:
    bt = patch.bowties[k]
    return [patch.site_index(bt.site(r)) for r in ROLES]


def contract_patch(patch: KagomePatch, boundary=None) -> DimerState:
    """Contract the bowtie tensors of ``patch`` into an amplitude map.

    Each bowtie's physical leg is restricted to its eight legal
    configurations; the result is indexed by global site bitmasks.  The
    network is contracted with :func:`numpy.einsum` along a fixed greedy path,
    so the result is deterministic.
    """
    nb = len(patch.bowties)
    modes = boundary_condition(patch, boundary)
    if patch.sites and nb == 0:
        raise ValueError("patch has no bowtie decomposition")
    if nb == 0:
        return DimerState(patch, modes, {0: 1.0 + 0j})
    if 8**nb > MAX_OUTPUT_ENTRIES:
        raise ContractionTooLargeError(f"{nb} bowties exceed the output bound")
    ops = _network(patch, boundary, [_legal_block()] * nb)
    amp = _contract(ops, list(range(nb)))
    bits = [_site_bits(patch, k) for k in range(nb)]
    local = [[b for j, b in enumerate(bits[k]) if c >> j & 1] for k in range(nb) for c in LEGAL_CONFIGS]
    out = {}
    for idx in zip(*np.nonzero(np.abs(amp) > 1e-12)):
        mask = 0
        for k, j in enumerate(idx):
            for b in local[8 * k + j]:
                mask |= 1 << b
        out[mask] = complex(amp[idx])
    return DimerState(patch, modes, out)


def count_configurations(patch: KagomePatch, boundary=None, allowed=None) -> int:
    """Number of coverings, with bowtie ``k`` restricted to ``allowed[k]``.

    ``allowed`` maps a bowtie index to an iterable of six-role bitmasks;
    unrestricted bowties use all eight legal configurations.  The count is
    obtained by contracting the network with every physical leg summed, so it
    scales to patches far beyond brute-force enumeration.
    """
    allowed = allowed or {}
    nb = len(patch.bowties)
    if nb == 0:
        return 1
    blocks = [_base_dense()[list(allowed.get(k, LEGAL_CONFIGS))].sum(axis=0)[None] for k in range(nb)]
    ops = _network(patch, boundary, blocks)
    val = _contract(ops, list(range(nb))).sum()
    n = int(round(val.real))
    if abs(val - n) > 1e-6:
        raise FloatingPointError(f"non-integer covering count {val}")
    return n


def compare_with_enumeration(patch: KagomePatch, boundary=None) -> dict:
    """Contraction against brute-force covering enumeration.

    The contracted amplitudes are compared entrywise with the enumerated
    coverings (all weight one) after fitting one global scalar.
    """
    from .dimer import enumerate_coverings

    state = contract_patch(patch, boundary)
    covs = {c.excited_sites for c in enumerate_coverings(patch, boundary)}
    keys = set(state.amplitudes) | covs
    if not keys:
        return {"coverings": 0, "deviation": 0.0, "scalar": 0.0}
    vals = np.array([state.amplitudes.get(k, 0.0) for k in covs]) if covs else np.zeros(0)
    scalar = complex(vals.mean()) if vals.size else 0.0
    dev = max(abs(state.amplitudes.get(k, 0.0) - (scalar if k in covs else 0.0)) for k in keys)
    return {"coverings": len(covs), "deviation": float(dev), "scalar": abs(scalar)}
