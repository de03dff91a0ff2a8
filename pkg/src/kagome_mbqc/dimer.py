"""Kagome patches and brute-force dimer-covering ground truth.

Atoms sit on the links of the Kagome lattice.  A dimer covering is a set of
excited links such that each vertex touches exactly one of them.  Patches are
described purely combinatorially (site/vertex incidence), optionally grouped
into bowties: the six-link units carried by one PEPS tensor.

Bowtie geometry
---------------
A bowtie at position ``(row, wire)`` sits between the logical wires ``wire``
(left) and ``wire + 1`` (right).  Its four outer vertices are TL, TR, BL, BR
and its central vertex is C.  The six links, in the fixed role order used
throughout the package, are::

    L  = TL-BL      (left vertical link)
    UL = TL-C       LL = BL-C
    UR = TR-C       LR = BR-C
    R  = TR-BR      (right vertical link)

The left triangle is {L, UL, LL}, the right one {R, UR, LR}.  Bowties tile in
a brick wall: the BL corner of ``(r, w)`` is the TR corner of
``(r + 1, w - 1)`` and its BR corner is the TL corner of ``(r + 1, w + 1)``.
Computation flows from top (row 0) to bottom.

Boundary conditions
-------------------
Vertices of the patch that belong to a single bowtie leg are boundary
vertices.  A boundary condition maps each of them to ``"exact"`` (covered by
one patch link), ``"empty"`` (covered from outside, no patch link) or
``"free"`` (either; this is the "summed" virtual leg).  Non-boundary vertices
are always exact.

The Z-parity convention is ``+1`` for a ground-state atom and ``-1`` for an
excited one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ROLES = ("L", "UL", "LL", "UR", "LR", "R")
LEGS = ("TL", "TR", "BL", "BR")
ROLE_VERTICES = {
    "L": ("TL", "BL"),
    "UL": ("TL", "C"),
    "LL": ("BL", "C"),
    "UR": ("TR", "C"),
    "LR": ("BR", "C"),
    "R": ("TR", "BR"),
}
# label of a leg when the vertex is covered / not covered by this bowtie
LEG_LABELS = {
    "TL": {True: "1", False: "0"},
    "TR": {True: "-", False: "+"},
    "BL": {True: "+", False: "-"},
    "BR": {True: "0", False: "1"},
}
BOUNDARY_MODES = ("exact", "empty", "free")
MAX_ENUM_SITES = 36


class InconsistentBoundaryError(ValueError):
    pass


class PatchTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Bowtie:
    """One six-site unit of a patch.

    ``sites`` lists the site names in role order (L, UL, LL, UR, LR, R);
    ``legs`` maps TL/TR/BL/BR/C to vertex names.
    """

    row: int
    wire: int
    sites: tuple
    legs: dict

    def site(self, role: str) -> str:
        return self.sites[ROLES.index(role)]


@dataclass(frozen=True)
class KagomePatch:
    """Finite piece of the Kagome lattice.

    Parameters
    ----------
    sites, vertices : tuple of str
    incidence : tuple of (site, vertex)
        Each site touches at most two patch vertices.  A site whose second
        vertex is outside the patch is dangling on that end.
    bowties : tuple of Bowtie
        Either empty or a partition of the sites.
    boundary : tuple of str
        Boundary vertices, whose coverage is set by a boundary condition.
    """

    sites: tuple
    vertices: tuple
    incidence: tuple
    bowties: tuple = ()
    boundary: tuple = ()
    _site_vertices: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        sv = {s: [] for s in self.sites}
        vset = set(self.vertices)
        for s, v in self.incidence:
            if s not in sv or v not in vset:
                raise ValueError(f"incidence ({s}, {v}) references unknown names")
            sv[s].append(v)
        for s, vs in sv.items():
            if len(vs) > 2 or len(set(vs)) != len(vs):
                raise ValueError(f"site {s} must touch at most two distinct vertices")
        for b in self.boundary:
            if b not in vset:
                raise ValueError(f"boundary vertex {b} unknown")
        if self.bowties:
            owned = [s for bt in self.bowties for s in bt.sites]
            if sorted(owned) != sorted(self.sites):
                raise ValueError("bowties must partition the sites")
        object.__setattr__(self, "_site_vertices", {s: tuple(v) for s, v in sv.items()})

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def site_index(self, name: str) -> int:
        return self.sites.index(name)

    def site_vertices(self, name: str) -> tuple:
        return self._site_vertices[name]

    def vertex_sites(self, v: str) -> tuple:
        return tuple(s for s in self.sites if v in self._site_vertices[s])

    def boundary_legs(self) -> list:
        """``(bowtie_index, leg, vertex)`` for every open virtual leg."""
        out = []
        bset = set(self.boundary)
        for k, bt in enumerate(self.bowties):
            for leg in LEGS:
                if bt.legs[leg] in bset:
                    out.append((k, leg, bt.legs[leg]))
        return out

    def bonds(self) -> list:
        """``((k1, leg1), (k2, leg2))`` for every contracted virtual bond.

        The upper bowtie's bottom leg comes first.
        """
        owner = {}
        for k, bt in enumerate(self.bowties):
            for leg in LEGS:
                owner.setdefault(bt.legs[leg], []).append((k, leg))
        out = []
        for v in self.vertices:
            legs = owner.get(v, [])
            if len(legs) == 2:
                a, b = sorted(legs, key=lambda kl: kl[1][0] != "B")
                pair = {a[1], b[1]}
                if pair not in ({"BL", "TR"}, {"BR", "TL"}):
                    raise ValueError(f"vertex {v} joins incompatible legs {pair}")
                out.append((a, b))
            elif len(legs) > 2:
                raise ValueError(f"vertex {v} shared by more than two bowties")
        return out

    def bowtie_index(self, row: int, wire: int) -> int:
        for k, bt in enumerate(self.bowties):
            if (bt.row, bt.wire) == (row, wire):
                return k
        raise KeyError((row, wire))

    # construction -------------------------------------------------------

    @classmethod
    def from_bowties(cls, positions) -> "KagomePatch":
        """Brick-wall patch from a list of ``(row, wire)`` positions."""
        positions = [tuple(int(c) for c in p) for p in positions]
        if len(set(positions)) != len(positions):
            raise ValueError("duplicate bowtie position")
        if positions and len({(r + w) % 2 for r, w in positions}) != 1:
            raise ValueError("bowtie positions must share the brick-wall parity")
        sites, incidence, bowties = [], [], []
        vertices = []
        leg_count = {}

        def corner(leg, r, w):
            # vertex on a wire between rows rb - 1 and rb
            wire = w if leg in ("TL", "BL") else w + 1
            rb = r if leg[0] == "T" else r + 1
            return f"v{wire}_{rb}"

        for r, w in positions:
            legs = {leg: corner(leg, r, w) for leg in LEGS}
            legs["C"] = f"c{r}_{w}"
            for leg in LEGS:
                leg_count[legs[leg]] = leg_count.get(legs[leg], 0) + 1
            names = tuple(f"{role}{r}_{w}" for role in ROLES)
            for name, role in zip(names, ROLES):
                sites.append(name)
                for vr in ROLE_VERTICES[role]:
                    incidence.append((name, legs[vr]))
            for v in (legs["TL"], legs["TR"], legs["BL"], legs["BR"], legs["C"]):
                if v not in vertices:
                    vertices.append(v)
            bowties.append(Bowtie(r, w, names, legs))
        boundary = tuple(v for v in vertices if leg_count.get(v) == 1)
        return cls(tuple(sites), tuple(vertices), tuple(incidence), tuple(bowties), boundary)

    @classmethod
    def from_dict(cls, data: dict) -> "KagomePatch":
        """Inverse of :meth:`to_dict`; ``{"positions": [[row, wire], ...]}`` is also accepted."""
        if "positions" in data:
            return cls.from_bowties([tuple(int(v) for v in p) for p in data["positions"]])
        for key in ("sites", "vertices", "incidence"):
            if key not in data:
                raise ValueError(f"patch description lacks '{key}'")
        bowties = []
        for b in data.get("bowties", []):
            if len(b["sites"]) != 6 or set(b["legs"]) != set(LEGS) | {"C"}:
                raise ValueError("a bowtie needs 6 sites and legs TL, TR, BL, BR, C")
            bowties.append(Bowtie(int(b["row"]), int(b["wire"]), tuple(b["sites"]), dict(b["legs"])))
        return cls(
            tuple(data["sites"]),
            tuple(data["vertices"]),
            tuple(tuple(p) for p in data["incidence"]),
            tuple(bowties),
            tuple(data.get("boundary", ())),
        )

    def to_dict(self) -> dict:
        return {
            "sites": list(self.sites),
            "vertices": list(self.vertices),
            "incidence": [list(p) for p in self.incidence],
            "bowties": [
                {"row": b.row, "wire": b.wire, "sites": list(b.sites), "legs": dict(b.legs)}
                for b in self.bowties
            ],
            "boundary": list(self.boundary),
        }

    @classmethod
    def load(cls, path) -> "KagomePatch":
        return cls.from_dict(json.loads(Path(path).read_text()))


def single_bowtie() -> KagomePatch:
    return KagomePatch.from_bowties([(0, 0)])


def wire_strip(n: int, wire: int = 0) -> KagomePatch:
    """``n`` bowties following one logical wire downwards.

    The wire alternates between being the left and the right wire of
    consecutive bowties.
    """
    return KagomePatch.from_bowties([(r, wire if r % 2 == 0 else wire - 1) for r in range(n)])


def brick_patch(rows: int, cols: int) -> KagomePatch:
    """``rows x cols`` brick wall; odd rows are shifted right by one wire."""
    return KagomePatch.from_bowties(
        [(r, 2 * c + (r % 2)) for r in range(rows) for c in range(cols)]
    )


def retry_patch() -> KagomePatch:
    """Two bowties stacked on a wire plus the three closing the hexagon below the lower one.

    Positions: upper (0, 1), lower (1, 0), then (2, -1), (2, 1), (3, 0).
    """
    return KagomePatch.from_bowties([(0, 1), (1, 0), (2, -1), (2, 1), (3, 0)])


def chain_retry_patch(n: int) -> KagomePatch:
    """Wire of ``n + 1`` bowties with every hexagon below the wire bowties closed.

    Bowtie ``k`` of the wire sits at ``(k, 1 - k % 2)``.
    """
    pos = set()
    for k in range(n + 1):
        r, w = k, 1 - k % 2
        pos.add((r, w))
        if k < n:
            pos.update({(r + 1, w - 1), (r + 1, w + 1), (r + 2, w)})
    return KagomePatch.from_bowties(sorted(pos))


def hexagon_below(patch: KagomePatch, row: int, wire: int) -> list:
    """The six links of the hexagon just below bowtie ``(row, wire)``, in cyclic order."""
    up = patch.bowties[patch.bowtie_index(row, wire)]
    left = patch.bowties[patch.bowtie_index(row + 1, wire - 1)]
    right = patch.bowties[patch.bowtie_index(row + 1, wire + 1)]
    low = patch.bowties[patch.bowtie_index(row + 2, wire)]
    return [up.site("LL"), left.site("R"), low.site("UL"), low.site("UR"), right.site("L"), up.site("LR")]


def single_vertex_patch() -> KagomePatch:
    """One vertex with its four links (all dangling on their other end)."""
    sites = ("a", "b", "c", "d")
    return KagomePatch(sites, ("v",), tuple((s, "v") for s in sites))


# boundary conditions ----------------------------------------------------


def boundary_condition(patch: KagomePatch, spec=None) -> dict:
    """Normalize a boundary specification into ``{vertex: mode}``.

    ``spec`` may be ``None`` or ``"summed"`` (all boundary vertices free), a
    mapping from boundary vertex to ``"exact" | "empty" | "free"``, or a
    mapping from ``(bowtie_index, leg)`` to a virtual-leg label
    ``"0" | "1" | "+" | "-" | "summed"``.  Labels are translated with the
    per-leg coverage rule; a label from the wrong basis for its leg raises
    :class:`InconsistentBoundaryError`.
    """
    out = {v: "free" for v in patch.boundary}
    if spec is None or spec == "summed":
        return out
    if not isinstance(spec, dict):
        raise InconsistentBoundaryError(f"unsupported boundary specification {spec!r}")
    legmap = {(k, leg): v for k, leg, v in patch.boundary_legs()}
    for key, val in spec.items():
        if isinstance(key, tuple):
            key = (int(key[0]), str(key[1]))
            if key not in legmap:
                raise InconsistentBoundaryError(f"{key} is not an open leg of the patch")
            leg = key[1]
            if val == "summed":
                mode = "free"
            else:
                inv = {lab: cov for cov, lab in LEG_LABELS[leg].items()}
                if val not in inv:
                    raise InconsistentBoundaryError(f"label {val!r} does not belong to leg {leg}")
                mode = "exact" if inv[val] else "empty"
            out[legmap[key]] = mode
        else:
            if key not in out:
                raise InconsistentBoundaryError(f"{key} is not a boundary vertex")
            if val not in BOUNDARY_MODES:
                raise InconsistentBoundaryError(f"unknown boundary mode {val!r}")
            out[key] = val
    return out


# enumeration ------------------------------------------------------------


@dataclass(frozen=True)
class DimerCovering:
    """Excited sites as a bitmask (bit ``k`` is ``patch.sites[k]``)."""

    excited_sites: int

    def sites(self, patch: KagomePatch) -> list:
        return [s for k, s in enumerate(patch.sites) if self.excited_sites >> k & 1]


def _site_order(patch: KagomePatch) -> list:
    # breadth-first over vertices keeps constraints tight during backtracking
    order, seen = [], set()
    for v in patch.vertices:
        for s in patch.vertex_sites(v):
            if s not in seen:
                seen.add(s)
                order.append(s)
    order += [s for s in patch.sites if s not in seen]
    return [patch.site_index(s) for s in order]


def iter_coverings(patch: KagomePatch, boundary=None):
    """Yield covering bitmasks without the size guard (used for counting)."""
    modes = boundary_condition(patch, boundary)
    cap = {v: (0 if modes.get(v) == "empty" else 1) for v in patch.vertices}
    need = {v: modes.get(v, "exact") == "exact" for v in patch.vertices}
    order = _site_order(patch)
    sv = [patch.site_vertices(patch.sites[i]) for i in order]
    # position after which no remaining site touches vertex v
    last = {}
    for pos, vs in enumerate(sv):
        for v in vs:
            last[v] = pos
    for v in patch.vertices:
        if need[v] and v not in last:
            return
    count = {v: 0 for v in patch.vertices}
    n = len(order)

    def rec(pos, mask):
        if pos == n:
            yield mask
            return
        vs = sv[pos]
        if all(count[v] < cap[v] for v in vs):
            for v in vs:
                count[v] += 1
            if all(not (need[v] and last[v] == pos and count[v] == 0) for v in vs):
                yield from rec(pos + 1, mask | (1 << order[pos]))
            for v in vs:
                count[v] -= 1
        if all(not (need[v] and last[v] == pos and count[v] == 0) for v in vs):
            yield from rec(pos + 1, mask)

    yield from rec(0, 0)


def enumerate_coverings(patch: KagomePatch, boundary=None, max_sites: int = MAX_ENUM_SITES) -> list:
    """All dimer coverings of ``patch`` compatible with ``boundary``, sorted by bitmask."""
    if patch.n_sites > max_sites:
        raise PatchTooLargeError(f"{patch.n_sites} sites exceed the enumeration limit {max_sites}")
    return [DimerCovering(m) for m in sorted(iter_coverings(patch, boundary))]


def is_covering(patch: KagomePatch, mask: int, boundary=None) -> bool:
    modes = boundary_condition(patch, boundary)
    for v in patch.vertices:
        c = sum(mask >> patch.site_index(s) & 1 for s in patch.vertex_sites(v))
        mode = modes.get(v, "exact")
        if c > 1 or (mode == "exact" and c != 1) or (mode == "empty" and c != 0):
            return False
    return True


@dataclass
class DimerState:
    """Amplitudes over site configurations (bitmask -> complex)."""

    patch: KagomePatch
    boundary_condition: dict
    amplitudes: dict
    normalized: bool = False

    @property
    def is_zero(self) -> bool:
        return not any(abs(a) > 0 for a in self.amplitudes.values())

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values())))

    def normalize(self) -> "DimerState":
        n = self.norm()
        if n == 0:
            return self
        return DimerState(self.patch, self.boundary_condition, {k: a / n for k, a in self.amplitudes.items()}, True)

    def probabilities(self) -> dict:
        tot = sum(abs(a) ** 2 for a in self.amplitudes.values())
        return {k: abs(a) ** 2 / tot for k, a in self.amplitudes.items() if a != 0}


def build_dimer_state(patch: KagomePatch, boundary=None, normalize: bool = False) -> DimerState:
    """Equal superposition of every covering; amplitude 1 each unless normalized."""
    modes = boundary_condition(patch, boundary)
    amps = {c.excited_sites: 1.0 + 0j for c in enumerate_coverings(patch, boundary)}
    st = DimerState(patch, modes, amps)
    return st.normalize() if normalize else st


def link_ring(patch: KagomePatch, site: str) -> list:
    """The six links sharing a vertex with ``site`` (``site`` excluded).

    They are the links cut by a small closed curve drawn around ``site``
    enclosing its two end vertices.
    """
    vs = patch.site_vertices(site)
    if len(vs) != 2:
        raise ValueError(f"{site} has a dangling end")
    ring = [s for v in vs for s in patch.vertex_sites(v) if s != site]
    if len(ring) != 6:
        raise ValueError(f"{site} is too close to the patch edge")
    return ring


def loop_kind(patch: KagomePatch, loop) -> str:
    """Classify a six-site loop as ``"hexagon"`` or ``"cut"``, or raise.

    ``"hexagon"``: consecutive links share a vertex, cyclically, around six
    distinct vertices.  ``"cut"``: the links are exactly those leaving a
    connected set of bulk vertices (a closed curve crossing six links).
    """
    loop = list(loop)
    if len(loop) != 6 or len(set(loop)) != 6:
        raise ValueError("a loop consists of six distinct sites")
    for s in loop:
        if s not in patch.sites:
            raise ValueError(f"loop site {s} not in the patch")
    shared = []
    for a, b in zip(loop, loop[1:] + loop[:1]):
        common = set(patch.site_vertices(a)) & set(patch.site_vertices(b))
        shared.append(common.pop() if len(common) == 1 else None)
    if None not in shared and len(set(shared)) == 6:
        return "hexagon"
    # vertex set S enclosed by a cut: vertices whose every link is either in
    # the loop or internal to S
    lset = set(loop)
    inner = {v for s in loop for v in patch.site_vertices(s)}
    if next(_cut_candidates(patch, lset, inner), None) is not None:
        return "cut"
    raise ValueError("loop is not closed")


def _cut_candidates(patch, lset, touched):
    # try every nonempty subset of the touched vertices (at most 12)
    touched = sorted(touched)
    bset = set(patch.boundary)
    for m in range(1, 1 << len(touched)):
        sset = {v for k, v in enumerate(touched) if m >> k & 1}
        if sset & bset:
            continue
        crossing = set()
        ok = True
        for v in sset:
            for s in patch.vertex_sites(v):
                ends = patch.site_vertices(s)
                inside = sum(e in sset for e in ends)
                if len(ends) < 2 and inside == 1:
                    ok = False
                if inside == 1:
                    crossing.add(s)
        if ok and crossing == lset:
            yield sset


def loop_parity_expectation(state: DimerState, loop, mode: str = "product", return_validity: bool = False):
    """Expectation of the Z-parity along a closed six-link loop.

    Two closed six-link loops exist on the Kagome lattice: the ring of links
    around a hexagon and the ring of links around a single link (see
    :func:`link_ring`).  On a perfect dimer state the product parity of the
    second is always ``+1``; the first averages to zero on the test patches.

    ``mode="product"`` averages the product of the six single-site parities;
    ``mode="mean"`` averages the mean of the single-site parities.  With
    ``return_validity`` a flag is returned telling whether every configuration
    in the state is a valid covering.
    """
    if mode not in ("product", "mean"):
        raise ValueError(f"unknown mode {mode!r}")
    loop_kind(state.patch, loop)
    idx = [state.patch.site_index(s) for s in loop]
    probs = state.probabilities()
    if not probs:
        raise ValueError("zero state has no Born distribution")
    val = 0.0
    for mask, p in probs.items():
        signs = [1 - 2 * (mask >> i & 1) for i in idx]
        val += p * (float(np.prod(signs)) if mode == "product" else float(np.mean(signs)))
    if return_validity:
        valid = all(is_covering(state.patch, m, state.boundary_condition) for m in probs)
        return val, valid
    return val
