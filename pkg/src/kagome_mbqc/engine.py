"""End-to-end runs of logical programs in correlation space.

The logical register lives on the virtual wires of the dimer PEPS.  Each
instruction consumes fresh bowties; every bowtie is measured with one of the
schemes of :mod:`kagome_mbqc.gates`, an outcome is drawn with the Born rule,
and the induced 4x4 operator is applied to the register.

Frame bookkeeping
-----------------
After every step the register equals ``F U psi_in`` with ``U`` the target
circuit so far and ``F = (x)_w P_w H^(h_w)``: a Pauli ``P_w`` and an
optional Hadamard per wire.  Each D-type bowtie flips ``h_w`` (its ``H``
dressing), so consecutive dressings cancel pairwise.  The parity ``h_w``
decides which rotation variant is used: ``h_w = 1`` puts the wire on the
left of the bowtie (left variant, ``G_phi H``), ``h_w = 0`` on the right
(mirrored variant, ``H G_phi``).  Either way a successful attempt applies
``G_theta`` to the logical state, provided ``phi = +-theta`` is chosen
adaptively to absorb the pending Pauli.  A failed attempt only applies
``H`` and flips ``h_w``, so the retry automatically uses the other variant
on the next bowtie.  ``Entangle`` needs ``h = (1, 1)`` on its pair and pads
wires with ``h = 0`` by a single decoupling bowtie first.

Single-wire bowties also carry a wire that is not part of the register
(``spectator``); it is treated as maximally mixed when computing outcome
probabilities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .frame import PauliFrame
from .gates import OutcomeRecord, Scheme, byproduct_frame, fluorescence_basis, ideal_operator
from .ops import H, I2, entangler, g_phi, g_phi_mirrored, kron, pauli
from .peps import build_peps_tensor, operator_from_dense

DEFAULT_MAX_RETRIES = 20
MAX_WIRES = 6

__all__ = [
    "Decouple",
    "Rotate",
    "Entangle",
    "Terminate",
    "LogicalProgram",
    "RandomSource",
    "StepRecord",
    "RunTranscript",
    "born_sample",
    "run",
    "circuit_oracle",
    "dressed_circuit",
    "random_program",
]


# program -------------------------------------------------------------------


@dataclass(frozen=True)
class Decouple:
    """Wire decoupling on the adjacent pair ``(wire, wire + 1)``."""

    wire: int

    def to_dict(self):
        return {"op": "decouple", "wires": [self.wire, self.wire + 1]}


@dataclass(frozen=True)
class Rotate:
    """``G_theta`` on one wire, retried on fresh bowties until it succeeds."""

    wire: int
    theta: float
    max_retries: int = DEFAULT_MAX_RETRIES

    def to_dict(self):
        return {"op": "rotate", "wire": self.wire, "phi": self.theta, "max_retries": self.max_retries}


@dataclass(frozen=True)
class Entangle:
    """The two-wire gate ``M = CNOT (H x X) CNOT`` on ``(wire, wire + 1)``, control left."""

    wire: int

    def to_dict(self):
        return {"op": "entangle", "wires": [self.wire, self.wire + 1]}


@dataclass(frozen=True)
class Terminate:
    def to_dict(self):
        return {"op": "terminate"}


def _pair(d: dict) -> int:
    w = d.get("wires")
    if not isinstance(w, list) or len(w) != 2 or w[1] != w[0] + 1:
        raise ValueError(f"{d.get('op')} needs an adjacent pair [w, w+1], got {w!r}")
    return int(w[0])


def instruction_from_dict(d: dict):
    op = d.get("op")
    if op == "decouple":
        return Decouple(_pair(d))
    if op == "entangle":
        return Entangle(_pair(d))
    if op == "rotate":
        return Rotate(int(d["wire"]), float(d["phi"]), int(d.get("max_retries", DEFAULT_MAX_RETRIES)))
    if op == "terminate":
        return Terminate()
    raise ValueError(f"unknown instruction {op!r}")


@dataclass(frozen=True)
class LogicalProgram:
    """A register size and an ordered instruction list.

    ``Terminate`` may only appear last; frame corrections are applied at the
    end of every run whether or not it is present.
    """

    wires: int
    instructions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if not 1 <= self.wires <= MAX_WIRES:
            raise ValueError(f"wires must be in 1..{MAX_WIRES}")
        for k, ins in enumerate(self.instructions):
            if isinstance(ins, Terminate):
                if k != len(self.instructions) - 1:
                    raise ValueError("Terminate must be the last instruction")
            elif isinstance(ins, Rotate):
                if not 0 <= ins.wire < self.wires:
                    raise ValueError(f"wire {ins.wire} out of range")
                if ins.max_retries < 1:
                    raise ValueError("max_retries must be at least 1")
            elif isinstance(ins, (Decouple, Entangle)):
                if not 0 <= ins.wire < self.wires - 1:
                    raise ValueError(f"pair ({ins.wire}, {ins.wire + 1}) out of range")
            else:
                raise TypeError(f"not an instruction: {ins!r}")

    def to_dict(self) -> dict:
        return {"wires": self.wires, "instructions": [i.to_dict() for i in self.instructions]}

    @classmethod
    def from_dict(cls, data: dict) -> "LogicalProgram":
        if "wires" not in data:
            raise ValueError("program needs a 'wires' field")
        return cls(int(data["wires"]), tuple(instruction_from_dict(d) for d in data.get("instructions", [])))

    @classmethod
    def load(cls, path) -> "LogicalProgram":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def random_program(rng: np.random.Generator, max_wires: int = 3, max_len: int = 6) -> LogicalProgram:
    """Random program with up to ``max_len`` instructions on up to ``max_wires`` wires."""
    n = int(rng.integers(1, max_wires + 1))
    ins = []
    for _ in range(int(rng.integers(0, max_len + 1))):
        kinds = ["rotate"] + (["decouple", "entangle"] if n > 1 else [])
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind == "rotate":
            ins.append(Rotate(int(rng.integers(n)), float(rng.uniform(-np.pi, np.pi))))
        elif kind == "decouple":
            ins.append(Decouple(int(rng.integers(n - 1))))
        else:
            ins.append(Entangle(int(rng.integers(n - 1))))
    return LogicalProgram(n, tuple(ins))


# randomness ----------------------------------------------------------------


@dataclass(frozen=True)
class RandomSource:
    """Counter-based stream: ``Philox`` keyed by ``(seed, stream)``."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))


# register helpers ------------------------------------------------------------


def apply_operator(state: np.ndarray, op: np.ndarray, wires, n: int) -> np.ndarray:
    """Apply a ``2^k x 2^k`` operator to ``wires`` of an ``n``-wire vector (wire 0 most significant)."""
    k = len(wires)
    psi = state.reshape((2,) * n)
    psi = np.moveaxis(psi, list(wires), list(range(k)))
    shp = psi.shape
    out = (op @ psi.reshape(2**k, -1)).reshape(shp)
    return np.moveaxis(out, list(range(k)), list(wires)).reshape(-1)


def _full(op: np.ndarray, wires, n: int) -> np.ndarray:
    """Dense ``2^n`` matrix of a gate on ``wires``."""
    cols = [apply_operator(e, op, wires, n) for e in np.eye(2**n, dtype=complex)]
    return np.array(cols).T


@lru_cache(maxsize=256)
def _perfect_ops(scheme: Scheme):
    outs, kets = fluorescence_basis(scheme)
    t = build_peps_tensor().dense
    ops = np.einsum("fc,cabde->fdeab", kets.conj(), t).reshape(64, 4, 4)
    return outs, ops


def _scheme_ops(scheme: Scheme, tensor=None):
    if tensor is None:
        return _perfect_ops(scheme)
    outs, kets = fluorescence_basis(scheme)
    ops = np.einsum("fc,cabde->fdeab", kets.conj(), tensor).reshape(64, 4, 4)
    return outs, ops


def _wire_factors(ops: np.ndarray, active: int) -> np.ndarray:
    """Dominant operator-Schmidt factors on the ``active`` wire (0 left, 1 right).

    ``ops`` is a stack ``(m, 4, 4)``; the result has shape ``(m, 2, 2)``.
    """
    r = ops.reshape(-1, 2, 2, 2, 2).transpose(0, 1, 3, 2, 4).reshape(-1, 4, 4)  # (oL iL),(oR iR)
    u, s, vh = np.linalg.svd(r)
    f = u[:, :, 0] if active == 0 else vh[:, 0, :]
    return (f * np.sqrt(s[:, :1])).reshape(-1, 2, 2)


@lru_cache(maxsize=256)
def _perfect_factors(scheme: Scheme, active: int) -> np.ndarray:
    return _wire_factors(_perfect_ops(scheme)[1], active)


def born_sample(state: np.ndarray, scheme: Scheme, wires, n: int, rng, tensor=None, spectator: str | None = None):
    """Draw a fluorescence outcome of ``scheme`` on one bowtie.

    Parameters
    ----------
    state : ndarray
        Register vector over ``2^n``.
    wires : tuple
        Register wires on the bowtie's (left, right) positions; a single
        wire together with ``spectator="right"`` or ``"left"`` names which
        bowtie position is taken by a wire outside the register.
    tensor : ndarray, optional
        Bowtie tensor ``(64, 2, 2, 2, 2)``; the perfect dimer tensor by default.

    Returns
    -------
    outcome : OutcomeRecord
    posterior : ndarray
        The normalized register after the bowtie (before frame correction).
    probability : float
    """
    outs, ops = _scheme_ops(scheme, tensor)
    psi = np.moveaxis(state.reshape((2,) * n), list(wires), list(range(len(wires))))
    rest = psi.shape[len(wires):]
    if spectator is None:
        out = ops @ psi.reshape(4, -1)  # (64, 4, rest)
        probs = np.sum(np.abs(out) ** 2, axis=(1, 2))
    else:
        a = ops.reshape(64, 2, 2, 2, 2)  # f, oL, oR, iL, iR
        a = a.transpose(0, 1, 3, 2, 4) if spectator == "right" else a.transpose(0, 2, 4, 1, 3)
        # a[f, o_active, i_active, o_spec, i_spec]
        out = np.einsum("faiyz,ir->fayzr", a, psi.reshape(2, -1))
        probs = np.sum(np.abs(out) ** 2, axis=(1, 2, 3, 4)) / 2.0
    total = probs.sum()
    if total <= 1e-300:
        raise ArithmeticError("every outcome has zero probability")
    probs = probs / total
    f = min(int(np.searchsorted(np.cumsum(probs), rng.random(), side="right")), 63)
    if spectator is None:
        new = out[f].reshape((4,) + rest) if rest else out[f].reshape(4)
        new = new.reshape((2, 2) + rest)
    else:
        active = 0 if spectator == "right" else 1
        op = _perfect_factors(scheme, active)[f] if tensor is None else _wire_factors(ops[f : f + 1], active)[0]
        new = (op @ psi.reshape(2, -1)).reshape((2,) + rest)
    new = np.moveaxis(new, list(range(len(wires))), list(wires)).reshape(-1)
    nrm = np.linalg.norm(new)
    if nrm > 0:
        new = new / nrm
    return outs[f], new, float(probs[f])


# transcripts ---------------------------------------------------------------


@dataclass
class StepRecord:
    """One instruction: its bowtie outcomes, retries and the frame after it."""

    index: int
    instruction: dict
    outcomes: list = field(default_factory=list)
    variants: list = field(default_factory=list)
    retries: int = 0
    status: str = "ok"
    frame: dict | None = None

    def to_dict(self) -> dict:
        return {
            "step": self.index,
            "instruction": self.instruction,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "variants": list(self.variants),
            "retries": self.retries,
            "status": self.status,
            "frame": self.frame,
        }


@dataclass
class RunTranscript:
    """Result of :func:`run`.

    ``status`` is ``"ok"``, ``"heralded_abort"`` or ``"rotation_unapplied"``.
    ``final_state`` is the frame-corrected register; for non-``ok`` runs it
    is the register at the point the run stopped, without correction.
    """

    program: LogicalProgram
    seed: int
    stream: int
    steps: list
    final_state: np.ndarray
    status: str = "ok"
    heralded_abort: bool = False
    h_final: tuple = ()
    frame: PauliFrame | None = None

    @property
    def retry_counts(self) -> list:
        return [s.retries for s in self.steps]

    def to_jsonl(self) -> str:
        lines = [json.dumps(s.to_dict(), sort_keys=True) for s in self.steps]
        fin = {
            "final": True,
            "status": self.status,
            "heralded_abort": self.heralded_abort,
            "seed": self.seed,
            "stream": self.stream,
            "state": [[round(float(z.real), 12), round(float(z.imag), 12)] for z in self.final_state],
        }
        lines.append(json.dumps(fin, sort_keys=True))
        return "\n".join(lines) + "\n"


def _frame_dict(frame: PauliFrame, h) -> dict:
    return {"x": list(frame.x), "z": list(frame.z), "h": list(h)}


def _set_wire(frame: PauliFrame, w: int, x: int, z: int) -> PauliFrame:
    xs, zs = list(frame.x), list(frame.z)
    xs[w], zs[w] = x, z
    return PauliFrame(tuple(xs), tuple(zs))


def _wire_pauli(frame: PauliFrame, w: int) -> tuple:
    return frame.x[w], frame.z[w]


class _Run:
    def __init__(self, program, gen, noise, input_state):
        self.n = program.wires
        self.gen = gen
        self.noise = noise
        if input_state is None:
            input_state = np.zeros(2**self.n, dtype=complex)
            input_state[0] = 1.0
        self.state = np.asarray(input_state, dtype=complex) / np.linalg.norm(input_state)
        # per-wire P_w (phases dropped) and Hadamard parity h_w
        self.frame = PauliFrame.identity(self.n)
        self.h = [0] * self.n
        self.herald = False

    def tensor(self):
        if self.noise is None:
            return None
        return self.noise.sample_tensor(self.gen)

    def bowtie(self, scheme, wires, spectator=None):
        o, self.state, _ = born_sample(self.state, scheme, wires, self.n, self.gen, self.tensor(), spectator)
        if o.heralded_invalid:
            self.herald = True
        return o

    def _after_h(self, w: int, by: tuple):
        """Frame update for a bowtie that applied ``B H`` (or ``B H G``) on wire ``w``.

        ``P H^h -> B H P H^h = (B . H P H) H^(h+1)``.
        """
        x, z = _wire_pauli(self.frame, w)
        self.frame = _set_wire(self.frame, w, z ^ by[0], x ^ by[1])
        self.h[w] ^= 1

    def decouple_single(self, w: int, rec: StepRecord):
        side = "left" if self.h[w] == 1 else "right"
        spare = "right" if side == "left" else "left"
        o = self.bowtie(Scheme.decouple(), (w,), spare)
        rec.outcomes.append(o)
        rec.variants.append(f"D0-{side}:{w}")
        if self.herald:
            return
        b = byproduct_frame(o.scheme, o)
        k = 0 if side == "left" else 1
        self._after_h(w, (b.x[k], b.z[k]))

    def decouple(self, a: int, rec: StepRecord):
        o = self.bowtie(Scheme.decouple(), (a, a + 1))
        rec.outcomes.append(o)
        rec.variants.append("D0")
        if self.herald:
            return
        b = byproduct_frame(o.scheme, o)
        self._after_h(a, (b.x[0], b.z[0]))
        self._after_h(a + 1, (b.x[1], b.z[1]))

    def rotate(self, ins: Rotate, rec: StepRecord) -> bool:
        w = ins.wire
        for attempt in range(ins.max_retries):
            x, z = _wire_pauli(self.frame, w)
            if self.h[w] == 1:
                # G_phi H P H: pending Pauli after H has z-bit = x
                side, sign_bit = "left", x
            else:
                side, sign_bit = "right", z
            phi = -ins.theta if sign_bit else ins.theta
            sch = Scheme.rotate(phi, side)
            o = self.bowtie(sch, (w,), "right" if side == "left" else "left")
            rec.outcomes.append(o)
            rec.variants.append(f"Dphi-{side}")
            if self.herald:
                return False
            b = byproduct_frame(sch, o)
            k = 0 if side == "left" else 1
            by = (b.x[k], b.z[k])
            if o.rotation_succeeded:
                if side == "left":
                    # G_phi (H P H) = P' G_theta with P' = H P H; then B; h -> 0
                    self.frame = _set_wire(self.frame, w, z ^ by[0], x ^ by[1])
                    self.h[w] = 0
                else:
                    # H G_phi P = (H P H) H G_theta; then B; h -> 1
                    self.frame = _set_wire(self.frame, w, z ^ by[0], x ^ by[1])
                    self.h[w] = 1
                rec.retries = attempt
                return True
            self._after_h(w, by)
        rec.retries = ins.max_retries
        return False

    def entangle(self, a: int, rec: StepRecord):
        for w in (a, a + 1):
            if self.h[w] == 0:
                self.decouple_single(w, rec)
                if self.herald:
                    return
        o = self.bowtie(Scheme.entangle(), (a, a + 1))
        rec.outcomes.append(o)
        rec.variants.append("Q")
        if self.herald:
            return
        # M (H x H)(P_a H x P_b H) = M (P'_a x P'_b) = (M P' M^dag) M
        pa, pb = _wire_pauli(self.frame, a), _wire_pauli(self.frame, a + 1)
        pre = PauliFrame((pa[1], pb[1]), (pa[0], pb[0]))
        moved = pre.through_entangler(0, 1).compose(byproduct_frame(o.scheme, o))
        self.frame = _set_wire(self.frame, a, moved.x[0], moved.z[0])
        self.frame = _set_wire(self.frame, a + 1, moved.x[1], moved.z[1])
        self.h[a] = self.h[a + 1] = 0

    def correction(self) -> np.ndarray:
        """``F^dag`` for the current frame."""
        mats = [pauli(self.frame.x[w], self.frame.z[w]) @ (H if self.h[w] else I2) for w in range(self.n)]
        return kron(*mats).conj().T


def run(program: LogicalProgram, rng: RandomSource, noise=None, input_state=None) -> RunTranscript:
    """Execute ``program`` on a fresh strip of bowties.

    The result is a pure function of ``(program, rng, noise, input_state)``.
    With a noise model every bowtie tensor is perturbed independently; a
    heralded outcome stops the run with ``heralded_abort``.  A rotation whose
    retries are exhausted stops the run with status ``"rotation_unapplied"``.
    """
    gen = rng.generator()
    r = _Run(program, gen, noise, input_state)
    steps = []
    status = "ok"
    for k, ins in enumerate(program.instructions):
        rec = StepRecord(k, ins.to_dict())
        if isinstance(ins, Decouple):
            r.decouple(ins.wire, rec)
        elif isinstance(ins, Rotate):
            if not r.rotate(ins, rec) and not r.herald:
                rec.status = status = "rotation_unapplied"
        elif isinstance(ins, Entangle):
            r.entangle(ins.wire, rec)
        if r.herald:
            rec.status = status = "heralded_abort"
        rec.frame = _frame_dict(r.frame, r.h)
        steps.append(rec)
        if status != "ok":
            break
    if status == "ok":
        final = r.correction() @ r.state
        final = final / np.linalg.norm(final)
    else:
        final = r.state
    return RunTranscript(program, rng.seed, rng.stream, steps, final, status, r.herald, tuple(r.h), r.frame)


# oracles -------------------------------------------------------------------


def circuit_oracle(program: LogicalProgram) -> np.ndarray:
    """Target unitary: Decouple -> I, Rotate -> ``G_theta``, Entangle -> ``M``."""
    n = program.wires
    u = np.eye(2**n, dtype=complex)
    for ins in program.instructions:
        if isinstance(ins, Rotate):
            u = _full(g_phi(ins.theta), (ins.wire,), n) @ u
        elif isinstance(ins, Entangle):
            u = _full(entangler(), (ins.wire, ins.wire + 1), n) @ u
    return u


def dressed_circuit(transcript: RunTranscript) -> np.ndarray:
    """Byproduct-free composition of the operators actually applied.

    Every bowtie contributes its ideal operator with the rotation angle set to
    the target ``theta``: ``H`` for decoupling and failed attempts,
    ``G_theta H`` or ``H G_theta`` for successes, ``M (H x H)`` for ``Q``.
    For a completed run this equals ``(x)_w H^(h_w) U_oracle``.
    """
    n = transcript.program.wires
    u = np.eye(2**n, dtype=complex)
    for rec, ins in zip(transcript.steps, transcript.program.instructions):
        for o, var in zip(rec.outcomes, rec.variants):
            if var == "D0":
                u = _full(np.kron(H, H), (ins.wire, ins.wire + 1), n) @ u
            elif var.startswith("D0-"):
                # padding bowtie of an Entangle, tagged with its wire
                u = _full(H, (int(var.split(":")[1]),), n) @ u
            elif var.startswith("Dphi"):
                side = var.split("-")[1]
                if o.rotation_succeeded:
                    g = g_phi(ins.theta) @ H if side == "left" else g_phi_mirrored(ins.theta) @ H
                else:
                    g = H
                u = _full(g, (ins.wire,), n) @ u
            elif var == "Q":
                u = _full(ideal_operator(o.scheme, o), (ins.wire, ins.wire + 1), n) @ u
    return u

