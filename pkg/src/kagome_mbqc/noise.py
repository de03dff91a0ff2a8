"""Imperfect resource states: tensor perturbations, heralding and fidelity bookkeeping.

A noisy bowtie tensor is ``T + eta * dP`` over the full ``2^6`` physical
space.  Perturbations that put weight on configurations violating the dimer
constraint can be caught by fluorescence (heralded), the rest silently lower
the gate fidelity.  This module provides

* pluggable ``dP`` generators and :func:`perturb_tensor`,
* exact (projector algebra) and sampled heralding rates,
* Haar estimates of the coefficient ``p`` in ``F ~ 1 - eta p``,
* Monte Carlo gate fidelities for random dimer-preserving perturbations,
* post-selection statistics, the loop-parity inference of ``eta`` and a run
  budget estimate.

Z-parity convention: an excited link contributes ``-1``, as in
:func:`kagome_mbqc.dimer.loop_parity_expectation`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .dimer import enumerate_coverings, link_ring, retry_patch
from .gates import Scheme, fluorescence_basis, valid_outcomes, projection_state
from .peps import LEGAL_CONFIGS, N_CONFIGS, PepsTensor, build_peps_tensor, role_mask

TENSOR_SHAPE = (N_CONFIGS, 2, 2, 2, 2)
MAX_ETA = 0.5
GENERATORS = ("dimer-preserving-random", "dimer-violating", "crossed-pair", "user")
#: the two-excitation defect: UR and LL excited together
CROSSED_PAIR = role_mask(("UR", "LL"))
ILLEGAL_CONFIGS = tuple(c for c in range(N_CONFIGS) if c not in LEGAL_CONFIGS)

__all__ = [
    "NoiseModel",
    "FidelityReport",
    "perturb_tensor",
    "delta_dimer_preserving",
    "delta_dimer_violating",
    "delta_crossed_pair",
    "herald_probability",
    "heralded_detection_rate",
    "haar_unitary",
    "haar_p_estimate",
    "printed_fidelity",
    "gate_fidelity_mc",
    "post_selection_mc",
    "noisy_loop_parity_mc",
    "infer_eta",
    "run_budget",
]


def _base_dense(base=None) -> np.ndarray:
    if base is None:
        return build_peps_tensor().dense
    if isinstance(base, PepsTensor):
        return base.dense
    return np.asarray(base, dtype=complex)


def _cgauss(rng, shape) -> np.ndarray:
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


# perturbations ---------------------------------------------------------------


def perturb_tensor(base, delta, eta: float) -> np.ndarray:
    """Return ``base + eta * delta`` as a dense ``(64, 2, 2, 2, 2)`` array.

    ``base`` may be a :class:`~kagome_mbqc.peps.PepsTensor` or an array.
    """
    b = _base_dense(base)
    d = np.asarray(delta, dtype=complex)
    if b.shape != TENSOR_SHAPE or d.shape != TENSOR_SHAPE:
        raise ValueError(f"tensors must have shape {TENSOR_SHAPE}, got {b.shape} and {d.shape}")
    return b + eta * d


def delta_dimer_preserving(rng: np.random.Generator, base=None) -> np.ndarray:
    """``dP = P_err - P`` with ``P_err`` random on the eight legal configurations.

    Each legal configuration gets an independent complex Gaussian vector over
    the 16 virtual indices with unit expected norm, matching the unit norm of
    the perfect entries.  ``dP`` never touches dimer-violating configurations.
    """
    t = _base_dense(base)
    err = np.zeros(TENSOR_SHAPE, dtype=complex)
    for c in LEGAL_CONFIGS:
        err[c] = _cgauss(rng, (2, 2, 2, 2)) / 4.0
    return err - t


def delta_dimer_violating(rng: np.random.Generator, base=None) -> np.ndarray:
    """Random unit-norm ``dP`` supported on the 56 dimer-violating configurations."""
    d = np.zeros(TENSOR_SHAPE, dtype=complex)
    d[list(ILLEGAL_CONFIGS)] = _cgauss(rng, (len(ILLEGAL_CONFIGS), 2, 2, 2, 2))
    return d / np.linalg.norm(d)


def delta_crossed_pair(rng: np.random.Generator, base=None) -> np.ndarray:
    """Unit-norm ``dP`` on the single configuration with UR and LL both excited.

    Under a D-scheme both pair readouts are then nonzero; under ``Q`` each
    triangle holds one excitation and the defect goes unnoticed.
    """
    d = np.zeros(TENSOR_SHAPE, dtype=complex)
    v = _cgauss(rng, (2, 2, 2, 2))
    d[CROSSED_PAIR] = v / np.linalg.norm(v)
    return d


_GENERATOR_FUNCS = {
    "dimer-preserving-random": delta_dimer_preserving,
    "dimer-violating": delta_dimer_violating,
    "crossed-pair": delta_crossed_pair,
}


@dataclass(frozen=True)
class NoiseModel:
    """Per-bowtie noise.

    Attributes
    ----------
    eta : float
        Perturbation strength, ``0 <= eta <= 0.5``.
    generator : str
        One of :data:`GENERATORS`.  ``"user"`` uses the fixed array ``delta``.
    defect_density : float
        Probability ``d`` that a bowtie is replaced by a crossed-pair defect
        (a dimer-constraint violation), ``0 <= d < 1``.
    """

    eta: float = 0.0
    generator: str = "dimer-preserving-random"
    defect_density: float = 0.0
    delta: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.eta <= MAX_ETA:
            raise ValueError(f"eta must lie in [0, {MAX_ETA}]")
        if not 0.0 <= self.defect_density < 1.0:
            raise ValueError("defect density must lie in [0, 1)")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.generator == "user":
            if self.delta is None or np.shape(self.delta) != TENSOR_SHAPE:
                raise ValueError(f"user generator needs a delta of shape {TENSOR_SHAPE}")

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseModel":
        unknown = set(data) - {"eta", "d", "generator", "samples", "seed", "gates"}
        if unknown:
            raise ValueError(f"unknown noise fields {sorted(unknown)}")
        return cls(float(data.get("eta", 0.0)), data.get("generator", "dimer-preserving-random"), float(data.get("d", 0.0)))

    def draw_delta(self, rng: np.random.Generator) -> np.ndarray:
        if self.generator == "user":
            return np.asarray(self.delta, dtype=complex)
        return _GENERATOR_FUNCS[self.generator](rng)

    def sample_tensor(self, rng: np.random.Generator):
        """A fresh bowtie tensor, or ``None`` for the perfect one.

        A noiseless model consumes no random numbers, so runs with
        ``eta = d = 0`` reproduce noiseless runs draw for draw.
        """
        if self.eta == 0.0 and self.defect_density == 0.0:
            return None
        if self.defect_density > 0.0 and rng.random() < self.defect_density:
            return delta_crossed_pair(rng)
        if self.eta == 0.0:
            return None
        return perturb_tensor(None, self.draw_delta(rng), self.eta)


@dataclass(frozen=True)
class FidelityReport:
    """Monte Carlo estimate with its standard error and a 3-sigma interval."""

    mean: float
    stderr: float
    samples: int
    quantity: str = "fidelity"
    extra: dict = field(default_factory=dict)

    @property
    def interval(self) -> tuple:
        return (self.mean - 3 * self.stderr, self.mean + 3 * self.stderr)

    def to_dict(self) -> dict:
        out = {
            "quantity": self.quantity,
            "mean": self.mean,
            "stderr": self.stderr,
            "samples": self.samples,
            "interval": list(self.interval),
        }
        out.update(self.extra)
        return out


def _report(values, quantity, **extra) -> FidelityReport:
    v = np.asarray(values, dtype=float)
    return FidelityReport(float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size)), int(v.size), quantity, extra)


# heralding -------------------------------------------------------------------


def herald_probability(tensor, scheme: Scheme) -> float:
    """Exact probability of a heralded outcome on one bowtie.

    Both virtual inputs are maximally mixed, so ``P(f) ~ ||A_f||_F^2`` and the
    probabilities sum to ``||T||^2``.
    """
    t = _base_dense(tensor)
    outs, kets = fluorescence_basis(scheme)
    w = np.einsum("fc,cabde->fabde", kets.conj(), t)
    p = np.sum(np.abs(w.reshape(64, -1)) ** 2, axis=1)
    bad = np.array([o.heralded_invalid for o in outs])
    return float(p[bad].sum() / p.sum())


def heralded_detection_rate(model: NoiseModel, scheme: Scheme, seed: int = 0, samples: int = 0, tensors: int = 32) -> dict:
    """Heralding rate of ``scheme`` under ``model``.

    ``exact`` averages the projector-algebra probability over ``tensors``
    draws of the model (defects weighted by ``d``); ``sampled`` draws
    ``samples`` Born-rule outcomes on the same tensors.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    d = model.defect_density
    rates = []
    tlist = []
    for _ in range(tensors):
        t = perturb_tensor(None, model.draw_delta(rng), model.eta) if model.eta > 0 else _base_dense()
        tlist.append(t)
        rates.append(herald_probability(t, scheme))
    r_defect = herald_probability(delta_crossed_pair(rng), scheme) if d > 0 else 0.0
    exact = d * r_defect + (1 - d) * float(np.mean(rates))
    out = {"exact": exact, "defect_rate": r_defect, "tensors": tensors}
    if samples:
        pick = rng.integers(0, tensors, size=samples)
        per = np.array(rates)[pick]
        defect = rng.random(samples) < d
        prob = np.where(defect, r_defect, per)
        hits = rng.random(samples) < prob
        m = float(hits.mean())
        out.update(sampled=m, stderr=float(np.sqrt(max(m * (1 - m), 1e-300) / samples)), samples=samples)
    return out


def post_selection_mc(d: float, gates: int, samples: int, seed: int = 0, scheme: Scheme | None = None) -> FidelityReport:
    """Fraction of runs of ``gates`` bowties in which no defect is heralded.

    Each bowtie is a crossed-pair defect with probability ``d``; a defect is
    heralded with its projector-algebra probability under ``scheme`` (1 for
    the decoupling scheme).  The exact value is ``(1 - d)^gates`` when every
    defect is heralded.
    """
    scheme = scheme or Scheme.decouple()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    r = herald_probability(delta_crossed_pair(rng), scheme)
    defect = rng.random((samples, gates)) < d
    caught = rng.random((samples, gates)) < r
    ok = ~np.any(defect & caught, axis=1)
    return _report(ok.astype(float), "post-selection success", exact=(1 - d * r) ** gates, gates=gates, d=d)


# Haar averages -----------------------------------------------------------------


def haar_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random unitaries (phase-corrected QR of a complex Gaussian matrix)."""
    return unitary_group.rvs(n, size=size or 1, random_state=rng)


def haar_p_estimate(n: int, samples: int, seed: int = 0, normalization: str = "N", batch: int = 20000) -> FidelityReport:
    """Monte Carlo mean of ``Tr[(I - V)(I - V)^dag] / c - 1`` over Haar ``V``.

    ``normalization="N"`` uses ``c = n``; ``"4"`` uses ``c = 4`` for every
    ``n``.  With ``c = n`` the mean is exactly 1.
    """
    if normalization not in ("N", "4"):
        raise ValueError("normalization must be 'N' or '4'")
    c = n if normalization == "N" else 4
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    vals = []
    left = samples
    while left > 0:
        m = min(batch, left)
        v = haar_unitary(n, rng, m).reshape(m, n, n)
        tr = np.trace(v, axis1=1, axis2=2).real
        vals.append((2 * n - 2 * tr) / c - 1)
        left -= m
    return _report(np.concatenate(vals), "haar p", dimension=n, normalization=normalization)


def printed_fidelity(u: np.ndarray, v: np.ndarray, eta: float, normalization: str = "4") -> float:
    """``Tr[(U - eta V)(U - eta V)^dag] / c`` with ``c = 4`` or the dimension."""
    w = u - eta * v
    c = 4 if normalization == "4" else u.shape[0]
    return float(np.trace(w @ w.conj().T).real / c)


# fidelity -----------------------------------------------------------------------


def _outcome_ops(scheme: Scheme, tensor) -> np.ndarray:
    kets = np.array([projection_state(o) for o in valid_outcomes(scheme)])
    return np.einsum("fc,cabde->fdeab", kets.conj(), tensor).reshape(len(kets), 4, 4)


def gate_fidelity_mc(eta: float, samples: int, seed: int = 0, scheme: Scheme | None = None, generator: str = "dimer-preserving-random") -> FidelityReport:
    """Mean linear gate fidelity under random tensor perturbations.

    For every draw of ``dP`` and every valid outcome ``f`` the fidelity is
    ``Re<A_f, A'_f> / ||A_f||^2`` with ``A_f`` the perfect operator and
    ``A'_f`` the perturbed one; outcomes are weighted uniformly.  For the
    dimer-preserving generator its mean is ``1 - eta`` exactly, i.e. ``p = 1``.

    The printed quadratic form ``Tr[(U - eta V)(U - eta V)^dag] / 4`` with a
    Haar ``V`` is reported alongside (``printed_mean``).
    """
    scheme = scheme or Scheme.decouple()
    model = NoiseModel(eta, generator)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    t = _base_dense()
    a0 = _outcome_ops(scheme, t)
    n0 = np.sum(np.abs(a0) ** 2, axis=(1, 2))
    vals = np.empty(samples)
    for k in range(samples):
        a1 = _outcome_ops(scheme, perturb_tensor(t, model.draw_delta(rng), eta))
        vals[k] = np.mean(np.sum(a0.conj() * a1, axis=(1, 2)).real / n0)
    vs = haar_unitary(4, rng, samples).reshape(samples, 4, 4)
    printed = np.array([printed_fidelity(np.eye(4), v, eta) for v in vs])
    return _report(
        vals,
        "linear gate fidelity",
        eta=eta,
        first_order=1 - eta,
        printed_mean=float(printed.mean()),
        printed_stderr=float(printed.std(ddof=1) / np.sqrt(samples)),
    )


# loop parity and inference ------------------------------------------------------


def noisy_loop_parity_mc(eta: float, d: float, samples: int, seed: int = 0, patch=None, site: str | None = None) -> FidelityReport:
    """Monte Carlo of the six-link parity on a noisy resource.

    Coverings are drawn uniformly from the perfect state on ``patch``; each of
    the six links around ``site`` is lost to a heralded defect with probability
    ``d`` (contributing 0) and otherwise read with a sign error of probability
    ``eta / 2`` (mean fidelity ``1 - eta``).  The expectation is
    ``[(1 - eta)(1 - d)]^6``.
    """
    patch = patch or retry_patch()
    site = site or patch.bowties[patch.bowtie_index(2, 1)].site("UL")
    ring = [patch.site_index(s) for s in link_ring(patch, site)]
    covs = np.array([c.excited_sites for c in enumerate_coverings(patch)], dtype=object)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    pick = rng.integers(0, len(covs), size=samples)
    exc = np.array([[(int(covs[i]) >> b) & 1 for b in ring] for i in pick])
    z = 1 - 2 * exc
    flip = rng.random(z.shape) < eta / 2
    keep = rng.random(z.shape) >= d
    z = np.where(flip, -z, z) * keep
    return _report(np.prod(z, axis=1), "loop parity", exact=((1 - eta) * (1 - d)) ** 6, eta=eta, d=d)


def infer_eta(z6l: float, d: float, p: float = 1.0) -> dict:
    """Solve the six-link parity for ``eta = (1 - F) / p``.

    ``product``: ``[F (1 - d)]^6 = z6l``; ``quotient``: ``[F / (1 - d)]^6 = z6l``.
    A reading whose ``eta`` leaves ``[0, 1]`` is marked infeasible.
    """
    if not 0 < z6l <= 1:
        raise ValueError("z6l must lie in (0, 1]")
    if not 0 <= d < 1:
        raise ValueError("d must lie in [0, 1)")
    root = z6l ** (1 / 6)
    out = {}
    for name, f in (("product", root / (1 - d)), ("quotient", root * (1 - d))):
        eta = (1 - f) / p
        out[name] = {"eta": eta, "fidelity": f, "feasible": bool(0 <= eta <= 1)}
    gap = out["quotient"]["eta"] - out["product"]["eta"]
    out["note"] = f"quotient minus product reading: {gap:.4f}"
    return out


def run_budget(gates: int, d: float, eta: float, epsilon: float = 0.5, p: float = 1.0) -> dict:
    """Expected number of repetitions of a ``gates``-deep computation.

    ``post_selection = (1 - d)^-gates`` runs are needed per accepted run.  An
    accepted run estimates a +-1 observable whose signal is damped to
    ``F = (1 - eta p)^gates``; resolving it to relative error ``epsilon``
    takes ``ceil((1 - F^2) / (epsilon F)^2)`` accepted runs (at least one).
    """
    post = (1 - d) ** (-gates)
    f = (1 - eta * p) ** gates
    if f <= 0:
        avg = math.inf
    else:
        avg = max(1, math.ceil((1 - f * f) / (epsilon * f) ** 2 - 1e-12))
    return {
        "post_selection_factor": post,
        "averaging_factor": avg,
        "fidelity": f,
        "epsilon": epsilon,
        "expected_runs": post * avg,
    }
