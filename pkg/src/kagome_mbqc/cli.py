"""Batch command-line driver: ``kagome-mbqc <command> [options]``.

Commands
--------
verify-pulses   pulse I / pulse II golden matrices
verify-gates    outcome-by-outcome gate identities and retry statistics
verify-peps     tensor entries and contraction against enumeration
run             execute a logical program (``--program``)
noise           noise campaign (``--noise``)

Every command writes one report (JSON or CSV) to ``--out`` or stdout and a
short summary to stderr.  The exit status is 0 iff every check passed.
Reports carry no timestamps, so identical invocations give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import blockade, dimer, gates, noise, peps
from .engine import LogicalProgram, RandomSource, circuit_oracle, run
from .ops import H, X, Z, entanglement_entropy, g_phi, identify_pauli, phase_distance

SCHEMA_VERSION = "1.0"
THREADS_ENV = "KAGOME_MBQC_THREADS"
DEFAULT_TOL = 1e-12
GATE_TOL = gates.MATCH_TOL


class ConfigError(ValueError):
    """Malformed input file or option combination."""


def _check(name, passed, value=None, tolerance=None, **detail) -> dict:
    out = {"name": name, "passed": bool(passed)}
    if value is not None:
        out["value"] = _plain(value)
    if tolerance is not None:
        out["tolerance"] = tolerance
    out.update({k: _plain(v) for k, v in detail.items()})
    return out


def _plain(v):
    """JSON-safe copy with numpy scalars and complex numbers converted."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [round(float(v.real), 15), round(float(v.imag), 15)]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if np.isfinite(f) else str(f)
    return v


def _threads(args) -> int:
    if args.threads:
        return args.threads
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer")


def _load_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from exc


# commands ---------------------------------------------------------------------


def cmd_verify_pulses(args) -> dict:
    tol = args.tolerance if args.tolerance is not None else DEFAULT_TOL
    u1 = blockade.pulse_one_unitary()
    d1 = float(np.max(np.abs(u1 - blockade.pulse_one_closed_form())))
    obs = blockade.effective_observable_pulse1()
    d_obs = float(np.max(np.abs(obs - blockade.pulse_one_observable_closed_form())))
    u2 = blockade.pulse_two_unitary()
    d2 = float(np.max(np.abs(u2 - blockade.pulse_two_closed_form_unitary())))
    states = blockade.fluorescence_states(u2)
    d_states = 0.0
    for got, ref in zip(states, blockade.pulse_two_projected_states()):
        d_states = max(d_states, float(np.max(np.abs(got - ref))))
    checks = [
        _check("pulse1_unitary_entrywise", d1 < tol, d1, tol),
        _check("pulse1_effective_observable", d_obs < tol, d_obs, tol),
        _check("pulse2_unitary_entrywise", d2 < tol, d2, tol),
        _check("pulse2_projected_states", d_states < tol, d_states, tol),
    ]
    data = {
        "pulse1_unitary": _plain(np.round(u1, 14)),
        "pulse1_closed_form": _plain(blockade.pulse_one_closed_form()),
        "pulse1_vacuum_entry": _plain(complex(np.round(u1[0, 0], 14))),
        "pulse2_unitary": _plain(np.round(u2, 14)),
    }
    return {"checks": checks, "data": data}


def _sweep_one(scheme, tol):
    return [gates.verify_against_claim(scheme, o, tol) for o in gates.valid_outcomes(scheme)]


def cmd_verify_gates(args) -> dict:
    tol = args.tolerance if args.tolerance is not None else GATE_TOL
    schemes = [gates.Scheme.decouple()]
    schemes += [gates.Scheme.rotate(p, s) for s in ("left", "right") for p in gates.PHI_GRID]
    schemes += [gates.Scheme.entangle()]
    with ThreadPoolExecutor(max_workers=_threads(args)) as ex:
        parts = list(ex.map(lambda s: _sweep_one(s, tol), schemes))
    checks = []
    for sch, rep in zip(schemes, parts):
        worst = max(r["distance"] for r in rep)
        checks.append(_check(f"identities[{sch.label()}]", all(r["matched"] for r in rep), worst, tol, outcomes=len(rep)))
    named = {
        "G_0 = Z": (g_phi(0.0), Z),
        "G_pi/2 = Z sqrt(X)": (g_phi(np.pi / 2), Z @ np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2),
        "G_pi = Z X": (g_phi(np.pi), Z @ X),
    }
    for name, (a, b) in named.items():
        d = phase_distance(a, b)
        checks.append(_check(name, d < tol, d, tol))
    # G_pi/2 = Z sqrt(X) maps Paulis to Paulis; a generic angle does not
    clifford = {}
    for name, phi in (("pi/2", np.pi / 2), ("pi/4", np.pi / 4), ("1.2345", 1.2345)):
        g = g_phi(phi)
        clifford[name] = all(identify_pauli(g @ p @ g.conj().T) is not None for p in (X, Z))
    checks.append(_check("G_pi/4 non-Clifford", not clifford["pi/4"]))
    s = entanglement_entropy(gates.entangler() @ np.array([1, 0, 0, 0], dtype=complex))
    checks.append(_check("Q entangles |00>", abs(s - np.log(2)) < 1e-10, s, 1e-10))
    cond = gates.retry_patch_conditional()
    checks.append(_check("retry conditional = 1/2", cond == Fraction(1, 2), str(cond)))
    law = gates.single_qubit_success_probability(4)
    checks.append(
        _check(
            "retry law K/2^(n-1)",
            law["failure"] == law["law"],
            [str(f) for f in law["failure"]],
            K=str(law["K"]),
        )
    )
    data = {"clifford": clifford, "sweep": [r for rep in parts for r in rep]}
    return {"checks": checks, "data": data}


def _peps_cases(patch_arg):
    if patch_arg:
        data = _load_json(patch_arg, "patch")
        try:
            return [("user", dimer.KagomePatch.from_dict(data))]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid patch description: {exc}") from exc
    return [
        ("single_bowtie", dimer.single_bowtie()),
        ("wire_strip_2", dimer.wire_strip(2)),
        ("wire_strip_3", dimer.wire_strip(3)),
        ("brick_2x2", dimer.brick_patch(2, 2)),
        ("retry_patch", dimer.retry_patch()),
        ("wire_strip_6", dimer.wire_strip(6)),
    ]


def boundary_fixings(patch, limit: int = 27, seed: int = 0) -> list:
    """All exact/empty/free fixings of the boundary when there are few, else a seeded sample."""
    verts = list(patch.boundary)
    modes = ("exact", "empty", "free")
    if 3 ** len(verts) <= limit:
        return [dict(zip(verts, c)) for c in itertools.product(modes, repeat=len(verts))]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    out = [None]
    for _ in range(limit - 1):
        out.append({v: modes[int(rng.integers(3))] for v in verts})
    return out


def cmd_verify_peps(args) -> dict:
    tol = args.tolerance if args.tolerance is not None else DEFAULT_TOL
    t = peps.build_peps_tensor()
    vals = [v for v in t.entries.values()]
    checks = [_check("tensor has 8 unit entries", len(vals) == 8 and all(v == 1 for v in vals), len(vals))]
    data = {}
    for name, patch in _peps_cases(args.patch):
        worst, n = 0.0, 0
        for b in boundary_fixings(patch, seed=args.seed or 0):
            r = peps.compare_with_enumeration(patch, b)
            worst = max(worst, r["deviation"])
            n += 1
        full = peps.compare_with_enumeration(patch)
        checks.append(_check(f"contraction[{name}]", worst < tol, worst, tol, fixings=n, coverings=full["coverings"]))
        data[name] = {"bowties": len(patch.bowties), "sites": patch.n_sites, "coverings": full["coverings"]}
    return {"checks": checks, "data": data}


def cmd_run(args) -> dict:
    if args.seed is None:
        raise ConfigError("run needs --seed")
    if args.program:
        try:
            prog = LogicalProgram.from_dict(_load_json(args.program, "program"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid program: {exc}") from exc
    else:
        prog = LogicalProgram(1)
    model = None
    if args.noise:
        model = noise.NoiseModel.from_dict(_load_json(args.noise, "noise"))
    samples = args.samples or 1
    u = circuit_oracle(prog)
    psi0 = np.zeros(2**prog.wires, dtype=complex)
    psi0[0] = 1.0
    target = u @ psi0
    fids, statuses, retries = [], {}, {}
    first = None
    for s in range(samples):
        tr = run(prog, RandomSource(args.seed, s), model)
        first = first or tr
        statuses[tr.status] = statuses.get(tr.status, 0) + 1
        for r in tr.retry_counts:
            retries[r] = retries.get(r, 0) + 1
        if tr.status == "ok":
            fids.append(abs(np.vdot(target, tr.final_state)) ** 2)
    tol = args.tolerance if args.tolerance is not None else 1e-9
    worst = min(fids) if fids else 0.0
    checks = []
    if model is None or (model.eta == 0 and model.defect_density == 0):
        checks.append(_check("oracle fidelity", bool(fids) and worst > 1 - tol, worst, tol))
        checks.append(_check("no heralded aborts", statuses.get("heralded_abort", 0) == 0, statuses.get("heralded_abort", 0)))
    data = {
        "program": prog.to_dict(),
        "samples": samples,
        "status_counts": dict(sorted(statuses.items())),
        "retry_histogram": {str(k): v for k, v in sorted(retries.items())},
        "mean_fidelity": float(np.mean(fids)) if fids else None,
        "min_fidelity": worst if fids else None,
        "transcript": [json.loads(line) for line in first.to_jsonl().splitlines()],
    }
    return {"checks": checks, "data": data}


NOISE_KEYS = {"eta", "d", "generator", "samples", "seed", "gates", "fidelity_samples", "z6l"}


def _noise_config(args) -> dict:
    cfg = {"eta": 0.1, "d": 0.2, "generator": "dimer-preserving-random", "gates": 10, "z6l": 0.14}
    if args.noise:
        data = _load_json(args.noise, "noise")
        if not isinstance(data, dict):
            raise ConfigError("noise config must be a JSON object")
        unknown = set(data) - NOISE_KEYS
        if unknown:
            raise ConfigError(f"unknown noise config keys: {sorted(unknown)}")
        cfg.update(data)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.samples is not None:
        cfg["samples"] = args.samples
    if "seed" not in cfg:
        raise ConfigError("noise campaign needs a seed (--seed or config 'seed')")
    cfg.setdefault("samples", 100000)
    cfg.setdefault("fidelity_samples", 400)
    return cfg


def cmd_noise(args) -> dict:
    cfg = _noise_config(args)
    try:
        model = noise.NoiseModel(float(cfg["eta"]), cfg["generator"], float(cfg["d"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    seed, n, g = int(cfg["seed"]), int(cfg["samples"]), int(cfg["gates"])
    eta, d = model.eta, model.defect_density
    checks, data = [], {"config": cfg}

    ps = noise.post_selection_mc(d, g, n, seed)
    ok = abs(ps.mean - ps.extra["exact"]) <= 3 * ps.stderr + 1e-15
    checks.append(_check("post-selection success", ok, ps.mean, exact=ps.extra["exact"], stderr=ps.stderr))
    data["post_selection"] = ps.to_dict()

    data["heralding"] = {
        s.label(): noise.heralded_detection_rate(model, s, seed, min(n, 100000)) for s in (gates.Scheme.decouple(), gates.Scheme.entangle())
    }
    for label, r in data["heralding"].items():
        ok = abs(r["sampled"] - r["exact"]) <= 3 * r["stderr"] + 1e-12
        checks.append(_check(f"heralding[{label}] sampled vs exact", ok, r["sampled"], exact=r["exact"]))

    haar = {}
    for dim, norm in ((4, "N"), (2, "N"), (2, "4")):
        rep = noise.haar_p_estimate(dim, n, seed, norm)
        haar[f"N={dim},/{'N' if norm == 'N' else '4'}"] = rep.to_dict()
    data["haar_p"] = haar
    h4 = haar["N=4,/N"]
    checks.append(_check("haar p (N=4)", abs(h4["mean"] - 1) <= 3 * h4["stderr"], h4["mean"], stderr=h4["stderr"]))

    if eta > 0 and model.generator == "dimer-preserving-random":
        fr = noise.gate_fidelity_mc(eta, int(cfg["fidelity_samples"]), seed)
        bound = 3 * eta**2 + 3 * fr.stderr
        checks.append(_check("first-order fidelity law", abs(fr.mean - (1 - eta)) < bound, fr.mean, bound))
        data["gate_fidelity"] = fr.to_dict()

    lp = noise.noisy_loop_parity_mc(eta, d, min(n, 100000), seed)
    checks.append(_check("loop parity MC", abs(lp.mean - lp.extra["exact"]) <= 3 * lp.stderr, lp.mean, exact=lp.extra["exact"]))
    data["loop_parity"] = lp.to_dict()
    data["infer_eta"] = noise.infer_eta(float(cfg["z6l"]), d)
    data["infer_eta_from_mc"] = noise.infer_eta(max(lp.mean, 1e-12), d) if lp.mean > 0 else None
    data["run_budget"] = noise.run_budget(g, d, eta)
    return {"checks": checks, "data": data}


COMMANDS = {
    "verify-pulses": cmd_verify_pulses,
    "verify-gates": cmd_verify_gates,
    "verify-peps": cmd_verify_peps,
    "run": cmd_run,
    "noise": cmd_noise,
}


# output ---------------------------------------------------------------------


def _to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["command", "check", "passed", "value", "tolerance"])
    for c in report["checks"]:
        w.writerow([report["command"], c["name"], c["passed"], json.dumps(c.get("value")), c.get("tolerance", "")])
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        return _to_csv(report)
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kagome-mbqc", description="Dimer-state MBQC verification and simulation.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--samples", type=int, default=None)
        s.add_argument("--tolerance", type=float, default=None)
        s.add_argument("--out", default=None)
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--patch", default=None)
        s.add_argument("--program", default=None)
        s.add_argument("--noise", default=None)
        s.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        body = COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        body = {"checks": [_check("configuration", False, error=str(exc))], "data": {}}
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "passed": all(c["passed"] for c in body["checks"]),
        "checks": body["checks"],
        "data": _plain(body["data"]),
    }
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in report["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        sys.stderr.write(f"{mark}  {c['name']}" + (f"  ({c['value']})" if "value" in c else "") + "\n")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
