import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kagome_mbqc import engine
from kagome_mbqc.engine import Decouple, Entangle, LogicalProgram, RandomSource, Rotate, Terminate
from kagome_mbqc.gates import Scheme
from kagome_mbqc.ops import H, entangler, g_phi, kron


def _fidelity(a, b):
    return abs(np.vdot(a, b)) ** 2


def _random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def test_single_rotation_hand_oracle():
    prog = LogicalProgram(1, (Rotate(0, 0.7),))
    t = engine.run(prog, RandomSource(3))
    assert t.status == "ok"
    ref = g_phi(0.7) @ np.array([1, 0])
    assert _fidelity(t.final_state, ref) == pytest.approx(1.0, abs=1e-12)


def test_entangle_hand_oracle():
    prog = LogicalProgram(2, (Rotate(0, 1.1), Entangle(0), Decouple(0), Terminate()))
    ref = entangler() @ np.kron(g_phi(1.1), np.eye(2)) @ np.array([1, 0, 0, 0])
    for stream in range(20):
        t = engine.run(prog, RandomSource(11, stream))
        assert _fidelity(t.final_state, ref) == pytest.approx(1.0, abs=1e-12)


def test_circuit_oracle_composition():
    prog = LogicalProgram(2, (Rotate(1, 0.2), Entangle(0)))
    ref = entangler() @ kron(np.eye(2), g_phi(0.2))
    assert np.allclose(engine.circuit_oracle(prog), ref)


def test_runs_are_reproducible():
    prog = LogicalProgram(3, (Rotate(0, 0.3), Entangle(1), Rotate(2, -1.0), Decouple(0)))
    a = engine.run(prog, RandomSource(42, 5)).to_jsonl()
    b = engine.run(prog, RandomSource(42, 5)).to_jsonl()
    assert a == b
    assert a != engine.run(prog, RandomSource(42, 6)).to_jsonl()


def test_transcript_lines_parse():
    prog = LogicalProgram(2, (Rotate(0, 0.3), Entangle(0)))
    lines = engine.run(prog, RandomSource(1)).to_jsonl().splitlines()
    recs = [json.loads(s) for s in lines]
    assert recs[-1]["final"] and recs[-1]["status"] == "ok"
    assert [r["step"] for r in recs[:-1]] == [0, 1]
    assert recs[1]["variants"][-1] == "Q"


def test_retry_exhaustion_reports_status():
    prog = LogicalProgram(1, (Rotate(0, 0.5, max_retries=1), Rotate(0, 0.1)))
    statuses = {engine.run(prog, RandomSource(0, s)).status for s in range(40)}
    assert statuses == {"ok", "rotation_unapplied"}
    for s in range(40):
        t = engine.run(prog, RandomSource(0, s))
        if t.status == "rotation_unapplied":
            assert len(t.steps) == 1 and t.steps[0].retries == 1


def test_retry_distribution_is_geometric():
    prog = LogicalProgram(1, (Rotate(0, 0.4),))
    counts = np.bincount([engine.run(prog, RandomSource(9, s)).steps[0].retries for s in range(4000)], minlength=8)
    freq = counts[:4] / 4000
    # failure probability one half per attempt
    assert np.allclose(freq, [1 / 2, 1 / 4, 1 / 8, 1 / 16], atol=0.03)


def test_program_validation():
    with pytest.raises(ValueError):
        LogicalProgram(7)
    with pytest.raises(ValueError):
        LogicalProgram(2, (Terminate(), Rotate(0, 0.1)))
    with pytest.raises(ValueError):
        LogicalProgram(2, (Entangle(1),))
    with pytest.raises(ValueError):
        LogicalProgram(1, (Rotate(0, 0.1, max_retries=0),))
    with pytest.raises(TypeError):
        LogicalProgram(1, ("rotate",))
    with pytest.raises(ValueError):
        LogicalProgram.from_dict({"wires": 2, "instructions": [{"op": "entangle", "wires": [0, 2]}]})
    with pytest.raises(ValueError):
        LogicalProgram.from_dict({"instructions": []})
    with pytest.raises(ValueError):
        engine.instruction_from_dict({"op": "teleport"})


def test_program_json_round_trip(tmp_path):
    data = {
        "wires": 2,
        "instructions": [
            {"op": "rotate", "wire": 0, "phi": 0.7},
            {"op": "entangle", "wires": [0, 1]},
            {"op": "decouple", "wires": [0, 1]},
            {"op": "terminate"},
        ],
    }
    f = tmp_path / "prog.json"
    f.write_text(json.dumps(data))
    prog = LogicalProgram.load(f)
    assert prog.instructions == (Rotate(0, 0.7), Entangle(0), Decouple(0), Terminate())
    assert LogicalProgram.from_dict(prog.to_dict()) == prog


def test_born_sample_posterior_is_normalized():
    gen = RandomSource(5).generator()
    psi = _random_state(gen, 2)
    o, post, p = engine.born_sample(psi, Scheme.entangle(), (0, 1), 2, gen)
    assert not o.heralded_invalid
    assert 0 < p <= 1
    assert np.linalg.norm(post) == pytest.approx(1.0)


def test_born_probabilities_sum_to_one():
    # the 16 physical Q outcomes carry all the weight on any input
    gen = RandomSource(6).generator()
    psi = _random_state(gen, 2)
    seen = {}
    for _ in range(300):
        o, _, p = engine.born_sample(psi, Scheme.entangle(), (0, 1), 2, gen)
        seen[o.pattern] = p
    assert len(seen) == 16
    assert sum(seen.values()) == pytest.approx(1.0, abs=1e-10)


def test_dressed_circuit_matches_oracle():
    gen = np.random.default_rng(12)
    for k in range(30):
        prog = engine.random_program(gen)
        t = engine.run(prog, RandomSource(12, k))
        hs = kron(*(H if h else np.eye(2) for h in t.h_final))
        assert np.allclose(engine.dressed_circuit(t), hs @ engine.circuit_oracle(prog), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 1000))
def test_random_programs_reach_oracle_state(seed, stream):
    gen = np.random.default_rng(seed)
    prog = engine.random_program(gen, max_wires=4, max_len=8)
    psi = _random_state(gen, prog.wires)
    t = engine.run(prog, RandomSource(seed, stream), input_state=psi)
    if t.status == "rotation_unapplied":
        return
    assert t.status == "ok" and not t.heralded_abort
    ref = engine.circuit_oracle(prog) @ psi
    assert _fidelity(t.final_state, ref) > 1 - 1e-9
