"""Run a small logical program on the dimer resource and compare with the circuit.

Each rotation may need several bowties before it lands; the transcript shows
how many retries every step took and the Pauli frame left behind.
"""

import json

import numpy as np

from kagome_mbqc.engine import Entangle, LogicalProgram, RandomSource, Rotate, Terminate, circuit_oracle, run

prog = LogicalProgram(2, (Rotate(0, 0.8), Rotate(1, -0.3), Entangle(0), Rotate(1, 1.9), Terminate()))
target = circuit_oracle(prog)[:, 0]

for stream in range(3):
    tr = run(prog, RandomSource(seed=17, stream=stream))
    fid = abs(np.vdot(target, tr.final_state)) ** 2
    print(f"stream {stream}: status {tr.status}, retries {tr.retry_counts}, fidelity {fid:.12f}")

print("\nfirst transcript:")
for line in run(prog, RandomSource(17, 0)).to_jsonl().splitlines():
    rec = json.loads(line)
    if rec.get("final"):
        print("  final", rec["status"])
    else:
        print(f"  step {rec['step']} {rec['instruction']['op']}: {rec['variants']} frame {rec['frame']}")
