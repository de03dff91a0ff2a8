"""From laser pulses to logical gates on a single bowtie.

Builds the pulse-II unitary, reads off the fluorescence basis of the three
measurement schemes, and prints the correlation-space gate for a few
outcomes next to the circuit it should equal.
"""

import numpy as np

from kagome_mbqc import blockade, gates
from kagome_mbqc.gates import Scheme
from kagome_mbqc.ops import phase_distance

np.set_printoptions(precision=3, suppress=True)

print("pulse II on (vacuum, three single excitations):")
print(blockade.pulse_two_unitary().real)

for scheme in (Scheme.decouple(), Scheme.rotate(0.6), Scheme.entangle()):
    print(f"\n{scheme.label()}")
    for outcome in gates.valid_outcomes(scheme)[:3]:
        a = gates.extract_gate(scheme, outcome).matrix
        claim = gates.claimed_circuit(scheme, outcome)
        d = phase_distance(a, claim.matrix())
        print(f"  outcome {outcome.values}: {claim.describe()}  (distance {d:.1e})")

reports = gates.verification_sweep()
print(f"\nfull sweep: {sum(r['matched'] for r in reports)}/{len(reports)} outcomes match their circuits")
