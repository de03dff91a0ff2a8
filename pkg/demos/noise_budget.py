"""How far a noisy resource carries a computation.

Heralded defects are post-selected away; unheralded perturbations lower the
gate fidelity.  Both feed into the number of repetitions a computation of a
given depth needs.
"""

from kagome_mbqc import noise
from kagome_mbqc.gates import Scheme

d, eta = 0.2, 0.1

ps = noise.post_selection_mc(d, 10, 100_000, seed=1)
print(f"no heralded defect in 10 gates: {ps.mean:.4f} +- {ps.stderr:.4f} (exact {ps.extra['exact']:.4f})")

defect = noise.NoiseModel(defect_density=d)
for s in (Scheme.decouple(), Scheme.entangle()):
    print(f"heralding rate under {s.label()}: {noise.heralded_detection_rate(defect, s)['exact']:.3f}")

fr = noise.gate_fidelity_mc(eta, 500, seed=1)
print(f"gate fidelity at eta = {eta}: {fr.mean:.4f} (first order {1 - eta:.4f})")

inf = noise.infer_eta(0.14, d)
print(f"eta from a loop parity of 0.14: {inf['product']['eta']:.3f}; {inf['note']}")

for depth in (5, 10, 20):
    b = noise.run_budget(depth, d, eta)
    print(f"depth {depth:2d}: {b['expected_runs']:.1f} expected runs")
