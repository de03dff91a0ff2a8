import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kagome_mbqc import dimer
from kagome_mbqc.dimer import (
    InconsistentBoundaryError,
    KagomePatch,
    PatchTooLargeError,
    boundary_condition,
    build_dimer_state,
    enumerate_coverings,
    is_covering,
    link_ring,
    loop_parity_expectation,
)


def brute_force_count(patch, modes=None):
    """Count coverings by testing every subset of links (independent of the backtracker)."""
    modes = modes or {}
    n = patch.n_sites
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for v in patch.vertices:
        c = np.zeros(masks.size, dtype=np.int64)
        for s in patch.vertex_sites(v):
            c += (masks >> patch.site_index(s)) & 1
        mode = modes.get(v, "free" if v in patch.boundary else "exact")
        if mode == "exact":
            ok &= c == 1
        elif mode == "empty":
            ok &= c == 0
        else:
            ok &= c <= 1
    return int(ok.sum())


# frozen from the brute-force oracle above
FROZEN_COUNTS = {
    "single_bowtie": (dimer.single_bowtie, 8),
    "wire_strip_2": (lambda: dimer.wire_strip(2), 32),
    "wire_strip_3": (lambda: dimer.wire_strip(3), 128),
    "brick_2x2": (lambda: dimer.brick_patch(2, 2), 512),
    "retry_patch": (dimer.retry_patch, 1024),
    "brick_3x2": (lambda: dimer.brick_patch(3, 2), 4096),
}


@pytest.mark.parametrize("name", ["single_bowtie", "wire_strip_2", "wire_strip_3"])
def test_counts_match_brute_force(name):
    build, n = FROZEN_COUNTS[name]
    patch = build()
    assert brute_force_count(patch) == n
    assert len(enumerate_coverings(patch)) == n


@pytest.mark.parametrize("name", ["brick_2x2", "retry_patch", "brick_3x2"])
def test_frozen_counts(name):
    build, n = FROZEN_COUNTS[name]
    assert len(enumerate_coverings(build())) == n


def test_single_vertex_has_four_coverings():
    p = dimer.single_vertex_patch()
    covs = enumerate_coverings(p)
    assert len(covs) == 4
    assert all(bin(c.excited_sites).count("1") == 1 for c in covs)


def test_every_enumerated_mask_is_a_covering():
    p = dimer.wire_strip(3)
    for c in enumerate_coverings(p):
        assert is_covering(p, c.excited_sites)


def test_boundary_fixings_match_brute_force():
    p = dimer.single_bowtie()
    for combo in itertools.product(dimer.BOUNDARY_MODES, repeat=len(p.boundary)):
        modes = dict(zip(p.boundary, combo))
        assert len(enumerate_coverings(p, modes)) == brute_force_count(p, modes)


def test_leg_labels_fix_a_single_covering():
    p = dimer.single_bowtie()
    covs = enumerate_coverings(p, {(0, "TL"): "0", (0, "TR"): "-", (0, "BL"): "-", (0, "BR"): "1"})
    assert [c.sites(p) for c in covs] == [["UR0_0"]]


def test_wrong_label_basis_raises():
    p = dimer.single_bowtie()
    with pytest.raises(InconsistentBoundaryError):
        boundary_condition(p, {(0, "TL"): "+"})
    with pytest.raises(InconsistentBoundaryError):
        boundary_condition(p, {"nowhere": "exact"})
    with pytest.raises(InconsistentBoundaryError):
        boundary_condition(p, "weird")


def test_summed_is_default():
    p = dimer.single_bowtie()
    assert boundary_condition(p, "summed") == boundary_condition(p)


def test_size_guard():
    with pytest.raises(PatchTooLargeError):
        enumerate_coverings(dimer.wire_strip(7))


def test_patch_round_trip(tmp_path):
    p = dimer.retry_patch()
    f = tmp_path / "patch.json"
    f.write_text(json.dumps(p.to_dict()))
    q = KagomePatch.load(f)
    assert q.sites == p.sites and q.boundary == p.boundary
    assert KagomePatch.from_dict({"positions": [[0, 1], [1, 0], [2, -1], [2, 1], [3, 0]]}).sites == p.sites


def test_mixed_parity_positions_rejected():
    with pytest.raises(ValueError):
        KagomePatch.from_bowties([(0, 0), (0, 1)])


def test_state_is_equal_superposition():
    s = build_dimer_state(dimer.wire_strip(2), normalize=True)
    probs = list(s.probabilities().values())
    assert np.allclose(probs, 1 / 32)
    assert abs(s.norm() - 1) < 1e-12


def test_link_ring_parity_is_one():
    p = dimer.retry_patch()
    s = build_dimer_state(p)
    interior = [x for x in p.sites if all(v not in p.boundary for v in p.site_vertices(x))]
    tested = 0
    for site in interior:
        try:
            ring = link_ring(p, site)
        except ValueError:
            continue
        assert dimer.loop_kind(p, ring) == "cut"
        val, valid = loop_parity_expectation(s, ring, return_validity=True)
        assert val == pytest.approx(1.0) and valid
        tested += 1
    assert tested > 0


DIAMOND = [(0, 1), (1, 0), (1, 2), (2, 1)]


def test_hexagon_ring_parity():
    p = KagomePatch.from_bowties(DIAMOND)
    hexa = dimer.hexagon_below(p, 0, 1)
    assert dimer.loop_kind(p, hexa) == "hexagon"
    s = build_dimer_state(p)
    assert loop_parity_expectation(s, hexa) == pytest.approx(0.0, abs=1e-12)
    assert loop_parity_expectation(s, hexa, mode="mean") == pytest.approx(0.5, abs=1e-12)


def test_open_chain_is_not_a_loop():
    p = KagomePatch.from_bowties(DIAMOND)
    hexa = dimer.hexagon_below(p, 0, 1)
    bad = hexa[:5] + [p.bowties[0].site("L")]
    with pytest.raises(ValueError):
        dimer.loop_kind(p, bad)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(dimer.BOUNDARY_MODES), min_size=6, max_size=6))
def test_boundary_fixings_on_two_bowties(modes):
    p = dimer.wire_strip(2)
    fixing = dict(zip(p.boundary, modes))
    covs = enumerate_coverings(p, fixing)
    assert len(covs) == brute_force_count(p, fixing)
    for c in covs:
        assert is_covering(p, c.excited_sites, fixing)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, (1 << 12) - 1))
def test_is_covering_agrees_with_enumeration(mask):
    p = dimer.wire_strip(2)
    valid = {c.excited_sites for c in enumerate_coverings(p)}
    assert is_covering(p, mask) == (mask in valid)
