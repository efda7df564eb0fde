from __future__ import annotations

import math

import numpy as np
import pytest

from pilotguard.mapping import (
    CellState,
    GridConfig,
    InflationState,
    LocalMap,
    cell_of,
    logodds_to_prob,
    precompute_offsets,
    prob_to_logodds,
    update_cell,
)

import oracles


def small_config(**kw) -> GridConfig:
    base = dict(dims=(64, 64, 32), resolution=0.1)
    base.update(kw)
    return GridConfig(**base)


# ---------------------------------------------------------------------------
# pure cell math
# ---------------------------------------------------------------------------

def test_logodds_round_trip() -> None:
    assert prob_to_logodds(0.5) == 0.0
    assert abs(prob_to_logodds(0.7) - 0.8473) < 5e-5
    assert abs(prob_to_logodds(0.3) + 0.8473) < 5e-5
    assert prob_to_logodds(0.7) == pytest.approx(-prob_to_logodds(0.3), abs=1e-12)
    for p in (0.0, 1.0, -0.1, 1.3):
        with pytest.raises(ValueError):
            prob_to_logodds(p)


def test_update_cell_hit_and_clamp() -> None:
    cfg = GridConfig()
    assert abs(update_cell(0.0, True, cfg) - 0.8473) < 5e-5
    assert update_cell(cfg.l_max, True, cfg) == cfg.l_max
    assert update_cell(cfg.l_min, False, cfg) == cfg.l_min
    with pytest.raises(ValueError):
        update_cell(float("nan"), True, cfg)


def test_update_matches_probability_form() -> None:
    # prior 0.6 plus a 0.7 measurement: the odds-product posterior must equal
    # the sigmoid of the summed log-odds.
    post = oracles.bayes_update(0.6, 0.7)
    assert abs(post - 0.7778) < 5e-5
    l = prob_to_logodds(0.6) + prob_to_logodds(0.7)
    assert abs(logodds_to_prob(l) - post) < 1e-12


def test_long_random_sequence_tracks_probability_oracle() -> None:
    # 1000 random hit/miss steps, no clamping: log-odds pipeline vs the
    # iterated probability update, compared pre-clamp.
    cfg = GridConfig(l_min=-2000.0, l_max=2000.0)
    rng = np.random.default_rng(42)
    l = 0.0
    p = 0.5
    worst = 0.0
    for _ in range(1000):
        hit = bool(rng.random() < 1.0 / 3.0)
        l = update_cell(l, hit, cfg)
        p = oracles.bayes_update(p, cfg.p_hit if hit else cfg.p_miss)
        worst = max(worst, abs(logodds_to_prob(l) - p))
    assert worst < 1e-9


def test_offset_cardinalities() -> None:
    assert len(precompute_offsets(0.2, 0.1, ndim=2)) == 9
    assert len(precompute_offsets(0.2, 0.1, ndim=3)) == 27
    assert precompute_offsets(0.0, 0.1).tolist() == [[0, 0, 0]]
    # Strictness at the boundary: a two-cell axial offset has norm exactly r.
    offs = precompute_offsets(0.2, 0.1, ndim=2)
    assert [2, 0] not in offs.tolist()


def test_cell_convention_centers() -> None:
    assert cell_of(np.array([0.0, 0.0, 0.0]), 0.1).tolist() == [0, 0, 0]
    assert cell_of(np.array([1.0, 0.0, 0.0]), 0.1).tolist() == [10, 0, 0]
    assert cell_of(np.array([-0.04, 0.04, 0.06]), 0.1).tolist() == [0, 0, 1]


# ---------------------------------------------------------------------------
# incremental layers vs batch recomputation
# ---------------------------------------------------------------------------

def test_fresh_grid_counters() -> None:
    m = LocalMap(small_config())
    assert int(m.n_occ.max()) == 0
    assert int(m.n_f.max()) == 0
    assert int(m.n_unk.min()) == len(m.unk_off)
    assert m.state_at((0.0, 0.0, 0.0)) is CellState.UNKNOWN
    assert m.inflated_state_at((0.0, 0.0, 0.0)) is InflationState.UNKNOWN_INFLATION


def test_single_occupied_transition_and_involution() -> None:
    m = LocalMap(small_config())
    baseline = (m.n_occ.copy(), m.n_unk.copy(), m.n_f.copy())
    # Drive one cell to Occupied with hits.
    p = np.array([0.5, 0.2, 0.3])
    m.apply_measurements([p], [True])
    cell = cell_of(p, 0.1)
    occ, unk, _ = m.counters_at(cell[None, :])
    assert occ[0] == 1 and unk[0] == len(m.unk_off) - 1
    neighbors = cell + m.occ_off
    occ_n, _, _ = m.counters_at(neighbors)
    assert np.all(occ_n >= 1)
    # Enough misses to march back below the occupied threshold and into
    # KnownFree, then hits to return to Unknown territory cannot restore the
    # original counters exactly unless we land in the same state; instead walk
    # the exact inverse: misses to Unknown.
    m.apply_measurements([p, p], [False, False])
    assert m.state_at(p) is CellState.UNKNOWN
    np.testing.assert_array_equal(m.n_occ, baseline[0])
    np.testing.assert_array_equal(m.n_unk, baseline[1])
    np.testing.assert_array_equal(m.n_f, baseline[2])


def test_free_cell_creates_frontier_ring() -> None:
    m = LocalMap(small_config())
    p = np.array([0.0, 0.0, 0.0])
    m.apply_measurements([p, p, p], [False, False, False])
    assert m.state_at(p) is CellState.KNOWN_FREE
    cell = cell_of(p, 0.1)
    assert not m.is_frontier(cell)  # the free cell itself is not a frontier
    for dx, dy, dz in [(1, 0, 0), (-1, 1, 0), (1, 1, 1), (0, 0, -1)]:
        assert m.is_frontier(cell + np.array([dx, dy, dz]))
    _, _, nf = m.counters_at((cell + np.array([1, 0, 0]))[None, :])
    assert nf[0] == 1
    # One hit pulls the cell back into the Unknown band: frontiers disappear.
    m.apply_measurements([p], [True])
    assert m.state_at(p) is CellState.UNKNOWN
    assert len(m.frontier_cells()) == 0


def test_incremental_equals_batch_after_random_mutations() -> None:
    rng = np.random.default_rng(0)
    for _ in range(10):
        m = LocalMap(small_config(dims=(32, 32, 16)))
        lo, hi = m.window_bounds()
        pts = rng.uniform(lo + 0.05, hi - 0.05, size=(150, 3))
        hits = rng.random(150) < 0.5
        m.apply_measurements(pts, hits)
        m.validate()
        states, _, n_occ, n_unk, n_f = oracles.dense_window(m)
        b_occ, b_unk, b_f = oracles.batch_counters(states, m.occ_off, m.unk_off)
        np.testing.assert_array_equal(n_occ, b_occ)
        np.testing.assert_array_equal(n_unk, b_unk)
        np.testing.assert_array_equal(n_f, b_f)
        fr = oracles.batch_frontiers(states, b_f)
        got = m.frontier_cells()
        want = np.argwhere(fr) + m.origin_cell
        assert sorted(map(tuple, got)) == sorted(map(tuple, want))


# ---------------------------------------------------------------------------
# scan integration
# ---------------------------------------------------------------------------

def test_axial_ray_strict_traversal() -> None:
    m = LocalMap(small_config())
    summary = m.integrate_scan(
        origin=[0.0, 0.0, 0.0],
        dirs=[[1.0, 0.0, 0.0]],
        ranges=[1.0],
        valid=[True],
    )
    assert m.state_at((1.0, 0.0, 0.0)) is CellState.OCCUPIED
    miss_cells = [(i, 0, 0) for i in range(1, 10)]
    lods = [m.log_odds_at((i * 0.1, 0.0, 0.0)) for i in range(1, 10)]
    cfg = m.config
    assert all(abs(l - cfg.l_miss) < 1e-12 for l in lods)
    # Origin cell untouched.
    assert m.log_odds_at((0.0, 0.0, 0.0)) == 0.0
    # Exactly 10 transitions: 9 cells left Unknown log-odds but stayed
    # Unknown; only the endpoint changed state.
    changed = set(map(tuple, summary.cells.tolist()))
    assert (10, 0, 0) in changed
    for c in miss_cells:
        assert c not in changed


def test_misses_accumulate_to_known_free() -> None:
    m = LocalMap(small_config())
    cfg = m.config
    need = math.ceil(-cfg.l_free / -cfg.l_miss)
    assert need == 3
    for _ in range(need):
        m.integrate_scan([0, 0, 0], [[1.0, 0, 0]], [1.0], [True])
    assert m.state_at((0.5, 0, 0)) is CellState.KNOWN_FREE


def test_infinite_point_classification_rules() -> None:
    m = LocalMap(small_config())
    up = np.array([[0.0, 0.0, 1.0]])
    assert m.classify_infinite_points([0, 0, 0], up)[0]  # empty map: infinite
    # Occupied cell at 0.5 m on the ray blocks classification.
    m.apply_measurements([[0.0, 0.0, 0.5]], [True])
    assert not m.classify_infinite_points([0, 0, 0], up)[0]
    # Occupied cell at 1.5 m is beyond the 1 m screen.
    m2 = LocalMap(small_config())
    m2.apply_measurements([[0.0, 0.0, 1.5]], [True])
    assert m2.classify_infinite_points([0, 0, 0], up)[0]


def test_infinite_rays_carve_to_window_edge() -> None:
    m = LocalMap(small_config())
    d = np.array([[1.0, 0.0, 0.0]])
    for _ in range(3):
        m.integrate_scan([0, 0, 0], d, [np.nan], [False])
    # Cells all the way to the +x window face are now KnownFree.
    lo, hi = m.window_bounds()
    probe = np.arange(0.1, hi[0] - 0.05, 0.1)
    for x in probe:
        assert m.state_at((x, 0.0, 0.0)) is CellState.KNOWN_FREE, x
    # Blocked invalid ray: no updates at all along it.
    m3 = LocalMap(small_config())
    m3.apply_measurements([[0.5, 0.0, 0.0]], [True])
    before = m3.log_odds.copy()
    expected_hit_cell = m3.log_odds_at((0.5, 0.0, 0.0))
    m3.integrate_scan([0, 0, 0], d, [np.nan], [False])
    np.testing.assert_array_equal(m3.log_odds, before)
    assert m3.log_odds_at((0.5, 0.0, 0.0)) == expected_hit_cell


def test_hit_beyond_raycast_range_still_marked() -> None:
    cfg = small_config(dims=(128, 64, 32), raycast_range=3.0)
    m = LocalMap(cfg, center=(0.0, 0.0, 0.0))
    m.integrate_scan([0, 0, 0], [[1.0, 0.0, 0.0]], [5.0], [True])
    assert m.state_at((5.0, 0.0, 0.0)) is CellState.OCCUPIED
    # Misses truncated at raycast_range: past it, cells stay untouched.
    assert m.log_odds_at((3.5, 0.0, 0.0)) == 0.0
    assert m.log_odds_at((2.5, 0.0, 0.0)) < 0.0
    # The truncation cell itself is a miss (it is not the hit endpoint).
    assert m.log_odds_at((3.0, 0.0, 0.0)) < 0.0


def test_scan_origin_must_be_inside() -> None:
    m = LocalMap(small_config())
    with pytest.raises(ValueError):
        m.integrate_scan([100.0, 0, 0], [[1.0, 0, 0]], [1.0], [True])


def test_random_scans_preserve_layer_equivalence() -> None:
    rng = np.random.default_rng(5)
    m = LocalMap(small_config(dims=(48, 48, 24)))
    for _ in range(5):
        n = 64
        dirs = rng.normal(size=(n, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        ranges = rng.uniform(0.3, 4.0, size=n)
        valid = rng.random(n) < 0.8
        m.integrate_scan([0.0, 0.0, 0.0], dirs, ranges, valid)
    m.validate()
    states, _, n_occ, n_unk, n_f = oracles.dense_window(m)
    b_occ, b_unk, b_f = oracles.batch_counters(states, m.occ_off, m.unk_off)
    np.testing.assert_array_equal(n_occ, b_occ)
    np.testing.assert_array_equal(n_unk, b_unk)
    np.testing.assert_array_equal(n_f, b_f)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def test_threshold_boundary_inclusive() -> None:
    m = LocalMap(small_config())
    cfg = m.config
    # One hit lands exactly on the occupied threshold.
    assert cfg.l_occ == cfg.l_hit
    m.apply_measurements([[0.0, 0.0, 0.0]], [True])
    assert m.state_at((0.0, 0.0, 0.0)) is CellState.OCCUPIED


def test_outside_window_reads_unknown() -> None:
    m = LocalMap(small_config())
    far = (1000.0, 0.0, 0.0)
    assert m.state_at(far) is CellState.UNKNOWN
    assert m.inflated_state_at(far) is InflationState.UNKNOWN_INFLATION
    assert not m.contains(far)


def test_occupied_inflation_wins_over_unknown() -> None:
    m = LocalMap(small_config())
    m.apply_measurements([[0.0, 0.0, 0.0]], [True])
    assert m.inflated_state_at((0.05, 0.0, 0.0)) is InflationState.OCCUPIED_INFLATION


# ---------------------------------------------------------------------------
# sliding
# ---------------------------------------------------------------------------

def _world_snapshot(m: LocalMap):
    states, lods, *_ = oracles.dense_window(m)
    out = {}
    o = m.origin_cell
    nz = np.argwhere(states != 0)
    for idx in nz:
        w = tuple((o + idx).tolist())
        out[w] = (int(states[tuple(idx)]), float(lods[tuple(idx)]))
    return out


def test_subcell_motion_is_noop() -> None:
    m = LocalMap(small_config())
    before = m.origin_cell.copy()
    assert not m.maybe_slide((0.04, -0.03, 0.02))
    np.testing.assert_array_equal(m.origin_cell, before)


def test_slide_one_meter_keeps_surviving_region() -> None:
    rng = np.random.default_rng(9)
    m = LocalMap(small_config())
    lo, hi = m.window_bounds()
    pts = rng.uniform(lo + 0.05, hi - 0.05, size=(300, 3))
    m.apply_measurements(pts, rng.random(300) < 0.6)
    before = _world_snapshot(m)
    assert m.maybe_slide((1.0, 0.0, 0.0))
    np.testing.assert_array_equal(m.center_cell, cell_of(np.array([1.0, 0.0, 0.0]), 0.1))
    after = _world_snapshot(m)
    new_lo = m.origin_cell
    new_hi = m.origin_cell + m.dims
    for w, val in before.items():
        inside = all(new_lo[a] <= w[a] < new_hi[a] for a in range(3))
        if inside:
            assert after.get(w) == val, w
        else:
            assert w not in after
    # No surviving-region cell may appear out of nowhere.
    for w in after:
        assert w in before
    # Counters equal a from-scratch rebuild.
    m.validate()
    states, _, n_occ, n_unk, n_f = oracles.dense_window(m)
    b_occ, b_unk, b_f = oracles.batch_counters(states, m.occ_off, m.unk_off)
    np.testing.assert_array_equal(n_occ, b_occ)
    np.testing.assert_array_equal(n_unk, b_unk)
    np.testing.assert_array_equal(n_f, b_f)


def test_slide_past_window_resets_everything() -> None:
    m = LocalMap(small_config())
    m.apply_measurements([[0.0, 0.0, 0.0]], [True])
    m.slide((500.0, 0.0, 0.0))
    assert int((m.state != 0).sum()) == 0
    assert int(m.n_occ.max()) == 0
    assert int(m.n_unk.min()) == len(m.unk_off)
    assert m.state_at((500.0, 0.0, 0.0)) is CellState.UNKNOWN


def test_repeated_random_slides_stay_consistent() -> None:
    rng = np.random.default_rng(21)
    m = LocalMap(small_config(dims=(32, 32, 16)))
    center = np.zeros(3)
    for _ in range(15):
        lo, hi = m.window_bounds()
        pts = rng.uniform(lo + 0.05, hi - 0.05, size=(60, 3))
        m.apply_measurements(pts, rng.random(60) < 0.5)
        center = center + rng.uniform(-1.5, 1.5, size=3)
        m.slide(center)
        m.validate()
    states, _, n_occ, n_unk, n_f = oracles.dense_window(m)
    b_occ, b_unk, b_f = oracles.batch_counters(states, m.occ_off, m.unk_off)
    np.testing.assert_array_equal(n_occ, b_occ)
    np.testing.assert_array_equal(n_unk, b_unk)
    np.testing.assert_array_equal(n_f, b_f)


def test_dump_states_format() -> None:
    m = LocalMap(small_config())
    m.apply_measurements([[0.3, 0.0, 0.0]], [True])
    dump = m.dump_states()
    lines = dump.splitlines()
    assert len(lines) == 1
    x, y, z, s = lines[0].split()
    assert float(x) == pytest.approx(0.3)
    assert int(s) == int(CellState.OCCUPIED)
