"""Sliding local occupancy map with incremental inflation and frontiers.

The map owns three coupled layers over one ring-indexed window:

* probability layer: per-cell log-odds plus the cached three-way state,
* inflation layer: counters n_occ / n_unk giving the Table-style inflated
  state (occupied inflation wins over unknown inflation),
* frontier layer: counter n_f of KnownFree cells in the 27-neighborhood.

Every state transition flows through one hook, so the derived layers can
never observe different histories.  Writers (scan integration, sliding) must
be serialized by the caller; readers may access queries between writes but
never concurrently with one.  World cells outside the window read as Unknown.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .core import CellState, GridConfig, InflationState, cell_of, precompute_offsets

_TRANSITION_CAP = 2_000_000


@dataclass
class ChangeSummary:
    """Cells whose state changed, oldest first.  `truncated` flags a summary
    whose list was capped (the map itself is still fully updated)."""

    cells: np.ndarray  # (k, 3) world cell indices
    old: np.ndarray  # (k,) CellState values
    new: np.ndarray  # (k,) CellState values
    infinite_rays: int = 0
    truncated: bool = False


class LocalMap:
    def __init__(self, config: GridConfig, center=(0.0, 0.0, 0.0)) -> None:
        self.config = config
        self.dims = np.array(config.dims, np.int64)
        self.occ_off = precompute_offsets(config.r_occ, config.resolution)
        self.unk_off = precompute_offsets(config.r_unk, config.resolution)
        self.center_cell = cell_of(np.asarray(center, float), config.resolution)
        self.origin_cell = self.center_cell - self.dims // 2
        shape = tuple(int(d) for d in config.dims)
        self.log_odds = np.zeros(shape, np.float64)
        self.state = np.zeros(shape, np.int8)
        self.n_occ = np.zeros(shape, np.int32)
        # All cells start Unknown and every out-of-window neighbor counts as
        # Unknown too, so n_unk begins at the full offset-set size everywhere.
        self.n_unk = np.full(shape, len(self.unk_off), np.int32)
        self.n_f = np.zeros(shape, np.int16)
        self._tr_cells = np.zeros((_TRANSITION_CAP, 3), np.int64)
        self._tr_old = np.zeros(_TRANSITION_CAP, np.int8)
        self._tr_new = np.zeros(_TRANSITION_CAP, np.int8)
        self._tr_count = np.zeros(1, np.int64)

    # ------------------------------------------------------------------
    # writers
    # ------------------------------------------------------------------

    def integrate_scan(self, origin, dirs, ranges, valid) -> ChangeSummary:
        """Fold one scan into the map.

        `dirs` are unit vectors, `ranges` the measured distances, `valid`
        flags real returns.  Invalid rays are first screened: only those with
        no Occupied cell within 1 m (against the pre-scan map) are treated as
        infinitely far and carved as free space to the window boundary.
        """
        origin = np.asarray(origin, float)
        if not self.contains(origin):
            raise ValueError("scan origin lies outside the map window")
        dirs = np.ascontiguousarray(dirs, np.float64)
        ranges = np.ascontiguousarray(ranges, np.float64)
        valid = np.ascontiguousarray(valid, np.bool_)
        infinite = k.classify_infinite(
            origin[0], origin[1], origin[2], dirs, ~valid,
            self.state, *self._origin_args(), self.config.resolution, 1.0,
        )
        self._tr_count[0] = 0
        cfg = self.config
        k.integrate_scan(
            origin[0], origin[1], origin[2], dirs, ranges, valid, infinite,
            cfg.raycast_range, cfg.resolution,
            *self._layer_args(), *self._origin_args(),
            cfg.l_hit, cfg.l_miss, cfg.l_occ, cfg.l_free, cfg.l_min, cfg.l_max,
            *self._tr_args(),
        )
        summary = self._drain_transitions()
        summary.infinite_rays = int(infinite.sum())
        return summary

    def classify_infinite_points(self, origin, dirs) -> np.ndarray:
        """Mask of directions whose first metre crosses no Occupied cell."""
        origin = np.asarray(origin, float)
        dirs = np.ascontiguousarray(dirs, np.float64)
        invalid = np.ones(len(dirs), np.bool_)
        return k.classify_infinite(
            origin[0], origin[1], origin[2], dirs, invalid,
            self.state, *self._origin_args(), self.config.resolution, 1.0,
        )

    def apply_measurements(self, points, hits) -> ChangeSummary:
        """Direct per-cell hit/miss updates, bypassing ray traversal."""
        cells = cell_of(np.atleast_2d(np.asarray(points, float)), self.config.resolution)
        hits = np.atleast_1d(np.asarray(hits, bool))
        deltas = np.where(hits, self.config.l_hit, self.config.l_miss)
        self._tr_count[0] = 0
        cfg = self.config
        k.apply_point_updates(
            cells, deltas,
            *self._layer_args(), *self._origin_args(),
            cfg.l_occ, cfg.l_free, cfg.l_min, cfg.l_max,
            *self._tr_args(),
        )
        return self._drain_transitions()

    def maybe_slide(self, position) -> bool:
        """Recenter onto `position` if it drifted at least the slide threshold
        along any axis.  Slides move by whole cells, per axis."""
        desired = cell_of(np.asarray(position, float), self.config.resolution)
        delta = desired - self.center_cell
        move = np.where(
            np.abs(delta) * self.config.resolution >= self.config.slide_threshold,
            delta,
            0,
        )
        if not move.any():
            return False
        self._slide_by(move)
        return True

    def slide(self, new_center) -> ChangeSummary:
        """Unconditional recenter onto the cell containing `new_center`."""
        desired = cell_of(np.asarray(new_center, float), self.config.resolution)
        return self._slide_by(desired - self.center_cell)

    def _slide_by(self, delta_cells) -> ChangeSummary:
        delta = np.asarray(delta_cells, np.int64)
        old_origin = self.origin_cell.copy()
        new_origin = old_origin + delta
        self._tr_count[0] = 0
        # Leaving cells drop to Unknown through the standard hooks, so the
        # surviving cells' counters already reflect the new neighborhood.
        for lo, hi in _box_difference(old_origin, new_origin, self.dims):
            k.demote_box(
                lo[0], lo[1], lo[2], hi[0], hi[1], hi[2],
                *self._layer_args(),
                old_origin[0], old_origin[1], old_origin[2],
                *self._tr_args(),
            )
        summary = self._drain_transitions()
        self.origin_cell = new_origin
        self.center_cell = self.center_cell + delta
        entering = _box_difference(new_origin, old_origin, self.dims)
        # Reset every entering box before recomputing any: recomputation reads
        # neighbor states across box boundaries.
        for lo, hi in entering:
            k.reset_box(
                lo[0], lo[1], lo[2], hi[0], hi[1], hi[2],
                self.log_odds, self.state, self.n_occ, self.n_unk, self.n_f,
            )
        for lo, hi in entering:
            k.recompute_box(
                lo[0], lo[1], lo[2], hi[0], hi[1], hi[2],
                self.state, self.n_occ, self.n_unk, self.n_f,
                self.occ_off, self.unk_off,
                *self._origin_args(),
            )
        return summary

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    def contains(self, p) -> bool:
        cell = cell_of(np.asarray(p, float), self.config.resolution)
        return bool(
            np.all(cell >= self.origin_cell) and np.all(cell < self.origin_cell + self.dims)
        )

    def state_at(self, p) -> CellState:
        cell = cell_of(np.asarray(p, float), self.config.resolution)
        return CellState(int(self.states(cell[None, :])[0]))

    def inflated_state_at(self, p) -> InflationState:
        cell = cell_of(np.asarray(p, float), self.config.resolution)
        return InflationState(int(self.inflation_states(cell[None, :])[0]))

    def is_frontier(self, cell) -> bool:
        cell = np.asarray(cell, np.int64)
        if not self._in_window(cell[None, :])[0]:
            return False
        i, j, l = (cell % self.dims).tolist()
        if self.state[i, j, l] != CellState.UNKNOWN:
            return False
        return 0 < int(self.n_f[i, j, l]) < 27

    def states(self, cells) -> np.ndarray:
        """Cell states for (k,3) world cells; outside the window reads Unknown."""
        cells = np.asarray(cells, np.int64)
        out = np.full(len(cells), CellState.UNKNOWN, np.int8)
        inw = self._in_window(cells)
        idx = cells[inw] % self.dims
        out[inw] = self.state[idx[:, 0], idx[:, 1], idx[:, 2]]
        return out

    def inflation_states(self, cells) -> np.ndarray:
        """Inflated-map states; outside the window reads UnknownInflation."""
        cells = np.asarray(cells, np.int64)
        out = np.full(len(cells), InflationState.UNKNOWN_INFLATION, np.int8)
        inw = self._in_window(cells)
        idx = cells[inw] % self.dims
        occ = self.n_occ[idx[:, 0], idx[:, 1], idx[:, 2]]
        unk = self.n_unk[idx[:, 0], idx[:, 1], idx[:, 2]]
        val = np.where(
            occ > 0,
            InflationState.OCCUPIED_INFLATION,
            np.where(
                unk > 0, InflationState.UNKNOWN_INFLATION, InflationState.NO_INFLATION
            ),
        ).astype(np.int8)
        out[inw] = val
        return out

    def counters_at(self, cells):
        cells = np.asarray(cells, np.int64)
        idx = cells % self.dims
        sel = (idx[:, 0], idx[:, 1], idx[:, 2])
        return self.n_occ[sel].copy(), self.n_unk[sel].copy(), self.n_f[sel].copy()

    def log_odds_at(self, p) -> float:
        cell = cell_of(np.asarray(p, float), self.config.resolution)
        if not self._in_window(cell[None, :])[0]:
            return 0.0
        i, j, l = (cell % self.dims).tolist()
        return float(self.log_odds[i, j, l])

    def occupied_cells(self, lo=None, hi=None) -> np.ndarray:
        return self._collect(lo, hi, mode=0)

    def frontier_cells(self, lo=None, hi=None) -> np.ndarray:
        return self._collect(lo, hi, mode=1)

    def obstacle_cells(self, lo=None, hi=None) -> np.ndarray:
        """Occupied plus frontier cells: everything a corridor must exclude."""
        return self._collect(lo, hi, mode=2)

    def window_bounds(self):
        res = self.config.resolution
        lo = (self.origin_cell - 0.5) * res
        hi = (self.origin_cell + self.dims - 0.5) * res
        return lo, hi

    def dump_states(self) -> str:
        """Non-Unknown cells as "x y z state" lines (debug/diff interface)."""
        cells = self._collect(None, None, mode=3)
        states = self.states(cells)
        res = self.config.resolution
        lines = [
            f"{c[0] * res:.3f} {c[1] * res:.3f} {c[2] * res:.3f} {int(s)}"
            for c, s in zip(cells, states)
        ]
        return "\n".join(lines)

    def validate(self) -> None:
        """Cheap internal-consistency assertions for test harnesses."""
        if int(self.n_occ.min()) < 0 or int(self.n_unk.min()) < 0:
            raise AssertionError("inflation counter underflow")
        if int(self.n_f.min()) < 0 or int(self.n_f.max()) > 27:
            raise AssertionError("frontier counter out of range")
        if int(self.n_occ.max()) > len(self.occ_off):
            raise AssertionError("occupied counter overflow")
        if int(self.n_unk.max()) > len(self.unk_off):
            raise AssertionError("unknown counter overflow")

    # ------------------------------------------------------------------
    # internals
    # ------------------------------------------------------------------

    def _in_window(self, cells: np.ndarray) -> np.ndarray:
        return np.all(
            (cells >= self.origin_cell) & (cells < self.origin_cell + self.dims), axis=1
        )

    def _collect(self, lo, hi, mode: int) -> np.ndarray:
        if lo is None:
            lo_c = self.origin_cell
        else:
            lo_c = cell_of(np.asarray(lo, float), self.config.resolution)
        if hi is None:
            hi_c = self.origin_cell + self.dims
        else:
            hi_c = cell_of(np.asarray(hi, float), self.config.resolution) + 1
        return k.collect_box(
            lo_c[0], lo_c[1], lo_c[2], hi_c[0], hi_c[1], hi_c[2],
            self.state, self.n_f, *self._origin_args(), mode,
        )

    def _layer_args(self):
        return (
            self.log_odds, self.state, self.n_occ, self.n_unk, self.n_f,
            self.occ_off, self.unk_off,
        )

    def _origin_args(self):
        return (
            int(self.origin_cell[0]),
            int(self.origin_cell[1]),
            int(self.origin_cell[2]),
        )

    def _tr_args(self):
        return (self._tr_cells, self._tr_old, self._tr_new, self._tr_count)

    def _drain_transitions(self) -> ChangeSummary:
        total = int(self._tr_count[0])
        kept = min(total, _TRANSITION_CAP)
        return ChangeSummary(
            cells=self._tr_cells[:kept].copy(),
            old=self._tr_old[:kept].copy(),
            new=self._tr_new[:kept].copy(),
            truncated=total > kept,
        )


def _box_difference(a_origin, b_origin, dims):
    """Disjoint boxes covering window(a) minus window(b), as (lo, hi) pairs."""
    a_lo = np.asarray(a_origin, np.int64).copy()
    a_hi = a_lo + dims
    b_lo = np.asarray(b_origin, np.int64)
    b_hi = b_lo + dims
    boxes = []
    lo = a_lo.copy()
    hi = a_hi.copy()
    for ax in range(3):
        if lo[ax] < b_lo[ax]:
            part_lo = lo.copy()
            part_hi = hi.copy()
            part_hi[ax] = min(hi[ax], b_lo[ax])
            if np.all(part_hi > part_lo):
                boxes.append((part_lo, part_hi))
        if hi[ax] > b_hi[ax]:
            part_lo = lo.copy()
            part_hi = hi.copy()
            part_lo[ax] = max(lo[ax], b_hi[ax])
            if np.all(part_hi > part_lo):
                boxes.append((part_lo, part_hi))
        lo[ax] = max(lo[ax], b_lo[ax])
        hi[ax] = min(hi[ax], b_hi[ax])
        if lo[ax] >= hi[ax]:
            break
    return boxes
