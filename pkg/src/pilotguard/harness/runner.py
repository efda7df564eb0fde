"""Deterministic multi-rate scenario runner.

One simulated clock drives every module.  The plant steps every tick; slower
modules fire on an integer accumulator schedule (`fires`) that delivers
exactly `rate` events in any window of `plant_rate` consecutive ticks, even
when the rate does not divide the plant rate.  Within a tick the order is
fixed: plant, sensors, mapping, planner, MPC.

Runs append JSONL records: a versioned header, per-event records, and a
summary.  Logs are byte-identical across equal-seed runs, which is why wall
clock measurements live in `Metrics` and never in the log.  The logged
command stream is sufficient to re-integrate the plant bit-exactly (see
`replay`).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from ..control import GRAVITY, MpcController, MpcState
from ..mapping import LocalMap
from ..planning import NoCorridor, Unreachable, generate_sfc, joystick_to_goal, search_reference_path
from ..sim import PlantParams, generate_world, hover_state, read_odometry, sample_scan, step_plant
from ..types import AttitudeCommand
from .config import ScenarioConfig, parse_scenario
from .metrics import CLEARANCE_SENTINEL, Metrics, min_clearance, timing_stats
from .sources import Mailbox, build_source

LOG_VERSION = 1


class ReplayError(RuntimeError):
    """A log's command stream failed to reproduce its trajectory."""


def fires(tick: int, rate: int, plant_rate: int) -> bool:
    """Whether a module with `rate` events/s fires on this plant tick.

    Floor-accumulator schedule: any `plant_rate` consecutive ticks contain
    exactly `rate` firings, with no drift over arbitrarily long runs."""
    return (tick + 1) * rate // plant_rate > tick * rate // plant_rate


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass
class RunLog:
    header: dict
    records: list[dict] = field(default_factory=list)
    summary: dict | None = None

    def lines(self):
        yield dumps(self.header)
        for rec in self.records:
            yield dumps(rec)
        if self.summary is not None:
            yield dumps(self.summary)

    def to_bytes(self) -> bytes:
        return ("\n".join(self.lines()) + "\n").encode()

    def write(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path: str) -> "RunLog":
        with open(path, "r", encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        if not rows or rows[0].get("type") != "header":
            raise ValueError("log must start with a header record")
        summary = rows.pop() if rows[-1].get("type") == "summary" else None
        return cls(header=rows[0], records=rows[1:], summary=summary)


def _vec(x) -> list:
    return np.asarray(x, float).tolist()


class SimSession:
    """Owns all per-run state; `run` drives the loop to completion.

    `tick_callback(session, tick, t)` runs after each plant tick.  It is the
    hook for the serve mode (pacing, telemetry export, joystick injection via
    the mailbox) and can never affect physics except through the joystick
    mailbox, which is an explicit input.
    """

    def __init__(self, config: ScenarioConfig, mailbox: Mailbox | None = None) -> None:
        self.config = config
        self.world = generate_world(config.world.to_spec(), seed=config.seed)
        self.grid_cfg = config.grid.to_config()
        self.map = LocalMap(self.grid_cfg, center=config.initial_position)
        self.mpc_cfg = config.mpc.to_config()
        self.controller = MpcController(self.mpc_cfg)
        self.sensor_cfg = config.sensor.to_config()
        self.params = PlantParams(c_t=config.plant.c_t, tau_omega=config.plant.tau_omega)
        self.plant = hover_state(config.initial_position, config.initial_yaw)
        self.cmd = AttitudeCommand(0.0, np.zeros(3), config.plant.c_t * GRAVITY)
        self.odom = read_odometry(self.plant)
        self.wind = np.asarray(config.plant.wind, float)
        self.mailbox = mailbox if mailbox is not None else Mailbox()
        self.source = build_source(config.joystick, self.mailbox)
        self._sensor_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
        self._odom_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 2]))

        self.path = None
        self.sfc = None
        self.joy = None
        self.last_scan = None
        self.last_solution = None
        self.clearance = CLEARANCE_SENTINEL
        self.collect_patches = False
        self._patch_acc: dict[tuple, int] = {}

        self.records: list[dict] = []
        self.counters = {
            "scans": 0,
            "slides": 0,
            "joy_events": 0,
            "path_searches": 0,
            "planner_failures": 0,
            "mpc_steps": 0,
            "mpc_degraded": 0,
            "brakes": 0,
            "violations": 0,
        }
        self._timings: dict[str, list] = {"plant": [], "mapping": [], "planner": [], "mpc": []}
        self._min_clear = CLEARANCE_SENTINEL
        self._speed_sum = 0.0
        self._speed_max = 0.0
        self._path_len = 0.0
        self._ticks_done = 0
        self._in_violation = False

    # -- per-module steps -------------------------------------------------

    def _step_plant(self) -> None:
        t0 = time.perf_counter()
        self.plant = step_plant(
            self.plant, self.cmd, self.wind, 1.0 / self.config.rates.plant, self.params
        )
        self._timings["plant"].append(time.perf_counter() - t0)
        v = float(np.linalg.norm(self.plant.v))
        self._speed_sum += v
        self._speed_max = max(self._speed_max, v)
        self._path_len += v / self.config.rates.plant

    def _step_odom(self) -> None:
        noisy = self.config.plant.sigma_p > 0 or self.config.plant.sigma_v > 0
        self.odom = read_odometry(
            self.plant,
            rng=self._odom_rng if noisy else None,
            sigma_p=self.config.plant.sigma_p,
            sigma_v=self.config.plant.sigma_v,
        )

    def _step_scan(self, t: float) -> None:
        t0 = time.perf_counter()
        scan = sample_scan(
            self.world, self.plant.attitude, self.plant.p, t, self._sensor_rng, self.sensor_cfg
        )
        if self.map.maybe_slide(self.plant.p):
            self.counters["slides"] += 1
        summary = self.map.integrate_scan(scan.origin, scan.dirs, scan.ranges, scan.valid)
        self._timings["mapping"].append(time.perf_counter() - t0)
        self.last_scan = scan
        self.counters["scans"] += 1
        if self.collect_patches:
            for cell, new in zip(summary.cells.tolist(), summary.new.tolist()):
                self._patch_acc[tuple(cell)] = int(new)
        self.records.append(
            {
                "type": "scan",
                "t": t,
                "rays": int(len(scan.dirs)),
                "infinite": int(summary.infinite_rays),
                "changed": int(len(summary.cells)),
            }
        )

    def _step_planner(self, t: float) -> None:
        self.joy = self.source.get(t, self.odom)
        self.counters["joy_events"] += 1
        self.records.append(
            {
                "type": "joy",
                "t": t,
                "v": _vec(self.joy.v_cmd),
                "yaw_rate": float(self.joy.yaw_rate),
            }
        )
        goal, yaw_ref = joystick_to_goal(
            self.joy, self.odom, dt=self.config.planner.goal_lookahead
        )
        t0 = time.perf_counter()
        try:
            path = search_reference_path(
                self.map, self.odom.p, goal, beta=self.config.planner.beta, yaw_ref=yaw_ref
            )
            sfc = generate_sfc(
                self.map,
                path.p_no_inf[0],
                r_q=self.config.planner.r_q,
                sfc_range=self.config.planner.sfc_range,
            )
        except (Unreachable, NoCorridor) as e:
            self._timings["planner"].append(time.perf_counter() - t0)
            self.path = None
            self.sfc = None
            self.counters["path_searches"] += 1
            self.counters["planner_failures"] += 1
            self.records.append(
                {"type": "event", "t": t, "name": type(e).__name__.lower(), "detail": str(e)}
            )
            return
        self._timings["planner"].append(time.perf_counter() - t0)
        self.path = path
        self.sfc = sfc
        self.counters["path_searches"] += 1
        self.records.append(
            {
                "type": "path",
                "t": t,
                "goal": _vec(path.goal),
                "yaw_ref": float(path.yaw_ref),
                "p_inf": _vec(path.p_inf),
                "p_no_inf": _vec(path.p_no_inf),
            }
        )
        self.records.append(
            {
                "type": "sfc",
                "t": t,
                "C": _vec(sfc.C),
                "d": _vec(sfc.d),
                "d_pre": _vec(sfc.d_pre),
            }
        )

    def _step_mpc(self, tick: int, t: float) -> None:
        state = MpcState(p=self.odom.p, v=self.odom.v, a=self.odom.a)
        t0 = time.perf_counter()
        cmd, sol, _refs = self.controller.step(
            state, self.odom.yaw, self.path, self.sfc, stamp=t
        )
        self._timings["mpc"].append(time.perf_counter() - t0)
        self.cmd = cmd
        self.last_solution = sol
        self.counters["mpc_steps"] += 1
        if sol is None:
            self.counters["brakes"] += 1
        elif sol.status != "solved":
            self.counters["mpc_degraded"] += 1

        clearance = self.world.clearance(self.plant.p, t, include_ground=False)
        self.clearance = clearance
        self._min_clear = min(self._min_clear, clearance)
        violated = clearance < self.config.vehicle_radius
        if violated and not self._in_violation:
            self.counters["violations"] += 1
            self.records.append(
                {"type": "event", "t": t, "name": "safety_violation", "detail": f"clearance {clearance:.3f}"}
            )
        self._in_violation = violated

        solver = None
        if sol is not None:
            solver = {
                "status": sol.status,
                "iterations": int(sol.iterations),
                "slack": float(sol.slack),
            }
        self.records.append(
            {
                "type": "tick",
                "tick": tick,
                "t": t,
                "p": _vec(self.plant.p),
                "v": _vec(self.plant.v),
                "yaw": float(self.plant.yaw),
                "cmd": {"rates": _vec(cmd.rates), "thrust": float(cmd.thrust)},
                "odom": {
                    "p": _vec(self.odom.p),
                    "v": _vec(self.odom.v),
                    "a": _vec(self.odom.a),
                    "yaw": float(self.odom.yaw),
                },
                "solver": solver,
                "clearance": clearance,
            }
        )

    # -- loop --------------------------------------------------------------

    def run(self, tick_callback=None) -> tuple[RunLog, Metrics]:
        cfg = self.config
        rates = cfg.rates
        total = round(cfg.duration * rates.plant)
        for n in range(total):
            t = (n + 1) / rates.plant
            self._step_plant()
            if fires(n, rates.odom, rates.plant):
                self._step_odom()
            if fires(n, rates.scan, rates.plant):
                self._step_scan(t)
            if fires(n, rates.joystick, rates.plant):
                self._step_planner(t)
            if fires(n, rates.mpc, rates.plant):
                self._step_mpc(n, t)
            self._ticks_done += 1
            if tick_callback is not None:
                tick_callback(self, n, t)
        return self._finalize()

    def _finalize(self) -> tuple[RunLog, Metrics]:
        cfg = self.config
        completion = True
        if cfg.goal is not None:
            completion = bool(
                np.linalg.norm(self.plant.p - np.asarray(cfg.goal)) <= cfg.goal_tolerance
            )
        metrics = Metrics(
            min_clearance=float(self._min_clear),
            mean_speed=self._speed_sum / max(self._ticks_done, 1),
            max_speed=self._speed_max,
            path_length=self._path_len,
            completion=completion,
            safety_violation=self._min_clear < cfg.vehicle_radius,
            counters=dict(self.counters),
            timings={name: timing_stats(samples) for name, samples in self._timings.items()},
        )
        header = {
            "type": "header",
            "version": LOG_VERSION,
            "config": cfg.model_dump(mode="json"),
        }
        log = RunLog(header=header, records=self.records, summary=metrics.summary_payload())
        return log, metrics

    # -- UI support ---------------------------------------------------------

    def drain_patches(self) -> list:
        patches = [[list(cell), state] for cell, state in self._patch_acc.items()]
        self._patch_acc.clear()
        return patches

    def telemetry(self, max_scan_points: int = 400) -> dict:
        """Latest state bundle for the UI bridge."""
        pts: list = []
        scan = self.last_scan
        if scan is not None:
            hits = scan.valid
            endpoints = scan.origin + scan.dirs[hits] * scan.ranges[hits, None]
            step = max(1, len(endpoints) // max_scan_points)
            pts = endpoints[::step].tolist()
        frame = {
            "t": float(self.plant.t_sim),
            "p": _vec(self.plant.p),
            "v": _vec(self.plant.v),
            "yaw": float(self.plant.yaw),
            "clearance": float(self.clearance),
            "path": None,
            "sfc": None,
            "scan_points": pts,
        }
        if self.path is not None:
            frame["path"] = {
                "p_inf": _vec(self.path.p_inf),
                "p_no_inf": _vec(self.path.p_no_inf),
                "goal": _vec(self.path.goal),
            }
        if self.sfc is not None:
            frame["sfc"] = {"C": _vec(self.sfc.C), "d": _vec(self.sfc.d)}
        return frame


def run_scenario(config: ScenarioConfig, mailbox: Mailbox | None = None, tick_callback=None):
    """Run one scenario to completion; returns (RunLog, Metrics)."""
    session = SimSession(config, mailbox=mailbox)
    return session.run(tick_callback=tick_callback)


def replay(log: RunLog) -> np.ndarray:
    """Re-integrate the plant from the logged command stream.

    Every logged tick record must match the recomputed state bit-exactly;
    raises ReplayError otherwise.  Returns the positions at tick records."""
    cfg = parse_scenario(log.header["config"])
    params = PlantParams(c_t=cfg.plant.c_t, tau_omega=cfg.plant.tau_omega)
    state = hover_state(cfg.initial_position, cfg.initial_yaw)
    cmd = AttitudeCommand(0.0, np.zeros(3), cfg.plant.c_t * GRAVITY)
    wind = np.asarray(cfg.plant.wind, float)
    dt = 1.0 / cfg.rates.plant
    total = round(cfg.duration * cfg.rates.plant)
    ticks = [r for r in log.records if r["type"] == "tick"]
    out = []
    idx = 0
    for n in range(total):
        state = step_plant(state, cmd, wind, dt, params)
        if idx < len(ticks) and ticks[idx]["tick"] == n:
            rec = ticks[idx]
            if rec["p"] != state.p.tolist() or rec["v"] != state.v.tolist():
                raise ReplayError(f"trajectory diverged at tick {n}")
            cmd = AttitudeCommand(rec["t"], np.asarray(rec["cmd"]["rates"]), rec["cmd"]["thrust"])
            out.append(state.p.copy())
            idx += 1
    if idx != len(ticks):
        raise ReplayError(f"{len(ticks) - idx} tick records were never reached")
    return np.asarray(out).reshape(-1, 3)


def recompute_min_clearance(log: RunLog) -> float:
    """Offline clearance from logged tick records; must match the summary."""
    cfg = parse_scenario(log.header["config"])
    world = generate_world(cfg.world.to_spec(), seed=cfg.seed)
    ticks = [r for r in log.records if r["type"] == "tick"]
    if not ticks:
        return CLEARANCE_SENTINEL
    pts = np.array([r["p"] for r in ticks])
    ts = np.array([r["t"] for r in ticks])
    return min_clearance(pts, ts, world)
