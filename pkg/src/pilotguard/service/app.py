"""FastAPI service: headless runs over REST plus the live WebSocket bridge.

The simulation loop stays single-threaded and deterministic; the bridge
exchanges data with it through exactly two single-slot mailboxes (latest
joystick in — owned by SimSession — and latest telemetry bundle out), so a
slow or absent client can only ever cost the UI dropped frames, never
perturb the physics.
"""

from __future__ import annotations

import threading
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, ValidationError

from ..harness import Metrics, RunLog, SimSession, get_scenario, parse_scenario
from ..harness.scenarios import BUILTINS
from .protocol import (
    EventMessage,
    MapPatchMessage,
    PathMessage,
    ScanMessage,
    SfcMessage,
    TelemetryMessage,
    dump_message,
    parse_message,
)


class BridgeState:
    """Shared between the loop thread and the socket handlers."""

    def __init__(self, session: SimSession) -> None:
        self.session = session
        self.outbound = None  # latest telemetry bundle, single slot
        self._lock = threading.Lock()
        self.malformed = 0
        self._event_cursor = 0
        session.collect_patches = True

    def publish(self, bundle: list[str]) -> None:
        with self._lock:
            self.outbound = bundle

    def take_bundle(self):
        with self._lock:
            bundle, self.outbound = self.outbound, None
            return bundle


def handle_client_text(text: str, state: BridgeState) -> bool:
    """One inbound message; only finite joy commands reach the session."""
    try:
        msg = parse_message(text)
    except (ValidationError, ValueError):
        state.malformed += 1
        return False
    if msg.type != "joy":
        state.malformed += 1
        return False
    t_sim = float(state.session.plant.t_sim)
    state.session.mailbox.put((t_sim, np.asarray(msg.v, float), float(msg.yaw_rate)))
    return True


def build_bundle(state: BridgeState) -> list[str]:
    """Wire messages describing the latest session state."""
    session = state.session
    frame = session.telemetry()
    msgs = [
        TelemetryMessage(
            t=frame["t"], p=frame["p"], v=frame["v"], yaw=frame["yaw"],
            clearance=min(frame["clearance"], 1e30),
        )
    ]
    if frame["scan_points"]:
        msgs.append(ScanMessage(t=frame["t"], points=frame["scan_points"]))
    patches = session.drain_patches()
    if patches:
        msgs.append(
            MapPatchMessage(t=frame["t"], cells=[(tuple(c), s) for c, s in patches])
        )
    if frame["path"] is not None:
        msgs.append(
            PathMessage(
                t=frame["t"],
                p_inf=frame["path"]["p_inf"],
                p_no_inf=frame["path"]["p_no_inf"],
                goal=frame["path"]["goal"],
                yaw_ref=float(session.path.yaw_ref),
            )
        )
    if frame["sfc"] is not None:
        msgs.append(SfcMessage(t=frame["t"], C=frame["sfc"]["C"], d=frame["sfc"]["d"]))
    records = session.records
    while state._event_cursor < len(records):
        rec = records[state._event_cursor]
        state._event_cursor += 1
        if rec["type"] == "event":
            msgs.append(EventMessage(t=rec["t"], name=rec["name"], detail=rec["detail"]))
    return [dump_message(m) for m in msgs]


class _Abort(Exception):
    pass


class LiveRunner(threading.Thread):
    """Drives a session, pacing the simulated clock at 1x wall time and
    publishing telemetry bundles at `publish_hz`."""

    def __init__(self, state: BridgeState, realtime: bool = True, publish_hz: int = 20):
        super().__init__(daemon=True)
        self.state = state
        self.realtime = realtime
        plant_rate = state.session.config.rates.plant
        self._publish_every = max(1, plant_rate // publish_hz)
        self._halt = threading.Event()
        self.log: RunLog | None = None
        self.metrics: Metrics | None = None

    def stop(self) -> None:
        self._halt.set()

    def run(self) -> None:
        start = time.perf_counter()

        def cb(session, tick, t):
            if self._halt.is_set():
                raise _Abort
            if (tick + 1) % self._publish_every == 0:
                self.state.publish(build_bundle(self.state))
            if self.realtime:
                lag = start + t - time.perf_counter()
                if lag > 0:
                    time.sleep(lag)

        try:
            self.log, self.metrics = self.state.session.run(tick_callback=cb)
        except _Abort:
            pass


class RunRequest(BaseModel):
    scenario: str | None = None
    config: dict | None = None
    seed: int | None = None
    duration: float | None = None


def create_app(bridge: BridgeState | None = None) -> FastAPI:
    app = FastAPI(title="pilotguard", version="1.0")
    app.state.bridge = bridge

    @app.get("/health")
    def health():
        out = {"status": "ok", "malformed_messages": 0}
        if app.state.bridge is not None:
            out["malformed_messages"] = app.state.bridge.malformed
            out["t_sim"] = float(app.state.bridge.session.plant.t_sim)
        return out

    @app.get("/scenarios")
    def scenarios():
        return {"scenarios": sorted(BUILTINS)}

    @app.post("/runs")
    def run(req: RunRequest):
        if (req.scenario is None) == (req.config is None):
            return {"error": "provide exactly one of 'scenario' or 'config'"}
        if req.scenario is not None:
            overrides = {}
            if req.duration is not None:
                overrides["duration"] = req.duration
            if req.seed is not None:
                overrides["seed"] = req.seed
            cfg = get_scenario(req.scenario, **overrides)
        else:
            cfg = parse_scenario(req.config)
            updates = {}
            if req.seed is not None:
                updates["seed"] = req.seed
            if req.duration is not None:
                updates["duration"] = req.duration
            if updates:
                cfg = cfg.model_copy(update=updates)
        log, metrics = SimSession(cfg).run()
        return {"summary": log.summary, "timings": metrics.timings}

    @app.websocket("/ws")
    async def ws(socket: WebSocket):
        import asyncio

        await socket.accept()
        state = app.state.bridge
        if state is None:
            await socket.send_text(
                dump_message(EventMessage(t=0.0, name="error", detail="no live session"))
            )
            await socket.close()
            return

        async def sender():
            while True:
                bundle = state.take_bundle()
                if bundle is not None:
                    for line in bundle:
                        await socket.send_text(line)
                await asyncio.sleep(0.02)

        task = asyncio.create_task(sender())
        try:
            while True:
                text = await socket.receive_text()
                handle_client_text(text, state)
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()

    return app


def serve_ui(port: int, session: SimSession, realtime: bool = True, host: str = "127.0.0.1"):
    """Run the bridge around an existing session until the process stops.

    Returns (log, metrics) if the simulation finished while serving."""
    import uvicorn

    state = BridgeState(session)
    runner = LiveRunner(state, realtime=realtime)
    app = create_app(state)
    runner.start()
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except KeyboardInterrupt:
        pass
    finally:
        runner.stop()
        runner.join(timeout=5.0)
    return runner.log, runner.metrics
