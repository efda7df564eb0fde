"""Joystick command sources for the scenario runner.

All sources are pulled by the simulation loop at the joystick rate and are
functions of simulated time only, so scripted runs stay deterministic.  The
live source reads a thread-safe single-slot mailbox fed by the WebSocket
bridge; staleness beyond the fail-safe timeout degrades to hover.
"""

from __future__ import annotations

import bisect
import json
import threading
from typing import Protocol

import numpy as np

from ..geom import yaw_rotation
from ..types import JoystickCommand, Odometry
from .config import JoystickSection


class Mailbox:
    """Single-slot, latest-wins exchange between the bridge and the loop."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._item = None

    def put(self, item) -> None:
        with self._lock:
            self._item = item

    def peek(self):
        with self._lock:
            return self._item

    def take(self):
        with self._lock:
            item, self._item = self._item, None
            return item


class JoystickSource(Protocol):
    def get(self, t: float, odom: Odometry) -> JoystickCommand: ...


def _hover(t: float) -> JoystickCommand:
    return JoystickCommand(stamp=t, v_cmd=np.zeros(3), yaw_rate=0.0)


class HoverSource:
    def get(self, t: float, odom: Odometry) -> JoystickCommand:
        return _hover(t)


class ScriptSource:
    """Piecewise-constant stick schedule; zero before the first segment."""

    def __init__(self, segments) -> None:
        ordered = sorted(segments, key=lambda s: s.t)
        self._starts = [s.t for s in ordered]
        self._segments = ordered

    def get(self, t: float, odom: Odometry) -> JoystickCommand:
        i = bisect.bisect_right(self._starts, t) - 1
        if i < 0:
            return _hover(t)
        seg = self._segments[i]
        return JoystickCommand(stamp=t, v_cmd=np.asarray(seg.v, float), yaw_rate=seg.yaw_rate)


class WaypointSource:
    """Scripted pilot driving through waypoints at set speeds.

    Emits the stick deflection a human would: full commanded speed toward the
    current waypoint (in the yaw-aligned frame), advancing once inside the
    capture radius, hover after the last one."""

    def __init__(self, legs) -> None:
        self._legs = list(legs)
        self._idx = 0

    def get(self, t: float, odom: Odometry) -> JoystickCommand:
        p = np.asarray(odom.p, float)
        while self._idx < len(self._legs):
            leg = self._legs[self._idx]
            d = np.asarray(leg.point, float) - p
            dist = float(np.linalg.norm(d))
            if dist > leg.capture_radius:
                v_world = d * (leg.speed / dist)
                v_cmd = yaw_rotation(odom.yaw).T @ v_world
                return JoystickCommand(stamp=t, v_cmd=v_cmd, yaw_rate=0.0)
            self._idx += 1
        return _hover(t)


class RecordedSource:
    """Replays a stamped (t, v, yaw_rate) stream.

    Uses the latest record at or before t; silence longer than the fail-safe
    timeout degrades to hover, mirroring the live source."""

    def __init__(self, records, timeout: float = 0.5) -> None:
        ordered = sorted(records, key=lambda r: r[0])
        self._stamps = [r[0] for r in ordered]
        self._records = ordered
        self._timeout = timeout

    @classmethod
    def from_jsonl(cls, path: str, timeout: float = 0.5) -> "RecordedSource":
        records = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if obj.get("type") == "joy":
                    records.append((obj["t"], obj["v"], obj.get("yaw_rate", 0.0)))
        return cls(records, timeout=timeout)

    def get(self, t: float, odom: Odometry) -> JoystickCommand:
        i = bisect.bisect_right(self._stamps, t) - 1
        if i < 0 or t - self._stamps[i] > self._timeout:
            return _hover(t)
        _, v, yaw_rate = self._records[i]
        return JoystickCommand(stamp=t, v_cmd=np.asarray(v, float), yaw_rate=float(yaw_rate))


class LiveSource:
    """Latest mailbox command, stamped by the bridge in simulated time."""

    def __init__(self, mailbox: Mailbox, timeout: float = 0.5) -> None:
        self.mailbox = mailbox
        self._timeout = timeout

    def get(self, t: float, odom: Odometry) -> JoystickCommand:
        item = self.mailbox.peek()
        if item is None:
            return _hover(t)
        stamp, v, yaw_rate = item
        if t - stamp > self._timeout:
            return _hover(t)
        return JoystickCommand(stamp=t, v_cmd=np.asarray(v, float), yaw_rate=float(yaw_rate))


def build_source(cfg: JoystickSection, mailbox: Mailbox | None = None) -> JoystickSource:
    if cfg.source == "hover":
        return HoverSource()
    if cfg.source == "script":
        return ScriptSource(cfg.segments)
    if cfg.source == "waypoints":
        return WaypointSource(cfg.waypoints)
    if cfg.source == "recorded":
        return RecordedSource.from_jsonl(cfg.recording, timeout=cfg.failsafe_timeout)
    if cfg.source == "live":
        if mailbox is None:
            raise ValueError("live joystick source needs a mailbox (serve mode)")
        return LiveSource(mailbox, timeout=cfg.failsafe_timeout)
    raise ValueError(f"unknown joystick source '{cfg.source}'")
