"""Wire protocol for the pilot UI bridge.

JSON text messages, each carrying a "type" discriminator and a schema
version.  The same schemas are mirrored by the browser client; golden files
under protocol/golden/ pin the wire format for both sides.
"""

from __future__ import annotations

import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator

PROTOCOL_VERSION = 1

Vec3 = tuple[float, float, float]


class _Message(BaseModel):
    model_config = ConfigDict(extra="forbid")
    version: int = PROTOCOL_VERSION


class JoyMessage(_Message):
    """Client -> server stick command, already scaled to m/s and rad/s."""

    type: Literal["joy"] = "joy"
    t: float
    v: Vec3
    yaw_rate: float = 0.0

    @field_validator("v", "yaw_rate", "t")
    @classmethod
    def _finite(cls, value):
        vals = value if isinstance(value, tuple) else (value,)
        if any(not math.isfinite(x) for x in vals):
            raise ValueError("joy fields must be finite")
        return value


class TelemetryMessage(_Message):
    type: Literal["telemetry"] = "telemetry"
    t: float
    p: Vec3
    v: Vec3
    yaw: float
    clearance: float


class ScanMessage(_Message):
    """Decimated world-frame hit points from the latest scan."""

    type: Literal["scan"] = "scan"
    t: float
    points: list[Vec3]


class MapPatchMessage(_Message):
    """Cell state deltas since the last send: [[i, j, k], state]."""

    type: Literal["map_patch"] = "map_patch"
    t: float
    cells: list[tuple[tuple[int, int, int], int]]


class PathMessage(_Message):
    type: Literal["path"] = "path"
    t: float
    p_inf: list[Vec3]
    p_no_inf: list[Vec3]
    goal: Vec3
    yaw_ref: float


class SfcMessage(_Message):
    """Corridor halfplanes: rows C x <= d."""

    type: Literal["sfc"] = "sfc"
    t: float
    C: list[Vec3]
    d: list[float]


class EventMessage(_Message):
    type: Literal["event"] = "event"
    t: float
    name: str
    detail: str = ""


Message = Annotated[
    Union[
        JoyMessage,
        TelemetryMessage,
        ScanMessage,
        MapPatchMessage,
        PathMessage,
        SfcMessage,
        EventMessage,
    ],
    Field(discriminator="type"),
]

_adapter: TypeAdapter = TypeAdapter(Message)

MESSAGE_TYPES = ("joy", "telemetry", "scan", "map_patch", "path", "sfc", "event")


def parse_message(text: str | bytes):
    """Validate one wire message; raises pydantic.ValidationError."""
    return _adapter.validate_json(text)


def dump_message(msg) -> str:
    return msg.model_dump_json()
