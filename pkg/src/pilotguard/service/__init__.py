"""HTTP/WebSocket service and the UI wire protocol."""

from .app import BridgeState, LiveRunner, build_bundle, create_app, handle_client_text, serve_ui
from .protocol import (
    MESSAGE_TYPES,
    PROTOCOL_VERSION,
    EventMessage,
    JoyMessage,
    MapPatchMessage,
    PathMessage,
    ScanMessage,
    SfcMessage,
    TelemetryMessage,
    dump_message,
    parse_message,
)

__all__ = [
    "MESSAGE_TYPES",
    "PROTOCOL_VERSION",
    "BridgeState",
    "EventMessage",
    "JoyMessage",
    "LiveRunner",
    "MapPatchMessage",
    "PathMessage",
    "ScanMessage",
    "SfcMessage",
    "TelemetryMessage",
    "build_bundle",
    "create_app",
    "dump_message",
    "handle_client_text",
    "parse_message",
    "serve_ui",
]
