"""Assisted obstacle-avoidance flight stack.

Headless-first simulator and navigation library: sliding-window occupancy
mapping with incremental inflation and frontiers, joystick-driven reference
path search with safe flight corridors, and a corridor-constrained MPC whose
solution is turned into body-rate/throttle commands through differential
flatness.  A FastAPI bridge exposes the live piloting session to a browser
client.
"""

__version__ = "0.1.0"
