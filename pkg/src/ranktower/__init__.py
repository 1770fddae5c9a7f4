"""Rank bounds for elliptic surfaces: conductors, fiber-trace scans, Nagao sums
and orbit-counting bounds along unramified towers."""

__version__ = "0.1.0"
