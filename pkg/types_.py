"""Shared Literal aliases and TypedDicts so records aren't bare dicts."""
from __future__ import annotations

from typing import Literal, TypedDict

Polarization = Literal["left", "right"]
Mode = Literal["response-sweep", "beta-sweep", "propagate"]
AnalyticMode = Literal["full", "frozen"]


class PulseMetrics(TypedDict):
    """Summary of one electric envelope at depth z."""

    z: float
    peak: float
    centroid: float
    phase: float
    energy: float


class OutputRecord(TypedDict):
    """One entry per written file in manifest.json."""

    path: str
    rows: int
    bytes: int


class Manifest(TypedDict):
    """Written next to the CSVs at the end of a successful run."""

    version: str
    mode: str
    created: str
    seed: int | None
    config: dict
    files: list[OutputRecord]
