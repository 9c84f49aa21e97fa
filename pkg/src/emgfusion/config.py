"""Harness configuration file (JSON).

Example::

    {
      "fusion": {"threshold": 0.6, "window_ms": 500,
                 "correspondence": {"Fist": "move down", ...}},
      "rates": {"gesture": {"Fist": 0.136}, "speech": {"move down": 0.225}},
      "arm": {"step_degrees": 10, "pins": {"3": [1, -10]}},
      "aliases_path": "aliases.txt"
    }

Every section and key is optional. A relative ``aliases_path`` is resolved
against the config file's directory.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .arm import ArmConfig
from .fusion import DEFAULT_THRESHOLD, CorrespondenceTable, FusionEngine
from .net import DEFAULT_WINDOW_MS, ServerConfig
from .speech import AliasTable, default_alias_table, load_alias_table
from .synth import ErrorRateTable


@dataclass(frozen=True)
class AppConfig:
    threshold: float = DEFAULT_THRESHOLD
    window_ms: int = DEFAULT_WINDOW_MS
    correspondence: CorrespondenceTable = field(default_factory=CorrespondenceTable)
    arm: ArmConfig = field(default_factory=ArmConfig)
    rates: ErrorRateTable = field(default_factory=ErrorRateTable)
    aliases: AliasTable = field(default_factory=default_alias_table)

    @property
    def engine(self) -> FusionEngine:
        return FusionEngine(self.correspondence, self.arm, self.threshold)

    def server_config(self) -> ServerConfig:
        return ServerConfig(self.engine, self.aliases, self.window_ms)

    def echo(self) -> dict:
        return {"threshold": self.threshold, "window_ms": self.window_ms}


def load_config(path=None, threshold: float | None = None, window_ms: int | None = None) -> AppConfig:
    """Read ``path`` (if any) and apply command-line overrides on top."""
    raw: dict = {}
    base = Path(".")
    if path is not None:
        base = Path(path).parent
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    fusion = raw.get("fusion", {})
    kwargs = {}
    if "correspondence" in fusion:
        kwargs["correspondence"] = CorrespondenceTable.from_json(fusion["correspondence"])
    if "arm" in raw:
        kwargs["arm"] = ArmConfig.from_json(raw["arm"])
    if "rates" in raw:
        kwargs["rates"] = ErrorRateTable.from_json(raw["rates"])
    if raw.get("aliases_path"):
        kwargs["aliases"] = load_alias_table(base / raw["aliases_path"])
    th = float(threshold if threshold is not None else fusion.get("threshold", DEFAULT_THRESHOLD))
    if not 0.0 <= th <= 1.0:
        raise ValueError(f"threshold {th} outside [0, 1]")
    win = int(window_ms if window_ms is not None else fusion.get("window_ms", DEFAULT_WINDOW_MS))
    if win < 0:
        raise ValueError("window_ms must be nonnegative")
    return AppConfig(threshold=th, window_ms=win, **kwargs)
