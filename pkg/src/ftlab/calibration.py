"""Versioned location tallies and the published constants they must reproduce."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import UsageError

_KNOWN = {"version", "description", "bit_extraction", "syndrome_extraction", "prep_extraction",
          "correction_and_op", "pi8_nonrecovery"}


@dataclass(frozen=True)
class Calibration:
    bit_extraction: tuple[int, int]
    syndrome_extraction: tuple[int, int]
    prep_extraction: tuple[int, int]
    correction_and_op: int
    pi8_ops: tuple[int, int]
    pi8_memory: tuple[int, int]
    source: str = "shipped"

    def extraction_size(self, with_memory: bool, prep: bool = False) -> int:
        ops, mem = self.prep_extraction if prep else self.syndrome_extraction
        return ops + mem if with_memory else ops

    def pi8_fit(self, with_memory: bool) -> tuple[int, int]:
        return self.pi8_memory if with_memory else self.pi8_ops


def _pair(d: dict, name: str) -> tuple[int, int]:
    try:
        return int(d[name]["operational"]), int(d[name]["memory"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"calibration field {name!r} needs integer operational/memory") from exc


def parse_calibration(data: dict, source: str = "") -> Calibration:
    unknown = set(data) - _KNOWN
    if unknown:
        raise UsageError(f"unknown calibration field(s): {', '.join(sorted(unknown))}")
    pi8 = data["pi8_nonrecovery"]
    fit = {k: (int(pi8[k]["extra_region"]), int(pi8[k]["adjustment"])) for k in ("operational", "memory")}
    return Calibration(
        _pair(data, "bit_extraction"),
        _pair(data, "syndrome_extraction"),
        _pair(data, "prep_extraction"),
        int(data["correction_and_op"]),
        fit["operational"],
        fit["memory"],
        source,
    )


def load_calibration(path: str | Path | None = None) -> Calibration:
    if path is None:
        text = resources.files("ftlab").joinpath("data/calibration.json").read_text()
        return parse_calibration(json.loads(text), "shipped")
    return parse_calibration(json.loads(Path(path).read_text()), str(path))


def load_golden() -> dict:
    return json.loads(resources.files("ftlab").joinpath("data/golden.json").read_text())
