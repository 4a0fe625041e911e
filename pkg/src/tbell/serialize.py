"""JSON wire formats for channels, scenarios, and conditioned processes.

A channel is ``{"shift": [x, y, z], "matrix": [[...], [...], [...]]}`` with
row-major 64-bit floats.  A scenario document carries ``v``, the four
measurement directions and three channels keyed ``lambda_A``, ``lambda_E``,
``lambda_B``; a conditioned-process document instead carries the four
channels ``lambda_31``, ``lambda_41``, ``lambda_32``, ``lambda_42``.
Loaders validate shapes and Bloch constraints and report the offending field
path on failure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channels import AffineChannel
from .scenario import IndivisibleProcess, TemporalScenario

__all__ = [
    "ScenarioFormatError",
    "ProcessDocument",
    "channel_to_obj",
    "channel_from_obj",
    "scenario_to_obj",
    "scenario_from_obj",
    "process_to_obj",
    "process_from_obj",
    "parse_document",
    "load_document",
]

UNIT_TOL = 1e-9


class ScenarioFormatError(Exception):
    """Malformed or unphysical document; ``field`` names the offending path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True, eq=False)
class ProcessDocument:
    """A conditioned process together with its input state and settings."""

    process: IndivisibleProcess
    v: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray


def _numbers(value, field: str, count: int) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != count:
        raise ScenarioFormatError(field, f"expected {count} numbers")
    try:
        arr = np.array([float(x) for x in value])
    except (TypeError, ValueError):
        raise ScenarioFormatError(field, f"expected {count} numbers") from None
    if not np.all(np.isfinite(arr)):
        raise ScenarioFormatError(field, "entries must be finite")
    return arr


def _vector(obj, field: str) -> np.ndarray:
    if field not in obj:
        raise ScenarioFormatError(field, "missing")
    return _numbers(obj[field], field, 3)


def _unit(obj, field: str) -> np.ndarray:
    vec = _vector(obj, field)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ScenarioFormatError(field, f"expected a unit vector, got norm {norm!r}")
    return vec


def _bloch(obj, field: str) -> np.ndarray:
    vec = _vector(obj, field)
    norm = float(np.linalg.norm(vec))
    if norm > 1.0 + UNIT_TOL:
        raise ScenarioFormatError(field, f"must lie inside the Bloch ball, got norm {norm!r}")
    return vec


def channel_to_obj(ch: AffineChannel) -> dict:
    return {
        "shift": [float(x) for x in ch.shift],
        "matrix": [[float(x) for x in row] for row in ch.matrix],
    }


def channel_from_obj(obj, field: str = "channel") -> AffineChannel:
    if not isinstance(obj, dict):
        raise ScenarioFormatError(field, "expected an object with 'shift' and 'matrix'")
    if "shift" not in obj:
        raise ScenarioFormatError(f"{field}.shift", "missing")
    shift = _numbers(obj["shift"], f"{field}.shift", 3)
    if "matrix" not in obj:
        raise ScenarioFormatError(f"{field}.matrix", "missing")
    rows = obj["matrix"]
    if not isinstance(rows, (list, tuple)) or len(rows) != 3:
        raise ScenarioFormatError(f"{field}.matrix", "expected 3 rows of 3 numbers")
    matrix = np.vstack([_numbers(rows[i], f"{field}.matrix[{i}]", 3) for i in range(3)])
    return AffineChannel(shift, matrix)


def scenario_to_obj(sc: TemporalScenario) -> dict:
    return {
        "v": [float(x) for x in sc.v],
        "a1": [float(x) for x in sc.a1],
        "a2": [float(x) for x in sc.a2],
        "b1": [float(x) for x in sc.b1],
        "b2": [float(x) for x in sc.b2],
        "lambda_A": channel_to_obj(sc.lambda_a),
        "lambda_E": channel_to_obj(sc.lambda_e),
        "lambda_B": channel_to_obj(sc.lambda_b),
    }


def scenario_from_obj(obj) -> TemporalScenario:
    if not isinstance(obj, dict):
        raise ScenarioFormatError("document", "expected a JSON object")
    for key in ("lambda_A", "lambda_E", "lambda_B"):
        if key not in obj:
            raise ScenarioFormatError(key, "missing")
    return TemporalScenario(
        v=_bloch(obj, "v"),
        lambda_a=channel_from_obj(obj["lambda_A"], "lambda_A"),
        lambda_e=channel_from_obj(obj["lambda_E"], "lambda_E"),
        lambda_b=channel_from_obj(obj["lambda_B"], "lambda_B"),
        a1=_unit(obj, "a1"),
        a2=_unit(obj, "a2"),
        b1=_unit(obj, "b1"),
        b2=_unit(obj, "b2"),
    )


def process_to_obj(doc: ProcessDocument) -> dict:
    return {
        "v": [float(x) for x in doc.v],
        "a1": [float(x) for x in doc.a1],
        "a2": [float(x) for x in doc.a2],
        "b1": [float(x) for x in doc.b1],
        "b2": [float(x) for x in doc.b2],
        "lambda_31": channel_to_obj(doc.process.lambda_31),
        "lambda_41": channel_to_obj(doc.process.lambda_41),
        "lambda_32": channel_to_obj(doc.process.lambda_32),
        "lambda_42": channel_to_obj(doc.process.lambda_42),
    }


def process_from_obj(obj) -> ProcessDocument:
    if not isinstance(obj, dict):
        raise ScenarioFormatError("document", "expected a JSON object")
    for key in ("lambda_31", "lambda_41", "lambda_32", "lambda_42"):
        if key not in obj:
            raise ScenarioFormatError(key, "missing")
    process = IndivisibleProcess(
        lambda_31=channel_from_obj(obj["lambda_31"], "lambda_31"),
        lambda_41=channel_from_obj(obj["lambda_41"], "lambda_41"),
        lambda_32=channel_from_obj(obj["lambda_32"], "lambda_32"),
        lambda_42=channel_from_obj(obj["lambda_42"], "lambda_42"),
    )
    return ProcessDocument(
        process=process,
        v=_bloch(obj, "v"),
        a1=_unit(obj, "a1"),
        a2=_unit(obj, "a2"),
        b1=_unit(obj, "b1"),
        b2=_unit(obj, "b2"),
    )


def parse_document(text: str):
    """Parse scenario or process JSON, detecting the kind by its keys.

    Returns ``("scenario", TemporalScenario)`` or
    ``("process", ProcessDocument)``.  JSON syntax errors propagate as
    ``json.JSONDecodeError`` (with line and column); semantic errors raise
    ScenarioFormatError naming the field.
    """
    obj = json.loads(text)
    if isinstance(obj, dict) and "lambda_31" in obj:
        return "process", process_from_obj(obj)
    return "scenario", scenario_from_obj(obj)


def load_document(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_document(fh.read())
