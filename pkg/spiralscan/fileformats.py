"""
This module provides the readers and writers of the files produced by spiralscan.

Files:
- Scan order, binary: "FSSC", u16 version, u32 height, u32 width, then one u32 linear
  index per step. Everything little-endian.
- Scan order, CSV: header "k,row,col" and one line per step.
- Heatmap: 8-bit grayscale PGM (P5), values mapped from [0, 1] to [0, 255].
- Report: JSON validated against REPORT_SCHEMA, keys sorted and floats written with
  17 significant digits so that identical runs give identical bytes.

Readers raise FileFormatError (or another SpiralScanError) on any malformed input.
"""
import io
import json
import logging
import math
import struct
from importlib import metadata
from pathlib import Path
from typing import Optional, Union

import jsonschema
import numpy as np
import pandas as pd

from . import rules
from .errors import FileFormatError, TruncatedFileError, ReportSchemaError, DimensionMismatch, InvalidGridError
from .grid import GridDims, ScanOrder, MAX_CELLS

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_HEADER = struct.Struct("<4sHII")
HEADER_SIZE = _HEADER.size


def tool_version() -> str:
    try:
        return metadata.version("spiralscan")
    except metadata.PackageNotFoundError:
        version_path = Path(__file__).parent.parent / "VERSION"
        if version_path.exists():
            return version_path.read_text(encoding="utf-8").strip()
        return "unknown"


def order_format_from_path(path: PathLike) -> str:
    return "csv" if Path(path).suffix.lower() == ".csv" else "bin"


# Binary scan orders

def encode_order(order: ScanOrder) -> bytes:
    header = _HEADER.pack(rules.SCAN_ORDER_MAGIC, rules.SCAN_ORDER_VERSION, order.dims.height, order.dims.width)
    return header + order.order.astype("<u4").tobytes()


def decode_order(data: bytes, dims: Optional[GridDims] = None) -> ScanOrder:
    """
    Parse the binary scan order format.

    Raises:
        TruncatedFileError: The data is shorter than its header announces.
        FileFormatError: Bad magic, unknown version, bad dimensions or trailing bytes.
        InvalidScanOrder: The indices are not a permutation.
        DimensionMismatch: The file dimensions differ from `dims`.
    """
    if len(data) < HEADER_SIZE:
        raise TruncatedFileError(f"Scan order header needs {HEADER_SIZE} bytes, got {len(data)}")
    magic, version, height, width = _HEADER.unpack_from(data)
    if magic != rules.SCAN_ORDER_MAGIC:
        raise FileFormatError(f"Bad magic {magic!r}, expected {rules.SCAN_ORDER_MAGIC!r}")
    if version != rules.SCAN_ORDER_VERSION:
        raise FileFormatError(f"Unsupported scan order version {version}, expected {rules.SCAN_ORDER_VERSION}")
    if height < 1 or width < 1 or height * width > MAX_CELLS:
        raise FileFormatError(f"Invalid grid dimensions {height}x{width} in header")
    expected = HEADER_SIZE + 4 * height * width
    if len(data) < expected:
        raise TruncatedFileError(f"Scan order for a {height}x{width} grid needs {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise FileFormatError(f"Scan order for a {height}x{width} grid needs {expected} bytes, "
                              f"got {len(data)} (trailing data)")
    file_dims = GridDims(height, width)
    if dims is not None and dims != file_dims:
        raise DimensionMismatch(f"File holds a {file_dims} order, expected {dims}")
    indices = np.frombuffer(data, dtype="<u4", offset=HEADER_SIZE).astype(np.int64)
    return ScanOrder(file_dims, indices)


def write_order_bin(order: ScanOrder, path: PathLike) -> None:
    Path(path).write_bytes(encode_order(order))


def read_order_bin(path: PathLike, dims: Optional[GridDims] = None) -> ScanOrder:
    return decode_order(Path(path).read_bytes(), dims)


# CSV scan orders

def order_to_dataframe(order: ScanOrder) -> pd.DataFrame:
    rows, cols = order.rows_cols()
    return pd.DataFrame({"k": np.arange(len(order)), "row": rows, "col": cols})


def write_order_csv(order: ScanOrder, path: PathLike) -> None:
    order_to_dataframe(order).to_csv(path, index=False, lineterminator="\n")


def parse_order_csv(text: str, dims: Optional[GridDims] = None) -> ScanOrder:
    """
    Parse the CSV scan order format. Without `dims`, the grid is inferred from the
    largest row and column.
    """
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as err:
        raise FileFormatError(f"Unreadable scan order CSV: {err}") from err
    frame = frame.fillna("")
    header = ",".join(str(column) for column in frame.columns)
    if header != rules.SCAN_ORDER_CSV_HEADER:
        raise FileFormatError(f"Bad CSV header {header!r}, expected {rules.SCAN_ORDER_CSV_HEADER!r}")
    if frame.empty:
        raise FileFormatError("Scan order CSV has no steps")
    columns = {}
    for name in ("k", "row", "col"):
        values = frame[name].str.strip()
        if not values.str.fullmatch(r"[0-9]+").all():
            position = int(np.flatnonzero(~values.str.fullmatch(r"[0-9]+").to_numpy())[0])
            raise FileFormatError(f"Column {name!r} holds a non-integer value at step {position}")
        if values.str.len().max() > 10:
            raise FileFormatError(f"Column {name!r} holds a value out of range")
        columns[name] = values.astype(np.int64).to_numpy()

    steps = columns["k"]
    mismatch = np.flatnonzero(steps != np.arange(len(steps)))
    if mismatch.size:
        raise FileFormatError(f"Step {int(steps[mismatch[0]])} found at line {int(mismatch[0]) + 2}, "
                              f"expected {int(mismatch[0])}")
    rows, cols = columns["row"], columns["col"]
    try:
        file_dims = GridDims(int(rows.max()) + 1, int(cols.max()) + 1) if dims is None else dims
    except InvalidGridError as err:
        raise FileFormatError(str(err)) from err
    if np.any(rows >= file_dims.height) or np.any(cols >= file_dims.width):
        raise DimensionMismatch(f"CSV cells fall outside the {file_dims} grid")
    return ScanOrder(file_dims, rows * file_dims.width + cols)


def read_order_csv(path: PathLike, dims: Optional[GridDims] = None) -> ScanOrder:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as err:
        raise FileFormatError(f"Scan order CSV is not valid UTF-8: {err}") from err
    return parse_order_csv(text, dims)


def write_order(order: ScanOrder, path: PathLike, fmt: Optional[str] = None) -> None:
    fmt = order_format_from_path(path) if fmt is None else fmt
    if fmt == "csv":
        write_order_csv(order, path)
    else:
        write_order_bin(order, path)
    logger.info("Wrote %s scan order of %d cells to %s", fmt, len(order), path)


def read_order(path: PathLike, fmt: Optional[str] = None, dims: Optional[GridDims] = None) -> ScanOrder:
    fmt = order_format_from_path(path) if fmt is None else fmt
    if fmt == "csv":
        return read_order_csv(path, dims)
    return read_order_bin(path, dims)


# PGM heatmaps

def heatmap_bytes(values: np.ndarray) -> bytes:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise FileFormatError(f"Heatmap values must be two-dimensional, got shape {values.shape}")
    pixels = np.clip(np.round(values * 255.0), 0, 255).astype(np.uint8)
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def write_pgm(values: np.ndarray, path: PathLike) -> None:
    Path(path).write_bytes(heatmap_bytes(values))


def decode_pgm(data: bytes) -> np.ndarray:
    """
    Parse a binary 8-bit PGM, returning a (height, width) uint8 array.
    """
    fields = []
    position = 0
    while len(fields) < 4:
        while position < len(data) and data[position:position + 1].isspace():
            position += 1
        if data[position:position + 1] == b"#":
            while position < len(data) and data[position:position + 1] not in (b"\n", b"\r"):
                position += 1
            continue
        start = position
        while position < len(data) and not data[position:position + 1].isspace():
            position += 1
        if start == position:
            raise TruncatedFileError(f"PGM header ended after {len(fields)} of 4 fields")
        fields.append(data[start:position])
    # Exactly one whitespace byte separates the header from the pixels.
    position += 1
    if fields[0] != b"P5":
        raise FileFormatError(f"Not a binary PGM, magic {fields[0]!r}")
    try:
        width, height, maxval = (int(field) for field in fields[1:])
    except ValueError:
        raise FileFormatError("Non-integer PGM header field") from None
    if width < 1 or height < 1 or not 0 < maxval < 256:
        raise FileFormatError(f"Unsupported PGM geometry {width}x{height}, maxval {maxval}")
    expected = position + width * height
    if len(data) < expected:
        raise TruncatedFileError(f"PGM of {width}x{height} needs {expected} bytes, got {len(data)}")
    return np.frombuffer(data, dtype=np.uint8, count=width * height, offset=position).reshape(height, width)


def read_pgm(path: PathLike) -> np.ndarray:
    return decode_pgm(Path(path).read_bytes())


# JSON reports

_NUMBER = {"type": "number"}
_NULLABLE_NUMBER = {"type": ["number", "null"]}

_METRICS_SCHEMA = {
    "type": ["object", "null"],
    "required": ["nn_variance", "nn_mean", "delaunay_edge_variance", "delaunay_interior_variance", "step_mean",
                 "step_max", "step_variance", "point_set"],
    "properties": {
        "nn_variance": {"type": "number", "minimum": 0},
        "nn_mean": {"type": "number", "minimum": 0},
        "delaunay_edge_variance": {"type": ["number", "null"], "minimum": 0},
        "delaunay_interior_variance": {"type": ["number", "null"], "minimum": 0},
        "step_mean": {"type": "number", "minimum": 0},
        "step_max": {"type": "number", "minimum": 0},
        "step_variance": {"type": "number", "minimum": 0},
        "point_set": {"type": "string"},
    },
}

_FOOTPRINT_SCHEMA = {
    "type": ["object", "null"],
    "required": ["mu", "sigma", "probe", "n_seeds"],
    "properties": {
        "mu": {"type": "number", "minimum": 0, "maximum": 1},
        "sigma": {"type": "number", "minimum": 0},
        "probe": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
        "probe_radius": {"type": "integer", "minimum": 0},
        "n_seeds": {"type": "integer", "minimum": 1},
        "is_zero": {"type": "boolean"},
        "aggregation": {"type": "string"},
        "target": {"type": "string"},
        "method": {"type": "string"},
        "selective": {"type": "boolean"},
    },
}

_ENTRY_PROPERTIES = {
    "strategy": {"type": "string"},
    "description": {"type": "string"},
    "config": {
        "type": "object",
        "properties": {
            "lambda_c": _NUMBER,
            "eta_f": _NUMBER,
            "eta_c": _NUMBER,
            "alpha": _NUMBER,
            "phi_g_radians": _NUMBER,
            "candidate_count": {"type": "integer", "minimum": 1},
            "mode": {"type": "string"},
            "seed": {"type": ["integer", "null"]},
        },
    },
    "metrics": _METRICS_SCHEMA,
    "footprint": _FOOTPRINT_SCHEMA,
}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["tool_version", "dims", "timings_ms"],
    "properties": {
        "tool_version": {"type": "string"},
        "dims": {
            "type": "object",
            "required": ["height", "width"],
            "properties": {"height": {"type": "integer", "minimum": 1}, "width": {"type": "integer", "minimum": 1}},
        },
        **_ENTRY_PROPERTIES,
        "strategies": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["strategy", "config", "metrics", "footprint"],
                "properties": _ENTRY_PROPERTIES,
            },
        },
        "timings_ms": {"type": "object", "additionalProperties": _NULLABLE_NUMBER},
    },
    "oneOf": [
        {"required": ["strategy", "config", "metrics", "footprint"]},
        {"required": ["strategies"]},
    ],
}


def _plain(value):
    """
    Convert numpy scalars and tuples to plain JSON-compatible Python values.
    """
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ReportSchemaError(f"Report values must be finite, got {value!r}")
        return value
    if value is None or isinstance(value, str):
        return value
    raise ReportSchemaError(f"Value of type {type(value).__name__!r} cannot be written to a report")


def _format_float(value: float) -> str:
    text = format(value, f".{rules.REPORT_FLOAT_DIGITS}g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def _serialize(value, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(key)}: {_serialize(value[key], indent + 1)}" for key in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        return "[" + ", ".join(_serialize(item, indent + 1) for item in value) + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value)
    return json.dumps(value)


def validate_report(report: dict) -> None:
    try:
        jsonschema.validate(instance=report, schema=REPORT_SCHEMA)
    except jsonschema.ValidationError as err:
        raise ReportSchemaError(f"Report does not follow the schema: {err.message}") from err


def report_to_text(report: dict) -> str:
    report = _plain(report)
    validate_report(report)
    return _serialize(report) + "\n"


def write_report(report: dict, path: PathLike) -> None:
    Path(path).write_text(report_to_text(report), encoding="utf-8")
    logger.info("Wrote report to %s", path)


def read_report(path: PathLike) -> dict:
    try:
        report = json.loads(Path(path).read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise FileFormatError(f"Unreadable report {str(path)!r}: {err}") from err
    validate_report(report)
    return report

