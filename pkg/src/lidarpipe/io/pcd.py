"""PCD v0.7 reader and writer (ascii and binary payloads).

The reader accepts any field layout as long as x, y and z are present;
intensity is read when available and defaults to 0. The writer always
emits the canonical x y z intensity float32 layout.
"""

from __future__ import annotations

import io

import numpy as np

from ..errors import ParseError
from ..frame import PointCloud

_HEADER_KEYS = ("VERSION", "FIELDS", "SIZE", "TYPE", "COUNT", "WIDTH", "HEIGHT", "POINTS", "DATA")

_TYPE_MAP = {
    ("F", 4): "<f4", ("F", 8): "<f8",
    ("I", 1): "<i1", ("I", 2): "<i2", ("I", 4): "<i4", ("I", 8): "<i8",
    ("U", 1): "<u1", ("U", 2): "<u2", ("U", 4): "<u4", ("U", 8): "<u8",
}


def _parse_header(data: bytes) -> tuple[dict, int]:
    """Header mapping and the byte offset where the payload starts."""
    header: dict = {}
    offset = 0
    stream = io.BytesIO(data)
    while True:
        line = stream.readline()
        if not line:
            raise ParseError("truncated PCD header: no DATA line found")
        offset += len(line)
        text = line.decode("ascii", errors="replace").strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        key, values = parts[0].upper(), parts[1:]
        if key == "VERSION":
            header["VERSION"] = values[0] if values else ""
        elif key in ("FIELDS", "TYPE"):
            header[key] = values
        elif key in ("SIZE", "COUNT"):
            try:
                header[key] = [int(v) for v in values]
            except ValueError:
                raise ParseError(f"malformed PCD header line: '{text}'")
        elif key in ("WIDTH", "HEIGHT", "POINTS"):
            try:
                header[key] = int(values[0])
            except (IndexError, ValueError):
                raise ParseError(f"malformed PCD header line: '{text}'")
        elif key == "VIEWPOINT":
            header[key] = values
        elif key == "DATA":
            if not values:
                raise ParseError(f"malformed PCD header line: '{text}'")
            header["DATA"] = values[0].lower()
            break
        else:
            # Unknown header keys are tolerated.
            header.setdefault("_extra", {})[key] = values
    for key in _HEADER_KEYS:
        if key not in header:
            raise ParseError(f"PCD header missing required field: {key}")
    n_fields = len(header["FIELDS"])
    for key in ("SIZE", "TYPE", "COUNT"):
        if len(header[key]) != n_fields:
            raise ParseError(
                f"PCD header field counts disagree: FIELDS has {n_fields}, "
                f"{key} has {len(header[key])}"
            )
    return header, offset


def read_pcd(data: bytes) -> PointCloud:
    """Parse a PCD buffer into a point cloud.

    Unknown extra fields are skipped; WIDTH/HEIGHT both > 1 are recorded
    as organized dims. DATA binary_compressed is not supported.
    """
    header, offset = _parse_header(data)
    mode = header["DATA"]
    if mode not in ("ascii", "binary"):
        raise ParseError(f"unsupported PCD data mode in header line: 'DATA {mode}'")

    fields = header["FIELDS"]
    for axis in ("x", "y", "z"):
        if axis not in fields:
            raise ParseError(f"PCD header line 'FIELDS {' '.join(fields)}' lacks '{axis}'")
    n_points = header["POINTS"]
    counts = header["COUNT"]

    dtype_fields = []
    for i, name in enumerate(fields):
        base = _TYPE_MAP.get((header["TYPE"][i].upper(), header["SIZE"][i]))
        if base is None:
            raise ParseError(
                f"unsupported field type in header: 'TYPE {header['TYPE'][i]}' "
                f"with 'SIZE {header['SIZE'][i]}'"
            )
        # Duplicate/padding names still need unique struct labels.
        label = f"f{i}"
        if counts[i] == 1:
            dtype_fields.append((label, base))
        else:
            dtype_fields.append((label, base, (counts[i],)))
    dtype = np.dtype(dtype_fields)

    if mode == "binary":
        payload = data[offset:]
        expected = dtype.itemsize * n_points
        if len(payload) < expected:
            raise ParseError(
                f"PCD payload holds {len(payload)} bytes but 'POINTS {n_points}' "
                f"needs {expected}"
            )
        rows = np.frombuffer(payload[:expected], dtype=dtype)
    else:
        text = data[offset:].decode("ascii", errors="replace")
        tokens = text.split()
        per_row = sum(counts)
        if len(tokens) < per_row * n_points:
            raise ParseError(
                f"PCD ascii payload has {len(tokens)} values but 'POINTS {n_points}' "
                f"needs {per_row * n_points}"
            )
        try:
            flat = np.array(tokens[: per_row * n_points], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"PCD ascii payload is not numeric: {exc}")
        flat = flat.reshape(n_points, per_row) if n_points else flat.reshape(0, per_row)
        rows = None

    def column(name: str, default: float = 0.0) -> np.ndarray:
        if name not in fields:
            return np.full(n_points, default)
        i = fields.index(name)
        if mode == "binary":
            col = rows[f"f{i}"]
            return col[:, 0].astype(np.float64) if counts[i] > 1 else col.astype(np.float64)
        start = sum(counts[:i])
        return flat[:, start]

    points = np.column_stack(
        [column("x"), column("y"), column("z"), column("intensity")]
    ) if n_points else np.zeros((0, 4))

    organized = None
    if header["WIDTH"] > 1 and header["HEIGHT"] > 1:
        if header["WIDTH"] * header["HEIGHT"] == n_points:
            organized = (header["WIDTH"], header["HEIGHT"])
    return PointCloud(points, organized=organized)


def write_pcd(pc: PointCloud, mode: str = "binary") -> bytes:
    """Serialize as canonical x y z intensity float32 PCD."""
    if mode not in ("ascii", "binary"):
        raise ValueError(f"mode must be 'ascii' or 'binary', got '{mode}'")
    n = len(pc)
    header = (
        "VERSION .7\n"
        "FIELDS x y z intensity\n"
        "SIZE 4 4 4 4\n"
        "TYPE F F F F\n"
        "COUNT 1 1 1 1\n"
        f"WIDTH {n}\n"
        "HEIGHT 1\n"
        f"POINTS {n}\n"
        f"DATA {mode}\n"
    )
    values = pc.points.astype(np.float32)
    if mode == "binary":
        payload = values.astype("<f4").tobytes()
    else:
        lines = [" ".join(f"{v:.6g}" for v in row) for row in values]
        payload = ("\n".join(lines) + ("\n" if lines else "")).encode("ascii")
    return header.encode("ascii") + payload
