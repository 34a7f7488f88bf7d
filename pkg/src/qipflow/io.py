"""Text formats: CSV tables with ``#`` metadata, JSON reports and density matrices."""
import io
import json

import numpy as np

from .errors import InvalidInputError
from .states import DensityMatrix


def fmt(x) -> str:
    """Fixed 12-significant-digit scientific notation."""
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return f"{x:.11e}"


def format_csv(columns, rows, meta=None) -> str:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(columns):
        raise InvalidInputError("row width does not match the header")
    out = io.StringIO()
    for key, value in (meta or {}).items():
        out.write(f"# {key}={value}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def parse_csv(text: str):
    """Inverse of :func:`format_csv`: returns ``(meta, columns, rows)``."""
    meta = {}
    lines = text.splitlines()
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        body = lines[k][1:].strip()
        if "=" in body:
            key, value = body.split("=", 1)
            meta[key.strip()] = value.strip()
        k += 1
    if k >= len(lines):
        raise InvalidInputError("CSV has no header row")
    columns = [c.strip() for c in lines[k].split(",")]
    try:
        rows = [[float(v) for v in line.split(",")] for line in lines[k + 1:] if line.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"malformed CSV row: {exc}") from exc
    if any(len(r) != len(columns) for r in rows):
        raise InvalidInputError("CSV row width does not match the header")
    return meta, columns, np.array(rows, dtype=float).reshape(-1, len(columns))


def trajectory_table(traj, time_scale=1.0):
    """Columns and rows for a channel trajectory; times multiplied by ``time_scale``."""
    t = traj.times * time_scale
    if traj.kind == "dephasing":
        return ["t", "gamma", "Gamma"], np.column_stack([t, traj.gamma, traj.Gamma])
    j = traj.J
    return ["t", "ReJ", "ImJ", "absJ"], np.column_stack([t, j.real, j.imag, np.abs(j)])


def time_unit(kind):
    return "1/omega_c" if kind == "dephasing" else "1/gamma0"


def format_report(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def load_density(text: str) -> DensityMatrix:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"density matrix file is not valid JSON: {exc}") from exc
    return DensityMatrix.from_dict(data)


def dump_density(dm: DensityMatrix) -> str:
    return json.dumps(dm.to_dict(), indent=2) + "\n"
