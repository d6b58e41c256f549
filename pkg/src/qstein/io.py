"""Pair files, result rows and the run manifest.

Pair file (JSON)::

    {"id": "optional-name", "dim": 2,
     "rho":   [[[re, im], [re, im]], [[re, im], [re, im]]],
     "sigma": [[[re, im], [re, im]], [[re, im], [re, im]]]}

Matrices are row-major; each entry is a two-element ``[re, im]`` array.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, ParseError
from .linalg import DensityMatrix, validate_density
from .states import SIGMA_FULL_RANK_ATOL, StatePair


def _parse_matrix(name: str, raw, dim: int) -> np.ndarray:
    try:
        a = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{name}: entries must be [re, im] number pairs ({exc})") from None
    if a.shape != (dim, dim, 2):
        raise ParseError(f"{name}: expected shape ({dim}, {dim}, 2), got {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


def _encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def load_state_pair(path) -> StatePair:
    """Read and validate a pair file, reporting every violated invariant at once."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    missing = [k for k in ("dim", "rho", "sigma") if k not in doc]
    if missing:
        raise ParseError(f"{path}: missing field(s) {', '.join(missing)}")
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{path}: dim must be a positive integer")
    rho = _parse_matrix("rho", doc["rho"], dim)
    sigma = _parse_matrix("sigma", doc["sigma"], dim)

    problems = [f"rho: {msg}" for msg in validate_density(rho)]
    problems += [f"sigma: {msg}" for msg in validate_density(sigma)]
    smin = float(np.linalg.eigvalsh(0.5 * (sigma + sigma.conj().T))[0])
    if smin <= SIGMA_FULL_RANK_ATOL:
        problems.append(
            f"sigma: not full rank (min eigenvalue {smin:.3e}); "
            "the alternative hypothesis must be full rank")
    if problems:
        raise InvariantViolation(problems)
    return StatePair(DensityMatrix(rho), DensityMatrix(sigma), label=str(doc.get("id", path.stem)))


def dump_state_pair(path, rho, sigma, pair_id: str | None = None) -> None:
    rho = np.asarray(getattr(rho, "matrix", rho))
    sigma = np.asarray(getattr(sigma, "matrix", sigma))
    doc = {"dim": int(rho.shape[0]), "rho": _encode_matrix(rho), "sigma": _encode_matrix(sigma)}
    if pair_id is not None:
        doc = {"id": pair_id, **doc}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


@dataclass
class ResultRow:
    """One output line.

    ``module`` is the producing component and ``source`` a short tag naming
    the relation the value comes from.
    """

    pair_id: str
    module: str
    source: str
    quantity: str
    n: int | None = None
    eps: float | None = None
    e2: float | None = None
    value: float | None = None
    lower: float | None = None
    upper: float | None = None
    certificate: float | None = None
    gap: float | None = None
    D: float | None = None
    V: float | None = None
    T3: float | None = None
    c_const: float | None = None
    lower_applicable: bool | None = None
    upper_applicable: bool | None = None
    status: str = "ok"
    runtime_ms: float | None = None


COLUMNS = [f.name for f in fields(ResultRow)]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in COLUMNS])
    return buf.getvalue()


def write_csv(path, rows) -> None:
    Path(path).write_text(rows_to_csv(rows))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".manifest.json")


def write_manifest(csv_path, manifest: dict) -> Path:
    out = manifest_path(csv_path)
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return out
