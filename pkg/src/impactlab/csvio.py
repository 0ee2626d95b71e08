"""CSV and manifest persistence.

CSV files use a header row, ``.`` decimals, ``repr`` floats (shortest
round-trip form) and LF line endings, so identical inputs give identical
bytes.

Profile files have columns ``t_start,t_end,rate,impulse``.  A rate row has
``impulse = 0``; a point trade is written as ``t,t,volume,1``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .impact import RateProfile

__all__ = [
    "format_value",
    "rows_to_csv",
    "write_text",
    "profile_to_csv",
    "profile_from_csv",
    "read_profile",
    "write_profile",
    "read_trades",
    "trades_to_csv",
    "config_id",
    "write_manifest",
    "read_manifest",
]

PROFILE_HEADER = ("t_start", "t_end", "rate", "impulse")
TRADES_HEADER = ("t", "volume")


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def profile_to_csv(p: RateProfile) -> str:
    rows = [(a, b, q, 0) for a, b, q in zip(p.starts, p.ends, p.rates)]
    rows += [(t, t, v, 1) for t, v in p.impulses]
    return rows_to_csv(PROFILE_HEADER, rows)


def profile_from_csv(text: str) -> RateProfile:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != PROFILE_HEADER:
        raise ValueError(f"profile CSV must have header {','.join(PROFILE_HEADER)}")
    starts, ends, rates, impulses = [], [], [], []
    for line, row in enumerate(reader, start=2):
        try:
            a, b, v = float(row["t_start"]), float(row["t_end"]), float(row["rate"])
            flag = int(row["impulse"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad profile row at line {line}: {exc}") from None
        if flag:
            impulses.append((a, v))
        else:
            starts.append(a)
            ends.append(b)
            rates.append(v)
    if not starts:
        raise ValueError("profile has no rate intervals")
    starts, ends = np.array(starts), np.array(ends)
    if np.any(starts[1:] != ends[:-1]):
        raise ValueError("rate intervals must be contiguous and ordered")
    return RateProfile(np.append(starts, ends[-1]), rates, impulses)


def read_profile(path) -> RateProfile:
    return profile_from_csv(Path(path).read_text(encoding="utf-8"))


def write_profile(path, p: RateProfile) -> Path:
    return write_text(path, profile_to_csv(p))


def trades_to_csv(trades) -> str:
    return rows_to_csv(TRADES_HEADER, np.asarray(trades, dtype=float).reshape(-1, 2).tolist())


def read_trades(path) -> np.ndarray:
    reader = csv.DictReader(io.StringIO(Path(path).read_text(encoding="utf-8")))
    if tuple(reader.fieldnames or ()) != TRADES_HEADER:
        raise ValueError("trades CSV must have header t,volume")
    return np.array([(float(r["t"]), float(r["volume"])) for r in reader]).reshape(-1, 2)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def config_id(config: dict) -> str:
    blob = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_manifest(out_dir, config: dict, outputs, tool_version: str) -> Path:
    manifest = {
        "id": config_id(config),
        "config": _jsonable(config),
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "tool_version": tool_version,
        "outputs": [str(Path(o).name) for o in outputs],
    }
    return write_text(Path(out_dir) / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
