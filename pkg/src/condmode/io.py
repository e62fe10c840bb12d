"""CSV and JSON formats.

* curves, long form: ``series_id,time,value``; rows of one series are
  contiguous with increasing times.
* responses: ``series_id,response``.
* single series: ``time,value``.
* density curves: ``y,density``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from condmode.core import Curve, DataError, FunctionalSample

SCHEMA_VERSION = 1


def _fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _rows(path: Path, header: Sequence[str]) -> Iterable[tuple[int, list[str]]]:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"{path}: cannot open ({exc.strerror})") from None
    with fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DataError(f"{path}:1: empty file, expected header {','.join(header)}") from None
        if [h.strip() for h in first] != list(header):
            raise DataError(f"{path}:1: expected header {','.join(header)}, got {','.join(first)}")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            yield reader.line_num, [c.strip() for c in row]


def _float(path: Path, line: int, text: str, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"{path}:{line}: {what} {text!r} is not a number") from None
    if not math.isfinite(v):
        raise DataError(f"{path}:{line}: {what} is not finite")
    return v


def read_curves_csv(path: str | Path) -> dict[str, Curve]:
    path = Path(path)
    series: dict[str, tuple[list[float], list[float]]] = {}
    current = None
    for line, (sid, t, v) in _rows(path, ("series_id", "time", "value")):
        tf, vf = _float(path, line, t, "time"), _float(path, line, v, "value")
        if sid != current:
            if sid in series:
                raise DataError(f"{path}:{line}: rows of series {sid!r} are not contiguous")
            series[sid] = ([], [])
            current = sid
        times, values = series[sid]
        if times and tf <= times[-1]:
            raise DataError(f"{path}:{line}: times of series {sid!r} not strictly increasing")
        times.append(tf)
        values.append(vf)
    if not series:
        raise DataError(f"{path}: no data rows")
    for sid, (times, _) in series.items():
        if len(times) < 2:
            raise DataError(f"{path}: series {sid!r} has fewer than 2 samples")
    return {sid: Curve(t, v) for sid, (t, v) in series.items()}


def read_responses_csv(path: str | Path) -> dict[str, float]:
    path = Path(path)
    out: dict[str, float] = {}
    for line, (sid, y) in _rows(path, ("series_id", "response")):
        if sid in out:
            raise DataError(f"{path}:{line}: duplicate series_id {sid!r}")
        out[sid] = _float(path, line, y, "response")
    if not out:
        raise DataError(f"{path}: no data rows")
    return out


def read_series_csv(path: str | Path) -> Curve:
    path = Path(path)
    times, values = [], []
    for line, (t, v) in _rows(path, ("time", "value")):
        tf = _float(path, line, t, "time")
        if times and tf <= times[-1]:
            raise DataError(f"{path}:{line}: times not strictly increasing")
        times.append(tf)
        values.append(_float(path, line, v, "value"))
    if len(times) < 2:
        raise DataError(f"{path}: need at least 2 samples")
    return Curve(times, values)


def read_sample(curves_path: str | Path, responses_path: str | Path) -> FunctionalSample:
    """Join curves and responses on ``series_id``, in the order of the curves file."""
    curves = read_curves_csv(curves_path)
    responses = read_responses_csv(responses_path)
    missing = [sid for sid in curves if sid not in responses]
    if missing:
        raise DataError(f"{responses_path}: no response for series {missing[0]!r}")
    extra = [sid for sid in responses if sid not in curves]
    if extra:
        raise DataError(f"{responses_path}: series {extra[0]!r} has no curve")
    ids = list(curves)
    return FunctionalSample(
        tuple(curves[s] for s in ids), np.array([responses[s] for s in ids]), {"series_ids": ids}
    )


def write_curves_csv(path: str | Path, curves: Sequence[Curve], ids: Sequence[str] | None = None) -> None:
    ids = list(ids) if ids is not None else [str(i) for i in range(len(curves))]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series_id", "time", "value"])
        for sid, c in zip(ids, curves):
            for t, v in zip(c.times, c.values):
                w.writerow([sid, _fmt(t), _fmt(v)])


def write_sample(curves_path: str | Path, responses_path: str | Path, sample: FunctionalSample) -> None:
    ids = sample.metadata.get("series_ids") or [str(i) for i in range(len(sample))]
    write_curves_csv(curves_path, sample.curves, ids)
    write_table_csv(responses_path, ["series_id", "response"], zip(ids, sample.responses))


def write_series_csv(path: str | Path, c: Curve) -> None:
    write_table_csv(path, ["time", "value"], zip(c.times, c.values))


def write_table_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_density_csv(path: str | Path, y_grid, density) -> None:
    write_table_csv(path, ["y", "density"], zip(y_grid, density))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path: str | Path, obj: dict[str, Any]) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **_jsonable(obj)}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False, allow_nan=False)
        fh.write("\n")
