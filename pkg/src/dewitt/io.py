"""JSON documents for fields and paths.

A field document looks like::

    {"format_version": "1", "kind": "metric_field", "n": 2,
     "points": [{"id": "p0", "weight": 1.0, "matrix": [[1.0, 0.0], [0.0, 1.0]]}]}

``matrix`` may also be a flat row-major list of ``n*n`` numbers.  Path
documents carry ``times`` and one matrix per time under each point's
``frames``.  Floats are written with ``repr`` (shortest round-tripping form),
so write-then-read is exact.
"""

import json
import math
import re
from pathlib import Path

import numpy as np

from .exceptions import DewittError, DocumentError
from .fieldmanifold import MetricField, MetricPath, SampledBase, TangentField, TangentPath

FORMAT_VERSION = "1"
FIELD_KINDS = ("metric_field", "tangent_field")
PATH_KINDS = ("metric_path", "tangent_path")


def _num(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise DocumentError(f"expected a number, got {type(x).__name__}", where)
    x = float(x)
    if not math.isfinite(x):
        raise DocumentError("non-finite number", where)
    return x


def _matrix(raw, n, where):
    if not isinstance(raw, list):
        raise DocumentError("matrix must be a list", where)
    if len(raw) == n * n and all(not isinstance(r, list) for r in raw):
        flat = [_num(x, f"{where}[{i}]") for i, x in enumerate(raw)]
        return np.array(flat).reshape(n, n)
    if len(raw) != n:
        raise DocumentError(f"matrix must have {n} rows (or {n * n} entries)", where)
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != n:
            raise DocumentError(f"row must have {n} entries", f"{where}[{i}]")
        rows.append([_num(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(rows)


def _load_json(text, source):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, f"line {exc.lineno}, column {exc.colno}", source) from None
    if not isinstance(doc, dict):
        raise DocumentError("top level must be an object", None, source)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {version!r}", "format_version", source)
    return doc


def _base(doc, source):
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DocumentError("n must be a positive integer", "n", source)
    points = doc.get("points")
    if not isinstance(points, list) or not points:
        raise DocumentError("points must be a non-empty list", "points", source)
    ids, weights = [], []
    for i, p in enumerate(points):
        where = f"points[{i}]"
        if not isinstance(p, dict):
            raise DocumentError("point must be an object", where, source)
        pid = p.get("id")
        if not isinstance(pid, str) or not pid:
            raise DocumentError("id must be a non-empty string", f"{where}.id", source)
        if pid in ids:
            raise DocumentError(f"duplicate id {pid!r}", f"{where}.id", source)
        try:
            w = _num(p.get("weight"), f"{where}.weight")
        except DocumentError as exc:
            raise DocumentError(str(exc), None, source) from None
        if w <= 0:
            raise DocumentError("weight must be positive", f"{where}.weight", source)
        ids.append(pid)
        weights.append(w)
    return SampledBase(n, tuple(ids), np.array(weights)), points


def _check_kind(doc, allowed, source):
    kind = doc.get("kind", allowed[0])
    if kind not in allowed:
        raise DocumentError(f"kind {kind!r} is not one of {allowed}", "kind", source)
    return kind


def _wrap(exc, where, source):
    return DocumentError(str(exc), where, source)


def parse_field(text, kind=None, source=None):
    """Parse a field document.  ``kind`` forces metric or tangent semantics."""
    doc = _load_json(text, source)
    doc_kind = _check_kind(doc, FIELD_KINDS, source)
    kind = kind or doc_kind
    base, points = _base(doc, source)
    mats = []
    for i, p in enumerate(points):
        where = f"points[{i}].matrix"
        try:
            mats.append(_matrix(p.get("matrix"), base.n, where))
        except DocumentError as exc:
            raise DocumentError(str(exc), None, source) from None
    cls = MetricField if kind == "metric_field" else TangentField
    try:
        return cls(base, np.array(mats))
    except DewittError as exc:
        pid = getattr(exc, "point_id", None)
        where = f"points[{base.ids.index(pid)}].matrix" if pid in base.ids else None
        raise _wrap(exc, where, source) from exc


def parse_path(text, source=None):
    doc = _load_json(text, source)
    kind = _check_kind(doc, PATH_KINDS, source)
    base, points = _base(doc, source)
    times = doc.get("times")
    if not isinstance(times, list) or len(times) < 1:
        raise DocumentError("times must be a non-empty list", "times", source)
    try:
        times = np.array([_num(t, f"times[{i}]") for i, t in enumerate(times)])
        frames = np.empty((len(times), len(base), base.n, base.n))
        for i, p in enumerate(points):
            fr = p.get("frames")
            if not isinstance(fr, list) or len(fr) != len(times):
                raise DocumentError("need one frame per time", f"points[{i}].frames")
            for k, m in enumerate(fr):
                frames[k, i] = _matrix(m, base.n, f"points[{i}].frames[{k}]")
    except DocumentError as exc:
        raise DocumentError(str(exc), None, source) from None
    cls = MetricPath if kind == "metric_path" else TangentPath
    try:
        return cls(base, times, frames)
    except (DewittError, ValueError) as exc:
        raise _wrap(exc, None, source) from exc


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DocumentError(f"cannot read file ({exc.strerror})", None, str(path)) from None


def read_field(path, kind=None):
    return parse_field(_read(path), kind, str(path))


def read_metric(path):
    return read_field(path, "metric_field")


def read_tangent(path):
    return read_field(path, "tangent_field")


def read_path(path):
    return parse_path(_read(path), str(path))


def _floats(a):
    # float() so numpy scalars serialize through repr like plain floats
    return [[float(x) for x in row] for row in np.asarray(a)]


def _points_header(base):
    return [{"id": pid, "weight": float(w)} for pid, w in zip(base.ids, base.weights)]


def field_document(field_, extra=None):
    kind = "metric_field" if isinstance(field_, MetricField) else "tangent_field"
    points = _points_header(field_.base)
    for p, m in zip(points, field_.values):
        p["matrix"] = _floats(m)
    doc = {"format_version": FORMAT_VERSION, "kind": kind, "n": field_.base.n, "points": points}
    doc.update(extra or {})
    return doc


def path_document(path, extra=None):
    kind = "metric_path" if isinstance(path, MetricPath) else "tangent_path"
    points = _points_header(path.base)
    for i, p in enumerate(points):
        p["frames"] = [_floats(m) for m in path.frames[:, i]]
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "n": path.base.n,
        "times": [float(t) for t in path.times],
        "points": points,
    }
    doc.update(extra or {})
    return doc


_FLAT_LIST = re.compile(r"\[\s+([^\[\]{}]*?)\s+\]")


def dumps(doc):
    text = json.dumps(doc, indent=1, allow_nan=False)
    # keep innermost number lists (matrix rows, times) on one line
    text = _FLAT_LIST.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)
    return text + "\n"


def write_document(doc, path):
    Path(path).write_text(dumps(doc))


def write_field(field_, path):
    write_document(field_document(field_), path)


def write_path(path_, path):
    write_document(path_document(path_), path)
