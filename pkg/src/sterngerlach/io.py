"""Deterministic CSV/JSON emission with atomic file replacement."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .coherence import CoherenceSeries
from .core import BRANCHES
from .observables import ObservableSeries

SCHEMA_VERSION = 1

OBSERVABLE_COLUMNS = ("time", "branch", "mean_x", "mean_p", "var_x", "var_p", "norm",
                      "rel_fluct", "source")
COHERENCE_COLUMNS = ("time", "overlap_mod", "overlap_phase", "sigma_x", "distinguishability",
                     "ensemble_visibility", "n_samples", "seed")
ENSEMBLE_COLUMNS = ("time", "overlap_mod", "ensemble_visibility", "std_error",
                    "mean_overlap_re", "mean_overlap_im", "n_samples", "seed")


def fmt(v) -> str:
    """Shortest round-trip text for floats; plain str otherwise."""
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "dtype"):  # numpy scalar
        return fmt(v.item())
    return str(v)


def _json_value(v):
    if hasattr(v, "dtype"):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(columns: Sequence[str], rows: Iterable[Mapping], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def render_json(kind: str, columns: Sequence[str], rows: Iterable[Mapping],
                meta: Mapping | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "artifact_version": __version__,
        "meta": {k: _json_value(v) for k, v in (meta or {}).items()},
        "columns": list(columns),
        "rows": [{c: _json_value(r[c]) for c in columns} for r in rows],
    }
    return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"


def render(kind: str, columns, rows, fmt_name: str, meta: Mapping | None = None) -> str:
    rows = list(rows)
    if fmt_name == "json":
        return render_json(kind, columns, rows, meta)
    comments = [" ".join(f"{k}={fmt(v)}" for k, v in meta.items())] if meta else []
    return render_csv(columns, rows, comments)


def observable_rows(series: ObservableSeries) -> list[dict]:
    """Time-major rows, up before down."""
    rows = []
    rel = series.rel_fluct
    for i, t in enumerate(series.times):
        for j, br in enumerate(BRANCHES):
            rows.append(dict(time=float(t), branch=br.value,
                             mean_x=float(series.mean_x[i, j]), mean_p=float(series.mean_p[i, j]),
                             var_x=float(series.var_x[i, j]), var_p=float(series.var_p[i, j]),
                             norm=float(series.norm[i, j]), rel_fluct=float(rel[i, j]),
                             source=series.source))
    return rows


def coherence_rows(series: CoherenceSeries) -> list[dict]:
    rows = []
    for i, t in enumerate(series.times):
        rows.append(dict(time=float(t), overlap_mod=float(series.overlap_mod[i]),
                         overlap_phase=float(series.overlap_phase[i]),
                         sigma_x=float(series.sigma_x[i]),
                         distinguishability=float(series.distinguishability[i]),
                         ensemble_visibility=float(series.ensemble_visibility[i]),
                         n_samples=series.n_samples, seed=series.seed))
    return rows


def read_csv(path) -> tuple[list[str], list[dict]]:
    """Return (comment lines, rows) from a CSV written by :func:`render_csv`."""
    comments, body = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                body.append(line)
    return comments, list(csv.DictReader(body))
