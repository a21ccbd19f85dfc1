"""File formats: polytope JSON, action-table text and sample CSV."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaVersionMismatch
from .extend import ActionTable
from .polytope import Facet, HRepPolytope

SCHEMA_VERSION = 1


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over the target."""
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


# ---------------------------------------------------------------- polytopes

def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def polytope_to_json(P: HRepPolytope, description: str | None = None) -> str:
    """Stable JSON text with one facet per line."""
    head = {"schema": SCHEMA_VERSION}
    if P.name is not None:
        head["name"] = P.name
    if description:
        head["description"] = description
    head["dim"] = P.dim
    lines = ["{"]
    lines += [f"  {json.dumps(k)}: {json.dumps(v)}," for k, v in head.items()]
    lines.append('  "facets": [')
    facets = [json.dumps({"normal": list(f.normal), "offset": format_fraction(f.offset)})
              for f in P.facets]
    lines += [f"    {f}," for f in facets[:-1]] + [f"    {facets[-1]}"]
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def _parse_offset(raw, where: str) -> Fraction:
    if isinstance(raw, bool) or isinstance(raw, float):
        raise ParseError(f"{where}: offset must be an integer or a 'p/q' string, got {raw!r}")
    try:
        return Fraction(raw) if isinstance(raw, int) else Fraction(str(raw).strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: cannot read offset {raw!r}") from None


def polytope_from_dict(obj: dict) -> HRepPolytope:
    if not isinstance(obj, dict):
        raise ParseError("polytope file must hold a JSON object")
    schema = obj.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"schema {schema} is not supported (expected {SCHEMA_VERSION})")
    try:
        dim, raw_facets = obj["dim"], obj["facets"]
    except KeyError as exc:
        raise ParseError(f"missing key {exc.args[0]!r}") from None
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"dim must be a positive integer, got {dim!r}")
    facets = []
    for n, f in enumerate(raw_facets):
        where = f"facet {n}"
        try:
            normal = f["normal"]
        except (KeyError, TypeError):
            raise ParseError(f"{where}: missing normal") from None
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in normal):
            raise ParseError(f"{where}: normal entries must be integers")
        if len(normal) != dim:
            raise ParseError(f"{where}: normal has length {len(normal)}, expected {dim}")
        try:
            facets.append(Facet(tuple(normal), _parse_offset(f.get("offset"), where)))
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from None
    if not facets:
        raise ParseError("polytope has no facets")
    return HRepPolytope(dim, tuple(facets), obj.get("name"))


def polytope_from_json(text: str) -> HRepPolytope:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return polytope_from_dict(obj)


def load_polytope(path) -> HRepPolytope:
    return polytope_from_json(Path(path).read_text(encoding="utf-8"))


def save_polytope(P: HRepPolytope, path, description: str | None = None) -> None:
    atomic_write(path, polytope_to_json(P, description))


# ---------------------------------------------------------------- action tables

def table_to_text(table: ActionTable) -> str:
    return table.format()


def table_from_text(text: str) -> ActionTable:
    return ActionTable.parse(text)


# ---------------------------------------------------------------- sample CSV

def _fmt(x: float) -> str:
    return repr(float(x))


def samples_to_csv(columns: list[str], rows: np.ndarray, meta: dict) -> str:
    """CSV with ``# key: value`` header lines and a column header row."""
    out = io.StringIO()
    for k, v in meta.items():
        out.write(f"# {k}: {v}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in np.atleast_2d(rows):
        w.writerow([_fmt(x) for x in row])
    return out.getvalue()


def samples_from_csv(text: str) -> tuple[dict, list[str], np.ndarray]:
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise ParseError("sample file has no column header")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ParseError(f"bad sample value: {exc}") from None
    return meta, rows[0], data.reshape(-1, len(rows[0]))
