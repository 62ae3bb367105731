"""JSON readers and writers for measure files, mm-space files and run manifests.

Measure file layout::

    {
      "schema_version": 1,
      "space": {"kind": "tree", "vertices": [...], "edges": [[u, v, length], ...]},
      "atoms": [{"point": {"edge": [u, v], "offset": 0.5}, "weight": 0.25}, ...]
    }

For ``"hyperboloid"`` and ``"euclidean"`` spaces the descriptor is
``{"kind": ..., "dim": m}`` and points are coordinate arrays. Hyperboloid
points may be given with ``m + 1`` ambient coordinates or ``m`` spatial
ones (lifted onto the sheet). A tree offset is measured from the first
vertex listed in ``"edge"``.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CatZeroError, ValidationError
from .invariants import FiniteMMSpace
from .measures import FiniteMeasure, make_measure
from .spaces import Euclidean, Hyperboloid, MetricTree, TreePoint

SCHEMA_VERSION = 1


class ParseError(ValidationError):
    """Malformed input file; the message names the line/column or field path."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _loads(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", source) from None


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", str(path)) from None


def _field(obj, key, path):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", path)
    if key not in obj:
        raise ParseError(f"missing field {key!r}", path)
    return obj[key]


def _number(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError("expected a number", path)
    x = float(x)
    if not math.isfinite(x):
        raise ParseError("expected a finite number", path)
    return x


def _check_version(doc, path):
    version = _field(doc, "schema_version", path)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})", f"{path}.schema_version")


# -- spaces -------------------------------------------------------------------


def space_from_dict(desc, path="space"):
    kind = _field(desc, "kind", path)
    if kind == "tree":
        vertices = _field(desc, "vertices", path)
        edges = _field(desc, "edges", path)
        if not isinstance(vertices, list) or not isinstance(edges, list):
            raise ParseError("vertices and edges must be lists", path)
        triples = []
        for i, e in enumerate(edges):
            if not isinstance(e, list) or len(e) != 3:
                raise ParseError("edge must be [u, v, length]", f"{path}.edges[{i}]")
            triples.append((e[0], e[1], _number(e[2], f"{path}.edges[{i}][2]")))
        try:
            return MetricTree(vertices, triples)
        except TypeError as exc:
            raise ParseError(str(exc), path) from None
        except CatZeroError as exc:
            raise ParseError(str(exc), path) from None
    if kind in ("hyperboloid", "euclidean"):
        dim = _field(desc, "dim", path)
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise ParseError("dim must be a positive integer", f"{path}.dim")
        return Hyperboloid(dim) if kind == "hyperboloid" else Euclidean(dim)
    raise ParseError(f"unknown space kind {kind!r}", f"{path}.kind")


def space_to_dict(space):
    if isinstance(space, MetricTree):
        return {
            "kind": "tree",
            "vertices": list(space.vertices),
            "edges": [[u, v, length] for u, v, length in space.edges],
        }
    if isinstance(space, (Hyperboloid, Euclidean)):
        return {"kind": space.kind, "dim": space.dim}
    raise ValidationError(f"cannot serialize {space!r}")


def point_from_json(space, obj, path="point"):
    if isinstance(space, MetricTree):
        edge = _field(obj, "edge", path)
        if not isinstance(edge, list) or len(edge) != 2:
            raise ParseError("edge must be [u, v]", f"{path}.edge")
        offset = _number(_field(obj, "offset", path), f"{path}.offset")
        try:
            index, flipped = space.edge_index(edge[0], edge[1])
            if flipped:
                offset = space.edge_length(index) - offset
            return space.validate(TreePoint(index, offset))
        except (CatZeroError, TypeError) as exc:
            raise ParseError(str(exc), path) from None
    if not isinstance(obj, list):
        raise ParseError("expected a coordinate array", path)
    coords = np.array([_number(x, f"{path}[{i}]") for i, x in enumerate(obj)])
    try:
        if isinstance(space, Hyperboloid) and len(coords) == space.dim:
            return space.lift(coords)
        return space.validate(coords)
    except CatZeroError as exc:
        raise ParseError(str(exc), path) from None


def point_to_json(space, p):
    if isinstance(space, MetricTree):
        u, v, _ = space.edges[p.edge]
        return {"edge": [u, v], "offset": float(p.offset)}
    return [float(x) for x in np.asarray(p)]


# -- measures -----------------------------------------------------------------


def measure_from_dict(doc, source="measure"):
    _check_version(doc, source)
    space = space_from_dict(_field(doc, "space", source), f"{source}.space")
    atoms = _field(doc, "atoms", source)
    if not isinstance(atoms, list) or not atoms:
        raise ParseError("atoms must be a nonempty list", f"{source}.atoms")
    parsed = []
    for i, atom in enumerate(atoms):
        where = f"{source}.atoms[{i}]"
        point = point_from_json(space, _field(atom, "point", where), f"{where}.point")
        weight = _number(_field(atom, "weight", where), f"{where}.weight")
        parsed.append((point, weight))
    try:
        return make_measure(space, parsed)
    except CatZeroError as exc:
        raise ParseError(str(exc), f"{source}.atoms") from None


def measure_to_dict(measure: FiniteMeasure):
    space = measure.space
    return {
        "schema_version": SCHEMA_VERSION,
        "space": space_to_dict(space),
        "atoms": [
            {"point": point_to_json(space, p), "weight": float(w)}
            for p, w in zip(measure.points, measure.weights)
        ],
    }


def loads_measure(text, source="measure"):
    return measure_from_dict(_loads(text, source), source)


def load_measure(path):
    return loads_measure(_read(path), str(path))


def dump_measure(measure, path):
    Path(path).write_text(json.dumps(measure_to_dict(measure), indent=2) + "\n", encoding="utf-8")


# -- mm-spaces ----------------------------------------------------------------


def mm_space_from_dict(doc, source="mm-space"):
    """``{"schema_version": 1, "dist": [[...]], "weights": [...]}``."""
    _check_version(doc, source)
    dist = _field(doc, "dist", source)
    weights = _field(doc, "weights", source)
    if not isinstance(dist, list) or not all(isinstance(row, list) for row in dist):
        raise ParseError("dist must be a list of rows", f"{source}.dist")
    d = [[_number(x, f"{source}.dist[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(dist)]
    if not isinstance(weights, list):
        raise ParseError("weights must be a list", f"{source}.weights")
    w = [_number(x, f"{source}.weights[{i}]") for i, x in enumerate(weights)]
    try:
        return FiniteMMSpace(d, w)
    except CatZeroError as exc:
        raise ParseError(str(exc), source) from None


def load_mm_space(path):
    return mm_space_from_dict(_loads(_read(path), str(path)), str(path))


# -- manifests ----------------------------------------------------------------


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command, config, seed, inputs=(), timestamp=None):
    """Reproducibility record. Everything except ``timestamp`` is a function of the inputs."""
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "tool": "catzero",
        "version": __version__,
        "timestamp": timestamp,
    }
