"""JSON file formats ("roofgraph/1", "roofdual/1"), building/OBJ export.

Serialization is strict both ways: unknown fields are rejected, numbers are
written with 17 significant digits (lossless for binary64), and output is
byte-deterministic for identical inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .energy import roof_planarity
from .errors import (NonPlanarInput, ParseError, RoofForgeError, SchemaError)
from .geometry import bbox_diagonal, polygon_area
from .graph import (OUTLINE, ROOF, DualGraph, Embedding, RoofGraph,
                    VertexRecord)

ROOFGRAPH_TAG = "roofgraph/1"
ROOFDUAL_TAG = "roofdual/1"


# ---------------------------------------------------------------------------
# deterministic JSON emitter (17 significant digits for floats)


def _emit(obj, indent=0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise SchemaError("cannot serialize non-finite number")
        return format(obj, ".17g")
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(f"{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}"
                           for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = all(isinstance(v, (int, float, str)) for v in obj)
        if flat:
            return "[" + ", ".join(_emit(v) for v in obj) + "]"
        inner = ",\n".join(f"{pad}  {_emit(v, indent + 1)}" for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    raise SchemaError(f"cannot serialize {type(obj).__name__}")


def _parse_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None


def _require_keys(obj: dict, required, optional=(), ctx: str = "document"):
    if not isinstance(obj, dict):
        raise SchemaError(f"{ctx} must be a JSON object")
    missing = [k for k in required if k not in obj]
    if missing:
        raise SchemaError(f"{ctx} missing fields: {missing}")
    unknown = [k for k in obj if k not in set(required) | set(optional)]
    if unknown:
        raise SchemaError(f"{ctx} has unknown fields: {unknown}")


def _num(v, ctx: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{ctx} must be a number")
    f = float(v)
    if not math.isfinite(f):
        raise SchemaError(f"{ctx} must be finite")
    return f


# ---------------------------------------------------------------------------
# roofgraph/1


@dataclass
class RoofGraphDocument:
    graph: RoofGraph
    embedding: Embedding
    image: dict | None = None


def loads_roofgraph(text: str) -> RoofGraphDocument:
    data = _parse_json(text)
    _require_keys(data, ("format", "vertices", "faces"), ("image",))
    if data["format"] != ROOFGRAPH_TAG:
        raise SchemaError(f"expected format {ROOFGRAPH_TAG!r}, got {data['format']!r}")
    if not isinstance(data["vertices"], list) or not isinstance(data["faces"], list):
        raise SchemaError("vertices and faces must be arrays")
    records = []
    coords = {}
    any_z = any(isinstance(v, dict) and "z" in v for v in data["vertices"])
    for v in data["vertices"]:
        _require_keys(v, ("id", "kind", "x", "y"), ("z", "height_group"), "vertex")
        vid = v["id"]
        if isinstance(vid, bool) or not isinstance(vid, int):
            raise SchemaError("vertex id must be an integer")
        if v["kind"] not in (OUTLINE, ROOF):
            raise SchemaError(f"vertex kind must be {OUTLINE!r} or {ROOF!r}")
        hg = v.get("height_group")
        if hg is not None and not isinstance(hg, (str, int)):
            raise SchemaError("height_group must be a string or integer")
        records.append(VertexRecord(vid, v["kind"], hg))
        x, y = _num(v["x"], "vertex x"), _num(v["y"], "vertex y")
        if any_z:
            coords[vid] = (x, y, _num(v.get("z", 0.0), "vertex z"))
        else:
            coords[vid] = (x, y)
    faces = []
    for f in data["faces"]:
        if not isinstance(f, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in f):
            raise SchemaError("each face must be an array of vertex ids")
        faces.append(tuple(f))
    image = None
    if "image" in data:
        _require_keys(data["image"], ("path", "transform"), (), "image")
        tr = data["image"]["transform"]
        if not isinstance(tr, list) or len(tr) != 6:
            raise SchemaError("image transform must be 6 numbers")
        image = {"path": str(data["image"]["path"]),
                 "transform": [_num(t, "image transform") for t in tr]}
    try:
        graph = RoofGraph(records, faces)
        emb = Embedding(coords)
    except RoofForgeError as exc:
        raise SchemaError(str(exc)) from None
    return RoofGraphDocument(graph, emb, image)


def roofgraph_data(doc: RoofGraphDocument) -> dict:
    """Plain-JSON structure of a roofgraph/1 document."""
    graph, emb = doc.graph, doc.embedding
    verts = []
    for v in sorted(graph.vertices, key=lambda r: r.id):
        entry = {"id": v.id, "kind": v.kind,
                 "x": float(emb[v.id][0]), "y": float(emb[v.id][1])}
        if emb.dim == 3:
            entry["z"] = float(emb[v.id][2])
        if v.height_group is not None:
            entry["height_group"] = v.height_group
        verts.append(entry)
    data = {"format": ROOFGRAPH_TAG, "vertices": verts,
            "faces": [list(f) for f in graph.faces]}
    if doc.image is not None:
        data["image"] = {"path": doc.image["path"],
                         "transform": list(doc.image["transform"])}
    return data


def dumps_roofgraph(doc: RoofGraphDocument) -> str:
    return _emit(roofgraph_data(doc)) + "\n"


# ---------------------------------------------------------------------------
# roofdual/1


def loads_dualgraph(text: str) -> DualGraph:
    data = _parse_json(text)
    _require_keys(data, ("format", "outline"),
                  ("adjacency", "probabilities", "merge_map"))
    if data["format"] != ROOFDUAL_TAG:
        raise SchemaError(f"expected format {ROOFDUAL_TAG!r}, got {data['format']!r}")
    if ("adjacency" in data) == ("probabilities" in data):
        raise SchemaError("exactly one of adjacency/probabilities is required")
    outline = data["outline"]
    if not isinstance(outline, list) or len(outline) < 3:
        raise SchemaError("outline must be an array of at least 3 points")
    pts = []
    for p in outline:
        if not isinstance(p, list) or len(p) != 2:
            raise SchemaError("outline points must be [x, y] pairs")
        pts.append((_num(p[0], "outline x"), _num(p[1], "outline y")))
    n = len(pts)

    def _index(v, ctx):
        if isinstance(v, bool) or not isinstance(v, int) or not (0 <= v < n):
            raise SchemaError(f"{ctx} must be an edge index in [0, {n})")
        return v

    adjacency = np.zeros((n, n), dtype=np.int8)
    prob = None
    if "adjacency" in data:
        for pair in data["adjacency"]:
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError("adjacency entries must be [i, j] pairs")
            i, j = (_index(v, "adjacency index") for v in pair)
            if i == j:
                raise SchemaError("adjacency cannot join an edge to itself")
            adjacency[i, j] = adjacency[j, i] = 1
    else:
        prob = np.zeros((n, n))
        for triple in data["probabilities"]:
            if not isinstance(triple, list) or len(triple) != 3:
                raise SchemaError("probability entries must be [i, j, p] triples")
            i = _index(triple[0], "probability index")
            j = _index(triple[1], "probability index")
            p = _num(triple[2], "probability")
            if i == j:
                raise SchemaError("probability cannot join an edge to itself")
            if not (0.0 <= p <= 1.0):
                raise SchemaError(f"probability {p} outside [0, 1]")
            prob[i, j] = prob[j, i] = p
            if p > 0.5:
                adjacency[i, j] = adjacency[j, i] = 1
    merge_map = {}
    if "merge_map" in data:
        if not isinstance(data["merge_map"], dict):
            raise SchemaError("merge_map must be an object")
        for k, v in data["merge_map"].items():
            try:
                ki = int(k)
            except ValueError:
                raise SchemaError("merge_map keys must be edge indices") from None
            merge_map[_index(ki, "merge_map key")] = _index(v, "merge_map value")
    try:
        dual = DualGraph(outline=pts, adjacency=adjacency, prob=prob,
                         merge_map=merge_map)
        if polygon_area(pts) < 0:
            dual = dual.reversed()
        return dual
    except RoofForgeError as exc:
        raise SchemaError(str(exc)) from None


def dumps_dualgraph(dual: DualGraph) -> str:
    n = dual.n_edges
    data: dict = {"format": ROOFDUAL_TAG,
                  "outline": [[float(x), float(y)] for (x, y) in dual.outline]}
    if dual.prob is not None:
        triples = []
        for i in range(n):
            for j in range(i + 1, n):
                if dual.prob[i, j] > 0.0:
                    triples.append([i, j, float(dual.prob[i, j])])
        data["probabilities"] = triples
    else:
        data["adjacency"] = [[i, j] for i in range(n) for j in range(i + 1, n)
                             if dual.adjacency[i, j]]
    if dual.merge_map:
        data["merge_map"] = {str(k): v for k, v in sorted(dual.merge_map.items())}
    return _emit(data) + "\n"


def load_roofgraph(path) -> RoofGraphDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_roofgraph(fh.read())


def save_roofgraph(doc: RoofGraphDocument, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_roofgraph(doc))


def load_dualgraph(path) -> DualGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_dualgraph(fh.read())


def save_dualgraph(dual: DualGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_dualgraph(dual))


def loads_any(text: str):
    """Dispatch on the format tag: RoofGraphDocument or DualGraph."""
    data = _parse_json(text)
    if not isinstance(data, dict) or "format" not in data:
        raise SchemaError("document must be an object with a 'format' tag")
    if data["format"] == ROOFGRAPH_TAG:
        return loads_roofgraph(text)
    if data["format"] == ROOFDUAL_TAG:
        return loads_dualgraph(text)
    raise SchemaError(f"unknown format tag {data['format']!r}")


# ---------------------------------------------------------------------------
# building export


PLANARITY_EXPORT_TOL = 1e-9
FACADE_FRACTION = 0.3


@dataclass
class BuildingMesh:
    """Polygonal building: 0-based indices into `vertices` (z-up)."""

    vertices: list
    roof: list
    facade: list
    base: tuple


def export_building(graph: RoofGraph, emb: Embedding,
                    include_facades: bool = True) -> tuple[BuildingMesh, str]:
    """Extrude the planarized roof into a closed building and emit OBJ text
    with polygonal faces in groups roof/facade/base. When the outline sits at
    z = 0, the roof is raised by 0.3 x its max height so facades have extent;
    degenerate zero-height facades are omitted."""
    if emb.dim != 3:
        raise NonPlanarInput("export needs a 3D embedding")
    outline_pts = [emb[v][:2] for v in sorted(graph.outline_ids)]
    scale = bbox_diagonal(outline_pts)
    if scale == 0.0:
        raise NonPlanarInput("outline has zero extent")
    norm = Embedding({vid: tuple(c / scale for c in emb[vid]) for vid in emb.coords})
    err = roof_planarity(graph, norm).value
    if not (err < PLANARITY_EXPORT_TOL):
        raise NonPlanarInput(f"roof planarity {err:.3e} exceeds {PLANARITY_EXPORT_TOL}")

    cycle = graph.outline_cycle(emb)
    outline_z_zero = all(emb[v][2] == 0.0 for v in cycle)
    max_z = max((emb[v.id][2] for v in graph.vertices), default=0.0)
    dz = FACADE_FRACTION * max_z if (outline_z_zero and include_facades and max_z > 0) else 0.0

    ids = sorted(v.id for v in graph.vertices)
    index = {}
    vertices = []
    for vid in ids:
        x, y, z = emb[vid]
        index[vid] = len(vertices)
        vertices.append((float(x), float(y), float(z) + dz))
    base_index = {}
    for vid in cycle:
        x, y, _ = emb[vid]
        base_index[vid] = len(vertices)
        vertices.append((float(x), float(y), 0.0))

    roof_faces = [tuple(index[v] for v in face) for face in graph.faces]
    facades = []
    if include_facades:
        for i in range(len(cycle)):
            a, b = cycle[i], cycle[(i + 1) % len(cycle)]
            if vertices[index[a]][2] == 0.0 and vertices[index[b]][2] == 0.0:
                continue  # zero-height wall
            facades.append((base_index[a], base_index[b], index[b], index[a]))
    base = tuple(base_index[v] for v in reversed(cycle))
    mesh = BuildingMesh(vertices, roof_faces, facades, base)

    lines = ["# building export"]
    for (x, y, z) in vertices:
        lines.append(f"v {format(x, '.17g')} {format(y, '.17g')} {format(z, '.17g')}")
    lines.append("g roof")
    for face in roof_faces:
        lines.append("f " + " ".join(str(i + 1) for i in face))
    if facades:
        lines.append("g facade")
        for face in facades:
            lines.append("f " + " ".join(str(i + 1) for i in face))
    lines.append("g base")
    lines.append("f " + " ".join(str(i + 1) for i in base))
    return mesh, "\n".join(lines) + "\n"
