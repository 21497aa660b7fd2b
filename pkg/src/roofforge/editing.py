"""Interactive editing: the six topology/geometry operations, smallest
affected-region detection, restricted re-optimization, and the undo journal.

Region detection runs a fixpoint propagation over the 2D projection: an
edge whose planarity-validity condition fails while both endpoints are
still pinned frees its roof endpoints; freed vertices' own edges are
considered satisfiable by the later restricted solve. Seeds (vertices the
user just placed) stay pinned throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import SMALLEST_EIG, roof_planarity
from .errors import (GraphStructureError, InvalidTarget,
                     RegionIsAllRoofVertices, WouldCreateDegenerateFace)
from .graph import (OUTLINE, ROOF, Embedding, RoofGraph, VertexRecord,
                    check_validity_2d)
from .lbfgs import minimize
from .solver import SolveResult, SolveSpec, optimize_primal, vertex_adjacency

EDIT_KINDS = ("move_vertex", "move_edge", "snap_edge", "merge_faces",
              "split_face", "force_adjacent")

PLANARITY_TARGET = 1e-9


@dataclass(frozen=True)
class EditOp:
    """One editing operation. Field use by kind:
    move_vertex: vertex, delta; move_edge: edge, delta; snap_edge: edge;
    merge_faces: faces; split_face: face, pair; force_adjacent: faces, pair.
    """

    kind: str
    vertex: int | None = None
    edge: tuple[int, int] | None = None
    face: int | None = None
    faces: tuple[int, int] | None = None
    pair: tuple[int, int] | None = None
    delta: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise InvalidTarget(f"unknown edit kind {self.kind!r}")
        if self.delta is not None and not all(math.isfinite(c) for c in self.delta):
            raise InvalidTarget("delta must be finite")

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for name in ("vertex", "edge", "face", "faces", "pair", "delta"):
            v = getattr(self, name)
            if v is not None:
                out[name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EditOp":
        if not isinstance(data, dict) or "kind" not in data:
            raise InvalidTarget("edit op must be an object with a 'kind'")
        known = {"kind", "vertex", "edge", "face", "faces", "pair", "delta"}
        unknown = set(data) - known
        if unknown:
            raise InvalidTarget(f"unknown edit op fields: {sorted(unknown)}")
        kw = {}
        for name in ("edge", "faces", "pair", "delta"):
            if name in data:
                kw[name] = tuple(data[name])
        for name in ("vertex", "face"):
            if name in data:
                kw[name] = data[name]
        return cls(kind=data["kind"], **kw)


@dataclass(frozen=True)
class AffectedRegion:
    region: frozenset[int]
    seed: object  # vertex id, or tuple of ids for multi-seed edits


# ---------------------------------------------------------------------------
# apply_edit


def _edge_exists(graph: RoofGraph, a: int, b: int) -> bool:
    key = (a, b) if a < b else (b, a)
    return key in graph.edge_faces()


def _translated(emb: Embedding, ids, delta) -> Embedding:
    d = tuple(float(x) for x in delta)[: emb.dim]
    updates = {}
    for vid in ids:
        c = emb[vid]
        updates[vid] = tuple(ci + di for ci, di in zip(c, d + (0.0,) * emb.dim))
    return emb.replaced(updates)


def _renumber(vertices, faces, coords, removed_id):
    """Drop one vertex and close the id gap (ids stay dense 1-based)."""
    def m(vid):
        return vid if vid < removed_id else vid - 1
    new_vertices = [VertexRecord(m(v.id), v.kind, v.height_group)
                    for v in vertices if v.id != removed_id]
    new_faces = [tuple(m(v) for v in face) for face in faces]
    new_coords = {m(vid): c for vid, c in coords.items() if vid != removed_id}
    return new_vertices, new_faces, new_coords


def _dedupe_cycle(cycle):
    out = []
    for v in cycle:
        if not out or out[-1] != v:
            out.append(v)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return tuple(out)


def apply_edit(graph: RoofGraph, emb: Embedding, op: EditOp) -> tuple[RoofGraph, Embedding]:
    """Apply one edit. Coordinate ops return the same graph; topology ops
    rebuild it (keeping ids dense, so snap_edge can renumber)."""
    if op.kind == "move_vertex":
        if op.vertex is None or op.vertex not in emb:
            raise InvalidTarget(f"unknown vertex {op.vertex}")
        delta = op.delta or (0.0, 0.0, 0.0)
        return graph, _translated(emb, [op.vertex], delta)

    if op.kind == "move_edge":
        if op.edge is None or not _edge_exists(graph, *op.edge):
            raise InvalidTarget(f"unknown edge {op.edge}")
        delta = op.delta or (0.0, 0.0, 0.0)
        return graph, _translated(emb, list(op.edge), delta)

    handler = {"snap_edge": _snap_edge, "merge_faces": _merge_faces,
               "split_face": _split_face, "force_adjacent": _force_adjacent}.get(op.kind)
    if handler is None:
        raise InvalidTarget(f"unknown edit kind {op.kind!r}")
    try:
        return handler(graph, emb, op)
    except GraphStructureError as exc:
        # The rebuilt graph failed an invariant (edge over-shared, outline
        # cycle broken, ...): the requested edit is structurally impossible.
        raise InvalidTarget(f"edit would break graph invariants: {exc}") from exc


def _snap_edge(graph: RoofGraph, emb: Embedding, op: EditOp):
    if op.edge is None:
        raise InvalidTarget("snap_edge needs an edge")
    a, b = op.edge
    if not _edge_exists(graph, a, b):
        raise InvalidTarget(f"unknown edge {op.edge}")
    facelist = graph.faces_of_edge(a, b)
    if len(facelist) != 2:
        raise InvalidTarget("snap_edge needs a roof edge shared by two faces")
    a_out, b_out = graph.is_outline(a), graph.is_outline(b)
    if a_out and b_out:
        raise InvalidTarget("cannot snap an edge between two outline vertices")
    if a_out or b_out:
        keep, drop = (a, b) if a_out else (b, a)
        new_pos = emb[keep]  # outline vertices never move
    else:
        keep, drop = (a, b) if a < b else (b, a)
        new_pos = tuple((x + y) / 2.0 for x, y in zip(emb[a], emb[b]))
    new_faces = []
    for face in graph.faces:
        cyc = _dedupe_cycle(tuple(keep if v == drop else v for v in face))
        if len(cyc) < 3:
            raise WouldCreateDegenerateFace(
                f"snapping {op.edge} collapses face {face} below 3 vertices")
        if len(set(cyc)) != len(cyc):
            raise WouldCreateDegenerateFace(
                f"snapping {op.edge} pinches face {face}")
        new_faces.append(cyc)
    coords = {vid: emb[vid] for vid in emb.coords}
    coords[keep] = new_pos
    vertices, faces, coords = _renumber(graph.vertices, new_faces, coords, drop)
    return RoofGraph(vertices, faces), Embedding(coords)


def _merge_faces(graph: RoofGraph, emb: Embedding, op: EditOp):
    if op.faces is None:
        raise InvalidTarget("merge_faces needs two face indices")
    fi, fj = op.faces
    nf = len(graph.faces)
    if not (0 <= fi < nf and 0 <= fj < nf) or fi == fj:
        raise InvalidTarget(f"bad face pair {op.faces}")
    shared = [e for e, fl in graph.edge_faces().items()
              if set(fl) == {fi, fj}]
    if len(shared) != 1:
        raise InvalidTarget(
            f"faces {fi},{fj} share {len(shared)} edges; merge needs exactly one")
    a, b = shared[0]
    ci, cj = list(graph.faces[fi]), list(graph.faces[fj])
    # Orient so face i contains a->b consecutively and face j contains b->a.
    if (ci.index(b) - ci.index(a)) % len(ci) != 1:
        a, b = b, a
    ri = ci[ci.index(b):] + ci[:ci.index(b)]   # starts at b, ends at a
    rj = cj[cj.index(a):] + cj[:cj.index(a)]   # starts at a, ends at b
    merged = tuple(ri + rj[1:-1])
    if len(set(merged)) != len(merged):
        raise WouldCreateDegenerateFace(f"merging {fi},{fj} pinches the cycle")
    lo, hi = min(fi, fj), max(fi, fj)
    faces = list(graph.faces)
    faces[lo] = merged
    del faces[hi]
    used = {v for face in faces for v in face}
    vertices = list(graph.vertices)
    coords = {vid: emb[vid] for vid in emb.coords}
    for v in sorted((v.id for v in graph.vertices if v.id not in used), reverse=True):
        vertices, faces, coords = _renumber(vertices, faces, coords, v)
    return RoofGraph(vertices, faces), Embedding(coords)


def _split_face(graph: RoofGraph, emb: Embedding, op: EditOp):
    if op.face is None or op.pair is None:
        raise InvalidTarget("split_face needs a face index and a vertex pair")
    if not (0 <= op.face < len(graph.faces)):
        raise InvalidTarget(f"bad face index {op.face}")
    cyc = list(graph.faces[op.face])
    p, q = op.pair
    if p not in cyc or q not in cyc or p == q:
        raise InvalidTarget(f"pair {op.pair} not in face {op.face}")
    if graph.is_outline(p) and graph.is_outline(q):
        raise InvalidTarget("split pair cannot join two outline vertices")
    ip, iq = cyc.index(p), cyc.index(q)
    n = len(cyc)
    if (iq - ip) % n in (1, n - 1):
        raise InvalidTarget("split pair must be non-adjacent in the face cycle")
    part1 = tuple(cyc[ip:iq + 1] if ip < iq else cyc[ip:] + cyc[:iq + 1])
    part2 = tuple(cyc[iq:ip + 1] if iq < ip else cyc[iq:] + cyc[:ip + 1])
    outline_pairs = {tuple(sorted(e)) for e in graph.outline_edge_list()}

    def has_outline_edge(part):
        return any(tuple(sorted((part[i], part[(i + 1) % len(part)]))) in outline_pairs
                   for i in range(len(part)))

    if not (has_outline_edge(part1) and has_outline_edge(part2)):
        raise InvalidTarget("split would leave a face without an outline edge")
    faces = list(graph.faces)
    faces[op.face] = part1
    faces.append(part2)
    return RoofGraph(graph.vertices, faces), emb


def _force_adjacent(graph: RoofGraph, emb: Embedding, op: EditOp):
    if op.faces is None or op.pair is None:
        raise InvalidTarget("force_adjacent needs two faces and a vertex pair")
    fi, fj = op.faces
    nf = len(graph.faces)
    if not (0 <= fi < nf and 0 <= fj < nf) or fi == fj:
        raise InvalidTarget(f"bad face pair {op.faces}")
    p, q = op.pair
    ci, cj = list(graph.faces[fi]), list(graph.faces[fj])
    if p not in ci or q not in cj:
        raise InvalidTarget(f"pair {op.pair} must lie in faces {op.faces} respectively")
    if graph.is_outline(p) and graph.is_outline(q):
        raise InvalidTarget("forced edge cannot join two outline vertices")
    if _edge_exists(graph, p, q):
        raise InvalidTarget(f"{op.pair} is already an edge; forcing it shared "
                            "would give it more than two faces")
    if q in ci or p in cj:
        raise InvalidTarget("endpoint already present in the opposite face")
    ci.insert(ci.index(p) + 1, q)
    cj.insert(cj.index(q) + 1, p)
    faces = list(graph.faces)
    faces[fi] = tuple(ci)
    faces[fj] = tuple(cj)
    return RoofGraph(graph.vertices, faces), emb


# ---------------------------------------------------------------------------
# affected region


def _affected_region_multi(graph: RoofGraph, emb2d: Embedding, seeds,
                           tol: float = 1e-6) -> frozenset[int]:
    seeds = set(seeds)
    region: set[int] = set()
    while True:
        report = check_validity_2d(graph, emb2d, tol=tol)
        changed = False
        for ev in report.entries:
            if ev.case != "violated":
                continue
            a, b = ev.edge
            if a in region or b in region:
                continue  # a free endpoint can absorb the violation
            for y in (a, b):
                if y not in seeds and not graph.is_outline(y):
                    region.add(y)
                    changed = True
        if not changed:
            return frozenset(region)


def smallest_affected_region(graph: RoofGraph, emb2d: Embedding, seed: int,
                             tol: float = 1e-6) -> AffectedRegion:
    """Minimal set of roof vertices that must move to restore validity after
    the seed was placed at its current (new) position."""
    if graph.is_outline(seed):
        raise InvalidTarget("seed must be a roof vertex")
    if emb2d.dim != 2:
        emb2d = emb2d.project_xy()
    region = _affected_region_multi(graph, emb2d, {seed}, tol=tol)
    if region and region == set(graph.roof_ids) - {seed}:
        raise RegionIsAllRoofVertices(
            "the edit invalidates every roof vertex; fall back to a full solve")
    return AffectedRegion(region, seed)


# ---------------------------------------------------------------------------
# restricted re-optimization


def reoptimize_region(graph: RoofGraph, emb: Embedding, region: AffectedRegion,
                      spec: SolveSpec) -> SolveResult:
    """Minimize planarity over only the region's vertices (xyz). Everything
    outside the region, including the seed, stays bit-identical."""
    import time as _time
    t0 = _time.perf_counter()
    if emb.dim != 3:
        raise ValueError("reoptimize_region wants a 3D embedding")
    free = sorted(region.region)
    kind = spec.planarity_kind
    if not free:
        p = roof_planarity(graph, emb, kind=kind).value
        return SolveResult(embedding=emb, energy_trace=[(0, p, p)], converged=True,
                           iterations=0, wall_time=_time.perf_counter() - t0,
                           planarity=p)
    for vid in free:
        if graph.is_outline(vid):
            raise InvalidTarget("region must contain only roof vertices")
    layout = [(vid, axis) for vid in free for axis in range(3)]
    var_index = {key: i for i, key in enumerate(layout)}
    coords = {vid: list(emb[vid]) for vid in emb.coords}

    def objective(x):
        for (vid, axis), i in var_index.items():
            coords[vid][axis] = float(x[i])
        e = Embedding({vid: tuple(c) for vid, c in coords.items()})
        ev = roof_planarity(graph, e, kind=kind)
        grad = np.zeros(len(layout))
        for vid, g in ev.gradient.items():
            for axis in range(3):
                i = var_index.get((vid, axis))
                if i is not None:
                    grad[i] += g[axis]
        return ev.value, grad

    x0 = np.array([emb[vid][axis] for (vid, axis) in layout])
    trace = []

    def record(k, x, f):
        trace.append((k, f, f))

    f0, _ = objective(x0)
    record(0, x0, float(f0))
    res = minimize(objective, x0, max_iters=spec.max_iters, tol_grad=spec.tol_grad,
                   tol_energy=spec.tol_energy,
                   callback=lambda k, x, f, gi: record(k, x, f))
    updates = {}
    for vid in free:
        updates[vid] = tuple(float(res.x[var_index[(vid, axis)]]) for axis in range(3))
    out = emb.replaced(updates)
    p = roof_planarity(graph, out, kind=kind).value
    last = trace[-1]
    trace[-1] = (last[0], p, last[2])
    return SolveResult(embedding=out, energy_trace=trace, converged=res.converged,
                       iterations=res.iterations,
                       wall_time=_time.perf_counter() - t0, planarity=p)


# ---------------------------------------------------------------------------
# journal and the full edit pipeline


class EditJournal:
    """Undo stack of full (graph, embedding) snapshots. Snapshots restore
    bit-exactly; inverse operations are not reconstructed."""

    def __init__(self):
        self._stack: list[tuple[RoofGraph, Embedding]] = []

    def __len__(self) -> int:
        return len(self._stack)

    def push(self, graph: RoofGraph, emb: Embedding) -> None:
        self._stack.append((graph, emb))

    def undo(self) -> tuple[RoofGraph, Embedding]:
        if not self._stack:
            raise InvalidTarget("nothing to undo")
        return self._stack.pop()


def _seeds_for(op: EditOp, graph_after: RoofGraph) -> set[int]:
    if op.kind == "move_vertex":
        return {op.vertex} if not graph_after.is_outline(op.vertex) else set()
    if op.kind == "move_edge":
        return {v for v in op.edge if not graph_after.is_outline(v)}
    return set()


def edit_and_reoptimize(graph: RoofGraph, emb: Embedding, op: EditOp,
                        spec: SolveSpec, journal: EditJournal | None = None):
    """Apply an edit, find the affected region, re-optimize it, escalating by
    one-ring expansion up to a full solve if planarity stays above target.
    Returns (graph, SolveResult, region_vertex_ids)."""
    if journal is not None:
        journal.push(graph, emb)
    g2, e2 = apply_edit(graph, emb, op)
    if e2.dim == 2:
        e2 = e2.lifted(0.0)
    seeds = _seeds_for(op, g2)
    roof_all = set(g2.roof_ids)
    try:
        region = _affected_region_multi(g2, e2.project_xy(), seeds)
    except Exception:
        region = frozenset(roof_all - seeds)
    nbrs = vertex_adjacency(g2)
    current = set(region)
    while True:
        res = reoptimize_region(g2, e2, AffectedRegion(frozenset(current), tuple(sorted(seeds))), spec)
        if res.converged and res.planarity < PLANARITY_TARGET:
            return g2, res, frozenset(current)
        expandable = roof_all - current - seeds
        if not expandable:
            return g2, res, frozenset(current)
        ring = {w for v in (current | seeds) for w in nbrs[v]
                if w in expandable}
        if not ring:
            ring = expandable
        current |= ring
