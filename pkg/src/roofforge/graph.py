"""Primal and dual roof graphs.

A roof graph is a planar graph over a building outline: outline vertices form
a single simple cycle at the eaves, roof vertices live inside, and every face
is a roof plane that touches the outline along at least one outline edge. The
dual graph keeps one node per outline edge's face and records which faces
share a roof edge; together with the outline polygon it determines the primal
topology, which `primal_from_dual` reconstructs.

Vertex ids are dense, 1-based. Faces are stored as vertex cycles and are kept
counter-clockwise as seen from +z whenever coordinates are around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateEdge,
    FaceWithoutOutlineEdge,
    GraphStructureError,
    NonRealizableAdjacency,
)
from .geometry import (
    PARALLEL_TOL_RAD,
    angle_between_lines,
    bbox_diagonal,
    direction_in_ccw_wedge,
    is_ccw,
    point_line_distance_2d,
    polygon_is_simple,
    segment_intersection_point,
    segments_properly_intersect,
)

OUTLINE = "outline"
ROOF = "roof"

RIDGE = "ridge"
BISECTOR = "bisector"
OTHER = "other"


@dataclass(frozen=True)
class VertexRecord:
    """One vertex: id, outline/roof kind, optional height-group label.

    height_group is only meaningful for outline vertices in variable-height
    solves: None or "fixed-zero" pins z = 0, "free" releases z without
    grouping, and any other string names a variance group.
    """

    id: int
    kind: str
    height_group: str | None = None

    def __post_init__(self):
        if self.kind not in (OUTLINE, ROOF):
            raise GraphStructureError(f"vertex {self.id}: unknown kind {self.kind!r}")
        if self.id < 1:
            raise GraphStructureError(f"vertex ids are 1-based, got {self.id}")


class Embedding:
    """Vertex id -> coordinate tuple, all of one dimension (2 or 3)."""

    __slots__ = ("coords", "dim")

    def __init__(self, coords: dict[int, tuple]):
        if not coords:
            raise GraphStructureError("empty embedding")
        dims = {len(v) for v in coords.values()}
        if len(dims) != 1 or next(iter(dims)) not in (2, 3):
            raise GraphStructureError("embedding must be uniformly 2D or 3D")
        self.dim = next(iter(dims))
        self.coords = {int(k): tuple(float(x) for x in v) for k, v in coords.items()}

    def __getitem__(self, vid: int) -> tuple:
        return self.coords[vid]

    def __contains__(self, vid: int) -> bool:
        return vid in self.coords

    def ids(self):
        return sorted(self.coords)

    def array_for(self, ids) -> np.ndarray:
        return np.array([self.coords[i] for i in ids], dtype=float)

    def project_xy(self) -> "Embedding":
        return Embedding({k: v[:2] for k, v in self.coords.items()})

    def lifted(self, z: float = 0.0) -> "Embedding":
        """2D -> 3D with constant z."""
        if self.dim == 3:
            return self
        return Embedding({k: (v[0], v[1], float(z)) for k, v in self.coords.items()})

    def replaced(self, updates: dict[int, tuple]) -> "Embedding":
        out = dict(self.coords)
        for k, v in updates.items():
            out[int(k)] = tuple(float(x) for x in v)
        return Embedding(out)

    def equals_bitwise(self, other: "Embedding", ids=None) -> bool:
        ids = ids if ids is not None else self.ids()
        return all(self.coords[i] == other.coords[i] for i in ids)


class RoofGraph:
    """Immutable roof graph: vertices plus face cycles."""

    __slots__ = ("vertices", "faces", "_by_id", "_edge_faces", "_outline_ids")

    def __init__(self, vertices, faces):
        self.vertices = tuple(vertices)
        self.faces = tuple(tuple(int(v) for v in f) for f in faces)
        self._by_id = {v.id: v for v in self.vertices}
        self._validate_ids()
        self._edge_faces = self._collect_edges()
        self._outline_ids = frozenset(v.id for v in self.vertices if v.kind == OUTLINE)
        self._validate_structure()

    # -- construction checks --------------------------------------------

    def _validate_ids(self):
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise GraphStructureError("duplicate vertex ids")
        if sorted(ids) != list(range(1, len(ids) + 1)):
            raise GraphStructureError("vertex ids must be dense 1..n_v")

    def _collect_edges(self):
        edge_faces: dict[tuple[int, int], list[int]] = {}
        for fi, face in enumerate(self.faces):
            if len(face) < 3:
                raise GraphStructureError(f"face {fi} has fewer than 3 vertices")
            if len(set(face)) != len(face):
                raise GraphStructureError(f"face {fi} repeats a vertex")
            for a, b in zip(face, face[1:] + face[:1]):
                if a not in self._by_id or b not in self._by_id:
                    raise GraphStructureError(f"face {fi} references unknown vertex")
                key = (a, b) if a < b else (b, a)
                edge_faces.setdefault(key, []).append(fi)
        return {k: tuple(v) for k, v in edge_faces.items()}

    def _validate_structure(self):
        used = {v for face in self.faces for v in face}
        for v in self.vertices:
            if v.id not in used:
                raise GraphStructureError(f"vertex {v.id} belongs to no face")
        outline_edges = []
        for (a, b), facelist in self._edge_faces.items():
            both_outline = a in self._outline_ids and b in self._outline_ids
            if both_outline:
                if len(facelist) != 1:
                    raise GraphStructureError(
                        f"outline edge ({a},{b}) must belong to exactly 1 face, has {len(facelist)}")
                outline_edges.append((a, b))
            else:
                if len(facelist) not in (1, 2):
                    raise GraphStructureError(
                        f"roof edge ({a},{b}) shared by {len(facelist)} faces; expected 1 or 2")
        self._validate_outline_cycle(outline_edges)

    def _validate_outline_cycle(self, outline_edges):
        if len(self._outline_ids) < 3:
            raise GraphStructureError("need at least 3 outline vertices")
        adj: dict[int, list[int]] = {}
        for a, b in outline_edges:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        if set(adj) != set(self._outline_ids):
            raise GraphStructureError("outline vertex missing from outline cycle")
        for v, nbrs in adj.items():
            if len(nbrs) != 2:
                raise GraphStructureError(
                    f"outline vertex {v} has {len(nbrs)} outline edges; cycle needs exactly 2")
        # Single cycle covering all outline vertices.
        start = min(adj)
        seen = {start}
        prev, cur = None, start
        while True:
            nxt = [n for n in adj[cur] if n != prev]
            nxt = nxt[0] if nxt else prev
            if nxt == start:
                break
            if nxt in seen:
                raise GraphStructureError("outline edges do not form a single cycle")
            seen.add(nxt)
            prev, cur = cur, nxt
        if seen != set(self._outline_ids):
            raise GraphStructureError("outline splits into multiple cycles")

    # -- accessors -------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def outline_ids(self) -> frozenset[int]:
        return self._outline_ids

    @property
    def roof_ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.vertices if v.kind == ROOF)

    def vertex(self, vid: int) -> VertexRecord:
        return self._by_id[vid]

    def is_outline(self, vid: int) -> bool:
        return vid in self._outline_ids

    def edge_faces(self) -> dict[tuple[int, int], tuple[int, ...]]:
        return dict(self._edge_faces)

    def faces_of_edge(self, a: int, b: int) -> tuple[int, ...]:
        key = (a, b) if a < b else (b, a)
        return self._edge_faces.get(key, ())

    def roof_edges(self) -> list[tuple[int, int]]:
        """Edges with at least one roof endpoint, sorted."""
        out = []
        for a, b in self._edge_faces:
            if a not in self._outline_ids or b not in self._outline_ids:
                out.append((a, b))
        return sorted(out)

    def outline_cycle(self, emb: Embedding | None = None) -> tuple[int, ...]:
        """Outline vertex ids in cycle order, starting at the smallest id.

        With an embedding the cycle is oriented counter-clockwise; without
        one the direction is the neighbor with the smaller id.
        """
        adj: dict[int, list[int]] = {}
        for a, b in self._edge_faces:
            if a in self._outline_ids and b in self._outline_ids:
                adj.setdefault(a, []).append(b)
                adj.setdefault(b, []).append(a)
        start = min(self._outline_ids)
        first = min(adj[start])
        cycle = [start, first]
        while True:
            nxt = [n for n in adj[cycle[-1]] if n != cycle[-2]][0]
            if nxt == start:
                break
            cycle.append(nxt)
        if emb is not None:
            pts = [emb[v][:2] for v in cycle]
            if not is_ccw(pts):
                cycle = [cycle[0]] + cycle[1:][::-1]
        return tuple(cycle)

    def outline_edge_list(self, emb: Embedding | None = None) -> list[tuple[int, int]]:
        cyc = self.outline_cycle(emb)
        return [(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]

    def face_outline_edges(self, face_idx: int) -> list[tuple[int, int]]:
        """This face's outline edges in face-cycle order (unordered pairs)."""
        face = self.faces[face_idx]
        out = []
        for a, b in zip(face, face[1:] + face[:1]):
            if a in self._outline_ids and b in self._outline_ids:
                out.append((a, b) if a < b else (b, a))
        return out

    def with_faces(self, faces) -> "RoofGraph":
        return RoofGraph(self.vertices, faces)

    def __eq__(self, other):
        return isinstance(other, RoofGraph) and self.vertices == other.vertices \
            and self.faces == other.faces

    def __hash__(self):
        return hash((self.vertices, self.faces))


class DualGraph:
    """Outline polygon plus the face-adjacency matrix, one row per outline
    edge. Faces spanning several outline edges are represented by their first
    (lowest-index) edge; the other rows are merged away and must stay zero.
    """

    __slots__ = ("outline", "adjacency", "prob", "merge_map")

    def __init__(self, outline, adjacency, prob=None, merge_map=None):
        self.outline = tuple((float(x), float(y)) for x, y in outline)
        n = len(self.outline)
        if n < 3:
            raise GraphStructureError("outline needs at least 3 points")
        if not polygon_is_simple(self.outline):
            raise GraphStructureError("outline polygon is not simple")
        a = np.asarray(adjacency, dtype=float)
        if a.shape != (n, n):
            raise GraphStructureError(f"adjacency must be {n}x{n}, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise GraphStructureError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise GraphStructureError("adjacency diagonal must be zero")
        if not np.all((a == 0) | (a == 1)):
            raise GraphStructureError("adjacency entries must be 0 or 1")
        self.adjacency = a.astype(np.int8)
        self.merge_map = {int(k): int(v) for k, v in (merge_map or {}).items() if int(k) != int(v)}
        for k, v in self.merge_map.items():
            if not (0 <= k < n and 0 <= v < n):
                raise GraphStructureError("merge_map index out of range")
            if v in self.merge_map:
                raise GraphStructureError("merge_map must not chain")
            if v > k:
                raise GraphStructureError(
                    "merged edges must point at the face's first outline edge")
        for k in self.merge_map:
            if np.any(self.adjacency[k]):
                raise GraphStructureError(f"merged edge {k} must have a zero adjacency row")
        if prob is not None:
            p = np.asarray(prob, dtype=float)
            if p.shape != (n, n):
                raise GraphStructureError("prob matrix shape mismatch")
            if not np.allclose(p, p.T, atol=0.0):
                raise GraphStructureError("prob must be symmetric")
            if np.any(p < 0) or np.any(p > 1):
                raise GraphStructureError("prob entries must lie in [0, 1]")
            if np.any((self.adjacency == 1) & (p <= 0)):
                raise GraphStructureError("kept adjacency needs positive probability")
            self.prob = p
        else:
            self.prob = None

    @property
    def n_edges(self) -> int:
        return len(self.outline)

    def representative(self, edge_idx: int) -> int:
        return self.merge_map.get(edge_idx, edge_idx)

    def face_indices(self) -> list[int]:
        """Active (representative) edge indices, ascending."""
        merged = set(self.merge_map)
        return [i for i in range(self.n_edges) if i not in merged]

    def adjacency_pairs(self) -> list[tuple[int, int]]:
        n = self.n_edges
        return [(i, j) for i in range(n) for j in range(i + 1, n) if self.adjacency[i, j]]

    def edge_midpoints(self) -> np.ndarray:
        pts = np.asarray(self.outline, dtype=float)
        return (pts + np.roll(pts, -1, axis=0)) / 2.0

    def reversed(self) -> "DualGraph":
        """Same dual over the reversed (flipped-orientation) outline."""
        n = self.n_edges
        perm = [(n - 2 - i) % n for i in range(n)]  # new edge j <- old edge perm[j]
        inv = [0] * n
        for j, i in enumerate(perm):
            inv[i] = j
        a = self.adjacency[np.ix_(perm, perm)]
        p = self.prob[np.ix_(perm, perm)] if self.prob is not None else None
        # Rebuild merge groups: remap members, re-anchor at the minimum index.
        groups: dict[int, list[int]] = {}
        for k, v in self.merge_map.items():
            groups.setdefault(v, [v]).append(k)
        mm = {}
        for members in groups.values():
            new_members = sorted(inv[m] for m in set(members))
            rep = new_members[0]
            for m in new_members[1:]:
                mm[m] = rep
        # Merged rows were zero and must stay attached to the new representative.
        pts = list(self.outline)[::-1]
        a = a.copy()
        if mm:
            for m, rep in mm.items():
                a[rep] |= a[m]
                a[:, rep] |= a[:, m]
                a[m, :] = 0
                a[:, m] = 0
            np.fill_diagonal(a, 0)
        return DualGraph(pts, a, p, mm)


@dataclass(frozen=True)
class EdgeValidity:
    edge: tuple[int, int]
    case: str           # parallel | concurrent | endpoint | violated
    residual: float


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    tol: float
    max_residual: float
    entries: tuple[EdgeValidity, ...]

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "edges": [
                {"edge": list(e.edge), "case": e.case, "residual": e.residual}
                for e in self.entries
            ],
        }


# ---------------------------------------------------------------------------
# primal -> dual


def _outline_edge_index_map(graph: RoofGraph, emb: Embedding):
    cyc = graph.outline_cycle(emb)
    index = {}
    for i in range(len(cyc)):
        a, b = cyc[i], cyc[(i + 1) % len(cyc)]
        index[(a, b) if a < b else (b, a)] = i
    return cyc, index


def dual_from_primal(graph: RoofGraph, emb: Embedding) -> DualGraph:
    """Face-adjacency dual of a roof graph.

    Each face maps to its first outline edge; faces owning several outline
    edges put the extra edges into merge_map with all-zero rows.
    """
    cyc, edge_index = _outline_edge_index_map(graph, emb)
    n = len(cyc)
    rep_of_face: dict[int, int] = {}
    merge_map: dict[int, int] = {}
    for fi in range(len(graph.faces)):
        own = sorted(edge_index[e] for e in graph.face_outline_edges(fi))
        if not own:
            raise FaceWithoutOutlineEdge(f"face {fi} has no outline edge")
        rep_of_face[fi] = own[0]
        for k in own[1:]:
            merge_map[k] = own[0]
    adjacency = np.zeros((n, n), dtype=np.int8)
    for (a, b), facelist in graph.edge_faces().items():
        if a in graph.outline_ids and b in graph.outline_ids:
            continue
        if len(facelist) == 2:
            ri, rj = rep_of_face[facelist[0]], rep_of_face[facelist[1]]
            adjacency[ri, rj] = adjacency[rj, ri] = 1
    outline_pts = [emb[v][:2] for v in cyc]
    return DualGraph(outline_pts, adjacency, prob=None, merge_map=merge_map)


# ---------------------------------------------------------------------------
# dual -> primal


def _outward_normal(outline: np.ndarray, k: int) -> np.ndarray:
    """Outward unit normal of outline edge k (outline counter-clockwise)."""
    n = len(outline)
    d = outline[(k + 1) % n] - outline[k]
    norm = np.hypot(*d)
    if norm == 0:
        raise DegenerateEdge(f"outline edge {k} has zero length")
    return np.array([d[1], -d[0]]) / norm


def check_realizable(dual: DualGraph) -> None:
    """Raise NonRealizableAdjacency if the completed dual cannot be drawn."""
    mids = dual.edge_midpoints()
    pairs = dual.adjacency_pairs()
    bad_exterior = [
        (i, j) for (i, j) in pairs
        if not (exterior_test(dual.outline, i, j) and exterior_test(dual.outline, j, i))
    ]
    if bad_exterior:
        raise NonRealizableAdjacency(
            f"adjacency leaves the roof interior: {bad_exterior}", offending=bad_exterior)
    crossing = []
    for a in range(len(pairs)):
        i, j = pairs[a]
        for b in range(a + 1, len(pairs)):
            k, l = pairs[b]
            if {i, j} & {k, l}:
                continue
            if segments_properly_intersect(mids[i], mids[j], mids[k], mids[l]):
                crossing.append((pairs[a], pairs[b]))
    if crossing:
        raise NonRealizableAdjacency(
            f"dual edges cross: {crossing}", offending=crossing)


def exterior_test(outline2d, i: int, j: int) -> bool:
    """True iff the dual segment from edge i's center toward edge j's center
    leaves through edge i's interior angular wedge (the adjacency is interior).

    The wedge at edge i spans from the direction toward the previous edge
    center to the direction toward the next one, swept across the roof side.
    Adjacent outline edges are always interior.
    """
    pts = np.asarray(outline2d, dtype=float)
    n = len(pts)
    mids = (pts + np.roll(pts, -1, axis=0)) / 2.0
    if j == (i + 1) % n or j == (i - 1) % n:
        return True
    d = mids[j] - mids[i]
    d_prev = mids[(i - 1) % n] - mids[i]
    d_next = mids[(i + 1) % n] - mids[i]
    if is_ccw(pts):
        # Mirror of the clockwise construction: sweep CCW from next to prev.
        return direction_in_ccw_wedge(d, d_next, d_prev)
    return direction_in_ccw_wedge(d, d_prev, d_next)


def primal_from_dual(dual: DualGraph) -> RoofGraph:
    """Reconstruct the primal roof graph: complete the dual with an outside
    node joined through every outline edge, embed nodes at outline-edge
    midpoints, and read the primal off as the dual of that planar graph via
    an angular face walk.

    Outline vertices get ids 1..n_O in outline order; roof vertices follow in
    a deterministic order. Faces are indexed by their representative outline
    edge, matching the adjacency matrix rows.
    """
    check_realizable(dual)
    n = dual.n_edges
    outline = np.asarray(dual.outline, dtype=float)
    if not is_ccw(outline):
        raise GraphStructureError("dual outline must be counter-clockwise")
    mids = dual.edge_midpoints()
    reps = dual.face_indices()
    node_of_rep = {r: idx + 1 for idx, r in enumerate(reps)}  # node 0 = outside
    node_pos = {node_of_rep[r]: mids[r] for r in reps}

    # Edge list of the completed dual. Boundary edges carry their outline
    # edge index so f0-orbits can be mapped back to outline vertices.
    edges = []  # (node_a, node_b, tag) with tag = ("adj", i, j) | ("bnd", k)
    for (i, j) in dual.adjacency_pairs():
        edges.append((node_of_rep[i], node_of_rep[j], ("adj", i, j)))
    for k in range(n):
        edges.append((node_of_rep[dual.representative(k)], 0, ("bnd", k)))

    # Rotation systems. Face nodes sort incident edges by direction angle;
    # the outside node sees boundary edges in reversed outline order.
    incident: dict[int, list[int]] = {0: []}
    for node in node_pos:
        incident[node] = []
    for eid, (a, b, tag) in enumerate(edges):
        incident[a].append(eid)
        if b != a:
            incident[b].append(eid)

    def edge_dir_at(node: int, eid: int) -> np.ndarray:
        a, b, tag = edges[eid]
        other = b if a == node else a
        if tag[0] == "bnd":
            k = tag[1]
            m = mids[k]
            c = node_pos[node]
            if np.allclose(m, c):
                return _outward_normal(outline, k)
            return m - c
        return node_pos[other] - node_pos[node]

    rotation: dict[int, list[int]] = {}
    for node in node_pos:
        def sort_key(eid, node=node):
            d = edge_dir_at(node, eid)
            a, b, tag = edges[eid]
            return (math.atan2(d[1], d[0]), tag)
        rotation[node] = sorted(incident[node], key=sort_key)
        if len(rotation[node]) < 3:
            raise NonRealizableAdjacency(
                f"face at outline edge {reps[node - 1]} would be degenerate "
                f"(dual node degree {len(rotation[node])})")
    rotation[0] = sorted(incident[0], key=lambda eid: -edges[eid][2][1])

    # Face walk: next of (u -> v) is the edge one step clockwise from the
    # reversed half-edge in v's rotation, leaving v.
    pos_in_rotation = {}
    for node, rot in rotation.items():
        for idx, eid in enumerate(rot):
            pos_in_rotation[(node, eid)] = idx

    def next_halfedge(src: int, dst: int, eid: int):
        rot = rotation[dst]
        idx = pos_in_rotation[(dst, eid)]
        nxt = rot[idx - 1]
        a, b, _ = edges[nxt]
        other = b if a == dst else a
        return dst, other, nxt

    visited = set()
    orbits = []  # list of lists of half-edges (src, dst, eid)
    for eid, (a, b, _) in enumerate(edges):
        for (src, dst) in ((a, b), (b, a)):
            if (src, dst, eid) in visited:
                continue
            orbit = []
            cur = (src, dst, eid)
            while cur not in visited:
                visited.add(cur)
                orbit.append(cur)
                cur = next_halfedge(*cur)
            orbits.append(orbit)

    # Split orbits into outline vertices (through the outside node) and roof
    # vertices; sanity-check the sphere embedding while at it.
    n_active = len(reps)
    n_edges_total = len(edges)
    if (1 + n_active) - n_edges_total + len(orbits) != 2:
        raise NonRealizableAdjacency(
            "completed dual is not a planar sphere embedding "
            f"(V-E+F = {(1 + n_active) - n_edges_total + len(orbits)})")

    outline_vertex_orbit = {}  # outline vertex index (0-based) -> orbit index
    roof_orbits = []
    for oi, orbit in enumerate(orbits):
        through0 = [he for he in orbit if he[0] == 0 or he[1] == 0]
        if not through0:
            roof_orbits.append(oi)
            continue
        bnd_ks = sorted(edges[he[2]][2][1] for he in orbit if edges[he[2]][2][0] == "bnd")
        if len(bnd_ks) != 2:
            raise NonRealizableAdjacency(
                f"outline corner orbit touches {len(bnd_ks)} boundary edges")
        k1, k2 = bnd_ks
        if k2 == k1 + 1:
            vidx = k2
        elif k1 == 0 and k2 == n - 1:
            vidx = 0
        else:
            raise NonRealizableAdjacency(
                f"boundary edges {k1},{k2} are not consecutive around the outline")
        if vidx in outline_vertex_orbit:
            raise NonRealizableAdjacency(f"outline vertex {vidx} traced twice")
        outline_vertex_orbit[vidx] = oi
    if len(outline_vertex_orbit) != n:
        raise NonRealizableAdjacency("outline vertices not all recovered")

    # Deterministic roof vertex ids: sort by the set of incident faces.
    def orbit_face_key(oi):
        nodes = sorted({he[0] for he in orbits[oi]} | {he[1] for he in orbits[oi]})
        return tuple(reps[x - 1] for x in nodes if x != 0)

    roof_orbits.sort(key=lambda oi: (orbit_face_key(oi),))
    orbit_vertex_id = {}
    for vidx, oi in outline_vertex_orbit.items():
        orbit_vertex_id[oi] = vidx + 1
    for rank, oi in enumerate(roof_orbits):
        orbit_vertex_id[oi] = n + 1 + rank

    orbit_of_halfedge = {}
    for oi, orbit in enumerate(orbits):
        for he in orbit:
            orbit_of_halfedge[he] = oi

    faces = []
    for r in reps:
        node = node_of_rep[r]
        cycle = []
        for eid in rotation[node]:
            a, b, _ = edges[eid]
            other = b if a == node else a
            oi = orbit_of_halfedge[(node, other, eid)]
            cycle.append(orbit_vertex_id[oi])
        if len(set(cycle)) != len(cycle):
            raise NonRealizableAdjacency(
                f"face at outline edge {r} traces a pinched cycle {cycle}")
        faces.append(tuple(cycle))

    vertices = [VertexRecord(i + 1, OUTLINE) for i in range(n)]
    vertices += [VertexRecord(n + 1 + i, ROOF) for i in range(len(roof_orbits))]
    return RoofGraph(vertices, faces)


def outline_embedding(dual: DualGraph) -> Embedding:
    """2D embedding of the recovered primal's outline vertices (ids 1..n_O)."""
    return Embedding({i + 1: p for i, p in enumerate(dual.outline)})


# ---------------------------------------------------------------------------
# validity and edge classification


def _face_rep_outline_edge(graph: RoofGraph, edge_index, face_idx: int):
    own = graph.face_outline_edges(face_idx)
    if not own:
        raise FaceWithoutOutlineEdge(f"face {face_idx} has no outline edge")
    return min(own, key=lambda e: edge_index[e])


def check_validity_2d(graph: RoofGraph, emb2d: Embedding, tol: float = 1e-6) -> ValidityReport:
    """Remark-style 2D validity: every roof edge shared by two faces must be
    parallel to both faces' outline edges or pass through their intersection
    point. Residuals are angles (radians) for the parallel case and distances
    normalized by the outline bbox diagonal otherwise.
    """
    cyc, edge_index = _outline_edge_index_map(graph, emb2d)
    diag = bbox_diagonal([emb2d[v][:2] for v in cyc])
    if diag == 0:
        raise GraphStructureError("outline has zero extent")
    entries = []
    worst = 0.0
    for (a, b) in graph.roof_edges():
        facelist = graph.faces_of_edge(a, b)
        if len(facelist) != 2:
            continue
        e1 = _face_rep_outline_edge(graph, edge_index, facelist[0])
        e2 = _face_rep_outline_edge(graph, edge_index, facelist[1])
        p = emb2d[a][:2]
        q = emb2d[b][:2]
        elen = math.hypot(q[0] - p[0], q[1] - p[1])
        if elen < 1e-15 * diag:
            entries.append(EdgeValidity((a, b), "violated", math.inf))
            worst = math.inf
            continue
        u1, u2 = (emb2d[v][:2] for v in e1)
        w1, w2 = (emb2d[v][:2] for v in e2)
        d1 = (u2[0] - u1[0], u2[1] - u1[1])
        d2 = (w2[0] - w1[0], w2[1] - w1[1])
        de = (q[0] - p[0], q[1] - p[1])
        if angle_between_lines(d1, d2) < PARALLEL_TOL_RAD:
            residual = angle_between_lines(de, d1)
            case = "parallel"
        else:
            shared = set(e1) & set(e2)
            if shared:
                x = emb2d[next(iter(shared))][:2]
                case = "endpoint"
            else:
                x = segment_intersection_point(u1, u2, w1, w2)
                case = "concurrent"
            residual = point_line_distance_2d(x, p, q) / diag
        ok = residual <= tol
        entries.append(EdgeValidity((a, b), case if ok else "violated", residual))
        worst = max(worst, residual)
    return ValidityReport(valid=worst <= tol, tol=tol, max_residual=worst,
                          entries=tuple(entries))


def classify_roof_edges(graph: RoofGraph, emb2d: Embedding,
                        tol_rad: float = PARALLEL_TOL_RAD) -> dict[tuple[int, int], str]:
    """Label roof edges: ridge (parallel to both faces' outline edges),
    bisector (touches an outline vertex the faces' outline edges share),
    other (everything else, including single-face edges)."""
    out = {}
    for (a, b) in graph.roof_edges():
        facelist = graph.faces_of_edge(a, b)
        if len(facelist) != 2:
            out[(a, b)] = OTHER
            continue
        own1 = graph.face_outline_edges(facelist[0])
        own2 = graph.face_outline_edges(facelist[1])
        p = emb2d[a][:2]
        q = emb2d[b][:2]
        de = (q[0] - p[0], q[1] - p[1])

        def parallel_to_some(own):
            for (u, v) in own:
                du = (emb2d[v][0] - emb2d[u][0], emb2d[v][1] - emb2d[u][1])
                if angle_between_lines(de, du) < tol_rad:
                    return True
            return False

        if parallel_to_some(own1) and parallel_to_some(own2):
            out[(a, b)] = RIDGE
            continue
        touched = {a, b} & graph.outline_ids
        label = OTHER
        for w in touched:
            if any(w in e for e in own1) and any(w in e for e in own2):
                label = BISECTOR
                break
        out[(a, b)] = label
    return out
