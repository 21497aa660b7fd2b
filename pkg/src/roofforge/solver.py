"""Solve pipeline: outline preprocessing, spectral 2D initialization, the
three quasi-Newton solve modes, and exact 2D -> 3D lifting.

Coordinates are normalized internally so the outline bounding-box diagonal
is 1; results are rescaled on output. Outline vertex coordinates are never
round-tripped through the scaling: returned embeddings carry them verbatim
from the input. The designated fixed vertex's z is eliminated from the
variable vector and assigned literally, so z(x*) = h holds bit-exactly.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import energy as energy_mod
from .energy import (POINTWISE_KINDS, SMALLEST_EIG, aesthetic_energy,
                     build_aesthetic_terms, roof_planarity)
from .errors import (AllHeightsFree, DegenerateGraph, InconsistentSystem,
                     InvalidInput2D, SelfIntersectingOutline, SingularSystem)
from .graph import (DualGraph, Embedding, RoofGraph, check_validity_2d,
                    classify_roof_edges, outline_embedding, primal_from_dual)
from .geometry import bbox_diagonal, polygon_area, polygon_is_simple
from .lbfgs import minimize

log = logging.getLogger("roofforge.solver")

MODES = ("primal", "dual", "variable_height")


@dataclass(frozen=True)
class SolveSpec:
    """Configuration for one solve. h = None means the area default
    sqrt(S)/2. Weights: lam = closeness to the user's 2D positions, gamma =
    aesthetic, eta = per-group height variance."""

    mode: str = "primal"
    h: float | None = None
    lam: float = 0.1
    gamma: float = 0.05
    eta: float = 1.0
    theta_deg: float = 3.0
    planarity_kind: str = SMALLEST_EIG
    tol_grad: float = 1e-12
    tol_energy: float = 1e-16
    max_iters: int = 2000
    fixed_vertex: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.h is not None and not (self.h > 0):
            raise ValueError("h must be positive")
        for name in ("lam", "gamma", "eta", "theta_deg"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.planarity_kind not in POINTWISE_KINDS:
            raise ValueError(f"planarity_kind must be one of {POINTWISE_KINDS}")


@dataclass
class SolveResult:
    """energy_trace rows are (iteration, E_planarity, E_total). E_planarity
    is recomputed on the denormalized coordinates (world units, the reported
    "err"); E_total is the solver's normalized objective, non-increasing."""

    embedding: Embedding
    energy_trace: list
    converged: bool
    iterations: int
    wall_time: float
    planarity: float = 0.0


# ---------------------------------------------------------------------------
# outline preprocessing


def _axial_mean(angles):
    """Mean of undirected directions (mod pi), via angle doubling."""
    s = sum(math.sin(2 * a) for a in angles)
    c = sum(math.cos(2 * a) for a in angles)
    return 0.5 * math.atan2(s, c)


def preprocess_outline(outline2d, theta_deg: float):
    """Cluster outline edge directions and snap near-parallel edges to their
    cluster's mean direction by the least-norm vertex displacement that makes
    the directions exact. Edges already exact are left bit-identical."""
    pts = [(float(p[0]), float(p[1])) for p in outline2d]
    n = len(pts)
    if n < 3 or not polygon_is_simple(pts):
        raise SelfIntersectingOutline("outline must be a simple polygon")
    theta = math.radians(theta_deg)
    dirs = []
    for i in range(n):
        dx = pts[(i + 1) % n][0] - pts[i][0]
        dy = pts[(i + 1) % n][1] - pts[i][1]
        dirs.append(math.atan2(dy, dx) % math.pi)

    # Greedy chain clustering on sorted axial angles, merging across the
    # pi ~ 0 wrap when the extremes are within theta.
    order = sorted(range(n), key=lambda i: dirs[i])
    clusters = [[order[0]]]
    for i in order[1:]:
        if dirs[i] - dirs[clusters[-1][-1]] < theta:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    if len(clusters) > 1 and (dirs[clusters[0][0]] + math.pi - dirs[clusters[-1][-1]]) < theta:
        clusters[0] = clusters.pop() + clusters[0]

    # One direction constraint per edge: (p_next - p_prev + d_next - d_prev)
    # dot normal(cluster mean) = 0, solved for the min-norm displacement d.
    normals = {}
    for cl in clusters:
        mean = _axial_mean([dirs[i] for i in cl])
        nx, ny = -math.sin(mean), math.cos(mean)
        for i in cl:
            normals[i] = (nx, ny)
    C = np.zeros((n, 2 * n))
    r = np.zeros(n)
    for i in range(n):
        j = (i + 1) % n
        nx, ny = normals[i]
        C[i, 2 * j] += nx
        C[i, 2 * j + 1] += ny
        C[i, 2 * i] -= nx
        C[i, 2 * i + 1] -= ny
        r[i] = (pts[j][0] - pts[i][0]) * nx + (pts[j][1] - pts[i][1]) * ny
    # Residuals at the floating-point floor mean the outline is already
    # snapped; return it untouched rather than smearing 1e-16 displacements.
    if float(np.abs(r).max()) <= 1e-14 * bbox_diagonal(pts):
        return [tuple(p) for p in pts]
    delta, *_ = np.linalg.lstsq(C, -r, rcond=None)
    out = [(pts[i][0] + delta[2 * i], pts[i][1] + delta[2 * i + 1]) for i in range(n)]
    if not polygon_is_simple(out):
        raise SelfIntersectingOutline("preprocessing displaced the outline into self-intersection")
    moved = max(math.hypot(delta[2 * i], delta[2 * i + 1]) for i in range(n))
    log.info("preprocess_outline: %d clusters, max vertex displacement %.3e", len(clusters), moved)
    return out


# ---------------------------------------------------------------------------
# spectral initialization


def vertex_adjacency(graph: RoofGraph) -> dict[int, list[int]]:
    nbrs: dict[int, set[int]] = {v.id: set() for v in graph.vertices}
    for face in graph.faces:
        m = len(face)
        for i in range(m):
            a, b = face[i], face[(i + 1) % m]
            nbrs[a].add(b)
            nbrs[b].add(a)
    return {vid: sorted(s) for vid, s in nbrs.items()}


def default_fixed_vertex(graph: RoofGraph) -> int:
    """Deterministic stand-in for an arbitrary roof vertex: maximum graph
    degree, ties broken by smallest id."""
    nbrs = vertex_adjacency(graph)
    roof = graph.roof_ids
    if not roof:
        raise DegenerateGraph("graph has no roof vertices")
    return max(roof, key=lambda vid: (len(nbrs[vid]), -vid))


def spectral_embed_2d(graph: RoofGraph, outline2d: Embedding) -> Embedding:
    """Place roof vertices by minimizing the combinatorial Laplacian energy
    with the outline as Dirichlet boundary: each free vertex lands at the
    arithmetic mean of its graph neighbors."""
    nbrs = vertex_adjacency(graph)
    free = list(graph.roof_ids)
    if not free:
        return Embedding({vid: tuple(map(float, outline2d[vid][:2]))
                          for vid in sorted(graph.outline_ids)})
    index = {vid: i for i, vid in enumerate(free)}
    nf = len(free)
    L = np.zeros((nf, nf))
    rhs = np.zeros((nf, 2))
    for vid in free:
        i = index[vid]
        L[i, i] = len(nbrs[vid])
        for w in nbrs[vid]:
            if w in index:
                L[i, index[w]] -= 1.0
            else:
                rhs[i, 0] += outline2d[w][0]
                rhs[i, 1] += outline2d[w][1]
    try:
        X = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"spectral embedding system is singular: {exc}") from None
    res = float(np.abs(L @ X - rhs).max())
    scale = max(1.0, float(np.abs(rhs).max()))
    if res > 1e-10 * scale:
        raise SingularSystem(f"spectral embedding residual {res:.3e} too large")
    coords = {vid: (float(outline2d[vid][0]), float(outline2d[vid][1]))
              for vid in sorted(graph.outline_ids)}
    for vid in free:
        coords[vid] = (float(X[index[vid], 0]), float(X[index[vid], 1]))
    return Embedding(coords)


# ---------------------------------------------------------------------------
# shared solve core


def _outline_area(graph: RoofGraph, emb: Embedding) -> float:
    cyc = graph.outline_cycle(emb)
    return abs(polygon_area([emb[v][:2] for v in cyc]))


def _resolve_h(graph: RoofGraph, emb: Embedding, spec: SolveSpec) -> float:
    if spec.h is not None:
        return float(spec.h)
    return math.sqrt(_outline_area(graph, emb)) / 2.0


def _resolve_fixed(graph: RoofGraph, spec: SolveSpec) -> int:
    if spec.fixed_vertex is None:
        return default_fixed_vertex(graph)
    if graph.is_outline(spec.fixed_vertex):
        raise ValueError("fixed_vertex must be a roof vertex")
    return spec.fixed_vertex


def _solve_core(graph: RoofGraph, spec: SolveSpec, *, world_outline: Embedding,
                init_norm: dict[int, list[float]], layout: list[tuple[int, int]],
                scale: float, h_world: float, star: int,
                user_xy_norm: dict[int, tuple[float, float]] | None = None,
                lam: float = 0.0, aes_terms=None, gamma: float = 0.0,
                groups: dict | None = None, eta: float = 0.0) -> SolveResult:
    """Run L-BFGS over the packed variables. init_norm holds normalized
    coordinates for every vertex; entries absent from layout stay fixed."""
    t0 = time.perf_counter()
    kind = spec.planarity_kind
    var_index = {key: i for i, key in enumerate(layout)}
    coords = {vid: list(c) for vid, c in init_norm.items()}
    group_members = {}
    if groups:
        for vid, label in groups.items():
            group_members.setdefault(label, []).append(vid)
        group_members = {k: sorted(v) for k, v in sorted(group_members.items(),
                                                         key=lambda kv: str(kv[0]))}

    def unpack(x):
        for (vid, axis), i in var_index.items():
            coords[vid][axis] = float(x[i])

    def to_embedding():
        return Embedding({vid: tuple(c) for vid, c in coords.items()})

    def objective(x):
        unpack(x)
        emb = to_embedding()
        grad = np.zeros(len(layout))
        ev = roof_planarity(graph, emb, kind=kind)
        total = ev.value
        for vid, g in ev.gradient.items():
            for axis in range(3):
                i = var_index.get((vid, axis))
                if i is not None:
                    grad[i] += g[axis]
        if lam > 0.0 and user_xy_norm:
            for vid, (ux, uy) in user_xy_norm.items():
                cx, cy = coords[vid][0], coords[vid][1]
                total += lam * ((cx - ux) ** 2 + (cy - uy) ** 2)
                i = var_index.get((vid, 0))
                if i is not None:
                    grad[i] += 2.0 * lam * (cx - ux)
                i = var_index.get((vid, 1))
                if i is not None:
                    grad[i] += 2.0 * lam * (cy - uy)
        if gamma > 0.0 and aes_terms:
            ea = aesthetic_energy(graph, emb, terms=aes_terms)
            total += gamma * ea.value
            for vid, g in ea.gradient.items():
                for axis in range(3):
                    i = var_index.get((vid, axis))
                    if i is not None:
                        grad[i] += gamma * g[axis]
        if eta > 0.0 and group_members:
            for members in group_members.values():
                zs = [coords[vid][2] for vid in members]
                m = len(zs)
                mean = sum(zs) / m
                total += eta * sum((z - mean) ** 2 for z in zs) / m
                for vid, z in zip(members, zs):
                    i = var_index.get((vid, 2))
                    if i is not None:
                        grad[i] += eta * 2.0 * (z - mean) / m
        return total, grad

    def world_embedding(x):
        unpack(x)
        out = {}
        for vid in coords:
            c = coords[vid]
            if vid in world_outline:
                # Outline xy passes through verbatim; z scales (0 stays 0).
                wx, wy = world_outline[vid][0], world_outline[vid][1]
                out[vid] = (wx, wy, c[2] * scale)
            else:
                out[vid] = (c[0] * scale, c[1] * scale, c[2] * scale)
        lst = list(out[star])
        lst[2] = h_world
        out[star] = tuple(lst)
        return Embedding(out)

    trace = []

    def record(k, x, f):
        emb_w = world_embedding(x)
        p = roof_planarity(graph, emb_w, kind=kind).value
        trace.append((k, p, f))

    x0 = np.array([init_norm[vid][axis] for (vid, axis) in layout])
    f0, _ = objective(x0)
    record(0, x0, float(f0))
    res = minimize(objective, x0, max_iters=spec.max_iters, tol_grad=spec.tol_grad,
                   tol_energy=spec.tol_energy,
                   callback=lambda k, x, f, gi: record(k, x, f))
    emb_final = world_embedding(res.x)
    planarity = roof_planarity(graph, emb_final, kind=kind).value
    last = trace[-1]
    trace[-1] = (last[0], planarity, last[2])
    return SolveResult(embedding=emb_final, energy_trace=trace,
                       converged=res.converged, iterations=res.iterations,
                       wall_time=time.perf_counter() - t0, planarity=planarity)


def _norm_scale(graph: RoofGraph, emb: Embedding) -> float:
    pts = [emb[v][:2] for v in sorted(graph.outline_ids)]
    d = bbox_diagonal(pts)
    if d == 0.0:
        raise DegenerateGraph("outline has zero extent")
    return d


def optimize_primal(graph: RoofGraph, user2d: Embedding, spec: SolveSpec) -> SolveResult:
    """Planarize from user-annotated 2D positions: minimize planarity plus
    lam * squared distance of roof xy to the user's positions, outline fixed
    at z = 0, z of the fixed vertex eliminated to h."""
    if user2d.dim != 2:
        raise ValueError("optimize_primal wants a 2D user embedding")
    scale = _norm_scale(graph, user2d)
    h = _resolve_h(graph, user2d, spec)
    star = _resolve_fixed(graph, spec)
    init = {}
    user_xy = {}
    for v in graph.vertices:
        x, y = user2d[v.id][0] / scale, user2d[v.id][1] / scale
        if graph.is_outline(v.id):
            init[v.id] = [x, y, 0.0]
        else:
            init[v.id] = [x, y, h / scale]
            user_xy[v.id] = (x, y)
    layout = [(vid, axis) for vid in graph.roof_ids for axis in range(3)
              if not (vid == star and axis == 2)]
    wo = Embedding({vid: (user2d[vid][0], user2d[vid][1])
                    for vid in sorted(graph.outline_ids)})
    return _solve_core(graph, spec, world_outline=wo, init_norm=init,
                       layout=layout, scale=scale, h_world=h, star=star,
                       user_xy_norm=user_xy, lam=spec.lam)


def optimize_dual(dual: DualGraph, spec: SolveSpec) -> SolveResult:
    """Reconstruct from a dual graph alone: recover the primal, spectrally
    embed, lift to z = h, then minimize planarity + gamma * aesthetic."""
    graph = primal_from_dual(dual)
    outline2d = outline_embedding(dual)
    emb2d = spectral_embed_2d(graph, outline2d)
    scale = _norm_scale(graph, emb2d)
    h = _resolve_h(graph, emb2d, spec)
    star = _resolve_fixed(graph, spec)
    init = {}
    for v in graph.vertices:
        x, y = emb2d[v.id][0] / scale, emb2d[v.id][1] / scale
        init[v.id] = [x, y, 0.0 if graph.is_outline(v.id) else h / scale]
    norm2d = Embedding({vid: (c[0], c[1]) for vid, c in init.items()})
    classes = classify_roof_edges(graph, norm2d)
    terms = build_aesthetic_terms(graph, norm2d.lifted(0.0), classes)
    layout = [(vid, axis) for vid in graph.roof_ids for axis in range(3)
              if not (vid == star and axis == 2)]
    return _solve_core(graph, spec, world_outline=outline2d, init_norm=init,
                       layout=layout, scale=scale, h_world=h, star=star,
                       aes_terms=terms, gamma=spec.gamma)


def optimize_variable_heights(graph: RoofGraph, user2d: Embedding,
                              groups: dict[int, object], spec: SolveSpec) -> SolveResult:
    """Primal solve where labeled outline vertices may leave the ground
    plane: their z joins the variables (xy stays fixed) and each group's
    height variance is penalized with weight eta. The labels "fixed-zero"
    (stay pinned) and "free" (released, but no variance group) are reserved;
    every other label names one variance group."""
    if user2d.dim != 2:
        raise ValueError("optimize_variable_heights wants a 2D user embedding")
    for vid, label in groups.items():
        graph.vertex(vid)  # raises on unknown id
        if not graph.is_outline(vid):
            raise ValueError(f"height group label on non-outline vertex {vid}")
    released = {vid: label for vid, label in groups.items() if label != "fixed-zero"}
    var_groups = {vid: label for vid, label in released.items() if label != "free"}
    anchored = [vid for vid in graph.outline_ids if vid not in released]
    if not anchored:
        raise AllHeightsFree("every outline vertex is in a height group; no zero anchor remains")
    scale = _norm_scale(graph, user2d)
    h = _resolve_h(graph, user2d, spec)
    star = _resolve_fixed(graph, spec)
    init = {}
    user_xy = {}
    for v in graph.vertices:
        x, y = user2d[v.id][0] / scale, user2d[v.id][1] / scale
        if graph.is_outline(v.id):
            init[v.id] = [x, y, 0.0]
        else:
            init[v.id] = [x, y, h / scale]
            user_xy[v.id] = (x, y)
    layout = [(vid, axis) for vid in graph.roof_ids for axis in range(3)
              if not (vid == star and axis == 2)]
    layout += [(vid, 2) for vid in sorted(graph.outline_ids) if vid in released]
    wo = Embedding({vid: (user2d[vid][0], user2d[vid][1])
                    for vid in sorted(graph.outline_ids)})
    return _solve_core(graph, spec, world_outline=wo, init_norm=init,
                       layout=layout, scale=scale, h_world=h, star=star,
                       user_xy_norm=user_xy, lam=spec.lam,
                       groups=var_groups, eta=spec.eta)


# ---------------------------------------------------------------------------
# exact lifting


def lift_2d_to_3d(graph: RoofGraph, emb: Embedding, h: float) -> Embedding:
    """Lift a valid 2D embedding to 3D by solving the per-face plane system
    z_i = a_f x_i + b_f y_i + c_f (outline z = 0, z(x*) = h) in least
    squares, then rescaling z so z(x*) = h exactly."""
    if emb.dim != 2:
        raise ValueError("lift_2d_to_3d wants a 2D embedding")
    report = check_validity_2d(graph, emb, tol=1e-6)
    if not report.valid:
        raise InvalidInput2D("2D embedding fails the validity check; cannot lift")
    scale = _norm_scale(graph, emb)
    ids = sorted(v.id for v in graph.vertices)
    zcol = {vid: i for i, vid in enumerate(ids)}
    nv = len(ids)
    nfaces = len(graph.faces)
    ncols = nv + 3 * nfaces
    rows = []
    rhs = []
    for fi, face in enumerate(graph.faces):
        for vid in face:
            row = np.zeros(ncols)
            row[zcol[vid]] = 1.0
            base = nv + 3 * fi
            row[base] = -emb[vid][0] / scale
            row[base + 1] = -emb[vid][1] / scale
            row[base + 2] = -1.0
            rows.append(row)
            rhs.append(0.0)
    for vid in sorted(graph.outline_ids):
        row = np.zeros(ncols)
        row[zcol[vid]] = 1.0
        rows.append(row)
        rhs.append(0.0)
    star = default_fixed_vertex(graph)
    row = np.zeros(ncols)
    row[zcol[star]] = 1.0
    rows.append(row)
    rhs.append(h / scale)
    A = np.array(rows)
    b = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.abs(A @ sol - b).max())
    if residual > 1e-6:
        raise InconsistentSystem(
            f"lift system residual {residual:.3e}; the 2D embedding is not liftable")
    z = {vid: sol[zcol[vid]] * scale for vid in ids}
    zs = z[star]
    if h != 0.0:
        if abs(zs) < 1e-300:
            raise InconsistentSystem("fixed vertex's lifted height is zero; cannot rescale to h")
        f = h / zs
        z = {vid: zv * f for vid, zv in z.items()}
    z[star] = float(h)
    for vid in graph.outline_ids:
        z[vid] = 0.0
    return Embedding({vid: (emb[vid][0], emb[vid][1], z[vid]) for vid in ids})
