"""Differentiable energies over roof embeddings.

The planarity family scores one face's point set:

- smallest_eig: smallest eigenvalue of the 3x3 covariance (the production
  metric; analytic gradient).
- det: covariance determinant.
- proj: summed absolute distances to a plane through three sampled vertices
  (first, middle, last; best-fit fallback when nearly collinear).
- diag: summed distances between consecutive diagonal lines (needs >= 4
  points).

Alternative metrics get central-finite-difference gradients. The aesthetic
energy rewards ridge/bisector symmetry, the 2D validity energy penalizes
roof edges that settle in invalid positions, and the variance energy
regularizes grouped heights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen3 import smallest_eigenpair
from .errors import DegenerateEdge, TooFewPoints
from .graph import BISECTOR, RIDGE, Embedding, RoofGraph, classify_roof_edges

SMALLEST_EIG = "smallest_eig"
DET = "det"
PROJ = "proj"
DIAG = "diag"
VALIDITY2D = "validity2d"

METRIC_KINDS = (SMALLEST_EIG, DET, PROJ, DIAG, VALIDITY2D)
POINTWISE_KINDS = (SMALLEST_EIG, DET, PROJ, DIAG)

FD_STEP = 1e-6


@dataclass
class EnergyValue:
    """Scalar energy plus a sparse gradient keyed by vertex id (or point
    index for per-face calls). `flags` carries degenerate-case diagnostics."""

    value: float
    gradient: dict[int, tuple]
    flags: tuple = ()


def _covariance(pts: np.ndarray):
    mu = pts.mean(axis=0)
    centered = pts - mu
    cov = centered.T @ centered / len(pts)
    return mu, centered, cov


def _plane_of_face(pts: np.ndarray):
    """Unit normal + anchor for the proj metric's sampled plane."""
    m = len(pts)
    a, b, c = pts[0], pts[m // 2], pts[m - 1]
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n)
    scale = float(np.abs(pts - pts.mean(axis=0)).max()) or 1.0
    if nn < 1e-12 * scale * scale:
        # Sampled vertices nearly collinear: fall back to the best-fit plane.
        _, centered, _ = _covariance(pts)
        _, _, vt = np.linalg.svd(centered, full_matrices=True)
        return vt[-1], pts.mean(axis=0)
    return n / nn, a


def _value_smallest_eig(pts: np.ndarray) -> float:
    _, _, cov = _covariance(pts)
    val, _ = smallest_eigenpair(cov)
    return val


def _value_det(pts: np.ndarray) -> float:
    _, _, cov = _covariance(pts)
    return float(np.linalg.det(cov))


def _value_proj(pts: np.ndarray) -> float:
    normal, anchor = _plane_of_face(pts)
    return float(np.abs((pts - anchor) @ normal).sum())


def _value_diag(pts: np.ndarray) -> float:
    m = len(pts)
    total = 0.0
    for j in range(m - 3):
        p1, d1 = pts[j], pts[j + 2] - pts[j]
        p2, d2 = pts[j + 1], pts[j + 3] - pts[j + 1]
        n = np.cross(d1, d2)
        nn = np.linalg.norm(n)
        sc = np.linalg.norm(d1) * np.linalg.norm(d2)
        if sc == 0.0:
            continue  # coincident points: skip the degenerate diagonal pair
        if nn / sc < 1e-12:
            v = p2 - p1
            dd = d1 / np.linalg.norm(d1)
            total += float(np.linalg.norm(v - (v @ dd) * dd))
        else:
            total += float(abs((p2 - p1) @ n) / nn)
    return total


_VALUE_FN = {SMALLEST_EIG: _value_smallest_eig, DET: _value_det,
             PROJ: _value_proj, DIAG: _value_diag}


def _fd_gradient(value_fn, pts: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(pts)
    for i in range(pts.shape[0]):
        for c in range(pts.shape[1]):
            orig = pts[i, c]
            pts[i, c] = orig + FD_STEP
            up = value_fn(pts)
            pts[i, c] = orig - FD_STEP
            dn = value_fn(pts)
            pts[i, c] = orig
            grad[i, c] = (up - dn) / (2.0 * FD_STEP)
    return grad


def face_planarity(points, kind: str = SMALLEST_EIG) -> EnergyValue:
    """Planarity of one face's 3D point cycle. Gradient keys are point
    indices. smallest_eig gets the analytic eigen-gradient; the alternative
    metrics use central finite differences."""
    if kind == VALIDITY2D:
        raise ValueError("validity2d is a graph-level energy, not a per-face metric")
    if kind not in POINTWISE_KINDS:
        raise ValueError(f"unknown planarity kind {kind!r}")
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise TooFewPoints("face points must be an m x 3 array")
    m = len(pts)
    if m < 3 or (kind == DIAG and m < 4):
        raise TooFewPoints(f"{kind} needs at least {'4' if kind == DIAG else '3'} points, got {m}")
    if kind == SMALLEST_EIG:
        _, centered, cov = _covariance(pts)
        val, vec = smallest_eigenpair(cov)
        coeff = (2.0 / m) * (centered @ vec)
        grad = coeff[:, None] * vec[None, :]
        return EnergyValue(val, {i: tuple(grad[i]) for i in range(m)})
    fn = _VALUE_FN[kind]
    val = fn(pts)
    grad = _fd_gradient(fn, pts)
    return EnergyValue(float(val), {i: tuple(grad[i]) for i in range(m)})


def roof_planarity(graph: RoofGraph, emb: Embedding, kind: str = SMALLEST_EIG) -> EnergyValue:
    """Sum of face planarity over all faces with >= 4 vertices. Triangles are
    identically planar and skipped. Gradient keys are vertex ids."""
    if emb.dim != 3:
        raise ValueError("roof_planarity wants a 3D embedding")
    total = 0.0
    grad: dict[int, np.ndarray] = {}
    for face in graph.faces:
        if len(face) < 4:
            continue
        ev = face_planarity([emb[v] for v in face], kind=kind)
        total += ev.value
        for idx, vid in enumerate(face):
            g = np.asarray(ev.gradient[idx])
            if vid in grad:
                grad[vid] = grad[vid] + g
            else:
                grad[vid] = g
    return EnergyValue(total, {vid: tuple(g) for vid, g in grad.items()})


# ---------------------------------------------------------------------------
# aesthetic energy


def _unit(v):
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n == 0.0:
        raise DegenerateEdge("zero-length edge in aesthetic energy")
    return (v[0] / n, v[1] / n, v[2] / n)


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _point_to_line(p, a, b) -> float:
    d = _sub(b, a)
    dn = _unit(d)
    v = _sub(p, a)
    t = _dot(v, dn)
    w = (v[0] - t * dn[0], v[1] - t * dn[1], v[2] - t * dn[2])
    return math.sqrt(_dot(w, w))


def _as3(p):
    return p if len(p) == 3 else (p[0], p[1], 0.0)


def build_aesthetic_terms(graph: RoofGraph, emb: Embedding,
                          classes: dict[tuple[int, int], str] | None = None):
    """Precompute term descriptors so the energy can be re-evaluated cheaply
    as roof vertices move. Classification is fixed at call time."""
    if classes is None:
        classes = classify_roof_edges(graph, emb.project_xy())
    terms = []
    for (a, b), label in sorted(classes.items()):
        facelist = graph.faces_of_edge(a, b)
        if len(facelist) != 2:
            continue
        if label == BISECTOR:
            w = None
            for cand in (a, b):
                if not graph.is_outline(cand):
                    continue
                own1 = [e for e in graph.face_outline_edges(facelist[0]) if cand in e]
                own2 = [e for e in graph.face_outline_edges(facelist[1]) if cand in e]
                if own1 and own2:
                    w = cand
                    u1 = min(x for e in own1 for x in e if x != cand)
                    u2 = min(x for e in own2 for x in e if x != cand)
                    break
            if w is None:
                continue
            o = b if w == a else a
            terms.append(("bis", o, w, u1, u2))
        elif label == RIDGE:
            mids = []
            pa, pb = _as3(emb[a]), _as3(emb[b])
            de = _sub(pb, pa)
            for f in facelist:
                best = None
                for (u, v) in graph.face_outline_edges(f):
                    pu, pv = _as3(emb[u]), _as3(emb[v])
                    du = _sub(pv, pu)
                    cx = (de[1] * du[2] - de[2] * du[1],
                          de[2] * du[0] - de[0] * du[2],
                          de[0] * du[1] - de[1] * du[0])
                    sin2 = _dot(cx, cx) / max(_dot(de, de) * _dot(du, du), 1e-300)
                    key = (sin2, u, v)
                    if best is None or key < best[0]:
                        best = (key, ((pu[0] + pv[0]) / 2, (pu[1] + pv[1]) / 2,
                                      (pu[2] + pv[2]) / 2))
                mids.append(best[1])
            terms.append(("rid", a, b, mids[0], mids[1]))
    return terms


def _aesthetic_term_value(term, coords) -> float:
    if term[0] == "bis":
        _, o, w, u1, u2 = term
        e = _unit(_sub(coords[o], coords[w]))
        e1 = _unit(_sub(coords[u1], coords[w]))
        e2 = _unit(_sub(coords[u2], coords[w]))
        d = _dot(e, e1) - _dot(e, e2)
        return d * d
    _, a, b, m1, m2 = term
    d1 = _point_to_line(m1, coords[a], coords[b])
    d2 = _point_to_line(m2, coords[a], coords[b])
    return (d1 - d2) ** 2


def aesthetic_energy(graph: RoofGraph, emb: Embedding,
                     classes: dict[tuple[int, int], str] | None = None,
                     terms=None) -> EnergyValue:
    """Ridge/bisector symmetry energy. Bisector edges should make equal
    angles with the two outline edges at their shared outline vertex; ridge
    edges should keep equal line distances to both faces' outline edges.
    Gradient (central differences) covers roof vertices only; the outline is
    fixed in every mode that uses this energy."""
    if terms is None:
        terms = build_aesthetic_terms(graph, emb, classes)
    coords = {vid: _as3(emb[vid]) for vid in emb.coords}
    total = sum(_aesthetic_term_value(t, coords) for t in terms)

    by_vertex: dict[int, list] = {}
    roof = set(graph.roof_ids)
    for t in terms:
        # For bisector terms only the free endpoint o can be a roof vertex.
        for vid in (t[1], t[2]) if t[0] == "rid" else (t[1],):
            if vid in roof:
                by_vertex.setdefault(vid, []).append(t)
    grad: dict[int, tuple] = {}
    for vid, vterms in by_vertex.items():
        g = [0.0, 0.0, 0.0]
        base = coords[vid]
        for c in range(3):
            p = list(base)
            p[c] = base[c] + FD_STEP
            coords[vid] = tuple(p)
            up = sum(_aesthetic_term_value(t, coords) for t in vterms)
            p[c] = base[c] - FD_STEP
            coords[vid] = tuple(p)
            dn = sum(_aesthetic_term_value(t, coords) for t in vterms)
            coords[vid] = base
            g[c] = (up - dn) / (2.0 * FD_STEP)
        grad[vid] = tuple(g)
    return EnergyValue(float(total), grad)


# ---------------------------------------------------------------------------
# 2D validity energy


def _vad_terms(graph: RoofGraph, emb2d: Embedding):
    from .geometry import PARALLEL_TOL_RAD, angle_between_lines, segment_intersection_point

    cyc = graph.outline_cycle(emb2d)
    edge_index = {}
    for i in range(len(cyc)):
        a, b = cyc[i], cyc[(i + 1) % len(cyc)]
        edge_index[(a, b) if a < b else (b, a)] = i
    opts = [emb2d[v][:2] for v in graph.outline_ids]
    span = max(max(p[0] for p in opts) - min(p[0] for p in opts),
               max(p[1] for p in opts) - min(p[1] for p in opts)) or 1.0
    coincide_tol = 1e-9 * span
    terms = []
    for (a, b) in graph.roof_edges():
        facelist = graph.faces_of_edge(a, b)
        if len(facelist) != 2:
            continue
        own1 = min(graph.face_outline_edges(facelist[0]), key=lambda e: edge_index[e])
        own2 = min(graph.face_outline_edges(facelist[1]), key=lambda e: edge_index[e])
        u1, u2 = (emb2d[v][:2] for v in own1)
        w1, w2 = (emb2d[v][:2] for v in own2)
        d1 = (u2[0] - u1[0], u2[1] - u1[1])
        d2 = (w2[0] - w1[0], w2[1] - w1[1])
        if angle_between_lines(d1, d2) < PARALLEL_TOL_RAD:
            terms.append(("par", a, b, d1))
        else:
            shared = set(own1) & set(own2)
            if shared:
                x = emb2d[next(iter(shared))][:2]
            else:
                x = segment_intersection_point(u1, u2, w1, w2)
            # An edge whose fixed outline endpoint sits at the concurrency
            # point passes through it for every roof position: no term.
            if any(graph.is_outline(v)
                   and math.hypot(emb2d[v][0] - x[0], emb2d[v][1] - x[1]) <= coincide_tol
                   for v in (a, b)):
                continue
            terms.append(("int", a, b, x))
    return terms


def _vad_value(term, coords) -> tuple[float, bool]:
    kind = term[0]
    a, b = term[1], term[2]
    pa, pb = coords[a], coords[b]
    if kind == "par":
        d = term[3]
        ex, ey = pb[0] - pa[0], pb[1] - pa[1]
        en = math.hypot(ex, ey)
        dn = math.hypot(d[0], d[1])
        if en == 0.0 or dn == 0.0:
            return 1.0, True
        c = (ex * d[0] + ey * d[1]) / (en * dn)
        return 1.0 - c * c, False
    x = term[3]
    v1 = (pa[0] - x[0], pa[1] - x[1])
    v2 = (pb[0] - x[0], pb[1] - x[1])
    n1 = math.hypot(*v1)
    n2 = math.hypot(*v2)
    if n1 == 0.0 or n2 == 0.0:
        return 1.0, True
    c = (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)
    return 1.0 - c * c, False


def validity_energy_2d(graph: RoofGraph, emb2d: Embedding) -> EnergyValue:
    """Sum of per-edge 2D validity penalties: 1 - cos^2 of the angle the roof
    edge makes with its required direction (outline-parallel, or through the
    outline edges' intersection point). Zero exactly when the embedding is
    Remark-valid at zero tolerance. Degenerate edges contribute 1, flagged."""
    if emb2d.dim != 2:
        raise ValueError("validity_energy_2d wants a 2D embedding")
    terms = _vad_terms(graph, emb2d)
    coords = {vid: emb2d[vid] for vid in emb2d.coords}
    total = 0.0
    flags = []
    roof = set(graph.roof_ids)
    by_vertex: dict[int, list] = {}
    for t in terms:
        v, degenerate = _vad_value(t, coords)
        total += v
        if degenerate:
            flags.append(((t[1], t[2]), "degenerate"))
        for vid in (t[1], t[2]):
            if vid in roof:
                by_vertex.setdefault(vid, []).append(t)
    grad: dict[int, tuple] = {}
    for vid, vterms in by_vertex.items():
        g = [0.0, 0.0]
        base = coords[vid]
        for c in range(2):
            p = list(base)
            p[c] = base[c] + FD_STEP
            coords[vid] = tuple(p)
            up = sum(_vad_value(t, coords)[0] for t in vterms)
            p[c] = base[c] - FD_STEP
            coords[vid] = tuple(p)
            dn = sum(_vad_value(t, coords)[0] for t in vterms)
            coords[vid] = base
            g[c] = (up - dn) / (2.0 * FD_STEP)
        grad[vid] = tuple(g)
    return EnergyValue(float(total), grad, flags=tuple(flags))


# ---------------------------------------------------------------------------
# grouped-height variance


def variance_energy(values) -> EnergyValue:
    """Population variance of a list of heights; gradient keys are list
    indices: d/dz_i = 2 (z_i - mean) / m."""
    z = [float(v) for v in values]
    m = len(z)
    if m == 0:
        return EnergyValue(0.0, {})
    mean = sum(z) / m
    val = sum((x - mean) ** 2 for x in z) / m
    grad = {i: (2.0 * (z[i] - mean) / m,) for i in range(m)}
    return EnergyValue(val, grad)
