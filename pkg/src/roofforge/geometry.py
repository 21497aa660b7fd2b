"""Small 2D/3D geometric primitives shared across modules.

All functions take plain sequences or numpy arrays; nothing here knows about
roof graphs. Angles are radians. Parallelism tolerances are the caller's
business and passed explicitly where they matter.
"""

from __future__ import annotations

import math

import numpy as np

# Angle below which two directions count as parallel in validity checks.
PARALLEL_TOL_RAD = 1e-7


def cross2(o, a, b) -> float:
    """Signed area*2 of triangle (o, a, b); >0 when a->b turns left."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def polygon_area(points) -> float:
    """Signed area, positive for counter-clockwise order."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def is_ccw(points) -> bool:
    return polygon_area(points) > 0.0


def bbox_diagonal(points) -> float:
    pts = np.asarray(points, dtype=float)
    span = pts.max(axis=0) - pts.min(axis=0)
    return float(np.hypot(*span[:2])) if pts.shape[1] == 2 else float(np.linalg.norm(span))


def segments_properly_intersect(p1, p2, q1, q2) -> bool:
    """True when open segments (p1,p2) and (q1,q2) cross at a single interior
    point. Shared endpoints and touches do not count."""
    d1 = cross2(q1, q2, p1)
    d2 = cross2(q1, q2, p2)
    d3 = cross2(p1, p2, q1)
    d4 = cross2(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and \
        d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def segment_intersection_point(p1, p2, q1, q2):
    """Intersection point of the two supporting lines, or None if parallel."""
    r = (p2[0] - p1[0], p2[1] - p1[1])
    s = (q2[0] - q1[0], q2[1] - q1[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if denom == 0.0:
        return None
    t = ((q1[0] - p1[0]) * s[1] - (q1[1] - p1[1]) * s[0]) / denom
    return (p1[0] + t * r[0], p1[1] + t * r[1])


def line_angle(d) -> float:
    """Direction angle folded to [0, pi) so opposite vectors coincide."""
    a = math.atan2(d[1], d[0])
    if a < 0:
        a += math.pi
    if a >= math.pi:
        a -= math.pi
    return a


def angle_between_lines(d1, d2) -> float:
    """Unsigned angle in [0, pi/2] between two direction vectors seen as lines."""
    n1 = math.hypot(d1[0], d1[1])
    n2 = math.hypot(d2[0], d2[1])
    if n1 == 0.0 or n2 == 0.0:
        return math.pi / 2
    c = abs(d1[0] * d2[0] + d1[1] * d2[1]) / (n1 * n2)
    return math.acos(min(1.0, c))


def point_line_distance_2d(p, a, b) -> float:
    """Distance from p to the line through a, b."""
    num = abs(cross2(a, b, p))
    den = math.hypot(b[0] - a[0], b[1] - a[1])
    if den == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    return num / den


def point_line_distance_3d(p, a, d) -> float:
    """Distance from 3D point p to the line through a with direction d."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    nd = np.linalg.norm(d)
    if nd == 0.0:
        return float(np.linalg.norm(p - a))
    v = p - a
    return float(np.linalg.norm(v - (v @ d) / (nd * nd) * d))


def line_line_distance_3d(p1, d1, p2, d2) -> float:
    """Distance between two 3D lines (points p, directions d)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    n = np.cross(d1, d2)
    nn = np.linalg.norm(n)
    scale = max(np.linalg.norm(d1) * np.linalg.norm(d2), 1e-300)
    if nn / scale < 1e-12:
        return point_line_distance_3d(p2, p1, d1)
    return float(abs((p2 - p1) @ n) / nn)


def polygon_is_simple(points) -> bool:
    """True when no two non-adjacent edges intersect and no edge degenerates."""
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)
    if n < 3:
        return False
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        if a1 == a2:
            return False
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = pts[j], pts[(j + 1) % n]
            if segments_properly_intersect(a1, a2, b1, b2):
                return False
            # Non-adjacent edges may not touch at all.
            if _on_segment(a1, a2, b1) or _on_segment(a1, a2, b2) or \
                    _on_segment(b1, b2, a1) or _on_segment(b1, b2, a2):
                return False
    return True


def _on_segment(a, b, p) -> bool:
    if cross2(a, b, p) != 0.0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and \
        min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def point_in_polygon(p, points) -> bool:
    """Even-odd rule; boundary points count as inside."""
    pts = [tuple(map(float, q)) for q in points]
    n = len(pts)
    x, y = float(p[0]), float(p[1])
    inside = False
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        if _on_segment(a, b, (x, y)):
            return True
        if (a[1] > y) != (b[1] > y):
            xi = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x < xi:
                inside = not inside
    return inside


def direction_in_ccw_wedge(d, start, end) -> bool:
    """True when direction d lies in the closed wedge swept counter-clockwise
    from direction `start` to direction `end`."""
    ts = math.atan2(start[1], start[0])
    te = math.atan2(end[1], end[0])
    td = math.atan2(d[1], d[0])
    sweep = (te - ts) % (2 * math.pi)
    pos = (td - ts) % (2 * math.pi)
    eps = 1e-12
    if sweep == 0.0:
        sweep = 2 * math.pi  # full turn: start == end means everything
    return pos <= sweep + eps
