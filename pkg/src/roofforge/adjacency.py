"""Resolution of ambiguous face-adjacency probabilities into realizable
dual-graph adjacency matrices.

Two ambiguity families: adjacencies whose dual segment leaves the outline
(removed outright, first), and pairs of dual segments that properly cross
(resolved by probability, or enumerated by the sampling strategy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyAdjacency
from .geometry import segments_properly_intersect
from .graph import exterior_test

MAX_BRANCHES = 1 << 16


@dataclass(frozen=True)
class AdjacencyCandidate:
    """One resolved adjacency: binary matrix, log-space score (sum of kept
    pair log-probabilities), and the conflict decisions that produced it."""

    adjacency: np.ndarray
    score: float
    provenance: tuple

    def pairs(self) -> list[tuple[int, int]]:
        n = self.adjacency.shape[0]
        return [(i, j) for i in range(n) for j in range(i + 1, n)
                if self.adjacency[i, j]]


class CandidateSet(list):
    """Score-ordered candidates; .truncated marks a capped enumeration."""

    truncated: bool = False


def _validate(outline2d, prob) -> np.ndarray:
    p = np.asarray(prob, dtype=float)
    n = len(outline2d)
    if p.shape != (n, n):
        raise ValueError(f"probability matrix must be {n}x{n}, got {p.shape}")
    if not np.allclose(p, p.T):
        raise ValueError("probability matrix must be symmetric")
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def _mids(outline2d) -> np.ndarray:
    pts = np.asarray(outline2d, dtype=float)
    return (pts + np.roll(pts, -1, axis=0)) / 2.0


def _conflicts(pairs, mids) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    out = []
    ps = sorted(pairs)
    for a in range(len(ps)):
        i, j = ps[a]
        for b in range(a + 1, len(ps)):
            k, l = ps[b]
            if {i, j} & {k, l}:
                continue  # a shared endpoint is an existing node, not a crossing
            if segments_properly_intersect(mids[i], mids[j], mids[k], mids[l]):
                out.append((ps[a], ps[b]))
    return out


def _order_conflicts(conflicts, p):
    """Deterministic resolution order: descending max probability, then the
    pair indices themselves."""
    return sorted(conflicts,
                  key=lambda c: (-max(p[c[0]], p[c[1]]), c[0], c[1]))


def _keep_drop(e1, e2, p):
    """Between two crossing pairs keep the higher probability; exact ties
    keep the lexicographically smaller pair."""
    p1, p2 = p[e1], p[e2]
    if p1 > p2 or (p1 == p2 and e1 < e2):
        return e1, e2
    return e2, e1


def _base_pairs(outline2d, p, threshold):
    n = len(outline2d)
    kept = {(i, j) for i in range(n) for j in range(i + 1, n)
            if p[i, j] > threshold}
    if not kept:
        raise EmptyAdjacency(f"no adjacency probability above {threshold}")
    provenance = []
    for (i, j) in sorted(kept):
        if not (exterior_test(outline2d, i, j) and exterior_test(outline2d, j, i)):
            kept.discard((i, j))
            provenance.append(("exterior", (i, j)))
    if not kept:
        raise EmptyAdjacency("all adjacencies above threshold are exterior")
    return kept, provenance


def _score(pairs, p) -> float:
    return float(sum(math.log(p[e]) for e in pairs))


def _matrix(pairs, n) -> np.ndarray:
    a = np.zeros((n, n), dtype=np.int8)
    for (i, j) in pairs:
        a[i, j] = a[j, i] = 1
    return a


def resolve_greedy(outline2d, prob, threshold: float = 0.5) -> AdjacencyCandidate:
    """Threshold, drop exterior adjacencies, then repeatedly resolve the
    highest-confidence crossing by keeping its higher-probability pair."""
    p = _validate(outline2d, prob)
    mids = _mids(outline2d)
    kept, provenance = _base_pairs(outline2d, p, threshold)
    pmap = {e: p[e] for e in kept}
    while True:
        conflicts = _order_conflicts(_conflicts(kept, mids), pmap)
        if not conflicts:
            break
        e1, e2 = conflicts[0]
        keep, drop = _keep_drop(e1, e2, pmap)
        kept.discard(drop)
        provenance.append(("crossing", keep, drop))
    return AdjacencyCandidate(_matrix(kept, len(outline2d)), _score(kept, pmap),
                              tuple(provenance))


def resolve_sampling(outline2d, prob, threshold: float = 0.5,
                     max_candidates: int = 64) -> CandidateSet:
    """Enumerate both resolutions of every crossing conflict (depth-first,
    greedy branch first), dedupe, and return candidates sorted by descending
    score. Enumeration is capped at 2^16 explored states; the result is then
    flagged truncated. The greedy result is always present."""
    p = _validate(outline2d, prob)
    mids = _mids(outline2d)
    base, provenance0 = _base_pairs(outline2d, p, threshold)
    pmap = {e: p[e] for e in base}
    seen: set[frozenset] = set()
    final: dict[frozenset, tuple] = {}
    truncated = False
    stack = [(frozenset(base), tuple(provenance0))]
    explored = 0
    while stack:
        state, prov = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        explored += 1
        if explored > MAX_BRANCHES:
            truncated = True
            break
        conflicts = _order_conflicts(_conflicts(state, mids), pmap)
        if not conflicts:
            if state not in final:
                final[state] = prov
            continue
        e1, e2 = conflicts[0]
        keep, drop = _keep_drop(e1, e2, pmap)
        # Push the non-greedy branch first so the greedy branch pops first.
        stack.append((state - {keep}, prov + (("crossing", drop, keep),)))
        stack.append((state - {drop}, prov + (("crossing", keep, drop),)))
    n = len(outline2d)
    cands = [AdjacencyCandidate(_matrix(s, n), _score(s, pmap), prov)
             for s, prov in final.items()]
    cands.sort(key=lambda c: (-c.score, c.pairs()))
    out = CandidateSet(cands[:max_candidates])
    out.truncated = truncated or len(cands) > max_candidates
    return out
