"""Closed-form eigensolver for symmetric 3x3 matrices.

Eigenvalues come from the trigonometric (Cardano) solution of the
characteristic cubic, which is branch-predictable and avoids pulling a general
eigensolver into the per-face inner loop. If the solve looks numerically off
(residual check fails), we fall back to numpy's Householder-based `eigh`.

The smallest eigenpair is what the planarity energy needs. When the two
smallest eigenvalues are (near-)equal the eigenvector is not unique; we return
a deterministic representative: among candidate unit vectors the one with the
lexicographically largest absolute component pattern, sign fixed so the first
component of largest magnitude is positive.
"""

from __future__ import annotations

import math

import numpy as np

# Gap below which the two smallest eigenvalues count as a multiple eigenvalue.
MULTIPLICITY_GAP = 1e-12


def eigvals_sym3(m: np.ndarray) -> tuple[float, float, float]:
    """Eigenvalues of a symmetric 3x3 matrix, ascending."""
    a00, a01, a02 = m[0, 0], m[0, 1], m[0, 2]
    a11, a12, a22 = m[1, 1], m[1, 2], m[2, 2]
    p1 = a01 * a01 + a02 * a02 + a12 * a12
    q = (a00 + a11 + a22) / 3.0
    if p1 == 0.0:
        vals = sorted((float(a00), float(a11), float(a22)))
        return vals[0], vals[1], vals[2]
    p2 = (a00 - q) ** 2 + (a11 - q) ** 2 + (a22 - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    # B = (1/p)(A - qI); det(B)/2 drives the cubic's trigonometric branch.
    b00, b11, b22 = (a00 - q) / p, (a11 - q) / p, (a22 - q) / p
    b01, b02, b12 = a01 / p, a02 / p, a12 / p
    detb = (
        b00 * (b11 * b22 - b12 * b12)
        - b01 * (b01 * b22 - b12 * b02)
        + b02 * (b01 * b12 - b11 * b02)
    )
    r = detb / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    e3 = q + 2.0 * p * math.cos(phi)
    e1 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return float(e1), float(e2), float(e3)


def _eigvec_for(m: np.ndarray, lam: float) -> np.ndarray | None:
    """Unit null vector of (m - lam I) via the most independent row pair."""
    shifted = m - lam * np.eye(3)
    rows = [shifted[0], shifted[1], shifted[2]]
    best = None
    best_norm = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            v = np.cross(rows[i], rows[j])
            n = float(np.linalg.norm(v))
            if n > best_norm:
                best_norm = n
                best = v / n
    scale = float(np.abs(shifted).max())
    if best is None or best_norm <= 1e-14 * max(1.0, scale * scale):
        return None
    return best


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v)))
    if v[idx] < 0:
        return -v
    return v


def smallest_eigenpair(m: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector of a symmetric 3x3 matrix.

    Deterministic under eigenvalue multiplicity: candidates are compared by
    their absolute component tuples and the lexicographically largest wins.
    """
    m = np.asarray(m, dtype=float)
    e1, e2, e3 = eigvals_sym3(m)

    scale = max(1.0, float(np.abs(m).max()))
    if e2 - e1 < MULTIPLICITY_GAP * scale:
        # Multiple smallest eigenvalue: the whole eigenplane is valid. Take
        # the two numpy eigenvectors spanning it plus axis projections and
        # pick the deterministic representative.
        w, v = np.linalg.eigh(m)
        candidates = [v[:, 0], v[:, 1]]
        best = None
        best_key = None
        for c in candidates:
            c = _canonical_sign(c / np.linalg.norm(c))
            key = tuple(np.round(np.abs(c), 12))
            if best_key is None or key > best_key:
                best_key = key
                best = c
        return float(w[0]), best

    vec = _eigvec_for(m, e1)
    if vec is None:
        # Cardano roots too coarse for the cross-product null space: use the
        # Householder route.
        w, v = np.linalg.eigh(m)
        return float(w[0]), _canonical_sign(v[:, 0])

    # Residual sanity check on the closed-form value.
    res = float(np.linalg.norm(m @ vec - e1 * vec))
    if res > 1e-8 * scale:
        w, v = np.linalg.eigh(m)
        return float(w[0]), _canonical_sign(v[:, 0])
    return e1, _canonical_sign(vec)
