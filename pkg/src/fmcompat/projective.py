"""Projective primitives for P^2 and P^3.

Points and cameras are plain numpy arrays. A *canonical* representative has
unit Euclidean (Frobenius) norm and its entry of largest magnitude positive,
with ties going to the lowest flat index.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    DegenerateFrame,
    LinesIdentical,
    NoUniqueSolution,
    RankMismatch,
    ZeroInput,
)

ZERO_NORM = 1e-300

# Marker for a camera_from_constraints target meaning "this world point is the center".
ZERO = None


@dataclass(frozen=True)
class Tolerances:
    tol_rank: float = 1e-9
    tol_equal: float = 1e-8
    tol_compat: float = 1e-8
    tol_classify: float = 1e-6

    def __post_init__(self):
        for name in ("tol_rank", "tol_equal", "tol_compat", "tol_classify"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.tol_classify < self.tol_equal:
            raise ValueError("tol_classify must be >= tol_equal")


DEFAULT_TOL = Tolerances()


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > ZERO_NORM:
        raise ZeroInput("cannot normalize a zero vector or matrix")
    w = v / n
    if w.ravel()[np.argmax(np.abs(w.ravel()))] < 0:
        w = -w
    return w


def sin_angle(u, v):
    """Sine of the angle between the lines spanned by u and v (any shapes, flattened)."""
    a = np.asarray(u, dtype=float).ravel()
    b = np.asarray(v, dtype=float).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if not (na > ZERO_NORM and nb > ZERO_NORM):
        raise ZeroInput("sin_angle of a zero vector")
    a = a / na
    b = b / nb
    # stable for small angles, unlike sqrt(1 - cos^2)
    return float(min(1.0, np.linalg.norm(a - np.dot(a, b) * b)))


def proj_equal(u, v, tol=DEFAULT_TOL.tol_equal):
    """Projective equality test; returns ``(flag, scale)`` with ``u ~ scale * v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    nu, nv = normalize(u).ravel(), normalize(v).ravel()
    dist = min(np.linalg.norm(nu - nv), np.linalg.norm(nu + nv))
    scale = float(np.dot(u.ravel(), v.ravel()) / np.dot(v.ravel(), v.ravel()))
    return bool(dist <= tol), scale


def skew(t):
    t = np.asarray(t, dtype=float)
    return np.array([
        [0.0, -t[2], t[1]],
        [t[2], 0.0, -t[0]],
        [-t[1], t[0], 0.0],
    ])


def numerical_rank(M, tol=DEFAULT_TOL.tol_rank):
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s[0] <= ZERO_NORM:
        return 0
    return int(np.sum(s > tol * s[0]))


def right_nullvector(M, expected_rank, tol=DEFAULT_TOL.tol_rank):
    M = np.asarray(M, dtype=float)
    if np.linalg.norm(M) <= ZERO_NORM:
        raise ZeroInput("nullvector of a zero matrix")
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > tol * s[0]))
    if rank != expected_rank:
        raise RankMismatch(f"expected rank {expected_rank}, got {rank} (singular values {s})")
    return normalize(vt[-1])


def as_camera(P, tol=DEFAULT_TOL.tol_rank):
    """Validate a 3x4 full-rank matrix and return its canonical representative."""
    P = np.asarray(P, dtype=float)
    if P.shape != (3, 4):
        raise ValueError(f"camera must be 3x4, got {P.shape}")
    if numerical_rank(P, tol) != 3:
        raise RankMismatch("camera matrix is not full rank")
    return normalize(P)


def camera_center(P, tol=DEFAULT_TOL.tol_rank):
    P = np.asarray(P, dtype=float)
    if P.shape != (3, 4):
        raise ValueError(f"camera must be 3x4, got {P.shape}")
    return right_nullvector(P, 3, tol)


def collinearity_defect(points):
    """Smallest singular value of the stacked (unit) points; zero iff collinear."""
    pts = np.array([normalize(p) for p in points])
    if len(pts) < 3:
        return 0.0
    return float(np.linalg.svd(pts, compute_uv=False)[-1])


def frame_defect(points):
    """Worst |det| over all (d)-subsets of unit points in R^d; > 0 iff they form a frame."""
    pts = np.array([normalize(p) for p in points])
    d = pts.shape[1]
    if len(pts) < d:
        return 0.0
    return float(min(abs(np.linalg.det(pts[list(c)])) for c in combinations(range(len(pts)), d)))


@dataclass(frozen=True, eq=False)
class Line3:
    """Projective line of P^3 spanned by two distinct points."""

    base: np.ndarray
    direction_point: np.ndarray

    def __post_init__(self):
        b = normalize(self.base)
        d = normalize(self.direction_point)
        if b.shape != (4,) or d.shape != (4,):
            raise ValueError("Line3 generators must be points of P^3")
        if sin_angle(b, d) <= DEFAULT_TOL.tol_equal:
            raise LinesIdentical("line generators coincide")
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "direction_point", d)

    def basis(self):
        """Orthonormal 2x4 basis of the spanned plane in R^4."""
        _, _, vt = np.linalg.svd(np.vstack([self.base, self.direction_point]))
        return vt[:2]

    def complement(self):
        """Orthonormal 2x4 basis of the orthogonal complement; annihilates the line."""
        _, _, vt = np.linalg.svd(np.vstack([self.base, self.direction_point]))
        return vt[2:]

    def distance(self, z):
        """Euclidean distance from unit(z) to the 2-plane of the line."""
        return float(np.linalg.norm(self.complement() @ normalize(z)))

    def point(self, mu0, mu1):
        return mu0 * self.base + mu1 * self.direction_point


def lines_coincide(a: Line3, b: Line3, tol=DEFAULT_TOL.tol_equal):
    # largest principal-angle sine between the two 2-planes
    return np.linalg.norm(a.complement() @ b.basis().T, 2) <= tol


def back_projected_line(C, x):
    C = as_camera(C)
    center = camera_center(C)
    return Line3(center, np.linalg.pinv(C) @ normalize(x))


def meet_lines(lines, tol=DEFAULT_TOL.tol_equal):
    """Least-squares common point of 2 or more lines of P^3.

    Returns ``(point, residual)``; the residual is the smallest singular value of
    the stacked incidence constraints and vanishes iff the lines share a point.
    """
    lines = list(lines)
    if len(lines) < 2:
        raise ValueError("need at least two lines")
    for a, b in combinations(lines, 2):
        if lines_coincide(a, b, tol):
            raise LinesIdentical("two input lines coincide")
    A = np.vstack([ln.complement() for ln in lines])
    _, s, vt = np.linalg.svd(A)
    s = np.concatenate([s, np.zeros(4 - len(s))]) if len(s) < 4 else s
    return normalize(vt[-1]), float(s[-1])


def meet_image_lines(lines):
    """Least-squares common point of lines in P^2, as ``(point, residual)``."""
    A = np.array([normalize(ln) for ln in lines])
    _, s, vt = np.linalg.svd(A)
    s = np.concatenate([s, np.zeros(3 - len(s))]) if len(s) < 3 else s
    return normalize(vt[-1]), float(s[-1])


def _correspondence_rows(w, x):
    # two strongest rows of skew(x) @ C @ w = 0, linear in vec(C) (row-major)
    S = skew(x)
    order = np.argsort(-np.linalg.norm(S, axis=1), kind="stable")[:2]
    return [np.kron(S[r], w) for r in sorted(order)]


def camera_from_constraints(constraints, tol=DEFAULT_TOL.tol_rank, frame_tol=1e-9):
    """Solve for the 3x4 camera meeting point constraints.

    ``constraints`` is a sequence of ``(world, image)`` pairs where ``image`` is
    a point of P^2 or :data:`ZERO` (the world point is the camera center).
    Exactly one ZERO constraint is required. With five constraints the world
    points must form a projective frame of P^3 and the four image targets a
    frame of P^2; additional constraints are allowed and must be consistent.
    """
    constraints = list(constraints)
    zeros = [w for w, x in constraints if x is ZERO]
    if len(zeros) != 1:
        raise DegenerateFrame(f"exactly one ZERO constraint required, got {len(zeros)}")
    worlds = [normalize(w) for w, _ in constraints]
    images = [normalize(x) for _, x in constraints if x is not ZERO]
    if len(constraints) < 5:
        raise DegenerateFrame("at least five constraints are needed")
    if len(constraints) == 5:
        if frame_defect(worlds) <= frame_tol:
            raise DegenerateFrame("world points do not form a projective frame of P^3")
        if frame_defect(images) <= frame_tol:
            raise DegenerateFrame("image targets do not form a projective frame of P^2")
    elif np.linalg.svd(np.array(worlds), compute_uv=False)[3] <= frame_tol:
        raise DegenerateFrame("world points do not span P^3")

    rows = []
    for (w, x), wn in zip(constraints, worlds):
        if x is ZERO:
            rows.extend(np.kron(np.eye(3)[r], wn) for r in range(3))
        else:
            rows.extend(_correspondence_rows(wn, normalize(x)))
    A = np.array(rows)
    _, s, vt = np.linalg.svd(A)
    s = np.concatenate([s, np.zeros(12 - len(s))]) if len(s) < 12 else s
    nullity = int(np.sum(s <= tol * s[0]))
    if nullity != 1:
        raise NoUniqueSolution(f"constraint system has nullity {nullity}")
    C = vt[-1].reshape(3, 4)
    if numerical_rank(C, tol) != 3:
        raise NoUniqueSolution("constraints only admit a rank-deficient camera")
    return normalize(C)


def constraint_residual(C, world, image):
    """Sine-angle residual of one constraint; for ZERO targets, |C w| / (|C| |w|)."""
    y = np.asarray(C, dtype=float) @ normalize(world)
    if image is ZERO:
        return float(np.linalg.norm(y) / np.linalg.norm(C))
    return sin_angle(y, image)
