"""Fundamental matrices, fundamental sets, epipoles and epipolar numbers.

Views are numbered from 1. A :class:`FundamentalSet` stores one canonical
representative per unordered pair ``i < j``; ``F(j, i)`` is the exact
transpose of ``F(i, j)``, so every epipolar number is evaluated against a
single shared representative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    CentersCoincide,
    DegenerateLine,
    MissingAuxiliary,
    MissingPair,
    NotRankTwo,
    RankMismatch,
    SingularTransform,
)
from .projective import (
    DEFAULT_TOL,
    as_camera,
    camera_center,
    normalize,
    right_nullvector,
    sin_angle,
    skew,
)

AUX = 5  # view index reserved for the auxiliary points e_i^5


@dataclass(frozen=True, eq=False)
class FundamentalMatrix:
    matrix: np.ndarray
    left_epipole: np.ndarray
    right_epipole: np.ndarray

    @property
    def T(self) -> "FundamentalMatrix":
        return FundamentalMatrix(self.matrix.T, self.right_epipole, self.left_epipole)


def fundamental_matrix(M, tol=DEFAULT_TOL.tol_rank) -> FundamentalMatrix:
    """Canonicalize a raw 3x3 matrix, checking rank 2 and extracting both epipoles."""
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"fundamental matrix must be 3x3, got {M.shape}")
    try:
        F = normalize(M)
        right = right_nullvector(F, 2, tol)
        left = right_nullvector(F.T, 2, tol)
    except (RankMismatch, ValueError) as exc:
        raise NotRankTwo(str(exc)) from None
    return FundamentalMatrix(F, left, right)


_MINOR_ROWS = [[1, 2], [0, 2], [0, 1]]


def psi_raw(P1, P2):
    """Bilinear coefficient matrix of det[[P1, x, 0], [P2, 0, y]], unnormalized.

    Entry (a, b) is (-1)^(a+b) times the 4x4 minor formed by the rows of P1
    other than a and the rows of P2 other than b.
    """
    P1 = np.asarray(P1, dtype=float)
    P2 = np.asarray(P2, dtype=float)
    blocks = np.empty((3, 3, 4, 4))
    for a in range(3):
        for b in range(3):
            blocks[a, b, :2] = P1[_MINOR_ROWS[a]]
            blocks[a, b, 2:] = P2[_MINOR_ROWS[b]]
    sign = np.array([[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, 1.0]])
    return sign * np.linalg.det(blocks)


def psi(P1, P2) -> FundamentalMatrix:
    """Fundamental matrix of a camera pair."""
    P1 = as_camera(P1)
    P2 = as_camera(P2)
    F = psi_raw(P1, P2)
    # P1, P2 are unit-norm here, so 1e-12 is already relative to input scale
    if np.max(np.abs(F)) < 1e-12:
        raise CentersCoincide("camera centers coincide; psi is undefined")
    return fundamental_matrix(F)


@dataclass(frozen=True, eq=False)
class AuxiliaryPoints5:
    """Per-image auxiliary points e_i^5 used by the coplanar-center conditions."""

    points: dict
    strategy: str = "random"

    def __getitem__(self, image):
        return self.points[image]


@dataclass(frozen=True, eq=False)
class FundamentalSet:
    n: int
    entries: dict = field(repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a fundamental set needs at least two views")
        for i, j in combinations(range(1, self.n + 1), 2):
            if (i, j) not in self.entries:
                raise MissingPair(f"missing pair ({i},{j})")

    def __call__(self, i, j) -> np.ndarray:
        return self.F(i, j)

    def F(self, i, j) -> np.ndarray:
        if i < j:
            return self.entries[i, j].matrix
        if i > j:
            return self.entries[j, i].matrix.T
        raise ValueError("F(i, i) is undefined")

    def epipole(self, i, j) -> np.ndarray:
        """e_j^i: image of view i's center in image j (kernel of F(i, j))."""
        if i == j:
            raise ValueError("epipole(i, i) is undefined")
        if i < j:
            return self.entries[i, j].right_epipole
        return self.entries[j, i].left_epipole

    def views(self):
        return range(1, self.n + 1)

    def pairs(self):
        return combinations(range(1, self.n + 1), 2)

    def epipoles_in(self, i):
        """All epipoles in image i, as ``{source view: point}``."""
        return {s: self.epipole(s, i) for s in self.views() if s != i}

    def subset(self, views) -> "FundamentalSet":
        """Restrict to ``views`` (in the given order), relabeled 1..len(views)."""
        views = list(views)
        entries = {}
        for a, b in combinations(range(len(views)), 2):
            vi, vj = views[a], views[b]
            if vi < vj:
                entries[a + 1, b + 1] = self.entries[vi, vj]
            else:
                entries[a + 1, b + 1] = self.entries[vj, vi].T
        return FundamentalSet(len(views), entries)

    def matrices(self):
        return {k: v.matrix for k, v in sorted(self.entries.items())}


def make_set(n, raw, tol=DEFAULT_TOL.tol_rank) -> FundamentalSet:
    """Build a set from raw matrices keyed by ``(i, j)`` with ``i < j``."""
    entries = {}
    for i, j in combinations(range(1, n + 1), 2):
        if (i, j) not in raw:
            raise MissingPair(f"missing pair ({i},{j})")
        try:
            entries[i, j] = fundamental_matrix(raw[i, j], tol)
        except NotRankTwo as exc:
            raise NotRankTwo(f"pair ({i},{j}): {exc}") from None
    extra = set(raw) - set(entries)
    if extra:
        raise ValueError(f"unexpected pairs {sorted(extra)}")
    return FundamentalSet(n, entries)


def epipole(fset: FundamentalSet, i, j):
    return fset.epipole(i, j)


def epipole_table(fset: FundamentalSet, aux: AuxiliaryPoints5 | None = None):
    """Map ``(s, i) -> e_i^s`` for every ordered pair, plus ``(5, i)`` from ``aux``."""
    table = {(s, i): fset.epipole(s, i) for s in fset.views() for i in fset.views() if s != i}
    if aux is not None:
        for i, p in aux.points.items():
            table[AUX, i] = np.asarray(p, dtype=float)
    return table


def enumber(fset: FundamentalSet, table, s, i, j, t) -> float:
    """e_{sijt} = (e_i^s)^T F(i, j) e_j^t using the supplied representatives."""
    try:
        left, right = table[s, i], table[t, j]
    except KeyError:
        if AUX in (s, t):
            raise MissingAuxiliary("auxiliary point e^5 required") from None
        raise
    return float(left @ fset.F(i, j) @ right)


def epipolar_number(fset: FundamentalSet, s, i, j, t, aux: AuxiliaryPoints5 | None = None) -> float:
    if i == j:
        raise ValueError("i and j must differ")
    if s == i or t == j:
        raise ValueError("need s != i and t != j")
    if AUX in (s, t) and aux is None:
        raise MissingAuxiliary("index 5 used without auxiliary points")
    return enumber(fset, epipole_table(fset, aux), s, i, j, t)


def epipolar_line(fset: FundamentalSet, i, j, x):
    """Line F(i, j) x in image i for a point x of image j."""
    line = fset.F(i, j) @ normalize(x)
    if np.linalg.norm(line) <= 1e-12:
        raise DegenerateLine("point is the epipole; epipolar line undefined")
    return normalize(line)


def apply_action(fset: FundamentalSet, H, tol=DEFAULT_TOL.tol_rank) -> FundamentalSet:
    """Fundamental action F^{ij} -> H_i^T F^{ij} H_j (one 3x3 per view)."""
    H = [np.asarray(h, dtype=float) for h in H]
    if len(H) != fset.n:
        raise ValueError(f"need {fset.n} transforms, got {len(H)}")
    for idx, h in enumerate(H, start=1):
        if abs(np.linalg.det(h)) <= tol * np.linalg.norm(h) ** 3:
            raise SingularTransform(f"transform for view {idx} is singular")
    raw = {(i, j): H[i - 1].T @ fset.F(i, j) @ H[j - 1] for i, j in fset.pairs()}
    return make_set(fset.n, raw)


def is_skew_certified(F, P1, P2, tol=DEFAULT_TOL.tol_compat):
    """Check F ~ psi(P1, P2) via antisymmetry of P1^T F P2; returns ``(flag, residual)``."""
    F = F.matrix if isinstance(F, FundamentalMatrix) else np.asarray(F, dtype=float)
    P1 = as_camera(P1)
    P2 = as_camera(P2)
    if sin_angle(camera_center(P1), camera_center(P2)) <= DEFAULT_TOL.tol_equal:
        raise CentersCoincide("camera centers coincide")
    S = P1.T @ F @ P2
    residual = float(np.linalg.norm(S + S.T) / np.linalg.norm(S))
    return residual <= tol, residual


def two_view_cameras(F, v=None, lam=1.0):
    """Canonical camera pair [[e]_x F + e v^T | lam e], [I | 0] for a single F.

    ``F`` may be a :class:`FundamentalMatrix` (its stored representative is used)
    or a raw 3x3 array, used as given.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if isinstance(F, FundamentalMatrix):
        M, e = F.matrix, F.left_epipole
    else:
        M = np.asarray(F, dtype=float)
        e = right_nullvector(M.T, 2)
    v = np.zeros(3) if v is None else np.asarray(v, dtype=float)
    P1 = np.hstack([skew(e) @ M + np.outer(e, v), lam * e[:, None]])
    P2 = np.hstack([np.eye(3), np.zeros((3, 1))])
    return as_camera(P1), as_camera(P2)
