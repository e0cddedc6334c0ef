"""Seeded camera configurations for each center geometry, plus corruption helpers.

All randomness flows from ``numpy.random.default_rng(seed)``; nothing touches
global RNG state.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CentersCoincide, DegenerateFrame, GeneratorExhausted, NotRankTwo
from .fundamental import FundamentalSet, fundamental_matrix, make_set, psi
from .projective import DEFAULT_TOL, normalize, sin_angle

CASES = ("Case1", "Case2", "Case3", "Case4", "GenericN", "CollinearN")
MAX_TRIES = 1000


@dataclass(frozen=True)
class CaseSpec:
    case: str
    n: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.case in ("Case1", "Case2", "Case3") and self.n != 4:
            raise ValueError(f"{self.case} requires n = 4")
        if self.case in ("Case4", "CollinearN") and self.n < 3:
            raise ValueError(f"{self.case} requires n >= 3")
        if self.n < 2:
            raise ValueError("n must be at least 2")


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _intrinsics(rng):
    K = np.eye(3)
    K[np.diag_indices(3)] = rng.uniform(0.8, 1.25, size=3)
    K[np.triu_indices(3, 1)] = rng.uniform(-0.2, 0.2, size=3)
    return K


def _point_line_distance(p, a, b):
    d = b - a
    w = p - a
    return np.linalg.norm(w - (w @ d) / (d @ d) * d)


def _tet_ok(pts):
    a, b, c, d = pts
    edge = max(np.linalg.norm(p - q) for p, q in combinations(pts, 2))
    return abs(np.linalg.det(np.array([b - a, c - a, d - a]))) / edge**3 > 0.1


def _no_three_collinear(pts, margin=0.05):
    for i, j, k in combinations(range(len(pts)), 3):
        for p, a, b in ((pts[i], pts[j], pts[k]), (pts[j], pts[i], pts[k]), (pts[k], pts[i], pts[j])):
            if _point_line_distance(p, a, b) <= margin:
                return False
    return True


def _min_gap(pts):
    return min(np.linalg.norm(p - q) for p, q in combinations(pts, 2))


def _grow_generic(seed_pts, n, rng):
    # add centers one at a time, resampling only the newest against every 4-subset it joins
    pts = list(seed_pts)
    while len(pts) < n:
        for _ in range(MAX_TRIES):
            q = rng.uniform(-1, 1, size=3)
            if all(_tet_ok([pts[a], pts[b], pts[c], q]) for a, b, c in combinations(range(len(pts)), 3)):
                pts.append(q)
                break
        else:
            return None
    return np.array(pts)


def _line_points(rng, k):
    a = rng.uniform(-1, 1, size=3)
    d = normalize(rng.normal(size=3))
    s = np.sort(rng.uniform(-1, 1, size=k))
    return a, d, s


def _translations(case, n, rng):
    for _ in range(MAX_TRIES):
        if case in ("Case1", "GenericN"):
            t = rng.uniform(-1, 1, size=(n, 3))
            if n < 4:
                if n == 2 or _no_three_collinear(t, 0.1):
                    if _min_gap(t) > 0.1:
                        return t
                continue
            placed = _grow_generic(t[:4], n, rng) if _tet_ok(t[:4]) else None
            if placed is not None:
                return placed
        elif case == "Case2":
            basis = np.linalg.qr(rng.normal(size=(3, 3)))[0]
            origin = rng.uniform(-0.5, 0.5, size=3)
            uv = rng.uniform(-1, 1, size=(n, 2))
            t = origin + uv @ basis[:, :2].T
            if _min_gap(t) > 0.1 and _no_three_collinear(t, 0.05):
                return t
        elif case == "Case3":
            a, d, s = _line_points(rng, 3)
            if np.min(np.diff(s)) <= 0.1:
                continue
            line = a + s[:, None] * d
            q = rng.uniform(-1, 1, size=3)
            if _point_line_distance(q, a, a + d) > 0.1:
                return np.vstack([line, q])
        else:  # Case4 / CollinearN
            a, d, s = _line_points(rng, n)
            if np.min(np.diff(s)) > 0.1:
                return a + s[:, None] * d
    raise GeneratorExhausted(f"could not place centers for {case} after {MAX_TRIES} tries")


def generate_cameras(spec: CaseSpec):
    """Cameras K_i R_i [I | t_i] with translations placed per the requested geometry."""
    rng = np.random.default_rng(spec.seed)
    t = _translations(spec.case, spec.n, rng)
    cams = []
    for ti in t:
        A = _intrinsics(rng) @ random_rotation(rng)
        cams.append(normalize(A @ np.hstack([np.eye(3), ti[:, None]])))
    return cams


def set_from_cameras(cameras) -> FundamentalSet:
    entries = {}
    for i, j in combinations(range(len(cameras)), 2):
        try:
            entries[i + 1, j + 1] = psi(cameras[i], cameras[j])
        except CentersCoincide:
            raise CentersCoincide(f"centers of cameras {i + 1} and {j + 1} coincide") from None
    return FundamentalSet(len(cameras), entries)


def generate_set(case, n=4, seed=0):
    return set_from_cameras(generate_cameras(CaseSpec(case, n, seed)))


def _replace(fset, pair, new_matrix):
    i, j = pair
    if i > j:
        i, j, new_matrix = j, i, np.asarray(new_matrix).T
    entries = dict(fset.entries)
    try:
        entries[i, j] = fundamental_matrix(new_matrix)
    except NotRankTwo as exc:
        raise NotRankTwo(f"pair ({i},{j}) degenerated: {exc}") from None
    return FundamentalSet(fset.n, entries)


def perturb_set(fset: FundamentalSet, pair, eps, seed=0) -> FundamentalSet:
    """Add a random matrix of Frobenius norm eps to F(i, j) and reproject to rank 2."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    rng = np.random.default_rng(seed)
    i, j = pair
    D = rng.normal(size=(3, 3))
    M = fset.F(i, j) + eps * D / np.linalg.norm(D)
    u, s, vt = np.linalg.svd(M)
    if s[1] <= DEFAULT_TOL.tol_rank * s[0]:
        raise NotRankTwo(f"perturbation collapsed pair ({i},{j}) below rank 2")
    s[2] = 0.0
    return _replace(fset, pair, (u * s) @ vt)


def _epipole_fixing_transform(points, rng, strength):
    """Random 3x3 fixing every given point of P^2 up to scale, not ~ identity."""
    dirs = []
    for p in points:
        if all(sin_angle(p, q) > DEFAULT_TOL.tol_classify for q in dirs):
            dirs.append(normalize(p))
    rank = np.linalg.matrix_rank(np.array(dirs), tol=1e-6)
    if len(dirs) > rank == 3:
        raise DegenerateFrame("epipoles form a projective frame; only the identity fixes them")
    if len(dirs) > rank:
        # more distinct points than their span: the span must be fixed pointwise
        basis = np.linalg.svd(np.array(dirs))[2]
        E = basis.T
        d = np.ones(3)
        d[rank:] = 1 + strength * rng.uniform(0.5, 1.5, size=3 - rank) * rng.choice([-1, 1], size=3 - rank)
    else:
        extra = np.linalg.svd(np.array(dirs))[2][len(dirs):]
        E = np.vstack([np.array(dirs), extra]).T
        d = 1 + strength * rng.uniform(0.5, 1.5, size=3) * rng.choice([-1, 1], size=3)
        d[0] = 1.0
    return E @ np.diag(d) @ np.linalg.inv(E)


def scramble_interior(fset: FundamentalSet, pair, seed=0, strength=0.5) -> FundamentalSet:
    """Replace F(i, j) by F(i, j) B with B fixing every epipole of image j.

    Both epipoles of F(i, j) stay put, so the epipole configuration (and hence
    the classification) is unchanged while the pair generically stops being
    consistent with the rest of the set.
    """
    rng = np.random.default_rng(seed)
    i, j = pair
    B = _epipole_fixing_transform(list(fset.epipoles_in(j).values()), rng, strength)
    return _replace(fset, pair, fset.F(i, j) @ B)


def random_rank2_set(n, seed=0) -> FundamentalSet:
    rng = np.random.default_rng(seed)
    raw = {(i, j): rng.normal(size=(3, 2)) @ rng.normal(size=(2, 3))
           for i, j in combinations(range(1, n + 1), 2)}
    return make_set(n, raw)


def random_action(n, seed=0, max_cond=20.0):
    """n well-conditioned invertible 3x3 transforms for the fundamental action."""
    rng = np.random.default_rng(seed)
    H = []
    while len(H) < n:
        h = rng.normal(size=(3, 3))
        if np.linalg.cond(h) < max_cond:
            H.append(h)
    return H


def random_world_transform(seed=0, max_cond=20.0):
    rng = np.random.default_rng(seed)
    while True:
        h = rng.normal(size=(4, 4))
        if np.linalg.cond(h) < max_cond:
            return h
