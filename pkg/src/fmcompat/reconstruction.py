"""Witness cameras for compatible fundamental sets.

Every constructor certifies its output pairwise with the skew-symmetry test
and raises :class:`DegenerateReconstruction` if certification fails.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .classify import CASE1, CASE2, CASE3, CASE4, COLLINEAR, all_epipoles_coincide, classify_quadruple
from .compatibility import (
    case1_first_cameras,
    check_case1,
    check_case2,
    check_case3,
    check_case4,
    check_multiview,
    check_triple,
    draw_auxiliary,
    fixed_scaling_table,
)
from .errors import (
    AmbiguousClassification,
    CentersCoincide,
    DegenerateFrame,
    DegenerateReconstruction,
    FrameSamplingFailed,
    NoAnchorPair,
    NoUniqueSolution,
    NotCompatible,
)
from .fundamental import FundamentalMatrix, FundamentalSet, epipole_table, is_skew_certified, two_view_cameras
from .projective import (
    DEFAULT_TOL,
    ZERO,
    Line3,
    as_camera,
    back_projected_line,
    camera_center,
    camera_from_constraints,
    frame_defect,
    meet_image_lines,
    meet_lines,
    normalize,
    sin_angle,
    skew,
)

MAX_FRAME_ATTEMPTS = 50
FRAME_MARGIN = 1e-3
P_IDENTITY = np.hstack([np.eye(3), np.zeros((3, 1))])


@dataclass
class CameraSolution:
    cameras: list
    certificate: dict  # (i, j) -> skew residual
    unique: bool  # unique up to a world transform, as opposed to a family
    tol: float = DEFAULT_TOL.tol_compat
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(r <= self.tol for r in self.certificate.values())


def verify_solution(cameras, fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat):
    """Pairwise skew certificates; returns ``(all_pass, {(i, j): residual})``."""
    if len(cameras) != fset.n:
        raise ValueError(f"expected {fset.n} cameras, got {len(cameras)}")
    cert = {}
    for i, j in fset.pairs():
        try:
            cert[i, j] = is_skew_certified(fset.F(i, j), cameras[i - 1], cameras[j - 1], tol)[1]
        except CentersCoincide:
            raise CentersCoincide(f"cameras {i} and {j} share a center") from None
    return all(r <= tol for r in cert.values()), cert


def _solution(cameras, fset, unique, tol, **diagnostics):
    cameras = [as_camera(C) for C in cameras]
    ok, cert = verify_solution(cameras, fset, tol)
    if not ok:
        worst = max(cert, key=cert.get)
        raise DegenerateReconstruction(f"certificate for pair {worst} is {cert[worst]:.3g}")
    return CameraSolution(cameras, cert, unique, tol, diagnostics)


def _require(report, what):
    if not report.compatible:
        raise NotCompatible(f"{what} check returned {report.verdict}")


def reconstruct_two(F, tol=DEFAULT_TOL.tol_compat) -> CameraSolution:
    """Canonical pair (v = 0, lambda = 1); accepts a matrix, FundamentalMatrix or 2-view set."""
    if isinstance(F, FundamentalSet):
        F = F.entries[1, 2]
    P1, P2 = two_view_cameras(F)
    M = F.matrix if isinstance(F, FundamentalMatrix) else np.asarray(F, dtype=float)
    cert = {(1, 2): is_skew_certified(M, P1, P2, tol)[1]}
    return CameraSolution([P1, P2], cert, False, tol)


def _generic_points(rng, count=2):
    return [normalize(rng.normal(size=4)) for _ in range(count)]


def third_camera(fset, cams, a, b, k, rng, tol=DEFAULT_TOL.tol_compat):
    """Unique camera k given cameras a, b with (a, b, k) non-collinear.

    The center is the meet of the back-projected epipole lines; two generic
    world points are imaged at the intersections of their epipolar lines.
    """
    Ca, Cb = cams[a], cams[b]
    pa, pb = camera_center(Ca), camera_center(Cb)
    pk, res = meet_lines([back_projected_line(Ca, fset.epipole(k, a)),
                          back_projected_line(Cb, fset.epipole(k, b))])
    if res > tol:
        raise DegenerateReconstruction(f"back-projected lines of the epipoles miss by {res:.3g}")
    eka, ekb = fset.epipole(a, k), fset.epipole(b, k)
    for _ in range(MAX_FRAME_ATTEMPTS):
        X, Y = _generic_points(rng)
        if frame_defect([pa, pb, pk, X, Y]) <= FRAME_MARGIN:
            continue
        targets = []
        for W in (X, Y):
            la, lb = fset.F(k, a) @ Ca @ W, fset.F(k, b) @ Cb @ W
            if sin_angle(la, lb) <= FRAME_MARGIN:
                break
            targets.append(normalize(np.cross(la, lb)))
        if len(targets) < 2 or frame_defect([eka, ekb, *targets]) <= FRAME_MARGIN:
            continue
        try:
            return camera_from_constraints([(pa, eka), (pb, ekb), (pk, ZERO), (X, targets[0]), (Y, targets[1])])
        except DegenerateFrame:
            continue
    raise FrameSamplingFailed(f"no generic frame found after {MAX_FRAME_ATTEMPTS} attempts")


def reconstruct_triple(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CameraSolution:
    if fset.n != 3:
        raise ValueError("reconstruct_triple needs exactly three views")
    try:
        report = check_triple(fset, tol)
    except AmbiguousClassification as exc:
        raise NotCompatible(str(exc)) from None
    _require(report, "triple")
    if report.label == COLLINEAR:
        return _solution(collinear_cameras(fset, np.random.default_rng(seed)), fset, False, tol)
    C1, C2 = two_view_cameras(fset.entries[1, 2])
    cams = {1: C1, 2: C2}
    cams[3] = third_camera(fset, cams, 1, 2, 3, np.random.default_rng(seed), tol)
    return _solution([cams[1], cams[2], cams[3]], fset, True, tol)


def balance_world(cams):
    """Rescale world coordinates so every column of the stacked cameras has equal norm.

    A diagonal world transform, so pairwise fundamental matrices are untouched.
    """
    norms = np.linalg.norm(np.vstack(cams), axis=0)
    D = np.diag(norms.mean() / np.maximum(norms, 1e-300))
    return [normalize(C @ D) for C in cams]


def _skew_rows(P, F):
    # linear map vec(C) -> vec(P^T F C + (P^T F C)^T), row-major vectorization
    A = np.kron(P.T @ F, np.eye(4))
    T = np.zeros((16, 16))
    for a in range(4):
        for b in range(4):
            T[4 * a + b, 4 * b + a] = 1.0
    return A + T @ A


def collinear_extension(fset, cams, k, rng, tol=DEFAULT_TOL.tol_rank):
    """A camera k certifying F(i, k) against every placed camera i.

    The solutions form a linear space (a family when the centers are
    collinear); a random member is drawn and rejected if its center
    coincides with a placed one.
    """
    A = np.vstack([_skew_rows(as_camera(C), fset.F(i, k)) for i, C in cams.items()])
    _, s, vt = np.linalg.svd(A)
    null = vt[np.sum(s > tol * s[0]):]
    if len(null) == 0:
        raise DegenerateReconstruction(f"no camera certifies view {k} against the placed views")
    centers = [camera_center(C) for C in cams.values()]
    for _ in range(MAX_FRAME_ATTEMPTS):
        C = (rng.normal(size=len(null)) @ null).reshape(3, 4)
        if np.linalg.svd(C, compute_uv=False)[2] <= 1e-6 * np.linalg.norm(C):
            continue
        if min(sin_angle(camera_center(C), p) for p in centers) > 1e-3:
            return normalize(C)
    raise FrameSamplingFailed(f"no admissible member of the camera family for view {k}")


def collinear_cameras(fset, rng=None):
    """[I | 0], the canonical pair partner for view 2, then a family member per later view.

    The pair-wise formula [[e_i^1]_x F(i, 1) | e_i^1] puts every center at
    (e_1^i, 0); with coincident epipoles those centers coincide, so views
    k >= 3 are drawn from the linear solution space instead.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    e = fset.epipole(1, 2)
    cams = {1: P_IDENTITY.copy(), 2: np.hstack([skew(e) @ fset.F(2, 1), e[:, None]])}
    for k in range(3, fset.n + 1):
        cams[k] = collinear_extension(fset, cams, k, rng)
    return [cams[i] for i in fset.views()]


def reconstruct_case1(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat) -> CameraSolution:
    _require(check_case1(fset, tol), "Case1")
    table = epipole_table(fset)
    C1, C2, C3 = case1_first_cameras(fset, table)
    p = np.eye(4)
    X = np.ones(4)
    x4, res = meet_image_lines([fset.F(4, i) @ C @ X for i, C in ((1, C1), (2, C2), (3, C3))])
    if res > tol:
        raise DegenerateReconstruction(f"epipolar lines of X are not concurrent (residual {res:.3g})")
    C4 = camera_from_constraints([
        (p[0], table[1, 4]), (p[1], table[2, 4]), (p[2], table[3, 4]), (p[3], ZERO), (X, x4),
    ])
    p4 = max(sin_angle(C @ p[3], table[4, i]) for i, C in ((1, C1), (2, C2), (3, C3)))
    return _solution([C1, C2, C3, C4], fset, True, tol, p4_residual=p4, x4=x4)


@dataclass
class GForm:
    """Normal form of a coplanar sextuple under the fundamental action."""

    H: dict  # image -> 3x3 with columns (scaled e_i^j, scaled e_i^k, e_i^5)
    G: dict  # (i, j) -> H_i^T F(i, j) H_j
    x: dict
    y: dict
    z: dict
    pattern_residual: float


# (row, col) entries forced to zero, and entries forced to be negatives of others
_ZEROS = {
    (1, 2): [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)],
    (1, 3): [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 0)],
    (1, 4): [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)],
    (2, 3): [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1)],
    (2, 4): [(0, 0), (0, 1), (1, 0), (1, 1), (2, 1)],
    (3, 4): [(0, 0), (0, 1), (1, 0), (1, 1)],
}
_NEGATED = {
    (1, 4): [((1, 2), (0, 2))],
    (2, 4): [((1, 2), (0, 2))],
    (3, 4): [((1, 2), (0, 2)), ((2, 1), (2, 0))],
}
_XYZ = {
    (1, 2): ((1, 2), (2, 1), (2, 2)),
    (1, 3): ((0, 2), (2, 1), (2, 2)),
    (1, 4): ((0, 2), (2, 1), (2, 2)),
    (2, 3): ((0, 2), (2, 0), (2, 2)),
    (2, 4): ((0, 2), (2, 0), (2, 2)),
    (3, 4): ((0, 2), (2, 0), (2, 2)),
}


def gform(fset: FundamentalSet, aux) -> GForm:
    table = fixed_scaling_table(fset, epipole_table(fset, aux))
    H = {}
    for i in fset.views():
        j, k = [v for v in fset.views() if v != i][:2]
        H[i] = np.column_stack([table[j, i], table[k, i], aux[i]])
    G, x, y, z = {}, {}, {}, {}
    worst = 0.0
    for i, j in fset.pairs():
        g = H[i].T @ fset.F(i, j) @ H[j]
        scale = np.max(np.abs(g))
        for r, c in _ZEROS[i, j]:
            worst = max(worst, abs(g[r, c]) / scale)
        for (r1, c1), (r2, c2) in _NEGATED.get((i, j), []):
            worst = max(worst, abs(g[r1, c1] + g[r2, c2]) / scale)
        G[i, j] = g
        (xr, xc), (yr, yc), (zr, zc) = _XYZ[i, j]
        x[i, j], y[i, j], z[i, j] = g[xr, xc], g[yr, yc], g[zr, zc]
    return GForm(H, G, x, y, z, float(worst))


def gform_cameras(g: GForm):
    """First three cameras for the normal form (centers e1, e2, e3 of R^4)."""
    x, y, z = g.x, g.y, g.z
    C1 = np.array([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, x[1, 2] * x[1, 3] * y[2, 3]]], dtype=float)
    C2 = np.array([
        [1, 0, 0, 0],
        [0, 0, 1, z[1, 2] * x[1, 3] * y[2, 3]],
        [0, 0, 0, -y[1, 2] * x[1, 3] * y[2, 3]],
    ], dtype=float)
    C3 = np.array([
        [1, 0, 0, z[2, 3] * x[1, 2] * y[1, 3]],
        [0, 1, 0, z[1, 3] * x[1, 2] * y[2, 3]],
        [0, 0, 0, -x[1, 2] * y[1, 3] * y[2, 3]],
    ], dtype=float)
    return [C1, C2, C3]


def case2_first_three(fset: FundamentalSet, rng, tol=DEFAULT_TOL.tol_compat):
    """Cameras 1-3 of a coplanar sextuple, mapped back through the normal-form transforms."""
    aux = draw_auxiliary(fset, "random", rng)
    g = gform(fset, aux)
    if g.pattern_residual > tol:
        raise DegenerateReconstruction(f"normal form pattern violated by {g.pattern_residual:.3g}")
    cams = balance_world([g.H[i] @ C for i, C in enumerate(gform_cameras(g), start=1)])
    return cams, g


def reconstruct_case2(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CameraSolution:
    _require(check_case2(fset, tol, seed=seed), "Case2")
    rng = np.random.default_rng(seed)
    (C1, C2, C3), g = case2_first_three(fset, rng, tol)
    cams = {1: C1, 2: C2, 3: C3}
    centers = {i: camera_center(C) for i, C in cams.items()}
    p4, res = meet_lines([back_projected_line(cams[i], fset.epipole(4, i)) for i in (1, 2, 3)])
    if res > tol:
        raise DegenerateReconstruction(f"fourth center not recoverable (residual {res:.3g})")
    normal = np.linalg.svd(np.array(list(centers.values())))[2][-1]
    # p1..p4 are coplanar, so two off-plane points are needed to pin C4 down
    for _ in range(MAX_FRAME_ATTEMPTS):
        W = _generic_points(rng)
        if min(abs(normal @ w) for w in W) <= 0.1:
            continue
        targets, worst = [], 0.0
        for w in W:
            pt, r = meet_image_lines([fset.F(4, i) @ cams[i] @ w for i in (1, 2, 3)])
            targets.append(pt)
            worst = max(worst, r)
        if worst > tol:
            raise DegenerateReconstruction(f"epipolar lines not concurrent (residual {worst:.3g})")
        # six constraints overdetermine C4; the nullity check rejects bad draws
        if frame_defect([fset.epipole(1, 4), fset.epipole(2, 4), *targets]) <= 1e-6:
            continue
        try:
            C4 = camera_from_constraints([
                (centers[1], fset.epipole(1, 4)),
                (centers[2], fset.epipole(2, 4)),
                (centers[3], fset.epipole(3, 4)),
                (p4, ZERO),
                (W[0], targets[0]),
                (W[1], targets[1]),
            ])
        except (DegenerateFrame, NoUniqueSolution):
            continue
        return _solution([C1, C2, C3, C4], fset, True, tol, p4_residual=res,
                         gform_pattern=g.pattern_residual)
    raise FrameSamplingFailed("no usable off-plane points for the fourth camera")


def reconstruct_case3(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CameraSolution:
    report = check_case3(fset, tol)
    _require(report, "Case3")
    a, b, c = report.classification.triple
    (d,) = [v for v in fset.views() if v not in (a, b, c)]
    order = [a, b, c, d]
    S = fset.subset(order)
    rng = np.random.default_rng(seed)
    sub = reconstruct_triple(S.subset([2, 3, 4]), tol, seed)
    cams = {2: sub.cameras[0], 3: sub.cameras[1], 4: sub.cameras[2]}
    p2, p3, p4 = (camera_center(cams[k]) for k in (2, 3, 4))
    p1, res = meet_lines([back_projected_line(cams[4], S.epipole(1, 4)), Line3(p2, p3)])
    if res > tol:
        raise DegenerateReconstruction(f"first center not recoverable (residual {res:.3g})")
    on_line = Line3(p2, p3).distance(p1)
    e12, e14 = S.epipole(2, 1), S.epipole(4, 1)
    for _ in range(MAX_FRAME_ATTEMPTS):
        X, Y = _generic_points(rng)
        if frame_defect([p1, p2, p4, X, Y]) <= FRAME_MARGIN:
            continue
        targets = []
        for W in (X, Y):
            l2, l4 = S.F(1, 2) @ cams[2] @ W, S.F(1, 4) @ cams[4] @ W
            if sin_angle(l2, l4) <= FRAME_MARGIN:
                break
            targets.append(normalize(np.cross(l2, l4)))
        if len(targets) < 2 or frame_defect([e12, e14, *targets]) <= FRAME_MARGIN:
            continue
        try:
            cams[1] = camera_from_constraints([(p1, ZERO), (p2, e12), (p4, e14), (X, targets[0]), (Y, targets[1])])
        except DegenerateFrame:
            continue
        out = [None] * 4
        for local, view in enumerate(order, start=1):
            out[view - 1] = cams[local]
        return _solution(out, fset, True, tol, p1_line_distance=on_line, triple=(a, b, c))
    raise FrameSamplingFailed("no generic frame for the first camera")


def reconstruct_case4(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CameraSolution:
    _require(check_case4(fset, tol), "collinear")
    return _solution(collinear_cameras(fset, np.random.default_rng(seed)), fset, False, tol)


def reconstruct_quadruple(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CameraSolution:
    cls = classify_quadruple(fset)
    if cls.label == CASE1:
        return reconstruct_case1(fset, tol)
    if cls.label == CASE2:
        return reconstruct_case2(fset, tol, seed)
    if cls.label == CASE3:
        return reconstruct_case3(fset, tol, seed)
    if cls.label == CASE4:
        return reconstruct_case4(fset, tol, seed)
    raise NotCompatible("ambiguous epipole configuration")


def reconstruct_multiview(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CameraSolution:
    """Reconstruct any compatible set by seeding a quadruple and extending one view at a time."""
    if fset.n == 2:
        return reconstruct_two(fset, tol)
    if fset.n == 3:
        return reconstruct_triple(fset, tol, seed)
    _require(check_multiview(fset, tol, seed=seed), "multiview")
    if all_epipoles_coincide(fset):
        return reconstruct_case4(fset, tol, seed)
    # a collinear seed only yields one member of a family, which need not extend
    seed_views = next(v for v in combinations(fset.views(), 4)
                      if classify_quadruple(fset.subset(v)).label != CASE4)
    base = reconstruct_quadruple(fset.subset(seed_views), tol, seed)
    cams = dict(zip(seed_views, base.cameras))
    rng = np.random.default_rng(seed)
    for k in fset.views():
        if k in cams:
            continue
        anchor = None
        for a, b in combinations(sorted(cams), 2):
            if sin_angle(fset.epipole(a, k), fset.epipole(b, k)) > DEFAULT_TOL.tol_classify:
                anchor = (a, b)
                break
        if anchor is None:
            raise NoAnchorPair(f"every anchor pair is collinear with view {k}")
        cams[k] = third_camera(fset, cams, *anchor, k, rng, tol)
    return _solution([cams[i] for i in fset.views()], fset, base.unique, tol, seed_views=seed_views)


def reconstruct(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CameraSolution:
    """Dispatch on the number of views."""
    if fset.n == 4:
        return reconstruct_quadruple(fset, tol, seed)
    return reconstruct_multiview(fset, tol, seed)
