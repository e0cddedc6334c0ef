"""Compatibility tests for triples, quadruples and n-view fundamental sets.

Each check returns a :class:`CompatibilityReport`. Polynomial conditions are
reported as dimensionless residuals: |value| divided by the largest absolute
monomial term (floored at 1e-30). Residuals are always reported, whatever the
verdict.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .classify import (
    AMBIGUOUS,
    CASE1,
    CASE2,
    CASE3,
    CASE4,
    COLLINEAR,
    NON_COLLINEAR,
    all_epipoles_coincide,
    classify_quadruple,
    classify_triple,
)
from .errors import (
    AmbiguousClassification,
    AuxiliaryDegenerate,
    DegenerateReconstruction,
    GeometryError,
    ReconstructionFailed,
    WrongCase,
)
from .fundamental import AuxiliaryPoints5, FundamentalSet, enumber, epipole_table
from .projective import DEFAULT_TOL, camera_center, normalize, sin_angle, skew

COMPATIBLE = "Compatible"
INCOMPATIBLE = "Incompatible"
DEGENERATE = "Degenerate"

FLOOR = 1e-30
CASE1_PRODUCT_FLOOR = 1e-20
SCALE_SELFTEST_TOL = 1e-8
MAX_AUX_REDRAWS = 20

# Six-factor products of the generic four-view identity, as (s, i, j, t) digits.
CASE1_LHS = ("4123", "2134", "3142", "4231", "1243", "2341")
CASE1_RHS = ("3124", "4132", "2143", "1234", "3241", "1342")

# Signed six-term equation for coplanar centers (index 5 = auxiliary points).
CASE2_LONG = (
    (+1, ("3245", "2315", "2415", "1325", "1435", "5125")),
    (-1, ("2345", "3215", "2415", "1325", "1425", "5135")),
    (-1, ("3215", "2315", "1325", "1425", "2435", "5145")),
    (-1, ("1345", "3215", "2315", "2415", "1425", "5235")),
    (-1, ("3215", "2315", "2415", "1325", "1435", "5245")),
    (+1, ("3215", "2315", "2415", "1325", "1425", "5345")),
)


@dataclass
class CompatibilityReport:
    verdict: str
    classification: object
    residuals: dict
    tolerance: float
    diagnostics: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def compatible(self):
        return self.verdict == COMPATIBLE

    @property
    def label(self):
        c = self.classification
        return c if isinstance(c, str) else c.label

    def max_residual(self):
        return max(self.residuals.values(), default=0.0)


def _verdict(residuals, tol, ambiguous=False):
    if ambiguous:
        return DEGENERATE
    return COMPATIBLE if all(r <= tol for r in residuals.values()) else INCOMPATIBLE


def _e(fset, table, code):
    s, i, j, t = (int(c) for c in code)
    return enumber(fset, table, s, i, j, t)


def _relative(terms):
    """|sum(terms)| / max |term|."""
    terms = np.asarray(terms, dtype=float)
    return float(abs(terms.sum()) / max(np.max(np.abs(terms)), FLOOR))


# -- triples -----------------------------------------------------------------

def triple_residuals(fset, views, branch, table=None, prefix=None):
    """Residuals of the three-view conditions for ``views = (a, b, c)`` of ``fset``.

    The non-collinear branch evaluates e_{cabc}, e_{bacb}, e_{abca}; the
    collinear branch fits F(c, b) ~ F(c, a) [e_a^b]_x F(a, b) by least squares.
    """
    a, b, c = views
    table = epipole_table(fset) if table is None else table
    prefix = prefix or f"triple({a},{b},{c})"
    if branch == NON_COLLINEAR:
        out = {}
        for s, i, j, t in ((c, a, b, c), (b, a, c, b), (a, b, c, a)):
            out[f"{prefix}:e{s}{i}{j}{t}"] = abs(enumber(fset, table, s, i, j, t))
        return out
    A = fset.F(c, b)
    B = fset.F(c, a) @ skew(fset.epipole(b, a)) @ fset.F(a, b)
    bb = float(np.sum(B * B))
    if bb <= FLOOR:
        return {f"{prefix}:collinear": 1.0}
    lam = float(np.sum(A * B)) / bb
    return {f"{prefix}:collinear": float(np.linalg.norm(A - lam * B) / np.linalg.norm(A))}


def check_triple(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat) -> CompatibilityReport:
    if fset.n != 3:
        raise ValueError("check_triple needs exactly three views")
    cls = classify_triple(fset)
    if cls.label == AMBIGUOUS:
        raise AmbiguousClassification(f"triple epipole pattern is ambiguous: {cls.coincidence}")
    res = triple_residuals(fset, (1, 2, 3), cls.label)
    return CompatibilityReport(_verdict(res, tol), cls, res, tol)


def _require_quad(fset, wanted, tol_classify=DEFAULT_TOL.tol_classify):
    if fset.n != 4:
        raise ValueError("quadruple checks need exactly four views")
    cls = classify_quadruple(fset, tol_classify)
    if cls.label == AMBIGUOUS:
        raise AmbiguousClassification("quadruple epipole pattern is ambiguous")
    if cls.label != wanted:
        raise WrongCase(f"expected {wanted}, classified as {cls.label}")
    return cls


def _noncollinear_triples(fset, table, triples=None):
    res = {}
    for tri in triples or combinations((1, 2, 3, 4), 3):
        res.update(triple_residuals(fset, tri, NON_COLLINEAR, table))
    return res


# -- Case 1: centers not coplanar ---------------------------------------------

def case1_products(fset, table):
    L = float(np.prod([_e(fset, table, c) for c in CASE1_LHS]))
    R = float(np.prod([_e(fset, table, c) for c in CASE1_RHS]))
    return L, R


def case1_identity_residual(fset, table):
    L, R = case1_products(fset, table)
    return abs(L - R) / max(abs(L), abs(R), FLOOR), max(abs(L), abs(R))


def check_case1(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat) -> CompatibilityReport:
    cls = _require_quad(fset, CASE1)
    table = epipole_table(fset)
    res = _noncollinear_triples(fset, table)
    quad, scale = case1_identity_residual(fset, table)
    res["case1:identity"] = quad
    if scale < CASE1_PRODUCT_FLOOR:
        return CompatibilityReport(DEGENERATE, cls, res, tol,
                                   [f"epipolar-number products vanish (max |L|,|R| = {scale:.3g})"])
    return CompatibilityReport(_verdict(res, tol), cls, res, tol)


def case1_first_cameras(fset, table=None):
    """First three cameras in the frame where their centers are e1, e2, e3 and p4 = e4.

    Columns are epipoles scaled by epipolar numbers; valid whenever the
    triplewise conditions hold.
    """
    table = epipole_table(fset) if table is None else table
    e = lambda s, i: table[s, i]  # noqa: E731
    n = lambda code: _e(fset, table, code)  # noqa: E731
    z = np.zeros(3)
    C1 = np.column_stack([z, n("3124") * e(2, 1), -n("4123") * e(3, 1), n("3124") * e(4, 1)])
    C2 = np.column_stack([-n("4231") * e(1, 2), z, n("1234") * e(3, 2), n("1234") * e(4, 2)])
    C3 = np.column_stack([n("4132") * e(1, 3), -n("2134") * e(2, 3), z, n("4132") * e(4, 3)])
    cams = []
    for C in (C1, C2, C3):
        s = np.linalg.svd(C, compute_uv=False)
        if s[2] <= DEFAULT_TOL.tol_rank * s[0]:
            raise DegenerateReconstruction("first-three camera is rank deficient")
        cams.append(normalize(C))
    return cams


def check_case1_geometric(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=None) -> CompatibilityReport:
    """Epipolar-line concurrence test: F(4,i) C_i X must share one point for i = 1, 2, 3.

    X is (1,1,1,1) by default; a seed draws a random generic X instead.
    """
    cls = _require_quad(fset, CASE1)
    table = epipole_table(fset)
    res = _noncollinear_triples(fset, table)
    cams = case1_first_cameras(fset, table)
    p4 = np.array([0.0, 0.0, 0.0, 1.0])
    for i, C in enumerate(cams, start=1):
        res[f"case1:p4({i})"] = sin_angle(C @ p4, table[4, i])
    X = np.ones(4) if seed is None else np.random.default_rng(seed).normal(size=4)
    lines = [normalize(fset.F(4, i) @ C @ X) for i, C in enumerate(cams, start=1)]
    res["case1:concurrence"] = float(abs(np.linalg.det(np.column_stack(lines))))
    diag = []
    for (i, a), (j, b) in combinations(enumerate(lines, start=1), 2):
        if sin_angle(a, b) <= tol:
            diag.append(f"epipolar lines {i} and {j} coincide")
    verdict = DEGENERATE if diag else _verdict(res, tol)
    return CompatibilityReport(verdict, cls, res, tol, diag)


# -- Case 2: coplanar centers, no three collinear -----------------------------

def _others(i):
    return [k for k in (1, 2, 3, 4) if k != i]


def aux_independence(fset, i, point):
    j, k = _others(i)[:2]
    M = np.column_stack([fset.epipole(j, i), fset.epipole(k, i), normalize(point)])
    return abs(np.linalg.det(M))


def draw_auxiliary(fset, strategy="random", rng=None, tol=DEFAULT_TOL.tol_classify) -> AuxiliaryPoints5:
    """Draw e_i^5 for each image, linearly independent of that image's epipoles."""
    rng = np.random.default_rng(0) if rng is None else rng
    pts = {}
    if strategy == "remark49":
        pts[1] = fset.F(1, 2) @ fset.epipole(4, 2)
        pts[2] = fset.F(2, 3) @ fset.epipole(4, 3)
        pts[3] = fset.F(3, 1) @ fset.epipole(4, 1)
        for i in (1, 2, 3):
            if np.linalg.norm(pts[i]) <= FLOOR or aux_independence(fset, i, pts[i]) <= tol:
                raise AuxiliaryDegenerate(f"remark49 point in image {i} is not independent")
            pts[i] = normalize(pts[i])
        images = (4,)
    elif strategy == "random":
        images = (1, 2, 3, 4)
    else:
        raise ValueError(f"unknown auxiliary strategy {strategy!r}")
    for i in images:
        for _ in range(MAX_AUX_REDRAWS + 1):
            p = normalize(rng.normal(size=3))
            if aux_independence(fset, i, p) > tol:
                pts[i] = p
                break
        else:
            raise AuxiliaryDegenerate(f"no independent auxiliary point in image {i}")
    return AuxiliaryPoints5(pts, strategy)


def fixed_scaling_table(fset, table):
    """Rescale epipoles per image so the largest-index one is the sum of the other two."""
    out = dict(table)
    for i in fset.views():
        j, k, l = _others(i)
        A = np.column_stack([table[j, i], table[k, i]])
        (alpha, beta), *_ = np.linalg.lstsq(A, table[l, i], rcond=None)
        out[j, i] = alpha * table[j, i]
        out[k, i] = beta * table[k, i]
    return out


def case2_short_residual(fset, table, i):
    j, k, l = _others(i)
    e = lambda code: _e(fset, table, code)  # noqa: E731
    t1 = e(f"{i}{j}{k}5") * e(f"{i}{k}{l}5") * e(f"{i}{l}{j}5")
    t2 = e(f"{i}{k}{j}5") * e(f"{i}{j}{l}5") * e(f"{i}{l}{k}5")
    return _relative([t1, t2])


def case2_long_terms(fset, table):
    return [sign * float(np.prod([_e(fset, table, c) for c in codes])) for sign, codes in CASE2_LONG]


def case2_residuals(fset, aux, scaling="canonical"):
    """Normalized residuals of the four short equations and the long equation."""
    table = epipole_table(fset, aux)
    if scaling == "fixed":
        table = fixed_scaling_table(fset, table)
    elif scaling != "canonical":
        raise ValueError(f"unknown scaling {scaling!r}")
    out = {f"short{i}": case2_short_residual(fset, table, i) for i in (1, 2, 3, 4)}
    out["long"] = _relative(case2_long_terms(fset, table))
    return out


def rescaled_table(table, rng, low=0.1, high=10.0):
    return {k: v * rng.uniform(low, high) for k, v in table.items()}


def scale_selftest(fset, aux, rng):
    """Largest change of the Case-1/Case-2 residuals under random epipole rescaling."""
    base = epipole_table(fset, aux)
    scaled = rescaled_table(base, rng)
    diffs = {}
    for i in (1, 2, 3, 4):
        diffs[f"short{i}"] = abs(case2_short_residual(fset, base, i) - case2_short_residual(fset, scaled, i))
    diffs["long"] = abs(_relative(case2_long_terms(fset, base)) - _relative(case2_long_terms(fset, scaled)))
    return diffs


def check_case2(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, aux_strategy="random",
                draws=3, seed=0, scaling=None) -> CompatibilityReport:
    """Coplanar-center test with ``draws`` independent auxiliary-point samples.

    ``scaling=None`` runs the rescaling self-test on the first draw and falls
    back to fixed epipole scalings if the long equation is not scale invariant.
    """
    cls = _require_quad(fset, CASE2)
    rng = np.random.default_rng(seed)
    table = epipole_table(fset)
    res = _noncollinear_triples(fset, table)
    diag = []
    passes = []
    for d in range(draws):
        aux = draw_auxiliary(fset, aux_strategy, rng)
        if scaling is None:
            drift = scale_selftest(fset, aux, rng)
            scaling = "canonical" if max(drift.values()) <= SCALE_SELFTEST_TOL else "fixed"
            if scaling == "fixed":
                diag.append(f"scale self-test failed ({drift}); using fixed epipole scalings")
        draw_res = {f"case2:draw{d}:{k}": v for k, v in case2_residuals(fset, aux, scaling).items()}
        res.update(draw_res)
        passes.append(all(v <= tol for v in draw_res.values()))
    triples_ok = all(v <= tol for k, v in res.items() if k.startswith("triple"))
    if not triples_ok or not any(passes):
        verdict = INCOMPATIBLE
    elif all(passes):
        verdict = COMPATIBLE
    else:
        verdict = DEGENERATE
        diag.append(f"auxiliary draws disagree: {passes}")
    return CompatibilityReport(verdict, cls, res, tol, diag, {"scaling": scaling, "aux_strategy": aux_strategy})


def _off_plane_point(points, rng, margin=0.1, attempts=MAX_AUX_REDRAWS):
    normal = np.linalg.svd(np.array(points))[2][-1]
    for _ in range(attempts):
        p = normalize(rng.normal(size=4))
        if abs(normal @ p) > margin:
            return p
    raise ReconstructionFailed("could not sample a point off the center plane")


def check_case2_simpler(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, seed=0) -> CompatibilityReport:
    """Coplanar-center test via the three-term form with projected auxiliary points.

    Reconstructs C1, C2, C3 in normal form, images a random off-plane point
    p5 to get e_i^5 = C_i p5 (i <= 3), intersects two epipolar lines for
    e_4^5 and tests the column-normalized determinant of the epipolar-number
    matrix.
    """
    from .reconstruction import case2_first_three

    cls = _require_quad(fset, CASE2)
    rng = np.random.default_rng(seed)
    table = epipole_table(fset)
    res = _noncollinear_triples(fset, table)
    aux = draw_auxiliary(fset, "random", rng)
    res.update({f"case2:{k}": v for k, v in case2_residuals(fset, aux).items() if k != "long"})
    if any(v > tol for v in res.values()):
        return CompatibilityReport(INCOMPATIBLE, cls, res, tol,
                                   ["triplewise or short equations fail; simplified form not evaluated"])
    cams, _ = case2_first_three(fset, rng)
    p5 = _off_plane_point([camera_center(C) for C in cams], rng)
    pts = {i: normalize(C @ p5) for i, C in enumerate(cams, start=1)}
    pts[4] = normalize(np.cross(fset.F(4, 1) @ pts[1], fset.F(4, 2) @ pts[2]))
    stable = epipole_table(fset, AuxiliaryPoints5(pts, "projected"))
    e = lambda code: _e(fset, stable, code)  # noqa: E731
    M = np.array([
        [0.0, e("1425"), e("1435")],
        [e("2415"), 0.0, e("2435")],
        [e("5415"), e("5425"), e("5435")],
    ])
    res["case2:simpler"] = float(abs(np.linalg.det(M)) / max(np.prod(np.linalg.norm(M, axis=0)), FLOOR))
    return CompatibilityReport(_verdict(res, tol), cls, res, tol)


# -- Case 3 and Case 4 ----------------------------------------------------------

def check_case3(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat) -> CompatibilityReport:
    cls = _require_quad(fset, CASE3)
    table = epipole_table(fset)
    res = {}
    for tri in combinations((1, 2, 3, 4), 3):
        branch = COLLINEAR if tri == tuple(cls.triple) else NON_COLLINEAR
        res.update(triple_residuals(fset, tri, branch, table))
    return CompatibilityReport(_verdict(res, tol), cls, res, tol)


def check_case4(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat) -> CompatibilityReport:
    if fset.n < 3:
        raise ValueError("need at least three views")
    if not all_epipoles_coincide(fset):
        raise WrongCase("epipoles within some image do not all coincide")
    table = epipole_table(fset)
    res = {}
    for tri in combinations(fset.views(), 3):
        res.update(triple_residuals(fset, tri, COLLINEAR, table))
    label = CASE4 if fset.n == 4 else "CollinearN"
    return CompatibilityReport(_verdict(res, tol), label, res, tol)


# -- dispatch -----------------------------------------------------------------

def _folded(fn, cls, tol):
    try:
        return fn()
    except GeometryError as exc:
        return CompatibilityReport(DEGENERATE, cls, {}, tol, [f"{exc.code}: {exc}"])


def check_quadruple(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, aux_strategy="random",
                    draws=3, seed=0) -> CompatibilityReport:
    if fset.n != 4:
        raise ValueError("check_quadruple needs exactly four views")
    cls = classify_quadruple(fset)
    if cls.label == AMBIGUOUS:
        return CompatibilityReport(DEGENERATE, cls, {}, tol, ["ambiguous epipole configuration"])
    dispatch = {
        CASE1: lambda: check_case1(fset, tol),
        CASE2: lambda: check_case2(fset, tol, aux_strategy, draws, seed),
        CASE3: lambda: check_case3(fset, tol),
        CASE4: lambda: check_case4(fset, tol),
    }
    report = _folded(dispatch[cls.label], cls, tol)
    report.classification = cls
    return report


def check_multiview(fset: FundamentalSet, tol=DEFAULT_TOL.tol_compat, aux_strategy="random",
                    draws=3, seed=0) -> CompatibilityReport:
    """Any number of views; for n >= 4 every four-view subset is checked."""
    if fset.n == 2:
        return CompatibilityReport(COMPATIBLE, "Pair", {}, tol, ["a single fundamental matrix is always compatible"])
    if fset.n == 3:
        cls = classify_triple(fset)
        if cls.label == AMBIGUOUS:
            return CompatibilityReport(DEGENERATE, cls, {}, tol, ["ambiguous epipole configuration"])
        return _folded(lambda: check_triple(fset, tol), cls, tol)
    if all_epipoles_coincide(fset):
        return check_case4(fset, tol)

    residuals, subsets, diag = {}, [], []
    for views in combinations(fset.views(), 4):
        rep = check_quadruple(fset.subset(views), tol, aux_strategy, draws, seed)
        tag = ",".join(map(str, views))
        for name, value in rep.residuals.items():
            # names after the slash use the subset's local view numbering 1..4
            residuals[f"{{{tag}}}/{name}"] = value
        diag.extend(f"{{{tag}}}: {m}" for m in rep.diagnostics)
        subsets.append({
            "views": list(views),
            "case": rep.label,
            "verdict": rep.verdict,
            "max_residual": rep.max_residual(),
        })
    verdicts = {s["verdict"] for s in subsets}
    if INCOMPATIBLE in verdicts:
        verdict = INCOMPATIBLE
    elif DEGENERATE in verdicts:
        verdict = DEGENERATE
    else:
        verdict = COMPATIBLE
    worst = max(subsets, key=lambda s: (s["verdict"] != COMPATIBLE, s["max_residual"]))
    details = {"subsets": subsets, "worst_subset": worst["views"], "worst_residual": worst["max_residual"]}
    return CompatibilityReport(verdict, "Multiview", residuals, tol, diag, details)

