"""Camera-center geometry from epipole configurations.

Triples are NonCollinear or Collinear; quadruples fall into Case1 (centers not
coplanar), Case2 (coplanar, no three collinear), Case3 (exactly three
collinear) or Case4 (all collinear). Anything that fits none of the patterns
at the classification tolerance is reported as Ambiguous.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .fundamental import FundamentalSet
from .projective import DEFAULT_TOL, collinearity_defect, sin_angle

NON_COLLINEAR = "NonCollinear"
COLLINEAR = "Collinear"
CASE1, CASE2, CASE3, CASE4 = "Case1", "Case2", "Case3", "Case4"
AMBIGUOUS = "Ambiguous"


@dataclass(frozen=True)
class TripleClass:
    label: str
    coincidence: tuple  # sin-angle between the two epipoles, per image

    @property
    def ambiguous(self):
        return self.label == AMBIGUOUS


@dataclass(frozen=True)
class QuadClass:
    label: str
    triple: tuple | None = None  # collinear triple for Case3
    defects: tuple = ()  # collinearity defect per image
    coincidences: dict = field(default_factory=dict)  # (image, s, t) -> sin-angle

    @property
    def ambiguous(self):
        return self.label == AMBIGUOUS

    def as_dict(self):
        return {
            "label": self.label,
            "triple": list(self.triple) if self.triple else None,
            "defects": list(self.defects),
            "coincidences": {f"{i}:{s},{t}": v for (i, s, t), v in sorted(self.coincidences.items())},
        }


def classify_triple(fset: FundamentalSet, tol=DEFAULT_TOL.tol_classify) -> TripleClass:
    if fset.n != 3:
        raise ValueError("classify_triple needs exactly three views")
    d = []
    for i in (1, 2, 3):
        s, t = [k for k in (1, 2, 3) if k != i]
        d.append(sin_angle(fset.epipole(s, i), fset.epipole(t, i)))
    if min(d) > tol:
        label = NON_COLLINEAR
    elif max(d) <= tol:
        label = COLLINEAR
    else:
        label = AMBIGUOUS
    return TripleClass(label, tuple(d))


def _image_pattern(fset, i, tol):
    others = [s for s in fset.views() if s != i]
    eps = {s: fset.epipole(s, i) for s in others}
    coinc = {(i, s, t): sin_angle(eps[s], eps[t]) for s, t in combinations(others, 2)}
    defect = collinearity_defect([eps[s] for s in others])
    return others, coinc, defect


def classify_quadruple(fset: FundamentalSet, tol=DEFAULT_TOL.tol_classify) -> QuadClass:
    if fset.n != 4:
        raise ValueError("classify_quadruple needs exactly four views")
    coincidences, defects = {}, []
    same = {}
    for i in fset.views():
        _, coinc, defect = _image_pattern(fset, i, tol)
        coincidences.update(coinc)
        defects.append(defect)
        same[i] = {(s, t) for (_, s, t), v in coinc.items() if v <= tol}

    def distinct(i):
        return not same[i]

    def collinear(i):
        return defects[i - 1] <= tol

    views = list(fset.views())
    label, triple = AMBIGUOUS, None
    if all(distinct(i) and not collinear(i) for i in views):
        label = CASE1
    elif all(distinct(i) and collinear(i) for i in views):
        label = CASE2
    elif all(len(same[i]) == 3 for i in views):
        label = CASE4
    else:
        for abc in combinations(views, 3):
            (d,) = [v for v in views if v not in abc]
            ok = distinct(d) and collinear(d)
            for i in abc:
                pair = tuple(sorted(v for v in abc if v != i))
                ok = ok and same[i] == {pair}
            if ok:
                label, triple = CASE3, abc
                break
    return QuadClass(label, triple, tuple(defects), coincidences)


def all_epipoles_coincide(fset: FundamentalSet, tol=DEFAULT_TOL.tol_classify) -> bool:
    """True when, in every image, all epipoles are the same point."""
    for i in fset.views():
        eps = list(fset.epipoles_in(i).values())
        if any(sin_angle(eps[0], e) > tol for e in eps[1:]):
            return False
    return True
