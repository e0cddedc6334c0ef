import numpy as np
import pytest

from conftest import set_from_translations
from fmcompat.classify import CASE3
from fmcompat.compatibility import (
    COMPATIBLE,
    DEGENERATE,
    INCOMPATIBLE,
    case1_identity_residual,
    case1_products,
    case2_residuals,
    check_case1,
    check_case1_geometric,
    check_case2,
    check_case2_simpler,
    check_case3,
    check_case4,
    check_multiview,
    check_quadruple,
    check_triple,
    draw_auxiliary,
    fixed_scaling_table,
    rescaled_table,
    scale_selftest,
)
from fmcompat.errors import AmbiguousClassification, WrongCase
from fmcompat.fundamental import FundamentalSet, epipole_table, make_set
from fmcompat.projective import skew
from fmcompat.synth import generate_set, perturb_set, random_rank2_set, scramble_interior

E = np.eye(3)
O = np.zeros(3)


def test_triple_noncollinear_example():
    fset = set_from_translations(O, E[0], E[1])
    r = check_triple(fset)
    assert r.verdict == COMPATIBLE and r.max_residual() <= 1e-12


def test_triple_collinear_example():
    fset = set_from_translations(O, E[0], 2 * E[0])
    # hand computation: F31 [e1]_x F12 = 2 skew(e1)^3 ~ skew(e1) ~ F32
    lhs = fset.F(3, 1) @ skew(fset.epipole(2, 1)) @ fset.F(1, 2)
    assert abs(abs(np.vdot(lhs / np.linalg.norm(lhs), fset.F(3, 2))) - 1) <= 1e-12
    assert check_triple(fset).verdict == COMPATIBLE


def same_epipoles(fset, pair, seed):
    """Replace F(i, j) by an unrelated rank-2 matrix with the same two epipoles."""
    i, j = pair
    M = np.random.default_rng(seed).normal(size=(3, 3))
    raw = {k: v.matrix for k, v in fset.entries.items()}
    raw[i, j] = skew(fset.epipole(j, i)) @ M @ skew(fset.epipole(i, j))
    return make_set(fset.n, raw)


def test_triple_same_epipoles_incompatible():
    fset = set_from_translations(O, E[0], E[1])
    assert check_triple(same_epipoles(fset, (2, 3), 0)).verdict == INCOMPATIBLE
    # fixing every epipole in image 3 leaves the non-collinear conditions intact
    assert check_triple(scramble_interior(fset, (2, 3), seed=0)).verdict == COMPATIBLE
    line = set_from_translations(O, E[0], 2 * E[0])
    assert check_triple(scramble_interior(line, (2, 3), seed=0)).verdict == INCOMPATIBLE


def test_triple_ambiguous_raises():
    generic = set_from_translations(O, E[0], E[1])
    line = set_from_translations(O, E[0], 2 * E[0])
    mixed = FundamentalSet(3, {(1, 2): line.entries[1, 2], (1, 3): line.entries[1, 3], (2, 3): generic.entries[2, 3]})
    with pytest.raises(AmbiguousClassification):
        check_triple(mixed)
    assert check_multiview(mixed).verdict == DEGENERATE


def test_case1_examples():
    fset = set_from_translations(O, E[0], E[1], E[2])
    r = check_case1(fset)
    assert r.verdict == COMPATIBLE and r.residuals["case1:identity"] <= 1e-10
    flagged = sum(check_case1(perturb_set(fset, (1, 2), 1e-3, s)).verdict == INCOMPATIBLE for s in range(100))
    assert flagged == 100
    with pytest.raises(WrongCase):
        check_case1(generate_set("Case2", 4, 0))


def test_case1_identity_by_hand():
    fset = generate_set("Case1", 4, 0)
    table = epipole_table(fset)
    L, R = case1_products(fset, table)
    e = lambda s, i, j, t: table[s, i] @ fset.F(i, j) @ table[t, j]  # noqa: E731
    L0 = e(4, 1, 2, 3) * e(2, 1, 3, 4) * e(3, 1, 4, 2) * e(4, 2, 3, 1) * e(1, 2, 4, 3) * e(2, 3, 4, 1)
    R0 = e(3, 1, 2, 4) * e(4, 1, 3, 2) * e(2, 1, 4, 3) * e(1, 2, 3, 4) * e(3, 2, 4, 1) * e(1, 3, 4, 2)
    assert (L, R) == pytest.approx((L0, R0), rel=1e-12)
    assert case1_identity_residual(fset, table)[0] == pytest.approx(abs(L0 - R0) / max(abs(L0), abs(R0)), abs=1e-15)


def test_case1_geometric_agrees():
    fset = generate_set("Case1", 4, 0)
    assert check_case1_geometric(fset).verdict == check_case1(fset).verdict == COMPATIBLE
    bad = perturb_set(fset, (1, 2), 1e-3, 0)
    assert check_case1_geometric(bad).verdict == check_case1(bad).verdict == INCOMPATIBLE
    # perturbation that keeps every epipole: only the identity itself can notice
    scr = scramble_interior(fset, (1, 2), seed=0)
    assert check_case1_geometric(scr).verdict == check_case1(scr).verdict == INCOMPATIBLE


def test_case2_examples():
    fset = set_from_translations(O, E[0], E[1], E[0] + E[1])
    assert check_case2(fset).verdict == COMPATIBLE
    bad = scramble_interior(fset, (3, 4), seed=0)
    assert check_case2(bad).verdict == INCOMPATIBLE
    assert check_case2_simpler(bad).verdict == INCOMPATIBLE
    assert check_case2_simpler(fset).verdict == COMPATIBLE
    with pytest.raises(WrongCase):
        check_case2(generate_set("Case1", 4, 0))


def test_case2_remark49_agrees():
    for seed in range(30):
        fset = generate_set("Case2", 4, seed)
        a = check_case2(fset, aux_strategy="remark49", seed=seed)
        b = check_case2(fset, aux_strategy="random", seed=seed)
        assert a.verdict == b.verdict == COMPATIBLE
        bad = scramble_interior(fset, (1, 3), seed=seed)
        assert check_case2(bad, aux_strategy="remark49").verdict == check_case2(bad).verdict


def test_aux_points_independent():
    fset = generate_set("Case2", 4, 0)
    aux = draw_auxiliary(fset, "random", np.random.default_rng(0))
    for i in range(1, 5):
        j, k = [v for v in range(1, 5) if v != i][:2]
        M = np.column_stack([fset.epipole(j, i), fset.epipole(k, i), aux[i]])
        assert abs(np.linalg.det(M)) > 1e-6
    with pytest.raises(ValueError):
        draw_auxiliary(fset, "bogus")


def test_fixed_scaling_table_sums():
    fset = generate_set("Case2", 4, 2)
    t = fixed_scaling_table(fset, epipole_table(fset))
    for i in range(1, 5):
        j, k, l = [v for v in range(1, 5) if v != i]
        np.testing.assert_allclose(t[j, i] + t[k, i], t[l, i], atol=1e-12)


def test_fixed_scaling_agrees_with_canonical():
    fset = generate_set("Case2", 4, 4)
    aux = draw_auxiliary(fset, "random", np.random.default_rng(0))
    canon = case2_residuals(fset, aux, "canonical")
    fixed = case2_residuals(fset, aux, "fixed")
    assert max(canon.values()) <= 1e-9 and max(fixed.values()) <= 1e-9
    bad = scramble_interior(fset, (2, 4), seed=0)
    aux = draw_auxiliary(bad, "random", np.random.default_rng(0))
    assert case2_residuals(bad, aux, "canonical")["long"] > 1e-6
    assert case2_residuals(bad, aux, "fixed")["long"] > 1e-6


def test_scale_selftest():
    for case in ("Case1", "Case2"):
        for seed in range(20):
            fset = generate_set(case, 4, seed)
            rng = np.random.default_rng(seed)
            if case == "Case2":
                aux = draw_auxiliary(fset, "random", rng)
                assert max(scale_selftest(fset, aux, rng).values()) <= 1e-8
            else:
                table = epipole_table(fset)
                drift = abs(case1_identity_residual(fset, table)[0] - case1_identity_residual(fset, rescaled_table(table, rng))[0])
                assert drift <= 1e-8


def test_case2_simpler_resamples_plane_points():
    for seed in range(100):
        assert check_case2_simpler(generate_set("Case2", 4, seed), seed=seed).verdict == COMPATIBLE


def test_case3_examples():
    fset = set_from_translations(O, E[0], 2 * E[0], E[1])
    assert check_case3(fset).verdict == COMPATIBLE
    assert check_case3(scramble_interior(fset, (1, 2), seed=0)).verdict == INCOMPATIBLE
    # Case 3 is decided triplewise, and fixing every epipole preserves the non-collinear conditions
    assert check_case3(scramble_interior(fset, (1, 4), seed=0)).verdict == COMPATIBLE
    relabeled = fset.subset([4, 1, 2, 3])
    r = check_case3(relabeled)
    assert r.verdict == COMPATIBLE and r.classification.label == CASE3 and r.classification.triple == (2, 3, 4)


def test_case4_examples():
    assert check_case4(set_from_translations(O, E[0], 2 * E[0], 3 * E[0])).verdict == COMPATIBLE
    five = generate_set("CollinearN", 5, 0)
    r = check_case4(five)
    assert r.verdict == COMPATIBLE and r.label == "CollinearN"
    assert check_case4(scramble_interior(five, (2, 4), seed=0)).verdict == INCOMPATIBLE
    with pytest.raises(WrongCase):
        check_case4(generate_set("Case1", 4, 0))


@pytest.mark.parametrize("case", ["Case1", "Case2", "Case3", "Case4"])
def test_check_quadruple_dispatch(case):
    fset = generate_set(case, 4, 8)
    r = check_quadruple(fset)
    assert r.verdict == COMPATIBLE and r.label == case
    # (1, 2) sits in the collinear triple for Case3 and Case4, and touches the quad condition otherwise
    assert check_quadruple(scramble_interior(fset, (1, 2), seed=8)).verdict == INCOMPATIBLE


def test_random_sextuples_never_compatible():
    for seed in range(200):
        assert check_quadruple(random_rank2_set(4, seed)).verdict in (INCOMPATIBLE, DEGENERATE)


def test_multiview_examples():
    fset = generate_set("GenericN", 6, 0)
    r = check_multiview(fset)
    assert r.verdict == COMPATIBLE and len(r.details["subsets"]) == 15
    bad = check_multiview(perturb_set(fset, (2, 5), 1e-3, 0))
    assert bad.verdict == INCOMPATIBLE
    failing = [s["views"] for s in bad.details["subsets"] if s["verdict"] != COMPATIBLE]
    assert failing and all(2 in v and 5 in v for v in failing)
    assert check_multiview(random_rank2_set(2, 3)).verdict == COMPATIBLE


def test_report_keeps_residuals_on_failure():
    fset = perturb_set(generate_set("Case1", 4, 0), (1, 2), 1e-3, 0)
    r = check_quadruple(fset)
    assert r.verdict == INCOMPATIBLE and r.residuals and r.max_residual() > r.tolerance
