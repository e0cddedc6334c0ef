from itertools import permutations

import numpy as np
import pytest

from conftest import set_from_translations
from fmcompat.classify import AMBIGUOUS, CASE1, CASE2, CASE3, CASE4, COLLINEAR, NON_COLLINEAR, classify_quadruple, classify_triple
from fmcompat.fundamental import FundamentalSet, apply_action
from fmcompat.synth import generate_set, random_action

E = np.eye(3)
O = np.zeros(3)


def test_triple_examples():
    assert classify_triple(set_from_translations(O, E[0], E[1])).label == NON_COLLINEAR
    assert classify_triple(set_from_translations(O, E[0], 2 * E[0])).label == COLLINEAR


def test_triple_mixed_is_ambiguous():
    generic = set_from_translations(O, E[0], E[1])
    line = set_from_translations(O, E[0], 2 * E[0])
    # image 1 keeps the collinear epipoles, the others see distinct ones
    mixed = FundamentalSet(3, {(1, 2): line.entries[1, 2], (1, 3): line.entries[1, 3], (2, 3): generic.entries[2, 3]})
    c = classify_triple(mixed)
    assert c.label == AMBIGUOUS and c.ambiguous


def test_triple_requires_three_views():
    with pytest.raises(ValueError):
        classify_triple(generate_set("Case1", 4, 0))


@pytest.mark.parametrize("ts, label", [
    ((O, E[0], E[1], E[2]), CASE1),
    ((O, E[0], E[1], E[0] + E[1]), CASE2),
    ((O, E[0], 2 * E[0], E[1]), CASE3),
    ((O, E[0], 2 * E[0], 3 * E[0]), CASE4),
])
def test_quadruple_examples(ts, label):
    c = classify_quadruple(set_from_translations(*ts))
    assert c.label == label
    if label == CASE3:
        assert c.triple == (1, 2, 3)


def test_quadruple_relabeled_case3():
    fset = set_from_translations(O, E[0], 2 * E[0], E[1])
    for perm in permutations(range(1, 5)):
        c = classify_quadruple(fset.subset(perm))
        assert c.label == CASE3
        assert {perm[k - 1] for k in c.triple} == {1, 2, 3}


@pytest.mark.parametrize("case", ["Case1", "Case2", "Case3", "Case4"])
def test_generator_agreement(case):
    for seed in range(200):
        assert classify_quadruple(generate_set(case, 4, seed)).label == case


@pytest.mark.parametrize("case", ["Case1", "Case2", "Case3", "Case4"])
def test_classification_action_invariant(case):
    for seed in range(50):
        fset = generate_set(case, 4, seed)
        base = classify_quadruple(fset)
        for k in range(10):
            moved = classify_quadruple(apply_action(fset, random_action(4, 1000 * seed + k)))
            assert (moved.label, moved.triple) == (base.label, base.triple)


def test_quadclass_as_dict():
    d = classify_quadruple(generate_set("Case3", 4, 0)).as_dict()
    assert d["label"] == CASE3 and d["triple"] == [1, 2, 3]
    assert len(d["defects"]) == 4 and len(d["coincidences"]) == 12
