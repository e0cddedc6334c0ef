import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fmcompat.errors import DegenerateFrame, LinesIdentical, NoUniqueSolution, RankMismatch, ZeroInput
from fmcompat.projective import (
    ZERO,
    Line3,
    Tolerances,
    back_projected_line,
    camera_center,
    camera_from_constraints,
    collinearity_defect,
    constraint_residual,
    meet_image_lines,
    meet_lines,
    normalize,
    proj_equal,
    right_nullvector,
    sin_angle,
    skew,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec3 = arrays(float, 3, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3)


def test_normalize_examples():
    np.testing.assert_allclose(normalize([0, 0, -2]), [0, 0, 1])
    np.testing.assert_allclose(normalize([3, 4, 0]), [0.6, 0.8, 0])
    with pytest.raises(ZeroInput):
        normalize([0, 0, 0])


def test_normalize_sign_tie_goes_to_lowest_index():
    np.testing.assert_allclose(normalize([-1, 1, 0]), np.array([1, -1, 0]) / np.sqrt(2))


@given(arrays(float, 4, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_normalize_invariants(v):
    u = normalize(v)
    assert abs(np.linalg.norm(u) - 1) <= 1e-12
    k = np.argmax(np.abs(u))
    assert u[k] > 0
    np.testing.assert_allclose(normalize(-3.5 * v), u, atol=1e-12)


def test_proj_equal_examples():
    ok, scale = proj_equal([1, 2, 3], [-2, -4, -6])
    assert ok and scale == pytest.approx(-0.5)
    assert proj_equal([1, 0, 0], [0, 1, 0]) == (False, 0)
    ok, scale = proj_equal([0, 0, 1], [0, 0, 1])
    assert ok and scale == pytest.approx(1)


@given(vec3, st.floats(1e-6, 1e6), st.booleans())
def test_proj_equal_under_scaling(v, lam, neg):
    lam = -lam if neg else lam
    assert proj_equal(v, lam * v)[0]


def test_skew_examples():
    np.testing.assert_array_equal(skew([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])
    np.testing.assert_array_equal(skew([0, 0, 0]), np.zeros((3, 3)))
    np.testing.assert_array_equal(skew([0, 0, 1]) @ [1, 0, 0], [0, 1, 0])


def test_skew_is_cross_on_basis():
    E = np.eye(3)
    for a in E:
        for b in E:
            np.testing.assert_array_equal(skew(a) @ b, np.cross(a, b))


@given(vec3, vec3)
def test_skew_is_cross(t, u):
    np.testing.assert_allclose(skew(t) @ u, np.cross(t, u), atol=1e-14 * 100)


def test_right_nullvector_examples():
    np.testing.assert_allclose(right_nullvector(skew([0, 0, 1]), 2), [0, 0, 1], atol=1e-15)
    with pytest.raises(RankMismatch):
        right_nullvector(np.eye(3), 2)
    P = np.hstack([np.eye(3), np.zeros((3, 1))])
    np.testing.assert_allclose(right_nullvector(P, 3), [0, 0, 0, 1], atol=1e-15)


def test_camera_center_examples():
    np.testing.assert_allclose(camera_center(np.hstack([np.eye(3), np.zeros((3, 1))])), [0, 0, 0, 1], atol=1e-15)
    C = np.hstack([np.eye(3), [[0], [0], [1]]])
    # x + t w = 0 with t = e3 gives (0, 0, -1, 1)
    assert proj_equal(camera_center(C), [0, 0, -1, 1])[0]
    with pytest.raises(RankMismatch):
        camera_center(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 0, 0]], dtype=float))


def test_collinearity_defect_examples():
    assert collinearity_defect([[1, 0, 0], [0, 1, 0], [1, 1, 0]]) <= 1e-12
    assert collinearity_defect(np.eye(3)) == pytest.approx(1)
    assert collinearity_defect([[1, 0, 0], [0, 1, 0]]) == 0


def test_back_projected_line_examples():
    P = np.hstack([np.eye(3), np.zeros((3, 1))])
    ln = back_projected_line(P, [0, 0, 1])
    for z in ([0, 0, 0, 1], [0, 0, 1, 0]):
        assert ln.distance(z) <= 1e-12
    ln = back_projected_line(P, [1, 0, 0])
    for z in ([0, 0, 0, 1], [1, 0, 0, 0]):
        assert ln.distance(z) <= 1e-12
    mid = ln.point(0.5, 0.5)
    assert proj_equal(P @ mid, [1, 0, 0])[0]


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_back_projection_round_trip(seed):
    rng = np.random.default_rng(seed)
    C = rng.normal(size=(3, 4))
    z = rng.normal(size=4)
    assert sin_angle(z, camera_center(C)) > 1e-3
    assert back_projected_line(C, C @ z).distance(z) <= 1e-10


def test_line_generators_must_differ():
    with pytest.raises(LinesIdentical):
        Line3(np.array([1.0, 0, 0, 0]), np.array([-2.0, 0, 0, 0]))


def test_meet_lines_axes():
    origin = np.array([0.0, 0, 0, 1])
    x_axis = Line3(origin, np.array([1.0, 0, 0, 0]))
    y_axis = Line3(origin, np.array([0.0, 1, 0, 0]))
    p, res = meet_lines([x_axis, y_axis])
    assert res <= 1e-15 and proj_equal(p, origin)[0]


def test_meet_lines_parallel_meet_at_infinity():
    a = Line3(np.array([0.0, 0, 0, 1]), np.array([1.0, 0, 0, 1]))
    b = Line3(np.array([0.0, 1, 0, 1]), np.array([1.0, 1, 0, 1]))
    p, res = meet_lines([a, b])
    assert res <= 1e-15 and proj_equal(p, [1, 0, 0, 0])[0]


def test_meet_lines_skew_pair_matches_eigen_oracle(rng):
    a = Line3(np.array([0.0, 0, 0, 1]), np.array([1.0, 0, 0, 1]))
    b = Line3(np.array([0.0, 0, 1, 1]), np.array([0.0, 1, 1, 1]))
    _, res = meet_lines([a, b])
    assert res > 1e-8
    # oracle: residual^2 = min over unit z of the summed squared distances to both 2-planes
    Q = sum(np.eye(4) - ln.basis().T @ ln.basis() for ln in (a, b))
    assert res**2 == pytest.approx(np.linalg.eigvalsh(Q)[0], rel=1e-10)
    samples = rng.normal(size=(20000, 4))
    samples /= np.linalg.norm(samples, axis=1, keepdims=True)
    brute = min(a.distance(z) ** 2 + b.distance(z) ** 2 for z in samples)
    assert res**2 <= brute <= res**2 + 0.05


def test_meet_lines_three_concurrent(rng):
    for _ in range(20):
        p = rng.normal(size=4)
        lines = [Line3(p, rng.normal(size=4)) for _ in range(3)]
        q, res = meet_lines(lines)
        assert res <= 1e-10 and sin_angle(p, q) <= 1e-9


def test_meet_lines_identical_rejected():
    a = Line3(np.array([0.0, 0, 0, 1]), np.array([1.0, 0, 0, 1]))
    b = Line3(np.array([2.0, 0, 0, 1]), np.array([3.0, 0, 0, 1]))
    with pytest.raises(LinesIdentical):
        meet_lines([a, b])


def test_meet_image_lines():
    p, res = meet_image_lines([[1, 0, 0], [0, 1, 0], [1, 1, 0]])
    assert res <= 1e-15 and proj_equal(p, [0, 0, 1])[0]


STANDARD = [np.eye(4)[0], np.eye(4)[1], np.eye(4)[2], np.eye(4)[3], np.ones(4)]


def test_camera_from_standard_frame():
    images = [np.eye(3)[0], np.eye(3)[1], np.eye(3)[2], ZERO, np.ones(3)]
    C = camera_from_constraints(list(zip(STANDARD, images)))
    assert proj_equal(C, np.hstack([np.eye(3), np.zeros((3, 1))]))[0]


def test_camera_from_inconsistent_constraints():
    images = [np.eye(3)[0], np.eye(3)[1], np.eye(3)[2], ZERO, np.ones(3)]
    extra = (np.array([1.0, 2, 3, 4]), np.array([3.0, 1, 2]))  # permuted image of the true map
    with pytest.raises(NoUniqueSolution):
        camera_from_constraints(list(zip(STANDARD, images)) + [extra])


def test_camera_from_degenerate_frame():
    images = [np.eye(3)[0], np.eye(3)[1], np.eye(3)[2], ZERO, np.ones(3)]
    world = STANDARD[:4] + [np.array([1.0, 1, 0, 0])]
    with pytest.raises(DegenerateFrame):
        camera_from_constraints(list(zip(world, images)))
    with pytest.raises(DegenerateFrame):
        camera_from_constraints(list(zip(STANDARD, [ZERO] * 5)))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_camera_from_constraints_round_trip(seed):
    rng = np.random.default_rng(seed)
    C0 = rng.normal(size=(3, 4))
    p = camera_center(C0)
    world = [rng.normal(size=4) for _ in range(4)]
    cons = [(w, C0 @ w) for w in world[:4]] + [(p, ZERO)]
    C = camera_from_constraints(cons)
    assert proj_equal(C, C0, 1e-8)[0]
    for w, x in cons:
        assert constraint_residual(C, w, x) <= 1e-9


def test_tolerances_validated():
    with pytest.raises(ValueError):
        Tolerances(tol_rank=0)
    with pytest.raises(ValueError):
        Tolerances(tol_classify=1e-9, tol_equal=1e-8)
