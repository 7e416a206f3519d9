import numpy as np
import pytest

from fractiling.errors import DimMismatch, InvalidWord, NotContractive, SingularMap
from fractiling.maps import (Ifs, MapSpec, affine_from_points, all_words, compose, compose_batch,
                             coordinate_point, estimate_contraction, inverse_compose,
                             invariant_ball)
from fractiling.symbols import parse_word


def rot(angle, scale=1.0, offset=(0.0, 0.0)):
    return MapSpec.similarity(scale, angle, offset)


def test_affine_last_row_is_forced():
    m = MapSpec(np.array([[2.0, 0, 1], [0, 3, 2], [5, 6, 7]]))
    assert np.array_equal(m.matrix[-1], [0, 0, 1])
    assert np.allclose(m.apply([1, 1]), [3, 5])


def test_coeffs_round_trip_and_layout():
    c = [0.5, -0.25, 0.125, 0.75, 1.0, -2.0]
    m = MapSpec.from_coeffs(c)
    assert m.coeffs == c
    # (x, y) -> (a x + b y + e, c x + d y + f)
    assert np.allclose(m.apply([2.0, 4.0]), [0.5 * 2 - 0.25 * 4 + 1, 0.125 * 2 + 0.75 * 4 - 2])
    one = MapSpec.affine([[0.5]], [0.25])
    assert one.coeffs == [0.5, 0.25]


def test_projective_divides_by_last_coordinate():
    h = MapSpec.homography([[1, 0, 0], [0, 1, 0], [1, 0, 2]])
    assert np.allclose(h.apply([2.0, 3.0]), [2 / 4, 3 / 4])
    with pytest.raises(ValueError):
        h.apply([-2.0, 0.0])


def test_compose_applies_right_map_first():
    f = MapSpec.affine([[2.0]], [1.0])
    g = MapSpec.affine([[3.0]], [0.0])
    assert np.allclose((f @ g).apply([1.0]), [7.0])
    assert np.allclose((g @ f).apply([1.0]), [9.0])


def test_inverse_and_singular():
    m = rot(0.3, 0.7, (1, 2))
    x = np.random.default_rng(0).normal(size=(5, 2))
    assert np.allclose(m.inverse().apply(m.apply(x)), x)
    s = MapSpec.affine([[1.0, 2.0], [2.0, 4.0]], [0, 0])
    assert not s.is_invertible()
    with pytest.raises(SingularMap):
        s.inverse()
    with pytest.raises(SingularMap):
        Ifs((rot(0.1, 0.5), s))


def test_dimension_checks():
    with pytest.raises(DimMismatch):
        MapSpec.affine([[1.0, 0], [0, 1]], [0.0])
    with pytest.raises(DimMismatch):
        Ifs((MapSpec.identity(1), MapSpec.identity(2)))
    with pytest.raises(DimMismatch):
        MapSpec.identity(2).apply([1.0, 2.0, 3.0])


def test_fixed_point():
    m = rot(1.0, 0.5, (1.0, -1.0))
    p = m.fixed_point()
    assert np.allclose(m.apply(p), p)


def test_word_composition_order():
    F = Ifs((MapSpec.affine([[0.5]], [0.0]), MapSpec.affine([[0.5]], [0.5])))
    # f_1 o f_2 (x) = (x/2 + 1/2) / 2
    assert np.allclose(compose(F, (1, 2)).apply([0.0]), [0.25])
    assert np.allclose(inverse_compose(F, (1, 2)).matrix,
                       compose(F, (2, 1)).inverse().matrix)
    with pytest.raises(InvalidWord):
        compose(F, (3,))


def test_all_words_and_batch_match_loop():
    F = Ifs((rot(0.2, 0.5), rot(-0.4, 0.4, (1, 0)), rot(1.0, 0.3, (0, 1))))
    words = all_words(3, 3)
    assert words.shape == (27, 3)
    assert len({tuple(w) for w in words}) == 27
    batch = compose_batch(F.matrices(), words)
    for w, m in zip(words, batch):
        assert np.allclose(m, compose(F, w).matrix)


def test_contraction_and_ball():
    F = Ifs((rot(0.2, 0.5), rot(-0.4, 0.4, (1, 0))))
    assert estimate_contraction(F) == pytest.approx(0.5)
    c, r = invariant_ball(F)
    # the ball is mapped into itself
    for m in F.maps:
        assert np.linalg.norm(m.apply(c) - c) + 0.5 * r <= r + 1e-12
    G = Ifs((MapSpec.affine([[1.5]], [0.0]),), declared_contractive=False)
    with pytest.raises(NotContractive):
        invariant_ball(G)


def test_coordinate_point_converges_to_binary_expansion():
    F = Ifs((MapSpec.affine([[0.5]], [0.0]), MapSpec.affine([[0.5]], [0.5])))
    cp = coordinate_point(F, parse_word("(21)", 2), 60)
    # 0.101010... in binary is 2/3
    assert abs(cp.point[0] - 2 / 3) <= cp.error_bound + 1e-15
    assert cp.error_bound < 1e-15


def test_affine_from_points():
    src = [[0, 0], [1, 0], [0, 1]]
    m = rot(0.7, 2.0, (3, -1))
    dst = m.apply(np.array(src, float))
    assert affine_from_points(src, dst).allclose(m, 1e-12)
    with pytest.raises(SingularMap):
        affine_from_points([[0, 0], [1, 1], [2, 2]], dst)
