import numpy as np
import pytest

from fractiling.attractor import attractor_raster, hausdorff_distance
from fractiling.errors import ConfigError
from fractiling.maps import estimate_contraction
from fractiling.presets import PRESETS, get_preset
from fractiling.regions import Polygon, rasterize


@pytest.mark.parametrize("name", list(PRESETS))
def test_presets_are_contractive_and_parse_their_word(name):
    p = get_preset(name)
    w = p.word()
    assert len(w.prefix(16)) == 16
    if not p.is_graph:
        assert estimate_contraction(p.system) < 1


@pytest.mark.parametrize("name", ["chair", "triangle", "foldout"])
def test_exact_attractors_are_fixed(name):
    p = get_preset(name)
    A = p.attractor()
    assert isinstance(A, Polygon)
    ras = attractor_raster(p.system, 32)
    # resampling blurs by up to a cell per step, damped by the contraction
    lam = estimate_contraction(p.system)
    assert hausdorff_distance(ras, rasterize(A, 32)) <= (1 / (1 - lam) + 1) / 32
    # the images tile A: areas add up
    total = sum(abs(np.linalg.det(m.linear)) for m in p.system.maps) * A.area()
    assert total == pytest.approx(A.area())


def test_chair_word_is_zero_based():
    p = get_preset("chair")
    assert p.word().prefix(4) == (2, 3, 4, 1)


def test_foldout_parameter():
    a = get_preset("foldout", e=(0.5, 0.5))
    b = get_preset("foldout")
    assert a.system.maps[0].fixed_point() == pytest.approx(b.system.maps[0].fixed_point())
    assert not np.allclose(a.system.matrices(), b.system.matrices())


def test_overlap_parameter():
    p = get_preset("overlap1d", b=0.6)
    assert p.system.maps[0].linear[0, 0] == pytest.approx(0.6)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        get_preset("nope")


def test_digit_preset_validation():
    p = get_preset("digit")
    assert p.system.n == 2
    # |D| must equal |det L|
    with pytest.raises(ConfigError, match="det"):
        get_preset("digit", D=[[0, 0], [1, 0], [0, 1]])
    # (1,1) = L (1,0): same coset of L Z^2 as the origin
    with pytest.raises(ConfigError, match="coset"):
        get_preset("digit", D=[[0, 0], [1, 1]])
    with pytest.raises(ConfigError, match="expanding"):
        get_preset("digit", L=[[1, 0], [0, 2]], D=[[0, 0], [0, 1]])
    ok = get_preset("digit", L=[[2, 0], [0, 2]], D=[[0, 0], [1, 0], [0, 1], [1, 1]])
    assert ok.system.n == 4
