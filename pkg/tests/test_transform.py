import numpy as np
import pytest

from fractiling.errors import InvalidWord, OutsideExpansion
from fractiling.maps import Ifs, MapSpec
from fractiling.presets import get_preset
from fractiling.regions import Intervals1D, Raster
from fractiling.symbols import parse_word
from fractiling.transform import (OmegaAddress, TransformSystem, coordinate_points,
                                  extended_coordinate, extended_section, fast_basin,
                                  fractal_transform_point, fractal_transform_points,
                                  interval_fast_basin_oracle, pixel_centers, sample_nearest,
                                  section_address, tops_section, transform_image,
                                  window_occupancy)


def system(name, **kw):
    p = get_preset(name, **kw)
    A = p.attractor()
    return p, TransformSystem(p.system, A, tops_section(p.system, A))


def test_address_constraint():
    OmegaAddress((1, 2), (1, 1))
    with pytest.raises(InvalidWord):
        OmegaAddress((1, 2), (2, 1))
    assert str(OmegaAddress((1,), (2, 2))) == "1.22"


def test_binary_addresses_on_interval():
    p, S = system("interval")
    # the tops section gives the binary expansion, 1 = digit 0
    assert section_address(p.system, S.A, S.S, 0.3, depth=6) == (1, 2, 1, 1, 2, 2)
    x, err = coordinate_points(p.system, np.array([[1, 2, 1, 1, 2, 2] + [1] * 40]))
    assert x[0, 0] == pytest.approx(0.3, abs=1 / 64)
    assert err < 1e-9


@pytest.mark.parametrize("x", [0.3, 5.25, 17.0, 63.9])
def test_extended_round_trip_on_interval(x):
    p, S = system("interval")
    th = parse_word("(1)", 2)
    addr = extended_section(p.system, S.A, S.S, th, x, k_max=12, depth=48)
    # theta = 111... expands [0,1] to [0, 2^k]
    assert addr.k == int(np.ceil(np.log2(max(x, 1))))
    assert extended_coordinate(p.system, addr)[0] == pytest.approx(x, abs=1e-9)
    with pytest.raises(OutsideExpansion):
        extended_section(p.system, S.A, S.S, th, -1.0, k_max=12)


def test_transform_between_interval_systems():
    # tops addresses of the overlapping system survive a trip through the binary one
    _, src = system("overlap1d", b=0.65)
    _, dst = system("interval")
    th = parse_word("(1)", 2)
    pts = np.linspace(0.01, 0.99, 25)[:, None]
    y, ok = fractal_transform_points(src, dst, th, pts, k_max=4)
    assert ok.all()
    assert np.all((y >= 0) & (y <= 1))
    assert fractal_transform_point(src, dst, th, 0.0)[0] == pytest.approx(0.0, abs=1e-9)
    back, _ = fractal_transform_points(dst, src, th, y, k_max=4)
    assert np.allclose(back, pts, atol=1e-6)


def test_transform_identity_on_square():
    F = Ifs(tuple(MapSpec.from_coeffs([0.5, 0, 0, 0.5, x, y]) for x in (0, 0.5) for y in (0, 0.5)))
    from fractiling.regions import Polygon

    A = Polygon([[0, 0], [1, 0], [1, 1], [0, 1]])
    T = TransformSystem(F, A, tops_section(F, A))
    th = parse_word("(1)", 4)
    pts = np.random.default_rng(0).uniform(0.02, 3.9, (50, 2))
    y, ok = fractal_transform_points(T, T, th, pts, k_max=6)
    assert ok.all() and np.allclose(y, pts, atol=1e-9)


def test_transform_image_keeps_identity_picture():
    _, S = system("chair")
    th = get_preset("chair").word()
    img = np.zeros((16, 16, 3), np.uint8)
    img[..., 0] = np.arange(16)[None] * 10
    win = (0.1, 0.1, 0.9, 0.9)
    out = transform_image(S, S, th, img, win, win, k_max=4, depth=24)
    assert (out == img).all(axis=-1).mean() > 0.9


def test_pixel_sampling():
    c = pixel_centers((0, 0, 2, 1), (1, 2))
    assert np.allclose(c, [[0.5, 0.5], [1.5, 0.5]])
    img = np.array([[1, 2], [3, 4]])
    v = sample_nearest(img, (0, 0, 2, 2), np.array([[0.5, 1.5], [1.5, 0.5], [5, 5], [np.nan, 0]]), -1)
    assert v.tolist() == [1, 4, -1, -1]


def test_fast_basin_matches_oracle():
    p = get_preset("overlap1d", b=0.65)
    for k in range(5):
        got = fast_basin(p.system, p.attractor(), k, (-4, 4))
        want = interval_fast_basin_oracle(p.system, (0, 1), k, (-4, 4))
        assert [tuple(iv) for iv in got.intervals] == want


def test_window_occupancy():
    r = Raster.box([0, 0], [1, 1], 8)
    assert window_occupancy(r, ([0, 0], [2, 1])) == pytest.approx(0.5)
    assert window_occupancy(r, ([0, 0], [1, 1]), erosion_cells=1) == pytest.approx(36 / 64)
    assert window_occupancy(Raster.empty(2, 8), ([0, 0], [1, 1])) == 0.0
    assert isinstance(fast_basin(get_preset("interval").system, Intervals1D.of((0, 1)), 0,
                                 (0, 1)), Intervals1D)


def test_ties_take_the_top_address():
    p, S = system("interval")
    # 1/4 = 0.01000... = 0.00111...; the larger address wins
    addr = section_address(p.system, S.A, S.S, 0.25, depth=8)
    assert addr == (1, 2, 1, 1, 1, 1, 1, 1)
    assert coordinate_points(p.system, np.array([addr]))[0][0, 0] == pytest.approx(0.25, abs=1e-2)
