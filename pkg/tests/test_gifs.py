import numpy as np
import pytest

from fractiling.errors import GraphError, InvalidWord
from fractiling.gifs import (Edge, EdgePath, Gifs, canonicalize_path, check_path, count_paths,
                             gifs_attractor, gifs_tiles, hull_polygons)
from fractiling.attractor import hausdorff_distance
from fractiling.maps import Ifs, MapSpec
from fractiling.presets import TAU, get_preset
from fractiling.symbols import parse_word
from fractiling.regions import Polygon, rasterize
from fractiling.tiling import tiles_at_level


def half(x, y):
    return MapSpec.from_coeffs([0.5, 0, 0, 0.5, x, y])


def test_graph_must_be_strongly_connected():
    with pytest.raises(GraphError):
        Gifs(2, [Edge(0, 0, half(0, 0)), Edge(0, 1, half(0.5, 0))])
    with pytest.raises(GraphError):
        Gifs(1, [Edge(0, 1, half(0, 0))])


def test_paths_must_follow_reversed_graph():
    G = get_preset("penrose").system
    th = parse_word("(34)", G.n_edges)
    EdgePath(G, th)
    with pytest.raises((GraphError, InvalidWord)):
        check_path(G, (3, 3))


def test_single_vertex_graph_matches_ifs():
    F = Ifs(tuple(half(x, y) for x in (0, 0.5) for y in (0, 0.5)))
    G = Gifs.from_ifs(F)
    th = parse_word("(1243)", 4)
    a = tiles_at_level(F, th, 3)
    b = gifs_tiles(G, EdgePath(G, th), 3)
    assert a.keys() == b.keys()
    ia, ib = a.index(), b.index()
    for key in ia:
        assert np.allclose(a.mats[ia[key]], b.mats[ib[key]])


def test_path_counts_are_matrix_powers():
    G = get_preset("penrose").system
    adj = G.adjacency()
    assert adj.tolist() == [[2, 1], [1, 1]]
    for k in range(8):
        for s in range(2):
            assert count_paths(G, s, k) == np.linalg.matrix_power(adj, k)[s].sum()


def test_penrose_scales_are_golden():
    p = get_preset("penrose")
    ts = gifs_tiles(p.system, p.word(), 5)
    sv = np.linalg.svd(ts.mats[:, :2, :2], compute_uv=False)
    j = np.log(sv) / np.log(TAU)
    assert np.allclose(j, np.round(j), atol=1e-9)
    # tiles are similarity copies
    assert np.allclose(sv[:, 0], sv[:, 1])


def test_trisquare_attractor_is_triangle_and_square():
    p = get_preset("trisquare")
    # resampling blur is a fixed number of cells, so the error shrinks with the cell size
    errs = {}
    for res in (32, 128):
        comps = gifs_attractor(p.system, res)
        errs[res] = [hausdorff_distance(c, rasterize(Polygon(poly), res))
                     for c, poly in zip(comps, p.polygons)]
    for coarse, fine in zip(errs[32], errs[128]):
        assert fine <= 8 / 128
        assert fine <= coarse / 3
    hull = hull_polygons(p.system)
    assert len(hull[0]) == 3 and len(hull[1]) == 4


def test_canonicalize_path():
    p = get_preset("penrose")
    th = p.word()
    t1 = th.prefix(1)[0]
    assert canonicalize_path(th, 1, (t1,)) == (0, ())
