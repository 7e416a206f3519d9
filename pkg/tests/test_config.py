import json

import numpy as np
import pytest
from PIL import Image

from fractiling.config import (dump_gifs, dump_ifs, dump_mask, dumps, load_config,
                               load_interval_mask, parse_config)
from fractiling.errors import ConfigError, SingularMap
from fractiling.mask import tops_mask
from fractiling.presets import get_preset
from fractiling.regions import Raster


def test_ifs_round_trip(tmp_path):
    p = get_preset("chair")
    path = tmp_path / "chair.json"
    path.write_text(dumps(dump_ifs(p.system, p.theta, p.attractor())))
    L = load_config(path)
    assert L.kind == "ifs" and L.theta == p.theta
    assert np.array_equal(L.obj.matrices(), p.system.matrices())
    assert np.allclose(L.attractor.vertices, p.attractor().vertices)


def test_gifs_and_mask_round_trip(tmp_path):
    p = get_preset("penrose")
    L = parse_config(json.loads(dumps(dump_gifs(p.system, p.theta, p.polygons))))
    assert L.kind == "gifs" and L.obj.adjacency().tolist() == p.system.adjacency().tolist()
    q = get_preset("overlap1d")
    M = tops_mask(q.system, q.attractor())
    L = parse_config(json.loads(dumps(dump_mask(M))))
    assert all(a.same_set(b) for a, b in zip(L.obj.regions, M.regions))


def test_json_syntax_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"maps": [\n  {"coeffs": [1, 2,]}\n]}')
    with pytest.raises(ConfigError, match=r"bad\.json:2:\d+"):
        load_config(path)


def test_structural_errors_name_the_field():
    with pytest.raises(ConfigError, match=r"maps\[1\]\.coeffs"):
        parse_config({"maps": [{"coeffs": [0.5, 0, 0, 0.5, 0, 0]}, {"coeffs": [1, 2]}]})
    with pytest.raises(ConfigError, match="unknown config type"):
        parse_config({"type": "tree"})
    with pytest.raises(ConfigError, match="theta"):
        parse_config({"maps": [{"coeffs": [0.5, 0, 0, 0.5, 0, 0]}], "theta": 12})
    with pytest.raises(ConfigError):
        load_config("/nonexistent/file.json")


def test_singular_map_is_reported_by_index():
    with pytest.raises(SingularMap, match="map 2"):
        parse_config({"maps": [{"coeffs": [0.5, 0, 0, 0.5, 0, 0]},
                               {"coeffs": [1, 1, 1, 1, 0, 0]}]})


def test_png_attractor(tmp_path):
    img = np.zeros((8, 16), np.uint8)
    img[:, :8] = 255
    Image.fromarray(img).save(tmp_path / "a.png")
    cfg = {"maps": [{"coeffs": [0.5, 0, 0, 0.5, 0, 0]}],
           "attractor": {"png": "a.png", "window": [0, 0, 2, 1]}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    A = load_config(path).attractor
    assert isinstance(A, Raster) and A.res == 8
    assert A.area == pytest.approx(1.0)
    assert A.contains(np.array([[0.5, 0.5], [1.5, 0.5]])).tolist() == [True, False]


def test_interval_mask_text(tmp_path):
    M = load_interval_mask("# tops mask\n1 0 0.65\n2 0.65 1  # rest\n")
    assert len(M) == 2 and float(M[2].measure()) == pytest.approx(0.35)
    with pytest.raises(ConfigError, match=":2:"):
        load_interval_mask("1 0 1\n2 x 1\n")
    (tmp_path / "m.txt").write_text("1 0 1\n")
    assert load_config(tmp_path / "m.txt").kind == "mask"
