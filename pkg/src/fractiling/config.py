"""JSON configuration files for IFSs, graph IFSs and masks.

An IFS file::

    {"type": "ifs", "maps": [{"coeffs": [0.5, 0, 0, 0.5, 0, 0]}, ...],
     "theta": "(1234)", "attractor": {"polygon": [[0, 0], [1, 0], [1, 1], [0, 1]]}}

A map is ``{"coeffs": [a, b, c, d, e, f]}`` (2-D affine), ``{"linear": ..., "offset":
...}`` or ``{"hom": ...}`` (projective).  A graph IFS uses ``"type": "gifs"``,
``"vertices"`` and ``"edges": [{"from": 1, "to": 2, "map": {...}}]``; vertices are
numbered from 1.  Floats are written with ``repr`` so a dump reloads bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, FractalError, SingularMap
from .gifs import Edge, Gifs
from .maps import Ifs, MapSpec
from .mask import Mask
from .regions import Intervals1D, Polygon, Raster, Region

CONFIG_VERSION = 1


@dataclass
class Loaded:
    """A parsed configuration: the system or mask plus optional word and attractor."""

    kind: str
    obj: object
    theta: str | None = None
    attractor: Region | None = None
    polygons: list | None = None


def _fail(where: str, msg: str):
    raise ConfigError(f"{where}: {msg}")


def _matrix(value, where: str, shape=None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        _fail(where, "expected a numeric array")
    if shape is not None and arr.shape != shape:
        _fail(where, f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        _fail(where, "non-finite entry")
    return arr


def parse_map(d: dict, where: str) -> MapSpec:
    if not isinstance(d, dict):
        _fail(where, "expected an object")
    if "coeffs" in d:
        c = _matrix(d["coeffs"], f"{where}.coeffs", (6,))
        return MapSpec.from_coeffs(c)
    if "hom" in d:
        h = _matrix(d["hom"], f"{where}.hom")
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            _fail(f"{where}.hom", "expected a square matrix")
        return MapSpec.homography(h)
    if "linear" in d:
        lin = np.atleast_2d(_matrix(d["linear"], f"{where}.linear"))
        off = np.atleast_1d(_matrix(d.get("offset", [0.0] * len(lin)), f"{where}.offset"))
        if lin.shape != (len(off), len(off)):
            _fail(where, f"linear {lin.shape} and offset {off.shape} disagree")
        return MapSpec.affine(lin, off)
    _fail(where, "map needs 'coeffs', 'linear'/'offset' or 'hom'")


def dump_map(m: MapSpec) -> dict:
    if m.projective:
        return {"hom": m.matrix.tolist()}
    if m.dim == 2:
        return {"coeffs": [float(v) for v in m.coeffs]}
    return {"linear": m.linear.tolist(), "offset": m.offset.tolist()}


def _checked_maps(items, where: str) -> list:
    if not isinstance(items, list) or not items:
        _fail(where, "expected a nonempty list of maps")
    maps = [parse_map(d, f"{where}[{i}]") for i, d in enumerate(items)]
    for i, m in enumerate(maps):
        if not m.is_invertible():
            raise SingularMap(f"{where}[{i}]: map {i + 1} is singular")
    return maps


def parse_region(d: dict, where: str, base: Path | None = None) -> Region:
    if not isinstance(d, dict):
        _fail(where, "expected an object")
    if "intervals" in d:
        pairs = _matrix(d["intervals"], f"{where}.intervals")
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            _fail(f"{where}.intervals", "expected a list of [lo, hi] pairs")
        return Intervals1D.of(*[tuple(p) for p in pairs.tolist()])
    if "polygon" in d:
        v = _matrix(d["polygon"], f"{where}.polygon")
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            _fail(f"{where}.polygon", "expected at least three [x, y] vertices")
        return Polygon(v)
    if "png" in d:
        if "window" not in d:
            _fail(where, "a PNG region needs 'window': [x0, y0, x1, y1]")
        path = Path(d["png"])
        if base is not None and not path.is_absolute():
            path = base / path
        return raster_from_png(path, _matrix(d["window"], f"{where}.window", (4,)))
    _fail(where, "region needs 'intervals', 'polygon' or 'png'")


def dump_region(r: Region) -> dict:
    if isinstance(r, Intervals1D):
        return {"intervals": [[float(a), float(b)] for a, b in r.intervals]}
    if isinstance(r, Polygon):
        return {"polygon": r.vertices.tolist()}
    raise ConfigError(f"cannot serialize a {type(r).__name__} region")


def raster_from_png(path, window) -> Raster:
    """Nonzero pixels of a grayscale PNG, georeferenced with its top row at y1."""
    from PIL import Image

    x0, y0, x1, y1 = (float(v) for v in window)
    with Image.open(path) as im:
        occ = np.asarray(im.convert("L")) > 0
    h, w = occ.shape
    res = w / (x1 - x0)
    if not np.isclose(h / (y1 - y0), res, rtol=1e-6):
        raise ConfigError(f"{path}: pixels are not square for window {window}")
    origin = np.array([x0, y0]) * res
    if not np.allclose(origin, np.round(origin), atol=1e-6):
        raise ConfigError(f"{path}: window corner is not on the {res:g}/unit cell lattice")
    # raster axes are (x, y) with y increasing upward
    return Raster(res, tuple(np.round(origin).astype(int)), occ[::-1].T.copy()).trim()


def parse_config(data: dict, base: Path | None = None) -> Loaded:
    if not isinstance(data, dict):
        _fail("<root>", "expected a JSON object")
    kind = data.get("type", "ifs")
    theta = data.get("theta")
    if theta is not None and not isinstance(theta, str):
        _fail("theta", "expected a string such as '(12)'")
    if kind == "ifs":
        maps = _checked_maps(data.get("maps"), "maps")
        try:
            F = Ifs(tuple(maps), bool(data.get("declared_contractive", True)))
        except FractalError as e:
            raise type(e)(f"maps: {e}") from None
        A = parse_region(data["attractor"], "attractor", base) if "attractor" in data else None
        return Loaded("ifs", F, theta, A)
    if kind == "gifs":
        m = data.get("vertices")
        if not isinstance(m, int) or m < 1:
            _fail("vertices", "expected a positive integer")
        edges = []
        for i, e in enumerate(data.get("edges") or []):
            where = f"edges[{i}]"
            if not isinstance(e, dict) or "from" not in e or "to" not in e or "map" not in e:
                _fail(where, "edge needs 'from', 'to' and 'map'")
            f = parse_map(e["map"], f"{where}.map")
            if not f.is_invertible():
                raise SingularMap(f"{where}: edge {i + 1} map is singular")
            edges.append(Edge(int(e["from"]) - 1, int(e["to"]) - 1, f, str(e.get("label", ""))))
        G = Gifs(m, edges, data.get("names"), bool(data.get("declared_contractive", True)))
        polys = data.get("polygons")
        polys = [_matrix(p, f"polygons[{i}]") for i, p in enumerate(polys)] if polys else None
        return Loaded("gifs", G, theta, None, polys)
    if kind == "mask":
        regions = data.get("regions")
        if not isinstance(regions, list) or not regions:
            _fail("regions", "expected a nonempty list")
        M = Mask([parse_region(r, f"regions[{i}]", base) for i, r in enumerate(regions)], "file")
        return Loaded("mask", M)
    _fail("type", f"unknown config type {kind!r}; expected ifs, gifs or mask")


def load_config(path) -> Loaded:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    if path.suffix in (".txt", ".intervals"):
        return Loaded("mask", load_interval_mask(text, path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    try:
        return parse_config(data, path.parent)
    except FractalError as e:
        raise type(e)(f"{path}: {e}") from None


def load_interval_mask(text: str, where="<mask>") -> Mask:
    """Lines ``i lo hi`` add [lo, hi] to region i (1-based); '#' starts a comment."""
    pieces: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            i, lo, hi = int(parts[0]), float(parts[1]), float(parts[2])
            if len(parts) != 3 or i < 1:
                raise ValueError
        except (ValueError, IndexError):
            raise ConfigError(f"{where}:{lineno}: expected 'region lo hi'") from None
        pieces.setdefault(i, []).append((lo, hi))
    if not pieces:
        raise ConfigError(f"{where}: no intervals")
    n = max(pieces)
    return Mask([Intervals1D.of(*pieces.get(i, [])) for i in range(1, n + 1)], "file")


def dump_ifs(F: Ifs, theta: str | None = None, attractor: Region | None = None) -> dict:
    out = {"type": "ifs", "version": CONFIG_VERSION,
           "declared_contractive": F.declared_contractive,
           "maps": [dump_map(m) for m in F.maps]}
    if theta is not None:
        out["theta"] = theta
    if isinstance(attractor, (Intervals1D, Polygon)):
        out["attractor"] = dump_region(attractor)
    return out


def dump_gifs(G: Gifs, theta: str | None = None, polygons=None) -> dict:
    out = {"type": "gifs", "version": CONFIG_VERSION, "vertices": G.m, "names": list(G.names),
           "declared_contractive": G.declared_contractive,
           "edges": [{"from": e.src + 1, "to": e.dst + 1, "label": e.label, "map": dump_map(e.map)}
                     for e in G.edges]}
    if theta is not None:
        out["theta"] = theta
    if polygons is not None:
        out["polygons"] = [np.asarray(p).tolist() for p in polygons]
    return out


def dump_mask(M: Mask) -> dict:
    return {"type": "mask", "version": CONFIG_VERSION,
            "regions": [dump_region(r) for r in M.regions]}


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1) + "\n"
