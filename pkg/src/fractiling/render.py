"""Tile records, SVG and PNG output.

Colors come from a fixed 12-color palette indexed by a hash of the canonical
tile key, so a tile keeps its color across levels and runs; the level-0 tile is
black.  Output files depend only on their inputs.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .maps import MapSpec
from .regions import Region, lattice
from .symbols import format_word

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#f2c14e", "#4c9a8e")
BLACK = "#000000"


@dataclass
class RenderStyle:
    window: tuple | None = None  # (x0, y0, x1, y1)
    px_per_unit: float = 32.0
    stroke: str = "#ffffff"
    stroke_width: float = 0.0
    background: str = "#ffffff"


def key_color(level: int, word, component: int = 0) -> str:
    if level == 0:
        return BLACK
    digest = hashlib.sha1(f"{level}:{','.join(map(str, word))}:{component}".encode()).digest()
    return PALETTE[int.from_bytes(digest[:4], "big") % len(PALETTE)]


def _rgb(color: str) -> tuple:
    return tuple(int(color[i:i + 2], 16) for i in (1, 3, 5))


# -- records ---------------------------------------------------------------------------------

def _g17(v: float) -> str:
    return f"{float(v):.17g}"


def tile_records(tiles, n_letters: int, with_component: bool = False) -> str:
    """One line per tile: level, word, affine coefficients, and the component for graphs.

    Coefficients are ``[a, b, c, d, e, f]`` in 2-D and ``[a, e]`` in 1-D, written
    with 17 significant digits so they re-read exactly.
    """
    lines = []
    for t in tiles:
        cols = [str(t.level), format_word(t.word, n_letters)]
        cols += [_g17(v) for v in t.xform.coeffs]
        if with_component:
            cols.append(str(t.component + 1))
        lines.append(" ".join(cols))
    return "\n".join(lines) + ("\n" if lines else "")


def read_records(text: str, with_component: bool = False) -> list:
    """Inverse of :func:`tile_records`: (level, word, MapSpec, component) tuples."""
    out = []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        level = int(parts[0])
        w = parts[1]
        word = () if w == "-" else tuple(int(c) for c in (w.split(",") if "," in w else w))
        comp = int(parts[-1]) - 1 if with_component else 0
        coeffs = [float(v) for v in (parts[2:-1] if with_component else parts[2:])]
        if len(coeffs) == 6:
            m = MapSpec.from_coeffs(coeffs)
        else:
            m = MapSpec.affine([[coeffs[0]]], [coeffs[1]])
        out.append((level, word, m, comp))
    return out


# -- SVG -------------------------------------------------------------------------------------

def _num(v: float) -> str:
    return repr(float(v))


def _polygon_path(vertices) -> str:
    pts = [f"{_num(x)} {_num(y)}" for x, y in vertices]
    return "M" + " L".join(pts) + " Z"


def svg_document(items: list, window, style: RenderStyle) -> str:
    """``items`` are (element, fill) with the element text lacking its fill attribute."""
    x0, y0, x1, y1 = (float(v) for v in window)
    w, h = x1 - x0, y1 - y0
    stroke = (f' stroke="{style.stroke}" stroke-width="{_num(style.stroke_width)}"'
              if style.stroke_width > 0 else "")
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(w * style.px_per_unit)}" '
            f'height="{_num(h * style.px_per_unit)}" viewBox="{_num(x0)} {_num(-y1)} {_num(w)} '
            f'{_num(h)}">\n'
            f'<rect x="{_num(x0)}" y="{_num(-y1)}" width="{_num(w)}" height="{_num(h)}" '
            f'fill="{style.background}"/>\n'
            '<g transform="scale(1,-1)"' + stroke + '>\n')
    body = "".join(f'{el[:-2]} fill="{fill}"/>\n' for el, fill in items)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + head + body + "</g>\n</svg>\n"


def _bbox_meets(lo, hi, window) -> bool:
    x0, y0, x1, y1 = window
    return not (hi[0] < x0 or lo[0] > x1 or hi[1] < y0 or lo[1] > y1)


def polygon_tile_svg(tiles, templates, window, style: RenderStyle | None = None) -> str:
    """One path per tile: the template polygon of its component under the tile transform.

    The path keeps the template vertices and carries the exact transform in a
    ``matrix(...)`` attribute.  Tiles whose box misses the window are skipped.
    """
    style = style or RenderStyle()
    items = []
    for t in tiles:
        poly = np.asarray(templates[t.component])
        img = t.xform.apply(poly)
        if not _bbox_meets(img.min(axis=0), img.max(axis=0), window):
            continue
        a, b, c, d, e, f = t.xform.coeffs
        el = (f'<path d="{_polygon_path(poly)}" transform="matrix({_num(a)},{_num(c)},'
              f'{_num(b)},{_num(d)},{_num(e)},{_num(f)})"/>')
        items.append((el, key_color(t.level, t.word, t.component)))
    return svg_document(items, window, style)


def interval_tile_svg(tiles, lo: float, hi: float, window=None,
                      style: RenderStyle | None = None, height: float = 1.0) -> str:
    """One rectangle per tile of a 1-D tiling of the interval [lo, hi]."""
    style = style or RenderStyle()
    items = []
    ends = []
    for t in tiles:
        a, e = t.xform.coeffs
        p, q = sorted((a * lo + e, a * hi + e))
        ends.append((p, q))
        items.append((f'<rect x="{_num(p)}" y="0.0" width="{_num(q - p)}" height="{_num(height)}"/>',
                      key_color(t.level, t.word, t.component)))
    if window is None:
        xs = [v for pq in ends for v in pq] or [0.0, 1.0]
        window = (min(xs), -0.25 * height, max(xs), 1.25 * height)
    return svg_document(items, window, style)


def write_text(path, text: str):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# -- PNG -------------------------------------------------------------------------------------

def _canvas(window, px_per_unit: float):
    x0, y0, x1, y1 = (float(v) for v in window)
    grid = lattice(np.array([x0, y0]), np.array([x1, y1]) - 1e-12, px_per_unit)
    return grid


def paint_regions(regions, colors, window, px_per_unit: float = 32.0,
                  background: str = "#ffffff") -> np.ndarray:
    """RGB array (rows top to bottom) with each region's pixel centers painted in order."""
    grid = _canvas(window, px_per_unit)
    nx, ny = grid.shape
    img = np.empty((ny, nx, 3), dtype=np.uint8)
    img[...] = _rgb(background)
    pts = grid.centers()
    for reg, col in zip(regions, colors):
        lo, hi = reg.bounds()
        inside = np.flatnonzero(np.all((pts >= lo - 1e-12) & (pts <= hi + 1e-12), axis=1))
        if not len(inside):
            continue
        hit = inside[np.asarray(reg.contains(pts[inside]), bool)]
        ix, iy = np.unravel_index(hit, grid.shape)
        img[ny - 1 - iy, ix] = _rgb(col)
    return img


def tile_png_array(tiles, geometry, window, px_per_unit: float = 32.0) -> np.ndarray:
    """``geometry(tile)`` gives each tile's region."""
    tiles = list(tiles)
    regions = [geometry(t) for t in tiles]
    colors = [key_color(t.level, t.word, t.component) for t in tiles]
    return paint_regions(regions, colors, window, px_per_unit)


def region_png_array(region: Region, window, px_per_unit: float = 32.0) -> np.ndarray:
    return paint_regions([region], [BLACK], window, px_per_unit)


def save_png(img: np.ndarray, path):
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(img)).save(path, format="PNG", optimize=False)


def load_png(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB")).copy()
