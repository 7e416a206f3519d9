"""Command line interface.

Systems are named either by a config file or by a preset, optionally with
parameters: ``chair``, ``foldout:e=[0.5,0.5]``, ``overlap1d:b=0.6``.
Exit codes: 0 ok, 1 usage or config error, 2 invariant violation, 3 budget.
"""
from __future__ import annotations

import argparse
import json
import re
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attractor import attractor_raster, chaos_game
from .config import dump_gifs, dump_ifs, dumps, load_config
from .errors import FractalError
from .gifs import EdgePath, Gifs, gifs_tiles
from .maps import Ifs
from .mask import default_mask, masked_overlap, masked_tiling, tops_mask
from .presets import PRESETS, get_preset
from .regions import Intervals1D, Polygon, Raster, Region, image
from .render import (RenderStyle, interval_tile_svg, key_color, load_png, paint_regions,
                     polygon_tile_svg, region_png_array, save_png, svg_document, tile_png_array,
                     tile_records, write_text)
from .symbols import format_word, parse_word
from .tiling import WORD_BUDGET, build_tiling, overlap_check, verify_nonoverlap

log = logging.getLogger("fractiling")


class UsageError(FractalError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class System:
    name: str
    obj: Ifs | Gifs
    theta: str | None
    zero_based: bool = False
    attractor: Region | None = None
    polygons: list | None = None

    @property
    def n(self) -> int:
        return self.obj.n_edges if isinstance(self.obj, Gifs) else self.obj.n

    def word(self, text: str | None):
        text = text or self.theta
        if text is None:
            raise UsageError("no --theta given and the system has no default word")
        zb = self.zero_based and text == self.theta
        w = parse_word(text, self.n, zb)
        return EdgePath(self.obj, w) if isinstance(self.obj, Gifs) else w

    def region(self, res: float) -> Region:
        if self.attractor is None:
            self.attractor = attractor_raster(self.obj, res)
        return self.attractor


def _preset_params(text: str) -> dict:
    out = {}
    for part in filter(None, text.split(";")):
        if "=" not in part:
            raise UsageError(f"preset parameter {part!r} needs key=value")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v.strip()
    return out


def resolve_system(spec: str) -> System:
    path = Path(spec)
    if path.exists():
        cfg = load_config(path)
        if cfg.kind == "mask":
            raise UsageError(f"{spec} is a mask, not a system")
        polys = cfg.polygons
        if polys is None and isinstance(cfg.attractor, Polygon):
            polys = [cfg.attractor.vertices]
        return System(path.stem, cfg.obj, cfg.theta, False, cfg.attractor, polys)
    name, _, params = spec.partition(":")
    if name not in PRESETS:
        raise UsageError(f"{spec!r} is neither a file nor a preset ({', '.join(PRESETS)})")
    p = get_preset(name, **_preset_params(params))
    return System(p.name, p.system, p.theta, p.zero_based, p.exact, p.polygons)


def parse_window(text: str | None, dim: int):
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad window {text!r}") from None
    if len(vals) != 2 * dim:
        raise UsageError(f"window needs {2 * dim} numbers for dimension {dim}")
    return vals


def _lohi(win, dim):
    a = np.array(win[:dim]) if dim == 1 else np.array(win[:2])
    b = np.array(win[dim:]) if dim == 1 else np.array(win[2:])
    return a, b


def _fit_window(regions, pad=0.05):
    lo = np.min([r.bounds()[0] for r in regions], axis=0)
    hi = np.max([r.bounds()[1] for r in regions], axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - pad * span, hi + pad * span
    return [lo[0], lo[1], hi[0], hi[1]]


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        write_text(path, text)


# -- subcommands ------------------------------------------------------------------------------

def cmd_attractor(args) -> int:
    S = resolve_system(args.ifs)
    if isinstance(S.obj, Gifs):
        from .gifs import gifs_attractor
        comps = gifs_attractor(S.obj, args.res, budget=args.budget)
    elif args.points:
        pts = chaos_game(S.obj, args.points, args.seed).points
        comps = [Raster.from_points(pts, args.res, args.budget)]
    else:
        comps = [attractor_raster(S.obj, args.res, args.budget)]
    for i, c in enumerate(comps, 1):
        lo, hi = c.bounds()
        print(f"component {i}: {c.count} cells at res {args.res:g}, box {lo.tolist()} {hi.tolist()}")
    out = args.png or args.out
    if out:
        if comps[0].dim != 2:
            raise UsageError("PNG output needs a 2-D system")
        win = parse_window(args.window, 2) or _fit_window(comps)
        colors = ["#000000"] + [key_color(1, (i,)) for i in range(1, len(comps))]
        save_png(paint_regions(comps, colors, win, args.px), out)
    return 0


def _tile_outputs(args, tiles, geometry, dim, n_letters, templates=None, lo_hi=None, graph=False):
    if args.records:
        _emit(tile_records(tiles, n_letters, with_component=graph), args.records)
    style = RenderStyle(px_per_unit=args.px)
    if args.svg:
        if dim == 1:
            write_text(args.svg, interval_tile_svg(tiles, *lo_hi, style=style))
        elif templates is None:
            raise UsageError("SVG output needs polygon templates; use --png for fractal tiles")
        else:
            win = parse_window(args.window, 2) or _fit_window([geometry(t) for t in tiles])
            write_text(args.svg, polygon_tile_svg(tiles, templates, win, style))
    png = args.png or (args.out if not (args.svg or args.records) else None)
    if png:
        if dim != 2:
            raise UsageError("PNG output needs a 2-D system")
        win = parse_window(args.window, 2) or _fit_window([geometry(t) for t in tiles])
        save_png(tile_png_array(tiles, geometry, win, args.px), png)


def cmd_tile(args) -> int:
    S = resolve_system(args.ifs)
    if isinstance(S.obj, Gifs):
        raise UsageError("use gifs-tile for graph systems")
    theta = S.word(args.theta)
    A = S.region(args.res)
    T = build_tiling(S.obj, A, theta, args.level, S.polygons[0] if S.polygons else None,
                     args.budget or WORD_BUDGET)
    print(f"{len(T.tiles)} tiles at level {args.level}")
    if args.check:
        win = parse_window(args.window, S.obj.dim)
        report = verify_nonoverlap(T, 1, args.res, _lohi(win, S.obj.dim) if win else None,
                                   args.budget)
        print(report)
        if not report.ok:
            return 2
    lo_hi = None
    if isinstance(A, Intervals1D):
        lo_hi = (float(A.bounds()[0][0]), float(A.bounds()[1][0]))
    templates = [S.polygons[0]] if S.polygons else None
    _tile_outputs(args, list(T.tiles), lambda t: image(A, t.xform), S.obj.dim, S.n, templates,
                  lo_hi)
    return 0


def cmd_mask_tile(args) -> int:
    S = resolve_system(args.ifs)
    F = S.obj
    A = S.region(args.res)
    if args.mask == "tops":
        M = tops_mask(F, A)
    elif args.mask == "default":
        M = default_mask(F, A, args.res)
    else:
        cfg = load_config(args.mask)
        if cfg.kind != "mask":
            raise UsageError(f"{args.mask} is not a mask file")
        M = cfg.obj
    state = masked_tiling(F, A, M, S.word(args.theta), args.steps, args.auto_rotate, args.res)
    print(f"{len(state.tiles)} tiles after {args.steps} steps ({state.dropped} pieces dropped)")
    if args.check:
        report = masked_overlap(state, args.res)
        print(report)
        if not report.ok:
            return 2
    if args.records:
        lines = []
        for t in state.tiles:
            trail = "".join(map(str, t.trail)) or "-"
            if isinstance(t.region, Intervals1D):
                geo = " ".join(f"{float(a):.17g} {float(b):.17g}" for a, b in t.region.intervals)
            else:
                lo, hi = t.region.bounds()
                geo = " ".join(f"{v:.17g}" for v in (*lo, *hi))
            lines.append(f"{trail} {geo}\n")
        _emit("".join(lines), args.records)
    regions = [t.region for t in state.tiles]
    colors = [key_color(len(t.trail), t.trail) for t in state.tiles]
    if args.svg:
        if not isinstance(A, Intervals1D):
            raise UsageError("masked tiles are not polygons; use --png for 2-D")
        items = [(f'<rect x="{float(r.intervals[0][0])!r}" y="0.0" width="'
                  f'{float(r.intervals[-1][1] - r.intervals[0][0])!r}" height="1.0"/>', c)
                 for r, c in zip(regions, colors)]
        xs = [float(v) for r in regions for v in (r.intervals[0][0], r.intervals[-1][1])]
        write_text(args.svg, svg_document(items, (min(xs), -0.25, max(xs), 1.25),
                                          RenderStyle(px_per_unit=args.px)))
    png = args.png or (args.out if not (args.svg or args.records) else None)
    if png:
        if F.dim != 2:
            raise UsageError("PNG output needs a 2-D system")
        win = parse_window(args.window, 2) or _fit_window(regions)
        save_png(paint_regions(regions, colors, win, args.px), png)
    return 0


def cmd_gifs_tile(args) -> int:
    S = resolve_system(args.gifs)
    if not isinstance(S.obj, Gifs):
        raise UsageError("gifs-tile needs a graph system; use tile for an IFS")
    theta = S.word(args.theta)
    tiles = gifs_tiles(S.obj, theta, args.level, args.budget or WORD_BUDGET)
    print(f"{len(tiles)} tiles at level {args.level}")
    comps = [Polygon(p) for p in S.polygons] if S.polygons else None
    if comps is None:
        from .gifs import gifs_attractor
        comps = gifs_attractor(S.obj, args.res, budget=args.budget)
    if args.check:
        ts = list(tiles)
        report = overlap_check([image(comps[t.component], t.xform) for t in ts],
                               [t.key for t in ts], 1, args.res, budget=args.budget)
        print(report)
        if not report.ok:
            return 2
    _tile_outputs(args, list(tiles), lambda t: image(comps[t.component], t.xform), S.obj.dim,
                  S.n, S.polygons, graph=True)
    return 0


def cmd_transform(args) -> int:
    from .transform import TransformSystem, tops_section, transform_image

    src, dst = resolve_system(args.src), resolve_system(args.dst)
    sides = []
    for S in (src, dst):
        if isinstance(S.obj, Gifs) or S.obj.dim != 2:
            raise UsageError("transform needs two 2-D IFSs")
        A = S.region(args.res)
        sides.append(TransformSystem(S.obj, A, tops_section(S.obj, A, args.depth)))
    theta = parse_word(args.theta, src.n) if args.theta else src.word(None)
    img = load_png(args.input)
    in_win = parse_window(args.in_window, 2)
    out_win = parse_window(args.out_window, 2) or in_win
    shape = img.shape[:2] if args.size is None else tuple(int(v) for v in args.size.split("x"))[::-1]
    out = transform_image(sides[0], sides[1], theta, img, in_win, out_win, shape, args.k_max,
                          args.depth)
    save_png(out, args.output or args.out or "transformed.png")
    return 0


def cmd_fast_basin(args) -> int:
    from .transform import fast_basin, window_occupancy

    S = resolve_system(args.ifs)
    F = S.obj
    A = S.region(args.res)
    win = parse_window(args.window, F.dim)
    if win is None:
        raise UsageError("fast-basin needs --window")
    lo, hi = _lohi(win, F.dim)
    B = fast_basin(F, A, args.depth, (lo, hi), args.res, args.budget)
    if isinstance(B, Intervals1D):
        sys.stdout.write(B.to_lines())
        return 0
    print(f"occupancy {window_occupancy(B, (lo, hi)):.6f}, "
          f"after erosion {window_occupancy(B, (lo, hi), 1):.6f}")
    out = args.png or args.out
    if out:
        save_png(region_png_array(B, win, args.res), out)
    return 0


def cmd_check_word(args) -> int:
    from .words import check_disjunctive, check_full, check_reversal, construct_reverse_word

    if args.ifs:
        S = resolve_system(args.ifs)
        n = S.n
    else:
        S, n = None, args.n
    if n is None:
        raise UsageError("give --n or --ifs")
    theta = parse_word(args.theta, n) if args.theta else S.word(None)
    props = [args.property] if args.property else ["strong-reversible"] + (["full"] if args.full else [])
    for prop in props:
        if prop == "disjunctive":
            depth = args.depth or 10**5
            ev = check_disjunctive(theta, depth)
            extra = f"; shortest missing word {format_word(ev.missing, n)}" if ev.missing else ""
            print(f"disjunctive: {ev.verdict.value}; every word of length <= {ev.length} "
                  f"occurs in the first {ev.scanned} letters{extra}")
        elif prop == "strong-reversible":
            if args.omega:
                ev = check_reversal(theta, parse_word(args.omega, n), args.lengths, args.m_max)
            else:
                ev = construct_reverse_word(theta, [int(c) for c in args.sigma], args.t_max)
            shown = ev.match_positions[:8]
            print(f"reversal: {ev.verdict.value}; ladder {ev.ladder[:8]}; "
                  f"{len(ev.match_positions)} matches, first {shown}")
        else:
            if S is None or not isinstance(S.obj, Ifs):
                raise UsageError("fullness needs --ifs with an IFS")
            res = check_full(theta, S.obj, S.region(args.res), args.depth or 200)
            print(f"fullness: {res.verdict.value}; witnesses {res.witnesses}")
    return 0


def cmd_preset(args) -> int:
    if args.list or not args.name:
        for name in PRESETS:
            print(name)
        return 0
    S = resolve_system(args.name)
    if isinstance(S.obj, Gifs):
        data = dump_gifs(S.obj, S.theta, S.polygons)
    else:
        data = dump_ifs(S.obj, S.theta, S.attractor)
        if S.zero_based:
            # letters are single digits unless the word uses commas
            pat = r"\d+" if "," in S.theta else r"\d"
            data["theta"] = re.sub(pat, lambda m: str(int(m.group()) + 1), S.theta)
    _emit(dumps(data), args.out)
    return 0


# -- parser -----------------------------------------------------------------------------------

GLOBAL_DEFAULTS = {"res": 64.0, "budget": None, "seed": 0, "out": None, "verbose": False}


def build_parser() -> argparse.ArgumentParser:
    # globals may come before or after the subcommand; SUPPRESS keeps the later
    # parser from resetting a value given earlier
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--res", type=float, default=argparse.SUPPRESS,
                        help=f"raster cells per unit (default {GLOBAL_DEFAULTS['res']:g})")
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS,
                        help="cap on cells or enumerated words")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="default output path")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = _Parser(prog="fractiling", description="Fractal tilings from iterated function systems.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def outputs(q, px=32.0):
        q.add_argument("--window", help="x0,y0,x1,y1 (or x0,x1 in 1-D)")
        q.add_argument("--svg")
        q.add_argument("--png")
        q.add_argument("--records")
        q.add_argument("--px", type=float, default=px, help="pixels per unit")

    q = sub.add_parser("attractor", parents=[common], help="rasterize an attractor")
    q.add_argument("--ifs", required=True)
    q.add_argument("--points", type=int, default=0, help="use a chaos game with this many points")
    q.add_argument("--window")
    q.add_argument("--png")
    q.add_argument("--px", type=float, default=256.0)
    q.set_defaults(func=cmd_attractor)

    q = sub.add_parser("tile", parents=[common], help="tiling from an IFS and a word")
    q.add_argument("--ifs", required=True)
    q.add_argument("--theta")
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--check", action="store_true", help="verify non-overlap")
    outputs(q)
    q.set_defaults(func=cmd_tile)

    q = sub.add_parser("mask-tile", parents=[common], help="masked tiling of an overlapping IFS")
    q.add_argument("--ifs", required=True)
    q.add_argument("--mask", default="tops", help="tops, default, or a mask file")
    q.add_argument("--theta")
    q.add_argument("--steps", type=int, required=True)
    q.add_argument("--auto-rotate", action="store_true",
                   help="promote the theta_1 region when the mask does not satisfy it")
    q.add_argument("--check", action="store_true")
    outputs(q)
    q.set_defaults(func=cmd_mask_tile)

    q = sub.add_parser("gifs-tile", parents=[common], help="tiling from a graph IFS")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--gifs", help="graph config file or preset")
    g.add_argument("--preset", dest="gifs", help="same as --gifs")
    q.add_argument("--theta", "--path", dest="theta", help="edge path, e.g. (34)")
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--check", action="store_true")
    outputs(q)
    q.set_defaults(func=cmd_gifs_tile)

    q = sub.add_parser("transform", parents=[common], help="apply an extended fractal transformation")
    q.add_argument("--from", dest="src", required=True)
    q.add_argument("--to", dest="dst", required=True)
    q.add_argument("--theta")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--in-window", required=True)
    q.add_argument("--out-window")
    q.add_argument("--output", help="output PNG (defaults to --out)")
    q.add_argument("--size", help="WxH of the output image")
    q.add_argument("--depth", type=int, default=48)
    q.add_argument("--k-max", type=int, default=32)
    q.set_defaults(func=cmd_transform)

    q = sub.add_parser("fast-basin", parents=[common], help="fast basin in a window")
    q.add_argument("--ifs", required=True)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--window")
    q.add_argument("--png")
    q.set_defaults(func=cmd_fast_basin)

    q = sub.add_parser("check-word", parents=[common], help="reversibility and fullness evidence")
    q.add_argument("--theta")
    q.add_argument("--n", type=int)
    q.add_argument("--ifs")
    q.add_argument("--sigma", default="1", help="interior address prefix for the construction")
    q.add_argument("--omega", help="candidate reverse word")
    q.add_argument("--lengths", type=int, nargs="*", default=[2, 8, 32])
    q.add_argument("--m-max", type=int, default=10**4)
    q.add_argument("--t-max", type=int, default=10**6)
    q.add_argument("--property", choices=("disjunctive", "strong-reversible", "full"),
                   help="check one property; by default reversal, plus fullness with --full")
    q.add_argument("--full", action="store_true")
    q.add_argument("--depth", type=int,
                   help="letters scanned for disjunctive (1e5), words tried for full (200)")
    q.set_defaults(func=cmd_check_word)

    q = sub.add_parser("preset", parents=[common], help="dump a preset as a config file")
    q.add_argument("name", nargs="?")
    q.add_argument("--list", action="store_true")
    q.set_defaults(func=cmd_preset)
    return p


WINDOW_FLAGS = ("--window", "--in-window", "--out-window")


def _join_windows(argv):
    # "--window -4,4" would read -4,4 as an option
    out, it = [], iter(argv)
    for a in it:
        nxt = next(it, None) if a in WINDOW_FLAGS else None
        out.append(a if nxt is None else f"{a}={nxt}")
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_join_windows(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as e:
        # usage errors and --help come back as return codes
        return e.code if isinstance(e.code, int) else 1
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FractalError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
