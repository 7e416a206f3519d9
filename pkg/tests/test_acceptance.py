"""Acceptance criteria 1-10, each at its stated tolerance and time limit.

Every criterion prints one PASS/FAIL line; run this file directly to see them
without pytest, or read the "acceptance criteria" section of the pytest summary.
"""
import functools
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from fractiling.attractor import chaos_game
from fractiling.gifs import _paths_from, fixed_point_error, gifs_attractor, gifs_tiles
from fractiling.maps import estimate_contraction
from fractiling.mask import (MaskedTiling, default_mask, interval_partition_oracle,
                             tiling_agreement, tops_mask)
from fractiling.presets import PRESETS, TAU, get_preset
from fractiling.regions import image
from fractiling.symbols import DisjunctiveEnumeration, parse_word
from fractiling.tiling import (build_tiling, coverage_check, overlap_check, tile_intervals,
                               tiles_at_level, verify_nonoverlap)
from fractiling.transform import (TransformSystem, coordinate_points, fast_basin,
                                  fractal_transform_points, interval_fast_basin_oracle,
                                  section_addresses, tops_section, window_occupancy)
from fractiling.words import Verdict, check_full, check_reversal, construct_reverse_word, \
    find_strong_matches

pytestmark = pytest.mark.slow

RESULTS = []


def criterion(num: int, title: str, limit: float):
    def deco(fn):
        @functools.wraps(fn)
        def run():
            t0 = time.perf_counter()
            ok, detail = False, ""
            try:
                detail = fn() or ""
                ok = True
            except AssertionError as e:
                detail = str(e).splitlines()[0] if str(e) else "assertion failed"
                raise
            finally:
                dt = time.perf_counter() - t0
                verdict = "PASS" if ok and dt < limit else "FAIL"
                line = f"criterion {num:2d} {verdict}  {title} [{dt:.1f}s / {limit:g}s] {detail}"
                RESULTS.append(line)
                print(line)
            assert dt < limit, f"took {dt:.1f}s, limit {limit:g}s"
        run.criterion = num
        return run
    return deco


# -- 1 -------------------------------------------------------------------------------------------

@criterion(1, "interval tilings", 1.0)
def test_c01_interval_tilings():
    p = get_preset("interval")
    k = 12
    m = np.arange(2**k, dtype=float)
    for word, ms in (("(1)", m), ("(2)", -m)):
        T = build_tiling(p.system, p.attractor(), parse_word(word, 2), k)
        ends = tile_intervals(T)
        ends = ends[np.argsort(ends[:, 0])]
        want = np.sort(ms)
        assert len(ends) == 2**k
        assert np.abs(ends[:, 0] - want).max() <= 1e-9
        assert np.abs(ends[:, 1] - (want + 1)).max() <= 1e-9
    return f"2^{k} unit tiles for both words"


# -- 2 -------------------------------------------------------------------------------------------

def _level_tiles(p, k):
    if p.is_graph:
        return gifs_tiles(p.system, p.word(), k)
    return tiles_at_level(p.system, p.word(), k)


@criterion(2, "nesting of canonical keys", 10.0)
def test_c02_nesting():
    checked = 0
    for name in PRESETS:
        p = get_preset(name)
        prev = _level_tiles(p, 0)
        for k in range(1, 8):
            cur = _level_tiles(p, k)
            a, b = prev.index(), cur.index()
            assert set(a) <= set(b), f"{name}: level {k - 1} keys not inside level {k}"
            # the same key must name the same tile at both levels
            for key, i in a.items():
                assert np.array_equal(prev.mats[i], cur.mats[b[key]]), f"{name} {key}"
            prev = cur
            checked += 1
    return f"{checked} level pairs over {len(PRESETS)} presets"


# -- 3 -------------------------------------------------------------------------------------------

@criterion(3, "non-overlap of tilings", 60.0)
def test_c03_nonoverlap():
    res, k = 64.0, 6
    counts = []
    for name in ("chair", "foldout", "triangle", "interval"):
        p = get_preset(name)
        T = build_tiling(p.system, p.attractor(res), p.word(), k)
        report = verify_nonoverlap(T, erosion_cells=1, res=res)
        assert report.ok, f"{name}: {report}"
        counts.append(f"{name} {report.tiles_checked}")
    p = get_preset("penrose")
    comps = p.components(res)
    tiles = list(gifs_tiles(p.system, p.word(), k))
    report = overlap_check([image(comps[t.component], t.xform) for t in tiles],
                           [t.key for t in tiles], 1, res)
    assert report.ok, f"penrose: {report}"
    counts.append(f"penrose {report.tiles_checked}")
    # negative control: the overlapping b = 0.65 system must be caught
    for name in ("overlap1d", "overlap2d"):
        p = get_preset(name)
        T = build_tiling(p.system, p.attractor(res), p.word(), 3)
        report = verify_nonoverlap(T, erosion_cells=1, res=res)
        assert not report.ok, f"{name}: overlap not detected"
    return "tiles: " + ", ".join(counts) + "; overlapping controls detected"


# -- 4 -------------------------------------------------------------------------------------------

FULL_WORDS = ("(12)", "(112)", "1(1222)", "random:seed=7")


@criterion(4, "full-word coverage", 120.0)
def test_c04_full_coverage():
    p = get_preset("interval")
    A = p.attractor()
    out = []
    for text in FULL_WORDS:
        theta = parse_word(text, 2)
        assert check_full(theta, p.system, A, 200).verdict is Verdict.FULL, text
        T = build_tiling(p.system, A, theta, 0)
        cov = coverage_check(T, (-50, 50), level=20)
        assert cov >= 0.999, f"{text}: coverage {cov}"
        out.append(f"{cov:.4f}")
    c = get_preset("chair")
    theta = c.word()
    assert check_full(theta, c.system, c.attractor(), 200).verdict is Verdict.FULL
    T = build_tiling(c.system, c.attractor(), theta, 10)
    cov = coverage_check(T, (np.array([-10.0, -10.0]), np.array([10.0, 10.0])), res=32.0)
    assert cov >= 0.995, f"chair coverage {cov}"
    return f"interval {'/'.join(out)}; chair {cov:.4f}"


# -- 5 -------------------------------------------------------------------------------------------

@criterion(5, "random-word coverage", 30.0)
def test_c05_random_coverage():
    p = get_preset("interval")
    A = p.attractor()
    good = 0
    for seed in range(20):
        T = build_tiling(p.system, A, parse_word(f"random:seed={seed}", 2), 0)
        good += coverage_check(T, (-50, 50), level=20) >= 0.999
    assert good >= 19, f"only {good}/20 random words cover"
    return f"{good}/20 random words cover [-50, 50]"


# -- 6 -------------------------------------------------------------------------------------------

@criterion(6, "reversibility calibration", 30.0)
def test_c06_reversibility():
    theta = parse_word("3(12)", 3)
    omega = parse_word("(12)", 3)
    ev = check_reversal(theta, omega, lengths=[1, 2, 4, 8, 16, 64], m_max=10**4)
    assert ev.verdict is Verdict.REVERSIBLE, ev.verdict
    assert ev.recheck(theta)
    assert find_strong_matches(theta, omega.prefix(10**4), 10**4) == []
    disj = construct_reverse_word(DisjunctiveEnumeration(2), (1,), t_max=10**6)
    assert disj.verdict is Verdict.STRONG and len(disj.ladder) >= 3, disj.ladder
    assert disj.recheck(DisjunctiveEnumeration(2))
    return f"reversible with {len(ev.match_positions)} matches; disjunctive ladder {disj.ladder[:4]}"


# -- 7 -------------------------------------------------------------------------------------------

@criterion(7, "masked recursion", 60.0)
def test_c07_masked_recursion():
    # default mask on non-overlapping systems reproduces the tiling, level n - 1 at state n
    worst = {}
    for name, res in (("interval", None), ("chair", 64.0)):
        p = get_preset(name)
        A = p.attractor(res or 64.0)
        th = p.word()
        mt = MaskedTiling(p.system, A, default_mask(p.system, A), th)
        mt.run(6)
        worst[name] = 0.0
        for st in mt.states:
            T = build_tiling(p.system, A, th, st.n - 1)
            err = tiling_agreement(st, T)
            assert err <= (0 if res is None else 1), f"{name} level {st.n - 1}: {err}"
            worst[name] = max(worst[name], err)
    # tops mask on b = 0.65 partitions [0, b^-n]
    b = 0.65
    p = get_preset("overlap1d", b=b)
    A = p.attractor()
    th = parse_word("(1)", 2)
    mt = MaskedTiling(p.system, A, tops_mask(p.system, A), th)
    for n in range(0, 7):
        st = mt.run(n)
        got = sorted((float(t.region.intervals[0][0]), float(t.region.intervals[-1][1]))
                     for t in st.tiles)
        want = interval_partition_oracle(b, th.prefix(n + 2), n)
        assert len(got) == len(want), f"n={n}: {len(got)} tiles, oracle {len(want)}"
        err = max(abs(g - float(w)) for gw in zip(got, want) for g, w in zip(*gw))
        assert err <= 1e-9, f"n={n}: endpoint error {err}"
        gaps = [got[i + 1][0] - got[i][1] for i in range(len(got) - 1)]
        assert max(map(abs, gaps), default=0) <= 1e-9
        top = float(Fraction(b).limit_denominator(10**9) ** -n)
        assert abs(got[0][0]) <= 1e-9 and abs(got[-1][1] - top) <= 1e-9
    return (f"default mask: interval exact, chair {worst['chair']:g} cells; "
            f"tops b=0.65 n<=6 matches oracle ({len(got)} tiles)")


# -- 8 -------------------------------------------------------------------------------------------

@criterion(8, "Penrose graph IFS", 120.0)
def test_c08_penrose():
    p = get_preset("penrose")
    G = p.system
    res = 128.0
    comps = gifs_attractor(G, res)
    errs = [e * res for e in fixed_point_error(G, comps)]
    assert max(errs) <= 2, f"fixed-point error {errs} cells"
    theta = p.word()
    k = 8
    tiles = gifs_tiles(G, theta, k)
    sv = np.linalg.svd(tiles.mats[:, :2, :2], compute_uv=False)
    j = np.round(np.log(sv) / np.log(1 / TAU))
    dev = np.abs(sv - TAU ** (-j)).max()
    assert dev <= 1e-9, f"singular value off the ladder by {dev}"
    adj = G.adjacency()
    for s in range(G.m):
        paths = _paths_from(G, s, k)
        for length in range(k + 1):
            want = int(np.linalg.matrix_power(adj, length)[s].sum())
            assert len(paths[length][0]) == want
    # tiles per level: first edge leaves src(theta_j), differs from theta_j, then any path
    letters = theta.word.prefix(k)
    for lvl in range(1, k + 1):
        t = letters[lvl - 1]
        src = G.edges[t - 1].src
        want = sum(int(np.linalg.matrix_power(adj, lvl - 1)[e.dst].sum())
                   for i, e in enumerate(G.edges, 1) if e.src == src and i != t)
        assert int(np.sum(tiles.levels == lvl)) == want, f"level {lvl}"
    return f"fixed-point error {max(errs):.1f} cells; {len(tiles)} tiles on the ladder ({dev:.1e})"


# -- 9 -------------------------------------------------------------------------------------------

def _system(p, res):
    A = p.attractor(res)
    return TransformSystem(p.system, A, tops_section(p.system, A, 48))


@criterion(9, "transform round trips", 60.0)
def test_c09_round_trips():
    res = 64.0
    cell = 1 / res
    worst = {}
    for name in ("interval", "foldout", "triangle", "chair", "sierpinski", "digit",
                 "empty-interior"):
        p = get_preset(name)
        F = p.system
        A = p.attractor(res)
        pts = chaos_game(F, 1000, seed=1).points
        words = section_addresses(F, A, tops_section(F, A, 48), pts, 48)
        back, _ = coordinate_points(F, words)
        lo, hi = A.bounds()
        bound = estimate_contraction(F) ** 48 * float(np.linalg.norm(hi - lo)) + 2 * cell
        err = float(np.linalg.norm(back - pts, axis=-1).max()) if F.dim > 1 else \
            float(np.abs(back - pts).max())
        assert err <= bound, f"{name}: pi o tau error {err} > {bound}"
        worst[name] = err / cell
    # extended addresses on B(theta): fold-out pair and identity systems
    rng = np.random.default_rng(3)
    a = _system(get_preset("foldout", e=(0.5, 0.5)), res)
    b = _system(get_preset("foldout"), res)
    theta = parse_word("(1)", 4)
    pts = rng.uniform(0, 8, (1000, 2))
    y, ok = fractal_transform_points(a, b, theta, pts)
    z, ok2 = fractal_transform_points(b, a, theta, y[ok])
    assert ok.all() and ok2.all()
    ext = float(np.linalg.norm(z - pts, axis=1).max())
    assert ext <= 2 * cell, f"extended round trip {ext}"
    ident = 0.0
    for name, box in (("foldout", 8.0), ("chair", 8.0), ("triangle", 4.0)):
        S = _system(get_preset(name), res)
        th = get_preset(name).word()
        q = rng.uniform(-box, box, (1000, 2))
        y, ok = fractal_transform_points(S, S, th, q)
        assert ok.any()
        moved = float(np.linalg.norm(y[ok] - q[ok], axis=1).max())
        assert moved <= 2 * cell, f"{name} identity moves a point {moved}"
        ident = max(ident, moved)
    for name in ("sierpinski", "digit"):
        S = _system(get_preset(name), res)
        q = chaos_game(S.F, 1000, seed=2).points
        y, ok = fractal_transform_points(S, S, get_preset(name).word(), q)
        assert ok.all()
        moved = float(np.linalg.norm(y - q, axis=1).max())
        assert moved <= 2 * cell, f"{name} identity moves a point {moved / cell:.2f} cells"
        ident = max(ident, moved)
    raster = max(worst[n] for n in ("sierpinski", "digit", "empty-interior"))
    return (f"pi o tau worst {raster:.2f} cells (raster), extended round trip {ext:.1e}, "
            f"identity {ident / cell:.2f} cells")


# -- 10 ------------------------------------------------------------------------------------------

@criterion(10, "fast basin", 60.0)
def test_c10_fast_basin():
    win = (-4.0, 4.0)
    for name in ("interval", "overlap1d"):
        p = get_preset(name)
        A = p.attractor()
        pair = (A.intervals[0][0], A.intervals[-1][1])
        for k in range(0, 9):
            got = fast_basin(p.system, A, k, win).merged().intervals
            want = interval_fast_basin_oracle(p.system, pair, k, win)
            assert len(got) == len(want), f"{name} k={k}: {got} vs {want}"
            err = max(abs(float(g) - float(w)) for gw in zip(got, want) for g, w in zip(*gw))
            assert err <= 1e-9, f"{name} k={k}: endpoint error {err}"
    p = get_preset("sierpinski")
    res = 128.0
    A = p.attractor(res)
    window = (np.array([-2.0, -2.0]), np.array([3.0, 3.0]))
    occ = []
    for k in range(0, 9):
        R = fast_basin(p.system, A, k, window, res)
        raw, core = window_occupancy(R, window), window_occupancy(R, window, 1)
        assert core < 0.10, f"k={k}: eroded occupancy {core}"
        occ.append((raw, core))
    raw, core = occ[-1]
    return f"interval oracles match for k<=8; Sierpinski k=8 occupancy {core:.4f} (raw {raw:.3f})"


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    failed = 0
    for t in sorted(tests, key=lambda f: f.criterion):
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
