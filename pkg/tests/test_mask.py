from fractions import Fraction

import numpy as np
import pytest

from fractiling.errors import InvalidMask, NotNonOverlapping
from fractiling.mask import (Mask, MaskedTiling, default_mask, interval_partition_oracle,
                             masked_overlap, masked_tiling, same_region, tiling_agreement,
                             tops_mask, validate_mask)
from fractiling.presets import get_preset
from fractiling.regions import Intervals1D, rasterize
from fractiling.symbols import parse_word
from fractiling.tiling import build_tiling


def test_tops_mask_on_overlapping_interval():
    p = get_preset("overlap1d", b=0.65)
    A = p.attractor()
    M = tops_mask(p.system, A)
    # f_1(A) = [0, b]; f_2(A) = [1 - b, 1] minus [0, b]
    assert M[1].same_set(Intervals1D.of((0, Fraction(13, 20))))
    assert M[2].same_set(Intervals1D.of((Fraction(13, 20), 1)))
    assert validate_mask(p.system, A, M).ok


def test_tops_mask_order():
    p = get_preset("overlap1d", b=0.65)
    M = tops_mask(p.system, p.attractor(), order=(2, 1))
    assert M[2].same_set(Intervals1D.of((Fraction(7, 20), 1)))
    assert M[1].same_set(Intervals1D.of((0, Fraction(7, 20))))
    with pytest.raises(InvalidMask):
        tops_mask(p.system, p.attractor(), order=(1, 1))


def test_default_mask_needs_non_overlap():
    p = get_preset("interval")
    M = default_mask(p.system, p.attractor())
    assert validate_mask(p.system, p.attractor(), M).ok
    q = get_preset("overlap1d")
    with pytest.raises(NotNonOverlapping):
        default_mask(q.system, q.attractor())


def test_validate_mask_rejects_bad_masks():
    p = get_preset("overlap1d", b=0.65)
    A = p.attractor()
    # both regions full: covering but overlapping
    r = validate_mask(p.system, A, Mask([Intervals1D.of((0, 0.65)), Intervals1D.of((0.35, 1))]))
    assert r.covering and not r.non_overlap
    # a region outside its image
    r = validate_mask(p.system, A, Mask([Intervals1D.of((0, 0.3)), Intervals1D.of((0.3, 1))]))
    assert not r.containment
    assert not validate_mask(p.system, A, Mask([A])).ok


def test_first_letter_must_own_a_full_region():
    p = get_preset("overlap1d", b=0.65)
    A = p.attractor()
    M = tops_mask(p.system, A)
    th = parse_word("(2)", 2)
    with pytest.raises(InvalidMask):
        MaskedTiling(p.system, A, M, th)
    s = MaskedTiling(p.system, A, M, th, auto_rotate=True).run(3)
    assert s.mask[2].same_set(s.A.map(s.F.maps[1]).merged())


@pytest.mark.parametrize("word", ["(1)", "(12)", "(2)", "random:seed=3"])
def test_masked_tiles_match_oracle(word):
    b = Fraction(13, 20)
    p = get_preset("overlap1d", b=0.65)
    A = p.attractor()
    th = parse_word(word, 2)
    M = tops_mask(p.system, A, order=(th.letter(1), 3 - th.letter(1)))
    for n in range(5):
        s = masked_tiling(p.system, A, M, th, n)
        got = sorted(iv for t in s.tiles for iv in t.region.merged().intervals)
        want = interval_partition_oracle(b, th.prefix(n + 2), n) if th.letter(1) == 1 else None
        if want is not None:
            assert got == want
        # tiles never overlap
        for (_, hi), (lo, _) in zip(got, got[1:]):
            assert hi <= lo


def test_default_mask_recovers_ordinary_tiling():
    p = get_preset("chair")
    A = p.attractor()
    M = default_mask(p.system, A)
    s = masked_tiling(p.system, A, M, p.word(), 3)
    T = build_tiling(p.system, A, p.word(), 3)
    assert tiling_agreement(s, T) <= 1
    assert masked_overlap(s).ok


def test_same_region_tolerates_boundary_cells():
    p = get_preset("chair")
    A = p.attractor()
    assert same_region(A, A)
    assert not same_region(A, A.transformed(p.system.maps[0]))


def test_square_tops_mask_regions():
    b, l = 0.65, 0.35
    p = get_preset("overlap2d", b=b)
    A = p.attractor()
    M = tops_mask(p.system, A)
    assert validate_mask(p.system, A, M).ok
    # f_1(A) = [0,b]^2 and the later images minus it: b x l, l x b and l x l corner pieces
    want = [b * b, l * b, b * l, l * l]
    for r, area in zip(M.regions, want):
        assert rasterize(r, 128, *r.bounds()).area == pytest.approx(area, abs=4 / 128)
    assert M.regions[0].bounds()[1].tolist() == [b, b]


def test_tops_mask_equals_default_without_overlap():
    p = get_preset("chair")
    A = p.attractor()
    for t, d in zip(tops_mask(p.system, A).regions, default_mask(p.system, A).regions):
        assert same_region(t, d)


def test_square_masked_tiling_top_row_repeats_interval_tiling():
    th2, th1 = parse_word("(1)", 4), parse_word("(1)", 2)
    p = get_preset("overlap2d", b=0.65)
    s = masked_tiling(p.system, p.attractor(), tops_mask(p.system, p.attractor()), th2, 4)
    assert masked_overlap(s, res=64).ok
    q = get_preset("overlap1d", b=0.65)
    s1 = masked_tiling(q.system, q.attractor(), tops_mask(q.system, q.attractor()), th1, 4)
    ends = sorted(float(hi) for t in s1.tiles for _, hi in t.region.merged().intervals)
    top = ends[-1]
    # probe a line just below the top edge and record where the owning tile changes
    xs = (np.arange(5600) + 0.5) * top / 5600
    pts = np.stack([xs, np.full_like(xs, top - 0.01)], axis=1)
    owner = np.full(len(xs), -1)
    for i, t in enumerate(s.tiles):
        hit = np.asarray(t.region.contains(pts), bool)
        assert not (hit & (owner >= 0)).any()
        owner[hit] = i
    assert (owner >= 0).all()
    cuts = xs[1:][np.diff(owner) != 0]
    assert len(cuts) == len(ends) - 1
    assert np.allclose(cuts, ends[:-1], atol=2 * top / 5600)
