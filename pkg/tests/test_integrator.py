import math

import numpy as np
import pytest

from patterned_rmt.errors import BudgetExceededError, ValidationError
from patterned_rmt.integrator import CHUNK, MomentEstimate, theory_moment_grid, theory_moment_mc
from patterned_rmt.pattern import EMPTY, FULL, INDEX, Pattern, Rect, Union, area_mc, preset
from patterned_rmt.paths import enumerate_shapes
from patterned_rmt.words import parse_word

W = parse_word


def test_triangle_aA_is_exactly_half(lower):
    est = theory_moment_mc(lower, W("aA"), 10_000, 0)
    assert (est.value, est.stderr, est.method) == (0.5, 0.0, "mc")


@pytest.mark.parametrize("text", ["aAa", "a", "aaA", "aab", "aAbBa"])
def test_vanishing_words_are_exact_zero(discs, text):
    w = W(text)
    est = theory_moment_mc([discs] * w.letters, w, 10_000, 0)
    assert est == MomentEstimate(0.0, 0.0, 0, "exact")
    assert theory_moment_grid([discs] * w.letters, w, 4).method == "exact"


def test_grid_examples(lower):
    assert theory_moment_grid(FULL, W("aA"), 8).value == pytest.approx(0.875, abs=1e-15)
    assert theory_moment_grid(lower, W("aA"), 8).value == pytest.approx(0.4375, abs=1e-15)
    assert theory_moment_grid(EMPTY, W("aAaA"), 6).value == 0.0


def test_grid_converges_from_below(lower):
    vals = [theory_moment_grid(lower, W("aAaA"), g).value for g in (4, 8, 16, 32)]
    assert vals == sorted(vals)
    assert all(v < 2 / 3 for v in vals)
    assert abs(vals[-1] - 2 / 3) < 0.1


def test_grid_budget():
    with pytest.raises(BudgetExceededError):
        theory_moment_grid(FULL, W("aAaAaA"), 100, budget=10 ** 6)
    with pytest.raises(ValidationError):
        theory_moment_grid(FULL, W("aA"), 1)


@pytest.mark.parametrize("n, catalan", [(1, 1), (2, 2), (3, 5)])
def test_full_square_gives_catalan(n, catalan):
    est = theory_moment_mc(FULL, W("aA" * n), 20_000, 0)
    assert (est.value, est.stderr) == (pytest.approx(catalan, abs=1e-12), 0.0)


def aligned_rect(r, g):
    a, b = sorted(r.integers(0, g + 1, 2))
    c, d = sorted(r.integers(0, g + 1, 2))
    return Rect(a / g, c / g, max(b, a + 1) / g, max(d, c + 1) / g)


def test_mc_agrees_with_grid_on_random_cases():
    # on grid-aligned rectangles the midpoint rule only loses cells with a
    # repeated coordinate, which bounds the bias by shapes * C(n+1, 2) / g
    words = ["aA", "aAaA", "aaAA", "aAbB", "abBA", "aAaAaA", "aaAAaA", "aAbBaA"]
    r = np.random.default_rng(99)
    for case in range(50):
        w = W(words[case % len(words)])
        n1 = w.half_length + 1
        g = {2: 40, 3: 24, 4: 12}[n1]
        pats = [Pattern(Union((aligned_rect(r, g), aligned_rect(r, g))), INDEX)
                for _ in range(w.letters)]
        mc = theory_moment_mc(pats, w, 40_000, case)
        grid = theory_moment_grid(pats, w, g)
        bias = len(enumerate_shapes(w)) * math.comb(n1, 2) / g
        assert grid.value <= mc.value + 3 * mc.stderr + 1e-12
        assert abs(mc.value - grid.value) <= 3 * mc.stderr + bias, (case, w, mc, grid)


def test_aA_equals_area(discs):
    th = theory_moment_mc(discs, W("aA"), 400_000, 3)
    ar = area_mc(discs, 400_000, 4)
    assert abs(th.value - ar.value) <= 3 * math.hypot(th.stderr, ar.stderr)


def test_thread_count_does_not_change_result(discs):
    w = W("aAaA")
    one = theory_moment_mc(discs, w, 30_000, 5, threads=1)
    three = theory_moment_mc(discs, w, 30_000, 5, threads=3)
    assert one == three


def test_seed_changes_result_and_is_reproducible(discs):
    a = theory_moment_mc(discs, W("aAaA"), 10_000, 1)
    assert a == theory_moment_mc(discs, W("aAaA"), 10_000, 1)
    assert a != theory_moment_mc(discs, W("aAaA"), 10_000, 2)


def test_stderr_is_sample_std_over_root_n(discs):
    # rebuild the sample from the documented chunk streams, evaluating f for
    # "aA" directly as 1_P(x1, x2) + 1_P(x2, x1)
    samples = 3 * CHUNK + 100
    est = theory_moment_mc(discs, W("aA"), samples, 7)
    pts = np.concatenate([np.random.default_rng([7, c]).random((size, 2))
                          for c, size in enumerate([CHUNK] * 3 + [100])])
    f = discs.contains(pts[:, 0], pts[:, 1]).astype(int) + discs.contains(pts[:, 1], pts[:, 0])
    assert est.value == pytest.approx(f.mean() / 2, rel=1e-12)
    assert est.stderr == pytest.approx(f.std(ddof=1) / 2 / math.sqrt(samples), rel=1e-9)
    assert est.to_dict()["variance"] == pytest.approx(est.variance)


def test_rejects_bad_inputs(lower):
    with pytest.raises(ValidationError):
        theory_moment_mc(lower, W("aA"), 0)
    with pytest.raises(ValidationError):
        theory_moment_mc([lower], W("aAbB"), 10)
    with pytest.raises(BudgetExceededError):
        theory_moment_mc(lower, W("aA" * 7), 10)
