"""Limiting moments: the normalised integral of the path counting function.

For a balanced word of length ``2n`` the limit of ``E[tr(X^w)]`` is
``(1/(n+1)!) * integral of f over [0, 1]^(n+1)``.  Two estimators are offered:
plain Monte Carlo (:func:`theory_moment_mc`) and the midpoint rule on a regular
grid (:func:`theory_moment_grid`).

Monte Carlo draws points in fixed chunks of ``CHUNK`` samples; chunk ``c`` uses
the stream ``default_rng([seed, c])`` and only integer sums of ``f`` and
``f**2`` are merged, so the result is bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceededError, ValidationError
from .paths import DEFAULT_MAX_LENGTH, enumerate_shapes, f_batch
from .pattern import as_index_patterns
from .words import Word

CHUNK = 4096
GRID_BUDGET = 2_000_000


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    samples: int
    method: str  # mc | grid | exact | empirical | oracle
    variance: Optional[float] = None  # per-sample variance, when meaningful

    def to_dict(self):
        d = asdict(self)
        if d["variance"] is None:
            del d["variance"]
        return d


def _mean_and_stderr(s1: int, s2: int, count: int, scale: float):
    mean = s1 / count
    if count > 1:
        var = max((s2 - s1 * mean) / (count - 1), 0.0)
    else:
        var = 0.0
    return mean / scale, math.sqrt(var / count) / scale, var / scale ** 2


def _chunk_sums(shapes, w, pats, n1, seed, chunk, size):
    rng = np.random.default_rng([seed, chunk])
    f = f_batch(shapes, w, pats, rng.random((size, n1)))
    return int(f.sum()), int((f * f).sum())


def theory_moment_mc(pats, w: Word, samples: int, seed: int = 0, *,
                     max_length: int = DEFAULT_MAX_LENGTH,
                     threads: Optional[int] = None) -> MomentEstimate:
    """Monte Carlo estimate of the limiting moment of ``w``.

    ``pats`` is one index-space pattern per letter (or a single pattern used
    for every letter).  Odd or star-imbalanced words return an exact zero
    without sampling.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    shapes = enumerate_shapes(w, max_length)
    if not shapes:
        return MomentEstimate(0.0, 0.0, 0, "exact")
    pats = as_index_patterns(pats, w.letters)
    n1 = w.half_length + 1
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)

    def work(c):
        return _chunk_sums(shapes, w, pats, n1, seed, c, sizes[c])

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            sums = list(pool.map(work, range(len(sizes))))
    else:
        sums = [work(c) for c in range(len(sizes))]
    s1 = sum(s for s, _ in sums)
    s2 = sum(s for _, s in sums)
    value, stderr, var = _mean_and_stderr(s1, s2, samples, math.factorial(n1))
    return MomentEstimate(value, stderr, samples, "mc", var)


def theory_moment_grid(pats, w: Word, g: int, *,
                       budget: int = GRID_BUDGET,
                       max_length: int = DEFAULT_MAX_LENGTH) -> MomentEstimate:
    """Midpoint rule on ``g**(n+1)`` cells.

    Cells whose midpoint repeats a coordinate contribute nothing, as ``f`` is
    zero there by definition; the estimate therefore approaches the limit
    from below at rate ``O(1/g)``.
    """
    if g < 2:
        raise ValidationError("grid needs g >= 2")
    shapes = enumerate_shapes(w, max_length)
    if not shapes:
        return MomentEstimate(0.0, 0.0, 0, "exact")
    pats = as_index_patterns(pats, w.letters)
    n1 = w.half_length + 1
    cells = g ** n1
    if cells > budget:
        raise BudgetExceededError(f"{g}^{n1} = {cells} grid cells exceed the budget of {budget}")
    mids = (np.arange(g) + 0.5) / g
    total = 0
    step = max(1, 1 << 16)
    for start in range(0, cells, step):
        flat = np.arange(start, min(start + step, cells))
        idx = np.stack(np.unravel_index(flat, (g,) * n1), axis=1)
        total += int(f_batch(shapes, w, pats, mids[idx]).sum())
    value = total / cells / math.factorial(n1)
    return MomentEstimate(value, 0.0, cells, "grid")
