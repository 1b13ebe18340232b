"""Index paths of the trace expansion and the path counting function.

A path of length ``m`` is a tuple of ``m + 1`` colors (1-based) whose first and
last entries agree; entry ``k`` and ``k + 1`` index the ``k``-th factor of a
product term.  The path counting function of a word of length ``2n`` counts,
at a point ``x`` of ``[0, 1]^(n+1)``, the strictly polar paired paths through
all ``n + 1`` colors whose every step lands in the pattern of its letter.

Such paths are contour walks of plane trees: every tree edge is walked once
down and once back up, and the two walks form one polar pair.  Canonical
shapes (colors numbered by first appearance) are therefore the non-crossing
perfect matchings of the word positions that pair each letter with its own
adjoint, which is how :func:`enumerate_shapes` produces them.  The brute force
routines here (:func:`naive_paths`, :func:`f_naive`) do not use that fact.
"""

from __future__ import annotations

import functools
import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceededError, ValidationError
from .pattern import as_index_patterns
from .words import Word, is_even_balanced

DEFAULT_MAX_LENGTH = 12
NAIVE_BUDGET = 10 ** 7


@dataclass(frozen=True)
class PathClass:
    social: bool
    pairing: bool
    strict_pairing: bool
    polar_paired: bool
    color_count: int
    strict_wedge_at: Optional[int]
    constraint: bool


@dataclass(frozen=True)
class Shape:
    """A canonical constraint path and its polar pairing.

    ``pairs`` holds 1-based edge positions ``(k, l)`` where ``k`` is the
    unstarred member of the pair and ``l`` the starred one.
    """

    path: tuple
    pairs: tuple
    word: Word

    @property
    def constraints(self) -> tuple:
        """``(letter, a, b)`` triples, 0-based colors: ``(x_a, x_b)`` must be in
        the pattern of ``letter``.  One triple per pair."""
        out = []
        for k, _ in self.pairs:
            letter, _starred = self.word.symbols[k - 1]
            out.append((letter, self.path[k - 1] - 1, self.path[k] - 1))
        return tuple(out)


def _check_path(path, w: Word):
    path = tuple(int(c) for c in path)
    if len(path) != len(w) + 1:
        raise ValidationError(
            f"path of length {len(path) - 1} does not match word of length {len(w)}")
    if path[0] != path[-1]:
        raise ValidationError("path must be closed: first and last colors differ")
    if min(path) < 1:
        raise ValidationError("colors are 1-based")
    return path


def _edges(path):
    return [frozenset((path[k], path[k + 1])) for k in range(len(path) - 1)]


def _variables(path, w: Word):
    """The random variable each factor uses: ``(letter, row, col)``.

    An adjoint factor stepping ``a -> b`` reads entry ``(b, a)``.
    """
    out = []
    for k, (letter, starred) in enumerate(w.symbols):
        a, b = path[k], path[k + 1]
        out.append((letter, b, a) if starred else (letter, a, b))
    return out


def find_strict_wedge(path, w: Optional[Word] = None) -> Optional[int]:
    """Smallest 1-based ``k`` with ``i(k) == i(k+2)`` whose edge occurs only there."""
    path = tuple(path)
    edges = _edges(path)
    counts = Counter(edges)
    for k in range(len(path) - 2):
        if path[k] == path[k + 2] and counts[edges[k]] == 2:
            return k + 1
    return None


def classify_path(path, w: Word) -> PathClass:
    path = _check_path(path, w)
    m = len(w)
    counts = Counter(_edges(path))
    social = all(c >= 2 for c in counts.values())
    pairing = social and all(c % 2 == 0 for c in counts.values())
    strict = all(c == 2 for c in counts.values())
    # a polar matching exists iff each variable is used as often plain as adjoint
    usage = Counter()
    for (letter, starred), var in zip(w.symbols, _variables(path, w)):
        usage[var] += -1 if starred else 1
    polar = pairing and all(v == 0 for v in usage.values())
    colors = len(set(path[:-1]))
    constraint = (m % 2 == 0 and strict and polar and colors == m // 2 + 1)
    return PathClass(
        social=social,
        pairing=pairing,
        strict_pairing=strict,
        polar_paired=polar,
        color_count=colors,
        strict_wedge_at=find_strict_wedge(path),
        constraint=constraint,
    )


def remove_wedge(path, k: int) -> tuple:
    """Splice out positions ``k + 1`` and ``k + 2`` (1-based)."""
    path = tuple(path)
    return path[:k] + path[k + 2:]


# -- shapes ------------------------------------------------------------------

def _noncrossing_matchings(symbols, lo, hi):
    if lo == hi:
        yield ()
        return
    letter, starred = symbols[lo]
    for j in range(lo + 1, hi, 2):
        if symbols[j][0] != letter or symbols[j][1] == starred:
            continue
        for inner in _noncrossing_matchings(symbols, lo + 1, j):
            for outer in _noncrossing_matchings(symbols, j + 1, hi):
                yield ((lo, j),) + inner + outer


def _contour_path(m, matching):
    closer = {j for _, j in matching}
    stack = [1]
    path = [1]
    fresh = 2
    for k in range(m):
        if k in closer:
            stack.pop()
        else:
            stack.append(fresh)
            fresh += 1
        path.append(stack[-1])
    return tuple(path)


@functools.lru_cache(maxsize=256)
def _shapes(w: Word) -> tuple:
    if not is_even_balanced(w):
        return ()
    m = len(w)
    shapes = []
    for matching in _noncrossing_matchings(w.symbols, 0, m):
        path = _contour_path(m, matching)
        pairs = []
        for k, l in matching:
            if w.symbols[k][1]:
                k, l = l, k
            pairs.append((k + 1, l + 1))
        shapes.append(Shape(path, tuple(sorted(pairs)), w))
    shapes.sort(key=lambda s: s.path)
    return tuple(shapes)


def enumerate_shapes(w: Word, max_length: int = DEFAULT_MAX_LENGTH) -> list:
    """Canonical constraint paths of ``w``, sorted by their color sequence."""
    if len(w) > max_length:
        raise BudgetExceededError(
            f"word of length {len(w)} exceeds the cap of {max_length}: "
            "combinatorial blowup")
    return list(_shapes(w))


# -- path counting function --------------------------------------------------

def _has_duplicates(x) -> bool:
    bits = np.ascontiguousarray(x, dtype=np.float64).view(np.uint64)
    return len(np.unique(bits)) < len(bits)


def _membership(pats, x):
    x = np.asarray(x, dtype=float)
    return [p.contains(x[:, None], x[None, :]) for p in pats]


def _point(w: Word, x):
    x = np.asarray(x, dtype=float).ravel()
    if len(x) != w.half_length + 1:
        raise ValidationError(
            f"word of length {len(w)} needs a point in dimension "
            f"{w.half_length + 1}, got {len(x)}")
    return x


def f_eval(shapes, w: Word, pats, x) -> int:
    """Path counting function at ``x``; 0 when two coordinates coincide.

    Counts, for each shape, the color-to-coordinate bijections under which
    every step of the path lies in its letter's pattern.
    """
    x = _point(w, x)
    if not shapes or _has_duplicates(x):
        return 0
    pats = as_index_patterns(pats, w.letters)
    member = _membership(pats, x)
    n1 = len(x)
    total = 0
    for shape in shapes:
        # checks[c]: steps whose later-assigned endpoint is color c
        checks = [[] for _ in range(n1)]
        for k, (letter, starred) in enumerate(w.symbols):
            a, b = shape.path[k] - 1, shape.path[k + 1] - 1
            if starred:
                a, b = b, a
            checks[max(a, b)].append((member[letter], a, b))
        total += _count_assignments(checks, n1)
    return total


def _count_assignments(checks, n1):
    sigma = [0] * n1
    used = [False] * n1

    def place(c):
        if c == n1:
            return 1
        count = 0
        for coord in range(n1):
            if used[coord]:
                continue
            sigma[c] = coord
            if all(m[sigma[a], sigma[b]] for m, a, b in checks[c]):
                used[coord] = True
                count += place(c + 1)
                used[coord] = False
        return count

    return place(0)


@functools.lru_cache(maxsize=512)
def _labeled_constraint_paths(w: Word) -> tuple:
    n1 = w.half_length + 1
    out = []
    for head in itertools.product(range(1, n1 + 1), repeat=len(w)):
        if len(set(head)) != n1:
            continue
        path = head + (head[0],)
        if classify_path(path, w).constraint:
            out.append(path)
    return tuple(out)


def f_naive(w: Word, pats, x) -> int:
    """Brute-force path counting function: scan every closed map ``[2n+1] -> [n+1]``."""
    if len(w) % 2:
        return 0
    n = w.half_length
    if n > 4:
        raise BudgetExceededError(f"f_naive refuses n = {n} > 4")
    x = _point(w, x)
    if _has_duplicates(x):
        return 0
    member = _membership(as_index_patterns(pats, w.letters), x)
    count = 0
    for path in _labeled_constraint_paths(w):
        ok = True
        for k, (letter, starred) in enumerate(w.symbols):
            a, b = path[k] - 1, path[k + 1] - 1
            if starred:
                a, b = b, a
            if not member[letter][a, b]:
                ok = False
                break
        count += ok
    return count


def naive_paths(w: Word, n_colors: int, budget: int = NAIVE_BUDGET) -> list:
    """Every closed map ``[m+1] -> [n_colors]`` with its classification."""
    if n_colors ** len(w) > budget:
        raise BudgetExceededError(
            f"{n_colors}^{len(w)} paths exceed the budget of {budget}")
    out = []
    for head in itertools.product(range(1, n_colors + 1), repeat=len(w)):
        path = head + (head[0],)
        out.append((path, classify_path(path, w)))
    return out


# -- batched evaluation ------------------------------------------------------

_GATHER_BUDGET = 1 << 22


@functools.lru_cache(maxsize=64)
def _gather_table(shapes: tuple, n1: int):
    perms = np.array(list(itertools.permutations(range(n1))), dtype=np.intp)
    blocks = []
    for shape in shapes:
        cons = np.array(shape.constraints, dtype=np.intp)
        letter, a, b = cons[:, 0], cons[:, 1], cons[:, 2]
        blocks.append(letter * n1 * n1 + perms[:, a] * n1 + perms[:, b])
    table = np.concatenate(blocks)
    # one contiguous index vector per tree edge
    return tuple(np.ascontiguousarray(table[:, e]) for e in range(table.shape[1]))


def f_batch(shapes, w: Word, pats, points) -> np.ndarray:
    """:func:`f_eval` over the rows of ``points`` (shape ``(B, n + 1)``)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != w.half_length + 1:
        raise ValidationError(
            f"points must have shape (B, {w.half_length + 1}), got {points.shape}")
    out = np.zeros(len(points), dtype=np.int64)
    if not shapes:
        return out
    pats = as_index_patterns(pats, w.letters)
    n1 = points.shape[1]
    columns = _gather_table(tuple(shapes), n1)
    rows = len(columns[0])
    step = max(1, _GATHER_BUDGET // rows)
    for start in range(0, len(points), step):
        x = points[start:start + step]
        member = np.stack(
            [p.contains(x[:, :, None], x[:, None, :]) for p in pats], axis=1)
        flat = member.reshape(len(x), -1)
        acc = flat[:, columns[0]]
        for col in columns[1:]:
            acc &= flat[:, col]
        f = acc.sum(axis=1)
        ordered = np.sort(x, axis=1)
        f[(np.diff(ordered, axis=1) == 0).any(axis=1)] = 0
        out[start:start + step] = f
    return out
