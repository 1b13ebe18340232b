"""Approximating matrices and their empirical starred moments.

Random streams: the matrices of letter ``l`` for trials in block ``b`` come from
``default_rng([seed, l, b])``, where a block holds ``block_size(N)`` consecutive
trials.  Blocks are a fixed function of ``N``, so estimates do not depend on
the number of worker threads.  The full ``N x N`` array of draws is generated
before masking, so two patterns sampled with the same stream agree on their
common cells.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceededError, NumericalError, ValidationError
from .integrator import MomentEstimate
from .pattern import Pattern, activation_mask, as_index_patterns, to_index_space
from .words import Word

ORACLE_BUDGET = 10 ** 7
_BLOCK_ENTRIES = 1 << 18
DISTRIBUTIONS = ("gaussian-real", "gaussian-complex", "rademacher", "fourth-root")


def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


@dataclass(frozen=True)
class EntryDist:
    """Distribution of the unscaled entries; all have mean 0 and ``E|z|^2 = 1``."""

    kind: str = "gaussian-real"

    def __post_init__(self):
        if self.kind not in DISTRIBUTIONS:
            raise ValidationError(
                f"unknown distribution {self.kind!r}; choose from {DISTRIBUTIONS}")

    @property
    def is_complex(self) -> bool:
        return self.kind in ("gaussian-complex", "fourth-root")

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "gaussian-real":
            return rng.standard_normal(shape)
        if self.kind == "rademacher":
            return rng.integers(0, 2, shape) * 2.0 - 1.0
        if self.kind == "fourth-root":
            return (1j ** np.arange(4))[rng.integers(0, 4, shape)]
        z = rng.standard_normal((2,) + tuple(np.atleast_1d(shape)))
        return (z[0] + 1j * z[1]) / math.sqrt(2.0)

    def moment(self, p: int, q: int) -> int:
        """``E[z^p conj(z)^q]``, exactly."""
        if self.kind == "gaussian-real":
            return _double_factorial(p + q - 1) if (p + q) % 2 == 0 else 0
        if self.kind == "rademacher":
            return 1 if (p + q) % 2 == 0 else 0
        if self.kind == "fourth-root":
            return 1 if (p - q) % 4 == 0 else 0
        return math.factorial(p) if p == q else 0


def _as_dist(d) -> EntryDist:
    return d if isinstance(d, EntryDist) else EntryDist(d)


def block_size(n: int) -> int:
    return max(1, _BLOCK_ENTRIES // (n * n))


def sample_block(p: Pattern, n: int, dist, seed: int, count: int, stream=(0, 0),
                 supersample: int = 1) -> np.ndarray:
    """``count`` independent approximating matrices, shape ``(count, n, n)``."""
    dist = _as_dist(dist)
    mask = activation_mask(to_index_space(p), n, supersample)
    rng = np.random.default_rng([seed, *stream])
    draws = dist.sample(rng, (count, n, n))
    return draws * (mask / math.sqrt(n))


def sample_matrix(p: Pattern, n: int, dist="gaussian-real", seed: int = 0, *,
                  supersample: int = 1) -> np.ndarray:
    """One ``n x n`` approximating matrix of ``p`` (first trial of stream ``seed``)."""
    if n < 1:
        raise ValidationError("matrix size must be >= 1")
    return sample_block(p, n, dist, seed, 1, supersample=supersample)[0]


def _factors(assign, w: Word):
    try:
        mats = [assign[letter] for letter in range(w.letters)]
    except (KeyError, IndexError):
        raise ValidationError("a matrix is needed for every letter of the word") from None
    shape = np.shape(mats[0])
    if any(np.shape(m) != shape for m in mats) or shape[-1] != shape[-2]:
        raise ValidationError("all matrices must be square and of the same size")
    adjoints = {}
    out = []
    for letter, starred in w.symbols:
        if starred:
            if letter not in adjoints:
                adjoints[letter] = np.conj(np.swapaxes(mats[letter], -1, -2))
            out.append(adjoints[letter])
        else:
            out.append(mats[letter])
    return out


def word_product(assign, w: Word) -> np.ndarray:
    """The matrix ``F_1 F_2 ... F_m`` of the word, evaluated left to right."""
    factors = _factors(assign, w)
    out = factors[0]
    for f in factors[1:]:
        out = out @ f
    return out


def word_trace(assign, w: Word):
    """Normalised trace of the word product, ``(1/N) Tr(F_1 F_2 ... F_m)``.

    ``assign`` maps letter ids to matrices; a leading batch axis is allowed, in
    which case an array of traces is returned.
    """
    factors = _factors(assign, w)
    n = factors[0].shape[-1]
    head = factors[0]
    for f in factors[1:-1]:
        head = head @ f
    if len(factors) == 1:
        tr = np.trace(head, axis1=-2, axis2=-1)
    else:
        # Tr(A B) = sum_ij A_ij B_ji, saving the last product
        tr = np.einsum("...ij,...ji->...", head, factors[-1])
    tr = tr / n
    return complex(tr) if np.ndim(tr) == 0 else tr


def _trial_traces(pats, w, n, trials, dist, seed, threads, supersample):
    size = block_size(n)
    blocks = [(b, min(size, trials - b * size)) for b in range(math.ceil(trials / size))]

    def work(block):
        b, count = block
        assign = [sample_block(pats[letter], n, dist, seed, count, (letter, b), supersample)
                  for letter in range(w.letters)]
        if count == 1:
            # plain 2-D products let BLAS handle the adjoint as a transpose flag
            assign = [a[0] for a in assign]
        return np.atleast_1d(word_trace(assign, w))

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    return np.concatenate(parts)


def empirical_moment(pats, w: Word, n: int, trials: int, dist="gaussian-real",
                     seed: int = 0, *, threads: Optional[int] = None,
                     supersample: int = 1) -> MomentEstimate:
    """Mean of ``Re tr(X^w)`` over independent trials, with its standard error.

    ``variance`` holds the trial variance of the real part.
    """
    if n < 1 or trials < 1:
        raise ValidationError("size and trials must be >= 1")
    pats = as_index_patterns(pats, w.letters)
    values = _trial_traces(pats, w, n, trials, _as_dist(dist), seed, threads, supersample).real
    if not np.all(np.isfinite(values)):
        raise NumericalError("non-finite trace encountered")
    var = float(values.var(ddof=1)) if trials > 1 else 0.0
    return MomentEstimate(float(values.mean()), math.sqrt(var / trials), trials,
                          "empirical", var)


def exact_moment_oracle(pats, w: Word, n: int, dist="gaussian-real", *,
                        budget: int = ORACLE_BUDGET) -> float:
    """Exact ``E[tr(X^w)]`` by summing the trace expansion over all index tuples.

    Each tuple uses the variables ``(letter, row, col)``; the expectation of
    the term is the product over distinct variables of ``E[z^p conj(z)^q]``,
    with ``p`` plain and ``q`` adjoint uses, and vanishes if a used entry is
    inactive.
    """
    dist = _as_dist(dist)
    m = len(w)
    total_terms = n ** m
    if total_terms > budget:
        raise BudgetExceededError(f"{n}^{m} index tuples exceed the budget of {budget}")
    pats = as_index_patterns(pats, w.letters)
    masks = np.stack([activation_mask(p, n) for p in pats]).reshape(-1)
    letters = np.array([letter for letter, _ in w.symbols])
    starred = np.array([s for _, s in w.symbols])
    max_use = m + 1
    table = np.array([[dist.moment(p, q) for q in range(max_use)]
                      for p in range(max_use)], dtype=np.float64)

    total = 0.0
    step = 1 << 16
    for start in range(0, total_terms, step):
        flat = np.arange(start, min(start + step, total_terms))
        idx = np.stack(np.unravel_index(flat, (n,) * m), axis=1)
        nxt = np.roll(idx, -1, axis=1)
        rows = np.where(starred, nxt, idx)
        cols = np.where(starred, idx, nxt)
        var = (letters * n + rows) * n + cols
        active = masks[var].all(axis=1)
        order = np.argsort(var, axis=1, kind="stable")
        var = np.take_along_axis(var, order, axis=1)
        st = np.take_along_axis(np.broadcast_to(starred, var.shape), order, axis=1)
        weight = active.astype(np.float64)
        p = np.zeros(len(var), dtype=np.intp)
        q = np.zeros(len(var), dtype=np.intp)
        for k in range(m):
            if k > 0:
                new = var[:, k] != var[:, k - 1]
                weight = np.where(new, weight * table[p, q], weight)
                p = np.where(new, 0, p)
                q = np.where(new, 0, q)
            p = p + ~st[:, k]
            q = q + st[:, k]
        weight = weight * table[p, q]
        total += float(weight.sum())
    return total / n ** (m / 2 + 1)


def spectrum(p: Pattern, n: int, dist="gaussian-real", seed: int = 0) -> np.ndarray:
    """Eigenvalues of one sampled approximating matrix."""
    x = sample_matrix(p, n, dist, seed)
    try:
        eig = np.linalg.eigvals(x)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    return eig.astype(complex)


def write_spectrum_csv(eigs, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["re", "im"])
        for z in eigs:
            out.writerow([repr(float(z.real)), repr(float(z.imag))])
