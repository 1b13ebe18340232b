"""Centered alternating products of independent patterned matrices.

For factors ``(X_k^{w_k} - m_k I)`` whose groups alternate and whose group-2
matrices are fully filled, ``E[tr(prod_k (X_k^{w_k} - m_k I))]`` tends to zero
when each ``m_k`` is the limiting moment of its factor.

Letters name matrices globally: the same lowercase character in two factors
is the same matrix, and it must then carry the same pattern and group.
Distinct letters get independent streams.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .ensemble import _as_dist, block_size, sample_block, word_product
from .errors import ValidationError
from .integrator import MomentEstimate, theory_moment_mc
from .pattern import Pattern, load_pattern, parse_pattern, to_index_space
from .words import is_even_balanced, parse_word

CENTER_SAMPLES = 10 ** 6


@dataclass(frozen=True)
class Factor:
    group: int
    pattern: Pattern
    word: str
    center: Optional[float] = None


@dataclass(frozen=True)
class AlternatingSpec:
    factors: tuple
    sizes: tuple = (100, 200, 400, 800)
    trials: int = 10
    dist: str = "gaussian-real"
    seed: int = 0
    center_samples: int = CENTER_SAMPLES
    compute_centers: bool = True
    letters: tuple = field(init=False, default=())

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("an alternating product needs at least one factor")
        owners = {}
        for k, f in enumerate(self.factors):
            if f.group not in (1, 2):
                raise ValidationError(f"factor {k}: group must be 1 or 2")
            w = parse_word(f.word)
            if len(w.names) != 1:
                raise ValidationError(f"factor {k}: word {f.word!r} must use a single letter")
            name = w.names[0]
            seen = owners.setdefault(name, (f.group, to_index_space(f.pattern)))
            if seen != (f.group, to_index_space(f.pattern)):
                raise ValidationError(
                    f"letter {name!r} is reused with a different pattern or group; "
                    "independent factors need distinct letters")
        object.__setattr__(self, "letters", tuple(owners))
        _check_hypotheses(self.factors)


def _check_hypotheses(factors):
    for k in range(len(factors) - 1):
        if factors[k].group == factors[k + 1].group:
            warnings.warn(f"factors {k} and {k + 1} are in the same group; "
                          "no vanishing is guaranteed", stacklevel=3)
    for k, f in enumerate(factors):
        if f.group == 2 and not to_index_space(f.pattern).is_full:
            warnings.warn(f"factor {k} is in group 2 but its pattern is not full",
                          stacklevel=3)
    for k, f in enumerate(factors):
        if not is_even_balanced(parse_word(f.word)):
            warnings.warn(f"factor {k}: word {f.word!r} is not balanced; "
                          "its limiting moment is 0", stacklevel=3)


def resolve_centers(spec: AlternatingSpec) -> AlternatingSpec:
    """Fill in missing centers with Monte Carlo limiting moments."""
    factors = []
    for k, f in enumerate(spec.factors):
        if f.center is None:
            if not spec.compute_centers:
                raise ValidationError(f"factor {k} has no center and computing them is disabled")
            est = theory_moment_mc(to_index_space(f.pattern), parse_word(f.word),
                                   spec.center_samples, spec.seed)
            f = replace(f, center=est.value)
        factors.append(f)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return replace(spec, factors=tuple(factors))


def centered_moment(spec: AlternatingSpec, n: int) -> MomentEstimate:
    """Estimate ``E[Re tr(prod_k (X_k^{w_k} - m_k I))]`` at size ``n``."""
    spec = resolve_centers(spec)
    dist = _as_dist(spec.dist)
    index = {name: i for i, name in enumerate(spec.letters)}
    owner = {}
    for f in spec.factors:
        owner.setdefault(parse_word(f.word).names[0], to_index_space(f.pattern))
    size = block_size(n)
    values = []
    for b in range(math.ceil(spec.trials / size)):
        count = min(size, spec.trials - b * size)
        mats = {name: sample_block(p, n, dist, spec.seed, count, (index[name], b))
                for name, p in owner.items()}
        eye = np.eye(n)
        prod = None
        for f in spec.factors:
            w = parse_word(f.word)
            term = word_product([mats[w.names[0]]], w) - f.center * eye
            prod = term if prod is None else prod @ term
        values.append(np.trace(prod, axis1=-2, axis2=-1).real / n)
    values = np.concatenate([np.atleast_1d(v) for v in values])
    var = float(values.var(ddof=1)) if len(values) > 1 else 0.0
    return MomentEstimate(float(values.mean()), math.sqrt(var / len(values)),
                          len(values), "empirical", var)


def freeness_sweep(spec: AlternatingSpec) -> list:
    """One ``(N, estimate, stderr)`` row per size in ``spec.sizes``."""
    spec = resolve_centers(spec)
    rows = []
    for n in spec.sizes:
        est = centered_moment(spec, n)
        rows.append((n, est.value, est.stderr))
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["N", "estimate", "stderr"])
    for n, value, stderr in rows:
        out.writerow([n, repr(value), repr(stderr)])
    return buf.getvalue()


def _pattern_from_json(obj, base_dir):
    if isinstance(obj, str):
        path = obj if os.path.isabs(obj) else os.path.join(base_dir, obj)
        return load_pattern(path if os.path.exists(path) else obj)
    return to_index_space(parse_pattern(json.dumps(obj)))


def load_spec(source, **overrides) -> AlternatingSpec:
    """Build an :class:`AlternatingSpec` from a JSON file path or a dict.

    ``{"factors": [{"group": 1, "pattern": "three-discs", "word": "aA",
    "center": 0.5}, ...], "sizes": [...], "trials": 10, "dist": ..., "seed": 0}``;
    a pattern is a preset name, a file path or an inline pattern object.
    """
    base_dir = "."
    if isinstance(source, (str, os.PathLike)):
        base_dir = os.path.dirname(os.path.abspath(source))
        with open(source, encoding="utf-8") as fh:
            try:
                source = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"spec file: {exc}") from None
    try:
        factors = tuple(
            Factor(int(f["group"]), _pattern_from_json(f["pattern"], base_dir),
                   str(f["word"]), None if f.get("center") is None else float(f["center"]))
            for f in source["factors"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed freeness spec: {exc}") from None
    kwargs = {k: source[k] for k in ("trials", "dist", "seed", "center_samples",
                                      "compute_centers") if k in source}
    if "sizes" in source:
        kwargs["sizes"] = tuple(int(n) for n in source["sizes"])
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return AlternatingSpec(factors, **kwargs)
