"""Patterns: subsets of the unit square described by small CSG trees.

A pattern lives in one of two coordinate conventions:

``picture``
    ``(x, y)`` with ``x`` growing to the right and ``y`` growing upwards, the
    way a shape is drawn.  Pattern files default to this.
``index``
    ``(r, c)`` with ``r`` the row coordinate (growing downwards) and ``c`` the
    column coordinate.  Matrix entry ``(i, j)`` of an ``N x N`` approximating
    matrix is active when ``((i - 0.5) / N, (j - 0.5) / N)`` is in the pattern,
    and the path counting function tests ordered pairs ``(x_a, x_b)`` against
    the same set.

The two are related by the measure preserving flip ``(r, c) -> (c, 1 - r)``:
a picture pattern ``S`` becomes the index pattern ``{(r, c) : (c, 1 - r) in S}``.
So the picture triangle ``x + y <= 1`` is the lower triangular index pattern
``c <= r``.

Leaves are closed sets (boundary points are inside); ``Complement`` is strict
negation.  All membership tests are vectorised over numpy arrays.
"""

from __future__ import annotations

import functools
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import PatternSyntaxError, ValidationError

PICTURE = "picture"
INDEX = "index"
SPACES = (PICTURE, INDEX)


class Node:
    """Base class of pattern expression nodes."""

    def contains(self, u, v):
        raise NotImplementedError

    def flipped(self) -> "Node":
        """The node mapped from picture to index coordinates."""
        raise NotImplementedError

    def unflipped(self) -> "Node":
        """Inverse of :meth:`flipped`."""
        raise NotImplementedError


@dataclass(frozen=True)
class Full(Node):
    def contains(self, u, v):
        return np.ones(np.broadcast(u, v).shape, dtype=bool)

    def flipped(self):
        return self

    def unflipped(self):
        return self


@dataclass(frozen=True)
class Empty(Node):
    def contains(self, u, v):
        return np.zeros(np.broadcast(u, v).shape, dtype=bool)

    def flipped(self):
        return self

    def unflipped(self):
        return self


@dataclass(frozen=True)
class Disc(Node):
    cx: float
    cy: float
    r: float

    def contains(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return (u - self.cx) ** 2 + (v - self.cy) ** 2 <= self.r * self.r

    def flipped(self):
        return Disc(1.0 - self.cy, self.cx, self.r)

    def unflipped(self):
        return Disc(self.cy, 1.0 - self.cx, self.r)


@dataclass(frozen=True)
class Rect(Node):
    x0: float
    y0: float
    x1: float
    y1: float

    def contains(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return (u >= self.x0) & (u <= self.x1) & (v >= self.y0) & (v <= self.y1)

    def flipped(self):
        return Rect(1.0 - self.y1, self.x0, 1.0 - self.y0, self.x1)

    def unflipped(self):
        return Rect(self.y0, 1.0 - self.x1, self.y1, 1.0 - self.x0)


@dataclass(frozen=True)
class HalfPlane(Node):
    """The closed half plane ``a*u + b*v <= c``."""

    a: float
    b: float
    c: float

    def contains(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return self.a * u + self.b * v <= self.c

    def flipped(self):
        # a*x + b*y <= c with x = c', y = 1 - r
        return HalfPlane(-self.b, self.a, self.c - self.b)

    def unflipped(self):
        return HalfPlane(self.b, -self.a, self.c - self.a)


@dataclass(frozen=True)
class Polygon(Node):
    vertices: tuple

    def contains(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        inside = np.zeros(u.shape, dtype=bool)
        on_edge = np.zeros(u.shape, dtype=bool)
        pts = self.vertices
        for k in range(len(pts)):
            x1, y1 = pts[k]
            x2, y2 = pts[(k + 1) % len(pts)]
            crosses = (y1 > v) != (y2 > v)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_at = (x2 - x1) * (v - y1) / (y2 - y1) + x1
            inside ^= crosses & (u < x_at)
            on_edge |= _segment_distance(u, v, x1, y1, x2, y2) <= 1e-12
        return inside | on_edge

    def flipped(self):
        return Polygon(tuple((1.0 - y, x) for x, y in self.vertices))

    def unflipped(self):
        return Polygon(tuple((y, 1.0 - x) for x, y in self.vertices))


def _segment_distance(u, v, x1, y1, x2, y2):
    dx, dy = x2 - x1, y2 - y1
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        return np.hypot(u - x1, v - y1)
    t = np.clip(((u - x1) * dx + (v - y1) * dy) / length2, 0.0, 1.0)
    return np.hypot(u - (x1 + t * dx), v - (y1 + t * dy))


@dataclass(frozen=True)
class Bitmap(Node):
    """A grid of ``height`` rows by ``width`` cells; a cell decides its whole area.

    ``cells[0]`` is the top row of the picture.  When ``picture`` is true the
    node is read in picture coordinates (``y`` measured upwards); otherwise the
    first coordinate selects the row and the second the column.
    """

    width: int
    height: int
    cells: tuple
    picture: bool = True
    _grid: np.ndarray = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        grid = np.array(self.cells, dtype=bool).reshape(self.height, self.width)
        grid.setflags(write=False)
        object.__setattr__(self, "_grid", grid)

    def contains(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.picture:
            col = np.floor(u * self.width)
            row = np.floor((1.0 - v) * self.height)
        else:
            row = np.floor(u * self.height)
            col = np.floor(v * self.width)
        col = np.clip(col, 0, self.width - 1).astype(np.intp)
        row = np.clip(row, 0, self.height - 1).astype(np.intp)
        return self._grid[row, col]

    def flipped(self):
        return Bitmap(self.width, self.height, self.cells, picture=False)

    def unflipped(self):
        return Bitmap(self.width, self.height, self.cells, picture=True)


@dataclass(frozen=True)
class Union(Node):
    children: tuple

    def contains(self, u, v):
        out = np.zeros(np.broadcast(u, v).shape, dtype=bool)
        for child in self.children:
            out |= child.contains(u, v)
        return out

    def flipped(self):
        return Union(tuple(c.flipped() for c in self.children))

    def unflipped(self):
        return Union(tuple(c.unflipped() for c in self.children))


@dataclass(frozen=True)
class Intersect(Node):
    children: tuple

    def contains(self, u, v):
        out = np.ones(np.broadcast(u, v).shape, dtype=bool)
        for child in self.children:
            out &= child.contains(u, v)
        return out

    def flipped(self):
        return Intersect(tuple(c.flipped() for c in self.children))

    def unflipped(self):
        return Intersect(tuple(c.unflipped() for c in self.children))


@dataclass(frozen=True)
class Complement(Node):
    child: Node

    def contains(self, u, v):
        return ~self.child.contains(u, v)

    def flipped(self):
        return Complement(self.child.flipped())

    def unflipped(self):
        return Complement(self.child.unflipped())


@dataclass(frozen=True)
class Difference(Node):
    left: Node
    right: Node

    def contains(self, u, v):
        return self.left.contains(u, v) & ~self.right.contains(u, v)

    def flipped(self):
        return Difference(self.left.flipped(), self.right.flipped())

    def unflipped(self):
        return Difference(self.left.unflipped(), self.right.unflipped())


@dataclass(frozen=True)
class Pattern:
    """A pattern expression together with its coordinate convention."""

    expr: Node
    space: str = PICTURE

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValidationError(f"unknown coordinate space {self.space!r}")

    def contains(self, u, v):
        """Vectorised membership; returns a boolean array."""
        return self.expr.contains(u, v)

    @property
    def is_full(self) -> bool:
        return isinstance(self.expr, Full)

    @property
    def is_empty(self) -> bool:
        return isinstance(self.expr, Empty)


FULL = Pattern(Full(), INDEX)
EMPTY = Pattern(Empty(), INDEX)


def contains(p: Pattern, x: float, y: float) -> bool:
    """Membership of a single point, in the pattern's own coordinates."""
    return bool(p.contains(float(x), float(y)))


def to_index_space(p: Pattern) -> Pattern:
    """Convert a picture-space pattern to index space (no-op if already there)."""
    if p.space == INDEX:
        return p
    return Pattern(p.expr.flipped(), INDEX)


def to_picture_space(p: Pattern) -> Pattern:
    if p.space == PICTURE:
        return p
    return Pattern(p.expr.unflipped(), PICTURE)


def cell_active(p: Pattern, n: int, i: int, j: int, supersample: int = 1) -> bool:
    """Whether entry ``(i, j)`` (1-based) of the ``n x n`` matrix is active.

    With ``supersample = k > 1`` the cell is tested at a ``k x k`` grid of
    sub-cell centres and is active if any of them lies in the pattern.
    """
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValidationError(f"cell ({i}, {j}) outside a {n}x{n} matrix")
    offsets = (np.arange(supersample) + 0.5) / supersample
    r = (i - 1 + offsets[:, None]) / n
    c = (j - 1 + offsets[None, :]) / n
    return bool(np.any(p.contains(r, c)))


@functools.lru_cache(maxsize=64)
def activation_mask(p: Pattern, n: int, supersample: int = 1) -> np.ndarray:
    """Boolean ``n x n`` mask of active entries for an index-space pattern."""
    if p.space != INDEX:
        raise ValidationError("activation_mask expects an index-space pattern")
    if supersample < 1:
        raise ValidationError("supersample must be >= 1")
    k = supersample
    fine = (np.arange(n * k) + 0.5) / (n * k)
    hits = p.contains(fine[:, None], fine[None, :])
    mask = hits.reshape(n, k, n, k).any(axis=(1, 3))
    mask.setflags(write=False)
    return mask


def area_mc(p: Pattern, samples: int, seed: int = 0):
    """Monte Carlo estimate of the pattern's area with its standard error."""
    from .integrator import MomentEstimate

    if samples < 1:
        raise ValidationError("samples must be >= 1")
    rng = np.random.default_rng([seed, 0xA8EA])
    hits = 0
    done = 0
    while done < samples:
        k = min(1 << 20, samples - done)
        pts = rng.random((k, 2))
        hits += int(np.count_nonzero(p.contains(pts[:, 0], pts[:, 1])))
        done += k
    mean = hits / samples
    if samples > 1:
        var = (hits - samples * mean * mean) / (samples - 1)
        stderr = math.sqrt(max(var, 0.0) / samples)
    else:
        stderr = 0.0
    return MomentEstimate(mean, stderr, samples, "mc")


# -- presets -----------------------------------------------------------------

PRESETS = {
    "full": Full(),
    "empty": Empty(),
    "lower-triangular": HalfPlane(1.0, 1.0, 1.0),
    "upper-triangular": HalfPlane(-1.0, -1.0, -1.0),
    "three-discs": Union((
        Disc(0.5, 0.33, 1.0 / math.sqrt(8.0)),
        Disc(0.25, 1.0 / 6.0, 1.0 / 6.0),
        Disc(5.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0),
    )),
}


def preset(name: str, space: str = INDEX) -> Pattern:
    """A named preset, returned in ``space`` (index space by default)."""
    try:
        expr = PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    p = Pattern(expr, PICTURE)
    return to_index_space(p) if space == INDEX else p


# -- parsing -----------------------------------------------------------------

def _unit(value, what):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{what}: expected a number, got {value!r}") from None
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{what}: coordinate {value} outside [0, 1]")
    return value


def _numbers(args, count, what):
    if not isinstance(args, (list, tuple)) or len(args) != count:
        raise ValidationError(f"{what}: expected {count} numbers, got {args!r}")
    return args


def _build(obj) -> Node:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValidationError(
            f"each pattern node must be an object with one key, got {obj!r}")
    (kind, args), = obj.items()
    if kind == "preset":
        if args not in PRESETS:
            raise ValidationError(f"unknown preset {args!r}")
        return PRESETS[args]
    if kind == "disc":
        cx, cy, r = _numbers(args, 3, "disc")
        r = float(r)
        if r < 0:
            raise ValidationError("disc: negative radius")
        return Disc(_unit(cx, "disc"), _unit(cy, "disc"), r)
    if kind == "rect":
        x0, y0, x1, y1 = (_unit(a, "rect") for a in _numbers(args, 4, "rect"))
        if x0 > x1 or y0 > y1:
            raise ValidationError("rect: need x0 <= x1 and y0 <= y1")
        return Rect(x0, y0, x1, y1)
    if kind == "halfplane":
        a, b, c = (float(t) for t in _numbers(args, 3, "halfplane"))
        if not all(math.isfinite(t) for t in (a, b, c)):
            raise ValidationError("halfplane: coefficients must be finite")
        return HalfPlane(a, b, c)
    if kind == "polygon":
        if not isinstance(args, list) or len(args) < 3:
            raise ValidationError("polygon: need at least three vertices")
        return Polygon(tuple(
            (_unit(x, "polygon"), _unit(y, "polygon"))
            for x, y in (_numbers(pt, 2, "polygon vertex") for pt in args)))
    if kind == "bitmap":
        try:
            w, h, rows = int(args["w"]), int(args["h"]), args["rows"]
        except (TypeError, KeyError, ValueError):
            raise ValidationError("bitmap: expected {w, h, rows}") from None
        if len(rows) != h or any(len(row) != w for row in rows):
            raise ValidationError(f"bitmap: rows do not form a {h}x{w} grid")
        if any(ch not in "01" for row in rows for ch in row):
            raise ValidationError("bitmap: rows may only contain '0' and '1'")
        return Bitmap(w, h, tuple(tuple(ch == "1" for ch in row) for row in rows))
    if kind in ("union", "intersect"):
        if not isinstance(args, list) or not args:
            raise ValidationError(f"{kind}: expected a non-empty list")
        children = tuple(_build(a) for a in args)
        return Union(children) if kind == "union" else Intersect(children)
    if kind == "complement":
        return Complement(_build(args))
    if kind == "difference":
        if not isinstance(args, list) or len(args) != 2:
            raise ValidationError("difference: expected [p, q]")
        return Difference(_build(args[0]), _build(args[1]))
    raise ValidationError(f"unknown pattern node {kind!r}")


def parse_pattern(text: str) -> Pattern:
    """Parse pattern-file JSON into a :class:`Pattern` in its declared space.

    The top level is either a single node object, optionally with an extra
    ``"space"`` key, or ``{"space": ..., "pattern": node}``.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PatternSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(obj, dict):
        raise PatternSyntaxError("pattern file must contain a JSON object", 1, 1)
    obj = dict(obj)
    space = obj.pop("space", PICTURE)
    if space not in SPACES:
        raise ValidationError(f"unknown coordinate space {space!r}")
    node = obj.pop("pattern") if "pattern" in obj else obj
    return Pattern(_build(node), space)


def parse_pgm(data: bytes) -> Pattern:
    """Read a P2/P5 PGM image; nonzero pixels become active cells."""
    tokens = []
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            ch = data[pos:pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValidationError("truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic not in (b"P2", b"P5"):
        raise ValidationError(f"not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(next_token()) for _ in range(3))
    except ValueError:
        raise ValidationError("malformed PGM header") from None
    if magic == b"P5":
        pos += 1
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    else:
        while len(tokens) < width * height:
            tokens.append(int(next_token()))
        pixels = np.array(tokens)
    grid = pixels.reshape(height, width) != 0
    return Pattern(Bitmap(width, height, tuple(map(tuple, grid.tolist()))), PICTURE)


def load_pattern(source: str) -> Pattern:
    """Resolve a CLI pattern argument (file path or preset name) to index space."""
    if os.path.exists(source):
        with open(source, "rb") as fh:
            data = fh.read()
        if data[:2] in (b"P2", b"P5"):
            p = parse_pgm(data)
        else:
            p = parse_pattern(data.decode("utf-8"))
    elif source in PRESETS:
        p = Pattern(PRESETS[source], PICTURE)
    else:
        raise ValidationError(f"{source!r} is neither a pattern file nor a preset")
    return to_index_space(p)


def as_index_patterns(pats, letters: int) -> list:
    """Normalise a single pattern or a per-letter sequence to index space."""
    if isinstance(pats, Pattern):
        pats = [pats] * letters
    pats = [to_index_space(p) for p in pats]
    if len(pats) != letters:
        raise ValidationError(
            f"word uses {letters} letter(s) but {len(pats)} pattern(s) given")
    return pats
