"""Labelled point sets on the integer line and secure-pair primitives.

Coordinates are Python integers, so every equality and sum is exact.
Callers holding rational data should scale to a common denominator first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DuplicateCoordinate, SamePoint
from .rng import derive_rng, random_big_ints

# coordinates safely inside int64 even after computing 2v - u
_INT64_SAFE = 2**61


@dataclass(frozen=True)
class PointSet:
    """An immutable labelled set of distinct integer points.

    Label ``i`` sits at ``coords[i]``. Construct with :func:`make_point_set`
    or one of the generators rather than directly.
    """

    coords: tuple[int, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.coords) == 0:
            raise ValueError("a point set needs at least one point")
        index = {}
        for label, x in enumerate(self.coords):
            if x in index:
                raise DuplicateCoordinate(
                    f"labels {index[x]} and {label} share coordinate {x}"
                )
            index[x] = label
        object.__setattr__(self, "_index", index)

    @property
    def n(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, label: int) -> int:
        return self.coords[label]

    def __contains__(self, value: int) -> bool:
        return value in self._index

    def label_of(self, value: int) -> int | None:
        """Label of the point at ``value``, or ``None`` if unoccupied."""
        return self._index.get(value)

    def distance(self, u: int, v: int) -> int:
        return abs(self.coords[u] - self.coords[v])

    @cached_property
    def fits_int64(self) -> bool:
        return all(-_INT64_SAFE < x < _INT64_SAFE for x in self.coords)

    def as_array(self) -> np.ndarray:
        """Coordinates as an int64 array, or an object array when they are too large."""
        if self.fits_int64:
            return np.array(self.coords, dtype=np.int64)
        return np.array(self.coords, dtype=object)

    # -- serialisation ---------------------------------------------------

    def to_text(self) -> str:
        return "".join(f"{label} {x}\n" for label, x in enumerate(self.coords))

    @classmethod
    def from_text(cls, text: str) -> "PointSet":
        entries = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected '<label> <coordinate>'")
            label, x = int(parts[0]), int(parts[1])
            if label in entries:
                raise ValueError(f"line {lineno}: label {label} repeated")
            entries[label] = x
        if sorted(entries) != list(range(len(entries))):
            raise ValueError("labels must be exactly 0..n-1")
        return make_point_set([entries[i] for i in range(len(entries))])

    def to_json(self) -> str:
        return json.dumps(list(self.coords))

    @classmethod
    def from_json(cls, text: str) -> "PointSet":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(x, int) for x in data):
            raise ValueError("expected a JSON array of integers")
        return make_point_set(data)


def make_point_set(values: Iterable[int]) -> PointSet:
    """Build a :class:`PointSet`; labels follow input order.

    Raises :class:`DuplicateCoordinate` if two values coincide.
    """
    return PointSet(tuple(int(x) for x in values))


def load_point_set(path: str | Path) -> PointSet:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return PointSet.from_json(text)
    return PointSet.from_text(text)


def save_point_set(V: PointSet, path: str | Path) -> None:
    path = Path(path)
    path.write_text(V.to_json() + "\n" if path.suffix == ".json" else V.to_text())


# -- generators ------------------------------------------------------------


def gen_generic(n: int, seed: int) -> PointSet:
    """``n`` distinct integers drawn uniformly without replacement from ``[0, n**5]``.

    The range is wide enough that three-term progressions, and with them
    secure pairs, are rare.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    bound = n**5 + 1
    rng = derive_rng(seed, "gen_generic", n)
    seen: set[int] = set()
    values: list[int] = []
    while len(values) < n:
        for x in random_big_ints(rng, bound, n - len(values)):
            if x not in seen:
                seen.add(x)
                values.append(x)
    return make_point_set(values)


def gen_progression(n: int) -> PointSet:
    """The arithmetic progression ``1, 2, ..., n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return make_point_set(range(1, n + 1))


def product_position(k: int, i: int, s: int) -> int:
    """Position of clique member ``s`` (1-based) in clique ``i`` (1-based).

    Equals ``k**(i-1) + ... + k + s``; the geometric part is empty for ``i = 1``.
    """
    return sum(k**j for j in range(1, i)) + s


def gen_product_construction(k: int, l: int) -> tuple[PointSet, list[tuple[int, int]]]:
    """The clique-path product embedding with a largest reconstructible set of size ``k``.

    ``l`` cliques of size ``k`` are placed as runs of consecutive integers;
    member ``s`` of clique ``i`` is matched to member ``s`` of clique
    ``i + 1`` by an edge of length ``k**i``. Label of member ``(i, s)`` is
    ``(i - 1) * k + (s - 1)``.

    Returns the point set and the pair list (cliques first, then matchings).
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be at least 1")

    def label(i: int, s: int) -> int:
        return (i - 1) * k + (s - 1)

    coords = [product_position(k, i, s) for i in range(1, l + 1) for s in range(1, k + 1)]
    pairs = []
    for i in range(1, l + 1):
        for s in range(1, k + 1):
            for t in range(s + 1, k + 1):
                pairs.append((label(i, s), label(i, t)))
    for i in range(1, l):
        for s in range(1, k + 1):
            pairs.append((label(i, s), label(i + 1, s)))
    return make_point_set(coords), pairs


# -- secure pairs ------------------------------------------------------------


def reflection(u: int, v: int) -> int:
    """Reflection of coordinate ``u`` over coordinate ``v``."""
    return 2 * v - u


def is_secure(u: int, v: int, V: PointSet) -> bool:
    """Whether the reflection of point ``u`` over point ``v`` is also in ``V``."""
    if u == v:
        raise SamePoint(f"is_secure needs two distinct labels, got {u} twice")
    return reflection(V.coords[u], V.coords[v]) in V


def count_secure_pairs(V: PointSet) -> int:
    """Number of ordered pairs ``(u, v)``, ``u != v``, that are secure."""
    n = V.n
    if n < 3:
        return 0
    if V.fits_int64:
        x = V.as_array()
        xs = np.sort(x)
        total = 0
        for v in range(n):
            refl = 2 * x[v] - x
            hits = np.searchsorted(xs, refl)
            hits[hits == n] = n - 1
            total += int(np.count_nonzero(xs[hits] == refl))
        # u == v reflects onto itself and was counted once per v
        return total - n
    total = 0
    coords = V.coords
    for v in range(n):
        cv2 = 2 * coords[v]
        for u in range(n):
            if u != v and cv2 - coords[u] in V:
                total += 1
    return total


def secure_pairs(V: PointSet) -> list[tuple[int, int]]:
    """All secure ordered pairs, by brute force (intended for small sets)."""
    out = []
    for v in range(V.n):
        for u in range(V.n):
            if u != v and is_secure(u, v, V):
                out.append((u, v))
    return out


def point_set_from_source(source: str, n: int, seed: int = 0) -> PointSet:
    """Dispatch helper used by experiments: ``generic`` or ``progression``."""
    if source == "generic":
        return gen_generic(n, seed)
    if source == "progression":
        return gen_progression(n)
    raise ValueError(f"unknown point-set source {source!r}")


__all__ = [
    "PointSet",
    "make_point_set",
    "load_point_set",
    "save_point_set",
    "gen_generic",
    "gen_progression",
    "gen_product_construction",
    "product_position",
    "reflection",
    "is_secure",
    "count_secure_pairs",
    "secure_pairs",
    "point_set_from_source",
]

