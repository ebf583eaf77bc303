"""Graphs of known pairwise distances, reveal schedules and short cycles."""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import WalkBudgetExceeded
from .pointset import PointSet, is_secure
from .rng import derive_rng

DEFAULT_WALK_BUDGET = 10**8

Pair = tuple[int, int]
Cycle = tuple[int, ...]


def _key(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


class DistanceGraph:
    """An immutable simple graph on labels ``0..n-1`` with exact integer distances.

    Each edge carries a positive distance and a provenance flag: *revealed*
    (observed directly) or *deduced* (inferred by the reconstruction
    engine). The graph can be backed either by per-vertex dictionaries or by
    parallel edge arrays; whichever view is missing is built on first use,
    so wrapping a prefix of a reveal schedule costs nothing up front.
    """

    __slots__ = ("n", "_adj", "_arrays", "_deduced", "_sorted_nbrs")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (), deduced: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        adj: list[dict[int, int]] = [dict() for _ in range(n)]
        flagged: set[Pair] = set()
        for group, is_ded in ((edges, False), (deduced, True)):
            for e in group:
                u, v, d = int(e[0]), int(e[1]), int(e[2])
                if not (0 <= u < n and 0 <= v < n):
                    raise ValueError(f"edge ({u}, {v}) has a label outside 0..{n - 1}")
                if u == v:
                    raise ValueError(f"loop at {u}")
                if d <= 0:
                    raise ValueError(f"edge ({u}, {v}) has non-positive distance {d}")
                if v in adj[u]:
                    raise ValueError(f"edge ({u}, {v}) given twice")
                adj[u][v] = d
                adj[v][u] = d
                if is_ded:
                    flagged.add(_key(u, v))
        self._adj = adj
        self._arrays = None
        self._deduced = frozenset(flagged)
        self._sorted_nbrs = None

    @classmethod
    def from_arrays(cls, n: int, u, v, d, deduced: Iterable[Pair] = ()) -> "DistanceGraph":
        """Wrap parallel edge arrays without copying or validating them.

        Intended for trusted callers, e.g. prefixes of a reveal schedule.
        """
        g = cls.__new__(cls)
        g.n = n
        g._adj = None
        g._arrays = (np.asarray(u), np.asarray(v), np.asarray(d))
        g._deduced = frozenset(_key(a, b) for a, b in deduced)
        g._sorted_nbrs = None
        return g

    @classmethod
    def from_adjacency(cls, n: int, adj: list[dict[int, int]]) -> "DistanceGraph":
        """Wrap a symmetric adjacency list without copying it (trusted callers)."""
        g = cls.__new__(cls)
        g.n = n
        g._adj = adj
        g._arrays = None
        g._deduced = frozenset()
        g._sorted_nbrs = None
        return g

    # -- views -----------------------------------------------------------

    @property
    def adj(self) -> list[dict[int, int]]:
        """Per-vertex ``{neighbour: distance}`` maps. Do not mutate."""
        if self._adj is None:
            adj: list[dict[int, int]] = [dict() for _ in range(self.n)]
            u, v, d = self._arrays
            for a, b, x in zip(u.tolist(), v.tolist(), d.tolist()):
                adj[a][b] = x
                adj[b][a] = x
            self._adj = adj
        return self._adj

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edges as ``(u, v, d)`` arrays with ``u < v`` not guaranteed."""
        if self._arrays is None:
            us, vs, ds = [], [], []
            for a, nb in enumerate(self._adj):
                for b, x in nb.items():
                    if a < b:
                        us.append(a)
                        vs.append(b)
                        ds.append(x)
            dtype = np.int64 if all(x < 2**62 for x in ds) else object
            self._arrays = (
                np.array(us, dtype=np.int64),
                np.array(vs, dtype=np.int64),
                np.array(ds, dtype=dtype),
            )
        return self._arrays

    def neighbors(self, u: int) -> list[int]:
        """Neighbours of ``u`` in increasing label order."""
        if self._sorted_nbrs is None:
            self._sorted_nbrs = [sorted(nb) for nb in self.adj]
        return self._sorted_nbrs[u]

    def distance(self, u: int, v: int) -> int | None:
        return self.adj[u].get(v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def degrees(self) -> np.ndarray:
        if self._adj is not None:
            return np.array([len(nb) for nb in self._adj], dtype=np.int64)
        u, v, _ = self._arrays
        return np.bincount(u, minlength=self.n) + np.bincount(v, minlength=self.n)

    @property
    def num_edges(self) -> int:
        if self._arrays is not None:
            return len(self._arrays[0])
        return sum(len(nb) for nb in self._adj) // 2

    def __len__(self) -> int:
        return self.num_edges

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """All edges as ``(u, v, d)`` with ``u < v``, sorted."""
        for a in range(self.n):
            nb = self.adj[a]
            for b in sorted(nb):
                if a < b:
                    yield a, b, nb[b]

    def is_deduced(self, u: int, v: int) -> bool:
        return _key(u, v) in self._deduced

    @property
    def deduced_pairs(self) -> frozenset[Pair]:
        return self._deduced

    def revealed(self) -> "DistanceGraph":
        """The subgraph of revealed edges only."""
        if not self._deduced:
            return self
        return DistanceGraph(self.n, [e for e in self.edges() if _key(e[0], e[1]) not in self._deduced])

    def connected_components(self) -> list[list[int]]:
        """Components as sorted label lists, ordered by smallest label."""
        seen = [False] * self.n
        comps = []
        adj = self.adj
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            stack = [s]
            while stack:
                w = stack.pop()
                for x in adj[w]:
                    if not seen[x]:
                        seen[x] = True
                        comp.append(x)
                        stack.append(x)
            comps.append(sorted(comp))
        return comps

    def __eq__(self, other) -> bool:
        if not isinstance(other, DistanceGraph):
            return NotImplemented
        return (
            self.n == other.n
            and list(self.edges()) == list(other.edges())
            and self._deduced == other._deduced
        )

    def __repr__(self) -> str:
        return f"DistanceGraph(n={self.n}, edges={self.num_edges}, deduced={len(self._deduced)})"

    # -- serialisation -----------------------------------------------------

    def to_text(self) -> str:
        lines = [f"n={self.n}"]
        for u, v, d in self.edges():
            suffix = " deduced" if _key(u, v) in self._deduced else ""
            lines.append(f"{u} {v} {d}{suffix}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DistanceGraph":
        n = None
        revealed, deduced = [], []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if n is None:
                if not line.startswith("n="):
                    raise ValueError(f"line {lineno}: expected header 'n=<count>'")
                n = int(line[2:])
                continue
            parts = line.split()
            if len(parts) == 3:
                revealed.append(tuple(int(p) for p in parts))
            elif len(parts) == 4 and parts[3] == "deduced":
                deduced.append(tuple(int(p) for p in parts[:3]))
            else:
                raise ValueError(f"line {lineno}: expected 'u v d'")
        if n is None:
            raise ValueError("missing header 'n=<count>'")
        return cls(n, revealed, deduced)

    def to_json(self) -> str:
        rows = []
        for u, v, d in self.edges():
            row = [u, v, d]
            if _key(u, v) in self._deduced:
                row.append("deduced")
            rows.append(row)
        return json.dumps({"n": self.n, "edges": rows})

    @classmethod
    def from_json(cls, text: str) -> "DistanceGraph":
        data = json.loads(text)
        revealed = [r[:3] for r in data["edges"] if len(r) == 3]
        deduced = [r[:3] for r in data["edges"] if len(r) == 4]
        return cls(int(data["n"]), revealed, deduced)


def load_graph(path: str | Path) -> DistanceGraph:
    path = Path(path)
    text = path.read_text()
    return DistanceGraph.from_json(text) if path.suffix == ".json" else DistanceGraph.from_text(text)


def save_graph(G: DistanceGraph, path: str | Path) -> None:
    path = Path(path)
    path.write_text(G.to_json() + "\n" if path.suffix == ".json" else G.to_text())


def load_pairs(path: str | Path) -> list[Pair]:
    """Read a pair list: ``u v`` (or ``u v d``, distance ignored) per line, or JSON."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return [(int(a), int(b)) for a, b, *_ in json.loads(text)]
    pairs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("n="):
            continue
        a, b, *_ = line.split()
        pairs.append((int(a), int(b)))
    return pairs


# -- observation and random pair sets ---------------------------------------


def observe_distances(V: PointSet, pairs: Iterable[Sequence[int]]) -> DistanceGraph:
    """The graph revealing the true distance of every pair in ``pairs``."""
    edges = {}
    for p in pairs:
        u, v = int(p[0]), int(p[1])
        if not (0 <= u < V.n and 0 <= v < V.n) or u == v:
            raise ValueError(f"pair ({u}, {v}) is not a pair of distinct labels of V")
        edges[_key(u, v)] = abs(V.coords[u] - V.coords[v])
    return DistanceGraph(V.n, [(u, v, d) for (u, v), d in edges.items()])


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_from_index(n: int, idx) -> tuple[np.ndarray, np.ndarray]:
    """Invert the row-major enumeration of pairs ``u < v`` of ``0..n-1``."""
    idx = np.asarray(idx, dtype=np.int64)
    rows = np.arange(n, dtype=np.int64)
    starts = rows * n - rows * (rows + 1) // 2
    u = np.searchsorted(starts, idx, side="right") - 1
    v = idx - starts[u] + u + 1
    return u, v


def sample_gnp(n: int, p: float, seed: int) -> list[Pair]:
    """A binomial random pair set: each pair kept independently with probability ``p``.

    Drawn as a Binomial edge count followed by a uniform subset of that
    size, which has the same law.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    m = num_pairs(n)
    if m == 0:
        return []
    rng = derive_rng(seed, "sample_gnp", n)
    k = int(rng.binomial(m, p))
    if k == m:
        idx = np.arange(m, dtype=np.int64)
    else:
        idx = np.sort(rng.choice(m, size=k, replace=False))
    u, v = pair_from_index(n, idx)
    return list(zip(u.tolist(), v.tolist()))


class RevealSchedule:
    """An order in which all ``C(n, 2)`` pairs are revealed."""

    __slots__ = ("n", "u", "v")

    def __init__(self, n: int, u, v, *, check: bool = True):
        self.n = n
        self.u = np.asarray(u, dtype=np.int64)
        self.v = np.asarray(v, dtype=np.int64)
        if check:
            if len(self.u) != num_pairs(n) or len(self.v) != len(self.u):
                raise ValueError(f"a schedule on {n} points has {num_pairs(n)} pairs")
            a = np.minimum(self.u, self.v)
            b = np.maximum(self.u, self.v)
            if len(a) and (a.min() < 0 or b.max() >= n or np.any(a == b)):
                raise ValueError("schedule contains an invalid pair")
            idx = a * n - a * (a + 1) // 2 + (b - a - 1)
            if len(np.unique(idx)) != len(idx):
                raise ValueError("schedule repeats a pair")

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Sequence[int]]) -> "RevealSchedule":
        pairs = [(int(a), int(b)) for a, b in pairs]
        return cls(n, [a for a, _ in pairs], [b for _, b in pairs])

    def __len__(self) -> int:
        return len(self.u)

    def __getitem__(self, t: int) -> Pair:
        return int(self.u[t]), int(self.v[t])

    def __iter__(self) -> Iterator[Pair]:
        return iter(zip(self.u.tolist(), self.v.tolist()))

    def pairs(self) -> list[Pair]:
        return list(self)

    def distances(self, V: PointSet) -> np.ndarray:
        x = V.as_array()
        return np.abs(x[self.u] - x[self.v])

    def prefix_graph(self, V: PointSet, t: int, distances=None) -> DistanceGraph:
        """Graph of the first ``t`` reveals (no copy of the schedule arrays)."""
        d = self.distances(V) if distances is None else distances
        return DistanceGraph.from_arrays(self.n, self.u[:t], self.v[:t], d[:t])

    def to_text(self) -> str:
        return "".join(f"{a} {b}\n" for a, b in self)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "pairs": self.pairs()})

    @classmethod
    def from_json(cls, text: str) -> "RevealSchedule":
        data = json.loads(text)
        return cls.from_pairs(int(data["n"]), data["pairs"])


def random_schedule(n: int, seed: int) -> RevealSchedule:
    """A uniformly random permutation of all pairs (Fisher-Yates via NumPy)."""
    if n < 2:
        raise ValueError("a schedule needs at least two points")
    rng = derive_rng(seed, "random_schedule", n)
    perm = rng.permutation(num_pairs(n))
    u, v = pair_from_index(n, perm)
    return RevealSchedule(n, u, v, check=False)


# -- degree and structural queries ------------------------------------------


class DegreeSummary(NamedTuple):
    min_degree: int
    degree_one: list[int]
    isolated: list[int]


def degree_summary(G: DistanceGraph) -> DegreeSummary:
    deg = G.degrees()
    if G.n == 0:
        return DegreeSummary(0, [], [])
    return DegreeSummary(
        int(deg.min()),
        np.flatnonzero(deg == 1).tolist(),
        np.flatnonzero(deg == 0).tolist(),
    )


def undecidable_points(G: DistanceGraph, V: PointSet) -> list[int]:
    """Degree-one points whose unique neighbour does not make the pair secure."""
    out = []
    adj = G.adj
    for u in degree_summary(G).degree_one:
        (v,) = adj[u]
        if not is_secure(u, v, V):
            out.append(u)
    return out


def uncertain_pairs(G: DistanceGraph, V: PointSet) -> list[Pair]:
    """Ordered ``(u, v)`` where ``uv`` is u's only edge and the mirror point
    ``2v - u`` exists in ``V`` with degree one."""
    out = []
    adj = G.adj
    for u in degree_summary(G).degree_one:
        (v,) = adj[u]
        w = V.label_of(2 * V.coords[v] - V.coords[u])
        if w is not None and len(adj[w]) == 1:
            out.append((u, v))
    return out


def structural_condition(G: DistanceGraph, V: PointSet) -> bool:
    """No isolated point, and every degree-one point is secure with its neighbour."""
    if G.n <= 1:
        return True
    summary = degree_summary(G)
    if summary.isolated:
        return False
    return not undecidable_points(G, V)


# -- short cycles --------------------------------------------------------------


def cycle_cap(n: int) -> int:
    """Default cycle-length cap ``floor(0.9 ln n)``, never below 3."""
    if n < 2:
        return 3
    return max(3, math.floor(0.9 * math.log(n)))


def canonical_cycle(seq: Sequence[int]) -> Cycle:
    """Lexicographically least rotation over both orientations."""
    k = len(seq)
    i = min(range(k), key=seq.__getitem__)
    forward = tuple(seq[(i + j) % k] for j in range(k))
    backward = tuple(seq[(i - j) % k] for j in range(k))
    return min(forward, backward)


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit: int):
        self.left = limit

    def spend(self, amount: int = 1) -> None:
        self.left -= amount
        if self.left < 0:
            raise WalkBudgetExceeded("cycle enumeration exceeded its walk budget")


def enumerate_short_cycles(G: DistanceGraph, L: int, walk_budget: int = DEFAULT_WALK_BUDGET) -> list[Cycle]:
    """All simple cycles of length ``3..L``, each once, in canonical form.

    Cycles are grown as simple paths from their smallest label ``s`` through
    labels above ``s``; a path closes when its end is adjacent to ``s``, and
    only the orientation whose second vertex is smaller than its last is
    kept. A breadth-first ball around ``s`` prunes extensions that could not
    return to ``s`` in time.

    Raises :class:`WalkBudgetExceeded` once more than ``walk_budget`` path
    extensions have been explored.
    """
    if L < 3:
        raise ValueError("cycle length cap must be at least 3")
    adj = G.adj
    nbrs = [G.neighbors(w) for w in range(G.n)]
    budget = _Budget(walk_budget)
    out: list[Cycle] = []
    half = L // 2
    for s in range(G.n):
        if len(nbrs[s]) < 2 or nbrs[s][-1] < s:
            continue
        # BFS ball restricted to labels > s
        dist = {s: 0}
        frontier = [s]
        for depth in range(1, half + 1):
            nxt = []
            for w in frontier:
                row = nbrs[w]
                for x in row[bisect_right(row, s):]:
                    if x not in dist:
                        dist[x] = depth
                        nxt.append(x)
            frontier = nxt
            if not frontier:
                break
        budget.spend(len(dist))
        adj_s = adj[s]
        path = [s]
        on_path = {s}

        def extend(w: int, edges_used: int) -> None:
            if edges_used >= 2 and w in adj_s and path[1] < w:
                out.append(tuple(path))
            if edges_used + 1 >= L:
                return
            row = nbrs[w]
            start = bisect_right(row, s)
            budget.spend(len(row) - start)
            remaining = L - edges_used - 1
            for x in row[start:]:
                if x in on_path:
                    continue
                dx = dist.get(x)
                if dx is None or dx > remaining:
                    continue
                path.append(x)
                on_path.add(x)
                extend(x, edges_used + 1)
                path.pop()
                on_path.discard(x)

        extend(s, 0)
    return out


def cycles_through_edge(
    G: DistanceGraph | list[dict[int, int]],
    u: int,
    v: int,
    L: int,
    walk_budget: int = DEFAULT_WALK_BUDGET,
) -> list[Cycle]:
    """Simple cycles of length ``3..L`` that use the edge ``uv``, canonical form.

    Each such cycle is the edge plus a simple ``v -> u`` path of ``2..L-1``
    edges avoiding ``uv``. Paths are found from both ends: half-paths of
    exactly ``h`` edges leave ``v``, shorter ones leave ``u``, and they are
    joined on a common end vertex. Every path has exactly one such split,
    so no cycle is produced twice.

    ``G`` may be a graph or a raw adjacency list of ``{neighbour: distance}``
    maps; the edge ``uv`` itself must be present.
    """
    if L < 3:
        raise ValueError("cycle length cap must be at least 3")
    adj = G.adj if isinstance(G, DistanceGraph) else G
    if v not in adj[u]:
        raise ValueError(f"({u}, {v}) is not an edge")
    budget = _Budget(walk_budget)
    longest = L - 1
    h = (longest + 1) // 2
    rest = longest - h
    out: list[Cycle] = []

    # half-paths from v: all that reach u within h edges, plus all of length h
    v_paths: dict[int, list[list[int]]] = {}
    path = [v]
    on_path = {v}

    def grow_v(w: int) -> None:
        nb = adj[w]
        budget.spend(len(nb))
        last = len(path) == h
        for x in nb:
            if x in on_path:
                continue
            if x == u:
                if len(path) >= 2:
                    out.append(canonical_cycle(path + [u]))
                continue
            if last:
                v_paths.setdefault(x, []).append(path + [x])
            else:
                path.append(x)
                on_path.add(x)
                grow_v(x)
                path.pop()
                on_path.discard(x)

    grow_v(v)
    if rest == 0 or not v_paths:
        return out

    # half-paths from u of 1..rest edges that avoid v, joined at their end
    path = [u]
    on_path = {u, v}

    def grow_u(w: int) -> None:
        nb = adj[w]
        budget.spend(len(nb))
        for x in nb:
            if x in on_path:
                continue
            for vp in v_paths.get(x, ()):
                if on_path.isdisjoint(vp[1:-1]):
                    out.append(canonical_cycle(vp + path[::-1]))
            if len(path) < rest:
                path.append(x)
                on_path.add(x)
                grow_u(x)
                path.pop()
                on_path.discard(x)

    grow_u(u)
    return out
