"""Constructive reconstruction: cycle-sign certificates, deduction, cluster growth.

The engine keeps a set of *clusters*: groups of labels whose relative
positions are already forced by the known distances. Everything reduces to
one rule applied to a pair of clusters ``P`` and ``Q``: list every rigid
motion that could place ``Q`` in ``P``'s frame, keep the ones that respect
shared members, every known distance between the two, and distinctness of
points, and merge when exactly one survives. Shared-member merges,
two-neighbour absorption and reflection-occupancy absorption are all
instances of that rule.

Keeping only motions that the true configuration also satisfies makes the
rule sound. It is monotone too (larger clusters only lose candidate
motions), so the fixed point does not depend on processing order. The batch
pipeline and the online engine both insert edges into :class:`ClusterClosure`
and therefore agree.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import InconsistentDeduction
from .graph import (
    DEFAULT_WALK_BUDGET,
    Cycle,
    DistanceGraph,
    Pair,
    cycle_cap,
    cycles_through_edge,
    enumerate_short_cycles,
)

_MITM_THRESHOLD = 20


# -- sign vectors ----------------------------------------------------------------


def _signs_dfs(d: Sequence[int], target: int, limit: int | None) -> list[tuple[int, ...]]:
    m = len(d)
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + d[i]
    out: list[tuple[int, ...]] = []
    signs = [0] * m

    def walk(i: int, remaining: int) -> bool:
        if i == m:
            if remaining == 0:
                out.append(tuple(signs))
                return limit is not None and len(out) >= limit
            return False
        if abs(remaining) > suffix[i]:
            return False
        for s in (1, -1):
            signs[i] = s
            if walk(i + 1, remaining - s * d[i]):
                return True
        return False

    walk(0, target)
    return out


def _half_sums(d: Sequence[int]) -> dict[int, list[tuple[int, ...]]]:
    table: dict[int, list[tuple[int, ...]]] = {0: [()]}
    for x in d:
        nxt: dict[int, list[tuple[int, ...]]] = {}
        for total, vecs in table.items():
            for s in (1, -1):
                nxt.setdefault(total + s * x, []).extend(v + (s,) for v in vecs)
        table = nxt
    return table


def _signs_mitm(d: Sequence[int], target: int, limit: int | None) -> list[tuple[int, ...]]:
    half = len(d) // 2
    left = _half_sums(d[:half])
    right = _half_sums(d[half:])
    out = []
    for total, lvecs in left.items():
        rvecs = right.get(target - total)
        if not rvecs:
            continue
        for lv in lvecs:
            for rv in rvecs:
                out.append(lv + rv)
                if limit is not None and len(out) >= limit:
                    return sorted(out, reverse=True)
    return sorted(out, reverse=True)


def cycle_sign_solutions(d: Sequence[int], dk: int, limit: int | None = None) -> list[tuple[int, ...]]:
    """All ``eps`` in ``{-1, +1}^m`` with ``sum(eps[i] * d[i]) == dk``.

    Exhaustive search with a suffix-sum bound, switching to a
    meet-in-the-middle split for more than 20 terms. Vectors come out in
    decreasing lexicographic order (``+1`` before ``-1``). With ``limit``,
    stops after that many solutions; past 20 terms those need not be the
    lexicographically largest ones.
    """
    d = [int(x) for x in d]
    if any(x <= 0 for x in d):
        raise ValueError("cycle distances must be positive")
    if len(d) > _MITM_THRESHOLD:
        return _signs_mitm(d, int(dk), limit)
    return _signs_dfs(d, int(dk), limit)


@dataclass(frozen=True)
class CycleCertificate:
    """A cycle whose distances admit exactly one sign vector.

    ``distances[i]`` joins ``cycle[i]`` and ``cycle[i + 1]``; the last entry
    is the closing distance back to ``cycle[0]``.
    """

    cycle: Cycle
    distances: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        k = len(self.cycle)
        if k < 3 or len(self.distances) != k or len(self.signs) != k - 1:
            raise ValueError("malformed cycle certificate")
        if sum(s * x for s, x in zip(self.signs, self.distances)) != self.distances[-1]:
            raise ValueError("signs do not close the cycle")


def cycle_distances(c: Sequence[int], G: DistanceGraph) -> tuple[int, ...]:
    k = len(c)
    out = []
    for i in range(k):
        x = G.distance(c[i], c[(i + 1) % k])
        if x is None:
            raise ValueError(f"{tuple(c)} is not a cycle of the graph")
        out.append(x)
    return tuple(out)


def certify_cycle(c: Sequence[int], G: DistanceGraph) -> CycleCertificate | None:
    """A certificate when the cycle's sign vector is unique, else ``None``."""
    dist = cycle_distances(c, G)
    sols = cycle_sign_solutions(dist[:-1], dist[-1], limit=2)
    if len(sols) != 1:
        return None
    return CycleCertificate(tuple(c), dist, sols[0])


def deduce_cycle_distances(cert: CycleCertificate) -> list[tuple[Pair, int]]:
    """Distances of all non-adjacent pairs around a certified cycle."""
    c, d, eps = cert.cycle, cert.distances, cert.signs
    k = len(c)
    # prefix[i] is the signed offset of c[i] from c[0]
    prefix = [0]
    for s, x in zip(eps, d):
        prefix.append(prefix[-1] + s * x)
    out = []
    for i in range(k):
        for j in range(i + 2, k):
            if i == 0 and j == k - 1:
                continue
            a, b = c[i], c[j]
            out.append(((a, b) if a < b else (b, a), abs(prefix[j] - prefix[i])))
    return out


def augment(G: DistanceGraph, deduced: Iterable[tuple[Pair, int]]) -> DistanceGraph:
    """``G`` plus deduced distances, flagged as such.

    Pairs already present must carry the same distance; a mismatch raises
    :class:`InconsistentDeduction`.
    """
    extra: dict[Pair, int] = {}
    for (u, v), x in deduced:
        key = (u, v) if u < v else (v, u)
        known = G.distance(u, v)
        if known is None:
            known = extra.get(key)
        if known is None:
            extra[key] = x
        elif known != x:
            raise InconsistentDeduction(f"pair {key} deduced as {x} but known as {known}")
    if not extra:
        return G
    revealed = [e for e in G.edges() if not G.is_deduced(e[0], e[1])]
    old = [e for e in G.edges() if G.is_deduced(e[0], e[1])]
    return DistanceGraph(G.n, revealed, old + [(u, v, x) for (u, v), x in extra.items()])


# -- clusters ----------------------------------------------------------------


@dataclass(frozen=True)
class Cluster:
    """Labels with known relative positions, in canonical frame.

    The lowest label sits at 0 and the second-lowest at a positive position.
    """

    members: tuple[int, ...]
    positions: tuple[int, ...]

    @classmethod
    def from_positions(cls, pos: dict[int, int]) -> "Cluster":
        members = tuple(sorted(pos))
        base = pos[members[0]]
        flip = len(members) > 1 and pos[members[1]] < base
        s = -1 if flip else 1
        return cls(members, tuple(s * (pos[m] - base) for m in members))

    @property
    def relpos(self) -> dict[int, int]:
        return dict(zip(self.members, self.positions))

    def __len__(self) -> int:
        return len(self.members)


class _Body:
    __slots__ = ("id", "pos", "occ")

    def __init__(self, cid: int, pos: dict[int, int]):
        self.id = cid
        self.pos = pos
        self.occ = {p: x for x, p in pos.items()}


class ClusterClosure:
    """Incremental fixed point of the pairwise merge rule.

    Every explicit distance seeds a two-point cluster unless its ends already
    share one. Clusters that are never merged may overlap in at most one
    label once the queue is empty. Pairs whose outcome can still change are
    re-examined only when one side grows or a distance between them arrives.
    """

    def __init__(self, n: int):
        self.n = n
        self.adj: list[dict[int, int]] = [dict() for _ in range(n)]
        self._bodies: dict[int, _Body] = {}
        self._member_of: list[set[int]] = [set() for _ in range(n)]
        self._next_id = 0
        self._queue: deque[tuple[int, int]] = deque()
        self._queued: set[tuple[int, int]] = set()
        # ambiguous pairs: frame id -> position -> partner ids, and mover id -> frame ids
        self._amb: dict[int, dict[int, set[int]]] = {}
        self._moved: dict[int, set[int]] = {}
        self.largest = 1 if n >= 1 else 0

    # -- public ---------------------------------------------------------------

    @property
    def full(self) -> bool:
        return self.n <= 1 or self.largest == self.n

    def add_edge(self, u: int, v: int, d: int, close: bool = True) -> bool:
        """Insert a known distance; returns ``False`` if it was already present."""
        known = self.adj[u].get(v)
        if known is not None:
            if known != d:
                raise InconsistentDeduction(f"pair ({u}, {v}) has distances {known} and {d}")
            return False
        self.adj[u][v] = d
        self.adj[v][u] = d
        mu, mv = self._member_of[u], self._member_of[v]
        for a in mu:
            for b in mv:
                if a != b:
                    self._push(a, b)
        if mu.isdisjoint(mv):
            body = self._new_body({u: 0, v: d})
            self._link(body, (u, v))
        if close:
            self.close()
        return True

    def close(self) -> None:
        queue, queued, bodies = self._queue, self._queued, self._bodies
        while queue:
            key = queue.popleft()
            queued.discard(key)
            a, b = key
            if a in bodies and b in bodies:
                self._evaluate(bodies[a], bodies[b])

    def clusters(self) -> list[Cluster]:
        """Current clusters in canonical frame, sorted by member tuple."""
        return sorted((Cluster.from_positions(b.pos) for b in self._bodies.values()), key=lambda c: c.members)

    def bodies(self) -> list[dict[int, int]]:
        """Raw positions of each cluster in its own frame."""
        return [dict(b.pos) for b in self._bodies.values()]

    # -- internals ---------------------------------------------------------------

    def _new_body(self, pos: dict[int, int]) -> _Body:
        body = _Body(self._next_id, pos)
        self._next_id += 1
        self._bodies[body.id] = body
        for x in pos:
            self._member_of[x].add(body.id)
        if len(pos) > self.largest:
            self.largest = len(pos)
        return body

    def _push(self, a: int, b: int) -> None:
        key = (a, b) if a < b else (b, a)
        if key not in self._queued:
            self._queued.add(key)
            self._queue.append(key)

    def _link(self, body: _Body, members: Iterable[int]) -> None:
        """Queue every cluster sharing a label with, or joined by a distance to, ``members``."""
        bid = body.id
        pos = body.pos
        member_of = self._member_of
        for w in members:
            for other in member_of[w]:
                if other != bid:
                    self._push(bid, other)
            for x in self.adj[w]:
                if x not in pos:
                    for other in member_of[x]:
                        self._push(bid, other)

    def _evaluate(self, A: _Body, B: _Body) -> None:
        if len(A.pos) > len(B.pos) or (len(A.pos) == len(B.pos) and A.id < B.id):
            F, M = A, B
        else:
            F, M = B, A
        fpos, mpos, focc = F.pos, M.pos, F.occ
        shared = [w for w in mpos if w in fpos]
        movers = [(x, q) for x, q in mpos.items() if x not in fpos]
        cross = []
        adj = self.adj
        for x, q in movers:
            for y, d in adj[x].items():
                p = fpos.get(y)
                if p is not None and y not in mpos:
                    cross.append((q, p, d))

        if len(shared) >= 2:
            w1, w2 = shared[0], shared[1]
            dq = mpos[w2] - mpos[w1]
            dp = fpos[w2] - fpos[w1]
            if dq == dp:
                cands = [(1, fpos[w1] - mpos[w1])]
            elif dq == -dp:
                cands = [(-1, fpos[w1] + mpos[w1])]
            else:
                return
        elif shared:
            w = shared[0]
            cands = [(1, fpos[w] - mpos[w]), (-1, fpos[w] + mpos[w])]
        elif len(cross) >= 2:
            # disjoint clusters are only compared when two distances join them
            q, p, d = cross[0]
            cands = [(s, p + e * d - s * q) for s in (1, -1) for e in (1, -1)]
        else:
            return

        survivors = []
        for s, t in cands:
            if any(fpos[w] != s * mpos[w] + t for w in shared):
                continue
            if any(abs(s * q + t - p) != d for q, p, d in cross):
                continue
            if any(s * q + t in focc for _, q in movers):
                continue
            survivors.append((s, t))

        if len(survivors) == 1:
            self._merge(F, M, *survivors[0])
        elif survivors:
            index = self._amb.setdefault(F.id, {})
            for s, t in survivors:
                for _, q in movers:
                    index.setdefault(s * q + t, set()).add(M.id)
            self._moved.setdefault(M.id, set()).add(F.id)

    def _merge(self, F: _Body, M: _Body, s: int, t: int) -> None:
        fid, mid = F.id, M.id
        fpos, focc = F.pos, F.occ
        member_of = self._member_of
        placed = []
        arrived = []
        for x, q in M.pos.items():
            member_of[x].discard(mid)
            if x in fpos:
                continue
            p = s * q + t
            fpos[x] = p
            focc[p] = x
            member_of[x].add(fid)
            placed.append(p)
            arrived.append(x)
        del self._bodies[mid]
        self._amb.pop(mid, None)
        self._moved.pop(mid, None)
        if not placed:
            return
        if len(fpos) > self.largest:
            self.largest = len(fpos)
        index = self._amb.get(fid)
        if index:
            for p in placed:
                for other in index.pop(p, ()):
                    self._push(fid, other)
        for other in self._moved.pop(fid, ()):
            self._push(fid, other)
        self._link(F, arrived)


def _growth_order(G: DistanceGraph) -> list[tuple[int, int, int]]:
    """Edges sorted by when breadth-first search from a busiest label reaches them.

    The fixed point does not depend on insertion order, but growing one big
    cluster outward avoids spawning seeds that it would swallow anyway.
    """
    adj = G.adj
    deg = [len(nb) for nb in adj]
    rank = [-1] * G.n
    k = 0
    for start in sorted(range(G.n), key=lambda x: -deg[x]):
        if rank[start] >= 0:
            continue
        rank[start] = k
        k += 1
        frontier = [start]
        for w in frontier:
            for x in sorted(adj[w], key=lambda y: -deg[y]):
                if rank[x] < 0:
                    rank[x] = k
                    k += 1
                    frontier.append(x)
    return sorted(G.edges(), key=lambda e: max(rank[e[0]], rank[e[1]]))


def closure_of(G: DistanceGraph) -> ClusterClosure:
    """A closed :class:`ClusterClosure` over every edge of ``G``."""
    closure = ClusterClosure(G.n)
    for u, v, d in _growth_order(G):
        closure.add_edge(u, v, d)
    return closure


def grow_clusters(G: DistanceGraph) -> list[Cluster]:
    """Fixed point of the merge rule over all edges of ``G`` (revealed and deduced)."""
    return closure_of(G).clusters()


# -- fast path -----------------------------------------------------------------


_DENSE_LIMIT = 1500


def _seed_edge(deg: np.ndarray, neighbours, common) -> tuple[int, int]:
    a = int(np.argmax(deg))
    nbrs = neighbours(a)
    return a, int(nbrs[int(np.argmax(common(a, nbrs)))])


def _pick_positions(p1, d1, p2, d2):
    """Position at distance ``d1`` from ``p1`` and ``d2`` from ``p2``; ``None`` if none fits."""
    up, down = p1 + d1, p1 - d1
    ok_up = np.abs(up - p2) == d2
    ok_down = np.abs(down - p2) == d2
    if not np.all(ok_up | ok_down):
        return None
    return np.where(ok_up, up, down)


def _occupied(occupied: np.ndarray, q: np.ndarray) -> np.ndarray:
    i = np.searchsorted(occupied, q)
    i[i == len(occupied)] = len(occupied) - 1
    return occupied[i] == q


def _bootstrap_dense(n, u, v, d, deg):
    D = np.zeros((n, n), dtype=np.int64)
    D[u, v] = d
    D[v, u] = d
    E = D > 0
    a, b = _seed_edge(deg, lambda x: np.flatnonzero(E[x]), lambda x, nb: E[nb][:, nb].sum(axis=1))
    pos = np.zeros(n, dtype=np.int64)
    placed = np.zeros(n, dtype=bool)
    placed[a] = placed[b] = True
    pos[b] = D[a, b]
    while True:
        cols = np.flatnonzero(placed)
        known = E[:, cols]
        count = known.sum(axis=1)
        two = np.flatnonzero(~placed & (count >= 2))
        if len(two):
            K = known[two]
            j1 = np.argmax(K, axis=1)
            K2 = K.copy()
            K2[np.arange(len(two)), j1] = False
            j2 = np.argmax(K2, axis=1)
            c1, c2 = cols[j1], cols[j2]
            new = _pick_positions(pos[c1], D[two, c1], pos[c2], D[two, c2])
            if new is None:
                return None
            Dsub = D[two][:, cols]
            if not np.all(~K | (np.abs(new[:, None] - pos[cols][None, :]) == Dsub)):
                return None
            pos[two] = new
            placed[two] = True
            continue
        one = np.flatnonzero(~placed & (count == 1))
        if not len(one):
            break
        c = cols[np.argmax(known[one], axis=1)]
        x = D[one, c]
        occupied = np.sort(pos[cols])
        up, down = pos[c] + x, pos[c] - x
        t_up, t_down = _occupied(occupied, up), _occupied(occupied, down)
        if np.any(t_up & t_down):
            return None
        pick = t_up ^ t_down
        if not pick.any():
            break
        pos[one[pick]] = np.where(t_up[pick], down[pick], up[pick])
        placed[one[pick]] = True
    return pos if placed.all() else None


def _bootstrap_sparse(n, u, v, d, deg):
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    vals = np.concatenate([d, d]).astype(np.int64)
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    A.sort_indices()
    pattern = sparse.csr_matrix((np.ones(len(A.data), dtype=np.int32), A.indices, A.indptr), shape=(n, n))

    def common(x, nb):
        mark = np.zeros(n, dtype=np.int32)
        mark[nb] = 1
        return pattern[nb] @ mark

    a, b = _seed_edge(deg, lambda x: A.indices[A.indptr[x] : A.indptr[x + 1]], common)
    pos = np.zeros(n, dtype=np.int64)
    placed = np.zeros(n, dtype=bool)
    placed[a] = placed[b] = True
    pos[b] = A[a, b]
    while True:
        count = pattern @ placed.astype(np.int32)
        two = np.flatnonzero(~placed & (count >= 2))
        if len(two):
            sub = A[two].tocoo()
            keep = placed[sub.col]
            r, c, x = sub.row[keep], sub.col[keep], sub.data[keep]
            _, i1 = np.unique(r, return_index=True)
            i2 = i1 + 1
            new = _pick_positions(pos[c[i1]], x[i1], pos[c[i2]], x[i2])
            if new is None or not np.all(np.abs(new[r] - pos[c]) == x):
                return None
            pos[two] = new
            placed[two] = True
            continue
        one = np.flatnonzero(~placed & (count == 1))
        if not len(one):
            break
        sub = A[one].tocoo()
        keep = placed[sub.col]
        r, c, x = sub.row[keep], sub.col[keep], sub.data[keep]
        occupied = np.sort(pos[placed])
        up, down = pos[c] + x, pos[c] - x
        t_up, t_down = _occupied(occupied, up), _occupied(occupied, down)
        if np.any(t_up & t_down):
            return None
        pick = t_up ^ t_down
        if not pick.any():
            break
        rows_pick = one[r[pick]]
        pos[rows_pick] = np.where(t_up[pick], down[pick], up[pick])
        placed[rows_pick] = True
    return pos if placed.all() else None


def bootstrap_positions(G: DistanceGraph, dense: bool | None = None) -> np.ndarray | None:
    """Try to place every label by greedy growth from a dense seed edge.

    Starting from an edge between a maximum-degree label and its neighbour
    with the most common neighbours, repeatedly place every label with two
    placed neighbours, and every label with one placed neighbour whose other
    candidate position is taken. Returns positions only when all labels get
    placed and every edge checks out; ``None`` means "undecided", never
    "not reconstructible".
    """
    n = G.n
    if n < 2:
        return None
    u, v, d = G.arrays()
    if len(u) < n - 1 or d.dtype == object:
        return None
    deg = np.bincount(u, minlength=n) + np.bincount(v, minlength=n)
    if deg.min() == 0:
        return None
    if dense is None:
        dense = n <= _DENSE_LIMIT
    pos = (_bootstrap_dense if dense else _bootstrap_sparse)(n, u, v, d, deg)
    if pos is None:
        return None
    if not np.all(np.abs(pos[u] - pos[v]) == d):
        return None
    if len(np.unique(pos)) != n:
        return None
    return pos


# -- pipeline ---------------------------------------------------------------------


@dataclass(frozen=True)
class EngineParams:
    """Engine knobs; ``None`` picks the default for the instance size.

    ``cycle_cap`` defaults to ``floor(0.9 ln n)`` (at least 3) and
    ``edge_budget`` (reveals accumulated before the online engine first
    runs) to ``42 n``, clipped to the number of pairs.
    """

    cycle_cap: int | None = None
    edge_budget: int | None = None
    walk_budget: int = DEFAULT_WALK_BUDGET
    budget_factor: int = 42

    def resolve(self, n: int) -> tuple[int, int, int]:
        L = self.cycle_cap if self.cycle_cap is not None else cycle_cap(n)
        budget = self.edge_budget if self.edge_budget is not None else self.budget_factor * n
        if L < 3:
            raise ValueError("cycle_cap must be at least 3")
        if budget < 0:
            raise ValueError("edge_budget must be non-negative")
        # never wait for more reveals than there are pairs
        return L, min(budget, n * (n - 1) // 2), self.walk_budget


@dataclass
class ReconReport:
    n: int
    clusters: list[Cluster]
    deduced: dict[Pair, int] = field(default_factory=dict)

    @property
    def largest(self) -> int:
        if not self.clusters:
            return min(self.n, 1)
        return max(len(c) for c in self.clusters)

    @property
    def full(self) -> bool:
        if self.n <= 1:
            return True
        return len(self.clusters) == 1 and len(self.clusters[0]) == self.n

    @property
    def certified_fraction(self) -> float:
        return self.largest / self.n if self.n else 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "largest": self.largest,
            "full": self.full,
            "deduced_edges": len(self.deduced),
            "clusters": [{str(m): p for m, p in zip(c.members, c.positions)} for c in self.clusters],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _whole(n: int, pos) -> list[Cluster]:
    if n <= 1:
        return []
    return [Cluster.from_positions({i: int(p) for i, p in enumerate(pos)})]


def certified_chords(revealed: DistanceGraph, cycles: Iterable[Cycle]) -> dict[Pair, int]:
    """Chord distances from every certified cycle, checked against each other."""
    chords: dict[Pair, int] = {}
    for c in cycles:
        cert = certify_cycle(c, revealed)
        if cert is None:
            continue
        for key, x in deduce_cycle_distances(cert):
            known = revealed.distance(*key)
            if known is None:
                known = chords.setdefault(key, x)
            if known != x:
                raise InconsistentDeduction(f"pair {key} deduced as {x} but known as {known}")
    return chords


def reconstruct(G: DistanceGraph, params: EngineParams | None = None) -> ReconReport:
    """Certify as much of the configuration as the known distances force.

    Short-cuts never change the answer: if greedy placement or the merge
    closure over the given edges already spans every label, the full
    pipeline would report the same single cluster. Otherwise all short
    cycles of revealed edges are certified, their chords added, and the
    closure rerun. Raises :class:`WalkBudgetExceeded` from cycle search.
    """
    params = params or EngineParams()
    n = G.n
    L, _, walk_budget = params.resolve(n)
    if n <= 1:
        return ReconReport(n, [])
    pos = bootstrap_positions(G)
    if pos is not None:
        return ReconReport(n, _whole(n, pos))
    closure = closure_of(G)
    if closure.full:
        return ReconReport(n, closure.clusters())
    revealed = G.revealed()
    chords = certified_chords(revealed, enumerate_short_cycles(revealed, L, walk_budget))
    deduced = {}
    for (a, b), x in sorted(chords.items()):
        if closure.add_edge(a, b, x, close=False):
            deduced[(a, b)] = x
    closure.close()
    return ReconReport(n, closure.clusters(), deduced)


# -- online engine -------------------------------------------------------------------


class EngineState:
    """The online recogniser, fed one revealed distance at a time.

    Until ``edge_budget`` distances have arrived nothing is certified. At
    the budget the batch pipeline runs once on everything seen so far; after
    that each reveal is merged into the closure together with the chords of
    newly certified cycles through it.
    """

    def __init__(self, n: int, params: EngineParams | None = None):
        self.n = n
        self.params = params or EngineParams()
        self.cycle_cap, self.edge_budget, self.walk_budget = self.params.resolve(n)
        self.revealed: list[dict[int, int]] = [dict() for _ in range(n)]
        self.num_revealed = 0
        self.deduced: dict[Pair, int] = {}
        self.closure: ClusterClosure | None = None
        if self.edge_budget == 0:
            self._activate()

    @property
    def active(self) -> bool:
        return self.closure is not None

    def online_update(self, u: int, v: int, d: int) -> "EngineState":
        if u == v or not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"({u}, {v}) is not a pair of distinct labels")
        if v in self.revealed[u]:
            raise ValueError(f"pair ({u}, {v}) already revealed")
        self.revealed[u][v] = d
        self.revealed[v][u] = d
        self.num_revealed += 1
        if self.closure is None:
            if self.num_revealed >= self.edge_budget:
                self._activate()
            return self
        closure = self.closure
        closure.add_edge(u, v, d)
        self.deduced.pop((u, v) if u < v else (v, u), None)
        if closure.full:
            return self
        cycles = cycles_through_edge(self.revealed, u, v, self.cycle_cap, self.walk_budget)
        if cycles:
            self._insert_chords(cycles)
        return self

    def _insert_chords(self, cycles: Iterable[Cycle]) -> None:
        view = DistanceGraph.from_adjacency(self.n, self.revealed)
        chords = certified_chords(view, cycles)
        for (a, b), x in sorted(chords.items()):
            if self.closure.add_edge(a, b, x, close=False):
                self.deduced[(a, b)] = x
        self.closure.close()

    def _activate(self) -> None:
        view = DistanceGraph.from_adjacency(self.n, self.revealed)
        self.closure = closure_of(view)
        if self.closure.full or self.num_revealed == 0:
            return
        self._insert_chords(enumerate_short_cycles(view, self.cycle_cap, self.walk_budget))

    def certified_clusters(self) -> list[Cluster]:
        return [] if self.closure is None else self.closure.clusters()

    def certified_full(self) -> bool:
        if self.n <= 1:
            return True
        return self.closure is not None and self.closure.full

    def report(self) -> ReconReport:
        return ReconReport(self.n, self.certified_clusters(), dict(self.deduced))


def online_update(state: EngineState, pair: Sequence[int], distance: int) -> EngineState:
    return state.online_update(int(pair[0]), int(pair[1]), int(distance))


def certified_full(state: EngineState) -> bool:
    return state.certified_full()
