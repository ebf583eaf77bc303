"""Exact ground truth for small instances by exhaustive embedding enumeration.

Each connected component is embedded by rooting a BFS spanning tree at its
smallest label and trying every sign for the tree edges (the first sign is
fixed, since flipping all of them only reflects the picture). Assignments
that violate a non-tree edge or put two labels on one point are dropped;
the survivors are brought to canonical form and deduplicated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import OracleCapExceeded
from .graph import DistanceGraph, Pair, RevealSchedule
from .pointset import PointSet

DEFAULT_CAP = 14


@dataclass(frozen=True)
class ComponentEmbeddings:
    """All embedding classes of one component.

    ``classes[j][i]`` is the canonical position of ``labels[i]`` in class
    ``j``; classes are sorted.
    """

    labels: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]

    def as_dicts(self) -> list[dict[int, int]]:
        return [dict(zip(self.labels, row)) for row in self.classes]


def canonical_positions(values: Iterable[int]) -> tuple[int, ...]:
    """Translate the minimum to 0, then take the smaller of the two orientations."""
    values = tuple(int(x) for x in values)
    lo, hi = min(values), max(values)
    forward = tuple(x - lo for x in values)
    backward = tuple(hi - x for x in values)
    return min(forward, backward)


def _component_tree(G: DistanceGraph, comp: list[int]):
    index = {x: i for i, x in enumerate(comp)}
    adj = G.adj
    root = comp[0]
    order = [root]
    parent = {root: None}
    for w in order:
        for x in sorted(adj[w]):
            if x not in parent:
                parent[x] = w
                order.append(x)
    tree = [(index[parent[x]], index[x], adj[x][parent[x]]) for x in order[1:]]
    in_tree = {(min(p, c), max(p, c)) for p, c, _ in tree}
    extra = []
    for a in comp:
        for b, x in adj[a].items():
            if a < b and (index[a], index[b]) not in in_tree and (index[b], index[a]) not in in_tree:
                extra.append((index[a], index[b], x))
    return tree, extra


def _embed_int64(c: int, tree, extra) -> np.ndarray:
    m = len(tree)
    # first tree sign fixed at +1
    free = max(m - 1, 0)
    codes = np.arange(2**free, dtype=np.int64)
    signs = np.ones((len(codes), m), dtype=np.int64)
    for j in range(free):
        signs[:, j + 1] = 1 - 2 * ((codes >> j) & 1)
    P = np.zeros((len(codes), c), dtype=np.int64)
    for j, (p, ch, x) in enumerate(tree):
        P[:, ch] = P[:, p] + signs[:, j] * x
    keep = np.ones(len(codes), dtype=bool)
    for a, b, x in extra:
        keep &= np.abs(P[:, a] - P[:, b]) == x
    P = P[keep]
    if len(P) and c > 1:
        S = np.sort(P, axis=1)
        P = P[np.all(np.diff(S, axis=1) != 0, axis=1)]
    if not len(P):
        return P
    lo = P.min(axis=1, keepdims=True)
    hi = P.max(axis=1, keepdims=True)
    fwd = P - lo
    bwd = hi - P
    diff = fwd - bwd
    nz = diff != 0
    first = np.argmax(nz, axis=1)
    lead = diff[np.arange(len(P)), first]
    use_bwd = nz.any(axis=1) & (lead > 0)
    canon = np.where(use_bwd[:, None], bwd, fwd)
    return np.unique(canon, axis=0)


def _embed_python(c: int, tree, extra) -> list[tuple[int, ...]]:
    m = len(tree)
    free = max(m - 1, 0)
    found = set()
    for code in range(2**free):
        P = [0] * c
        for j, (p, ch, x) in enumerate(tree):
            s = 1 if j == 0 or not (code >> (j - 1)) & 1 else -1
            P[ch] = P[p] + s * x
        if any(abs(P[a] - P[b]) != x for a, b, x in extra):
            continue
        if len(set(P)) != c:
            continue
        found.add(canonical_positions(P))
    return sorted(found)


def enumerate_embeddings(G: DistanceGraph, cap: int = DEFAULT_CAP) -> list[ComponentEmbeddings]:
    """Embedding classes of every component, ordered by smallest label.

    Raises :class:`OracleCapExceeded` if a component has more than ``cap`` labels.
    """
    out = []
    for comp in G.connected_components():
        c = len(comp)
        if c > cap:
            raise OracleCapExceeded(f"component of size {c} exceeds oracle cap {cap}")
        if c == 1:
            out.append(ComponentEmbeddings(tuple(comp), ((0,),)))
            continue
        tree, extra = _component_tree(G, comp)
        total = sum(x for _, _, x in tree)
        if total < 2**62:
            rows = _embed_int64(c, tree, extra)
            classes = tuple(tuple(int(x) for x in row) for row in rows)
        else:
            classes = tuple(_embed_python(c, tree, extra))
        out.append(ComponentEmbeddings(tuple(comp), classes))
    return out


def _component_deducible(emb: ComponentEmbeddings) -> list[Pair]:
    labels = emb.labels
    c = len(labels)
    if c < 2 or not emb.classes:
        # no consistent embedding at all: every distance is vacuously determined
        return [(labels[i], labels[j]) for i, j in combinations(range(c), 2)]
    if all(abs(x) < 2**62 for row in emb.classes for x in row):
        C = np.array(emb.classes, dtype=np.int64)
    else:
        C = np.array(emb.classes, dtype=object)
    D = np.abs(C[:, :, None] - C[:, None, :])
    same = np.all(D == D[0], axis=0)
    iu, ju = np.nonzero(np.triu(same, k=1))
    return [(labels[i], labels[j]) for i, j in zip(iu.tolist(), ju.tolist())]


def deducible_pairs(G: DistanceGraph, cap: int = DEFAULT_CAP, embeddings=None) -> set[Pair]:
    """Pairs ``u < v`` whose distance is the same in every embedding class.

    Pairs in different components are never deducible.
    """
    if embeddings is None:
        embeddings = enumerate_embeddings(G, cap)
    out: set[Pair] = set()
    for emb in embeddings:
        out.update(_component_deducible(emb))
    return out


def is_reconstructible_set(U: Iterable[int], G: DistanceGraph, cap: int = DEFAULT_CAP, deducible=None) -> bool:
    """Whether every pair inside ``U`` is deducible."""
    U = sorted(set(int(x) for x in U))
    if len(U) <= 1:
        return True
    if deducible is None:
        deducible = deducible_pairs(G, cap)
    return all(p in deducible for p in combinations(U, 2))


def max_clique(n: int, edges: Iterable[Pair]) -> tuple[int, ...]:
    """Largest clique, ties broken to the lexicographically least sorted tuple.

    Depth-first search over cliques in lexicographic order with the usual
    size bound; since an equal-size clique found later is never
    lexicographically smaller, only strictly larger ones replace the best.
    """
    if n == 0:
        return ()
    nbrs = [set() for _ in range(n)]
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    best: list[int] = [0]

    def expand(chosen: list[int], cands: list[int]) -> None:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
        for i, x in enumerate(cands):
            if len(chosen) + len(cands) - i <= len(best):
                return
            chosen.append(x)
            expand(chosen, [y for y in cands[i + 1 :] if y in nbrs[x]])
            chosen.pop()

    expand([], list(range(n)))
    return tuple(best)


def largest_reconstructible_set(G: DistanceGraph, cap: int = DEFAULT_CAP, deducible=None) -> tuple[int, ...]:
    """A maximum reconstructible label set (lexicographically least among ties)."""
    if deducible is None:
        deducible = deducible_pairs(G, cap)
    return max_clique(G.n, deducible)


def _full_reconstructible(G: DistanceGraph, cap: int) -> bool:
    if G.n <= 1:
        return True
    if len(G.connected_components()) > 1:
        return False
    return is_reconstructible_set(range(G.n), G, cap)


def hitting_time_exact(V: PointSet, schedule: RevealSchedule, cap: int = DEFAULT_CAP) -> int:
    """First number of reveals after which the whole set is reconstructible.

    Reconstructibility only improves as distances arrive, so a binary search
    over prefixes suffices.
    """
    n = V.n
    if n > cap:
        raise OracleCapExceeded(f"n = {n} exceeds oracle cap {cap}")
    if n == 1:
        return 0
    dist = schedule.distances(V)
    lo, hi = 1, len(schedule)
    while lo < hi:
        mid = (lo + hi) // 2
        if _full_reconstructible(schedule.prefix_graph(V, mid, dist), cap):
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass
class OracleResult:
    components: list[ComponentEmbeddings]
    deducible: set[Pair]
    largest: tuple[int, ...]

    @classmethod
    def of(cls, G: DistanceGraph, cap: int = DEFAULT_CAP) -> "OracleResult":
        emb = enumerate_embeddings(G, cap)
        ded = deducible_pairs(G, cap, embeddings=emb)
        return cls(emb, ded, largest_reconstructible_set(G, cap, deducible=ded))

    def to_dict(self) -> dict:
        return {
            "components": [
                {"labels": list(c.labels), "classes": [list(r) for r in c.classes]} for c in self.components
            ],
            "deducible": sorted(list(p) for p in self.deducible),
            "largest": list(self.largest),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "OracleResult":
        data = json.loads(text)
        comps = [
            ComponentEmbeddings(tuple(c["labels"]), tuple(tuple(r) for r in c["classes"])) for c in data["components"]
        ]
        return cls(comps, {tuple(p) for p in data["deducible"]}, tuple(data["largest"]))
