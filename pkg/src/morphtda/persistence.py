"""Vietoris-Rips persistence in dimensions 0 and 1 for planar point clouds.

``vr_barcode`` is the production path:

* dimension 0 by single linkage (union-find over edges in filtration order);
  each merge kills one component at the merging edge length;
* dimension 1 by reducing the coboundary matrix of the edges that survive
  clearing (the merge edges cannot carry a 1-cycle), processed in reverse
  filtration order. An edge that is the longest edge of some triangle pairs
  with the smallest such triangle (an apparent pair, of zero persistence);
  those pivots are found in bulk with sparse products and their columns are
  only built if another column has to add them. Coboundaries are generated
  from the neighbourhoods of the edge endpoints.

Edges are totally ordered by ``(length, i, j)`` and triangles by the ranks of
their three edges, largest first; both orders refine the filtration.
Lengths are compared via squared distances, which are exact for the integer
landmark coordinates produced by :mod:`morphtda.ulbp`.

``brute_force_barcode`` enumerates the full filtered complex and runs the
textbook boundary-matrix reduction. It shares no code with the fast path and
serves as a test oracle for small clouds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .errors import CloudTooLarge, EmptyCloud, ParseError
from .ulbp import PointCloud

DEFAULT_THRESHOLD = 25.0
BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class FiltrationParams:
    max_dim: int = 1
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.max_dim not in (0, 1):
            raise ValueError(f"max_dim must be 0 or 1, got {self.max_dim}")
        if not self.threshold > 0 or not math.isfinite(self.threshold):
            raise ValueError(f"threshold must be a positive finite number, got {self.threshold}")


@dataclass(frozen=True)
class Bar:
    birth: float
    death: float
    essential: bool = False

    @property
    def lifespan(self) -> float:
        return self.death - self.birth


@dataclass
class PersistenceBarcode:
    """Bars per homology dimension; essential bars end at ``threshold`` and are flagged."""

    threshold: float
    dim0: list = field(default_factory=list)
    dim1: list = field(default_factory=list)

    def bars(self, dim: int) -> list:
        if dim == 0:
            return self.dim0
        if dim == 1:
            return self.dim1
        raise ValueError(f"only dimensions 0 and 1 are stored, got {dim}")

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "dim0": [[b.birth, b.death, b.essential] for b in self.dim0],
            "dim1": [[b.birth, b.death, b.essential] for b in self.dim1],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "PersistenceBarcode":
        try:
            threshold = float(data["threshold"])
            dims = [
                [Bar(float(b), float(d), bool(e)) for b, d, e in data[key]]
                for key in ("dim0", "dim1")
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed barcode document: {exc}") from exc
        return cls(threshold=threshold, dim0=dims[0], dim1=dims[1])

    @classmethod
    def from_json(cls, text: str) -> "PersistenceBarcode":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def _coords(pc) -> np.ndarray:
    pts = pc.points if isinstance(pc, PointCloud) else np.asarray(pc)
    pts = np.asarray(pts).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyCloud("point cloud has no points")
    return pts


def _filtered_edges(pts: np.ndarray, threshold: float):
    """Edges with length <= threshold, sorted by (squared length, i, j)."""
    exact = np.issubdtype(pts.dtype, np.integer)
    work = pts.astype(np.int64) if exact else pts.astype(np.float64)
    if len(pts) < 2:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty, np.empty(0, dtype=work.dtype)
    tree = cKDTree(work.astype(np.float64))
    pairs = tree.query_pairs(threshold * (1 + 1e-9) + 1e-12, output_type="ndarray")
    if len(pairs) == 0:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty, np.empty(0, dtype=work.dtype)
    i = np.minimum(pairs[:, 0], pairs[:, 1])
    j = np.maximum(pairs[:, 0], pairs[:, 1])
    diff = work[i] - work[j]
    sq = (diff * diff).sum(axis=1)
    limit = threshold * threshold
    keep = sq <= (limit if not exact else math.floor(limit))
    i, j, sq = i[keep], j[keep], sq[keep]
    order = np.lexsort((j, i, sq))
    return i[order], j[order], sq[order]


def _zero_dim(n: int, ei, ej, lengths, threshold: float):
    uf = _UnionFind(n)
    bars = []
    merge_edges = set()
    for rank, (a, b) in enumerate(zip(ei.tolist(), ej.tolist())):
        if uf.union(a, b):
            bars.append(Bar(0.0, float(lengths[rank])))
            merge_edges.add(rank)
            if len(bars) == n - 1:
                break
    survivors = n - len(bars)
    bars.extend(Bar(0.0, float(threshold), True) for _ in range(survivors))
    return bars, merge_edges


_CHUNK = 20_000


def _adjacency(n: int, ei, ej, m: int) -> sparse.csr_matrix:
    """Symmetric CSR matrix holding ``rank + 1`` for every edge."""
    ranks = np.arange(1, m + 1, dtype=np.int64)
    adj = sparse.csr_matrix((np.concatenate([ranks, ranks]),
                             (np.concatenate([ei, ej]), np.concatenate([ej, ei]))), shape=(n, n))
    adj.sort_indices()
    return adj


def _apparent_pivots(adj: sparse.csr_matrix, ei, ej, m: int) -> np.ndarray:
    """Smallest key of a triangle whose longest edge is edge ``r``, or -1 if none.

    Such an edge forms an apparent pair with that triangle: nothing processed
    before it can own the pivot, and the pair has zero persistence.
    """
    present = adj.astype(bool).astype(np.int64)
    out = np.full(m, -1, dtype=np.int64)
    for lo in range(0, m, _CHUNK):
        hi = min(lo + _CHUNK, m)
        # the same common-neighbour pattern, once with r(i,k) and once with r(j,k)
        a = sparse.csr_matrix(adj[ei[lo:hi]].multiply(present[ej[lo:hi]]))
        b = sparse.csr_matrix(present[ei[lo:hi]].multiply(adj[ej[lo:hi]]))
        if a.nnz == 0:
            continue
        a.sort_indices()
        b.sort_indices()
        assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
        row = np.repeat(np.arange(hi - lo), np.diff(a.indptr))
        r1, r2 = a.data - 1, b.data - 1
        mid, low = np.maximum(r1, r2), np.minimum(r1, r2)
        own = lo + row
        ok = mid < own
        if not ok.any():
            continue
        keys = own[ok] * m * m + mid[ok] * m + low[ok]
        rows = row[ok]  # ascending, so each row's keys are contiguous
        starts = np.flatnonzero(np.r_[True, rows[1:] != rows[:-1]])
        out[lo + rows[starts]] = np.minimum.reduceat(keys, starts)
    return out


def _one_dim(n: int, ei, ej, lengths, threshold: float, cleared: set):
    m = len(ei)
    if m < 3:
        return []
    adj = _adjacency(n, ei, ej, m)
    indptr, indices, data = adj.indptr, adj.indices, adj.data - 1

    def coboundary(rank: int) -> np.ndarray:
        """Sorted triangle keys of the cofacets of edge ``rank``."""
        a, b = ei[rank], ej[rank]
        sa, sb = slice(indptr[a], indptr[a + 1]), slice(indptr[b], indptr[b + 1])
        _, ia, ib = np.intersect1d(indices[sa], indices[sb], assume_unique=True,
                                   return_indices=True)
        r1, r2 = data[sa][ia], data[sb][ib]
        tri = np.sort(np.column_stack([r1, r2, np.full(len(r1), rank)]), axis=1)
        return np.sort((tri[:, 2] * m + tri[:, 1]) * m + tri[:, 0])

    apparent = _apparent_pivots(adj, ei, ej, m).tolist()
    bars = []
    # pivot -> reduced column, or the edge rank whose plain coboundary it is
    reduced: dict = {}
    base = m * m
    for rank in range(m - 1, -1, -1):
        if rank in cleared:
            continue
        if apparent[rank] >= 0:
            reduced[apparent[rank]] = rank
            continue
        col = coboundary(rank)
        birth = float(lengths[rank])
        while len(col):
            pivot = int(col[0])
            other = reduced.get(pivot)
            if other is None:
                reduced[pivot] = col
                death = float(lengths[pivot // base])
                if death > birth:
                    bars.append(Bar(birth, death))
                break
            if isinstance(other, int):
                other = reduced[pivot] = coboundary(other)
            col = np.setxor1d(col, other, assume_unique=True)
        else:
            bars.append(Bar(birth, float(threshold), True))
    bars.sort(key=lambda bar: (bar.birth, bar.death))
    return bars


def vr_barcode(pc, params: FiltrationParams = FiltrationParams()) -> PersistenceBarcode:
    """Vietoris-Rips barcode of a point cloud up to ``params.threshold``.

    ``pc`` may be a :class:`PointCloud` or any ``(n, 2)`` array of coordinates.
    Dimension-0 bars are kept in full (one per point, zero-length merges
    included); zero-persistence dimension-1 pairs are dropped.
    """
    pts = _coords(pc)
    n = len(pts)
    threshold = float(params.threshold)
    ei, ej, sq = _filtered_edges(pts, threshold)
    lengths = np.sqrt(sq.astype(np.float64))
    dim0, merges = _zero_dim(n, ei, ej, lengths, threshold)
    dim0.sort(key=lambda bar: (bar.death, bar.essential))
    dim1 = []
    if params.max_dim >= 1:
        dim1 = _one_dim(n, ei, ej, lengths, threshold, merges)
    return PersistenceBarcode(threshold=threshold, dim0=dim0, dim1=dim1)


def brute_force_barcode(pc, params: FiltrationParams = FiltrationParams()) -> PersistenceBarcode:
    """Reference barcode from the explicit filtered boundary matrix (at most 12 points)."""
    pts = [tuple(float(v) for v in p) for p in _coords(pc)]
    n = len(pts)
    if n > BRUTE_FORCE_LIMIT:
        raise CloudTooLarge(f"brute force is limited to {BRUTE_FORCE_LIMIT} points, got {n}")
    t = float(params.threshold)

    def diameter(simplex):
        if len(simplex) == 1:
            return 0.0
        return max(math.dist(pts[a], pts[b]) for a, b in combinations(simplex, 2))

    simplices = []
    for size in (1, 2, 3):
        for s in combinations(range(n), size):
            value = diameter(s)
            if value <= t:
                simplices.append((value, size - 1, s))
    simplices.sort()
    index = {s: k for k, (_, _, s) in enumerate(simplices)}

    columns = []
    for value, dim, s in simplices:
        if dim == 0:
            columns.append(set())
        else:
            columns.append({index[f] for f in combinations(s, dim)})

    low_owner = {}
    pairs = {}
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            if low not in low_owner:
                low_owner[low] = j
                pairs[low] = j
                break
            col ^= columns[low_owner[low]]

    dim0, dim1 = [], []
    killers = set(pairs.values())
    for k, (value, dim, s) in enumerate(simplices):
        if dim == 2 or k in killers:
            continue
        target = dim0 if dim == 0 else dim1
        if k in pairs:
            death = simplices[pairs[k]][0]
            if dim == 0 or death > value:
                target.append(Bar(value, death))
        else:
            target.append(Bar(value, t, True))
    if params.max_dim == 0:
        dim1 = []
    dim0.sort(key=lambda bar: (bar.death, bar.essential))
    dim1.sort(key=lambda bar: (bar.birth, bar.death))
    return PersistenceBarcode(threshold=t, dim0=dim0, dim1=dim1)
