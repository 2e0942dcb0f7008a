"""Slow, obviously-correct reference implementations used only by the tests."""

import heapq
import math

import numpy as np


def naive_landmarks(pixels, target=0b01111000):
    """Scan every interior pixel, spelling out the eight comparisons by hand."""
    px = np.asarray(pixels).astype(int)
    h, w = px.shape
    found = []
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            ctr = px[r, c]
            bits = [
                px[r - 1, c - 1] >= ctr,  # top-left, most significant
                px[r - 1, c] >= ctr,
                px[r - 1, c + 1] >= ctr,
                px[r, c + 1] >= ctr,
                px[r + 1, c + 1] >= ctr,
                px[r + 1, c] >= ctr,
                px[r + 1, c - 1] >= ctr,
                px[r, c - 1] >= ctr,
            ]
            code = int("".join("1" if b else "0" for b in bits), 2)
            if code == target:
                found.append((r, c))
    return found


def prim_mst_lengths(points):
    """Edge lengths of a Euclidean MST over the complete graph (lazy Prim)."""
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)
    if n < 2:
        return []
    in_tree = [False] * n
    in_tree[0] = True
    heap = [(math.dist(pts[0], pts[j]), j) for j in range(1, n)]
    heapq.heapify(heap)
    lengths = []
    while len(lengths) < n - 1:
        d, j = heapq.heappop(heap)
        if in_tree[j]:
            continue
        in_tree[j] = True
        lengths.append(d)
        for k in range(n):
            if not in_tree[k]:
                heapq.heappush(heap, (math.dist(pts[j], pts[k]), k))
    return sorted(lengths)


def bar_tuples(barcode, dim):
    return sorted((b.birth, b.death, b.essential) for b in barcode.bars(dim))


def same_bars(a, b, tol=1e-9):
    if len(a) != len(b):
        return False
    return all(
        abs(x[0] - y[0]) <= tol and abs(x[1] - y[1]) <= tol and x[2] == y[2]
        for x, y in zip(a, b)
    )


def grid_cloud(rng, n, side=20):
    cells = rng.choice(side * side, size=n, replace=False)
    return np.column_stack([cells // side, cells % side]).astype(np.int64)


def cubic_separable(rng, n=200, box=1.5, margin=0.1):
    pts = []
    while len(pts) < n:
        p = rng.uniform(-box, box, 2)
        if abs(p[0] ** 3 - p[1]) >= margin:
            pts.append(p)
    X = np.array(pts)
    y = np.where(X[:, 0] ** 3 - X[:, 1] > 0, 1.0, -1.0)
    return X, y



def plain_rips_dim1(points, threshold):
    """Dimension-1 bars by plain homology reduction, without clearing or shortcuts.

    Simplices are ordered by (diameter, dimension, vertex tuple); zero-length
    finite bars are dropped, unfilled loops come back as essential. Practical
    up to a few dozen points.
    """
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)
    dist = [[math.dist(pts[a], pts[b]) for b in range(n)] for a in range(n)]
    simplices = [(0.0, 0, (v,)) for v in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if dist[a][b] <= threshold:
                simplices.append((dist[a][b], 1, (a, b)))
            for c in range(b + 1, n):
                d = max(dist[a][b], dist[a][c], dist[b][c])
                if d <= threshold:
                    simplices.append((d, 2, (a, b, c)))
    simplices.sort()
    index = {s: k for k, (_, _, s) in enumerate(simplices)}
    owner, cycles, bars = {}, [], []
    for j, (value, dim, s) in enumerate(simplices):
        if dim == 0:
            continue
        faces = [s[:1], s[1:]] if dim == 1 else [s[:2], (s[0], s[2]), s[1:]]
        col = {index[f] for f in faces}
        while col and max(col) in owner:
            col ^= owner[max(col)]
        if col:
            owner[max(col)] = col
            birth = simplices[max(col)][0]
            if dim == 2 and value > birth:
                bars.append((birth, value, False))
        elif dim == 1:
            cycles.append(j)
    bars += [(simplices[j][0], float(threshold), True) for j in cycles if j not in owner]
    return sorted(bars)
