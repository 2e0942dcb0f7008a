import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morphtda.errors import CloudTooLarge, EmptyCloud, ParseError
from morphtda.persistence import (
    Bar,
    FiltrationParams,
    PersistenceBarcode,
    brute_force_barcode,
    vr_barcode,
)
from morphtda.ulbp import PointCloud
from oracles import bar_tuples, grid_cloud, plain_rips_dim1, prim_mst_lengths, same_bars

UNIT_SQUARE = [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_two_points():
    bc = vr_barcode(np.array([(0, 0), (3, 4)]))
    assert bar_tuples(bc, 0) == [(0.0, 5.0, False), (0.0, 25.0, True)]
    assert bc.dim1 == []


def test_unit_square():
    for bc in (vr_barcode(UNIT_SQUARE), brute_force_barcode(UNIT_SQUARE)):
        assert len(bc.dim1) == 1
        assert bc.dim1[0].birth == pytest.approx(1.0, abs=1e-12)
        assert bc.dim1[0].death == pytest.approx(math.sqrt(2), abs=1e-12)
        assert sorted(b.death for b in bc.dim0 if not b.essential) == [1.0, 1.0, 1.0]


def test_single_point():
    for fn in (vr_barcode, brute_force_barcode):
        bc = fn([(4, 4)])
        assert bar_tuples(bc, 0) == [(0.0, 25.0, True)]
        assert bc.dim1 == []


def test_equilateral_triangle_has_no_loop():
    tri = [(0.0, 0.0), (2.0, 0.0), (1.0, math.sqrt(3.0))]
    assert brute_force_barcode(tri).dim1 == []
    assert vr_barcode(tri).dim1 == []


def test_one_bar_per_point(rng):
    pts = grid_cloud(rng, 40, side=30)
    assert len(vr_barcode(pts).dim0) == 40


def test_errors():
    with pytest.raises(EmptyCloud):
        vr_barcode(np.empty((0, 2)))
    with pytest.raises(CloudTooLarge):
        brute_force_barcode(np.arange(26).reshape(13, 2))
    with pytest.raises(ValueError):
        FiltrationParams(max_dim=2)
    with pytest.raises(ValueError):
        FiltrationParams(threshold=0)


def test_point_cloud_input():
    pc = PointCloud(UNIT_SQUARE, source_dims=(2, 2))
    assert same_bars(bar_tuples(vr_barcode(pc), 1), bar_tuples(vr_barcode(UNIT_SQUARE), 1))


def test_threshold_truncation_splits_components():
    # two clusters 30 apart: both survive as essential components
    pts = [(0, 0), (0, 2), (30, 0), (30, 3)]
    bc = vr_barcode(pts)
    assert bar_tuples(bc, 0) == [(0.0, 2.0, False), (0.0, 3.0, False),
                                 (0.0, 25.0, True), (0.0, 25.0, True)]


def test_unfilled_loop_is_essential():
    # square of side 10: the diagonal (14.14) exceeds the cap of 12
    pts = [(0, 0), (0, 10), (10, 0), (10, 10)]
    params = FiltrationParams(threshold=12.0)
    for fn in (vr_barcode, brute_force_barcode):
        assert bar_tuples(fn(pts, params), 1) == [(10.0, 12.0, True)]


def test_max_dim_zero_skips_loops():
    bc = vr_barcode(UNIT_SQUARE, FiltrationParams(max_dim=0))
    assert bc.dim1 == [] and len(bc.dim0) == 4


@pytest.mark.parametrize("threshold", [3.0, 6.0, 25.0])
def test_matches_brute_force_on_grid_clouds(threshold):
    rng = np.random.default_rng(int(threshold * 10))
    params = FiltrationParams(threshold=threshold)
    loops = essentials = 0
    for _ in range(60):
        pts = grid_cloud(rng, int(rng.integers(3, 13)), side=6 if threshold < 10 else 12)
        fast, slow = vr_barcode(pts, params), brute_force_barcode(pts, params)
        for dim in (0, 1):
            assert same_bars(bar_tuples(fast, dim), bar_tuples(slow, dim)), pts.tolist()
        loops += len(fast.dim1)
        essentials += sum(b.essential for b in fast.dim1)
    assert loops > 0
    if threshold == 3.0:
        assert essentials > 0


def test_matches_plain_reduction_on_dense_clouds():
    # dense enough that most edges are the longest edge of some triangle
    rng = np.random.default_rng(17)
    total = 0
    for _ in range(25):
        pts = grid_cloud(rng, int(rng.integers(30, 70)), side=int(rng.integers(15, 40)))
        threshold = float(rng.uniform(3, 12))
        got = bar_tuples(vr_barcode(pts, FiltrationParams(threshold=threshold)), 1)
        assert same_bars(got, plain_rips_dim1(pts, threshold)), pts.tolist()
        total += len(got)
    assert total > 50


def test_matches_brute_force_on_float_clouds(rng):
    for _ in range(60):
        pts = rng.normal(0, 3, (int(rng.integers(3, 13)), 2))
        params = FiltrationParams(threshold=float(rng.uniform(1, 8)))
        fast, slow = vr_barcode(pts, params), brute_force_barcode(pts, params)
        for dim in (0, 1):
            assert same_bars(bar_tuples(fast, dim), bar_tuples(slow, dim))


def test_mst_identity(rng):
    pts = grid_cloud(rng, 300, side=120)
    deaths = sorted(b.death for b in vr_barcode(pts, FiltrationParams(max_dim=0)).dim0
                    if not b.essential)
    assert deaths == [d for d in prim_mst_lengths(pts) if d <= 25.0]


def test_scale_equivariance(rng):
    pts = rng.uniform(0, 10, (10, 2))
    s = 2.5
    a = vr_barcode(pts, FiltrationParams(threshold=6.0))
    b = vr_barcode(pts * s, FiltrationParams(threshold=6.0 * s))
    for dim in (0, 1):
        scaled = [(x * s, y * s, e) for x, y, e in bar_tuples(a, dim)]
        assert same_bars(scaled, bar_tuples(b, dim), tol=1e-9)


def _greedy_match_ok(bars_a, bars_b, tol):
    """Each bar of ``bars_a`` with persistence > 2*tol finds an unused partner within tol."""
    unused = list(bars_b)
    for b, d, _ in bars_a:
        if d - b <= 2 * tol:
            continue
        best = min(unused, key=lambda x: max(abs(x[0] - b), abs(x[1] - d)), default=None)
        if best is None or max(abs(best[0] - b), abs(best[1] - d)) > tol:
            return False
        unused.remove(best)
    return True


def test_stability_under_small_perturbation(rng):
    angles = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    ring = np.column_stack([8 * np.cos(angles), 8 * np.sin(angles)])
    delta = 0.05
    base = vr_barcode(ring)
    assert max(b.death - b.birth for b in base.dim1) > 5
    for _ in range(10):
        moved = ring + rng.uniform(-delta, delta, ring.shape) / math.sqrt(2)
        other = vr_barcode(moved)
        d0a = sorted(b.death for b in base.dim0)
        d0b = sorted(b.death for b in other.dim0)
        assert max(abs(x - y) for x, y in zip(d0a, d0b)) <= 2 * delta
        assert _greedy_match_ok(bar_tuples(base, 1), bar_tuples(other, 1), 2 * delta)
        assert _greedy_match_ok(bar_tuples(other, 1), bar_tuples(base, 1), 2 * delta)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=40, unique=True),
       st.floats(1.0, 30.0))
def test_barcode_invariants(points, threshold):
    pts = np.array(points)
    bc = vr_barcode(pts, FiltrationParams(threshold=threshold))
    assert len(bc.dim0) == len(points)
    distances = {0.0, threshold}
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            distances.add(math.dist(points[i], points[j]))
    for bar in bc.dim0 + bc.dim1:
        assert bar.birth <= bar.death
        assert bar.birth in distances and bar.death in distances
        assert bar.death <= threshold
    assert all(b.birth == 0 for b in bc.dim0)
    assert all(b.death > b.birth for b in bc.dim1)
    span = max(distances - {threshold})
    if threshold >= span:
        assert sum(b.essential for b in bc.dim0) == 1


def test_json_roundtrip():
    bc = vr_barcode(UNIT_SQUARE)
    again = PersistenceBarcode.from_json(bc.to_json())
    assert again == bc
    doc = bc.to_dict()
    assert set(doc) == {"threshold", "dim0", "dim1"}
    assert doc["dim1"] == [[1.0, math.sqrt(2), False]]


def test_json_parse_errors():
    with pytest.raises(ParseError):
        PersistenceBarcode.from_json("{not json")
    with pytest.raises(ParseError):
        PersistenceBarcode.from_json('{"dim0": []}')


def test_bar_lifespan():
    assert Bar(1.0, 3.5).lifespan == 2.5
