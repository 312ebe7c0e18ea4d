import math

import pytest
from hypothesis import given, strategies as st

from stereo360.errors import InvalidParameterError
from stereo360.viewpoints import ring_counts, sample_viewpoints, viewpoint_count


def enumerate_count(n0):
    """Count by walking latitudes k * 360/n0 directly."""
    theta = 360.0 / n0
    total = n0 + 2
    k = 1
    while k * theta < 90 - 1e-9:
        total += 2 * math.floor(n0 * math.cos(math.radians(k * theta)) + 1e-9)
        k += 1
    return total


def test_n0_8_gives_twenty():
    vps = sample_viewpoints(8)
    assert len(vps) == 20
    by_lat = {}
    for v in vps:
        by_lat[v.latitude] = by_lat.get(v.latitude, 0) + 1
    assert by_lat == {90.0: 1, 45.0: 5, 0.0: 8, -45.0: 5, -90.0: 1}


def test_n0_4_only_equator_and_poles():
    vps = sample_viewpoints(4)
    assert len(vps) == 6
    assert [v.latitude for v in vps] == [90.0, 0.0, 0.0, 0.0, 0.0, -90.0]


def test_n0_6():
    vps = sample_viewpoints(6)
    assert len(vps) == 14
    assert sum(1 for v in vps if v.latitude == 60.0) == 3
    assert sum(1 for v in vps if v.latitude == -60.0) == 3


@pytest.mark.parametrize("n0", [0, 1, 3, -8, 2.5])
def test_rejects_small_n0(n0):
    with pytest.raises(InvalidParameterError):
        sample_viewpoints(n0)


@pytest.mark.parametrize("n0", range(4, 65))
def test_closed_form_count(n0):
    assert len(sample_viewpoints(n0)) == viewpoint_count(n0) == enumerate_count(n0)


@given(st.integers(4, 64))
def test_ordering_and_ring_invariants(n0):
    vps = sample_viewpoints(n0)
    theta = 360.0 / n0
    lats = [v.latitude for v in vps]
    assert lats == sorted(lats, reverse=True)
    assert lats.count(90.0) == 1 and lats.count(-90.0) == 1
    assert vps[0].latitude == 90.0 and vps[-1].latitude == -90.0
    for v in vps[1:-1]:
        assert abs(v.latitude) < 90.0
        k = v.latitude / theta
        assert abs(k - round(k)) < 1e-9
        assert 0.0 <= v.longitude < 360.0
    rings = {}
    for v in vps[1:-1]:
        rings.setdefault(v.latitude, []).append(v.longitude)
    for lons in rings.values():
        assert lons[0] == 0.0
        assert lons == sorted(lons)
        step = 360.0 / len(lons)
        assert all(abs(b - a - step) < 1e-9 for a, b in zip(lons, lons[1:]))


def test_deterministic():
    assert sample_viewpoints(12) == sample_viewpoints(12)


def test_ring_counts_skip_zero_rings():
    # n0 = 5: theta = 72, ring at 72 has floor(5 cos 72) = 1
    assert [(k, c) for k, _, c in ring_counts(5)] == [(1, 1)]
    vps = sample_viewpoints(7)
    assert all(c > 0 for c in vps.ring_sizes().values())
