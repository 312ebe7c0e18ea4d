"""Latitude-ring viewpoint sampling on the sphere.

``n0`` viewpoints sit on the equator; the ring at ``k * theta`` degrees
(``theta = 360 / n0``) north and south holds ``floor(n0 * cos(k * theta))``
points. Rings with zero points are dropped and each pole is sampled once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError

_EPS = 1e-9


@dataclass(frozen=True)
class SphericalViewpoint:
    latitude: float
    longitude: float
    ring_index: int


@dataclass(frozen=True)
class ViewpointSet:
    n0: int
    viewpoints: tuple[SphericalViewpoint, ...]

    def __len__(self) -> int:
        return len(self.viewpoints)

    def __iter__(self):
        return iter(self.viewpoints)

    def __getitem__(self, i):
        return self.viewpoints[i]

    def ring_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = {}
        for vp in self.viewpoints:
            sizes[vp.ring_index] = sizes.get(vp.ring_index, 0) + 1
        return sizes


def ring_counts(n0: int) -> list[tuple[int, float, int]]:
    """(k, latitude, points per hemisphere ring) for every k with 0 < k*theta < 90.

    Zero-point rings are included here; ``sample_viewpoints`` skips them.
    """
    if not isinstance(n0, int) or isinstance(n0, bool) or n0 < 4:
        raise InvalidParameterError(f"n0 must be an integer >= 4, got {n0!r}")
    theta = 360.0 / n0
    out = []
    k = 1
    # k*theta == 90 exactly is the pole, not a ring
    while k * theta < 90.0 - _EPS:
        lat = k * theta
        count = math.floor(n0 * math.cos(math.radians(lat)) + _EPS)
        out.append((k, lat, count))
        k += 1
    return out


def viewpoint_count(n0: int) -> int:
    return n0 + 2 + 2 * sum(c for _, _, c in ring_counts(n0))


def sample_viewpoints(n0: int = 8) -> ViewpointSet:
    """Ordered viewpoints: north pole, rings north to south, south pole.

    Within a ring longitudes ascend from 0 with spacing ``360 / count``.
    Pole rings carry ``ring_index = +/-(K + 1)`` where ``K`` is the last
    latitude ring index.
    """
    rings = ring_counts(n0)
    top = len(rings) + 1
    north = []
    for k, lat, count in rings:
        if count > 0:
            north.append((k, lat, count))

    vps: list[SphericalViewpoint] = [SphericalViewpoint(90.0, 0.0, top)]
    for k, lat, count in reversed(north):
        vps.extend(_ring(lat, count, k))
    vps.extend(_ring(0.0, n0, 0))
    for k, lat, count in north:
        vps.extend(_ring(-lat, count, -k))
    vps.append(SphericalViewpoint(-90.0, 0.0, -top))
    return ViewpointSet(n0, tuple(vps))


def _ring(lat: float, count: int, index: int) -> list[SphericalViewpoint]:
    step = 360.0 / count
    return [SphericalViewpoint(lat, i * step, index) for i in range(count)]
