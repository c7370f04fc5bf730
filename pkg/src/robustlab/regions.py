"""Perturbation-region algebra: finite point sets, balls, unions, expansions.

A region is one of four immutable variants:

* :class:`FinitePoints` -- a nonempty finite point set (zero measure);
* :class:`~robustlab.geometry.Ball` -- a closed ball;
* :class:`UnionOfBalls` -- a finite union of closed balls;
* :class:`Expanded` -- a lazy radius-``gamma`` neighborhood of another
  region, collapsed on construction so expansions never nest.

``expand`` returns normalized concrete forms (expanding a finite point set
yields a union of balls; expanding balls inflates radii), matching the
Minkowski sum with a closed ball.  Uniform sampling is Lebesgue-exact via
rejection from the region's bounding box.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .geometry import Ball, DimensionMismatch, as_point, _readonly
from .seeding import as_generator

__all__ = [
    "Region",
    "FinitePoints",
    "UnionOfBalls",
    "Expanded",
    "expand",
    "contains",
    "point_to_region_distance",
    "diameter",
    "normalize_region",
    "uniform_sample",
    "point_key",
    "RegionFamily",
    "ZeroMeasureError",
    "SamplingEfficiencyError",
    "region_to_dict",
    "region_from_dict",
]

KEY_DECIMALS = 12


class ZeroMeasureError(ValueError):
    """Uniform sampling was requested from a Lebesgue-null region."""


class SamplingEfficiencyError(RuntimeError):
    """Bounding-box rejection fell below the minimum acceptance rate."""


def point_key(x) -> tuple:
    """Hashable identity of a point, quantized at 1e-12 per coordinate."""
    p = as_point(x)
    q = np.round(p, KEY_DECIMALS)
    # avoid distinct keys for -0.0 vs 0.0
    q = q + 0.0
    return tuple(q.tolist())


@dataclass(frozen=True)
class FinitePoints:
    """Region consisting of finitely many points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise ValueError("FinitePoints must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def contains(self, p) -> bool:
        return self.distance_to(p) <= 1e-12

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        return self.distance_to_many(pts) <= 1e-12

    def distance_to(self, p) -> float:
        p = as_point(p)
        if p.size != self.dimension:
            raise DimensionMismatch(f"dimension mismatch: {p.size} vs {self.dimension}")
        return float(np.min(np.linalg.norm(self.points - p, axis=1)))

    def distance_to_many(self, pts: np.ndarray) -> np.ndarray:
        out = np.empty(len(pts))
        for i, block in _blocks(pts):
            out[i] = np.min(np.linalg.norm(block[:, None, :] - self.points[None, :, :], axis=-1), axis=1)
        return out

    def diameter(self) -> float:
        if len(self.points) == 1:
            return 0.0
        diff = self.points[:, None, :] - self.points[None, :, :]
        return float(np.max(np.linalg.norm(diff, axis=-1)))

    def expand(self, gamma: float) -> "UnionOfBalls":
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return UnionOfBalls(tuple(Ball(p, gamma) for p in self.points))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)


@dataclass(frozen=True)
class UnionOfBalls:
    """Finite union of closed balls."""

    balls: tuple[Ball, ...]

    def __post_init__(self):
        balls = tuple(self.balls)
        if not balls:
            raise ValueError("UnionOfBalls must be nonempty")
        dims = {b.dimension for b in balls}
        if len(dims) != 1:
            raise DimensionMismatch("balls in a union must share a dimension")
        object.__setattr__(self, "balls", balls)

    @property
    def dimension(self) -> int:
        return self.balls[0].dimension

    def _centers_radii(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.asarray([b.center for b in self.balls]),
            np.asarray([b.radius for b in self.balls]),
        )

    def contains(self, p) -> bool:
        return any(b.contains(p) for b in self.balls)

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        return self.distance_to_many(pts) <= 0.0

    def distance_to(self, p) -> float:
        return min(b.distance_to(p) for b in self.balls)

    def distance_to_many(self, pts: np.ndarray) -> np.ndarray:
        centers, radii = self._centers_radii()
        out = np.empty(len(pts))
        for i, block in _blocks(pts):
            dist = np.linalg.norm(block[:, None, :] - centers[None, :, :], axis=-1) - radii[None, :]
            out[i] = np.maximum(0.0, np.min(dist, axis=1))
        return out

    def diameter(self) -> float:
        """Pairwise upper bound: max over ball pairs of center gap plus radii."""
        centers, radii = self._centers_radii()
        gaps = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
        return float(np.max(gaps + radii[:, None] + radii[None, :]))

    def expand(self, gamma: float) -> "UnionOfBalls":
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return UnionOfBalls(tuple(Ball(b.center, b.radius + gamma) for b in self.balls))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        los, his = zip(*(b.bounding_box() for b in self.balls))
        return np.min(los, axis=0), np.max(his, axis=0)


@dataclass(frozen=True)
class Expanded:
    """Lazy gamma-neighborhood of a base region.

    Membership is by definition ``distance(p, base) <= gamma``.  Nested
    expansions collapse on construction since the underlying Minkowski sums
    add radii.
    """

    base: "Region"
    gamma: float

    def __post_init__(self):
        gamma = float(self.gamma)
        base = self.base
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        while isinstance(base, Expanded):
            gamma += base.gamma
            base = base.base
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "gamma", gamma)

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def contains(self, p) -> bool:
        return self.base.distance_to(p) <= self.gamma

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        return self.base.distance_to_many(pts) <= self.gamma

    def distance_to(self, p) -> float:
        return max(0.0, self.base.distance_to(p) - self.gamma)

    def distance_to_many(self, pts: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, self.base.distance_to_many(pts) - self.gamma)

    def diameter(self) -> float:
        return self.base.diameter() + 2.0 * self.gamma

    def expand(self, gamma: float) -> "Expanded":
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return Expanded(self.base, self.gamma + gamma)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base.bounding_box()
        return lo - self.gamma, hi + self.gamma


Region = Union[FinitePoints, Ball, UnionOfBalls, Expanded]


def _blocks(pts: np.ndarray, size: int = 4096):
    pts = np.atleast_2d(pts)
    for start in range(0, len(pts), size):
        sl = slice(start, min(start + size, len(pts)))
        yield sl, pts[sl]


def expand(region: Region, gamma: float) -> Region:
    """Radius-``gamma`` neighborhood of a region, in normalized form."""
    return region.expand(gamma)


def contains(region: Region, p) -> bool:
    return region.contains(p)


def point_to_region_distance(p, region: Region) -> float:
    """Distance from a point to the closed region (zero inside)."""
    return region.distance_to(p)


def diameter(region: Region) -> float:
    return region.diameter()


def normalize_region(region: Region) -> Region:
    """Collapse lazy expansions into concrete ball-based or point forms."""
    if isinstance(region, Expanded):
        return region.base.expand(region.gamma)
    return region


def _positive_measure(region: Region) -> bool:
    region = normalize_region(region)
    if isinstance(region, FinitePoints):
        return False
    if isinstance(region, Ball):
        return region.radius > 0
    return any(b.radius > 0 for b in region.balls)


def uniform_sample(
    region: Region,
    n: int,
    seed: int | np.random.Generator,
    *,
    min_efficiency: float = 1e-6,
) -> np.ndarray:
    """Draw ``n`` Lebesgue-uniform points from a positive-measure region.

    Rejection sampling from the bounding box keeps the draw exactly uniform
    on unions with overlaps (no inclusion-exclusion bookkeeping).  Aborts
    with diagnostics if the acceptance rate falls below ``min_efficiency``.
    """
    if not _positive_measure(region):
        raise ZeroMeasureError("region has zero Lebesgue measure; uniform sampling undefined")
    rng = as_generator(seed)
    lo, hi = region.bounding_box()
    out = np.empty((n, region.dimension))
    got = 0
    drawn = 0
    batch = max(1024, 2 * n)
    while got < n:
        cand = rng.uniform(lo, hi, size=(batch, region.dimension))
        drawn += batch
        good = cand[region.contains_many(cand)]
        take = min(n - got, len(good))
        out[got : got + take] = good[:take]
        got += take
        if drawn >= 1_000_000 and got / drawn < min_efficiency:
            raise SamplingEfficiencyError(
                f"rejection acceptance {got/drawn:.2e} below {min_efficiency:.0e} "
                f"after {drawn} draws (bounding box {lo} .. {hi})"
            )
    return out


def region_to_dict(region: Region) -> dict:
    """JSON-ready representation of a region (harness config format)."""
    if isinstance(region, FinitePoints):
        return {"kind": "points", "points": region.points.tolist()}
    if isinstance(region, Ball):
        return {"kind": "ball", "center": region.center.tolist(), "radius": region.radius}
    if isinstance(region, UnionOfBalls):
        return {
            "kind": "union_of_balls",
            "balls": [
                {"center": b.center.tolist(), "radius": b.radius} for b in region.balls
            ],
        }
    if isinstance(region, Expanded):
        return {"kind": "expanded", "base": region_to_dict(region.base), "gamma": region.gamma}
    raise TypeError(f"unknown region variant {type(region).__name__}")


def region_from_dict(data: dict) -> Region:
    """Inverse of :func:`region_to_dict`."""
    kind = data.get("kind")
    if kind == "points":
        return FinitePoints(np.asarray(data["points"], dtype=float))
    if kind == "ball":
        return Ball(np.asarray(data["center"], dtype=float), float(data["radius"]))
    if kind == "union_of_balls":
        return UnionOfBalls(
            tuple(
                Ball(np.asarray(b["center"], dtype=float), float(b["radius"]))
                for b in data["balls"]
            )
        )
    if kind == "expanded":
        return Expanded(region_from_dict(data["base"]), float(data["gamma"]))
    raise ValueError(f"unknown region kind {kind!r}")


class RegionFamily:
    """Assignment of perturbation regions to support points.

    Anchors are identified by coordinates quantized at 1e-12.  Each
    assigned region must contain its anchor unless the family is built
    with ``allow_outside_anchor=True``.  An optional ``default_rule``
    callable serves regions for off-support points (for instance
    ``lambda x: Ball(x, r)`` for a fixed-radius ball family).
    """

    def __init__(
        self,
        assignments: list[tuple[np.ndarray, Region]] | dict,
        default_rule: Callable[[np.ndarray], Region] | None = None,
        *,
        allow_outside_anchor: bool = False,
    ):
        items = assignments.items() if isinstance(assignments, dict) else assignments
        self._regions: dict[tuple, Region] = {}
        self._anchors: list[np.ndarray] = []
        for anchor, region in items:
            anchor = as_point(anchor)
            if anchor.size != region.dimension:
                raise DimensionMismatch("anchor and region dimensions differ")
            if not allow_outside_anchor and not region.contains(anchor):
                raise ValueError(f"anchor {anchor} lies outside its assigned region")
            self._regions[point_key(anchor)] = region
            self._anchors.append(anchor)
        self._default = default_rule

    @property
    def anchors(self) -> list[np.ndarray]:
        return list(self._anchors)

    def region_for(self, x) -> Region:
        key = point_key(x)
        if key in self._regions:
            return self._regions[key]
        if self._default is not None:
            return self._default(as_point(x))
        raise KeyError(f"no region assigned for point {x}")

    def has_region(self, x) -> bool:
        return point_key(x) in self._regions or self._default is not None

    def expanded(self, r: float) -> "RegionFamily":
        """Family of radius-``r`` expansions; ``r == 0`` returns self."""
        if r < 0:
            raise ValueError("expansion radius must be nonnegative")
        if r == 0:
            return self
        expanded = [(a, self._regions[point_key(a)].expand(r)) for a in self._anchors]
        default = None
        if self._default is not None:
            base = self._default
            default = lambda x: base(x).expand(r)  # noqa: E731
        return RegionFamily(expanded, default, allow_outside_anchor=True)
