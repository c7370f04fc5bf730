"""Euclidean primitives: distances, closed balls, sphere covers, ball covers.

Conventions used throughout the library:

* points are 1-D float ndarrays; batches are ``(n, d)`` arrays;
* all balls and regions are closed (boundary included);
* geometric equality assertions use absolute tolerance ``1e-9``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import as_generator, uniform_sphere

__all__ = [
    "GEOM_TOL",
    "DimensionMismatch",
    "CoverageError",
    "as_point",
    "distance",
    "Ball",
    "SphereCover",
    "greedy_sphere_cover",
    "cover_compact_by_balls",
    "grid_cover_bound",
    "verify_cover",
]

GEOM_TOL = 1e-9


class DimensionMismatch(ValueError):
    """Operands live in Euclidean spaces of different dimension."""


class CoverageError(RuntimeError):
    """A constructed cover failed its own probe verification."""


def as_point(x) -> np.ndarray:
    """Validate and return a point as a 1-D float array."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"point must be a 1-D vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    return p


def _check_same_dim(da: int, db: int) -> None:
    if da != db:
        raise DimensionMismatch(f"dimension mismatch: {da} vs {db}")


def distance(a, b) -> float:
    """Euclidean distance between two points of equal dimension."""
    pa, pb = as_point(a), as_point(b)
    _check_same_dim(pa.size, pb.size)
    return float(np.linalg.norm(pa - pb))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball.  Doubles as the ball variant of a region."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _readonly(as_point(self.center)))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def dimension(self) -> int:
        return self.center.size

    def contains(self, p) -> bool:
        p = as_point(p)
        _check_same_dim(p.size, self.dimension)
        return bool(np.linalg.norm(p - self.center) <= self.radius)

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius

    def distance_to(self, p) -> float:
        p = as_point(p)
        _check_same_dim(p.size, self.dimension)
        return max(0.0, float(np.linalg.norm(p - self.center)) - self.radius)

    def distance_to_many(self, pts: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, np.linalg.norm(pts - self.center, axis=1) - self.radius)

    def diameter(self) -> float:
        return 2.0 * self.radius

    def expand(self, gamma: float) -> "Ball":
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return Ball(self.center, self.radius + gamma)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True)
class SphereCover:
    """Maximal mesh-separated point set on an origin-centered sphere.

    Invariants checked on construction: every center lies on the sphere
    (relative tolerance 1e-9) and pairwise center distances strictly exceed
    the mesh.  Maximality is certified statistically: ``probe_failures``
    counts fresh probe points farther than the mesh from every center, and
    the certificate passes when that count is zero.
    """

    sphere_radius: float
    mesh: float
    centers: np.ndarray
    probe_count: int = 0
    probe_failures: int = 0

    def __post_init__(self):
        object.__setattr__(self, "centers", _readonly(np.atleast_2d(self.centers)))
        if self.sphere_radius <= 0 or self.mesh <= 0:
            raise ValueError("sphere_radius and mesh must be positive")
        norms = np.linalg.norm(self.centers, axis=1)
        if not np.allclose(norms, self.sphere_radius, rtol=GEOM_TOL, atol=0.0):
            raise ValueError("cover centers must lie on the sphere")
        n = len(self.centers)
        if n > 1:
            diff = self.centers[:, None, :] - self.centers[None, :, :]
            dists = np.linalg.norm(diff, axis=-1)
            dists[np.diag_indices(n)] = np.inf
            if not np.all(dists > self.mesh):
                raise ValueError("cover centers are not mesh-separated")

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def certified(self) -> bool:
        return self.probe_count > 0 and self.probe_failures == 0


def greedy_sphere_cover(
    d: int,
    sphere_radius: float,
    mesh: float,
    seed: int | np.random.Generator,
    *,
    stop_factor: int = 10_000,
    probe_count: int = 10_000,
) -> SphereCover:
    """Randomized greedy packing of an origin-centered sphere in R^d.

    Uniform sphere points are sampled and accepted whenever they lie
    strictly farther than ``mesh`` from every accepted center.  Selection
    stops after ``stop_factor * len(centers)`` consecutive rejections, then
    maximality is certified with a fresh probe batch (failures are recorded
    on the returned cover, not hidden).

    A mesh of at least twice the radius legitimately yields a single-point
    cover.  Deterministic for a fixed seed.
    """
    if d < 2:
        raise ValueError("sphere covers need ambient dimension >= 2")
    if sphere_radius <= 0 or mesh <= 0:
        raise ValueError("sphere_radius and mesh must be positive")
    rng = as_generator(seed)

    centers: list[np.ndarray] = []
    consecutive = 0
    batch = 2048
    while True:
        limit = stop_factor * max(1, len(centers))
        if consecutive >= limit:
            break
        cand = uniform_sphere(batch, d, sphere_radius, rng)
        start = 0
        while start < len(cand):
            if centers:
                arr = np.asarray(centers)
                dmin = np.min(
                    np.linalg.norm(cand[start:, None, :] - arr[None, :, :], axis=-1),
                    axis=1,
                )
                ok = np.flatnonzero(dmin > mesh)
            else:
                ok = np.array([0])
            if ok.size == 0:
                consecutive += len(cand) - start
                break
            first = int(ok[0])
            consecutive += first
            if consecutive >= stop_factor * max(1, len(centers)):
                break
            centers.append(cand[start + first])
            consecutive = 0
            start += first + 1
        # re-check the stopping rule against the possibly grown center set
        if consecutive >= stop_factor * max(1, len(centers)):
            break

    arr = np.asarray(centers)
    probes = uniform_sphere(probe_count, d, sphere_radius, rng)
    dmin = np.min(np.linalg.norm(probes[:, None, :] - arr[None, :, :], axis=-1), axis=1)
    failures = int(np.count_nonzero(dmin > mesh))
    return SphereCover(sphere_radius, mesh, arr, probe_count, failures)


def grid_cover_bound(diameter: float, ball_radius: float, d: int) -> int:
    """A priori node-count bound for the axis-aligned grid cover.

    The grid uses pitch ``ball_radius * 2/sqrt(d) * (1 - 1e-6)`` over the
    target's bounding box inflated by ``ball_radius`` per side, so the
    kept-node count is at most ``(span / pitch + 2)^d`` per axis with
    span <= diameter + 2 * ball_radius.
    """
    pitch = ball_radius * (2.0 / np.sqrt(d)) * (1.0 - 1e-6)
    per_axis = int(np.floor((diameter + 2.0 * ball_radius) / pitch)) + 2
    return per_axis**d


def cover_compact_by_balls(
    target,
    ball_radius: float,
    seed: int | np.random.Generator = 0,
    *,
    probe_count: int = 1000,
    max_nodes: int = 5_000_000,
) -> list[Ball]:
    """Cover a bounded region with closed balls of radius ``ball_radius``.

    Axis-aligned grid construction: nodes at pitch
    ``ball_radius * 2/sqrt(d) * (1 - 1e-6)`` over the inflated bounding box
    are kept whenever they lie within ``ball_radius`` of the target, which
    guarantees every target point is within ``ball_radius`` of a kept node.
    Centers need not lie inside the target.  The construction is probe
    verified before returning (seeded; raises ``CoverageError`` on failure,
    which would indicate a bug rather than bad luck).
    """
    if ball_radius <= 0:
        raise ValueError("ball_radius must be positive")
    lo, hi = target.bounding_box()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("target has an unbounded representation")
    d = lo.size
    pitch = ball_radius * (2.0 / np.sqrt(d)) * (1.0 - 1e-6)

    axes = [np.arange(lo[i] - ball_radius, hi[i] + ball_radius + pitch, pitch) for i in range(d)]
    total = int(np.prod([len(a) for a in axes]))
    if total > max_nodes:
        raise ValueError(
            f"grid cover would need {total} nodes (> {max_nodes}); "
            "reduce the target diameter, dimension, or increase ball_radius"
        )
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    keep = target.distance_to_many(nodes) <= ball_radius
    centers = nodes[keep]
    balls = [Ball(c, ball_radius) for c in centers]

    failures = verify_cover(target, balls, probe_count, seed)
    if failures:
        raise CoverageError(f"{failures}/{probe_count} cover probes uncovered")
    return balls


def verify_cover(target, balls: list[Ball], probe_count: int, seed: int | np.random.Generator) -> int:
    """Count probe points of ``target`` not within any ball's radius.

    Probes are uniform samples for positive-measure targets and the point
    set itself for finite-point targets.
    """
    from .regions import FinitePoints, ZeroMeasureError, uniform_sample

    if isinstance(target, FinitePoints):
        probes = target.points
    else:
        try:
            probes = np.asarray(uniform_sample(target, probe_count, seed))
        except ZeroMeasureError:
            # degenerate balls: probe the defining centers exactly
            if isinstance(target, Ball):
                probes = target.center[None, :]
            else:
                probes = np.asarray([b.center for b in target.balls])
    if not balls:
        return len(probes)
    centers = np.asarray([b.center for b in balls])
    radii = np.asarray([b.radius for b in balls])
    failures = 0
    for block in np.array_split(probes, max(1, len(probes) // 2048)):
        dist = np.linalg.norm(block[:, None, :] - centers[None, :, :], axis=-1)
        failures += int(np.count_nonzero(np.min(dist - radii[None, :], axis=1) > 0))
    return failures
