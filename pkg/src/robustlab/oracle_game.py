"""Two-anchor distinguishing game for sampling-oracle query lower bounds.

The construction places two antipodal anchors whose perturbation regions
come in two nearly indistinguishable variants: a plain ball family U, and a
family V that additionally owns a small off-center ball near the origin.
Exactly one hypothesis of a two-halfspace class is optimal under each
variant, and the only evidence separating them is oracle mass in the thin
set ``V^gamma \\ U^gamma``.  The query game measures how many uniform
oracle draws a Bayes-optimal learner needs before its excess error decays,
which scales like the inverse of that relative mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifiers import (
    DiscreteDistribution,
    FiniteClass,
    LabeledExample,
    LinearClassifier,
    robust_loss_distribution,
)
from .geometry import Ball
from .regions import RegionFamily, UnionOfBalls, uniform_sample
from .seeding import rng_for

__all__ = [
    "OracleGameInstance",
    "build_oracle_game",
    "loss_table",
    "MeasureAudit",
    "measure_bound_audit",
    "QuerySweepResult",
    "run_query_game",
    "detection_threshold",
    "wilson_interval",
]


@dataclass(frozen=True)
class OracleGameInstance:
    """Frozen geometry of the two-anchor distinguishing construction."""

    D: float
    gamma: float
    d: int
    D0: float
    v: np.ndarray
    v_prime: np.ndarray
    u_family: RegionFamily
    v_family: RegionFamily
    h1: LinearClassifier
    h2: LinearClassifier
    cls: FiniteClass
    dist: DiscreteDistribution


def build_oracle_game(D: float, gamma: float, d: int) -> OracleGameInstance:
    """Build and machine-check the two-anchor instance.

    Requires ``D > 10 * gamma``.  Derived quantities: core scale
    ``D0 = D - 9*gamma``, anchors ``+-(D0/2 + 4*gamma) e1``, side-ball
    anchor offset ``+-2*gamma e1``.  The U regions are radius-``D0/2``
    balls; the V regions add a radius-``5*gamma/2`` ball at the offset.
    Disjointness of the U pair and overlap of the V pair are verified by
    center-distance arithmetic on construction.
    """
    if not D > 10 * gamma > 0:
        raise ValueError("need D > 10 * gamma > 0")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    D0 = D - 9.0 * gamma
    e1 = np.zeros(d)
    e1[0] = 1.0
    v = (D0 / 2.0 + 4.0 * gamma) * e1
    v_prime = 2.0 * gamma * e1

    u_regions = {}
    v_regions = {}
    for sign in (1.0, -1.0):
        anchor = sign * v
        core = Ball(anchor, D0 / 2.0)
        side = Ball(sign * v_prime, 5.0 * gamma / 2.0)
        u_regions[tuple(anchor)] = core
        v_regions[tuple(anchor)] = UnionOfBalls((core, side))

    anchors = [v, -v]
    u_family = RegionFamily([(a, u_regions[tuple(a)]) for a in anchors])
    v_family = RegionFamily([(a, v_regions[tuple(a)]) for a in anchors])

    # U_v and U_{-v} must be disjoint, even after gamma expansion
    gap = float(np.linalg.norm(v - (-v)))
    assert gap > 2 * (D0 / 2.0 + gamma), "U regions unexpectedly intersect"
    # the V side balls must intersect each other
    side_gap = float(np.linalg.norm(v_prime - (-v_prime)))
    assert side_gap <= 5.0 * gamma, "V regions unexpectedly disjoint"
    # the side ball never reaches the opposite expanded core
    cross = float(np.linalg.norm(v_prime - (-v))) - (7.0 * gamma / 2.0 + D0 / 2.0 + gamma)
    assert cross > 0, "side ball leaks into the opposite core"

    h1 = LinearClassifier(e1, 0.0)
    h2 = LinearClassifier(e1, -(D0 + 4.0 * gamma))
    dist = DiscreteDistribution(
        [
            (LabeledExample(v, 1), 0.5),
            (LabeledExample(-v, -1), 0.5),
        ]
    )
    return OracleGameInstance(
        D, gamma, d, D0, v, v_prime, u_family, v_family, h1, h2, FiniteClass((h1, h2)), dist
    )


def loss_table(inst: OracleGameInstance) -> dict[tuple[str, str], float]:
    """Exact robust losses of both hypotheses under both families."""
    out = {}
    for fam_name, fam in (("U", inst.u_family), ("V", inst.v_family)):
        for h_name, h in (("h1", inst.h1), ("h2", inst.h2)):
            out[(fam_name, h_name)] = robust_loss_distribution(h, fam, inst.dist)
    return out


def _interval_union_length(intervals: list[tuple[float, float]]) -> float:
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return sum(hi - lo for lo, hi in merged)


@dataclass(frozen=True)
class MeasureAudit:
    """Relative mass of the distinguishing set under one anchor's V-region.

    ``nominal_bound`` is the target constant ``(3.5*gamma / D0)^d`` the
    audit is asked to verify; ``safe_bound`` is ``(7*gamma / D0)^d``, which
    follows mechanically from bounding the side-ball volume against the
    core ball's and holds for every valid parameter choice.
    """

    p_hat: float
    sigma: float
    nominal_bound: float
    safe_bound: float
    exact: float | None
    n_samples: int


def measure_bound_audit(inst: OracleGameInstance, n_mc: int, seed: int) -> MeasureAudit:
    """Monte-Carlo estimate of ``P(V^gamma \\ U^gamma)`` for the +v anchor.

    Samples uniformly from the anchor's gamma-expanded V region and counts
    the fraction escaping both anchors' gamma-expanded U regions.  In one
    dimension the exact value from interval lengths is attached as an
    independent oracle.
    """
    if inst.d > 4:
        raise ValueError("Monte-Carlo volume audit limited to d <= 4")
    gamma, D0 = inst.gamma, inst.D0
    v_gam = inst.v_family.expanded(gamma)
    u_gam = inst.u_family.expanded(gamma)
    region = v_gam.region_for(inst.v)
    core_plus = u_gam.region_for(inst.v)
    core_minus = u_gam.region_for(-inst.v)

    pts = uniform_sample(region, n_mc, rng_for(seed, "measure"))
    outside = ~(core_plus.contains_many(pts) | core_minus.contains_many(pts))
    p_hat = float(np.mean(outside))
    sigma = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n_mc)

    exact = None
    if inst.d == 1:
        R = D0 / 2.0 + gamma
        v1, vp1 = float(inst.v[0]), float(inst.v_prime[0])
        union = [(v1 - R, v1 + R), (vp1 - 3.5 * gamma, vp1 + 3.5 * gamma)]
        len_v = _interval_union_length(union)
        len_u = 2 * R
        exact = (len_v - len_u) / len_v

    return MeasureAudit(
        p_hat=p_hat,
        sigma=sigma,
        nominal_bound=(3.5 * gamma / D0) ** inst.d,
        safe_bound=(7.0 * gamma / D0) ** inst.d,
        exact=exact,
        n_samples=n_mc,
    )


@dataclass(frozen=True)
class QuerySweepResult:
    """Excess-error curve of the Bayes rule across oracle query budgets."""

    D: float
    gamma: float
    d: int
    budgets: np.ndarray
    excess_error: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    trials: int
    anchor_queries: tuple[int, int]
    anchor_detections: tuple[int, int]
    seed: int

    def to_rows(self) -> list[dict]:
        return [
            {
                "budget": int(b),
                "excess_error": float(e),
                "ci_lo": float(lo),
                "ci_hi": float(hi),
                "D": self.D,
                "gamma": self.gamma,
                "d": self.d,
                "seed": self.seed,
            }
            for b, e, lo, hi in zip(self.budgets, self.excess_error, self.ci_lo, self.ci_hi)
        ]


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def run_query_game(
    inst: OracleGameInstance,
    budgets: list[int],
    trials: int,
    seed: int,
) -> QuerySweepResult:
    """Play the distinguishing game and sweep oracle query budgets.

    Per trial the adversary hides U or V with probability 1/2; the learner
    queries the sampling oracle on the two anchors alternately (draws are
    uniform on the hidden family's gamma-expanded region) and outputs the
    second hypothesis iff some draw escapes the expanded U regions, which
    is the posterior-optimal rule.  Excess error per trial is the achieved
    robust loss minus the hidden family's optimum.

    When U is hidden every draw lies inside ``U^gamma`` by construction,
    so detection is impossible and those trials contribute zero excess at
    every budget; only V-trials are materialized.  All budgets share one
    trial stream: the recorded statistic per trial is the index of its
    first distinguishing draw.
    """
    budgets_arr = np.asarray(sorted(int(b) for b in budgets))
    if np.any(budgets_arr < 0):
        raise ValueError("budgets must be nonnegative")
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = rng_for(seed, "query-game")
    max_budget = int(budgets_arr.max(initial=0))

    z_is_v = rng.random(trials) < 0.5
    n_v = int(z_is_v.sum())

    gamma = inst.gamma
    region = inst.v_family.expanded(gamma).region_for(inst.v)
    core_plus = inst.u_family.expanded(gamma).region_for(inst.v)
    core_minus = inst.u_family.expanded(gamma).region_for(-inst.v)

    # first distinguishing draw per V-trial (1-based), inf if never within budget
    detect = np.full(n_v, np.inf)
    anchor_queries = [0, 0]
    anchor_detects = [0, 0]
    alive = np.arange(n_v)
    offset = 0
    chunk = 64
    while alive.size and offset < max_budget:
        k = min(chunk, max_budget - offset)
        pts = uniform_sample(region, alive.size * k, rng).reshape(alive.size, k, inst.d)
        parity = (np.arange(offset, offset + k) % 2).astype(bool)
        pts[:, parity, 0] *= -1.0  # mirrored draw = uniform draw at the -v anchor
        flat = pts.reshape(-1, inst.d)
        outside = ~(core_plus.contains_many(flat) | core_minus.contains_many(flat))
        outside = outside.reshape(alive.size, k)
        any_hit = outside.any(axis=1)
        first = np.where(any_hit, outside.argmax(axis=1), k)
        # probes actually spent this chunk: up to and including the first hit
        spent = np.where(any_hit, first + 1, k)
        for s in spent:
            lo, hi = offset, offset + int(s)
            odd = hi // 2 - lo // 2
            anchor_queries[1] += odd
            anchor_queries[0] += int(s) - odd
        for idx in np.flatnonzero(any_hit):
            global_idx = offset + int(first[idx])
            anchor_detects[global_idx % 2] += 1
            detect[alive[idx]] = global_idx + 1
        alive = alive[~any_hit]
        offset += k
        chunk = min(2 * chunk, 4096)

    excess = np.empty(len(budgets_arr))
    ci_lo = np.empty(len(budgets_arr))
    ci_hi = np.empty(len(budgets_arr))
    for i, b in enumerate(budgets_arr):
        undetected = int(np.count_nonzero(detect > b))
        lo, hi = wilson_interval(undetected, trials)
        excess[i] = 0.5 * undetected / trials
        ci_lo[i], ci_hi[i] = 0.5 * lo, 0.5 * hi
    return QuerySweepResult(
        inst.D,
        inst.gamma,
        inst.d,
        budgets_arr,
        excess,
        ci_lo,
        ci_hi,
        trials,
        (anchor_queries[0], anchor_queries[1]),
        (anchor_detects[0], anchor_detects[1]),
        seed,
    )


def detection_threshold(result: QuerySweepResult, level: float = 0.125) -> float | None:
    """Interpolated budget at which the excess-error curve crosses ``level``.

    Log-linear interpolation between the bracketing budget grid points;
    None when the curve never drops below the level.
    """
    ex = result.excess_error
    budgets = result.budgets.astype(float)
    below = np.flatnonzero(ex < level)
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(budgets[0])
    x0, x1 = math.log(max(budgets[i - 1], 1e-12)), math.log(budgets[i])
    y0, y1 = ex[i - 1], ex[i]
    t = (y0 - level) / (y0 - y1)
    return float(math.exp(x0 + t * (x1 - x0)))
