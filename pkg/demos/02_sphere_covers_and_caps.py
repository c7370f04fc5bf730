"""Greedy sphere packings and tangent-halfspace caps.

The lower-bound constructions need two geometric facts made concrete:
a maximal mesh-separated point set on a sphere (certified by probing),
and the exact cap that a tangent bounded halfspace carves out of a
slightly larger sphere.
"""

import numpy as np

from robustlab import greedy_sphere_cover, tangent_hypothesis
from robustlab.shatter_game import cap_mismatch_fraction, positive_cap_radius

print("== greedy covers of the unit circle ==")
for mesh in (1.9, 1.0, 0.5, 0.25):
    cover = greedy_sphere_cover(2, 1.0, mesh, seed=0)
    print(
        f"mesh {mesh:4.2f}: {len(cover):3d} centers, "
        f"maximality probe failures {cover.probe_failures}/{cover.probe_count}"
    )

print()
print("== a sphere in 3-D ==")
cover = greedy_sphere_cover(3, 1.0, 0.8, seed=1)
print(f"mesh 0.8 on the unit 2-sphere: {len(cover)} centers, certified={cover.certified}")

print()
print("== tangent halfspace and its cap ==")
W, beta = 1.0, 0.125
x = np.array([1.0, 0.0])
h = tangent_hypothesis(x, W)
print("weights", h.w, "bias", h.b)
print("predicts +1 at the tangency point:", h.predict(x) == 1)
print("predicts -1 at the origin:", h.predict((0.0, 0.0)) == -1)

cap = positive_cap_radius(W, beta)
print(f"on the radius-{W * (1 + beta)} circle the positive set is a cap of chordal radius {cap:.6f}")
frac = cap_mismatch_fraction(W, beta, x, 100_000, seed=2)
print(f"disagreement between the sign rule and the cap over 1e5 samples: {frac:.1e}")
