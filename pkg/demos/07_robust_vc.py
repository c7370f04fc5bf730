"""Robust loss classes: how much does a size-k region cost in dimension?

Replacing the point loss 1[h(x) != y] with the robust loss over a k-point
region can only multiply the number of achievable loss patterns, and the
growth function of the base class on the inflated point set caps it.  The
searches here are exhaustive, so every dimension comes with a certificate
or an explicit budget disclaimer.
"""

import numpy as np

from robustlab import FiniteClass, LabeledExample, LinearClassifier, robust_vc_search
from robustlab.loss_vc import (
    class_vc_on_points,
    loss_patterns,
    sauer_bound,
    vball_shatter_check,
    zero_one_vc_search,
)
from robustlab.regions import FinitePoints, RegionFamily
from robustlab.classifiers import linear_net_2d

thresholds = FiniteClass(
    tuple(LinearClassifier(np.array([1.0]), -t) for t in np.linspace(-1, 7, 25))
)
xs = np.linspace(0.0, 6.0, 7)
examples = [LabeledExample(np.array([x]), 1 if i % 2 else -1) for i, x in enumerate(xs)]

print("== singleton regions reduce to the plain loss class ==")
singleton = RegionFamily([(e.x, FinitePoints([e.x])) for e in examples])
robust = robust_vc_search(thresholds, singleton, examples, max_m=5)
plain = zero_one_vc_search(thresholds, examples, max_m=5)
print(f"robust route: dimension ({robust.dimension_lower}, {robust.dimension_upper})")
print(f"plain route:  dimension ({plain.dimension_lower}, {plain.dimension_upper})")

print()
print("== three-point regions barely move the dimension ==")
fam3 = RegionFamily(
    [(e.x, FinitePoints(np.array([e.x[0] - 0.2, e.x[0], e.x[0] + 0.2])[:, None])) for e in examples]
)
est = robust_vc_search(thresholds, fam3, examples, max_m=5)
pts = np.unique(np.vstack([fam3.region_for(e.x).points for e in examples]), axis=0)
base_vc = class_vc_on_points(thresholds, pts)
print(f"robust dimension ({est.dimension_lower}, {est.dimension_upper}); base VC on the "
      f"{len(pts)} inflated points is {base_vc}")

print()
print("== the growth-function cap in action: 2^m vs sauer(v, k*m) ==")
from itertools import combinations

worst = 0
for subset in combinations(examples, 4):
    worst = max(worst, len(loss_patterns(thresholds, fam3, subset)))
print(f"max patterns on any 4 examples: {worst}; shattering needs 16;")
print(f"the cap allows at most sauer({base_vc}, {3 * 4}) = {sauer_bound(base_vc, 12)}")

print()
print("== robust shattering with fixed-radius balls ==")
far = [LabeledExample(np.array([-5.0, 0.0]), 1), LabeledExample(np.array([5.0, 0.0]), -1)]
near = [LabeledExample(np.array([0.0, 0.0]), 1), LabeledExample(np.array([1.5, 0.0]), -1)]
net = FiniteClass(tuple(linear_net_2d(6.0, 48, 33)))
print("two anchors 10 apart, radius 1:",
      "shattered" if vball_shatter_check(net, 1.0, far).shattered else "not shattered")
report = vball_shatter_check(net, 1.0, near)
print("two anchors 1.5 apart (balls overlap), radius 1:",
      "shattered" if report.shattered else "not shattered",
      "- the all-correct pattern is impossible:", (0, 0) not in report.witness_map)
