"""How many sampling-oracle draws does tolerant learning need?

Two perturbation families agree except for a small side ball near the
origin; one hypothesis is optimal under each.  A learner that may only
draw uniform points from the (expanded) regions must spot side-ball mass
to tell the families apart, and the chance of that per draw is the
relative volume of a radius-3.5*gamma ball against a radius-(D0/2 + gamma)
core: geometrically small, and exponentially so in the dimension.
"""

import numpy as np

from robustlab import build_oracle_game, loss_table, measure_bound_audit, run_query_game
from robustlab.oracle_game import detection_threshold

inst = build_oracle_game(D=20.0, gamma=1.0, d=2)
print("anchors at +-", inst.v, " side balls near +-", inst.v_prime)

print()
print("== who is optimal under which family ==")
for (fam, h), loss in sorted(loss_table(inst).items()):
    print(f"  loss({fam}, {h}) = {loss}")

print()
print("== distinguishing mass per oracle draw ==")
for d in (1, 2, 3):
    game = build_oracle_game(D=20.0, gamma=1.0, d=d)
    audit = measure_bound_audit(game, 400_000, seed=d)
    exact = f" exact={audit.exact:.5f}" if audit.exact is not None else ""
    print(
        f"  d={d}: p_hat={audit.p_hat:.5f}{exact}  "
        f"nominal=(3.5g/D0)^d={audit.nominal_bound:.5f}  safe=(7g/D0)^d={audit.safe_bound:.5f}"
    )
print("  note: the measured mass sits between the two constants; only the")
print("  safe one upper-bounds it across the whole parameter range.")

print()
print("== budget sweep (2000 trials per budget) ==")
budgets = [0, 1, 2, 4, 8, 16, 32, 64]
result = run_query_game(inst, budgets, trials=2000, seed=11)
for k, e, lo, hi in zip(result.budgets, result.excess_error, result.ci_lo, result.ci_hi):
    bar = "#" * int(120 * e)
    print(f"  budget {k:3d}: excess {e:.4f}  [{lo:.4f}, {hi:.4f}] {bar}")
print(f"  excess first drops below 1/8 around budget {detection_threshold(result):.1f}")

print()
print("== the threshold scales like (D0/gamma)^d ==")
for d in (1, 2):
    ks = []
    for D in (20.0, 50.0, 110.0):
        game = build_oracle_game(D=D, gamma=1.0, d=d)
        pilot = measure_bound_audit(game, 100_000, seed=17)
        kmax = int(3 * np.log(2) / pilot.p_hat) + 4
        grid = sorted(set([0] + list(np.geomspace(1, kmax, 10).astype(int))))
        res = run_query_game(game, grid, trials=800, seed=23)
        ks.append(detection_threshold(res))
    slope = np.polyfit(np.log([11.0, 41.0, 101.0]), np.log(ks), 1)[0]
    print(f"  d={d}: thresholds {[round(k, 1) for k in ks]}  log-log slope {slope:.2f}")
