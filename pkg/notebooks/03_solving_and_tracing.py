"""
Unitary roots and one-parameter families
========================================

"""

from sphrect.families import modulus, modulus_agm, monotone_intervals, trace_family
from sphrect.periods import solve_lambda

# roots in lambda at fixed a
for r in solve_lambda((0, 1, 0, 1), 1.1, grid=400):
    print("lambda* =", r.lambda_star, "residual", r.residual)

# conformal modulus of the rectangle, two ways
for a in (1.01, 2.0, 10.0):
    print(a, modulus(a), modulus_agm(a))

# follow the family from K ~ 0 until theta reaches 1
(curve,) = trace_family((0, 1, 0, 1))
for p in curve.points[::4]:
    print(f"a={p.a:.6f} lambda={p.lambda_star:+.6f} K={p.K:.6f} theta={p.theta_est:.6f}")
print("end:", curve.endpoint.value, "K_crit", curve.K_crit)
print("monotone intervals of K:", monotone_intervals(curve))
