"""
Limit moduli
============

"""

from sphrect.families import (
    limit_modulus_extrapolate, limit_modulus_sc, mirror_family, trace_family,
)

# degenerate Schwarz-Christoffel problem: one real equation per limit structure
for q in [(0, 1, 0, 1), (1, 2, 1, 2), (1, 3, 1, 3), (2, 3, 2, 3)]:
    print(q, [round(r.K_crit, 9) for r in limit_modulus_sc(q)])

# the same value from the traced family, extrapolated to theta = 1
(curve,) = trace_family((0, 1, 0, 1))
r = limit_modulus_extrapolate(curve)
print("extrapolated", r.K_crit, "+-", r.error)

# the mirror family lives at K > 1 / K_crit
m = mirror_family(curve)
print("mirror", m.endpoint.value, "from K =", m.points[0].K)
print([round(1 / r.K_crit, 6) for r in limit_modulus_sc((1, 2, 1, 2))])
