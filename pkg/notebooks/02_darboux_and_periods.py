"""
Darboux polynomials and periods
===============================

"""

import numpy as np

from sphrect.darboux import solve_darboux
from sphrect.periods import developing_integral, periods, unitarity_gap

# the Heun equation at (a, lambda) has a polynomial P of degree sum A_j
q, a, lam = (1, 2, 1, 2), 1.5, -2.0
d = solve_darboux(q, a, lam)
print("degree", d.degree, "type", d.rect_type, "k^2", d.k2)
print("roots", np.round(d.roots, 6))
print("residues", np.round(d.residues, 12))

# near a = 1 the roots crowd and the extended path takes over
print(solve_darboux((2, 3, 2, 3), 1.1, -20.0).precision)

# periods over (0, 1) and (1, a); real roots are passed by small upper arcs
dev = developing_integral((0, 1, 0, 1), 1.1, -0.3)
pp = periods(dev)
print("Seg01", pp.pi_01, "Seg1a", pp.pi_1a)
for r, c in pp.pole_detour_log:
    print("detour at", r.real, "contributes", c)

# the unitarity gap changes sign across a solution
for lam in np.linspace(-0.8, -0.4, 5):
    print(round(lam, 2), unitarity_gap((0, 1, 0, 1), 1.1, lam))
