"""
Counting nets and drawing them
==============================

"""

from sphrect import AngleQuadruple, count, enumerate_nets, exists
from sphrect.netcalc import brute_force_census, reduce_to_terminal, symmetric_count
from sphrect.netgraph import double, limit_structure, realize, validate

# angles are given by their integer parts: alpha_j = A_j + 1/2
q = AngleQuadruple(2, 3, 2, 3)
print(q, "delta =", q.two_delta / 2, "exists:", exists(q))
print(count(q))

# every net is a solution (mu, nu, kappa, i, k, l, m)
for p in enumerate_nets(q):
    print(p.as_tuple(), "->", reduce_to_terminal(p).as_tuple())

# symmetric quadruples (A, B, A, B) follow a closed law
for A, B in [(0, 1), (1, 2), (1, 3), (2, 5)]:
    print((A, B), symmetric_count(A, B))

# one sweep of the parameter box counts nets for all small quadruples at once
census = brute_force_census(4)
print(sum(n > 0 for n in census.values()), "of", len(census), "quadruples with A_j <= 4 carry a net")

# a net as a cell complex
g = realize(enumerate_nets((0, 1, 0, 1))[0])
print(len(g.faces), "faces, problems:", validate(g))
D = double(g)
print("doubled Euler characteristic", D.euler())
print(limit_structure(g).key())

# DOT output for graphviz
print(g.to_dot())
