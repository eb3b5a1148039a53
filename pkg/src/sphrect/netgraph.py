"""Explicit labeled triangulations (nets) realizing NetParams.

The three circles C, C', C'' cut the sphere into eight triangles, like an
octahedron.  C is the equator carrying the points P, R, M, N in eastward
order; C' is the meridian through P and M, C'' the meridian through R and N;
Zp and Zm are the poles, where C' and C'' cross.  A net is a triangulated
disk together with a labeling of its vertices by these six points such
that every face maps onto one of the eight triangles preserving orientation.

The corners a0, a1, a2, a3 are listed counterclockwise along the boundary;
the sides are L1 = a0a1, L2 = a1a2, L3 = a2a3, L4 = a3a0.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field

from .netcalc import NetParams

__all__ = [
    "POINTS", "EQUATOR", "NetGraph", "DoubledTriangulation", "realize",
    "validate", "double", "equivalent", "canonical_code", "edge_circle",
    "face_type", "octahedron_faces", "symmetric_image_code", "LimitStructure",
    "limit_structure",
]

EQUATOR = ("P", "R", "M", "N")
POINTS = EQUATOR + ("Zp", "Zm")

_C = set(EQUATOR)
_CP = {"P", "M", "Zp", "Zm"}
_CPP = {"R", "N", "Zp", "Zm"}


def edge_circle(x: str, y: str) -> str | None:
    """Name of the circle containing the arc between two adjacent points."""
    pair = {x, y}
    if len(pair) != 2:
        return None
    if pair <= _C:
        return "C"
    if pair <= _CP:
        return "Cp"
    if pair <= _CPP:
        return "Cpp"
    return None


def octahedron_faces() -> list[tuple[str, str, str]]:
    """The eight triangles, each as a counterclockwise label triple."""
    out = []
    for j, x in enumerate(EQUATOR):
        y = EQUATOR[(j + 1) % 4]
        out.append((x, y, "Zp"))
        out.append((y, x, "Zm"))
    return out


def _rotations(t):
    return {t, (t[1], t[2], t[0]), (t[2], t[0], t[1])}


_FACE_SET = set().union(*(_rotations(f) for f in octahedron_faces()))
# third vertex of the triangle having the directed edge (x, y) on its boundary
_THIRD = {}
for _f in octahedron_faces():
    for _a, _b, _c in _rotations(_f):
        _THIRD[(_a, _b)] = _c

# counterclockwise neighbours of each point, seen from outside the sphere
_NEIGHBOURS = {
    "Zp": ("P", "R", "M", "N"),
    "Zm": ("P", "N", "M", "R"),
}
for _j, _x in enumerate(EQUATOR):
    _NEIGHBOURS[_x] = (EQUATOR[(_j + 1) % 4], "Zp", EQUATOR[(_j - 1) % 4], "Zm")


def face_type(labels) -> str:
    """'one_minus_theta' for triangles over the arcs PR and MN, else 'theta'."""
    eq = frozenset(x for x in labels if x in _C)
    return "one_minus_theta" if eq in ({"P", "R"}, {"M", "N"}) else "theta"


@dataclass
class NetGraph:
    """A triangulated disk with labeled vertices.

    Edges carry their own ids because two vertices may be joined by more
    than one edge (several short arcs between a1 and a3).  Face n has
    vertices faces[n] = (v0, v1, v2) in counterclockwise order and edges
    face_edges[n] = (e0, e1, e2), where e_j joins v_j to v_{j+1}.
    """

    labels: dict[int, str]
    faces: list[tuple[int, int, int]]
    face_edges: list[tuple[int, int, int]]
    corners: tuple[int, int, int, int]
    sides: dict[str, list[int]] = field(default_factory=dict)
    params: NetParams | None = None

    # -- derived structure ---------------------------------------------------
    def edge_ends(self) -> dict[int, tuple[int, int]]:
        ends = {}
        for f, es in zip(self.faces, self.face_edges):
            for j in range(3):
                ends.setdefault(es[j], (f[j], f[(j + 1) % 3]))
        return ends

    def edge_faces(self) -> dict[int, list[int]]:
        out = defaultdict(list)
        for n, es in enumerate(self.face_edges):
            for e in es:
                out[e].append(n)
        return out

    def boundary_edges(self) -> set[int]:
        return {e for e, fs in self.edge_faces().items() if len(fs) == 1}

    def boundary_darts(self) -> dict[int, tuple[int, int]]:
        """Boundary edge id -> (tail, head), oriented with the disk on the left."""
        bnd = self.boundary_edges()
        out = {}
        for f, es in zip(self.faces, self.face_edges):
            for j in range(3):
                if es[j] in bnd:
                    out[es[j]] = (f[j], f[(j + 1) % 3])
        return out

    def boundary_vertices(self) -> set[int]:
        return {v for d in self.boundary_darts().values() for v in d}

    def degree(self) -> Counter:
        deg = Counter()
        for u, v in self.edge_ends().values():
            deg[u] += 1
            deg[v] += 1
        return deg

    def faces_at(self) -> Counter:
        c = Counter()
        for f in self.faces:
            c.update(f)
        return c

    def face_types(self) -> list[str]:
        return [face_type([self.labels[v] for v in f]) for f in self.faces]

    def edge_label(self, u: int, v: int) -> str | None:
        return edge_circle(self.labels[u], self.labels[v])

    def corner_images(self) -> tuple[str, ...]:
        return tuple(self.labels[c] for c in self.corners)

    def roles(self) -> dict[int, str]:
        bnd = self.boundary_vertices()
        role = {v: ("boundary" if v in bnd else "interior") for v in self.labels}
        for j, c in enumerate(self.corners):
            role[c] = f"a{j}"
        return role

    # -- serialization -------------------------------------------------------
    def to_json(self) -> dict:
        role = self.roles()
        ends = self.edge_ends()
        return {
            "params": self.params.to_json() if self.params else None,
            "corners": list(self.corners),
            "vertices": [{"id": v, "label": self.labels[v], "role": role[v]} for v in sorted(self.labels)],
            "edges": [
                {"id": e, "ends": list(ends[e]), "circle": self.edge_label(*ends[e])}
                for e in sorted(ends)
            ],
            "faces": [
                {"id": n, "vertices": list(f), "edges": list(es), "type": t}
                for n, (f, es, t) in enumerate(zip(self.faces, self.face_edges, self.face_types()))
            ],
            "sides": {k: list(v) for k, v in self.sides.items()},
        }

    @classmethod
    def from_json(cls, d: dict) -> "NetGraph":
        labels = {int(x["id"]): x["label"] for x in d["vertices"]}
        faces = [tuple(int(v) for v in f["vertices"]) for f in d["faces"]]
        face_edges = [tuple(int(e) for e in f["edges"]) for f in d["faces"]]
        p = NetParams.from_json(d["params"]) if d.get("params") else None
        sides = {k: [int(v) for v in s] for k, s in d.get("sides", {}).items()}
        return cls(labels, faces, face_edges, tuple(int(c) for c in d["corners"]), sides, p)

    def to_dot(self) -> str:
        role = self.roles()
        lines = ["graph net {"]
        for v in sorted(self.labels):
            tag = " " + role[v] if role[v].startswith("a") else ""
            lines.append(f'  {v} [label="{self.labels[v]}{tag}"];')
        for e, (u, v) in sorted(self.edge_ends().items()):
            lines.append(f'  {u} -- {v} [label="{self.edge_label(u, v)}"];')
        lines.append("}")
        return "\n".join(lines)


class _Builder:
    def __init__(self):
        self.labels: dict[int, str] = {}
        self.faces: list[tuple[int, int, int]] = []
        self.face_edges: list[tuple[int, int, int]] = []
        self.n_edges = 0

    def vertex(self, label: str) -> int:
        v = len(self.labels)
        self.labels[v] = label
        return v

    def edge(self) -> int:
        self.n_edges += 1
        return self.n_edges - 1

    def face(self, vs, es):
        t = tuple(self.labels[v] for v in vs)
        assert t in _FACE_SET, f"not an oriented triangle of the partition: {t}"
        self.faces.append(tuple(vs))
        self.face_edges.append(tuple(es))

    def fan(self, center, first, n, last=None, first_edge=None, last_edge=None):
        """n faces around `center`, turning counterclockwise from `first`.

        Returns (rim vertices u_0..u_n, rim edges, spoke edges); the fan's
        boundary runs center, u_0, ..., u_n, center.
        """
        ring = _NEIGHBOURS[self.labels[center]]
        j = ring.index(self.labels[first])
        rim = [first]
        for s in range(1, n + 1):
            lab = ring[(j + s) % 4]
            if s == n and last is not None:
                assert self.labels[last] == lab, (self.labels[last], lab)
                rim.append(last)
            else:
                rim.append(self.vertex(lab))
        spokes = [self.edge() if s not in (0, n) else None for s in range(n + 1)]
        spokes[0] = first_edge if first_edge is not None else self.edge()
        spokes[n] = last_edge if last_edge is not None else self.edge()
        rim_edges = [self.edge() for _ in range(n)]
        for s in range(n):
            # face (center, u_s, u_{s+1}) has edges spoke_s, rim_s, spoke_{s+1}
            self.face((center, rim[s], rim[s + 1]), (spokes[s], rim_edges[s], spokes[s + 1]))
        return rim, rim_edges, spokes

    def wheel(self, side):
        """Glue a hemisphere (four faces round one vertex) onto a boundary path.

        `side` is (vertices p_0..p_k, edges) traversed with the disk on its
        left.  Returns the new path from p_0 to p_k.
        """
        verts, edges = side
        k = len(verts) - 1
        assert 1 <= k <= 3, verts
        lab = self.labels
        c_lab = _THIRD[(lab[verts[-1]], lab[verts[-2]])]
        for j in range(k):
            assert _THIRD[(lab[verts[j + 1]], lab[verts[j]])] == c_lab, "side does not lie on one circle"
        c = self.vertex(c_lab)
        spokes = [self.edge() for _ in range(k + 1)]
        for j in range(k):
            # face (p_{j+1}, p_j, c): edges p_{j+1}p_j, p_j c, c p_{j+1}
            self.face((verts[j + 1], verts[j], c), (edges[j], spokes[j], spokes[j + 1]))
        rim, rim_edges, _ = self.fan(c, verts[0], 4 - k, last=verts[-1],
                                     first_edge=spokes[0], last_edge=spokes[-1])
        return rim, rim_edges


def realize(p: NetParams) -> NetGraph:
    """Build the net encoded by p: two primitive triangles and four digons."""
    if not isinstance(p, NetParams):
        p = NetParams(*p)
    mu, nu, kap, i, k, l, m = p.as_tuple()
    b = _Builder()

    # triangle with apex a3 (over R) and base a0..a1 on C'
    a3 = b.vertex("R")
    a0 = b.vertex("M" if mu % 2 == 0 else "P")
    base1, base1_edges, spokes1 = b.fan(a3, a0, 2 * mu + 2)
    a1 = base1[-1]
    assert b.labels[a1] == "P"

    gamma = ([a1, a3], [spokes1[-1]])
    for _ in range(2 * kap):
        gamma = b.wheel(gamma)
    assert len(gamma[0]) == 2, "digon between the triangles must close up"

    # triangle with apex a1 (over P) and base a2..a3 on C''
    a2 = b.vertex("N" if nu % 2 == 0 else "R")
    base3, base3_edges, spokes3 = b.fan(a1, a2, 2 * nu + 2, last=a3, last_edge=gamma[1][0])

    side4 = ([a3, a0], [spokes1[0]])
    for _ in range(m):
        side4 = b.wheel(side4)
    side2 = ([a1, a2], [spokes3[0]])
    for _ in range(k):
        side2 = b.wheel(side2)
    side1 = (base1, base1_edges)
    for _ in range(i):
        side1 = b.wheel(side1)
    side3 = (base3, base3_edges)
    for _ in range(l):
        side3 = b.wheel(side3)

    return NetGraph(
        labels=b.labels,
        faces=b.faces,
        face_edges=b.face_edges,
        corners=(a0, a1, a2, a3),
        sides={"L1": side1[0], "L2": side2[0], "L3": side3[0], "L4": side4[0]},
        params=p,
    )


_SIDE_CIRCLE = {"L1": "Cp", "L2": "C", "L3": "Cpp", "L4": "C"}


def validate(g: NetGraph) -> list[tuple[str, object]]:
    """Structural violations of g; empty when g is a well-formed net."""
    out: list[tuple[str, object]] = []
    lab = g.labels
    for n, f in enumerate(g.faces):
        circles = [edge_circle(lab[f[j]], lab[f[(j + 1) % 3]]) for j in range(3)]
        if None in circles or len(set(circles)) != 3:
            out.append(("face_labels", n))
        elif tuple(lab[v] for v in f) not in _FACE_SET:
            out.append(("face_orientation", n))
    ef = g.edge_faces()
    ends = {}
    for f, es in zip(g.faces, g.face_edges):
        for j in range(3):
            uv = frozenset((f[j], f[(j + 1) % 3]))
            if ends.setdefault(es[j], uv) != uv:
                out.append(("edge_ends", es[j]))
    for e, fs in ef.items():
        if len(fs) > 2:
            out.append(("edge_multiplicity", e))
    deg = g.degree()
    bnd = g.boundary_vertices()
    corners = set(g.corners)
    for v in lab:
        if v in corners:
            continue
        want = 3 if v in bnd else 4
        if deg[v] != want:
            out.append(("boundary_degree" if v in bnd else "interior_degree", v))
    # the boundary must be one cycle through the corners in order
    nxt = {}
    for u, v in g.boundary_darts().values():
        if u in nxt:
            out.append(("boundary_branch", u))
        nxt[u] = v
    cyc = [g.corners[0]]
    while len(cyc) <= len(nxt):
        v = nxt.get(cyc[-1])
        if v is None or v == cyc[0]:
            break
        cyc.append(v)
    if len(cyc) != len(nxt) or set(cyc) != set(nxt):
        out.append(("boundary_not_a_cycle", None))
    else:
        pos = [cyc.index(c) if c in cyc else -1 for c in g.corners]
        if -1 in pos or pos != sorted(pos):
            out.append(("corner_order", pos))
        else:
            ring = cyc + [cyc[0]]
            for j, name in enumerate(("L1", "L2", "L3", "L4")):
                hi = pos[j + 1] if j < 3 else len(cyc)
                path = ring[pos[j]:hi + 1]
                if any(edge_circle(lab[u], lab[v]) != _SIDE_CIRCLE[name] for u, v in zip(path, path[1:])):
                    out.append(("side_label", name))
    V, E, F = len(lab), len(ef), len(g.faces)
    if V - E + F != 1:
        out.append(("euler_disk", V - E + F))
    if g.params is not None:
        q = g.params.angles()
        at = g.faces_at()
        for j, c in enumerate(g.corners):
            if at[c] != 2 * q[j] + 1:
                out.append(("corner_faces", f"a{j}"))
        if F != 2 * q.total:
            out.append(("face_count", F))
        types = Counter(g.face_types())
        if types["theta"] != q.total or types["one_minus_theta"] != q.total:
            out.append(("face_types", dict(types)))
    return out


@dataclass
class DoubledTriangulation:
    labels: dict[int, str]
    faces: list[tuple[int, int, int]]
    face_edges: list[tuple[int, int, int]]
    symmetry_circle: set[int]
    corners: tuple[int, int, int, int]

    def edge_ends(self) -> dict[int, tuple[int, int]]:
        ends = {}
        for f, es in zip(self.faces, self.face_edges):
            for j in range(3):
                ends.setdefault(es[j], (f[j], f[(j + 1) % 3]))
        return ends

    def degree(self) -> Counter:
        deg = Counter()
        for u, v in self.edge_ends().values():
            deg[u] += 1
            deg[v] += 1
        return deg

    def euler(self) -> int:
        return len(self.labels) - len(self.edge_ends()) + len(self.faces)


def double(g: NetGraph) -> DoubledTriangulation:
    """Glue g to its mirror image along the boundary."""
    bad = validate(g)
    if bad:
        raise ValueError(f"invalid net: {bad[:5]}")
    bnd_v = g.boundary_vertices()
    bnd_e = g.boundary_edges()
    voff = max(g.labels) + 1
    eoff = max(e for es in g.face_edges for e in es) + 1
    vm = {v: (v if v in bnd_v else v + voff) for v in g.labels}
    em = {e: (e if e in bnd_e else e + eoff) for es in g.face_edges for e in es}
    labels = dict(g.labels)
    for v in g.labels:
        labels[vm[v]] = g.labels[v]
    faces = list(g.faces)
    face_edges = list(g.face_edges)
    for (a, b, c), (e0, e1, e2) in zip(g.faces, g.face_edges):
        # reversed face (c', b', a') has edges c'b' = e1, b'a' = e0, a'c' = e2
        faces.append((vm[c], vm[b], vm[a]))
        face_edges.append((em[e1], em[e0], em[e2]))
    return DoubledTriangulation(labels, faces, face_edges, bnd_v, g.corners)


_SWAP = {"P": "R", "R": "P", "M": "N", "N": "M", "Zp": "Zm", "Zm": "Zp"}


def canonical_code(g: NetGraph, start: int = 0, relabel: dict | None = None) -> tuple:
    """Orientation- and marking-preserving invariant of g.

    Faces are numbered by breadth-first search from the face on the
    boundary edge leaving corner a_start; vertices get numbers on first
    visit.  Two nets have equal codes iff an orientation-preserving,
    label-preserving map carries one onto the other, a_start to a_start.
    """
    lab = g.labels if relabel is None else {v: relabel[x] for v, x in g.labels.items()}
    c0 = g.corners[start]
    ef = g.edge_faces()
    first = [e for e, (u, _) in g.boundary_darts().items() if u == c0]
    assert len(first) == 1
    num: dict[int, int] = {}
    seen: set[int] = set()
    order = []
    queue = deque([(ef[first[0]][0], first[0])])
    while queue:
        n, e = queue.popleft()
        if n in seen:
            continue
        seen.add(n)
        r = g.face_edges[n].index(e)
        walk = [g.faces[n][(r + s) % 3] for s in range(3)]
        edges = [g.face_edges[n][(r + s) % 3] for s in range(3)]
        for w in walk:
            num.setdefault(w, len(num))
        order.append(tuple((num[w], lab[w]) for w in walk))
        for x in edges:
            for n2 in ef[x]:
                if n2 not in seen:
                    queue.append((n2, x))
    corners = tuple(num.get(c, -1) for c in g.corners)
    corners = corners[start:] + corners[:start]
    return (len(g.faces), len(g.labels), corners, tuple(order))


def symmetric_image_code(g: NetGraph) -> tuple:
    """Code of g read from a2 after the half-turn exchanging C' and C''."""
    return canonical_code(g, start=2, relabel=_SWAP)


def equivalent(g1: NetGraph, g2: NetGraph) -> bool:
    return canonical_code(g1) == canonical_code(g2)


# --- degenerate limit -----------------------------------------------------------

_FAR = {"M", "N", "Zp", "Zm"}


@dataclass(frozen=True)
class LimitStructure:
    """Shape of the net after the short arc between a1 and a3 shrinks to a point.

    Blowing up near that point sends every vertex over M, N, Zp, Zm to
    infinity; vertices joined by arcs among those labels merge.  A merged
    cluster containing a corner turns it into a pole of order t + 1 of the
    derivative of the developing map, t being the limit angle in half-turns.
    Clusters off the corners become double poles: one per boundary cluster
    (on the given side), a conjugate pair per interior cluster.
    """
    exponents: tuple[float, float, float]   # at a0, a1, a2
    corner_angles: tuple[float | None, ...]  # limit angle per corner, None if finite
    boundary_poles: tuple[str, ...]          # side of each boundary pole, sorted
    interior_poles: int

    @property
    def pole_degree(self) -> int:
        return len(self.boundary_poles) + 2 * self.interior_poles

    def key(self) -> tuple:
        return (self.exponents, self.boundary_poles, self.interior_poles)


def limit_structure(g: NetGraph) -> LimitStructure:
    far = [v for v, lab in g.labels.items() if lab in _FAR]
    parent = {v: v for v in far}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in g.edge_ends().values():
        if u in parent and v in parent:
            parent[find(u)] = find(v)
    theta_faces = defaultdict(set)
    for n, (f, kind) in enumerate(zip(g.faces, g.face_types())):
        if kind == "theta":
            for v in f:
                if v in parent:
                    theta_faces[find(v)].add(n)
    side_of = {}
    for name, verts in g.sides.items():
        for v in verts[1:-1]:
            side_of[v] = name
    bnd = g.boundary_vertices()
    corner_of = {c: j for j, c in enumerate(g.corners)}
    clusters = defaultdict(list)
    for v in far:
        clusters[find(v)].append(v)

    angles: list[float | None] = [None] * 4
    poles, interior = [], 0
    for root, members in clusters.items():
        t = len(theta_faces[root]) / 2
        corners = [corner_of[v] for v in members if v in corner_of]
        sides = {side_of[v] for v in members if v in side_of}
        if len(corners) > 1:
            raise ValueError("two corners merge in the limit")
        if corners:
            angles[corners[0]] = t
        elif any(v in bnd for v in members):
            if t != 1 or len(sides) != 1:
                raise ValueError(f"boundary cluster with angle {t} on sides {sorted(sides)}")
            poles.append(sides.pop())
        else:
            if t != 2:
                raise ValueError(f"interior cluster with angle {t}")
            interior += 1
    if angles[1] is not None or angles[3] is not None:
        raise ValueError("a1 or a3 merges with the far cluster")
    q = g.params.angles()
    A = (q.A0, q.A1, q.A2)
    exps = tuple(float(A[j] - 0.5) if angles[j] is None else float(-angles[j] - 1) for j in range(3))
    return LimitStructure(exps, tuple(angles), tuple(sorted(poles)), interior)
