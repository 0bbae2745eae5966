"""Knot diagrams: PD/Gauss codes, checkerboard graphs, and spanning tree counts.

A PD code lists each crossing as X[a,b,c,d]: the four incident edge labels
counterclockwise starting from the incoming under-strand.  Edge labels run
1..2c consecutively along the knot.  Face tracing recovers the planar
embedding, whose checkerboard coloring gives the black graph; its spanning
tree count (exact, fraction-free elimination) equals the knot determinant for
alternating diagrams.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .alexander import IntLaurentPoly, normalize


class NonRealizableCode(ValueError):
    pass


class NotAlternating(ValueError):
    pass


class Disconnected(ValueError):
    pass


# ---------------------------------------------------------------------------
# PD codes


@dataclass(frozen=True)
class PDCode:
    """Crossings as (a, b, c, d) quadruples of 1-indexed edge labels."""

    crossings: tuple[tuple[int, int, int, int], ...]

    @property
    def crossing_number(self) -> int:
        return len(self.crossings)

    def to_text(self) -> str:
        inner = ",".join("X[%d,%d,%d,%d]" % q for q in self.crossings)
        return f"PD[{inner}]"

    @staticmethod
    def from_text(text: str) -> "PDCode":
        s = text.strip()
        if not (s.startswith("PD[") and s.endswith("]")):
            raise NonRealizableCode(f"not a PD code: {text[:40]!r}")
        quads = re.findall(r"X\[\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\]", s)
        if not quads:
            raise NonRealizableCode("PD code has no crossings")
        return PDCode(tuple(tuple(int(x) for x in q) for q in quads))

    @staticmethod
    def from_json(obj) -> "PDCode":
        if isinstance(obj, str):
            return PDCode.from_text(obj)
        return PDCode(tuple(tuple(int(x) for x in q) for q in obj))


def _next_label(x: int, n_edges: int) -> int:
    return x % n_edges + 1


class Diagram:
    """Validated knot diagram built from a PD code.

    Precomputes the face structure of the underlying 4-valent planar map and
    the orientation data (which over-strand port is incoming at each crossing).
    """

    def __init__(self, pd: PDCode):
        self.pd = pd
        c = pd.crossing_number
        self.n_edges = 2 * c
        ends: dict[int, list[tuple[int, int]]] = {}
        for w, quad in enumerate(pd.crossings):
            for pos, lab in enumerate(quad):
                if not 1 <= lab <= self.n_edges:
                    raise NonRealizableCode(
                        f"crossing {w}: edge label {lab} out of range 1..{self.n_edges}"
                    )
                ends.setdefault(lab, []).append((w, pos))
        for lab in range(1, self.n_edges + 1):
            if len(ends.get(lab, [])) != 2:
                raise NonRealizableCode(
                    f"edge label {lab} appears {len(ends.get(lab, []))} times, expected 2"
                )
        self.ends = ends
        # over-strand direction: over-in is the over port whose successor label
        # is the other over port
        self.over_in_pos: list[int] = []
        for w, (a, b, ccc, d) in enumerate(pd.crossings):
            if _next_label(a, self.n_edges) != ccc:
                raise NonRealizableCode(f"crossing {w}: under strand {a}->{ccc} not consecutive")
            if _next_label(b, self.n_edges) == d:
                self.over_in_pos.append(1)
            elif _next_label(d, self.n_edges) == b:
                self.over_in_pos.append(3)
            else:
                raise NonRealizableCode(f"crossing {w}: over strand {b},{d} not consecutive")
        self._trace_faces()

    # -- faces and checkerboard colors ---------------------------------

    def _mate(self, dart: tuple[int, int]) -> tuple[int, int]:
        w, pos = dart
        lab = self.pd.crossings[w][pos]
        e1, e2 = self.ends[lab]
        return e2 if (w, pos) == e1 else e1

    def _trace_faces(self) -> None:
        seen: dict[tuple[int, int], int] = {}
        faces: list[list[tuple[int, int]]] = []
        for w in range(self.pd.crossing_number):
            for pos in range(4):
                d = (w, pos)
                if d in seen:
                    continue
                orbit = []
                cur = d
                while cur not in seen:
                    seen[cur] = len(faces)
                    orbit.append(cur)
                    mw, mpos = self._mate(cur)
                    cur = (mw, (mpos + 1) % 4)
                faces.append(orbit)
        c = self.pd.crossing_number
        if len(faces) != c + 2:
            raise NonRealizableCode(
                f"face count {len(faces)} != crossings + 2 = {c + 2}; code is not planar"
            )
        self.faces = faces
        self.face_of_dart = seen
        # 2-color faces; adjacent across every edge
        color = [-1] * len(faces)
        color[0] = 0
        stack = [0]
        adj: dict[int, set[int]] = {i: set() for i in range(len(faces))}
        for lab, (d1, d2) in self.ends.items():
            f1, f2 = self.face_of_dart[d1], self.face_of_dart[d2]
            adj[f1].add(f2)
            adj[f2].add(f1)
            if f1 == f2:
                raise NonRealizableCode(f"edge {lab} bounds the same face twice (nugatory)")
        while stack:
            f = stack.pop()
            for g in adj[f]:
                if color[g] == -1:
                    color[g] = 1 - color[f]
                    stack.append(g)
                elif color[g] == color[f]:
                    raise NonRealizableCode("checkerboard coloring failed")
        self.face_color = color

    # -- queries ---------------------------------------------------------

    def is_alternating(self) -> bool:
        """Alternating iff every edge runs from an over port to an under port."""
        for lab, (d1, d2) in self.ends.items():
            k1 = d1[1] % 2
            k2 = d2[1] % 2
            if k1 == k2:
                return False
        return True

    def crossing_sign(self, w: int) -> int:
        """+1 when the over strand sits at positions (3 -> 1), -1 at (1 -> 3)."""
        return 1 if self.over_in_pos[w] == 3 else -1

    def writhe(self) -> int:
        return sum(self.crossing_sign(w) for w in range(self.pd.crossing_number))


# ---------------------------------------------------------------------------
# Black graph and spanning trees


@dataclass(frozen=True)
class PlanarMultigraph:
    """Checkerboard graph: b vertices, one edge per crossing, w faces."""

    b: int
    edges: tuple[tuple[int, int], ...]
    w: int

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def black_graph(diag: Diagram | PDCode, require_alternating: bool = True) -> PlanarMultigraph:
    """Checkerboard black graph of a diagram.

    Vertices are the faces of one color class (deterministically the smaller
    class, ties to the class of crossing 0's corner 0), edges join the two
    same-colored corners at each crossing.
    """
    if isinstance(diag, PDCode):
        diag = Diagram(diag)
    if require_alternating and not diag.is_alternating():
        raise NotAlternating("diagram is not alternating")
    counts = [diag.face_color.count(0), diag.face_color.count(1)]
    if counts[0] < counts[1]:
        black = 0
    elif counts[1] < counts[0]:
        black = 1
    else:
        corner0 = diag.face_of_dart[(0, 1)]
        black = diag.face_color[corner0]
    ids: dict[int, int] = {}
    for f, col in enumerate(diag.face_color):
        if col == black:
            ids[f] = len(ids)
    edges = []
    for w in range(diag.pd.crossing_number):
        # corner between positions j, j+1 belongs to the face of dart (w, j+1)
        corner_faces = [diag.face_of_dart[(w, (j + 1) % 4)] for j in range(4)]
        pair = [f for f in corner_faces if diag.face_color[f] == black]
        if len(pair) != 2:
            raise NonRealizableCode(f"crossing {w}: checkerboard corners inconsistent")
        edges.append((ids[pair[0]], ids[pair[1]]))
    g = PlanarMultigraph(len(ids), tuple(edges), len(diag.faces) - len(ids))
    assert g.b + g.w == diag.pd.crossing_number + 2
    return g


def spanning_tree_count(g: PlanarMultigraph) -> int:
    """Kirchhoff count: determinant of a reduced Laplacian, exactly (Bareiss)."""
    n = g.b
    if n == 0:
        raise Disconnected("empty graph")
    lap = [[0] * n for _ in range(n)]
    seen = {0}
    for u, v in g.edges:
        lap[u][u] += 1
        lap[v][v] += 1
        lap[u][v] -= 1
        lap[v][u] -= 1
    # connectivity
    stack, reach = [0], {0}
    adj: dict[int, set[int]] = {}
    for u, v in g.edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v not in reach:
                reach.add(v)
                stack.append(v)
    if len(reach) != n:
        raise Disconnected(f"graph has {n - len(reach)} unreachable vertices")
    m = [row[1:] for row in lap[1:]]
    return abs(_bareiss_det(m))


def _bareiss_det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def theta_multigraph(e1: int, e2: int, e3: int) -> PlanarMultigraph:
    """Two vertices joined by three parallel twist regions (e1, e2, e3 edges)...

    Wait: the theta graph here is three vertices in a cycle with multiplicities;
    see below.
    """
    raise NotImplementedError


def cycle_multigraph(mults: tuple[int, ...]) -> PlanarMultigraph:
    """Cycle on len(mults) vertices with edge multiplicities mults.

    The (e1, e2, e3) case is the black graph of a twist knot standard diagram;
    its spanning tree count is e1*e2 + e2*e3 + e3*e1 for three vertices.
    """
    k = len(mults)
    edges = []
    for i, m in enumerate(mults):
        for _ in range(m):
            edges.append((i, (i + 1) % k))
    return PlanarMultigraph(k, tuple(edges), sum(mults) - k + 2)


# ---------------------------------------------------------------------------
# Crowell-type inequalities


@dataclass(frozen=True)
class CrowellVerdict:
    det: int
    crossings: int
    exception_class: str
    main_holds: bool | None  # det >= 3c - 8, None when exempt
    two_c_holds: bool | None  # det > 2c, None when exempt


_MAIN_EXEMPT = {"torus2", "twist"}
_TWO_C_EXEMPT = {"torus2", "twist", "6_2", "7_3"}


def crowell_inequality_check(det: int, c: int, exception_class: str = "other") -> CrowellVerdict:
    """Evaluate det >= 3c - 8 and det > 2c with the documented exception classes."""
    if c < 3:
        raise ValueError("crossing number below 3")
    main = None if exception_class in _MAIN_EXEMPT else det >= 3 * c - 8
    two_c = None if exception_class in _TWO_C_EXEMPT else det > 2 * c
    return CrowellVerdict(det, c, exception_class, main, two_c)


# ---------------------------------------------------------------------------
# Plat diagrams: rational (2-bridge) knots and pretzels


class _PlatBuilder:
    """Assemble a plat closure of a braid word into a PD code.

    Ports are (crossing, corner) with corners SW=0, SE=1, NE=2, NW=3 in
    counterclockwise order; strand continuations inside a crossing are
    SW<->NE and SE<->NW.
    """

    _CCW = ("SW", "SE", "NE", "NW")
    _COORD = {0: (-1, -1), 1: (1, -1), 2: (1, 1), 3: (-1, 1)}

    def __init__(self, strands: int):
        self.strands = strands
        self.crossings: list[int] = []  # sign per crossing
        self.adj: dict[tuple, list[tuple]] = {}
        # open end per strand position: a port or ("bot", i) placeholder
        self.current: list[tuple] = [("bot", i) for i in range(strands)]

    def _link(self, p, q) -> None:
        self.adj.setdefault(p, []).append(q)
        self.adj.setdefault(q, []).append(p)

    def add_crossing(self, i: int, sign: int) -> None:
        """sigma_i^sign between strand positions i, i+1 (0-indexed i)."""
        w = len(self.crossings)
        self.crossings.append(sign)
        self._link(self.current[i], (w, 0))
        self._link(self.current[i + 1], (w, 1))
        self.current[i] = (w, 3)  # NW
        self.current[i + 1] = (w, 2)  # NE

    def _follow(self, port: tuple) -> tuple:
        """Next crossing port reached from an out-port, through any placeholders."""
        prev, cur = port, self.adj[port][0]
        while isinstance(cur[0], str):
            nbrs = self.adj[cur]
            if len(nbrs) != 2:
                raise NonRealizableCode("dangling plat strand")
            cur, prev = (nbrs[0] if nbrs[1] == prev else nbrs[1]), cur
        return cur

    def close(self, bottom_pairs, top_pairs) -> "PDCode":
        if not self.crossings:
            raise NonRealizableCode("no crossings in plat word")
        for a, b in top_pairs:
            self._link(self.current[a], self.current[b])
        for a, b in bottom_pairs:
            self._link(("bot", a), ("bot", b))
        for port, nbrs in self.adj.items():
            expected = 2 if isinstance(port[0], str) else 1
            if len(nbrs) != expected:
                raise NonRealizableCode(f"bad plat wiring at {port}")
        through = {0: 2, 2: 0, 1: 3, 3: 1}
        start = (0, 0)
        labels: dict[tuple[int, int], int] = {}
        directions: dict[tuple[int, int], str] = {}
        cur, edge = start, 1
        n_edges = 2 * len(self.crossings)
        while True:
            w, pos = cur
            directions[cur] = "in"
            labels[cur] = edge
            out_port = (w, through[pos])
            directions[out_port] = "out"
            edge += 1
            labels[out_port] = edge if edge <= n_edges else 1
            nxt = self._follow(out_port)
            if nxt == start:
                break
            if edge > n_edges:
                raise NonRealizableCode("walk exceeded edge count; not a knot")
            cur = nxt
        if len(labels) != 4 * len(self.crossings):
            raise NonRealizableCode("plat closure is not a knot (multiple components)")
        quads = []
        for w, sign in enumerate(self.crossings):
            # under strand: positive sigma -> over is SW->NE, under SE->NW
            if sign > 0:
                under_ports = [(w, 1), (w, 3)]
            else:
                under_ports = [(w, 0), (w, 2)]
            under_in = next(p for p in under_ports if directions[p] == "in")
            order = [(w, (under_in[1] + k) % 4) for k in range(4)]
            quads.append(tuple(labels[p] for p in order))
        return PDCode(tuple(quads))


def plat_pd(strands: int, word: list[int], bottom_pairs, top_pairs) -> PDCode:
    """PD code of the plat closure of a braid word (letters +-(i+1) for sigma_i)."""
    b = _PlatBuilder(strands)
    for letter in word:
        b.add_crossing(abs(letter) - 1, 1 if letter > 0 else -1)
    return b.close(bottom_pairs, top_pairs)


def continued_fraction_value(partials: list[int]) -> Fraction:
    """[a1, a2, ..., am] -> a1 + 1/(a2 + 1/(...))."""
    val = Fraction(partials[-1])
    for a in reversed(partials[:-1]):
        val = a + 1 / val
    return val


def two_bridge_pd(partials: list[int]) -> PDCode:
    """Standard alternating 4-plat diagram of the 2-bridge knot [a1, ..., am].

    All partial quotients must be positive; the fraction p/q must have odd p
    (a knot, not a link).  The diagram has sum(a_i) crossings.
    """
    if not partials or any(a <= 0 for a in partials):
        raise ValueError("need positive partial quotients")
    frac = continued_fraction_value(partials)
    if frac.numerator % 2 == 0:
        raise ValueError(f"fraction {frac} has even numerator: a 2-component link")
    partials = list(partials)
    if len(partials) % 2 == 0:
        # same value, odd length: [..., a] = [..., a-1, 1]
        if partials[-1] == 1:
            partials[-2] += 1
            partials.pop()
        else:
            partials[-1] -= 1
            partials.append(1)
    word: list[int] = []
    for i, a in enumerate(partials):
        gen = 2 if i % 2 == 0 else 1
        sign = 1 if i % 2 == 0 else -1
        word.extend([sign * gen] * a)
    return plat_pd(4, word, bottom_pairs=[(0, 1), (2, 3)], top_pairs=[(0, 1), (2, 3)])


def pretzel_pd(p: int, q: int, r: int) -> PDCode:
    """(p, q, r)-pretzel diagram (vertical twist regions), plat closed on 6 strands."""
    word: list[int] = []
    for col, twists in enumerate((p, q, r)):
        gen = 2 * col + 1
        sign = 1 if twists > 0 else -1
        word.extend([sign * gen] * abs(twists))
    return plat_pd(
        6,
        word,
        bottom_pairs=[(1, 2), (3, 4), (5, 0)],
        top_pairs=[(1, 2), (3, 4), (5, 0)],
    )


# ---------------------------------------------------------------------------
# Alexander polynomial via Fox calculus on a diagram


def alexander_from_diagram(diag: Diagram | PDCode) -> IntLaurentPoly:
    """Normalized Alexander polynomial from the Wirtinger presentation.

    Arcs are maximal over-strand runs; each crossing contributes the standard
    Fox calculus row (t, 1-t, -1) on (incoming under-arc, over-arc, outgoing
    under-arc) for positive crossings, with t -> 1/t at negative ones.
    """
    if isinstance(diag, PDCode):
        diag = Diagram(diag)
    n = diag.n_edges
    # arc id per edge: arcs break at under-in ports (label of under-in edge = a)
    breaks = sorted(quad[0] for quad in diag.pd.crossings)  # under-in labels
    arc_of_edge: dict[int, int] = {}
    for k, b in enumerate(breaks):
        nxt = breaks[(k + 1) % len(breaks)]
        lab = _next_label(b, n)
        while True:
            arc_of_edge[lab] = k
            if lab == nxt:
                break
            lab = _next_label(lab, n)
    rows = []
    c = diag.pd.crossing_number
    t = IntLaurentPoly.from_dict({1: 1})
    tinv = IntLaurentPoly.from_dict({-1: 1})
    one = IntLaurentPoly.from_dict({0: 1})
    for w, quad in enumerate(diag.pd.crossings):
        a, b, ccc, d = quad
        over = quad[diag.over_in_pos[w]]
        sign = diag.crossing_sign(w)
        row = {}
        tt = t if sign > 0 else tinv
        row[arc_of_edge[a]] = tt
        row[arc_of_edge[over]] = (one - tt) + row.get(arc_of_edge[over], IntLaurentPoly())
        row[arc_of_edge[ccc]] = row.get(arc_of_edge[ccc], IntLaurentPoly()) - one
        rows.append(row)
    # drop one relation and one generator; determinant of the rest
    size = c - 1
    mat = [[rows[i].get(j, IntLaurentPoly()) for j in range(size)] for i in range(size)]
    from .alexander import _mat_det

    det = _mat_det(mat)
    if det.is_zero:
        raise NonRealizableCode("vanishing Alexander determinant; not a knot diagram?")
    return normalize(det)


def determinant_from_diagram(diag: Diagram | PDCode) -> int:
    poly = alexander_from_diagram(diag)
    return abs(poly(-1) if poly.lo >= 0 else (poly * IntLaurentPoly.from_dict({-poly.lo: 1}))(-1))


# ---------------------------------------------------------------------------
# Signed Gauss codes


def pd_from_gauss(code: list[int], signs: list[int]) -> PDCode:
    """PD code from a signed Gauss sequence.

    code[i] = +k for an over-pass and -k for an under-pass of crossing k;
    signs[k-1] is the crossing sign.  Planarity is verified by face tracing
    downstream.
    """
    n = len(code)
    c = n // 2
    if n != 2 * c or sorted(abs(x) for x in code) != sorted(list(range(1, c + 1)) * 2):
        raise NonRealizableCode("malformed Gauss sequence")
    if len(signs) != c:
        raise NonRealizableCode("need one sign per crossing")
    under_at = {}
    over_at = {}
    for i, x in enumerate(code):
        (under_at if x < 0 else over_at)[abs(x)] = i
    quads = []
    for k in range(1, c + 1):
        if k not in under_at or k not in over_at:
            raise NonRealizableCode(f"crossing {k} missing an over- or under-pass")
        u, o = under_at[k], over_at[k]
        a = u + 1  # label of edge entering pass i is i+1 (edges 1..2c)
        cc = (u + 1) % n + 1
        over_in = o + 1
        over_out = (o + 1) % n + 1
        if signs[k - 1] > 0:
            quads.append((a, over_out, cc, over_in))
        else:
            quads.append((a, over_in, cc, over_out))
    return PDCode(tuple(quads))
