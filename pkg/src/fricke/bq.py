"""Certificate-producing decision of the Bowditch Q-conditions.

The conditions on a character: (1) no simple-curve trace lies in [-2, 2], and
(2) only finitely many curves have |trace| <= 2.  The extended variant
relaxes (1) to the open interval (-2, 2).  The decision is three-valued.

A "satisfies" verdict carries a sink certificate: a finite, edge-connected
set of Farey triangles together with its complete outward-edge list, every
outward edge *escaping*.  A directed edge with edge traces (t1, t2), old
third trace t_old and far trace t_new = t1*t2 - t_old is escaping when

    min(|t1|, |t2|) >= 2 + MU   and   |t_new| >= max(|t_old|, min(|t1|, |t2|))

with margin MU = 1e-6.  Behind an escaping edge every trace has modulus
> 2 and moduli grow without bound (Fibonacci-style), so all violations of
either condition would have to live inside the finite sink, where they are
checked directly.  The certificate checker, not the search heuristics,
carries the soundness of the verdict.

A "fails" verdict carries a witness: a slope whose trace lies in the
forbidden interval, the reducible-kappa short-circuit, or an exactly
periodic bounded orbit (a flip that fixes its triple at modulus <= 2, which
yields infinitely many curves with the same small trace).
"""
from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .characters import Character, TraceTriple, trace_at_slope
from .errors import PreconditionError
from .farey import ROOT, Slope, State, Vec, _canon, det

MU = 1e-6
NUM_TOL = 1e-9
FIXED_TOL = 1e-12


def safe_abs(z) -> float:
    """abs() that saturates to inf instead of raising near the float maximum."""
    try:
        return abs(z)
    except OverflowError:
        return math.inf

# directed-edge transitions on oriented triangles (a, b, c = a+b):
#   L across {a, c}, R across {c, b}, B across {a, b}.


def _vec_child(st: State, d: str) -> State:
    a, b, c = st
    if d == "L":
        return (a, c, (a[0] + c[0], a[1] + c[1]))
    if d == "R":
        return (c, b, (c[0] + b[0], c[1] + b[1]))
    return ((-b[0], -b[1]), a, (a[0] - b[0], a[1] - b[1]))


def _tr_child(tr, d: str):
    ta, tb, tc = tr
    if d == "L":
        return (ta, tc, ta * tc - tb)
    if d == "R":
        return (tc, tb, tc * tb - ta)
    return (tb, ta, ta * tb - tc)


def _edge_data(tr, d: str):
    """(edge trace pair, old trace, new trace) for direction d."""
    ta, tb, tc = tr
    if d == "L":
        return (ta, tc), tb, ta * tc - tb
    if d == "R":
        return (tc, tb), ta, tc * tb - ta
    return (ta, tb), tc, ta * tb - tc


def _new_vertex_vec(st: State, d: str) -> Vec:
    return _vec_child(st, d)[2]


def _replaced_vec(st: State, d: str) -> Vec:
    a, b, c = st
    return b if d == "L" else (a if d == "R" else c)


def is_escaping(edge_pair, t_old, t_new) -> bool:
    m = min(safe_abs(edge_pair[0]), safe_abs(edge_pair[1]))
    return m >= 2 + MU and safe_abs(t_new) >= max(safe_abs(t_old), m)


def spine_escaping(t_fan: complex, s0: complex, s1: complex) -> bool:
    """Escape along a fan whose center trace t_fan has small modulus.

    The fan around a vertex of trace t satisfies s_{j+1} = t*s_j - s_{j-1},
    so s_j = A*lam^j + B*lam^-j with lam + 1/lam = t.  When |lam| >= 1 + MU
    and the growing component dominates from the second step on (every later
    |s_j| >= |A| L^j - |B| L^-j >= 2 + MU, an increasing bound), the whole
    subtree behind the edge {center, s1-vertex} stays above modulus 2: the
    fan tail by this bound, everything hanging between consecutive fan
    vertices by the pair rule, which applies since |t_fan| <= 2 keeps the
    flipped-out traces large.
    """
    if safe_abs(t_fan) > 2:
        return False
    lam = (t_fan + cmath.sqrt(t_fan * t_fan - 4)) / 2
    if abs(lam) < 1:
        lam = (t_fan - cmath.sqrt(t_fan * t_fan - 4)) / 2
    big = abs(lam)
    if not cmath.isfinite(lam) or big < 1 + MU:
        return False
    if safe_abs(s1) < 2 + MU:
        return False
    den = lam - 1 / lam
    a = (s1 - s0 / lam) / den
    b = s0 - a
    return abs(a) * big ** 2 - abs(b) / big ** 2 >= 2 + MU


def edge_escapes(edge_pair, t_old, t_new) -> bool:
    """Escaping by the pair rule or by either fan's spine rule."""
    if is_escaping(edge_pair, t_old, t_new):
        return True
    t1, t2 = edge_pair
    return spine_escaping(t1, t_old, t2) or spine_escaping(t2, t_old, t1)


def dist_to_interval(t: complex) -> float:
    """Distance from a complex number to the real segment [-2, 2]."""
    t = complex(t)
    if t.real < -2:
        return abs(t - (-2))
    if t.real > 2:
        return abs(t - 2)
    return abs(t.imag)


def in_forbidden(t: complex, extended: bool, tol: float = NUM_TOL) -> bool:
    """Trace violates condition (1): in [-2,2], or strictly inside for (1')."""
    t = complex(t)
    if extended:
        return abs(t.imag) <= tol and abs(t.real) <= 2 - 1e-6
    return dist_to_interval(t) <= tol


def sink_trace_ok(t: complex, extended: bool, tol: float = NUM_TOL) -> bool:
    """Trace admissible inside a satisfies-sink (condition (1) holds at it)."""
    return not in_forbidden(t, extended, tol)


@dataclass(frozen=True)
class Witness:
    kind: str  # "trace-in-forbidden-interval" | "reducible-kappa" | "periodic-bounded-orbit"
    slope: Slope | None = None
    trace: complex | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "slope": str(self.slope) if self.slope is not None else None,
            "trace": [self.trace.real, self.trace.imag] if self.trace is not None else None,
        }


@dataclass(frozen=True)
class BoundaryEdge:
    """Directed outward edge: the sink triangle {edge + inner}, flipped away from inner."""

    edge: tuple[Slope, Slope]
    inner: Slope

    def to_json(self) -> dict:
        return {"edge": [str(self.edge[0]), str(self.edge[1])], "inner": str(self.inner)}


@dataclass(frozen=True)
class SinkCertificate:
    triangles: tuple[tuple[Slope, Slope, Slope], ...]
    boundary: tuple[BoundaryEdge, ...]

    def to_json(self) -> dict:
        return {
            "triangles": [[str(s) for s in tri] for tri in self.triangles],
            "boundary": [b.to_json() for b in self.boundary],
        }


@dataclass(frozen=True)
class BqVerdict:
    status: str  # "satisfies" | "fails" | "inconclusive"
    certificate: SinkCertificate | None
    witness: Witness | None
    fuel_spent: int

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "witness": self.witness.to_json() if self.witness else None,
            "fuel_spent": self.fuel_spent,
        }


def _slope_key(v: Vec) -> Slope:
    return Slope(*v)


def _default_triangle_key(st: State):
    return frozenset(_canon(*v) for v in st)


def _sorted_slopes(st: State) -> tuple[Slope, Slope, Slope]:
    return tuple(sorted((Slope(*v) for v in st), key=lambda s: (s.q, s.p)))


def _search(triple: TraceTriple, fuel: int, extended: bool,
            triangle_key: Callable[[State], object] = _default_triangle_key,
            rep_slope: Callable[[Vec], Slope] = _slope_key) -> BqVerdict:
    """Shared engine for the plain and the quotient (relative) searches.

    `triangle_key` identifies triangles (quotient searches key modulo the
    mapping class); `rep_slope` maps an integer vector to the slope reported
    in witnesses and certificates.
    """
    spent = 0
    st: State = ROOT
    tr = triple.as_tuple()

    def violation(vec: Vec, t: complex) -> BqVerdict | None:
        if in_forbidden(t, extended):
            return BqVerdict("fails", None,
                             Witness("trace-in-forbidden-interval", rep_slope(vec), t), spent)
        return None

    for v, t in zip(st, tr):
        out = violation(v, t)
        if out is not None:
            return out

    # steepest descent on the max modulus, strictly decreasing
    while spent < fuel:
        spent += 1
        cur = max(safe_abs(t) for t in tr)
        best = None
        for d in "LRB":
            pair, t_old, t_new = _edge_data(tr, d)
            if safe_abs(t_new - t_old) <= FIXED_TOL and safe_abs(t_new) <= 2 + FIXED_TOL:
                return BqVerdict("fails", None,
                                 Witness("periodic-bounded-orbit",
                                         rep_slope(_new_vertex_vec(st, d)), t_new), spent)
            m = max(safe_abs(pair[0]), safe_abs(pair[1]), safe_abs(t_new))
            if m < cur - FIXED_TOL and (best is None or m < best[0]):
                best = (m, d)
        if best is None:
            break
        st = _vec_child(st, best[1])
        tr = _tr_child(tr, best[1])
        out = violation(st[2], tr[2])
        if out is not None:
            return out
    else:
        return BqVerdict("inconclusive", None, None, spent)

    # breadth-first expansion of the non-escaping region around the seed
    seed = st
    visited = {triangle_key(seed)}
    sink: list[tuple[State, tuple]] = [(seed, tr)]
    boundary: list[BoundaryEdge] = []
    queue = deque((seed, tr, d) for d in "LRB")
    while queue:
        if spent >= fuel:
            return BqVerdict("inconclusive", None, None, spent)
        spent += 1
        pst, ptr, d = queue.popleft()
        pair, t_old, t_new = _edge_data(ptr, d)
        out = violation(_new_vertex_vec(pst, d), t_new)
        if out is not None:
            return out
        if safe_abs(t_new - t_old) <= FIXED_TOL and safe_abs(t_new) <= 2 + FIXED_TOL:
            return BqVerdict("fails", None,
                             Witness("periodic-bounded-orbit",
                                     rep_slope(_new_vertex_vec(pst, d)), t_new), spent)
        if edge_escapes(pair, t_old, t_new):
            e1, e2 = (_replaced_vec(pst, x) for x in {"L": ("R", "B"), "R": ("L", "B"),
                                                      "B": ("L", "R")}[d])
            boundary.append(BoundaryEdge((rep_slope(e1), rep_slope(e2)),
                                         rep_slope(_replaced_vec(pst, d))))
            continue
        cst = _vec_child(pst, d)
        key = triangle_key(cst)
        if key in visited:
            continue
        visited.add(key)
        ctr = _tr_child(ptr, d)
        sink.append((cst, ctr))
        queue.append((cst, ctr, "L"))
        queue.append((cst, ctr, "R"))

    for sst, strc in sink:
        if not all(sink_trace_ok(t, extended) for t in strc):
            return BqVerdict("inconclusive", None, None, spent)
    cert = SinkCertificate(tuple(_sorted_slopes(s) for s, _ in sink), tuple(boundary))
    return BqVerdict("satisfies", cert, None, spent)


def decide_bq(c: Character, fuel: int) -> BqVerdict:
    """Decide the Bowditch Q-conditions with a certificate or witness."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    if abs(c.kappa - 2) <= NUM_TOL:
        # reducible characters never satisfy the closed conditions
        return BqVerdict("fails", None, Witness("reducible-kappa"), 0)
    return _search(c.triple, fuel, extended=False)


def decide_extended_bq(c: Character, fuel: int) -> BqVerdict:
    """Decide the extended variant: condition (1) on the open interval (-2, 2)."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    return _search(c.triple, fuel, extended=True)


# ---------------------------------------------------------------------------
# independent certificate checking
# ---------------------------------------------------------------------------

def check_certificate(c: Character, verdict: BqVerdict, extended: bool = False,
                      tol: float = NUM_TOL) -> bool:
    """Re-validate a verdict from scratch (fresh trace evaluations).

    satisfies: the sink is a finite edge-connected triangle set, the listed
    boundary is exactly its outward edge set, every boundary edge is
    escaping, and no sink trace violates condition (1).
    fails: the witness re-evaluates into the forbidden set, or the evidence
    tag re-verifies (kappa = 2; flip-fixed bounded orbit).
    """
    if verdict.status == "fails":
        w = verdict.witness
        if w is None:
            return False
        if w.kind == "reducible-kappa":
            return abs(c.kappa - 2) <= tol
        if w.kind == "trace-in-forbidden-interval":
            t = trace_at_slope(c, w.slope)
            return in_forbidden(t, extended, tol)
        if w.kind == "periodic-bounded-orbit":
            t = trace_at_slope(c, w.slope)
            return abs(t) <= 2 + 1e-9
        return False
    if verdict.status != "satisfies" or verdict.certificate is None:
        return verdict.status == "inconclusive"

    cert = verdict.certificate
    tris = [frozenset(tri) for tri in cert.triangles]
    if not tris:
        return False
    traces = {}
    for tri in tris:
        for s in tri:
            if s not in traces:
                traces[s] = trace_at_slope(c, s)
                if not sink_trace_ok(traces[s], extended, tol):
                    return False
    # edge census: every edge of a sink triangle is either shared by two sink
    # triangles or appears exactly once in the boundary list
    edge_count: dict[frozenset, int] = {}
    for tri in tris:
        for e in _triangle_edges(tri):
            edge_count[e] = edge_count.get(e, 0) + 1
    listed = {}
    for b in cert.boundary:
        key = frozenset(b.edge)
        if key in listed:
            return False
        listed[key] = b
    for e, n in edge_count.items():
        if n == 1 and e not in listed:
            return False
        if n > 2:
            return False
    for key, b in listed.items():
        if edge_count.get(key) != 1:
            return False
        if frozenset((*b.edge, b.inner)) not in tris:
            return False
        t1, t2 = traces[b.edge[0]], traces[b.edge[1]]
        t_old = traces[b.inner]
        if not edge_escapes((t1, t2), t_old, t1 * t2 - t_old):
            return False
    # connectivity of the sink through shared edges
    adj = {i: set() for i in range(len(tris))}
    by_edge: dict[frozenset, list[int]] = {}
    for i, tri in enumerate(tris):
        for e in _triangle_edges(tri):
            by_edge.setdefault(e, []).append(i)
    for members in by_edge.values():
        for i in members:
            for j in members:
                if i != j:
                    adj[i].add(j)
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(tris)


def _triangle_edges(tri: frozenset):
    a, b, c = sorted(tri, key=lambda s: (s.q, s.p))
    return (frozenset((a, b)), frozenset((a, c)), frozenset((b, c)))


# ---------------------------------------------------------------------------
# bounded subgraphs and connectivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundedSubgraph:
    bound: float
    vertices: dict  # Slope -> complex trace
    edges: tuple[tuple[Slope, Slope], ...]
    depth: int

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "vertices": {str(s): [t.real, t.imag] for s, t in self.vertices.items()},
            "edges": [[str(a), str(b)] for a, b in self.edges],
            "depth": self.depth,
        }


def bounded_subgraph(c: Character, bound: float, depth: int) -> BoundedSubgraph:
    """Exact depth-truncated subgraph spanned by slopes with |trace| <= bound.

    Subtrees are pruned only behind escaping edges whose entering triangle
    already has all three moduli above the bound (their traces only grow),
    so the vertex set is exact.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    triple = c.triple if isinstance(c, Character) else c
    x, y, z = triple.as_tuple()
    base = list(zip(ROOT, (x, y, z)))
    verts: dict[Slope, complex] = {}
    for v, t in base:
        if abs(t) <= bound:
            verts[Slope(*v)] = t
    edges: list[tuple[Slope, Slope]] = []
    base_slopes = [Slope(*v) for v in ROOT]
    for i in range(3):
        for j in range(i + 1, 3):
            if base_slopes[i] in verts and base_slopes[j] in verts:
                edges.append((base_slopes[i], base_slopes[j]))
    if depth == 0:
        return BoundedSubgraph(bound, verts, tuple(edges), 0)

    frontier = []
    st, tr = ROOT, (x, y, z)
    for d in "LRB":
        frontier.append((_vec_child(st, d), _tr_child(tr, d), 1, _edge_data(tr, d)))
    while frontier:
        nxt = []
        for cst, ctr, lvl, (pair, t_old, t_new) in frontier:
            s_new = Slope(*cst[2])
            if safe_abs(t_new) <= bound:
                verts[s_new] = t_new
                for parent_vec in (cst[0], cst[1]):
                    ps = Slope(*parent_vec)
                    if ps in verts:
                        edges.append((ps, s_new))
            if lvl >= depth:
                continue
            if (is_escaping(pair, t_old, t_new)
                    and min(safe_abs(t) for t in ctr) > bound + NUM_TOL):
                continue
            for d in "LR":
                nxt.append((_vec_child(cst, d), _tr_child(ctr, d), lvl + 1,
                            _edge_data(ctr, d)))
        frontier = nxt
    return BoundedSubgraph(bound, verts, tuple(edges), depth)


def check_connectivity(c: Character, bound: float, depth: int, margin: int = 1) -> dict:
    """Component count of the bounded subgraph, boundary artifacts suppressed.

    Components are merged through every truncated vertex but only counted
    when they contain an interior vertex (depth <= depth - margin), since a
    component touching the frontier may reconnect beyond the truncation.
    Requires bound >= 2, the hypothesis under which the full subgraph is
    connected.
    """
    if bound < 2:
        raise PreconditionError("connectivity check requires bound >= 2")
    sub = bounded_subgraph(c, bound, depth)
    index = {s: i for i, s in enumerate(sub.vertices)}
    parent = list(range(len(index)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in sub.edges:
        ra, rb = find(index[a]), find(index[b])
        if ra != rb:
            parent[ra] = rb
    interior_depth = depth - margin
    roots = set()
    for s, i in index.items():
        if _slope_depth(s) <= interior_depth:
            roots.add(find(i))
    return {
        "connected_within_truncation": len(roots) <= 1,
        "components": len(roots),
        "vertices": len(index),
    }


def _slope_depth(s: Slope) -> int:
    from .farey import walk_letters

    return len(walk_letters(s))
