"""End invariants: accumulation directions of bounded-trace simple curves.

A point of the circle of projective laminations is an end invariant of a
character when distinct curves X_n accumulate on it with |trace(X_n)| < K
for a fixed K.  The search walks the Farey tree keeping every branch that
can still harbour bounded traces (escaping subtrees provably cannot) and
reports rational candidates (curves whose surrounding fan stays bounded)
and surviving branch intervals.  The classifier upgrades the search result
using the trichotomies known for real, reducible, imaginary, dihedral and
discrete characters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .bq import decide_extended_bq, edge_escapes, safe_abs
from .characters import Character, TraceTriple, trace_at_slope
from .errors import ResourceLimitError
from .farey import ROOT, Slope, child
from .series import _abs

EMPTY = "Empty"
SINGLE = "SingleCurve"
CANTOR = "CantorLike"
FULL = "FullPL"
UNKNOWN = "Unknown"

DEFAULT_NODE_BUDGET = 400_000


@dataclass(frozen=True)
class EndInvariantReport:
    candidates: tuple  # of {"rational": Slope} | {"interval": (Slope, Slope)}
    classification: str
    bound_used: float
    depth_used: int
    theorem_basis: str

    def to_json(self) -> dict:
        cands = []
        for c in self.candidates:
            if "rational" in c:
                cands.append({"rational": str(c["rational"])})
            else:
                a, b = c["interval"]
                cands.append({"interval": [str(a), str(b)]})
        return {
            "candidates": cands,
            "classification": self.classification,
            "bound_used": self.bound_used,
            "depth_used": self.depth_used,
            "theorem_basis": self.theorem_basis,
        }


def _chordal(a: Slope, b: Slope) -> float:
    """Chordal distance between two slopes on the circle."""
    def lift(s):
        if s.is_infinity:
            return None
        return s.p / s.q
    ua, ub = lift(a), lift(b)
    if ua is None and ub is None:
        return 0.0
    if ua is None:
        return 2 / math.sqrt(1 + ub * ub)
    if ub is None:
        return 2 / math.sqrt(1 + ua * ua)
    return 2 * abs(ua - ub) / math.sqrt((1 + ua * ua) * (1 + ub * ub))


def _explore(triple: TraceTriple, bound: float, depth: int,
             node_budget: int = DEFAULT_NODE_BUDGET):
    """Depth-bounded walk keeping non-escaping branches.

    Returns (traces: dict slope -> trace over explored vertices,
    survivors: list of frontier states whose subtree may contain bounded
    traces, full_frontier: True when no branch escaped anywhere).
    """
    x, y, z = triple.as_tuple()
    traces = {Slope(*v): t for v, t in zip(ROOT, (x, y, z))}
    frontier = [
        (child(ROOT, d), tr)
        for d, tr in (("L", (x, z, x * z - y)), ("R", (z, y, z * y - x)),
                      ("B", (y, x, x * y - z)))
    ]
    nodes = 0
    all_survived = True
    for _ in range(depth):
        nxt = []
        for st, tr in frontier:
            traces[Slope(*st[2])] = tr[2]
            nodes += 1
            if nodes > node_budget:
                raise ResourceLimitError("end-invariant search exceeded node budget")
            ta, tb, tc = tr
            for d, pair, t_old, t_new in (("L", (ta, tc), tb, ta * tc - tb),
                                          ("R", (tc, tb), ta, tc * tb - ta)):
                if edge_escapes(pair, t_old, t_new) and min(
                        safe_abs(pair[0]), safe_abs(pair[1]), safe_abs(t_new)) > bound:
                    all_survived = False
                    continue
                nxt.append((child(st, d), (pair[0], pair[1], t_new)))
        frontier = nxt
        if not frontier:
            break
    return traces, frontier, all_survived and bool(frontier)


def _fan_bounded(traces_at, s: Slope, neighbours, bound: float, steps: int = 200) -> bool:
    """Whether the fan around s keeps traces bounded (s a rational end invariant).

    The fan recursion u_{k+1} = t_s * u_k - u_{k-1} stays bounded exactly
    when curves accumulate on s with uniformly bounded traces.
    """
    ts = traces_at(s)
    u0, u1 = neighbours
    cap = 10 * max(2.0, bound, _abs(u0), _abs(u1))
    for _ in range(steps):
        u0, u1 = u1, ts * u1 - u0
        if _abs(u1) > cap:
            return False
    return True


def search_end_invariants(c: Character, bound: float, depth: int,
                          node_budget: int = DEFAULT_NODE_BUDGET) -> EndInvariantReport:
    """Depth-bounded search for end invariants below the given trace bound.

    Candidates are rational slopes whose trace is small and whose fan of
    neighbours stays bounded, plus the surviving branch arcs (as endpoint
    slope pairs) that may converge to irrational end invariants.  The
    classification here is structural only (Empty / FullPL pattern /
    SingleCurve / Unknown); classify_end_set applies the sharper casework.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    triple = c.triple if isinstance(c, Character) else c
    traces, survivors, full_frontier = _explore(triple, bound, depth, node_budget)

    def traces_at(s: Slope) -> complex:
        if s not in traces:
            traces[s] = trace_at_slope(triple, s)
        return traces[s]

    rational: list[Slope] = []
    for s, t in list(traces.items()):
        if safe_abs(t) >= bound:
            continue
        n1, n2 = _fan_neighbours(s)
        if _fan_bounded(traces_at, s, (traces_at(n1), traces_at(n2)), bound):
            rational.append(s)
    rational.sort(key=lambda s: (s.q, s.p))
    rational_set = set(rational)

    intervals = []
    unexplained = 0
    for st, _ in survivors:
        a, b = Slope(*st[0]), Slope(*st[1])
        intervals.append((a, b))
        if a not in rational_set and b not in rational_set:
            unexplained += 1

    candidates = tuple({"rational": s} for s in rational) + tuple(
        {"interval": iv} for iv in intervals)
    if not candidates:
        classification = EMPTY
    elif full_frontier:
        classification = FULL
    elif len(rational) == 1 and unexplained == 0:
        classification = SINGLE
    else:
        classification = UNKNOWN
    return EndInvariantReport(candidates, classification, bound, depth,
                              "bounded-branch-search")


def _fan_neighbours(s: Slope) -> tuple[Slope, Slope]:
    """Two consecutive Farey neighbours of s (its parents, or base partners)."""
    if s == Slope(0, 1):
        return Slope(1, 0), Slope(1, 1)
    if s == Slope(1, 0):
        return Slope(0, 1), Slope(1, 1)
    if s == Slope(1, 1):
        return Slope(0, 1), Slope(1, 0)
    from .farey import walk_letters, replay
    st = replay(walk_letters(s))
    return Slope(*st[0]), Slope(*st[1])


# ---------------------------------------------------------------------------
# theorem-based classification
# ---------------------------------------------------------------------------

def _su2_like(c: Character, depth: int = 10) -> bool:
    """Conservative test for an SU(2)-type character: real with all traces in [-2,2]."""
    if "real" not in c.class_tags:
        return False
    x, y, z = c.triple.as_tuple()
    if any(abs(v.real) > 2 or abs(v.imag) > 1e-9 for v in (x, y, z)):
        return False
    traces, _, _ = _explore(c.triple, 2.0, depth, DEFAULT_NODE_BUDGET)
    return all(abs(t.imag) <= 1e-9 and abs(t.real) <= 2 + 1e-9 for t in traces.values())


def _small_trace_curves(c: Character, depth: int, open_interval: bool = True):
    """Slopes (depth-bounded) whose trace lies in (-2,2), or [-2,2] when closed."""
    traces, survivors, _ = _explore(c.triple, 2.0 + 1e-6, depth)
    out = []
    for s, t in traces.items():
        if abs(complex(t).imag) > 1e-9:
            continue
        r = complex(t).real
        if (abs(r) < 2 - 1e-9) if open_interval else (abs(r) <= 2 + 1e-9):
            out.append((s, complex(t)))
    return out, survivors


def _cantor_proxy(c: Character, bound: float, base_depth: int) -> bool:
    """Finite proxy for a Cantor end set: >= 2 surviving intervals, survivor
    count nondecreasing and total chordal length shrinking over three depths."""
    counts, lengths = [], []
    for d in (base_depth, base_depth + 4, base_depth + 8):
        try:
            rep = search_end_invariants(c, bound, d)
        except ResourceLimitError:
            return False
        ivs = [cd["interval"] for cd in rep.candidates if "interval" in cd]
        counts.append(len(ivs))
        lengths.append(sum(_chordal(a, b) for a, b in ivs))
    return (counts[0] >= 2 and counts[1] >= counts[0] and counts[2] >= counts[1]
            and lengths[2] < lengths[1] < lengths[0])


def _discrete_trace_set(c: Character, depth: int = 8, min_gap: float = 1e-8) -> bool:
    """Whether the depth-bounded trace set looks discrete (min gap test)."""
    traces, _, _ = _explore(c.triple, math.inf, depth, DEFAULT_NODE_BUDGET)
    vals = sorted(set((round(t.real, 12), round(t.imag, 12))
                      for t in traces.values() if _abs(t) < 1e6))
    best = math.inf
    for i, a in enumerate(vals):
        for b in vals[i + 1:]:
            d = math.hypot(a[0] - b[0], a[1] - b[1])
            if 0 < d < best:
                best = d
    return best > min_gap


def classify_end_set(c: Character, fuel: int = 100_000, depth: int = 14,
                     bound: float = 2.5) -> EndInvariantReport:
    """Classify the end-invariant set via the strongest applicable criterion.

    Dispatch order: dihedral and SU(2)-type characters fill the whole circle;
    extended Q-conditions certify emptiness; reducible characters split by
    whether all traces stay in [-2,2]; real and imaginary characters follow
    their trace trichotomies; a discrete trace set with three or more
    candidates forces Cantor-or-everything.  Anything unresolved stays
    Unknown.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    tags = c.class_tags
    _report = None

    def report():
        nonlocal _report
        if _report is None:
            _report = search_end_invariants(c, bound, depth)
        return _report

    def with_class(cls, basis, candidates=None):
        return EndInvariantReport(
            report().candidates if candidates is None else candidates,
            cls, bound, depth, basis)

    if "dihedral" in tags:
        return with_class(FULL, "dihedral-character")
    if _su2_like(c):
        return with_class(FULL, "su2-type-proxy")

    verdict = decide_extended_bq(c, fuel)
    if verdict.status == "satisfies":
        return with_class(EMPTY, "extended-q-conditions", candidates=())

    if "reducible" in tags:
        traces, _, _ = _explore(c.triple, math.inf, min(depth, 10))
        if all(abs(t.imag) <= 1e-9 and abs(t.real) <= 2 + 1e-9 for t in traces.values()):
            return with_class(FULL, "reducible-all-bounded")
        rep = report()
        singles = [cd for cd in rep.candidates if "rational" in cd]
        if len(singles) == 1 and rep.classification == SINGLE:
            return with_class(SINGLE, "reducible-single-curve")
        return with_class(UNKNOWN, "reducible-unresolved")

    if "real" in tags:
        small, _ = _small_trace_curves(c, depth)
        kappa_r = c.kappa.real
        if len(small) == 1 and report().classification == SINGLE and kappa_r >= 6 - 1e-9:
            return with_class(SINGLE, "real-single-small-trace")
        if len(small) >= 2 and kappa_r > 2:
            root = math.sqrt(kappa_r + 2) if kappa_r >= -2 else None
            traces, _, _ = _explore(c.triple, math.inf, min(depth, 10))
            for t in traces.values():
                r = complex(t)
                if abs(r.imag) > 1e-9:
                    continue
                if abs(r.real) > 2 and (root is None or abs(abs(r.real) - root) > 1e-6):
                    return with_class(CANTOR, "real-two-small-traces")
        if report().classification == FULL:
            return with_class(FULL, "real-bounded-everywhere")
        return with_class(UNKNOWN, "real-unresolved")

    if "imaginary" in tags:
        kap = c.kappa
        if abs(kap + 2) <= 1e-9:
            normal = _imaginary_zero_axis_form(c)
            if normal is not None and abs(normal) >= 2:
                return with_class(SINGLE, "imaginary-zero-axis")
            if _cantor_proxy(c, bound, depth - 4):
                return with_class(CANTOR, "imaginary-cantor-proxy")
            return with_class(UNKNOWN, "imaginary-unresolved")
        if report().classification == SINGLE:
            return with_class(SINGLE, "imaginary-single-candidate")
        if _cantor_proxy(c, bound, depth - 4):
            return with_class(CANTOR, "imaginary-cantor-proxy")
        return with_class(UNKNOWN, "imaginary-unresolved")

    rep = report()
    if len(rep.candidates) >= 3 and _discrete_trace_set(c):
        if rep.classification == FULL:
            return with_class(FULL, "discrete-trace-forcing")
        return with_class(CANTOR, "discrete-trace-forcing")
    if rep.classification in (SINGLE, FULL):
        return with_class(rep.classification, "bounded-branch-search")
    return with_class(UNKNOWN, "unresolved")


def _imaginary_zero_axis_form(c: Character):
    """The real parameter x when the triple matches (0, x, ix) up to order/sign.

    Characters of this form (with kappa = -2) have the zero-trace curve as
    their only end invariant exactly when |x| >= 2.
    """
    coords = list(c.triple.as_tuple())
    for i in range(3):
        if abs(coords[i]) > 1e-9:
            continue
        rest = [coords[j] for j in range(3) if j != i]
        for a, b in (rest, rest[::-1]):
            if abs(a.imag) <= 1e-9 and abs(b.real) <= 1e-9 and \
                    abs(abs(a.real) - abs(b.imag)) <= 1e-6:
                return a.real
    return None
