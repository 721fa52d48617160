"""Exact integer combinatorics of the Farey graph on the circle of slopes.

Simple closed curves on the one-holed torus are indexed by reduced rational
slopes p/q together with 1/0 = infinity.  Two slopes are joined by an edge of
the Farey graph when |p*s - r*q| = 1 (geometric intersection number one), and
the triangles of the resulting tessellation form a trivalent tree dual to it.
Everything here is exact integer arithmetic.

Tree convention used throughout the package: an oriented triangle is a tuple
of integer vectors (a, b, c) with c = a + b and det(a, b) = -1.  The base
triangle is ((0,1), (1,0), (1,1)), i.e. {0/1, 1/0, 1/1}.  Each triangle has a
left child across the edge {a, c} and a right child across {c, b}; the base
triangle additionally has a back child across {a, b} (toward -1/1).  The new
vertex of a child is always its third component.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import InvalidTriangleError, ResourceLimitError

Vec = tuple[int, int]
State = tuple[Vec, Vec, Vec]

ENUM_DEPTH_CAP = 30     # enumerate_slopes yields 3 * 2**depth slopes
WALK_STEP_CAP = 10_000  # single-slope navigation cap


def _canon(p: int, q: int) -> Vec:
    """Reduce (p, q) to the canonical representative: gcd 1, q >= 0, inf = (1, 0)."""
    if p == 0 and q == 0:
        raise ValueError("0/0 is not a slope")
    if q == 0:
        return (1, 0)
    if q < 0:
        p, q = -p, -q
    g = gcd(abs(p), q)
    return (p // g, q // g)


@dataclass(frozen=True)
class Slope:
    """A reduced rational slope p/q; q = 0 encodes the slope at infinity."""

    p: int
    q: int

    def __post_init__(self):
        p, q = _canon(self.p, self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def vec(self) -> Vec:
        return (self.p, self.q)

    @property
    def is_infinity(self) -> bool:
        return self.q == 0

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"

    @classmethod
    def from_string(cls, text: str) -> "Slope":
        s = text.strip()
        if s in ("inf", "infinity", "oo"):
            return cls(1, 0)
        if "/" in s:
            num, den = s.split("/", 1)
            return cls(int(num), int(den))
        return cls(int(s), 1)


BASE_SLOPES = (Slope(0, 1), Slope(1, 0), Slope(1, 1))


def det(a: Vec, b: Vec) -> int:
    return a[0] * b[1] - b[0] * a[1]


def are_adjacent(a: Slope, b: Slope) -> bool:
    """Farey adjacency: the curves intersect exactly once."""
    return abs(det(a.vec, b.vec)) == 1


@dataclass(frozen=True)
class FareyEdge:
    a: Slope
    b: Slope

    def __post_init__(self):
        if not are_adjacent(self.a, self.b):
            raise InvalidTriangleError(f"{self.a} and {self.b} are not Farey-adjacent")


@dataclass(frozen=True)
class FareyTriangle:
    """An unordered triangle of the Farey tessellation."""

    a: Slope
    b: Slope
    c: Slope

    def __post_init__(self):
        v = {self.a, self.b, self.c}
        if len(v) != 3:
            raise InvalidTriangleError("triangle needs three distinct slopes")
        for x in v:
            for y in v:
                if x != y and not are_adjacent(x, y):
                    raise InvalidTriangleError(f"{x} and {y} are not Farey-adjacent")

    @property
    def slopes(self) -> frozenset[Slope]:
        return frozenset((self.a, self.b, self.c))


def mediant_flip(edge: FareyEdge, third: Slope) -> Slope:
    """The unique slope s != third completing edge to a triangle.

    s is the mediant or co-mediant (pa +- pb)/(qa +- qb); applying the flip
    twice returns third.
    """
    FareyTriangle(edge.a, edge.b, third)  # validates the input triangle
    pa, qa = edge.a.vec
    pb, qb = edge.b.vec
    for cand in ((pa + pb, qa + qb), (pa - pb, qa - qb)):
        s = Slope(*cand)
        if s != third:
            return s
    raise InvalidTriangleError("no completing slope found")  # pragma: no cover


def act_on_slope(g, s: Slope) -> Slope:
    """Moebius action of an integer matrix with det +-1 on a slope."""
    (a, b), (c, d) = g
    if abs(a * d - b * c) != 1:
        raise ValueError("matrix must have determinant +-1")
    return Slope(a * s.p + b * s.q, c * s.p + d * s.q)


# ---------------------------------------------------------------------------
# oriented-triangle tree
# ---------------------------------------------------------------------------

ROOT: State = ((0, 1), (1, 0), (1, 1))


def child_left(st: State) -> State:
    a, _, c = st
    return (a, c, (a[0] + c[0], a[1] + c[1]))


def child_right(st: State) -> State:
    _, b, c = st
    return (c, b, (c[0] + b[0], c[1] + b[1]))


def child_back(st: State) -> State:
    # flip across {a, b} away from c; reoriented so the new vertex is the sum
    a, b, _ = st
    return ((-b[0], -b[1]), a, (a[0] - b[0], a[1] - b[1]))


_CHILD = {"L": child_left, "R": child_right, "B": child_back}


def child(st: State, letter: str) -> State:
    """Dispatch on a navigation letter; B is only valid at the base triangle."""
    return _CHILD[letter](st)


def _orient(u: Vec, v: Vec, w: Vec) -> int:
    d = det(u, v) * det(v, w) * det(w, u)
    return (d > 0) - (d < 0)


def _in_arc(s: Vec, x: Vec, y: Vec, away: Vec) -> bool:
    """True when s lies strictly inside the arc from x to y not containing away."""
    o = _orient(x, s, y)
    return o != 0 and o == -_orient(x, away, y)


def walk_letters(s: Slope, cap: int = WALK_STEP_CAP) -> str:
    """Navigation letters from the base triangle to s's birth triangle.

    Returns a string over {L, R, B}; B can only occur as the first letter
    (the branch across {0/1, 1/0} toward the negative slopes).  Base slopes
    give the empty string.  The number of letters is s's mediant depth.
    """
    target = s.vec
    if s in BASE_SLOPES:
        return ""
    st, letters = ROOT, []
    # the root triangle offers three branches; deeper triangles offer two
    for letter in "LRB":
        cand = _CHILD[letter](st)
        a, b, c = (_canon(*v) for v in cand)
        if target == c or _in_arc(target, a, b, away=st[2] if letter == "B" else st[1 if letter == "L" else 0]):
            st, letters = cand, [letter]
            break
    else:  # pragma: no cover - the three arcs cover the circle
        raise AssertionError(f"slope {s} not located at the root")
    for _ in range(cap):
        a, b, c = (_canon(*v) for v in st)
        if target == c:
            return "".join(letters)
        if _in_arc(target, a, c, away=b):
            st = child_left(st)
            letters.append("L")
        else:
            st = child_right(st)
            letters.append("R")
    raise ResourceLimitError(f"navigation to {s} exceeded {cap} steps")


def replay(letters: str) -> State:
    """Apply navigation letters to the base triangle."""
    st = ROOT
    for i, letter in enumerate(letters):
        if letter == "B" and i != 0:
            raise ValueError("B is only valid as the first letter")
        st = _CHILD[letter](st)
    return st


# ---------------------------------------------------------------------------
# LR words (Stern-Brocot coding of the positive cone)
# ---------------------------------------------------------------------------

R_MAT = ((1, 1), (0, 1))
L_MAT = ((1, 0), (1, 1))


@dataclass(frozen=True)
class LRWord:
    """A word over {L, R}; the empty word is the identity.

    L and R stand for the unimodular matrices [[1,0],[1,1]] and [[1,1],[0,1]];
    the word doubles as Stern-Brocot navigation from 1/1 (L toward 0/1,
    R toward 1/0), which reaches exactly the slopes with p, q >= 1.
    """

    letters: str

    def __post_init__(self):
        if any(ch not in "LR" for ch in self.letters):
            raise ValueError(f"invalid LR word {self.letters!r}")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        m = ((1, 0), (0, 1))
        for ch in self.letters:
            g = R_MAT if ch == "R" else L_MAT
            m = (
                (m[0][0] * g[0][0] + m[0][1] * g[1][0], m[0][0] * g[0][1] + m[0][1] * g[1][1]),
                (m[1][0] * g[0][0] + m[1][1] * g[1][0], m[1][0] * g[0][1] + m[1][1] * g[1][1]),
            )
        return m


def slope_to_word(s: Slope) -> LRWord:
    """Stern-Brocot word of a slope in the positive cone (p, q >= 1); 1/1 -> empty.

    Slopes outside the cone (0/1, 1/0, negatives) carry no pure LR word under
    this convention; use walk_letters for a navigation path valid everywhere.
    """
    if s == Slope(1, 1):
        return LRWord("")
    if s.p < 1 or s.q < 1:
        raise ValueError(f"{s} lies outside the positive Stern-Brocot cone")
    return LRWord(walk_letters(s))


def slope_from_word(w: LRWord) -> Slope:
    """Inverse of slope_to_word: the slope whose navigation letters are w."""
    return Slope(*replay(w.letters)[2])


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _root_children() -> list[State]:
    return [child_left(ROOT), child_right(ROOT), child_back(ROOT)]


def enumerate_slopes(depth: int) -> list[Slope]:
    """All slopes within `depth` mediant subdivisions of the base triangle.

    Breadth-first, children ordered (left, right); the base layer is
    [0/1, 1/0, 1/1] and layer d >= 1 adds 3 * 2**(d-1) new slopes, so the
    result has exactly 3 * 2**depth entries.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > ENUM_DEPTH_CAP:
        raise ResourceLimitError(f"enumeration depth {depth} exceeds cap {ENUM_DEPTH_CAP}")
    out = list(BASE_SLOPES)
    if depth == 0:
        return out
    frontier = _root_children()
    out.extend(Slope(*st[2]) for st in frontier)
    for _ in range(depth - 1):
        nxt = []
        for st in frontier:
            for child in (child_left(st), child_right(st)):
                nxt.append(child)
                out.append(Slope(*child[2]))
        frontier = nxt
    return out


def tree_layers(max_depth: int):
    """Yield (depth, states) per layer of the triangle tree, root children first."""
    frontier = _root_children()
    yield 1, frontier
    for d in range(2, max_depth + 1):
        frontier = [c for st in frontier for c in (child_left(st), child_right(st))]
        yield d, frontier
