"""Mapping classes, characters they fix, and the torus-bundle identities.

An orientation-preserving mapping class is an integer matrix acting on
slopes; it is Anosov exactly when |trace| > 2, with a pair of quadratic
irrational fixed points mu-, mu+ on the circle of slopes.  For a character
fixed by an Anosov theta the simple-curve traces are constant on
theta-orbits, the Q-conditions make sense on the orbit space, and the
general series taken over one representative per orbit sums to 0 mod 2*pi*i;
over the orbits on one side of the axis it sums to +-l(A) mod 2*pi*i, where
A is the SL(2,C) element conjugating rho to rho o theta^-1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import bq as _bq
from .characters import Character, TraceTriple, complex_length, realize_matrices
from .errors import PreconditionError, ResourceLimitError
from .farey import LRWord, Slope, act_on_slope, walk_letters
from .quadratic import QuadraticIrrational, continued_fraction_cycle
from .series import (GENERAL, SeriesReport, _sum_layers, nu_from_kappa,
                     residual_mod_2pi_i)

Matrix = tuple[tuple[int, int], tuple[int, int]]


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def _mat_det(m: Matrix) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _mat_adj(m: Matrix) -> Matrix:
    return ((m[1][1], -m[0][1]), (-m[1][0], m[0][0]))


def _mat_neg(m: Matrix) -> Matrix:
    return ((-m[0][0], -m[0][1]), (-m[1][0], -m[1][1]))


@dataclass(frozen=True)
class MappingClass:
    """An element of GL(2,Z); Anosov when det = 1 and |trace| > 2."""

    matrix: Matrix

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if abs(_mat_det(m)) != 1:
            raise ValueError("mapping class matrix must have determinant +-1")
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> int:
        return self.matrix[0][0] + self.matrix[1][1]

    @property
    def det(self) -> int:
        return _mat_det(self.matrix)

    @property
    def is_anosov(self) -> bool:
        return self.det == 1 and abs(self.trace) > 2

    @property
    def word(self) -> LRWord | None:
        return lr_word(self.matrix) if self.is_anosov else None

    @classmethod
    def from_word(cls, word) -> "MappingClass":
        w = word if isinstance(word, LRWord) else LRWord(str(word))
        return cls(w.matrix())

    def __str__(self) -> str:
        (a, b), (c, d) = self.matrix
        return f"[[{a},{b}],[{c},{d}]]"


def _require_anosov(m: Matrix) -> Matrix:
    if _mat_det(m) != 1 or abs(m[0][0] + m[1][1]) <= 2:
        raise ValueError("matrix is not Anosov (need det 1 and |trace| > 2)")
    return m


# ---------------------------------------------------------------------------
# axis and LR factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxisPair:
    mu_minus: QuadraticIrrational
    mu_plus: QuadraticIrrational


def axis_points(m) -> AxisPair:
    """Repelling / attracting fixed points on the circle, exactly.

    Fixed points solve c*s^2 + (d-a)*s - b = 0; the attracting one carries
    the eigenvalue of modulus > 1, i.e. the sqrt sign matching sign(trace).
    """
    m = _require_anosov(tuple(tuple(int(v) for v in row) for row in m))
    (a, b), (c, d) = m
    t = a + d
    disc = t * t - 4
    sgn = 1 if t > 0 else -1
    mu_plus = QuadraticIrrational(a - d, sgn, 2 * c, disc)
    mu_minus = QuadraticIrrational(a - d, -sgn, 2 * c, disc)
    return AxisPair(mu_minus, mu_plus)


def lr_word(m) -> LRWord:
    """Cyclic LR factorization of a hyperbolic SL(2,Z) element.

    The continued fraction of the attracting fixed point is eventually
    periodic; its cycle (R-exponent, L-exponent, ...) gives a positive word
    conjugate in SL(2,Z) to +-m (an odd cycle is doubled, and the cycle is
    shifted by one when the pre-period is odd so the conjugator has
    determinant one).  Canonical rotation: one whose product equals +-m
    exactly when such a rotation exists, otherwise the lexicographically
    least.
    """
    m = _require_anosov(tuple(tuple(int(v) for v in row) for row in m))
    mm = m if m[0][0] + m[1][1] > 0 else _mat_neg(m)
    target_trace = mm[0][0] + mm[1][1]
    pre, cycle = continued_fraction_cycle(axis_points(mm).mu_plus)
    if len(cycle) % 2 == 1:
        cycle = cycle + cycle
    if len(pre) % 2 == 1:
        cycle = cycle[1:] + cycle[:1]
    if any(q <= 0 for q in cycle):  # pragma: no cover - hyperbolic cycles are positive
        raise RuntimeError(f"non-positive CF cycle {cycle}")
    base = ""
    for i, q in enumerate(cycle):
        base += ("R" if i % 2 == 0 else "L") * q
    base_m = LRWord(base).matrix()
    word, wm = base, base_m
    while wm[0][0] + wm[1][1] < target_trace:
        word += base
        wm = _mat_mul(wm, base_m)
    if wm[0][0] + wm[1][1] != target_trace:
        raise RuntimeError(f"no LR power matches trace {target_trace}")
    rotations = sorted({word[i:] + word[:i] for i in range(len(word))})
    for rot in rotations:
        prod = LRWord(rot).matrix()
        if prod == mm or prod == _mat_neg(mm):
            return LRWord(rot)
    return LRWord(rotations[0])


# ---------------------------------------------------------------------------
# induced action on trace triples
# ---------------------------------------------------------------------------

def _as_matrix(theta) -> Matrix:
    if isinstance(theta, MappingClass):
        return theta.matrix
    if isinstance(theta, LRWord):
        return theta.matrix()
    if isinstance(theta, str):
        return LRWord(theta).matrix()
    return MappingClass(theta).matrix


@lru_cache(maxsize=256)
def _apply_paths(m: Matrix):
    """Tree paths of the theta^-1 images of the base slopes."""
    adj = _mat_adj(m)
    slopes = [act_on_slope(adj, s) for s in (Slope(0, 1), Slope(1, 0), Slope(1, 1))]
    return tuple(walk_letters(s) for s in slopes)


def _replay_trace(letters: str, x, y, z):
    ta, tb, tc = x, y, z
    for letter in letters:
        if letter == "L":
            ta, tb, tc = ta, tc, ta * tc - tb
        elif letter == "R":
            ta, tb, tc = tc, tb, tc * tb - ta
        else:
            ta, tb, tc = tb, ta, ta * tb - tc
    return tc


def compile_apply(theta):
    """A fast (x, y, z) -> transformed triple map for a fixed mapping class.

    Works elementwise on numpy arrays as well as on scalars.
    """
    m = _as_matrix(theta)
    paths = _apply_paths(m)
    adj = _mat_adj(m)
    base = {Slope(0, 1): 0, Slope(1, 0): 1, Slope(1, 1): 2}
    picks = []
    for s, letters in zip((Slope(0, 1), Slope(1, 0), Slope(1, 1)), paths):
        img = act_on_slope(adj, s)
        picks.append(base[img] if img in base else letters)

    def apply(x, y, z):
        out = []
        for p in picks:
            if isinstance(p, int):
                out.append((x, y, z)[p])
            else:
                out.append(_replay_trace(p, x, y, z))
        return tuple(out)

    return apply


def apply_mapping_class(t: TraceTriple, theta) -> TraceTriple:
    """Trace triple of the transformed character [rho o theta^-1].

    The new coordinates are the old character's traces at the theta^-1
    images of the base slopes, realized by a finite walk of Markov flips,
    so kappa is preserved.
    """
    x, y, z = compile_apply(theta)(*t.as_tuple())
    return TraceTriple(x, y, z)


# ---------------------------------------------------------------------------
# fundamental domain of the axis action
# ---------------------------------------------------------------------------

def simplest_between(lo: QuadraticIrrational, hi: QuadraticIrrational) -> Slope:
    """Smallest-denominator rational strictly between two irrationals.

    Stern-Brocot descent with exact comparisons; among the integers (all of
    denominator one) the smallest value wins.
    """
    n = lo.floor()
    if hi.cmp_fraction(n + 1, 1) > 0:
        return Slope(n + 1, 1)
    sub = simplest_between(hi.minus_int(n).reciprocal(), lo.minus_int(n).reciprocal())
    return Slope(n * sub.p + sub.q, sub.p)


class FundamentalDomain:
    """Half-open fundamental intervals [s0, theta s0) on both sides of the axis.

    The two axis endpoints split the circle of slopes into an inner arc (the
    reals strictly between them) and an outer arc through infinity.  Anchors:
    the smallest-denominator rational of the inner arc, and 1/0 for the outer
    arc.  Sides are tagged left = inner, right = outer; all comparisons are
    exact.
    """

    TRANSLATE_CAP = 100_000

    def __init__(self, theta):
        self.matrix = _require_anosov(_as_matrix(theta))
        ax = axis_points(self.matrix)
        self.axis = ax
        lo, hi = sorted((ax.mu_minus, ax.mu_plus))
        self._lo, self._hi = lo, hi
        self.anchor_inner = simplest_between(lo, hi)
        self.anchor_outer = Slope(1, 0)
        self.end_inner = act_on_slope(self.matrix, self.anchor_inner)
        self.end_outer = act_on_slope(self.matrix, self.anchor_outer)
        self._dir_inner = self._cmp(self.end_inner, self.anchor_inner)
        self._dir_outer = self._cmp(self.end_outer, self.anchor_outer)
        if 0 in (self._dir_inner, self._dir_outer):  # pragma: no cover
            raise RuntimeError("axis anchors are fixed; matrix cannot be Anosov")

    # side = "left" (inner arc) or "right" (outer arc, contains infinity)
    def side(self, s: Slope) -> str:
        if s.is_infinity:
            return "right"
        above_lo = self._lo.cmp_fraction(s.p, s.q) < 0
        below_hi = self._hi.cmp_fraction(s.p, s.q) > 0
        return "left" if (above_lo and below_hi) else "right"

    def _key(self, s: Slope):
        """Linear coordinate along s's arc (monotone along the arc)."""
        if self.side(s) == "left":
            return (0, s.p, s.q)  # compare as p/q
        if s.is_infinity:
            return (1, 0, 1)
        if self._hi.cmp_fraction(s.p, s.q) < 0:  # s > hi: first outer segment
            return (0, s.p, s.q)
        return (2, s.p, s.q)  # s < lo: last outer segment

    def _cmp(self, s: Slope, t: Slope) -> int:
        ks, kt = self._key(s), self._key(t)
        if ks[0] != kt[0]:
            return -1 if ks[0] < kt[0] else 1
        d = ks[1] * kt[2] - kt[1] * ks[2]  # sign of s - t, denominators >= 0
        return (d > 0) - (d < 0)

    def contains(self, s: Slope) -> bool:
        """Membership in the half-open interval [anchor, theta anchor) of s's side."""
        if self.side(s) == "left":
            s0, e0, direction = self.anchor_inner, self.end_inner, self._dir_inner
        else:
            s0, e0, direction = self.anchor_outer, self.end_outer, self._dir_outer
        a, b = self._cmp(s, s0), self._cmp(s, e0)
        if direction > 0:
            return a >= 0 and b < 0
        return a <= 0 and b > 0

    def translate(self, s: Slope) -> tuple[Slope, int]:
        """The representative of s's orbit inside the fundamental interval.

        Returns (theta^k s, k).
        """
        if self.side(s) == "left":
            s0, direction = self.anchor_inner, self._dir_inner
        else:
            s0, direction = self.anchor_outer, self._dir_outer
        fwd, bwd = self.matrix, _mat_adj(self.matrix)
        k = 0
        for _ in range(self.TRANSLATE_CAP):
            if self.contains(s):
                return s, k
            behind = self._cmp(s, s0) * direction < 0
            s = act_on_slope(fwd if behind else bwd, s)
            k += 1 if behind else -1
        raise ResourceLimitError(f"orbit translation of {s} did not terminate")


def orbit_representatives(theta, depth: int) -> dict:
    """One slope per theta-orbit among the depth-bounded slopes.

    Representatives are the slopes lying in the half-open fundamental
    intervals; "left" lists those on the inner side of the axis.
    """
    from .farey import enumerate_slopes

    dom = FundamentalDomain(theta)
    all_reps, left = [], []
    for s in enumerate_slopes(depth):
        if dom.contains(s):
            all_reps.append(s)
            if dom.side(s) == "left":
                left.append(s)
    return {"all": all_reps, "left": left}


# ---------------------------------------------------------------------------
# relative Q-conditions on the orbit space
# ---------------------------------------------------------------------------

FIXED_CHAR_TOL = 1e-8


def _check_fixed(triple: TraceTriple, theta, tol: float = FIXED_CHAR_TOL) -> None:
    image = apply_mapping_class(triple, theta)
    err = max(abs(a - b) for a, b in zip(image.as_tuple(), triple.as_tuple()))
    if err > tol:
        raise PreconditionError(
            f"character is not fixed by the mapping class (residual {err:.3g})")


def relative_bq(c: Character, theta, fuel: int) -> _bq.BqVerdict:
    """Q-conditions tested per theta-orbit of curves, with certificates.

    Same engine as decide_bq but triangles are identified modulo the
    mapping class, so a finite quotient sink certifies the conditions even
    though the corresponding region upstairs is infinite and periodic.
    Witness and certificate slopes are fundamental-domain representatives.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    theta_m = _require_anosov(_as_matrix(theta))
    _check_fixed(c.triple, theta_m)
    dom = FundamentalDomain(theta_m)

    def rep_slope(vec) -> Slope:
        return dom.translate(Slope(*vec))[0]

    def triangle_key(st):
        slopes = [Slope(*v) for v in st]
        k = min(dom.translate(s)[1] for s in slopes)
        power = _mat_power(theta_m, k)
        return frozenset(act_on_slope(power, s) for s in slopes)

    return _bq._search(c.triple, fuel, extended=False,
                       triangle_key=triangle_key, rep_slope=rep_slope)


def _mat_power(m: Matrix, k: int) -> Matrix:
    if k < 0:
        m, k = _mat_adj(m), -k
    out: Matrix = ((1, 0), (0, 1))
    while k:
        if k & 1:
            out = _mat_mul(out, m)
        m = _mat_mul(m, m)
        k >>= 1
    return out


# ---------------------------------------------------------------------------
# conjugating element and its complex length
# ---------------------------------------------------------------------------

# free-group words over X, Y: tuples with 1 = X, -1 = X^-1, 2 = Y, -2 = Y^-1

def _w_reduce(w):
    out = []
    for g in w:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


def _w_mul(*ws):
    cat = []
    for w in ws:
        cat.extend(w)
    return _w_reduce(cat)


def _w_inv(w):
    return tuple(-g for g in reversed(w))


def _aut_apply(auto, w):
    img = {1: auto[0], -1: _w_inv(auto[0]), 2: auto[1], -2: _w_inv(auto[1])}
    return _w_mul(*(img[g] for g in w)) if w else ()


def _aut_compose(f, g):
    return (_aut_apply(f, g[0]), _aut_apply(f, g[1]))


AUT_ID = ((1,), (2,))
AUT_T = ((1, 2), (2,))        # X -> XY, Y -> Y      (T = [[1,1],[0,1]])
AUT_T_INV = ((1, -2), (2,))
AUT_S = ((2,), (-1,))         # X -> Y, Y -> X^-1    (S = [[0,-1],[1,0]])

_COMMUTATOR = (1, 2, -1, -2)  # X Y X^-1 Y^-1, the boundary word


def _st_letters(g: Matrix):
    """Factor an SL(2,Z) matrix exactly into T-powers and S."""
    (a, b), (c, d) = g
    letters = []
    while c != 0:
        q = a // c
        if q:
            letters.append(("T", q))
        # peel g = T^q S g'  with  g' = S^-1 T^-q g
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
        letters.append(("S", 1))
    if a == 1:
        if b:
            letters.append(("T", b))
    else:  # a = d = -1: -I = S^2
        letters.append(("S", 1))
        letters.append(("S", 1))
        if b:
            letters.append(("T", -b))
    return letters


def _aut_of_matrix(g: Matrix):
    """A free-group automorphism inducing g on slopes, boundary-normalized.

    The S,T lift is corrected by an inner automorphism so that the commutator
    X Y X^-1 Y^-1 is fixed exactly; the remaining ambiguity (inner by powers
    of the commutator itself) is the documented normalization freedom.
    """
    if _mat_det(g) != 1:
        raise ValueError("automorphism lift implemented for det 1 only")
    auto = AUT_ID
    for kind, k in _st_letters(g):
        if kind == "S":
            auto = _aut_compose(auto, AUT_S)
        else:
            step = AUT_T if k > 0 else AUT_T_INV
            for _ in range(abs(k)):
                auto = _aut_compose(auto, step)
    img = _aut_apply(auto, _COMMUTATOR)
    prefix = []
    while len(img) > len(_COMMUTATOR) and img[0] == -img[-1]:
        prefix.append(img[0])
        img = img[1:-1]
    rotations = {tuple(_COMMUTATOR[j:] + _COMMUTATOR[:j]): _COMMUTATOR[:j] for j in range(4)}
    if img not in rotations:
        raise RuntimeError(f"boundary word not preserved: {img}")
    w = _w_mul(tuple(prefix), _w_inv(rotations[img]))
    wi = _w_inv(w)
    auto = (_w_mul(wi, auto[0], w), _w_mul(wi, auto[1], w))
    assert _aut_apply(auto, _COMMUTATOR) == _COMMUTATOR
    return auto


def _rho(word, A, B):
    out = np.eye(2, dtype=complex)
    mats = {1: A, -1: _sl2_inv(A), 2: B, -2: _sl2_inv(B)}
    for g in word:
        out = out @ mats[g]
    return out


def _sl2_inv(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex)


@dataclass(frozen=True)
class ConjugatorReport:
    trace_a: complex
    length_a: complex
    equation_residual: float

    def to_json(self) -> dict:
        return {
            "trace_a": [self.trace_a.real, self.trace_a.imag],
            "length_a": [self.length_a.real, self.length_a.imag],
            "equation_residual": self.equation_residual,
        }


def recover_conjugator(c: Character, theta, tol: float = 1e-8) -> ConjugatorReport:
    """Solve A rho(.) A^-1 = rho(theta^-1 .) for A, up to sign.

    rho comes from the explicit-matrix normal form; the generator images
    under the boundary-normalized lift of theta^-1 give eight linear
    equations whose one-dimensional null space is A up to scale.  A is
    normalized to det 1; the sign stays free, matching the +-l(A) in the
    half-plane identity.
    """
    theta_m = _require_anosov(_as_matrix(theta))
    _check_fixed(c.triple, theta_m)
    if "reducible" in c.class_tags:
        raise PreconditionError("conjugator is not determined for reducible characters")
    A0, B0 = realize_matrices(c.triple)
    auto = _aut_of_matrix(_mat_adj(theta_m))  # lift of theta^-1
    U, V = _rho(auto[0], A0, B0), _rho(auto[1], A0, B0)

    rows = []
    for G, H in ((A0, U), (B0, V)):
        for i in range(2):
            for j in range(2):
                row = np.zeros(4, dtype=complex)
                for k in range(2):
                    row[2 * i + k] += G[k, j]
                    row[2 * k + j] -= H[i, k]
                rows.append(row)
    M = np.array(rows)
    _, sing, vh = np.linalg.svd(M)
    scale = max(1.0, sing[0])
    if sing[-2] <= tol * scale:
        raise PreconditionError("conjugation system is rank-deficient (reducible pair)")
    A = vh[-1].conj().reshape(2, 2)  # right singular vector of the least singular value
    detA = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(detA) < 1e-12:
        raise PreconditionError("conjugator is singular")
    A = A / cmath.sqrt(detA)
    err = max(
        float(np.max(np.abs(A @ A0 @ _sl2_inv(A) - U))),
        float(np.max(np.abs(A @ B0 @ _sl2_inv(A) - V))),
    )
    if err > max(tol, sing[-1] / scale * 100):
        raise PreconditionError(f"conjugation equations unsatisfied (residual {err:.3g})")
    tr = complex(np.trace(A))
    if tr.real < 0 or (tr.real == 0 and tr.imag < 0):
        tr = -tr
    return ConjugatorReport(tr, complex_length(tr), err)


# ---------------------------------------------------------------------------
# bundle identities
# ---------------------------------------------------------------------------

def _domain_arc_filter(dom: FundamentalDomain):
    """Whether a subtree's arc can still meet the fundamental intervals.

    A subtree state (a, b, c) spans the open arc between a and b on the c
    side; it can contain orbit representatives iff a vertex lies in a
    fundamental interval or an interval's anchor lies strictly inside the
    arc.  Subtrees shrinking onto the irrational axis endpoints eventually
    fail both tests and drop out of the convergence bookkeeping.
    """
    from .farey import _canon, _orient

    anchors = (dom.anchor_inner.vec, dom.anchor_outer.vec)

    def overlaps(st) -> bool:
        av, bv, cv = (_canon(*v) for v in st)
        for v in (av, bv, cv):
            if dom.contains(Slope(*v)):
                return True
        side = _orient(av, cv, bv)
        for s0 in anchors:
            if s0 not in (av, bv) and _orient(av, s0, bv) == side:
                return True
        return False

    return overlaps


@dataclass(frozen=True)
class BundleIdentityReport:
    full: SeriesReport
    half: SeriesReport
    conjugator: ConjugatorReport
    half_sign: int           # sign of the longitude realizing the half residual
    meridian_correction: int  # the half-meridian sign in longitude = l(A) + corr*nu
    longitude: complex        # the realized target, sign included

    def to_json(self) -> dict:
        return {
            "full": self.full.to_json(),
            "half": self.half.to_json(),
            "conjugator": self.conjugator.to_json(),
            "half_sign": self.half_sign,
            "meridian_correction": self.meridian_correction,
            "longitude": [self.longitude.real, self.longitude.imag],
        }


def evaluate_bundle_identities(c: Character, theta, tol: float = 1e-6,
                               max_terms: int = 200_000,
                               check_relative: bool = True,
                               fuel: int = 100_000) -> BundleIdentityReport:
    """Orbit sums of the general series: full against 0, half against +-l(A).

    Requires a theta-fixed character; when check_relative is set, the
    relative Q-conditions must certify satisfies first.  Full sums over one
    representative per orbit (both sides of the axis), half over the inner
    ("left") side only.  Residuals are mod 2*pi*i.

    The half-sum target is the boundary longitude +-(l(A) + e*nu) with
    e in {+1, -1}: solving the conjugation equations under the
    commutator-fixing lift leaves a half-meridian framing factor whose sign
    is an orientation choice, on top of the sign freedom of A itself.  The
    realized signs are reported; at the cusp (nu = 0) the target collapses
    to +-l(A).
    """
    theta_m = _require_anosov(_as_matrix(theta))
    _check_fixed(c.triple, theta_m)
    if check_relative:
        verdict = relative_bq(c, theta_m, fuel)
        if verdict.status != "satisfies":
            raise PreconditionError(
                f"relative Q-conditions are {verdict.status}; pass check_relative=False to override")
    dom = FundamentalDomain(theta_m)
    nu = nu_from_kappa(c.kappa)
    arc_filter = _domain_arc_filter(dom)

    full_sum, full_count, full_tail, _, full_conv, full_div = _sum_layers(
        c.triple, nu, GENERAL, tol, max_terms, include=dom.contains,
        arc_filter=arc_filter)
    half_sum, half_count, half_tail, _, half_conv, half_div = _sum_layers(
        c.triple, nu, GENERAL, tol, max_terms,
        include=lambda s: dom.contains(s) and dom.side(s) == "left",
        arc_filter=arc_filter)

    conj = recover_conjugator(c, theta_m)
    full = SeriesReport(GENERAL, nu, full_sum, full_count, full_tail,
                        residual_mod_2pi_i(full_sum, 0), full_conv, full_div)
    best = None
    for corr in (1, -1):
        for sign in (1, -1):
            target = sign * (conj.length_a + corr * nu)
            r = residual_mod_2pi_i(half_sum, target)
            if best is None or abs(r) < abs(best[0]):
                best = (r, sign, corr, target)
    residual, sign, corr, target = best
    half = SeriesReport(GENERAL, nu, half_sum, half_count, half_tail,
                        residual, half_conv, half_div)
    return BundleIdentityReport(full, half, conj, sign, corr, target)


# ---------------------------------------------------------------------------
# characters fixed by a mapping class
# ---------------------------------------------------------------------------

def fixed_characters(theta, kappa_target: complex, *, grid: int = 13,
                     radius: float = 6.0, newton_tol: float = 1e-12,
                     max_roots: int = 16, max_iter: int = 50,
                     seed: int = 0) -> list[TraceTriple]:
    """Numerically solve apply(t) = t together with kappa(t) = kappa_target.

    Multistart Gauss-Newton over grid**3 deterministic pseudo-random starts
    in the polydisk of the given radius; returned triples have residual
    below newton_tol and pairwise distance above 10 * newton_tol.  The list
    may be incomplete (multistart is a heuristic).
    """
    apply_fn = compile_apply(theta)
    kt = complex(kappa_target)
    n = grid ** 3
    rng = np.random.default_rng(seed)
    rad = radius * np.sqrt(rng.uniform(0, 1, (n, 3)))
    phi = rng.uniform(0, 2 * math.pi, (n, 3))
    pts = rad * np.exp(1j * phi)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]

    def residual(x, y, z):
        fx, fy, fz = apply_fn(x, y, z)
        k = x * x + y * y + z * z - x * y * z - 2
        return np.stack([fx - x, fy - y, fz - z, k - kt], axis=-1)

    h = 1e-7
    for _ in range(max_iter):
        F = residual(x, y, z)
        ok = np.isfinite(F).all(axis=-1)
        if not ok.any():
            break
        cols = []
        for d in range(3):
            dx = np.where(np.arange(3)[None, :] == d, h * (1 + np.abs(np.stack([x, y, z], -1))), 0)
            Fd = residual(x + dx[:, 0], y + dx[:, 1], z + dx[:, 2])
            step = dx[:, d]
            cols.append((Fd - F) / step[:, None])
        J = np.stack(cols, axis=-1)          # (n, 4, 3)
        JH = np.conj(np.swapaxes(J, -1, -2))  # (n, 3, 4)
        lhs = JH @ J + 1e-14 * np.eye(3)
        rhs = JH @ F[..., None]
        with np.errstate(all="ignore"):
            try:
                delta = np.linalg.solve(lhs, rhs)[..., 0]
            except np.linalg.LinAlgError:
                break
        bad = ~np.isfinite(delta).all(axis=-1)
        delta[bad] = 0
        x, y, z = x - delta[:, 0], y - delta[:, 1], z - delta[:, 2]

    F = residual(x, y, z)
    res = np.abs(F).max(axis=-1)
    good = np.isfinite(res) & (res < newton_tol)
    # degenerate (multiple) roots converge with coordinate scatter near
    # sqrt(newton_tol), so the pairwise-distance floor must sit above that
    dedupe = max(10 * newton_tol, 1e-6)
    roots: list[TraceTriple] = []
    order = np.argsort(np.where(good, res, np.inf))
    for idx in order:
        if not good[idx]:
            break
        cand = (complex(x[idx]), complex(y[idx]), complex(z[idx]))
        if any(max(abs(a - b) for a, b in zip(cand, r.as_tuple())) <= dedupe
               for r in roots):
            continue
        roots.append(TraceTriple(*cand))
        if len(roots) >= max_roots:
            break
    roots.sort(key=lambda t: (round(t.x.real, 9), round(t.x.imag, 9),
                              round(t.y.real, 9), round(t.y.imag, 9),
                              round(t.z.real, 9), round(t.z.imag, 9)))
    return roots
