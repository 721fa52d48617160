"""Trace coordinates for SL(2,C) characters of the one-holed torus.

A character is a point (x, y, z) in C^3, the traces of rho(X), rho(Y),
rho(XY) for a fixed generator pair; x, y, z are attached to the slopes
0/1, 1/0, 1/1.  The commutator trace is kappa = x^2 + y^2 + z^2 - xyz - 2
and the trace at any other slope follows from the flip recursion
new = (product of the two edge traces) - old, one flip per step of the
Farey-tree walk of `farey.walk_letters`.

Every operation here is pure; a TraceCache must not be shared between
concurrent writers (use one per evaluation context).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleUnavailableError, ResourceLimitError
from .farey import BASE_SLOPES, ROOT, Slope, walk_letters

DEFAULT_CLASS_TOL = 1e-9


@dataclass(frozen=True)
class TraceTriple:
    """Traces (x, y, z) at the base slopes 0/1, 1/0, 1/1; any point of C^3."""

    x: complex
    y: complex
    z: complex

    def __post_init__(self):
        object.__setattr__(self, "x", complex(self.x))
        object.__setattr__(self, "y", complex(self.y))
        object.__setattr__(self, "z", complex(self.z))

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return (self.x, self.y, self.z)

    def to_json(self) -> dict:
        return {
            "x": [self.x.real, self.x.imag],
            "y": [self.y.real, self.y.imag],
            "z": [self.z.real, self.z.imag],
        }

    def __str__(self) -> str:
        return f"({self.x}, {self.y}, {self.z})"


def kappa(t: TraceTriple) -> complex:
    """Commutator trace x^2 + y^2 + z^2 - xyz - 2."""
    x, y, z = t.as_tuple()
    return x * x + y * y + z * z - x * y * z - 2


def markov_flip(t: TraceTriple, index: str) -> TraceTriple:
    """Replace one coordinate by (product of the other two) - itself.

    An involution that preserves kappa; index is one of "x", "y", "z".
    """
    x, y, z = t.as_tuple()
    if index == "x":
        return TraceTriple(y * z - x, y, z)
    if index == "y":
        return TraceTriple(x, x * z - y, z)
    if index == "z":
        return TraceTriple(x, y, x * y - z)
    raise ValueError(f"index must be one of x, y, z, not {index!r}")


def classify_character(t: TraceTriple, tol: float = DEFAULT_CLASS_TOL) -> frozenset[str]:
    """Tags from {real, imaginary, dihedral, reducible, generic} holding within tol.

    "imaginary" requires exactly two coordinates purely imaginary and the
    third real, and is suppressed when the triple is real outright (a real
    triple with two zeros is dihedral, not imaginary).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    coords = t.as_tuple()
    tags = set()
    real = all(abs(c.imag) <= tol for c in coords)
    if real:
        tags.add("real")
    n_imag = sum(1 for c in coords if abs(c.real) <= tol)
    third_real = [c for c in coords if abs(c.real) > tol]
    if not real and n_imag == 2 and len(third_real) == 1 and abs(third_real[0].imag) <= tol:
        tags.add("imaginary")
    if sum(1 for c in coords if abs(c) <= tol) >= 2:
        tags.add("dihedral")
    if abs(kappa(t) - 2) <= tol:
        tags.add("reducible")
    if not tags:
        tags.add("generic")
    return frozenset(tags)


@dataclass(frozen=True)
class Character:
    """A trace triple with its cached commutator trace and class tags."""

    triple: TraceTriple
    kappa: complex = field(init=False)
    class_tags: frozenset[str] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "kappa", kappa(self.triple))
        object.__setattr__(self, "class_tags", classify_character(self.triple))

    @classmethod
    def from_values(cls, x, y, z) -> "Character":
        return cls(TraceTriple(x, y, z))


class TraceCache:
    """Memo of slope -> trace for one character, seeded with the base triple."""

    def __init__(self, triple: TraceTriple):
        self.triple = triple
        self._map: dict[Slope, complex] = dict(zip(BASE_SLOPES, triple.as_tuple()))

    def __contains__(self, s: Slope) -> bool:
        return s in self._map

    def __getitem__(self, s: Slope) -> complex:
        return self._map[s]

    def store(self, s: Slope, value: complex) -> None:
        self._map[s] = value

    def __len__(self) -> int:
        return len(self._map)


def _as_triple(c) -> TraceTriple:
    return c.triple if isinstance(c, Character) else c


def trace_at_slope(c, s: Slope, cache: TraceCache | None = None,
                   cap: int = 10_000) -> complex:
    """Trace of the character at the curve of slope s.

    Walks the Farey tree from the base triangle applying one flip per step;
    the tree structure makes the value path-independent.  Intermediate values
    are memoized in `cache` when given.
    """
    triple = _as_triple(c)
    if cache is not None and s in cache:
        return cache[s]
    letters = walk_letters(s, cap=cap)
    if not letters:
        value = dict(zip(BASE_SLOPES, triple.as_tuple()))[s]
        if cache is not None:
            cache.store(s, value)
        return value
    st = ROOT
    tr = triple.as_tuple()
    for letter in letters:
        ta, tb, tc = tr
        if letter == "L":
            st_new = (st[0], st[2], (st[0][0] + st[2][0], st[0][1] + st[2][1]))
            tr = (ta, tc, ta * tc - tb)
        elif letter == "R":
            st_new = (st[2], st[1], (st[2][0] + st[1][0], st[2][1] + st[1][1]))
            tr = (tc, tb, tc * tb - ta)
        else:  # B, first letter only
            a, b = st[0], st[1]
            st_new = ((-b[0], -b[1]), a, (a[0] - b[0], a[1] - b[1]))
            tr = (tb, ta, ta * tb - tc)
        st = st_new
        if cache is not None:
            cache.store(Slope(*st[2]), tr[2])
    return tr[2]


# ---------------------------------------------------------------------------
# complex length
# ---------------------------------------------------------------------------

def acosh_branch(z: complex) -> complex:
    """Inverse cosh with Re >= 0 and Im in (-pi, pi]."""
    z = complex(z)
    if z.imag == 0:
        z = complex(z.real, 0.0)  # kill signed zero so the cut maps to +pi
    w = cmath.acosh(z)
    if w.imag == -math.pi:
        w = complex(w.real, math.pi)
    return w


def complex_length(trace: complex) -> complex:
    """Complex translation length 2*acosh(trace/2) under the branch above."""
    return 2 * acosh_branch(complex(trace) / 2)


# ---------------------------------------------------------------------------
# explicit-matrix oracle
# ---------------------------------------------------------------------------

def realize_matrices(t: TraceTriple, tol: float = 1e-9):
    """A pair (A, B) in SL(2,C) with tr A = x, tr B = y, tr AB = z.

    Normal form: A = [[x, -1], [1, 0]], B = [[0, xi], [-1/xi, y]] with
    xi + 1/xi = z and |xi| >= 1.  Deterministic; intended as an independent
    oracle for trace_at_slope, not as a geometric normalization.
    """
    x, y, z = t.as_tuple()
    if not all(cmath.isfinite(v) for v in (x, y, z)):
        raise OracleUnavailableError("non-finite trace coordinates")
    s = cmath.sqrt(z * z - 4)
    xi = (z + s) / 2 if abs(z + s) >= abs(z - s) else (z - s) / 2
    if xi == 0:  # pragma: no cover - |xi| >= 1 excludes 0
        raise OracleUnavailableError("singular normal form")
    A = np.array([[x, -1], [1, 0]], dtype=complex)
    B = np.array([[0, xi], [-1 / xi, y]], dtype=complex)
    scale = max(1.0, abs(x), abs(y), abs(z))
    for got, want in ((np.trace(A), x), (np.trace(B), y), (np.trace(A @ B), z)):
        if abs(got - want) > tol * scale:
            raise OracleUnavailableError(f"normal form missed trace: {got} vs {want}")
    return A, B


def _sl2_inv(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex)


def oracle_trace_at_slope(t: TraceTriple, s: Slope, tol: float = 1e-9) -> complex:
    """Trace of the explicit matrix word for slope s; independent of the flip walk."""
    A, B = realize_matrices(t, tol=tol)
    mats = {Slope(0, 1): A, Slope(1, 0): B, Slope(1, 1): A @ B}
    if s in mats:
        return complex(np.trace(mats[s]))
    ma, mb = A, B
    mc = A @ B
    for letter in walk_letters(s):
        if letter == "L":
            ma, mb, mc = ma, mc, ma @ mc
        elif letter == "R":
            ma, mb, mc = mc, mb, mc @ mb
        else:  # B: (a, b, c) -> (a b^-1 a^-1, a, a b^-1)
            ib = _sl2_inv(mb)
            ma, mb, mc = ma @ ib @ _sl2_inv(ma), ma, ma @ ib
    return complex(np.trace(mc))
