"""McShane-type series over simple closed curves.

For a character with commutator trace kappa, nu = acosh(-kappa/2) and the
general series sums log((e^nu + e^l) / (e^-nu + e^l)) over all slopes, where
l is the complex length of the trace; the value is nu mod 2*pi*i exactly when
the extended Q-conditions hold.  At kappa = -2 every general term vanishes
and the first-order term in nu gives the cusp series sum 1/(1 + e^l) = 1/2.

Terms are accumulated in the deterministic breadth-first slope order of
`farey`, layer by layer; a layer-sum monitor drives convergence and
divergence detection, and a geometric heuristic bounds the tail.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .characters import Character, acosh_branch
from .errors import PreconditionError, SingularTermError
from .farey import ROOT, Slope, child

GENERAL = "general"
CUSP = "cusp"

TAIL_RATIO_FLOOR = 1.05
MAX_LAYERS = 64
DIVERGENCE_WINDOW = 5


def _abs(z) -> float:
    """abs() saturating to inf near the float maximum."""
    try:
        return abs(z)
    except OverflowError:
        return math.inf


def nu_from_kappa(kappa: complex) -> complex:
    """Half the complex boundary length: acosh(-kappa/2), Re >= 0, Im in (-pi, pi]."""
    return acosh_branch(-complex(kappa) / 2)


def exp_length(trace: complex) -> complex:
    """e^l for l the complex length of the trace, via the |.| >= 1 root.

    e^(l/2) = (t + sqrt(t^2 - 4))/2 with the sign chosen so its modulus is
    at least one; squaring avoids overflow until |t| ~ 1e154.
    """
    t = complex(trace)
    if not cmath.isfinite(t) or _abs(t) > 1e150:
        return complex(math.inf, 0)
    s = cmath.sqrt(t * t - 4)
    # picking the larger of t +- s avoids the cancellation garbage the other
    # sign produces when s is nearly -t
    half = (t + s) / 2 if abs(t + s) >= abs(t - s) else (t - s) / 2
    return half * half


def series_term(trace: complex, nu: complex, variant: str,
                slope: Slope | None = None) -> complex:
    """One summand: the general log term or the cusp term 1/(1 + e^l)."""
    el = exp_length(trace)
    if variant == CUSP:
        if el == -1:
            raise SingularTermError(slope, "cusp term pole (e^l = -1)")
        if cmath.isinf(el.real) or cmath.isinf(el.imag):
            return 0j
        return 1 / (1 + el)
    if variant != GENERAL:
        raise ValueError(f"unknown variant {variant!r}")
    if cmath.isinf(el.real) or cmath.isinf(el.imag):
        return 0j
    inv = 1 / el  # |e^-l| <= 1
    num = 1 + cmath.exp(nu) * inv
    den = 1 + cmath.exp(-nu) * inv
    if num == 0 or den == 0:
        raise SingularTermError(slope, "general term pole")
    return cmath.log(num / den)


def residual_mod_2pi_i(value: complex, target: complex) -> complex:
    """value - target - 2*pi*i*k for the k minimizing the modulus (ties -> smaller |k|)."""
    diff = complex(value) - complex(target)
    f = diff.imag / (2 * math.pi)
    k0 = math.floor(f)
    candidates = sorted((abs(f - k), abs(k), k) for k in (k0, k0 + 1))
    k = candidates[0][2]
    return diff - complex(0, 2 * math.pi * k)


@dataclass(frozen=True)
class SeriesReport:
    variant: str
    nu: complex
    partial_sum: complex
    term_count: int
    tail_bound: float
    residual: complex
    converged: bool
    diverged: bool = False

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "nu": [self.nu.real, self.nu.imag],
            "partial_sum": [self.partial_sum.real, self.partial_sum.imag],
            "term_count": self.term_count,
            "tail_bound": self.tail_bound,
            "residual": [self.residual.real, self.residual.imag],
            "converged": self.converged,
            "diverged": self.diverged,
        }


def _subtree_tail(term_abs: float, gamma: float) -> float:
    """Heuristic bound on a subtree's remaining mass from its root term.

    Children terms scale like T**gamma when log|trace| grows by >= gamma per
    step; levels double in width, so the tail is dominated by
    2*T**gamma / (1 - 2*T**(gamma*(gamma-1))) when the ratio converges.
    """
    if term_abs <= 0:
        return 0.0
    if term_abs >= 1:
        return math.inf
    ratio = 2 * term_abs ** (gamma * (gamma - 1))
    if ratio >= 1:
        return math.inf
    return 2 * term_abs ** gamma / (1 - ratio)


def _sum_layers(triple, nu: complex, variant: str, tol: float, max_terms: int,
                include=None, arc_filter=None):
    """Layered accumulation shared by the plain and orbit-restricted sums.

    `include` filters which slopes are added (orbit sums pass a fundamental
    domain test); `arc_filter(state)` tells whether a subtree's arc can still
    contain included slopes, so irrelevant branches drop out of the tail
    estimate and the convergence monitor.  Returns
    (total, count, tail, layer_history, converged, diverged).
    """
    x, y, z = triple.as_tuple()
    total = 0j
    count = 0
    history: list[float] = []

    def emit(slope_vec, trace) -> float:
        nonlocal total, count
        s = Slope(*slope_vec)
        t = series_term(trace, nu, variant, slope=s)
        if include is None or include(s):
            total += t
            count += 1
            return abs(t)
        return 0.0

    history.append(sum(emit(v, t) for v, t in zip(ROOT, (x, y, z))))

    frontier = [
        (child(ROOT, d), tr)
        for d, tr in (("L", (x, z, x * z - y)), ("R", (z, y, z * y - x)),
                      ("B", (y, x, x * y - z)))
    ]
    if arc_filter is not None:
        frontier = [f for f in frontier if arc_filter(f[0])]
    tail = math.inf
    for _ in range(MAX_LAYERS):
        layer_abs = 0.0
        gammas = []
        term_abs = []
        for st, tr in frontier:
            s = Slope(*st[2])
            t = series_term(tr[2], nu, variant, slope=s)
            ta = _abs(t)
            term_abs.append(ta)
            if include is None or include(s):
                total += t
                count += 1
                layer_abs += ta
            # lineage growth measured against the larger edge trace: along the
            # slow fan branches that is the previous new vertex, keeping the
            # per-step estimate conservative
            t_parent = max(_abs(tr[0]), _abs(tr[1]))
            t_new = _abs(tr[2])
            if math.e < t_new < math.inf and math.e < t_parent < math.inf:
                gammas.append(math.log(t_new) / math.log(t_parent))
        history.append(layer_abs)
        gamma = max(TAIL_RATIO_FLOOR, min(gammas)) if gammas else TAIL_RATIO_FLOOR
        tail = 0.0
        for a in term_abs:
            tail += _subtree_tail(a, gamma)
            if tail == math.inf:
                break
        if layer_abs < tol and tail < tol:
            return total, count, tail, history, True, False
        if count >= max_terms:
            return total, count, tail, history, False, False
        if len(history) > DIVERGENCE_WINDOW:
            recent = history[-(DIVERGENCE_WINDOW + 1):]
            if all(b >= a for a, b in zip(recent, recent[1:])):
                return total, count, math.inf, history, False, True
        nxt = []
        for st, tr in frontier:
            ta, tb, tc = tr
            nxt.append((child(st, "L"), (ta, tc, ta * tc - tb)))
            nxt.append((child(st, "R"), (tc, tb, tc * tb - ta)))
        if arc_filter is not None:
            nxt = [f for f in nxt if arc_filter(f[0])]
        frontier = nxt
        if not frontier:
            return total, count, 0.0, history, True, False
    return total, count, tail, history, False, False


def evaluate_identity(c: Character, variant: str, tol: float = 1e-8,
                      max_terms: int = 200_000) -> SeriesReport:
    """Sum the chosen series and report the residual against its target.

    general: residual against nu mod 2*pi*i; requires kappa != 2 (reducible
    characters are rejected up front, they never satisfy the conditions).
    cusp: requires kappa = -2; residual against 1/2.
    A divergence report (converged False, diverged True) is returned when
    layer sums fail to decrease for five consecutive depths.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if variant == CUSP:
        if abs(c.kappa + 2) > 1e-9:
            raise PreconditionError("cusp series requires kappa = -2")
        nu = 0j
        target = 0.5 + 0j
    elif variant == GENERAL:
        if abs(c.kappa - 2) <= 1e-9:
            raise PreconditionError("general series rejects reducible kappa = 2")
        nu = nu_from_kappa(c.kappa)
        target = nu
    else:
        raise ValueError(f"unknown variant {variant!r}")
    total, count, tail, _, converged, diverged = _sum_layers(
        c.triple, nu, variant, tol, max_terms)
    if variant == CUSP:
        residual = total - target
    else:
        residual = residual_mod_2pi_i(total, target)
    return SeriesReport(variant, nu, total, count, tail, residual, converged, diverged)
