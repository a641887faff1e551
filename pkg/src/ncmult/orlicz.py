"""Orlicz functions and their calculus.

An Orlicz function is a convex, left-continuous map ``[0, inf) -> [0, inf]``
with ``phi(0) = 0`` that tends to infinity.  The family here is closed and
introspectable: scaled powers, zero/infinity thresholds, piecewise
shifted-power rules, compositions and numerically evaluated conjugates.

All evaluation is vectorised over NumPy arrays; scalars in give floats out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "OrliczFunction",
    "PowerScaled",
    "ZeroInfinityThreshold",
    "Segment",
    "PiecewiseConvex",
    "Composed",
    "NumericConjugate",
    "GrowthCertificate",
    "evaluate",
    "inverse_rc",
    "conjugate",
    "conjugate_eval",
    "check_delta2",
    "check_nabla_prime",
    "check_inverse_factorization",
    "compose",
    "simplify",
    "convexity_defect",
    "log_grid",
    "parse_grid",
    "from_dict",
]

INF = math.inf
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_TINY = 1e-300

# bracket expansion stops here; a still-increasing objective means divergence
CONJUGATE_CEILING = 1e15


class DomainError(ValueError):
    """Argument outside ``[0, inf)``."""


def _nonneg(t: Any) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"Orlicz functions are defined on [0, inf); got {t!r}")
    return arr


def _vectorised(fn, t):
    arr = _nonneg(t)
    out = fn(np.atleast_1d(arr).ravel()).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def log_grid(lo: float = 1e-4, hi: float = 1e4, per_decade: int = 64) -> np.ndarray:
    """Logarithmic grid with ``per_decade`` points per decade, endpoints included."""
    if not (0 < lo < hi):
        raise DomainError("grid bounds must satisfy 0 < lo < hi")
    n = int(round(math.log10(hi / lo) * per_decade)) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)


def parse_grid(spec: str) -> np.ndarray:
    """Parse ``"log:LO:HI:PER_DECADE"`` or ``"list:a,b,c"``."""
    kind, _, rest = spec.partition(":")
    if kind == "log":
        lo, hi, per = rest.split(":")
        return log_grid(float(lo), float(hi), int(per))
    if kind == "list":
        return np.array(sorted(float(v) for v in rest.split(",")))
    raise ValueError(f"unknown grid spec {spec!r}; expected 'log:lo:hi:n' or 'list:..'")


class OrliczFunction:
    """Base class; subclasses are frozen dataclasses.

    Subclasses implement ``_eval`` on 1-d float arrays (``inf`` allowed in the
    input) and report the structural constants used by conjugation.
    """

    kind = "abstract"

    def __call__(self, t):
        return _vectorised(self._eval, t)

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inverse(self, t: np.ndarray) -> np.ndarray:
        return _bisect_inverse(self, t)

    @property
    def a_phi(self) -> float:
        """``inf{t > 0 : phi(t) > 0}``."""
        raise NotImplementedError

    @property
    def b_phi(self) -> float:
        """``sup{t > 0 : phi(t) < inf}``."""
        raise NotImplementedError

    @property
    def initial_slope(self) -> float:
        """``lim_{t -> 0+} phi(t) / t``."""
        raise NotImplementedError

    @property
    def asymptotic_slope(self) -> float:
        """``lim_{t -> inf} phi(t) / t`` (``inf`` for superlinear growth)."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerScaled(OrliczFunction):
    """``phi(t) = a * t**p`` with ``a > 0``, ``p >= 1``."""

    a: float = 1.0
    p: float = 2.0
    kind = "power"

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"power coefficient must be positive, got {self.a}")
        if not (self.p >= 1 and math.isfinite(self.p)):
            raise ValueError(f"power exponent must be >= 1, got {self.p}")

    def _eval(self, t):
        with np.errstate(over="ignore"):
            return self.a * t**self.p

    def _inverse(self, t):
        return (t / self.a) ** (1.0 / self.p)

    a_phi = 0.0
    b_phi = INF

    @property
    def initial_slope(self):
        return self.a if self.p == 1 else 0.0

    @property
    def asymptotic_slope(self):
        return self.a if self.p == 1 else INF

    def to_dict(self):
        return {"kind": "power", "a": self.a, "p": self.p}


@dataclass(frozen=True)
class ZeroInfinityThreshold(OrliczFunction):
    """``phi(t) = 0`` for ``t <= b`` and ``inf`` beyond (the ``L^inf`` function)."""

    b: float = 1.0
    kind = "threshold"

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"threshold cutoff must be positive and finite, got {self.b}")

    def _eval(self, t):
        return np.where(t <= self.b, 0.0, INF)

    def _inverse(self, t):
        return np.full_like(t, self.b)

    @property
    def a_phi(self):
        return self.b

    @property
    def b_phi(self):
        return self.b

    initial_slope = 0.0
    asymptotic_slope = INF

    def to_dict(self):
        return {"kind": "threshold", "b": self.b}


@dataclass(frozen=True)
class Segment:
    """Rule ``v0 + slope*(t - x0) + coef*(t - x0)**p`` on one piece."""

    coef: float = 0.0
    p: float = 1.0
    slope: float = 0.0

    def to_dict(self):
        out = {"coef": self.coef, "p": self.p}
        if self.slope:
            out["slope"] = self.slope
        return out


@dataclass(frozen=True)
class PiecewiseConvex(OrliczFunction):
    """Continuous piecewise rule over ordered breakpoints starting at 0.

    Segment ``j`` covers ``[x_j, x_{j+1})`` (the last one extends to
    infinity) and adds ``slope_j*(t - x_j) + coef_j*(t - x_j)**p_j`` to the
    value accumulated at ``x_j``.  Convexity is enforced by requiring slopes
    not to drop across breakpoints.
    """

    breakpoints: tuple[float, ...]
    segments: tuple[Segment, ...]
    kind = "piecewise"

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        segs = tuple(s if isinstance(s, Segment) else Segment(**s) for s in self.segments)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "segments", segs)
        if not bps or bps[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if any(b1 <= b0 for b0, b1 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(segs) != len(bps):
            raise ValueError("need exactly one segment per breakpoint")
        for s in segs:
            if s.coef < 0 or s.slope < 0 or s.p < 1:
                raise ValueError(f"segment {s} needs coef >= 0, slope >= 0, p >= 1")
        last = segs[-1]
        if last.coef == 0 and last.slope == 0:
            raise ValueError("last segment must grow (positive coef or slope)")
        for j in range(len(segs) - 1):
            left = self._end_slope(j)
            if segs[j + 1].slope + (segs[j + 1].coef if segs[j + 1].p == 1 else 0.0) < left * (1 - 1e-12):
                raise ValueError(f"slope drops at breakpoint {bps[j + 1]}: not convex")

    def _end_slope(self, j: int) -> float:
        s = self.segments[j]
        length = self.breakpoints[j + 1] - self.breakpoints[j]
        return s.slope + s.coef * s.p * length ** (s.p - 1)

    @cached_property
    def _tables(self):
        x = np.array(self.breakpoints)
        coef = np.array([s.coef for s in self.segments])
        p = np.array([s.p for s in self.segments])
        slope = np.array([s.slope for s in self.segments])
        v = np.zeros_like(x)
        for j in range(1, len(x)):
            d = x[j] - x[j - 1]
            v[j] = v[j - 1] + slope[j - 1] * d + coef[j - 1] * d ** p[j - 1]
        return x, v, coef, p, slope

    def _eval(self, t):
        x, v, coef, p, slope = self._tables
        idx = np.searchsorted(x, t, side="right") - 1
        finite = np.isfinite(t)
        dt = np.where(finite, t - x[idx], 0.0)
        with np.errstate(over="ignore"):
            out = v[idx] + slope[idx] * dt + coef[idx] * dt ** p[idx]
        return np.where(finite, out, INF)

    @property
    def a_phi(self):
        for x, s in zip(self.breakpoints, self.segments):
            if s.coef > 0 or s.slope > 0:
                return x
        return INF  # unreachable after validation

    b_phi = INF

    @property
    def initial_slope(self):
        s = self.segments[0]
        return s.slope + (s.coef if s.p == 1 else 0.0)

    @property
    def asymptotic_slope(self):
        s = self.segments[-1]
        if s.coef > 0 and s.p > 1:
            return INF
        return s.slope + s.coef

    def to_dict(self):
        return {
            "kind": "piecewise",
            "breakpoints": list(self.breakpoints),
            "segments": [s.to_dict() for s in self.segments],
        }


@dataclass(frozen=True)
class Composed(OrliczFunction):
    """``outer(inner(t))``; convexity is checked on a grid, not assumed."""

    outer: OrliczFunction
    inner: OrliczFunction
    convex_on_grid: bool | None = field(default=None, compare=False)
    convexity_defect: float | None = field(default=None, compare=False)
    kind = "compose"

    def _eval(self, t):
        return self.outer._eval(self.inner._eval(t))

    def _inverse(self, t):
        # {s : outer(s) > u} is open because outer is left-continuous, so the
        # right-continuous inverse of the composite factors exactly
        return self.inner._inverse(self.outer._inverse(t))

    @cached_property
    def a_phi(self):
        return float(self.inner._inverse(np.array([self.outer.a_phi]))[0]) if self.outer.a_phi > 0 else self.inner.a_phi

    @cached_property
    def b_phi(self):
        if math.isinf(self.outer.b_phi):
            return self.inner.b_phi
        reach = float(self.inner._inverse(np.array([self.outer.b_phi]))[0])
        return min(self.inner.b_phi, reach)

    @cached_property
    def initial_slope(self):
        if self.a_phi > 0:
            return 0.0
        return self.outer.initial_slope * self.inner.initial_slope

    @cached_property
    def asymptotic_slope(self):
        if math.isfinite(self.b_phi):
            return INF
        so, si = self.outer.asymptotic_slope, self.inner.asymptotic_slope
        if math.isinf(so) or math.isinf(si):
            return INF
        return so * si

    def to_dict(self):
        return {"kind": "compose", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class NumericConjugate(OrliczFunction):
    """Complementary function ``s -> sup_t (s t - base(t))`` evaluated numerically."""

    base: OrliczFunction
    kind = "conjugate"

    def _eval(self, s):
        return _conjugate_values(self.base, s)

    @property
    def a_phi(self):
        return self.base.initial_slope

    @property
    def b_phi(self):
        return self.base.asymptotic_slope

    @property
    def initial_slope(self):
        return self.base.a_phi

    @property
    def asymptotic_slope(self):
        return self.base.b_phi

    def to_dict(self):
        return {"kind": "conjugate", "base": self.base.to_dict()}


# ---------------------------------------------------------------- operations


def evaluate(phi: OrliczFunction, t):
    """``phi(t)``; raises :class:`DomainError` for negative ``t``."""
    return phi(t)


def inverse_rc(phi: OrliczFunction, t):
    """Right-continuous inverse ``inf{s >= 0 : phi(s) > t}``.

    Closed form for scaled powers and thresholds, exact factorisation for
    compositions, monotone bisection to full double precision otherwise.
    """
    return _vectorised(phi._inverse, t)


def _bisect_inverse(phi: OrliczFunction, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.full_like(t, phi.a_phi)  # inf{s : phi(s) > 0} = a_phi
    work = t > 0
    if not work.any():
        return out
    tw = t[work]
    start = phi.a_phi if 0 < phi.a_phi < INF else 1.0
    hi = np.full_like(tw, max(start, 1.0))
    for _ in range(2000):
        grow = phi._eval(hi) <= tw
        if not grow.any():
            break
        hi = np.where(grow, hi * 2.0, hi)
    for _ in range(1100):
        half = hi * 0.5
        shrink = (half > _TINY) & (phi._eval(half) > tw)
        if not shrink.any():
            break
        hi = np.where(shrink, half, hi)
    lo = hi * 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        up = phi._eval(mid) > tw
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo <= 4.5e-16 * hi):
            break
    out[work] = 0.5 * (lo + hi)
    return out


def _golden_max(obj, lo: np.ndarray, hi: np.ndarray, rtol: float = 1e-12, maxiter: int = 300):
    """Vectorised golden-section maximisation of unimodal ``obj`` on ``[lo, hi]``.

    Ties keep the left sub-interval, so flat tops resolve toward smaller
    arguments.
    """
    a, b = lo.copy(), hi.copy()
    stop = rtol * np.maximum(np.abs(b - a), _TINY)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = obj(c), obj(d)
    for _ in range(maxiter):
        if np.all(b - a <= stop):
            break
        left = fc >= fd
        a_new = np.where(left, a, c)
        b_new = np.where(left, d, b)
        x = np.where(left, b_new - _GOLDEN * (b_new - a_new), a_new + _GOLDEN * (b_new - a_new))
        fx = obj(x)
        c, d = np.where(left, x, d), np.where(left, c, x)
        fc, fd = np.where(left, fx, fd), np.where(left, fc, fx)
        a, b = a_new, b_new
    take_c = fc >= fd
    return np.where(take_c, c, d), np.where(take_c, fc, fd)


def _conjugate_values(phi: OrliczFunction, s: np.ndarray, ceiling: float = CONJUGATE_CEILING):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    sigma = phi.asymptotic_slope
    out[s > sigma] = INF
    work = (s > 0) & (s <= sigma)
    if not work.any():
        return out
    sw = s[work]
    B = phi.b_phi

    def obj(t):
        val = phi._eval(t)
        with np.errstate(invalid="ignore"):
            return np.where(np.isfinite(val), sw * t - val, -INF)

    hi = np.full_like(sw, min(1.0, B))
    h_hi = obj(hi)
    for _ in range(200):
        cand = np.minimum(2.0 * hi, B)
        h_c = obj(cand)
        inc = (cand > hi) & (hi < ceiling) & (h_c > h_hi)
        if not inc.any():
            break
        hi = np.where(inc, cand, hi)
        h_hi = np.where(inc, h_c, h_hi)
    diverged = hi >= ceiling
    upper = np.minimum(2.0 * hi, B)
    _, best = _golden_max(obj, np.zeros_like(sw), upper)
    best = np.maximum(best, 0.0)
    best = np.maximum(best, np.where(np.isfinite(upper), obj(np.where(np.isfinite(upper), upper, 0.0)), -INF))
    best = np.where(diverged, INF, best)
    out[work] = best
    return out


def conjugate_eval(phi: OrliczFunction, s, ceiling: float = CONJUGATE_CEILING):
    """``sup_{t >= 0} (s t - phi(t))`` by bracket expansion plus golden section.

    Returns ``inf`` when ``s`` exceeds the asymptotic slope of ``phi`` or when
    the objective is still increasing at ``ceiling``.
    """
    return _vectorised(lambda arr: _conjugate_values(phi, arr, ceiling), s)


def conjugate(phi: OrliczFunction) -> OrliczFunction:
    """Complementary function, in closed form where the family allows it.

    ``a t^p`` (p > 1) maps to ``(1 - 1/p) (a p)^{-1/(p-1)} s^{p/(p-1)}``,
    ``a t`` to the threshold at ``a`` and the threshold at ``b`` to ``b s``.
    Everything else is wrapped in :class:`NumericConjugate`.
    """
    if isinstance(phi, PowerScaled):
        if phi.p == 1:
            return ZeroInfinityThreshold(phi.a)
        pc = phi.p / (phi.p - 1.0)
        coef = (1.0 - 1.0 / phi.p) * (phi.a * phi.p) ** (-1.0 / (phi.p - 1.0))
        return PowerScaled(coef, pc)
    if isinstance(phi, ZeroInfinityThreshold):
        return PowerScaled(phi.b, 1.0)
    if isinstance(phi, NumericConjugate):
        return phi.base
    return NumericConjugate(phi)


def convexity_defect(phi: OrliczFunction, grid: Sequence[float]) -> float:
    """Largest relative midpoint violation ``phi((s+t)/2) - (phi(s)+phi(t))/2``.

    Pairs are taken at several index strides over the grid; points where
    ``phi`` is infinite at an endpoint are skipped.
    """
    g = np.asarray(grid, dtype=float)
    worst = 0.0
    vals = phi._eval(g)
    for stride in (1, 2, 8, 64):
        if stride >= len(g):
            break
        s, t = g[:-stride], g[stride:]
        fs, ft = vals[:-stride], vals[stride:]
        ok = np.isfinite(fs) & np.isfinite(ft)
        if not ok.any():
            continue
        fm = phi._eval(0.5 * (s[ok] + t[ok]))
        avg = 0.5 * (fs[ok] + ft[ok])
        with np.errstate(invalid="ignore"):
            gap = np.where(np.isfinite(fm), (fm - avg) / np.maximum(np.abs(avg), _TINY), INF)
        worst = max(worst, float(np.max(gap)))
    return worst


def compose(outer: OrliczFunction, inner: OrliczFunction, grid: Sequence[float] | None = None) -> Composed:
    """Composite ``outer o inner`` with a grid convexity check in its metadata."""
    raw = Composed(outer, inner)
    g = log_grid() if grid is None else np.asarray(grid, dtype=float)
    defect = convexity_defect(raw, g)
    return Composed(outer, inner, convex_on_grid=bool(defect <= 1e-9), convexity_defect=defect)


def simplify(phi: OrliczFunction) -> OrliczFunction:
    """Collapse compositions of powers and thresholds to a single closed form.

    ``a (b t^q)^p = a b^p t^{pq}``; a threshold after a power is a threshold
    at ``(cutoff / b)^{1/q}``; a power after a threshold is the same
    threshold.  Anything else is returned unchanged.
    """
    if not isinstance(phi, Composed):
        return phi
    outer, inner = simplify(phi.outer), simplify(phi.inner)
    if isinstance(outer, PowerScaled) and isinstance(inner, PowerScaled):
        return PowerScaled(outer.a * inner.a**outer.p, outer.p * inner.p)
    if isinstance(outer, ZeroInfinityThreshold) and isinstance(inner, PowerScaled):
        return ZeroInfinityThreshold((outer.b / inner.a) ** (1.0 / inner.p))
    if isinstance(inner, ZeroInfinityThreshold) and isinstance(outer, (PowerScaled, ZeroInfinityThreshold)):
        return inner
    return phi


# ------------------------------------------------------------- certificates


@dataclass
class GrowthCertificate:
    """Outcome of a grid check of a growth condition.

    ``constant`` is the worst ratio seen (or the smallest admissible ``c``);
    when ``holds`` is true the inequality can be re-checked pointwise with it.
    """

    condition: str
    constant: float
    grid: tuple[float, ...]
    holds: bool
    worst_ratio_location: float
    skipped: tuple[float, ...] = ()
    violating_pair: tuple[float, float] | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "constant": self.constant,
            "holds": self.holds,
            "worst_ratio_location": self.worst_ratio_location,
            "grid_size": len(self.grid),
            "grid_min": min(self.grid) if self.grid else None,
            "grid_max": max(self.grid) if self.grid else None,
            "skipped": list(self.skipped),
            "violating_pair": None if self.violating_pair is None else list(self.violating_pair),
            "extras": self.extras,
        }


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float).ravel()
    if g.size == 0:
        raise DomainError("grid must be non-empty")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise DomainError("grid points must be positive and finite")
    if np.any(np.diff(g) < 0):
        raise DomainError("grid must be sorted")
    return g


def check_delta2(phi: OrliczFunction, grid) -> GrowthCertificate:
    """Worst ``phi(2t)/phi(t)`` over the grid.

    Points with ``phi(t) = 0 = phi(2t)`` are skipped; ``phi(t) = 0 < phi(2t)``
    makes the ratio infinite and the condition fail.
    """
    g = _check_grid(grid)
    v1, v2 = phi._eval(g), phi._eval(2.0 * g)
    both_zero = (v1 == 0) & (v2 == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(both_zero, 0.0, v2 / np.where(v1 == 0, 0.0, v1))
    ratio = np.where(np.isfinite(v2), ratio, INF)
    ratio = np.where(both_zero, 0.0, ratio)
    k = int(np.argmax(ratio))
    worst = float(ratio[k])
    return GrowthCertificate(
        condition="Delta2",
        constant=worst,
        grid=tuple(g.tolist()),
        holds=bool(math.isfinite(worst)),
        worst_ratio_location=float(g[k]),
        skipped=tuple(g[both_zero].tolist()),
    )


def _product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # 0 * inf = 0, measure-theoretic convention
    with np.errstate(invalid="ignore"):
        return np.where((a == 0) | (b == 0), 0.0, a * b)


def _nabla_ok(phi, S, T, P, c, rtol=1e-12) -> np.ndarray:
    lhs = phi._eval(c * S * T)
    return P <= lhs * (1 + rtol)


def _reverse_ok(phi, S, T, P, c, rtol=1e-12) -> np.ndarray:
    lhs = phi._eval(c * S * T)
    return lhs <= P * (1 + rtol)


def check_nabla_prime(
    phi: OrliczFunction,
    grid,
    ceiling: float = 1e6,
    candidates_per_octave: int = 32,
) -> GrowthCertificate:
    """Smallest ``c`` with ``phi(s) phi(t) <= phi(c s t)`` on all grid pairs.

    A logarithmic candidate sweep brackets the answer, bisection refines it.
    When the condition holds the companion inequality
    ``phi^{-1}(uv) <= c phi^{-1}(u) phi^{-1}(v)`` is checked with the same
    ``c``.  ``extras["reverse_constant"]`` carries the largest ``c`` with
    ``phi(c s t) <= phi(s) phi(t)``, the other role the constant plays.
    """
    g = _check_grid(grid)
    S, T = np.meshgrid(g, g, indexing="ij")
    S, T = S.ravel(), T.ravel()
    vs, vt = phi._eval(S), phi._eval(T)
    P = _product(vs, vt)

    exps = np.arange(-20 * candidates_per_octave, int(math.log2(ceiling) * candidates_per_octave) + 1)
    cands = 2.0 ** (exps / candidates_per_octave)

    def works(c):
        return bool(np.all(_nabla_ok(phi, S, T, P, c)))

    lo_i, hi_i = 0, len(cands) - 1
    if not works(cands[hi_i]):
        fails = ~_nabla_ok(phi, S, T, P, cands[hi_i])
        k = int(np.argmax(fails))
        return GrowthCertificate(
            condition="NablaPrime",
            constant=INF,
            grid=tuple(g.tolist()),
            holds=False,
            worst_ratio_location=float(S[k] * T[k]),
            violating_pair=(float(S[k]), float(T[k])),
            extras={"ceiling": ceiling},
        )
    if works(cands[0]):
        c = float(cands[0])
    else:
        while hi_i - lo_i > 1:
            mid = (lo_i + hi_i) // 2
            if works(cands[mid]):
                hi_i = mid
            else:
                lo_i = mid
        a, b = float(cands[lo_i]), float(cands[hi_i])
        for _ in range(60):
            m = 0.5 * (a + b)
            if works(m):
                b = m
            else:
                a = m
            if b - a <= 1e-13 * b:
                break
        c = b
        # exact candidates from the sweep win over refined neighbours
        if works(float(cands[hi_i])) and abs(cands[hi_i] - c) <= 1e-12 * c:
            c = float(cands[hi_i])
    needed = phi._inverse(P) / np.maximum(S * T, _TINY) if np.all(np.isfinite(P)) else None
    k = int(np.argmax(needed)) if needed is not None else 0

    # inverse sub-multiplicativity with the same constant
    U, V = S, T
    inv_uv = phi._inverse(U * V)
    inv_u, inv_v = phi._inverse(U), phi._inverse(V)
    inv_ok = inv_uv <= c * inv_u * inv_v * (1 + 1e-9)
    bad = np.flatnonzero(~inv_ok)

    rev = _reverse_constant(phi, S, T, P)
    return GrowthCertificate(
        condition="NablaPrime",
        constant=c,
        grid=tuple(g.tolist()),
        holds=True,
        worst_ratio_location=float(S[k] * T[k]),
        extras={
            "inverse_inequality_holds": bool(bad.size == 0),
            "inverse_violation": None if bad.size == 0 else [float(U[bad[0]]), float(V[bad[0]])],
            "reverse_constant": rev,
            "ceiling": ceiling,
        },
    )


def _reverse_constant(phi, S, T, P, lo: float = 1e-12, hi: float = 1e6) -> float:
    """Largest ``c`` in ``[lo, hi]`` with ``phi(c s t) <= phi(s) phi(t)`` on the pairs."""

    def works(c):
        return bool(np.all(_reverse_ok(phi, S, T, P, c)))

    if not works(lo):
        return 0.0
    if works(hi):
        return hi
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if works(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return lo


def _endpoint_growth(g: np.ndarray, ratio: np.ndarray, threshold: float = 1e-2) -> str | None:
    """Flag a ratio still growing like a power at either end of the grid.

    The log-log slope must exceed ``threshold`` over both the outermost
    decade and the outermost eighth of a decade, so ratios that saturate
    are not flagged.
    """
    if g.size < 3 or g[-1] <= g[0]:
        return None
    with np.errstate(divide="ignore"):
        lr, lg = np.log(ratio), np.log(g)

    def slope(mask):
        idx = np.flatnonzero(mask)
        if idx.size < 2:
            return 0.0
        a, b = idx[0], idx[-1]
        if lg[b] <= lg[a] or not (np.isfinite(lr[a]) and np.isfinite(lr[b])):
            return 0.0
        return (lr[b] - lr[a]) / (lg[b] - lg[a])

    if slope(g >= g[-1] / 10.0) > threshold and slope(g >= g[-1] / 10.0**0.125) > threshold:
        return "grows as t -> inf"
    if slope(g <= g[0] * 10.0) < -threshold and slope(g <= g[0] * 10.0**0.125) < -threshold:
        return "grows as t -> 0"
    return None


def _ratio_cert(condition, g, num, den) -> GrowthCertificate:
    zero_den = den == 0
    both = zero_den & (num == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(zero_den, INF, num / np.where(zero_den, 1.0, den))
    ratio = np.where(both, 0.0, ratio)
    k = int(np.argmax(ratio))
    worst = float(ratio[k])
    trend = _endpoint_growth(g[~both], ratio[~both]) if math.isfinite(worst) else None
    extras = {"zero_denominators": g[zero_den].tolist()}
    if trend:
        extras["trend"] = trend
    return GrowthCertificate(
        condition=condition,
        constant=worst,
        grid=tuple(g.tolist()),
        holds=bool(math.isfinite(worst) and not zero_den.any() and trend is None),
        worst_ratio_location=float(g[k]),
        skipped=tuple(g[both].tolist()),
        extras=extras,
    )


def check_inverse_factorization(phi1, phi2, phi3, grid) -> tuple[GrowthCertificate, GrowthCertificate]:
    """Certificates for ``phi1^{-1} phi3^{-1} <= k phi2^{-1}`` and the reverse.

    Returns ``(upper, lower)`` with ``upper.constant = sup phi1^{-1} phi3^{-1} / phi2^{-1}``
    and ``lower.constant = sup phi2^{-1} / (phi1^{-1} phi3^{-1})``.  A ratio
    that keeps growing at a grid end is reported as unbounded.
    """
    g = _check_grid(grid)
    i1, i2, i3 = phi1._inverse(g), phi2._inverse(g), phi3._inverse(g)
    upper = _ratio_cert("InverseFactorizationUpper", g, i1 * i3, i2)
    lower = _ratio_cert("InverseFactorizationLower", g, i2, i1 * i3)
    return upper, lower


# ------------------------------------------------------------ serialisation


def from_dict(d: dict) -> OrliczFunction:
    """Build an Orlicz function from its JSON object form."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError(f"Orlicz function spec must be an object with 'kind', got {d!r}")
    kind = d["kind"]
    if kind == "power":
        return PowerScaled(float(d.get("a", 1.0)), float(d["p"]))
    if kind == "threshold":
        return ZeroInfinityThreshold(float(d["b"]))
    if kind == "piecewise":
        segs = tuple(
            Segment(float(s.get("coef", 0.0)), float(s.get("p", 1.0)), float(s.get("slope", 0.0)))
            for s in d["segments"]
        )
        return PiecewiseConvex(tuple(float(b) for b in d["breakpoints"]), segs)
    if kind == "compose":
        return compose(from_dict(d["outer"]), from_dict(d["inner"]))
    if kind == "conjugate":
        return NumericConjugate(from_dict(d["base"]))
    raise ValueError(f"unknown Orlicz function kind {kind!r}")
