"""Desk-scale model of a semi-finite von Neumann algebra with trace.

The algebra is a finite direct sum of weighted matrix factors ``M_d`` (a
minimal projection in factor ``n`` has trace ``k_n``) plus a commutative part
built from finitely many intervals carrying Lebesgue measure.  Operators are
lists of blocks and complex step values; singular value functions are exact
step functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .eigen import EigenSolverError, eigh_jacobi
from .orlicz import OrliczFunction

__all__ = [
    "Factor",
    "TailRule",
    "AlgebraModel",
    "OperatorElement",
    "StepFunction",
    "RightInverse",
    "PowerMap",
    "InfiniteSpectralValue",
    "DivergentTrace",
    "ShapeError",
    "singular_values",
    "distribution",
    "spectral_projection",
    "apply_calculus",
    "abs_operator",
    "multiply",
    "adjoint",
    "trace",
    "submajorizes",
    "uniform_norm",
    "random_model",
    "random_operator",
    "random_unitary",
]

INF = math.inf
MERGE_RTOL = 1e-10


class ShapeError(ValueError):
    """Operator does not conform to the model."""


class InfiniteSpectralValue(ArithmeticError):
    """Functional calculus hit ``inf`` on the spectrum."""

    def __init__(self, eigenvalue: float, b_phi: float, where: str = ""):
        super().__init__(
            f"function is infinite at spectral value {eigenvalue:.6g}{where} (b_phi = {b_phi:.6g})"
        )
        self.eigenvalue = eigenvalue
        self.b_phi = b_phi


class DivergentTrace(ArithmeticError):
    """Trace of a nonzero constant over an infinite interval."""


# ------------------------------------------------------------------ model


@dataclass(frozen=True)
class Factor:
    """Matrix factor ``M_dim`` whose minimal projections have trace ``weight``."""

    dim: int
    weight: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"factor dim must be a positive integer, got {self.dim}")
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise ValueError(f"factor weight must be positive and finite, got {self.weight}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "weight", float(self.weight))


TAIL_RULES = ("geometric", "constant", "power", "custom-table")


@dataclass(frozen=True)
class TailRule:
    """Closed-form description of the factors beyond the explicit list.

    Tail factors are numbered ``m = 1, 2, ...``.  For factor ``m`` the rule
    gives ``a_m = ||w p_m||_inf`` and the atom weight ``k_m``:

    * ``geometric``: ``a_m = A rho^m``, ``k_m = kappa sigma^m``
    * ``constant``: ``a_m = A``, ``k_m = kappa``
    * ``power``: ``a_m = A m^-beta``, ``k_m = kappa m^-gamma``
    * ``custom-table``: explicit rows ``(a_m, k_m)`` followed by an optional
      closed-form rule ``then``; without one nothing is known past the table.

    Every tail factor has dimension ``dim``.
    """

    rule: str
    A: float = 1.0
    rho: float = 1.0
    kappa: float = 1.0
    sigma: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    dim: int = 1
    table: tuple[tuple[float, float], ...] = ()
    then: "TailRule | None" = None

    def __post_init__(self):
        if self.rule not in TAIL_RULES:
            raise ValueError(f"unknown tail rule {self.rule!r}; expected one of {TAIL_RULES}")
        if self.A < 0 or self.rho < 0 or self.kappa <= 0 or self.sigma <= 0:
            raise ValueError("tail rule needs A >= 0, rho >= 0, kappa > 0, sigma > 0")
        if self.dim < 1:
            raise ValueError("tail factor dim must be >= 1")
        rows = tuple((float(a), float(k)) for a, k in self.table)
        if any(a < 0 or k <= 0 for a, k in rows):
            raise ValueError("custom-table rows need a >= 0 and k > 0")
        object.__setattr__(self, "table", rows)
        if self.rule == "custom-table" and self.then is not None and self.then.rule == "custom-table":
            raise ValueError("custom-table continuation must be a closed-form rule")

    # -- sequence of a_m / k_m^{1/s}; inv_s = 1/s (0 gives the bare a_m)

    def _ratio_base(self, inv_s: float):
        """``(C, theta)`` or ``(C, exponent)`` of the closed-form normalised term."""
        scale = self.A * self.kappa ** (-inv_s)
        if self.rule == "geometric":
            theta = self.rho * self.sigma ** (-inv_s)
            if abs(theta - 1.0) <= 1e-12:
                theta = 1.0
            return scale, theta
        if self.rule == "power":
            e = self.beta - self.gamma * inv_s
            if abs(e) <= 1e-12:
                e = 0.0
            return scale, e
        return scale, None

    def term(self, m: int, inv_s: float = 0.0) -> float:
        """Normalised term ``a_m / k_m^{inv_s}`` for tail factor ``m >= 1``."""
        if m < 1:
            raise ValueError("tail factors are numbered from 1")
        if self.rule == "custom-table":
            if m <= len(self.table):
                a, k = self.table[m - 1]
                return a * k ** (-inv_s)
            if self.then is None:
                return math.nan
            return self.then.term(m - len(self.table), inv_s)
        scale, x = self._ratio_base(inv_s)
        if self.rule == "geometric":
            return scale * x**m
        if self.rule == "power":
            return scale * m ** (-x)
        return scale

    def weight(self, m: int) -> float:
        if self.rule == "custom-table":
            if m <= len(self.table):
                return self.table[m - 1][1]
            return math.nan if self.then is None else self.then.weight(m - len(self.table))
        if self.rule == "geometric":
            return self.kappa * self.sigma**m
        if self.rule == "power":
            return self.kappa * m ** (-self.gamma)
        return self.kappa

    @property
    def closed(self) -> bool:
        """True when the whole tail is described (no open end after a table)."""
        return self.rule != "custom-table" or self.then is not None

    def sup(self, inv_s: float = 0.0) -> float:
        """``sup_m a_m / k_m^{inv_s}``; ``nan`` if the tail is not closed."""
        if self.rule == "custom-table":
            head = max((a * k ** (-inv_s) for a, k in self.table), default=0.0)
            if self.then is None:
                return math.nan
            return max(head, self.then.sup(inv_s))
        scale, x = self._ratio_base(inv_s)
        if scale == 0.0:
            return 0.0
        if self.rule == "geometric":
            return INF if x > 1 else scale * x
        if self.rule == "power":
            return INF if x < 0 else scale
        return scale

    def limit(self, inv_s: float = 0.0) -> float:
        """``lim_m a_m / k_m^{inv_s}`` (``inf`` if unbounded, ``nan`` if unknown)."""
        if self.rule == "custom-table":
            return math.nan if self.then is None else self.then.limit(inv_s)
        scale, x = self._ratio_base(inv_s)
        if scale == 0.0:
            return 0.0
        if self.rule == "geometric":
            if x < 1:
                return 0.0
            return scale if x == 1 else INF
        if self.rule == "power":
            if x > 0:
                return 0.0
            return scale if x == 0 else INF
        return scale

    def count_exceeding(self, eps: float, inv_s: float = 0.0) -> float:
        """Number of tail factors with normalised term ``> eps`` (may be ``inf``)."""
        if eps <= 0:
            raise ValueError("eps must be positive")
        if self.rule == "custom-table":
            head = sum(1 for a, k in self.table if a * k ** (-inv_s) > eps)
            if self.then is None:
                return math.nan
            return head + self.then.count_exceeding(eps, inv_s)
        if self.limit(inv_s) > eps:
            return INF
        scale, x = self._ratio_base(inv_s)
        flat = (
            self.rule == "constant"
            or scale == 0.0
            or (self.rule == "geometric" and x in (0.0, 1.0))
            or (self.rule == "power" and x == 0.0)
        )
        if flat:
            # a geometric rule with theta = 0 is zero from m = 1 on
            return 0 if self.term(1, inv_s) <= eps else INF
        # terms decrease strictly: count m >= 1 with term(m) > eps
        if self.rule == "geometric":
            guess = math.log(eps / scale) / math.log(x)
        else:
            guess = (scale / eps) ** (1.0 / x)
        m = max(0, min(int(math.ceil(guess)), 2**62))
        while m >= 1 and not self.term(m, inv_s) > eps:
            m -= 1
        while self.term(m + 1, inv_s) > eps:
            m += 1
        return m

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"rule": self.rule}
        if self.rule == "custom-table":
            out["table"] = [list(r) for r in self.table]
            if self.then is not None:
                out["then"] = self.then.to_dict()
        else:
            out["A"] = self.A
            if self.rule == "geometric":
                out["rho"] = self.rho
            out["kappa"] = self.kappa
            if self.rule == "geometric" and self.sigma != 1.0:
                out["sigma"] = self.sigma
            if self.rule == "power":
                out["beta"] = self.beta
                out["gamma"] = self.gamma
        if self.dim != 1:
            out["dim"] = self.dim
        return out


@dataclass(frozen=True)
class AlgebraModel:
    """Weighted matrix factors plus intervals (the commutative non-atomic part)."""

    factors: tuple[Factor, ...] = ()
    intervals: tuple[float, ...] = ()
    declared_tail: TailRule | None = None

    def __post_init__(self):
        facs = tuple(f if isinstance(f, Factor) else Factor(*f) for f in self.factors)
        ivs = tuple(float(x) for x in self.intervals)
        object.__setattr__(self, "factors", facs)
        object.__setattr__(self, "intervals", ivs)
        if any(not (x > 0) for x in ivs):
            raise ValueError("interval lengths must be positive (inf allowed)")
        if sum(1 for x in ivs if math.isinf(x)) > 1:
            raise ValueError("at most one interval may have infinite length")
        if not facs and not ivs:
            raise ValueError("model needs at least one factor or interval")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(f.weight for f in self.factors)

    @property
    def is_atomic(self) -> bool:
        return not self.intervals

    def refine_interval(self, j: int, pieces: Sequence[float]) -> "AlgebraModel":
        """Replace interval ``j`` by consecutive sub-intervals of the given lengths."""
        L = self.intervals[j]
        pieces = [float(p) for p in pieces]
        if any(p <= 0 for p in pieces):
            raise ValueError("sub-interval lengths must be positive")
        finite = [p for p in pieces if math.isfinite(p)]
        if math.isfinite(L) and (len(finite) != len(pieces) or not math.isclose(math.fsum(pieces), L, rel_tol=1e-12)):
            raise ValueError(f"pieces must partition interval {j} of length {L}")
        ivs = self.intervals[:j] + tuple(pieces) + self.intervals[j + 1 :]
        return AlgebraModel(self.factors, ivs, self.declared_tail)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "factors": [{"dim": f.dim, "weight": f.weight} for f in self.factors],
            "intervals": [{"length": x} for x in self.intervals],
        }
        if self.declared_tail is not None:
            out["declared_tail"] = self.declared_tail.to_dict()
        return out


# --------------------------------------------------------------- operators


def _herm_tol(b: np.ndarray) -> float:
    return 1e-10 * max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)


@dataclass(frozen=True, eq=False)
class OperatorElement:
    """Element of the model: one square block per factor and one value per interval.

    ``hermitian`` and ``positive`` are claims; they are checked against the
    data and a false claim raises ``ValueError``.
    """

    blocks: tuple[np.ndarray, ...] = ()
    steps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    hermitian: bool = False
    positive: bool = False

    def __post_init__(self):
        blocks = tuple(np.array(b, dtype=complex) for b in self.blocks)
        for n, b in enumerate(blocks):
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ShapeError(f"block {n} must be square, got shape {b.shape}")
            b.setflags(write=False)
        steps = np.array(self.steps, dtype=complex).reshape(-1)
        steps.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "steps", steps)
        if self.positive and not self.is_positive():
            raise ValueError("operator claimed positive but is not")
        if self.hermitian and not self.is_hermitian():
            raise ValueError("operator claimed hermitian but is not")
        if self.positive and not self.hermitian:
            object.__setattr__(self, "hermitian", True)

    def is_hermitian(self) -> bool:
        for b in self.blocks:
            if np.max(np.abs(b - b.conj().T), initial=0.0) > _herm_tol(b):
                return False
        return bool(np.all(np.abs(self.steps.imag) <= 1e-12 * np.maximum(1.0, np.abs(self.steps))))

    def is_positive(self) -> bool:
        if not self.is_hermitian():
            return False
        for b in self.blocks:
            if b.size and np.min(np.linalg.eigvalsh(0.5 * (b + b.conj().T))) < -_herm_tol(b):
                return False
        return bool(np.all(self.steps.real >= 0))

    def check(self, model: AlgebraModel) -> None:
        """Raise :class:`ShapeError` unless the operator conforms to ``model``."""
        if len(self.blocks) != len(model.factors):
            raise ShapeError(f"operator has {len(self.blocks)} blocks, model has {len(model.factors)} factors")
        for n, (b, f) in enumerate(zip(self.blocks, model.factors)):
            if b.shape != (f.dim, f.dim):
                raise ShapeError(f"block {n} has shape {b.shape}, factor {n} needs ({f.dim}, {f.dim})")
        if self.steps.size != len(model.intervals):
            raise ShapeError(f"operator has {self.steps.size} step values, model has {len(model.intervals)} intervals")

    def scale(self, c: complex) -> "OperatorElement":
        return OperatorElement(tuple(c * b for b in self.blocks), c * self.steps)

    def __add__(self, other: "OperatorElement") -> "OperatorElement":
        if len(self.blocks) != len(other.blocks) or self.steps.size != other.steps.size:
            raise ShapeError("operands do not conform")
        return OperatorElement(tuple(a + b for a, b in zip(self.blocks, other.blocks)), self.steps + other.steps)

    def to_dict(self) -> dict:
        def enc(z):
            return [float(z.real), float(z.imag)]

        return {
            "blocks": [[[enc(z) for z in row] for row in b] for b in self.blocks],
            "steps": [enc(z) for z in self.steps],
        }

    @classmethod
    def zeros(cls, model: AlgebraModel) -> "OperatorElement":
        return cls(tuple(np.zeros((d, d)) for d in model.dims), np.zeros(len(model.intervals)), positive=True)

    @classmethod
    def identity(cls, model: AlgebraModel) -> "OperatorElement":
        return cls(tuple(np.eye(d) for d in model.dims), np.ones(len(model.intervals)), positive=True)

    def __eq__(self, other):
        if not isinstance(other, OperatorElement):
            return NotImplemented
        return (
            len(self.blocks) == len(other.blocks)
            and all(a.shape == b.shape and np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))
            and np.array_equal(self.steps, other.steps)
        )


# ----------------------------------------------------------- step functions


class StepFunction:
    """Non-increasing right-continuous step function on ``[0, inf)``.

    Built from ``(length, value)`` pieces in any order: pieces are sorted by
    decreasing value; values within relative ``1e-10`` of the previous piece
    merge into it (the first value is kept); zero values are dropped, and
    nothing after an infinite-length piece survives.
    """

    __slots__ = ("lengths", "values")

    def __init__(self, pieces: Iterable[tuple[float, float]] = ()):
        raw = [(float(L), float(v)) for L, v in pieces]
        for L, v in raw:
            if not (L > 0) or math.isnan(L):
                raise ValueError(f"piece length must be positive, got {L}")
            if not (v >= 0) or math.isinf(v):
                raise ValueError(f"piece value must be finite and non-negative, got {v}")
        raw = [(L, v) for L, v in raw if v > 0]
        raw.sort(key=lambda lv: -lv[1])
        lengths: list[float] = []
        values: list[float] = []
        for L, v in raw:
            if lengths and math.isinf(lengths[-1]):
                break
            if values and values[-1] - v <= MERGE_RTOL * values[-1]:
                lengths[-1] += L
            else:
                lengths.append(L)
                values.append(v)
        self.lengths = np.array(lengths, dtype=float)
        self.values = np.array(values, dtype=float)

    @classmethod
    def _raw(cls, lengths, values) -> "StepFunction":
        out = cls.__new__(cls)
        out.lengths = np.asarray(lengths, dtype=float)
        out.values = np.asarray(values, dtype=float)
        return out

    @property
    def pieces(self) -> list[tuple[float, float]]:
        return list(zip(self.lengths.tolist(), self.values.tolist()))

    def __repr__(self):
        return f"StepFunction({self.pieces})"

    def __eq__(self, other):
        return (
            isinstance(other, StepFunction)
            and np.array_equal(self.lengths, other.lengths)
            and np.array_equal(self.values, other.values)
        )

    def __len__(self):
        return len(self.values)

    @property
    def breakpoints(self) -> np.ndarray:
        """Finite right ends of the pieces."""
        ends = np.cumsum(self.lengths)
        return ends[np.isfinite(ends)]

    @property
    def support(self) -> float:
        return float(np.sum(self.lengths)) if len(self) else 0.0

    @property
    def sup(self) -> float:
        return float(self.values[0]) if len(self) else 0.0

    @property
    def tail_value(self) -> float:
        """Value on ``[T, inf)`` for large ``T``: nonzero only with an infinite piece."""
        if len(self) and math.isinf(self.lengths[-1]):
            return float(self.values[-1])
        return 0.0

    def value_at(self, t):
        """``mu(t)`` with right-continuity at breakpoints."""
        t = np.asarray(t, dtype=float)
        ends = np.cumsum(self.lengths)
        idx = np.searchsorted(ends, t, side="right")
        vals = np.append(self.values, 0.0)
        out = vals[np.minimum(idx, len(self.values))]
        return float(out) if out.ndim == 0 else out

    def distribution(self, s: float) -> float:
        """Total length where the function exceeds ``s`` (strictly)."""
        # values are decreasing, so the set {mu > s} is a prefix; cumsum keeps
        # d and value_at on the same breakpoints
        k = int(np.count_nonzero(self.values > s))
        return float(np.cumsum(self.lengths[:k])[-1]) if k else 0.0

    def integral(self, t):
        """``int_0^t mu``; exact piecewise-linear arithmetic."""
        t = np.asarray(t, dtype=float)
        if not len(self):
            out = np.zeros_like(t)
            return float(out) if out.ndim == 0 else out
        ends = np.cumsum(self.lengths)
        starts = ends - self.lengths
        # overlap of [0, t] with each piece
        with np.errstate(invalid="ignore"):
            over = np.clip(t[..., None] - starts, 0.0, self.lengths)
            contrib = np.where(over > 0, over * self.values, 0.0)
        out = np.sum(contrib, axis=-1)
        return float(out) if out.ndim == 0 else out

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """``int_0^inf f(mu(t)) dt`` for ``f`` with ``f(0) = 0``.

        An infinite piece with positive ``f`` value (or an infinite ``f``
        value) makes the integral ``inf``.
        """
        if not len(self):
            return 0.0
        fv = np.asarray(f(self.values), dtype=float)
        if np.any(np.isinf(fv) & (self.lengths > 0)):
            return INF
        if np.any(np.isinf(self.lengths) & (fv > 0)):
            return INF
        terms = np.where(fv == 0, 0.0, self.lengths * fv)
        return math.fsum(terms.tolist())

    def map(self, f: Callable[[np.ndarray], np.ndarray]) -> "StepFunction":
        """``f(mu)`` for non-decreasing ``f`` with ``f(0) = 0``."""
        return StepFunction(zip(self.lengths, np.asarray(f(self.values), dtype=float)))

    def scale(self, c: float) -> "StepFunction":
        return StepFunction(zip(self.lengths, c * self.values))

    def dilate(self, c: float) -> "StepFunction":
        """``t -> mu(t / c)``."""
        return StepFunction(zip(c * self.lengths, self.values))

    def product(self, other: "StepFunction") -> "StepFunction":
        """Pointwise product on the common refinement of the breakpoints."""
        if not len(self) or not len(other):
            return StepFunction()
        e1, e2 = np.cumsum(self.lengths), np.cumsum(other.lengths)
        cuts = np.unique(np.concatenate([[0.0], e1, e2]))
        cuts = cuts[np.isfinite(cuts)]
        end = min(e1[-1], e2[-1])
        cuts = cuts[cuts <= end]
        pieces = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            pieces.append((b - a, self.value_at(a) * other.value_at(a)))
        if math.isinf(end):
            a = cuts[-1]
            pieces.append((INF, self.value_at(a) * other.value_at(a)))
        return StepFunction(p for p in pieces if p[0] > 0)


# ---------------------------------------------------------------- calculus


@dataclass(frozen=True)
class RightInverse:
    """Tag for the right-continuous inverse ``phi^{-1}`` in functional calculus."""

    phi: OrliczFunction


@dataclass(frozen=True)
class PowerMap:
    """Tag for ``t -> t**gamma`` (``gamma > 0``)."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("power exponent must be positive")

    def __call__(self, t):
        return np.asarray(t, dtype=float) ** self.gamma


def _resolve(f) -> tuple[Callable[[np.ndarray], np.ndarray], float]:
    """Return ``(callable on arrays, b_phi)`` for a calculus tag."""
    if isinstance(f, OrliczFunction):
        return (lambda v: np.asarray(f(v), dtype=float)), f.b_phi
    if isinstance(f, RightInverse):
        from .orlicz import inverse_rc

        return (lambda v: np.asarray(inverse_rc(f.phi, v), dtype=float)), INF
    if isinstance(f, PowerMap):
        return f, INF
    if f == "abs" or f is abs:
        return (lambda v: np.asarray(v, dtype=float)), INF
    raise TypeError(f"unsupported calculus tag {f!r}; use an OrliczFunction, RightInverse, PowerMap or 'abs'")


def _abs_eig(b: np.ndarray, n: int):
    """Singular values (descending) and right singular vectors of ``b``.

    Values come from Jacobi on the dilation ``[[0, b], [b^H, 0]]`` (spectrum
    ``+-sigma``), which keeps small singular values accurate to ``eps ||b||``;
    squaring first would only give ``sqrt(eps) ||b||``.  Vectors come from
    Jacobi on ``b^H b``.
    """
    d = b.shape[0]
    if d == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    h = np.zeros((2 * d, 2 * d), dtype=complex)
    h[:d, d:] = b
    h[d:, :d] = b.conj().T
    lam, _ = eigh_jacobi(h, context=f"factor {n}: ")
    sv = np.clip(lam[::-1][:d], 0.0, None)
    # below the dilation's backward error a singular value is numerically zero
    sv[sv <= 4 * d * np.finfo(float).eps * sv[0]] = 0.0
    _, v = eigh_jacobi(b.conj().T @ b, context=f"factor {n}: ")
    return sv, v[:, ::-1]


def singular_values(model: AlgebraModel, x: OperatorElement) -> StepFunction:
    """Singular value function ``mu_x`` as an exact step function."""
    x.check(model)
    pieces: list[tuple[float, float]] = []
    for n, (b, f) in enumerate(zip(x.blocks, model.factors)):
        sv, _ = _abs_eig(b, n)
        pieces.extend((f.weight, float(s)) for s in sv)
    pieces.extend((L, float(abs(v))) for L, v in zip(model.intervals, x.steps))
    return StepFunction(pieces)


def distribution(model: AlgebraModel, x: OperatorElement, s: float) -> float:
    """``tau(e^{|x|}(s, inf))``."""
    if s < 0:
        raise ValueError("distribution is evaluated at s >= 0")
    return singular_values(model, x).distribution(s)


def uniform_norm(model: AlgebraModel, x: OperatorElement) -> float:
    return singular_values(model, x).sup


def spectral_projection(model: AlgebraModel, x: OperatorElement, s: float) -> OperatorElement:
    """Spectral projection ``e^x(s, inf)`` of a hermitian operator (strict inequality)."""
    x.check(model)
    if not x.is_hermitian():
        raise ValueError("spectral projection needs a hermitian operator")
    blocks = []
    for n, b in enumerate(x.blocks):
        w, v = eigh_jacobi(b, context=f"factor {n}: ")
        keep = w > s
        blocks.append(v[:, keep] @ v[:, keep].conj().T)
    steps = (x.steps.real > s).astype(float)
    e = OperatorElement(tuple(blocks), steps)
    for n, b in enumerate(e.blocks):
        if np.max(np.abs(b @ b - b), initial=0.0) > 1e-10 or np.max(np.abs(b - b.conj().T), initial=0.0) > 1e-10:
            raise EigenSolverError(f"factor {n}: spectral projection is not idempotent", 0, 0.0, b.shape[0])
    return e


def apply_calculus(f, model: AlgebraModel, x: OperatorElement) -> OperatorElement:
    """``f(|x|)`` by spectral calculus in the eigenbasis of ``|x|``."""
    x.check(model)
    fn, b_phi = _resolve(f)
    blocks = []
    for n, b in enumerate(x.blocks):
        sv, v = _abs_eig(b, n)
        fv = fn(sv)
        bad = np.flatnonzero(~np.isfinite(fv))
        if bad.size:
            raise InfiniteSpectralValue(float(sv[bad[0]]), b_phi, f" in factor {n}")
        blocks.append((v * fv) @ v.conj().T)
    av = np.abs(x.steps)
    fs = fn(av) if av.size else np.zeros(0)
    bad = np.flatnonzero(~np.isfinite(fs))
    if bad.size:
        raise InfiniteSpectralValue(float(av[bad[0]]), b_phi, f" on interval {bad[0]}")
    return OperatorElement(tuple(blocks), fs.astype(complex))


def abs_operator(model: AlgebraModel, x: OperatorElement) -> OperatorElement:
    """``|x| = (x^* x)^{1/2}``."""
    return apply_calculus("abs", model, x)


def multiply(model: AlgebraModel, x: OperatorElement, y: OperatorElement) -> OperatorElement:
    x.check(model)
    y.check(model)
    return OperatorElement(tuple(a @ b for a, b in zip(x.blocks, y.blocks)), x.steps * y.steps)


def adjoint(model: AlgebraModel, x: OperatorElement) -> OperatorElement:
    x.check(model)
    return OperatorElement(tuple(b.conj().T for b in x.blocks), np.conj(x.steps))


def trace(model: AlgebraModel, x: OperatorElement) -> complex:
    """``tau(x) = sum_n k_n Tr(x_n) + sum_j |I_j| x_j``.

    Raises :class:`DivergentTrace` for a nonzero value on an infinite interval.
    """
    x.check(model)
    re: list[float] = []
    im: list[float] = []
    for b, f in zip(x.blocks, model.factors):
        tr = complex(np.trace(b))
        re.append(f.weight * tr.real)
        im.append(f.weight * tr.imag)
    for j, (L, v) in enumerate(zip(model.intervals, x.steps)):
        if v == 0:
            continue
        if math.isinf(L):
            raise DivergentTrace(f"interval {j} has infinite length and value {complex(v)}")
        re.append(L * v.real)
        im.append(L * v.imag)
    return complex(math.fsum(re), math.fsum(im))


def submajorizes(mu_y: StepFunction, mu_x: StepFunction, tol: float = 1e-12) -> bool:
    """True when ``int_0^t mu_x <= int_0^t mu_y`` for all ``t > 0``.

    Both integrals are concave and piecewise linear, so checking every
    breakpoint of either function plus the final slopes is exact.
    """
    pts = np.union1d(mu_x.breakpoints, mu_y.breakpoints)
    if pts.size:
        ix, iy = mu_x.integral(pts), mu_y.integral(pts)
        if np.any(ix > iy + tol):
            return False
    return mu_x.tail_value <= mu_y.tail_value


# ------------------------------------------------------------------ random


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_model(
    rng: np.random.Generator,
    n_factors: tuple[int, int] = (1, 3),
    max_dim: int = 4,
    n_intervals: tuple[int, int] = (0, 2),
    weight_range: tuple[float, float] = (1 / 16, 4.0),
    infinite_interval: bool = False,
) -> AlgebraModel:
    """Random model; weights are log-uniform in ``weight_range``."""
    nf = int(rng.integers(n_factors[0], n_factors[1] + 1))
    ni = int(rng.integers(n_intervals[0], n_intervals[1] + 1))
    if nf == 0 and ni == 0:
        nf = 1
    lo, hi = np.log(weight_range[0]), np.log(weight_range[1])
    factors = tuple(Factor(int(rng.integers(1, max_dim + 1)), float(np.exp(rng.uniform(lo, hi)))) for _ in range(nf))
    intervals = [float(np.exp(rng.uniform(np.log(0.1), np.log(4.0)))) for _ in range(ni)]
    if infinite_interval and intervals:
        intervals[-1] = INF
    return AlgebraModel(factors, tuple(intervals))


def random_operator(
    rng: np.random.Generator,
    model: AlgebraModel,
    kind: str = "general",
    scale: float = 1.0,
) -> OperatorElement:
    """Random operator conforming to ``model``.

    ``kind`` is ``general`` (complex Ginibre blocks), ``hermitian`` or
    ``positive`` (``g^* g`` blocks).  Steps on infinite intervals are set to 0
    so that every trace is finite.
    """
    blocks = []
    for d in model.dims:
        g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) * (scale / math.sqrt(2 * d))
        if kind == "hermitian":
            g = 0.5 * (g + g.conj().T)
        elif kind == "positive":
            g = g.conj().T @ g
        blocks.append(g)
    steps = []
    for L in model.intervals:
        if math.isinf(L):
            steps.append(0.0)
        elif kind == "general":
            steps.append(complex(rng.standard_normal(), rng.standard_normal()) * scale / math.sqrt(2))
        elif kind == "hermitian":
            steps.append(float(rng.standard_normal()) * scale)
        else:
            steps.append(float(abs(rng.standard_normal())) * scale)
    hermitian = kind in ("hermitian", "positive")
    return OperatorElement(tuple(blocks), np.array(steps, dtype=complex), hermitian=hermitian, positive=kind == "positive")
