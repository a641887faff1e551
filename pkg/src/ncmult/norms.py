"""Norms on the model: Luxemburg, L^p, Orlicz (Koethe dual) and sampled operator norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .operator_model import AlgebraModel, OperatorElement, StepFunction, singular_values
from .orlicz import (
    OrliczFunction,
    PowerScaled,
    ZeroInfinityThreshold,
    conjugate,
)

__all__ = [
    "NormResult",
    "luxemburg_norm",
    "luxemburg_norm_step",
    "modular",
    "lp_norm",
    "lp_norm_step",
    "orlicz_dual_norm",
    "orlicz_dual_norm_step",
    "dual_norm_scan",
    "operator_norm_estimate",
    "sample_ratios",
    "sample_orlicz_ratios",
    "analytic_candidates",
]

INF = math.inf
LUX_RTOL = 1e-10
DUAL_RTOL = 1e-8
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class NormResult:
    """Value of a norm computation; ``value == inf`` flags an infinite norm."""

    value: float
    method: str
    iterations: int = 0
    residual: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "info": self.info,
        }


# -------------------------------------------------------------------- L^p


def lp_norm_step(p: float, mu: StepFunction) -> NormResult:
    """``(int mu^p)^{1/p}``, scaled by ``max mu`` against overflow."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not len(mu):
        return NormResult(0.0, "closed_form")
    vmax = mu.sup
    if math.isinf(p):
        return NormResult(vmax, "closed_form")
    if mu.tail_value > 0:
        return NormResult(INF, "closed_form", info={"reason": "nonzero value on an infinite interval"})
    s = math.fsum((mu.lengths * (mu.values / vmax) ** p).tolist())
    return NormResult(vmax * s ** (1.0 / p), "closed_form")


def lp_norm(p: float, model: AlgebraModel, x: OperatorElement) -> NormResult:
    """``tau(|x|^p)^{1/p}``; ``p = inf`` gives the top singular value."""
    return lp_norm_step(p, singular_values(model, x))


# ------------------------------------------------------------- Luxemburg


def modular(phi: OrliczFunction, mu: StepFunction, lam: float) -> float:
    """``int phi(mu / lam)``; ``inf`` as soon as ``max mu / lam > b_phi``."""
    if not len(mu):
        return 0.0
    if mu.sup / lam > phi.b_phi:
        return INF
    return mu.integrate(lambda v: phi(v / lam))


def luxemburg_norm_step(phi: OrliczFunction, mu: StepFunction, method: str | None = None) -> NormResult:
    """``inf{lam > 0 : int phi(mu / lam) <= 1}``.

    Scaled powers and thresholds use their closed forms unless
    ``method="bisection"``; everything else brackets the root of the
    non-increasing modular and bisects to relative ``1e-10``.
    """
    if not len(mu):
        return NormResult(0.0, "closed_form")
    if method not in (None, "bisection", "closed_form"):
        raise ValueError(f"unknown method {method!r}")
    if method != "bisection":
        if isinstance(phi, PowerScaled):
            lp = lp_norm_step(phi.p, mu).value
            return NormResult(phi.a ** (1.0 / phi.p) * lp, "closed_form")
        if isinstance(phi, ZeroInfinityThreshold):
            return NormResult(mu.sup / phi.b, "closed_form")
        if method == "closed_form":
            raise ValueError(f"no closed form for {type(phi).__name__}")
    vmax = mu.sup
    tail = mu.tail_value
    # a nonzero tail has infinite measure: the modular is finite only once
    # tail / lam <= a_phi
    if tail > 0 and phi.a_phi == 0:
        return NormResult(INF, "bisection", info={"reason": "modular infinite for every lambda"})

    def m(lam):
        return modular(phi, mu, lam)

    b = phi.b_phi
    a = phi.a_phi
    lo = vmax / max(b, 1.0) if math.isfinite(b) else vmax / max(1.0, vmax) * 1e-3
    hi = vmax / max(a, 1e-300) if a > 0 else vmax
    lo = min(lo, hi)
    its = 0
    while m(hi) > 1:
        hi *= 2.0
        its += 1
        if its > 2000:
            return NormResult(INF, "bisection", its, info={"reason": "bracket expansion failed"})
    while lo > 0 and m(lo) <= 1:
        lo *= 0.5
        its += 1
        if lo < 1e-300:
            return NormResult(0.0, "bisection", its)
    n = 0
    while hi - lo > LUX_RTOL * hi and n < 200:
        mid = 0.5 * (lo + hi)
        if m(mid) <= 1:
            hi = mid
        else:
            lo = mid
        n += 1
    return NormResult(hi, "bisection", its + n, (hi - lo) / hi)


def luxemburg_norm(phi: OrliczFunction, model: AlgebraModel, x: OperatorElement, method: str | None = None) -> NormResult:
    """Luxemburg norm of ``x`` for the Orlicz function ``phi``."""
    return luxemburg_norm_step(phi, singular_values(model, x), method)


# ---------------------------------------------------------- Orlicz norm


def _dual_objective(phi_star: OrliczFunction, mu: StepFunction):
    def g(k: float) -> float:
        if k <= 0.0:
            return INF
        return (1.0 + mu.integrate(lambda v: phi_star(k * v))) / k

    return g


def _dual_kmax(phi_star: OrliczFunction, mu: StepFunction) -> float:
    kmax = phi_star.b_phi / mu.sup
    tail = mu.tail_value
    if tail > 0:
        kmax = min(kmax, phi_star.a_phi / tail)
    return kmax


def orlicz_dual_norm_step(phi_star: OrliczFunction, mu: StepFunction) -> NormResult:
    """``inf_{k > 0} (1 + int phi*(k mu)) / k`` by golden section on ``log k``.

    The objective is quasi-convex in ``k`` (its derivative changes sign once
    because ``phi*`` is convex), so golden section on a bracket is exact up to
    tolerance.  The search never leaves the region where ``phi*(k mu)`` is
    integrable; the boundary of that region is evaluated as a candidate.
    """
    if not len(mu):
        return NormResult(0.0, "closed_form", info={"reason": "x = 0"})
    g = _dual_objective(phi_star, mu)
    kmax = _dual_kmax(phi_star, mu)
    if kmax <= 0:
        return NormResult(INF, "golden_section", info={"reason": "objective infinite for every k"})
    lk_max = math.log(kmax) if math.isfinite(kmax) else INF

    def G(u):
        return g(min(math.exp(u), kmax))

    # quasi-convexity: G(lo) > G(lo + 1) puts the minimiser right of lo,
    # G(hi) > G(hi - 1) puts it left of hi
    u0 = min(-math.log(mu.sup), lk_max)
    its = 0
    lo, step = u0 - 1.0, 1.0
    while not G(lo) > G(lo + 1.0) and its < 500:
        lo -= step
        step *= 2.0
        its += 1
    hi, step = u0, 1.0
    while hi < lk_max and not G(hi) > G(hi - 1.0) and hi - u0 < 700.0:
        hi = min(hi + step, lk_max, u0 + 700.0)
        step *= 2.0
        its += 1
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    gc, gd = G(c), G(d)
    n = 0
    while b - a > 1e-11 * max(1.0, abs(b)) and n < 400:
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - _GOLDEN * (b - a)
            gc = G(c)
        else:
            a, c, gc = c, d, gd
            d = a + _GOLDEN * (b - a)
            gd = G(d)
        n += 1
    best_u, best = (c, gc) if gc <= gd else (d, gd)
    if math.isfinite(lk_max):
        gb = g(kmax)
        if gb < best:
            best_u, best = lk_max, gb
    if not math.isfinite(best):
        return NormResult(INF, "golden_section", its + n, info={"reason": "objective infinite on the search region"})
    return NormResult(best, "golden_section", its + n, (b - a), info={"k": min(math.exp(best_u), kmax), "k_max": kmax})


def orlicz_dual_norm(phi_star: OrliczFunction, model: AlgebraModel, x: OperatorElement) -> NormResult:
    """Orlicz norm ``||x||^0`` built from the complementary function ``phi_star``."""
    return orlicz_dual_norm_step(phi_star, singular_values(model, x))


def dual_norm_scan(phi_star: OrliczFunction, mu: StepFunction, n: int = 4001, span: float = 12.0) -> float:
    """Dense logarithmic scan of the dual-norm objective, for cross-checking."""
    if not len(mu):
        return 0.0
    g = _dual_objective(phi_star, mu)
    kmax = _dual_kmax(phi_star, mu)
    center = -math.log(mu.sup)
    top = min(center + span, math.log(kmax)) if kmax > 0 else -INF
    if not math.isfinite(top):
        return INF
    us = np.linspace(top - 2 * span, top, n)
    return float(min(g(math.exp(u)) for u in us))


# ---------------------------------------------------- operator sampling


def _batched_sv(blocks: list, steps: np.ndarray, lengths, weights) -> tuple[list, np.ndarray]:
    """Singular values of a batch of operators via LAPACK (independent of the Jacobi path)."""
    return [np.linalg.svd(b, compute_uv=False) for b in blocks], np.abs(steps)


def _batched_lp(svs: list, abs_steps: np.ndarray, weights, lengths, p: float) -> np.ndarray:
    trials = abs_steps.shape[0]
    cols = [s for s in svs] + ([abs_steps] if abs_steps.shape[1] else [])
    if not cols:
        return np.zeros(trials)
    vmax = np.max(np.concatenate([c.reshape(trials, -1) for c in cols], axis=1), axis=1)
    if math.isinf(p):
        return vmax
    safe = np.where(vmax > 0, vmax, 1.0)
    total = np.zeros(trials)
    for s, k in zip(svs, weights):
        total += k * np.sum((s / safe[:, None]) ** p, axis=1)
    for j, L in enumerate(lengths):
        v = abs_steps[:, j]
        if math.isinf(L):
            total += np.where(v > 0, INF, 0.0)
        else:
            total += L * (v / safe) ** p
    return np.where(vmax > 0, safe * total ** (1.0 / p), 0.0)


def _random_batch(rng: np.random.Generator, model: AlgebraModel, trials: int):
    blocks = []
    for d in model.dims:
        z = rng.standard_normal((trials, d, d, 2))
        blocks.append((z[..., 0] + 1j * z[..., 1]) / math.sqrt(2))
    nI = len(model.intervals)
    z = rng.standard_normal((trials, nI, 2))
    steps = (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2)
    for j, L in enumerate(model.intervals):
        if math.isinf(L):
            steps[:, j] = 0.0
    return blocks, steps


def sample_ratios(model: AlgebraModel, w: OperatorElement, p: float, q: float, trials: int = 1000, seed: int = 42) -> np.ndarray:
    """``||w x||_q / ||x||_p`` for ``trials`` random complex Gaussian ``x``."""
    w.check(model)
    rng = np.random.default_rng(seed)
    xb, xs = _random_batch(rng, model, trials)
    wxb = [wb[None, :, :] @ b for wb, b in zip(w.blocks, xb)]
    wxs = w.steps[None, :] * xs
    sx, ax = _batched_sv(xb, xs, model.intervals, model.weights)
    swx, awx = _batched_sv(wxb, wxs, model.intervals, model.weights)
    nx = _batched_lp(sx, ax, model.weights, model.intervals, p)
    nwx = _batched_lp(swx, awx, model.weights, model.intervals, q)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(nx > 0, nwx / nx, 0.0)


def _power_parts(phi: OrliczFunction) -> tuple[float, float] | None:
    if isinstance(phi, PowerScaled):
        return phi.a, phi.p
    return None


def sample_orlicz_ratios(
    model: AlgebraModel,
    w: OperatorElement,
    phi_in: OrliczFunction,
    phi_out: OrliczFunction,
    trials: int = 1000,
    seed: int = 42,
) -> np.ndarray:
    """``||w x||_{phi_out} / ||x||_{phi_in}`` (Luxemburg norms) on random ``x``.

    Scaled powers take the vectorised ``a^{1/p} ||.||_p`` path; other
    functions fall back to per-sample bisection.
    """
    w.check(model)
    pin, pout = _power_parts(phi_in), _power_parts(phi_out)
    rng = np.random.default_rng(seed)
    xb, xs = _random_batch(rng, model, trials)
    wxb = [wb[None, :, :] @ b for wb, b in zip(w.blocks, xb)]
    wxs = w.steps[None, :] * xs
    sx, ax = _batched_sv(xb, xs, model.intervals, model.weights)
    swx, awx = _batched_sv(wxb, wxs, model.intervals, model.weights)
    if pin is not None and pout is not None:
        nx = pin[0] ** (1 / pin[1]) * _batched_lp(sx, ax, model.weights, model.intervals, pin[1])
        nwx = pout[0] ** (1 / pout[1]) * _batched_lp(swx, awx, model.weights, model.intervals, pout[1])
    else:
        nx = np.empty(trials)
        nwx = np.empty(trials)
        for t in range(trials):
            mux = _step_from(sx, ax, model, t)
            muwx = _step_from(swx, awx, model, t)
            nx[t] = luxemburg_norm_step(phi_in, mux).value
            nwx[t] = luxemburg_norm_step(phi_out, muwx).value
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(nx > 0, nwx / nx, 0.0)


def _step_from(svs, abs_steps, model: AlgebraModel, t: int) -> StepFunction:
    pieces = []
    for s, k in zip(svs, model.weights):
        pieces.extend((k, float(v)) for v in s[t])
    pieces.extend((L, float(v)) for L, v in zip(model.intervals, abs_steps[t]))
    return StepFunction(pieces)


def analytic_candidates(model: AlgebraModel, w: OperatorElement, p: float, q: float) -> list[dict[str, Any]]:
    """Extremiser candidates with their exact ratios ``||w x||_q / ||x||_p``.

    For ``p > q`` the candidate is ``|w|^{r/p}`` with ``1/p + 1/r = 1/q``.
    Otherwise each factor contributes the rank-one projection onto the top
    right singular vector of its block (normalised by ``tau(e)^{1/p}``) and
    each finite interval its indicator.
    """
    from .operator_model import PowerMap, apply_calculus, multiply

    w.check(model)
    out: list[dict[str, Any]] = []
    if p > q and math.isfinite(p):
        r = p * q / (p - q)
        x = apply_calculus(PowerMap(r / p), model, w)
        nx = lp_norm(p, model, x).value
        nwx = lp_norm(q, model, multiply(model, w, x)).value
        if nx > 0:
            out.append({"description": f"|w|^(r/p) with r={r:.12g}", "ratio": nwx / nx})
        return out
    for n, (b, f) in enumerate(zip(w.blocks, model.factors)):
        if not np.any(b):
            continue
        _, sv, vh = np.linalg.svd(b)
        u = vh[0].conj()
        blocks = [np.zeros((d, d), dtype=complex) for d in model.dims]
        blocks[n] = np.outer(u, u.conj()) / f.weight ** (1.0 / p if math.isfinite(p) else 0.0)
        e = OperatorElement(tuple(blocks), np.zeros(len(model.intervals)))
        ne = lp_norm(p, model, e).value
        nwe = lp_norm(q, model, multiply(model, w, e)).value
        out.append({"description": f"rank-one projection in factor {n}", "factor": n, "ratio": nwe / ne})
    for j, L in enumerate(model.intervals):
        if w.steps[j] == 0 or math.isinf(L):
            continue
        steps = np.zeros(len(model.intervals), dtype=complex)
        steps[j] = 1.0
        e = OperatorElement(tuple(np.zeros((d, d)) for d in model.dims), steps)
        ne = lp_norm(p, model, e).value
        nwe = lp_norm(q, model, multiply(model, w, e)).value
        out.append({"description": f"indicator of interval {j}", "interval": j, "ratio": nwe / ne})
    return out


def operator_norm_estimate(
    model: AlgebraModel,
    w: OperatorElement,
    p: float,
    q: float,
    trials: int = 1000,
    seed: int = 42,
) -> NormResult:
    """Lower bound for ``||M_w : L^p -> L^q||`` from sampling plus analytic candidates."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")
    ratios = sample_ratios(model, w, p, q, trials, seed) if trials > 0 else np.zeros(0)
    cands = analytic_candidates(model, w, p, q)
    smax = float(np.max(ratios)) if ratios.size else 0.0
    amax = max((c["ratio"] for c in cands), default=0.0)
    best = max(cands, key=lambda c: c["ratio"])["description"] if cands and amax >= smax else "random sample"
    return NormResult(
        max(smax, amax),
        "sampling",
        trials,
        0.0,
        info={"sample_max": smax, "analytic_max": amax, "argmax": best, "seed": seed, "candidates": cands},
    )


def conjugate_pair(phi: OrliczFunction) -> tuple[OrliczFunction, OrliczFunction]:
    """``(phi, phi*)`` convenience."""
    return phi, conjugate(phi)
