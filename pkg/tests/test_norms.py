import math

import numpy as np
import pytest

from ncmult import norms
from ncmult import orlicz as oz
from ncmult.operator_model import AlgebraModel, Factor, OperatorElement, StepFunction, random_model, random_operator, singular_values
from ncmult.orlicz import PowerScaled, Segment, ZeroInfinityThreshold


def one(d=2, k=1.0, intervals=()):
    return AlgebraModel((Factor(d, k),), tuple(intervals))


def test_luxemburg_examples():
    x = OperatorElement((np.diag([3.0, 4.0]),))
    for method in (None, "bisection"):
        r = norms.luxemburg_norm(PowerScaled(1, 2), one(), x, method)
        assert r.value == pytest.approx(5.0, rel=1e-10)
    r = norms.luxemburg_norm(ZeroInfinityThreshold(1.0), one(), x)
    assert r.value == pytest.approx(4.0)
    chi = OperatorElement((np.zeros((1, 1)),), [1.0])
    assert norms.luxemburg_norm(PowerScaled(1, 2), one(1, 1.0, (2.0,)), chi).value == pytest.approx(math.sqrt(2))
    assert norms.luxemburg_norm(PowerScaled(1, 2), one(), OperatorElement.zeros(one())).value == 0.0


def test_luxemburg_bisection_residual():
    phi = oz.PiecewiseConvex((0.0, 1.0), (Segment(0.0, 1.0), Segment(1.0, 2.0)))
    mu = StepFunction([(1.0, 3.0), (2.0, 1.5)])
    r = norms.luxemburg_norm_step(phi, mu)
    assert r.method == "bisection" and r.iterations <= 200
    assert norms.modular(phi, mu, r.value) <= 1.0 + 1e-9
    assert norms.modular(phi, mu, r.value * (1 - 1e-9)) > 1.0


def test_luxemburg_scaled_power_closed_form():
    mu = StepFunction([(1.0, 2.0), (0.5, 1.0)])
    a, p = 3.0, 2.5
    closed = norms.luxemburg_norm_step(PowerScaled(a, p), mu).value
    bis = norms.luxemburg_norm_step(PowerScaled(a, p), mu, "bisection").value
    assert closed == pytest.approx(a ** (1 / p) * norms.lp_norm_step(p, mu).value, rel=1e-14)
    assert bis == pytest.approx(closed, rel=1e-9)


def test_luxemburg_infinite_interval():
    m = AlgebraModel((Factor(1),), (math.inf,))
    x = OperatorElement((np.ones((1, 1)),), [0.0])
    assert norms.luxemburg_norm(PowerScaled(1, 2), m, x).value == pytest.approx(1.0)
    # threshold is zero below cutoff, so a constant on an infinite interval is fine
    mu = StepFunction([(math.inf, 1.0)])
    assert norms.luxemburg_norm_step(ZeroInfinityThreshold(1.0), mu).value == pytest.approx(1.0)
    assert norms.luxemburg_norm_step(PowerScaled(1, 2), mu).infinite


def test_lp_examples():
    assert norms.lp_norm(1, one(2, 2.0), OperatorElement((np.diag([1.0, 2.0]),))).value == pytest.approx(6.0)
    assert norms.lp_norm(4, one(), OperatorElement((np.diag([2.0, 1.0]),))).value == pytest.approx(17**0.25, rel=1e-15)
    assert norms.lp_norm(math.inf, one(), OperatorElement((np.array([[0, 1.0], [0, 0]]),))).value == pytest.approx(1.0)
    assert norms.lp_norm_step(2, StepFunction([(math.inf, 1.0)])).infinite


def test_lp_scaled_avoids_overflow():
    mu = StepFunction([(1.0, 1e200)])
    assert norms.lp_norm_step(4, mu).value == pytest.approx(1e200)


def test_dual_norm_examples():
    star = oz.conjugate(PowerScaled(1, 2))
    r = norms.orlicz_dual_norm(star, one(), OperatorElement((np.diag([1.0, 0.0]),)))
    assert r.value == pytest.approx(1.0, rel=1e-8) and r.info["k"] == pytest.approx(2.0, rel=1e-4)
    assert norms.orlicz_dual_norm(star, one(), OperatorElement.zeros(one())).value == 0.0
    star = oz.conjugate(PowerScaled(1, 1))
    r = norms.orlicz_dual_norm(star, one(1), OperatorElement((np.eye(1),)))
    assert r.value == pytest.approx(1.0, rel=1e-8)


def test_dual_norm_piecewise_oracle():
    # phi = (t - 1)_+^2 on [1, inf): phi* is finite everywhere and the scan agrees
    phi = oz.PiecewiseConvex((0.0, 1.0), (Segment(0.0, 1.0), Segment(1.0, 2.0)))
    mu = StepFunction([(1.0, 3.0), (0.5, 1.0)])
    star = oz.NumericConjugate(phi)
    val = norms.orlicz_dual_norm_step(star, mu).value
    assert val == pytest.approx(norms.dual_norm_scan(star, mu), rel=1e-6)


def test_dual_sandwich_random(rng):
    star = oz.conjugate(PowerScaled(1, 3))
    for _ in range(20):
        m = random_model(rng)
        mu = singular_values(m, random_operator(rng, m))
        lux = norms.luxemburg_norm_step(star, mu).value
        dual = norms.orlicz_dual_norm_step(star, mu).value
        assert lux <= dual * (1 + 1e-6) and dual <= 2 * lux * (1 + 1e-6)


def test_operator_norm_estimate_examples(diag21):
    m = one(1)
    r = norms.operator_norm_estimate(m, OperatorElement((np.eye(1),)), 2, 2, trials=200)
    assert r.value == pytest.approx(1.0)
    model, w = diag21
    r = norms.operator_norm_estimate(model, w, 4, 2, trials=500)
    assert r.value == pytest.approx(17**0.25, rel=1e-12) and r.method == "sampling"
    assert r.info["sample_max"] <= r.value
    m2 = one(2, 1 / 16)
    r = norms.operator_norm_estimate(m2, OperatorElement((np.eye(2),)), 1, 2, trials=200)
    assert r.value == pytest.approx(4.0, rel=1e-12)


def test_sampling_is_deterministic(diag21):
    model, w = diag21
    a = norms.sample_ratios(model, w, 3, 2, 100, seed=7)
    b = norms.sample_ratios(model, w, 3, 2, 100, seed=7)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, norms.sample_ratios(model, w, 3, 2, 100, seed=8))


def test_orlicz_ratio_paths_agree(diag21):
    model, w = diag21
    fast = norms.sample_orlicz_ratios(model, w, PowerScaled(1, 3), PowerScaled(1, 2), 30, seed=3)
    slow = norms.sample_orlicz_ratios(model, w, oz.compose(PowerScaled(1, 1), PowerScaled(1, 3)), PowerScaled(1, 2), 30, seed=3)
    assert np.allclose(fast, slow, rtol=1e-9)


def test_dual_norm_with_linear_conjugate_is_l1():
    # objective 1/k + ||x||_1 decreases without bound in k; bracket must stay finite
    mu = StepFunction([(1.0, 2.0), (0.5, 1.0)])
    r = norms.orlicz_dual_norm_step(PowerScaled(1, 1), mu)
    assert r.value == pytest.approx(2.5, rel=1e-12)
