import math

import numpy as np
import pytest

from ncmult.operator_model import (
    AlgebraModel,
    DivergentTrace,
    Factor,
    InfiniteSpectralValue,
    OperatorElement,
    PowerMap,
    RightInverse,
    ShapeError,
    StepFunction,
    TailRule,
    abs_operator,
    adjoint,
    apply_calculus,
    distribution,
    multiply,
    random_model,
    random_operator,
    singular_values,
    spectral_projection,
    submajorizes,
    trace,
)
from ncmult.orlicz import PowerScaled, ZeroInfinityThreshold

NIL = np.array([[0.0, 1.0], [0.0, 0.0]])


def same(pieces, expected):
    return len(pieces) == len(expected) and np.allclose(np.array(pieces, dtype=float), np.array(expected, dtype=float), rtol=1e-12, atol=0)


def one(d=2, k=1.0, intervals=()):
    return AlgebraModel((Factor(d, k),), tuple(intervals))


def test_singular_values_examples():
    m = one(2, 2.0)
    assert same(singular_values(m, OperatorElement((np.diag([1.0, 3.0]),))).pieces, [(2, 3), (2, 1)])
    assert same(singular_values(one(), OperatorElement((NIL,))).pieces, [(1, 1)])
    m = AlgebraModel((Factor(1, 1.0),), (0.5,))
    assert same(singular_values(m, OperatorElement((np.array([[2.0]]),), [4.0])).pieces, [(0.5, 4), (1, 2)])


def test_small_singular_values_are_accurate():
    # rank one: the zero singular value must not come out as sqrt(eps)
    u = np.array([1.0, 2.0, 2.0j]) / 3
    mu = singular_values(one(3), OperatorElement((np.outer(u, u.conj()),)))
    assert same(mu.pieces, [(1, 1.0)])


def test_distribution_examples():
    m = one(2, 2.0)
    x = OperatorElement((np.diag([1.0, 3.0]),))
    assert distribution(m, x, 2.0) == 2.0
    assert distribution(m, x, 3.0) == 0.0
    assert distribution(m, OperatorElement.zeros(m), 0.0) == 0.0
    with pytest.raises(ValueError):
        distribution(m, x, -1.0)


def test_spectral_projection_examples():
    m = one(3)
    e = spectral_projection(m, OperatorElement((np.diag([2.0, 1.0, 0.5]),)), 0.75)
    assert np.allclose(e.blocks[0], np.diag([1, 1, 0]))
    e = spectral_projection(m, OperatorElement((np.diag([2.0, 1.0, 0.5]),)), 2.0)
    assert np.allclose(e.blocks[0], 0)
    e = spectral_projection(m, OperatorElement((np.diag([1.0, 1.0, 0.0]),)), 1.0)
    assert np.allclose(e.blocks[0], 0)
    with pytest.raises(ValueError):
        spectral_projection(one(), OperatorElement((NIL,)), 0.0)


def test_calculus_examples():
    m = one()
    x = OperatorElement((np.diag([1.0, 3.0]),))
    assert np.allclose(apply_calculus(PowerScaled(1, 2), m, x).blocks[0], np.diag([1, 9]))
    with pytest.raises(InfiniteSpectralValue) as exc:
        apply_calculus(ZeroInfinityThreshold(1.0), m, OperatorElement((np.diag([0.5, 2.0]),)))
    assert exc.value.eigenvalue == pytest.approx(2.0) and exc.value.b_phi == 1.0
    # |x| = (x* x)^{1/2}
    r = apply_calculus(PowerMap(0.5), m, OperatorElement((NIL,)))
    assert np.allclose(r.blocks[0], np.diag([0.0, 1.0]))
    assert np.allclose(abs_operator(m, OperatorElement((NIL,))).blocks[0], np.diag([0.0, 1.0]))
    ri = apply_calculus(RightInverse(PowerScaled(1, 2)), m, OperatorElement((np.diag([4.0, 9.0]),)))
    assert np.allclose(ri.blocks[0], np.diag([2.0, 3.0]))
    with pytest.raises(TypeError):
        apply_calculus("sqrt", m, x)


def test_trace_examples():
    m = one()
    x, y = OperatorElement((np.diag([1.0, 2.0]),)), OperatorElement((np.diag([3.0, 4.0]),))
    assert trace(m, multiply(m, x, y)) == 11 == trace(m, multiply(m, y, x))
    n = OperatorElement((NIL,))
    assert trace(m, multiply(m, n, adjoint(m, n))) == 1 == trace(m, multiply(m, adjoint(m, n), n))
    inf_model = AlgebraModel((Factor(1, 1.0),), (math.inf,))
    with pytest.raises(DivergentTrace):
        trace(inf_model, OperatorElement((np.zeros((1, 1)),), [1.0]))
    assert trace(inf_model, OperatorElement((np.ones((1, 1)),), [0.0])) == 1


def test_submajorizes_examples():
    a = StepFunction([(1, 1)])
    assert submajorizes(a, a)
    assert submajorizes(StepFunction([(0.5, 2)]), StepFunction([(1, 1)]))
    assert not submajorizes(StepFunction([(1, 1)]), StepFunction([(2, 1)]))


def test_step_function_normalisation():
    f = StepFunction([(1, 1.0), (2, 3.0), (1, 3.0 * (1 - 1e-12)), (1, 0.0)])
    # the first value of a merged run is kept
    assert f.pieces == [(3.0, 3.0), (1.0, 1.0)]
    g = StepFunction([(math.inf, 1.0), (1.0, 0.5)])
    assert g.tail_value == 1.0 and len(g) == 1
    assert f.value_at(3.0) == 1.0 and f.value_at(2.999) == 3.0 and f.value_at(10) == 0.0
    assert f.integral(3.5) == pytest.approx(9.5)
    assert f.integrate(lambda v: v**2) == pytest.approx(28.0)
    assert g.integrate(lambda v: v) == math.inf
    with pytest.raises(ValueError):
        StepFunction([(0.0, 1.0)])
    with pytest.raises(ValueError):
        StepFunction([(1.0, -1.0)])


def test_step_product_and_dilate():
    f = StepFunction([(1, 2.0), (1, 1.0)])
    g = StepFunction([(0.5, 4.0), (2, 1.0)])
    assert same(f.product(g).pieces, [(0.5, 8.0), (0.5, 2.0), (1, 1.0)])
    assert same(f.dilate(2).pieces, [(2, 2.0), (2, 1.0)])


def test_model_validation():
    with pytest.raises(ValueError):
        AlgebraModel((Factor(1),), (math.inf, math.inf))
    with pytest.raises(ValueError):
        Factor(0)
    with pytest.raises(ValueError):
        Factor(2, -1.0)
    with pytest.raises(ShapeError):
        OperatorElement((np.eye(3),)).check(one())
    with pytest.raises(ValueError):
        OperatorElement((NIL,), hermitian=True)


def test_operator_flags():
    assert OperatorElement((np.eye(2),), [2.0]).is_positive()
    assert not OperatorElement((np.diag([1.0, -1.0]),)).is_positive()
    assert OperatorElement((np.diag([1.0, -1.0]),)).is_hermitian()
    assert not OperatorElement((np.eye(1),), [1j]).is_hermitian()


def test_refine_interval():
    m = AlgebraModel((Factor(1),), (1.0, 2.0))
    r = m.refine_interval(1, [0.5, 1.5])
    assert r.intervals == (1.0, 0.5, 1.5)
    with pytest.raises(ValueError):
        m.refine_interval(1, [1.0, 0.5])


def test_tail_rules():
    geo = TailRule("geometric", A=1.0, rho=0.5)
    assert geo.term(3) == pytest.approx(0.125) and geo.limit() == 0 and geo.sup() == 0.5
    assert geo.count_exceeding(0.1) == 3
    const = TailRule("constant", A=1.0)
    assert const.limit() == 1.0 and const.count_exceeding(0.5) == math.inf
    # a_m / k_m^{1/s} with k_m = 4^-m, a_m = 2^-m, s = 2 gives the constant 1
    ratio_one = TailRule("geometric", A=1.0, rho=0.5, kappa=1.0, sigma=0.25)
    assert ratio_one.term(7, 0.5) == pytest.approx(1.0) and ratio_one.limit(0.5) == 1.0
    power = TailRule("power", A=1.0, beta=1.0)
    assert power.count_exceeding(0.1) == 9 and power.limit() == 0
    tab = TailRule("custom-table", table=((1.0, 1.0), (0.5, 1.0)))
    assert math.isnan(tab.limit()) and not tab.closed
    with pytest.raises(ValueError):
        TailRule("linear")


def test_random_generators_are_seeded():
    m1 = random_model(np.random.default_rng(5), infinite_interval=True)
    m2 = random_model(np.random.default_rng(5), infinite_interval=True)
    assert m1 == m2
    x1 = random_operator(np.random.default_rng(6), m1, "positive")
    x2 = random_operator(np.random.default_rng(6), m1, "positive")
    assert x1 == x2 and x1.is_positive()
    for L, v in zip(m1.intervals, x1.steps):
        if math.isinf(L):
            assert v == 0


def test_to_dict_encodes_complex():
    d = OperatorElement((np.array([[1 + 2j]]),), [3.0]).to_dict()
    assert d["blocks"] == [[[[1.0, 2.0]]]] and d["steps"] == [[3.0, 0.0]]
