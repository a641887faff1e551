import math

import numpy as np
import pytest

from ncmult import multipliers as mp
from ncmult import orlicz as oz
from ncmult.operator_model import AlgebraModel, Factor, OperatorElement, TailRule
from ncmult.orlicz import PowerScaled, ZeroInfinityThreshold

P = PowerScaled
ROOT17 = 17**0.25


def one(d=2, k=1.0, intervals=(), tail=None):
    return AlgebraModel((Factor(d, k),), tuple(intervals), tail)


def test_inverse_factorization_powers(diag21):
    m, w = diag21
    rep = mp.bounded_multiplier_inverse_factorization(m, w, P(1, 4), P(1, 2), P(1, 4), grid=oz.log_grid(1e-2, 1e2, 8), trials=300)
    assert rep.bounded == "yes"
    assert rep.constants["k_upper"] == pytest.approx(1.0) and rep.constants["k_lower"] == pytest.approx(1.0)
    assert rep.norm_upper == pytest.approx(2 * ROOT17, rel=1e-12)
    assert rep.norm_lower == pytest.approx(ROOT17 / 4, rel=1e-12)
    assert rep.constants["samples_within_upper"]


def test_inverse_factorization_zero_and_undetermined(diag21):
    m, _ = diag21
    rep = mp.bounded_multiplier_inverse_factorization(m, OperatorElement.zeros(m), P(1, 4), P(1, 2), P(1, 4), trials=10)
    assert rep.exact_norm == 0
    rep = mp.bounded_multiplier_inverse_factorization(m, diag21[1], P(1, 2), P(1, 2), P(1, 2), trials=10)
    assert rep.bounded == "undetermined"
    assert any("fails" in n for n in rep.notes)


def test_non_positive_w_is_replaced_by_abs(diag21):
    m, _ = diag21
    w = OperatorElement((np.array([[0.0, 2.0], [1.0, 0.0]]),))
    rep = mp.exact_norm_decreasing(m, w, 4, 2, trials=50)
    assert rep.exact_norm == pytest.approx(ROOT17, rel=1e-12)
    assert any("|w|" in n for n in rep.notes)


def test_composition_powers(diag21):
    m, w = diag21
    rep = mp.bounded_multiplier_composition(m, w, P(1, 2), P(1, 2), oz.log_grid(1e-2, 1e2, 8), trials=300)
    phi3 = rep.constants["phi3"]
    assert phi3["kind"] == "power" and phi3["p"] == pytest.approx(4) and phi3["a"] == pytest.approx(0.25)
    assert rep.constants["c"] == pytest.approx(1.0, rel=1e-9)
    nw = 0.25 ** 0.25 * ROOT17
    assert rep.constants["norm_w_phi3"] == pytest.approx(nw, rel=1e-12)
    assert rep.norm_upper == pytest.approx(2 * nw, rel=1e-9)
    assert rep.norm_lower == pytest.approx(nw / 4, rel=1e-9)
    assert rep.constants["part1_holds"]
    assert rep.norm_lower <= ROOT17 <= rep.norm_upper


def test_composition_zero_and_threshold(diag21):
    m, w = diag21
    rep = mp.bounded_multiplier_composition(m, OperatorElement.zeros(m), P(1, 2), P(1, 2), oz.log_grid(1e-2, 1e2, 8), trials=10)
    assert rep.norm_upper == 0 and rep.norm_lower == 0
    rep = mp.bounded_multiplier_composition(m, w, P(1, 1), P(1, 2), oz.log_grid(1e-2, 1e2, 8), trials=10)
    assert rep.constants["phi3"] == {"kind": "threshold", "b": 1.0}
    assert any("infinite beyond b = 1" in n for n in rep.notes)


def test_exact_decreasing_examples(diag21):
    m, w = diag21
    rep = mp.exact_norm_decreasing(m, w, 4, 2, trials=500)
    assert rep.exact_norm == pytest.approx(2.0305431849, abs=1e-9)
    assert rep.constants["extremizer_ok"] and rep.constants["samples_within_exact"]
    assert mp.exact_norm_decreasing(one(1), OperatorElement((np.eye(1),)), 3, 1.5, trials=50).exact_norm == pytest.approx(1.0)
    assert mp.exact_norm_decreasing(m, OperatorElement.zeros(m), 4, 2, trials=10).exact_norm == 0
    with pytest.raises(mp.ParameterError):
        mp.exact_norm_decreasing(m, w, 2, 4)


def test_exact_increasing_examples():
    m = AlgebraModel((Factor(2, 1.0), Factor(2, 1 / 16)))
    rep = mp.exact_norm_increasing(m, OperatorElement((np.eye(2), np.eye(2))), 1, 2, trials=300)
    assert rep.exact_norm == 4.0 and rep.constants["s"] == 2.0
    assert rep.constants["rank_one_ok"] and rep.constants["samples_within_exact"]
    assert any("consistent_up_to_N" in n for n in rep.notes)
    mi = one(1, 1.0, (1.0,))
    rep = mp.exact_norm_increasing(mi, OperatorElement((np.zeros((1, 1)),), [1.0]), 1, 2, trials=10)
    assert rep.bounded == "no" and len(rep.witnesses) == 21
    assert mp.exact_norm_increasing(m, OperatorElement.zeros(m), 1, 2, trials=10).exact_norm == 0


def test_exact_increasing_with_tail():
    tail = TailRule("geometric", A=3.0, rho=0.5)
    rep = mp.exact_norm_increasing(one(1, 1.0, (), tail), OperatorElement((np.eye(1),)), 1, 2, trials=10)
    assert rep.exact_norm == pytest.approx(1.5)
    tail = TailRule("geometric", A=1.0, rho=1.0, sigma=0.5)
    rep = mp.exact_norm_increasing(one(1, 1.0, (), tail), OperatorElement((np.eye(1),)), 1, 2, trials=10)
    assert rep.bounded == "no"


def test_nonatomic_witness_examples():
    m = one(1, 1.0, (1.0,))
    rows = mp.nonatomic_unboundedness_witness(m, OperatorElement((np.zeros((1, 1)),), [1.0]), 1, 2, 4)
    n, a, b = rows[4]
    assert n == 4 and a == pytest.approx(0.25, rel=1e-12) and b >= 1 - 1e-12
    assert rows[0][1] == pytest.approx(1.0)
    rows = mp.nonatomic_unboundedness_witness(m, OperatorElement((np.zeros((1, 1)),), [2.0]), 1, 2, 6)
    assert all(b >= 2 - 1e-12 for _, _, b in rows)
    with pytest.raises(mp.HypothesisViolation):
        mp.nonatomic_unboundedness_witness(m, OperatorElement.zeros(m), 1, 2, 4)


def test_endomorphic_examples(diag21):
    m, w = diag21
    assert mp.endomorphic_norm(m, w, trials=50).exact_norm == pytest.approx(2.0)
    assert mp.endomorphic_norm(m, OperatorElement.zeros(m), trials=10).exact_norm == 0
    u = np.array([[0, 1j], [1, 0]])
    assert mp.endomorphic_norm(m, OperatorElement((u,)), trials=50).exact_norm == pytest.approx(1.0)


def test_compact_endomorphic_verdicts():
    w = OperatorElement((np.diag([1.0, 0.5]),))
    assert mp.compact_endomorphic(one(tail=TailRule("geometric", A=0.5, rho=0.5)), w).compact_verdict == "certified"
    rep = mp.compact_endomorphic(one(tail=TailRule("constant", A=1.0)), w)
    assert rep.compact_verdict == "refuted" and rep.witnesses
    assert mp.compact_endomorphic(one(), w).compact_verdict == "consistent_up_to_N"
    rep = mp.compact_endomorphic(one(1, 1.0, (1.0,)), OperatorElement((np.zeros((1, 1)),), [1.0]))
    assert rep.compact_verdict == "refuted" and mp.TYPE_I_NOTE in rep.notes


def test_compact_orlicz_verdicts():
    tail = TailRule("geometric", A=0.5, rho=0.5)
    w = OperatorElement((np.diag([1.0, 0.5]),))
    m = one(tail=tail)
    assert mp.compact_orlicz(m, w, P(1, 4), P(1, 2), P(1, 4)).compact_verdict == "certified"
    rep = mp.compact_orlicz(m, w, P(1, 4), P(1, 2), ZeroInfinityThreshold(1.0))
    assert rep.compact_verdict == "not_applicable" and any("Delta2" in n or "Δ" in n for n in rep.notes)
    rep = mp.compact_orlicz(one(1, 1.0, (1.0,)), OperatorElement((np.zeros((1, 1)),), [1.0]), P(1, 4), P(1, 2), P(1, 4))
    assert rep.compact_verdict == "refuted"
    rep = mp.compact_orlicz(m, w, P(1, 4), P(1, 2), mode="composition", psi=P(1, 2))
    assert rep.compact_verdict == "certified"


def test_compact_lp_increasing_verdicts():
    m = one(1, 1.0, (), TailRule("power", A=1.0, beta=1.0))
    assert mp.compact_lp_increasing(m, OperatorElement((np.eye(1),)), 1, 2).compact_verdict == "certified"
    m = AlgebraModel((Factor(1, 0.25),), (), TailRule("geometric", A=0.5, rho=0.5, kappa=0.25, sigma=0.25))
    assert mp.compact_lp_increasing(m, OperatorElement((np.array([[0.5]]),)), 1, 2).compact_verdict == "refuted"
    # the tail rule describes w itself, so w = 0 means a zero tail as well
    m0 = AlgebraModel((Factor(1, 0.25),), (), TailRule("geometric", A=0.0, rho=0.5, kappa=0.25, sigma=0.25))
    assert mp.compact_lp_increasing(m0, OperatorElement.zeros(m0), 1, 2).compact_verdict == "certified"


def test_e1_examples():
    tab = mp.tensor_counterexample_e1(1, 2, 20)
    for n, mm, a, b in tab.rows:
        assert a == pytest.approx(2.0 ** (-n / 2), rel=1e-12) and b == pytest.approx(1.0, abs=1e-12)
    assert tab.rows[-1][2] == pytest.approx(2**-10.5, rel=1e-12)
    tab = mp.tensor_counterexample_e1(1, 2, 5, pairs=[(3, 3)])
    assert tab.rows[0][2:] == (0.0, 0.0)
    tab = mp.tensor_counterexample_e1(2, 4, 5, pairs=[(3, 2)])
    assert tab.rows[0][2] == pytest.approx(2**-0.75) and tab.rows[0][3] == pytest.approx(1.0)
    assert mp.tensor_counterexample_e1(1, 2, 50).tail_sum < 1e-6
    with pytest.raises(mp.ParameterError):
        mp.tensor_counterexample_e1(1, 2, 61)


def test_report_invariants_enforced():
    rep = mp.MultiplierReport("endomorphic", norm_lower=2.0, norm_upper=1.0)
    with pytest.raises(AssertionError):
        rep.validate()
    with pytest.raises(ValueError):
        mp.MultiplierReport("nonsense")


def test_report_csv(diag21):
    m, w = diag21
    text = mp.exact_norm_decreasing(m, w, 4, 2, trials=20).to_csv()
    assert text.startswith("field,value\n") and "exact_norm," in text and "replay.digest" in text
