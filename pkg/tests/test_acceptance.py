"""Acceptance criteria at their stated tolerances.

Each test prints ``PASS criterion N: ...`` or ``FAIL criterion N: ...``; the
lines are also collected into a terminal summary section.  Run directly with
``python3 tests/test_acceptance.py`` for the lines alone.
"""

import json
import subprocess
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from ncmult import orlicz as oz
from ncmult.cli import split_report
from ncmult.verification import ACCEPTANCE_SUITES, printed_psi_star_constant, psi_star_constant, run_suite

SEED = 42
BUDGET_SECONDS = 60.0
_elapsed: dict = {}


@lru_cache(maxsize=None)
def suite(name):
    t0 = time.perf_counter()
    res = run_suite(name, SEED)
    _elapsed[name] = time.perf_counter() - t0
    return res


def summary(res, *props):
    out = []
    for k in props or sorted(res.properties):
        st = res.properties[k]
        out.append(f"{k} [{st.checks - st.failures}/{st.checks}, worst {st.worst:.2e} vs tol {st.tolerance:.0e}]")
    return "; ".join(out)


def criterion_1():
    res = suite("young")
    return res.passed, f"{len(res.info['pool'])} functions x {res.info['grid_points']} points; " + summary(
        res, "phi(phi^-1(t)) <= t", "t <= phi^-1(phi(t))", "t <= phi^-1(t) phi*^-1(t)", "phi^-1(t) phi*^-1(t) <= 2t"
    )


def criterion_2():
    res = suite("conjugate")
    part_a = res.properties["numeric conjugate of t^p"]
    s = np.logspace(-2, 2, 401)
    worst_b, derived, notes = 0.0, 0.0, []
    for p, q in ((4.0, 2.0), (3.0, 1.5)):
        r = q * p / (p - q)
        num = np.asarray(oz.conjugate_eval(oz.PowerScaled(1.0, p / q), s))
        printed = printed_psi_star_constant(p, q) * s ** (r / q)
        ours = psi_star_constant(p, q) * s ** (r / q)
        eb = float(np.max(np.abs(num - printed) / printed))
        ed = float(np.max(np.abs(num - ours) / ours))
        worst_b, derived = max(worst_b, eb), max(derived, ed)
        notes.append(f"({p:g},{q:g}) printed coeff {printed_psi_star_constant(p, q):.6f} vs numeric {psi_star_constant(p, q):.6f}")
    ok_a = part_a.failures == 0 and part_a.worst <= 1e-8
    ok_b = worst_b <= 1e-8
    detail = (
        f"(a) t^p conjugate worst rel {part_a.worst:.2e} [{'ok' if ok_a else 'fail'}]; "
        f"(b) psi* vs 1/((p/q)^((r/q)/p) (r/q)) s^(r/q): worst rel {worst_b:.3e} [{'ok' if ok_b else 'fail'}]; "
        + "; ".join(notes)
        + f"; info: (q/r)(p/q)^(-r/p) s^(r/q) matches to {derived:.1e}"
    )
    return ok_a and ok_b, detail


def criterion_3():
    res = suite("svf-identity")
    return res.passed, summary(res)


def criterion_4():
    res = suite("fack-kosaki")
    return res.passed, summary(res)


def criterion_5():
    res = suite("exact-decreasing")
    return res.passed, summary(res) + f"; fixture {res.info['fixture_value']:.12f}"


def criterion_6():
    res = suite("exact-increasing")
    return res.passed, summary(res) + f"; fixture {res.info['fixture_value']!r}"


def criterion_7():
    res = suite("nonatomic")
    return res.passed, summary(res)


def criterion_8():
    res = suite("duality")
    return res.passed, summary(res)


def criterion_9():
    res = suite("bracket")
    info = res.info
    return res.passed, summary(res) + (
        f"; info: {info['individual_samples_below_norm_lower']} of {info['samples_total']} "
        "individual samples fall below norm_lower"
    )


def criterion_10():
    res = suite("e1")
    return res.passed, summary(res) + f"; tail sum {res.info['lp_tail_sum']:.3e}"


def criterion_11():
    res = suite("compactness")
    return res.passed, summary(res)


def _verify_run():
    proc = subprocess.run(
        [sys.executable, "-m", "ncmult", "verify", "--suite", "all", "--seed", str(SEED)],
        capture_output=True,
        text=True,
        check=False,
    )
    return proc.returncode, proc.stdout


def criterion_12():
    c1, out1 = _verify_run()
    c2, out2 = _verify_run()
    h1, b1 = split_report(out1)
    _, b2 = split_report(out2)
    same = b1 == b2
    secs = h1["timings"]["total_seconds"]
    fails = json.loads(b1)["summary"]["failures"]
    ok = same and c1 == 0 and c2 == 0
    return ok, f"exit codes {c1},{c2}; bodies identical: {same} ({len(b1)} bytes); failures {fails}; one run {secs:.1f}s"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}


def evaluate(n):
    ok, detail = CRITERIA[n]()
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"


@pytest.mark.parametrize("n", list(CRITERIA), ids=[f"criterion_{i}" for i in CRITERIA])
def test_criterion(n, acceptance_log):
    ok, line = evaluate(n)
    print(line)
    acceptance_log.append(line)
    assert ok, line


def test_time_budget():
    for name in ACCEPTANCE_SUITES:
        suite(name)
    total = sum(_elapsed[n] for n in ACCEPTANCE_SUITES)
    print(f"acceptance suites took {total:.1f}s (budget {BUDGET_SECONDS:.0f}s)")
    assert total < BUDGET_SECONDS


if __name__ == "__main__":
    failed = 0
    for n in CRITERIA:
        ok, line = evaluate(n)
        failed += not ok
        print(line, flush=True)
    sys.exit(1 if failed else 0)
