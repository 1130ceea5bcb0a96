"""Acceptance suite: twelve criteria at their stated tolerances and time budgets.

Each criterion prints one ``PASS``/``FAIL`` line.  Run directly
(``python tests/test_acceptance.py``) or through pytest, where the lines are
repeated in the terminal summary.
"""
import time

import numpy as np
import pytest

from bellman_sharp.bellman import (
    bellman_eval, bellman_values, characteristic_batch, evaluate_batch,
)
from bellman_sharp.concavity import (
    explicit_concavity_audit, fd_agreement_audit, q_beta_audit,
    rejected_case_audit, restrictive_concavity_fuzz, sample_sector,
    sector_sign_audit,
)
from bellman_sharp.domain import Params
from bellman_sharp.majorant import envelope_study
from bellman_sharp.martingale import (
    DyadicPair, bellman_process_audit, extremal_sequence, fuzz_campaign,
    random_pair, verify_inequality,
)

pytestmark = pytest.mark.acceptance

GRID = ([(p, t) for p in (1.3, 1.5, 1.8) for t in (0.0, 0.25, 0.5)]
        + [(p, t) for p in (2.0, 2.5, 3.0, 4.0, 6.0) for t in (0.0, 0.5, 1.0, 2.0)])
FD_GRID = ([(p, t) for p in (2.5, 3.0, 4.0) for t in (0.0, 0.3, 1.0)]
           + [(p, t) for p in (1.3, 1.5, 1.8) for t in (0.0, 0.25, 0.5)])
NOT_TWO = [(p, t) for p, t in GRID if p != 2.0]

RESULTS = {}


def _record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def _random_domain(p, n, rng, scale=2.0):
    x1 = rng.normal(size=n) * scale
    x2 = rng.normal(size=n) * scale * 1.5
    x3 = np.abs(x1) ** p + rng.exponential(size=n) * scale ** p
    return x1, x2, x3


# ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    worst = 0.0
    for p, t in GRID:
        par = Params(p, t)
        ref = (max(p - 1, 1 / (p - 1)) ** 2 + t * t) ** (p / 2)
        worst = max(worst, abs(bellman_eval((0, 0, 1), par).value - ref) / ref)
    dt = time.perf_counter() - t0
    return _record(1, worst <= 1e-12 and dt < 1.0,
                   f"B(0,0,1) vs sharp constant, {len(GRID)} pairs: max rel {worst:.2e}, {dt:.2f}s")


def criterion_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20)
    worst = 0.0
    for tau in (0.0, 0.3, 0.5, 1.0, 2.0):
        x1, x2, x3 = _random_domain(2.0, 100_000, rng)
        B = bellman_values(x1, x2, x3, Params(2.0, tau))
        ref = x2 ** 2 - x1 ** 2 + (1 + tau * tau) * x3
        worst = max(worst, float(np.max(np.abs(B - ref) / np.maximum(np.abs(ref), x3))))
    dt = time.perf_counter() - t0
    return _record(2, worst <= 1e-12 and dt < 5.0,
                   f"p=2 closed form on 5x1e5 points: max rel {worst:.2e}, {dt:.2f}s")


def criterion_3():
    t0 = time.perf_counter()
    rng = np.random.default_rng(30)
    wb = wg = 0.0
    for p, t in GRID:
        par = Params(p, t)
        x1 = rng.normal(size=10_000) * 2
        x2 = rng.normal(size=10_000) * 3
        x3 = np.abs(x1) ** p
        B = bellman_values(x1, x2, x3, par)
        D = (x2 * x2 + t * t * x1 * x1) ** (p / 2)
        # x3 = fl(|x1|**p) is within an ulp of the boundary, which moves B by
        # c_sharp * ulp(x3); errors are relative to the size of both terms
        wb = max(wb, float(np.max(np.abs(B - D) / (D + par.c_sharp * x3))))
        if p == 2.0:
            continue
        g1 = rng.uniform(0.01, 3, 2000)
        g3 = g1 ** p * (1 + rng.exponential(size=2000) * 5)
        g2 = par.p_star_minus_1 * g1
        target = par.c_sharp * g3
        for route in ("explicit", "implicit"):
            v = evaluate_batch(g1, g2, g3, par, route=route).value
            wg = max(wg, float(np.max(np.abs(v - target) / target)))
    dt = time.perf_counter() - t0
    return _record(3, wb <= 1e-10 and wg <= 1e-10 and dt < 10.0,
                   f"Dirichlet max rel {wb:.2e}, gluing max rel {wg:.2e}, {dt:.2f}s")


def criterion_4():
    t0 = time.perf_counter()
    worst = 0.0
    for p, t in NOT_TWO:
        par = Params(p, t)
        y1, y2, y3 = sample_sector(par, 500, seed=40)
        r = np.exp(np.random.default_rng(41).uniform(-3, 3, 500))
        y1, y2, y3 = y1 * r, y2 * r, y3 * r ** p
        _, _, M = characteristic_batch(y1, y2, y3, par)
        B = evaluate_batch(y1 - y2, y1 + y2, y3, par, route="implicit").value
        worst = max(worst, float(np.max(np.abs(M - B) / B)))
    dt = time.perf_counter() - t0
    return _record(4, worst <= 1e-9 and dt < 30.0,
                   f"characteristic vs root solve, 500 pts x {len(NOT_TWO)} pairs: "
                   f"max rel {worst:.2e}, {dt:.2f}s")


def criterion_5():
    bad = []
    slow = 0.0
    for p, t in GRID:
        t0 = time.perf_counter()
        rep = restrictive_concavity_fuzz(Params(p, t), 100_000, seed=50)
        slow = max(slow, time.perf_counter() - t0)
        if not rep.passed:
            bad.append(f"({p},{t}):{rep.n_fail}")
    ok = not bad and slow < 60.0
    detail = "all pairs clean" if not bad else "violations " + " ".join(bad)
    return _record(5, ok, f"restrictive concavity 1e5 splits/pair, {detail}, slowest {slow:.1f}s")


def criterion_6():
    t0 = time.perf_counter()
    bad = []
    for p, t in FD_GRID:
        for name, rep in fd_agreement_audit(Params(p, t), 1000, h=1e-4).items():
            if not rep.passed:
                bad.append(f"({p},{t}){name}:{rep.n_fail}")
    dt = time.perf_counter() - t0
    detail = "all agree" if not bad else " ".join(bad)
    return _record(6, not bad and dt < 60.0 * len(FD_GRID),
                   f"FD D2 and second derivatives, {len(FD_GRID)} pairs: {detail}, {dt:.1f}s")


def criterion_7():
    t0 = time.perf_counter()
    bad = []
    for p, t in GRID:
        par = Params(p, t)
        reps = {}
        if p != 2.0:
            reps.update(sector_sign_audit(par, 100_000))
            reps["C1_1"] = rejected_case_audit("C1_1", par, 100_000)
            reps["C3_1"] = rejected_case_audit("C3_1", par, 100_000)
        if p >= 2.0:
            reps["F(s)"] = explicit_concavity_audit(par, 100_000)
        if p > 2.0:
            reps["q"] = q_beta_audit(par, 100_000)
        for name, rep in reps.items():
            if not rep.passed:
                bad.append(f"({p},{t}){name}:{rep.n_fail}")
    dt = time.perf_counter() - t0
    detail = "zero violations" if not bad else "violations " + " ".join(bad)
    return _record(7, not bad and dt < 120.0, f"sign tables 1e5 samples each, {detail}, {dt:.1f}s")


def criterion_8():
    worst = np.inf
    slow = 0.0
    for p, t in GRID:
        par = Params(p, t)
        t0 = time.perf_counter()
        rows = fuzz_campaign(par, 10_000, 10, seed=80, dims=(1, 2))
        slow = max(slow, time.perf_counter() - t0)
        worst = min(worst, min(r[7] / (1.0 + r[5]) for r in rows))
    exact = True
    for t in (0.0, 0.5, 1.0, 2.0):
        rep = verify_inequality(DyadicPair(1, [0.5], [1], [-1.0, 1.0], 0.0), Params(2.0, t))
        exact &= rep.ratio == 1.0 + t * t
    ok = worst >= -1e-9 and exact and slow < 120.0
    return _record(8, ok, f"1e4 pairs/pair, min slack/(1+rhs) {worst:.3e}, p=2 witness exact: {exact}, "
                          f"slowest {slow:.1f}s")


def criterion_9():
    t0 = time.perf_counter()
    fails = 0
    total = 0
    for p, t in [(1.5, 0.25), (3.0, 0.5), (6.0, 2.0)]:
        par = Params(p, t)
        for i in range(1000):
            rng = np.random.default_rng([90, i])
            pair = random_pair(par, int(rng.integers(1, 11)), 1 + i % 2, rng=rng)
            rep = bellman_process_audit(pair, par, nodes=False)
            fails += rep.details["level_fail"]
            total += 1
    dt = time.perf_counter() - t0
    return _record(9, fails == 0 and dt < 60.0 * 3,
                   f"level averages of U on {total} pairs: {fails} increases, {dt:.1f}s")


def criterion_10():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for p, t in [(3.0, 0.5), (1.5, 0.25)]:
        par = Params(p, t)
        _, e1 = envelope_study(par, 1.0, 1.0 / 256)
        _, e2 = envelope_study(par, 1.0, 1.0 / 512)
        factor = e1 / e2
        ok &= e1 <= 5e-3 and 1.5 <= factor <= 3.0
        parts.append(f"({p},{t}) err {e1:.2e} factor {factor:.2f}")
    dt = time.perf_counter() - t0
    return _record(10, ok and dt < 300.0, "; ".join(parts) + f", {dt:.1f}s")


def criterion_11():
    t0 = time.perf_counter()
    rng = np.random.default_rng(110)
    worst = 0.0
    for p, t in GRID:
        par = Params(p, t)
        zero = Params(p, 0.0)
        P = par.p_star_minus_1
        x1 = rng.uniform(0, 2, 1000) * rng.choice([-1, 1], 1000)
        if p >= 2.0:
            x2 = (P * np.abs(x1) + rng.exponential(size=1000) * 2) * rng.choice([-1, 1], 1000)
        else:
            x2 = rng.uniform(0, 1, 1000) * np.abs(x1) / (p - 1) * rng.choice([-1, 1], 1000)
        x3 = np.abs(x1) ** p + rng.exponential(size=1000) * 3
        bt = bellman_values(x1, x2, x3, par)
        b0 = bellman_values(x1, x2, x3, zero)
        rel = (b0 ** (2 / p) + t * t * x3 ** (2 / p)) ** (p / 2)
        worst = max(worst, float(np.max(np.abs(bt - rel) / bt)))
    dt = time.perf_counter() - t0
    return _record(11, worst <= 1e-9 and dt < 10.0,
                   f"perturbation relation on 1e3 points x {len(GRID)} pairs: max rel {worst:.2e}, {dt:.2f}s")


def criterion_12():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for p, t, depth in [(3.0, 0.0, 10), (1.5, 0.25, 10), (4.0, 1.0, 8), (2.0, 0.5, 3)]:
        par = Params(p, t)
        ratios = [r.ratio for r in extremal_sequence(par, depth, restarts=4, seed=12)]
        mono = all(b >= a for a, b in zip(ratios, ratios[1:]))
        bounded = max(ratios) <= par.c_sharp + 1e-9
        ok &= mono and bounded
        if p == 2.0:
            ok &= ratios[0] == par.c_sharp
        parts.append(f"({p},{t}) {ratios[0]:.4g}->{ratios[-1]:.4g} of {par.c_sharp:.4g}")
    dt = time.perf_counter() - t0
    return _record(12, ok and dt < 300.0, "; ".join(parts) + f", {dt:.1f}s")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("n", range(1, 13))
def test_criterion(n):
    assert CRITERIA[n - 1](), RESULTS.get(n)


if __name__ == "__main__":
    for fn in CRITERIA:
        fn()
