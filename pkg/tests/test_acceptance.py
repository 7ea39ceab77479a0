"""Acceptance criteria 1-9, one pass/fail line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import os
import sys
import time

import numpy as np

from puritydist import (breakpoint_jumps, eval_pdf, integrate_pdf, pdf_3x3,
                        pdf_3xq, pdf_4x4, purity_moment, purity_of_state,
                        purity_pdf, sample_purities, schmidt_spectrum,
                        validate)
from puritydist.sampling import sample_states

sys.path.insert(0, os.path.dirname(__file__))
from conftest import ACCEPTANCE, solution  # noqa: E402

CLOSED_SET = [(2, 2), (2, 6), (3, 3), (3, 4), (3, 7), (4, 4)]
WORKERS = os.cpu_count() or 1


def record(n, title, ok, detail):
    ACCEPTANCE[n] = (title, bool(ok), detail)
    print('criterion %d %-28s %s  %s' % (n, title, 'PASS' if ok else 'FAIL',
                                          detail))
    return bool(ok)


def rel_jump(left, right):
    return abs(left - right) / max(abs(left), abs(right))


def check_1():
    worst_err, worst_t = 0.0, 0.0
    for p, q in CLOSED_SET:
        pdf = purity_pdf(p, q)
        t = time.perf_counter()
        err = abs(integrate_pdf(pdf) - 1)
        worst_t = max(worst_t, time.perf_counter() - t)
        worst_err = max(worst_err, err)
    ok = worst_err <= 1e-9 and worst_t < 1
    return record(1, 'normalization', ok, 'max |int P - 1| = %.2e, '
                  'slowest %.2f s' % (worst_err, worst_t))


def check_2():
    t = time.perf_counter()
    worst = 0.0
    for p, q in CLOSED_SET:
        pdf = purity_pdf(p, q)
        for n in range(1, 7):
            exact = float(purity_moment((p, q), n))
            got = integrate_pdf(pdf, weight=lambda x, n=n: x ** n)
            worst = max(worst, abs(got / exact - 1))
    dt = time.perf_counter() - t
    return record(2, 'moment agreement', worst <= 1e-8 and dt < 10,
                  'max rel err n=1..6 = %.2e, %.2f s' % (worst, dt))


def check_3():
    t = time.perf_counter()
    R = np.linspace(1 / 3, 1, 200)
    diff = np.max(np.abs(eval_pdf(pdf_3xq(3), R) - eval_pdf(pdf_3x3(), R)))
    dt = time.perf_counter() - t
    return record(3, 'degeneracy collapse', diff <= 1e-12 and dt < 1,
                  'max |3xq(3) - 3x3| = %.2e, %.2f s' % (diff, dt))


def check_4():
    t = time.perf_counter()
    jumps = [rel_jump(a, b) for _, a, b in breakpoint_jumps(pdf_3x3())]
    jumps += [rel_jump(a, b) for _, a, b in breakpoint_jumps(pdf_4x4())]
    target = 70 * np.sqrt(3) * np.pi / 108
    (_, left, right), = breakpoint_jumps(pdf_3x3())
    at_half = max(abs(left / target - 1), abs(right / target - 1))
    dt = time.perf_counter() - t
    worst = max(jumps)
    ok = worst <= 1e-9 and at_half <= 1e-9 and dt < 1
    return record(4, 'breakpoint continuity', ok,
                  'max rel jump = %.2e, 3x3(1/2) vs 70 sqrt3 pi/108 = %.2e'
                  % (worst, at_half))


def check_5():
    sol = solution(4)
    R = np.linspace(0.25, 1, 300)
    dev = np.max(np.abs(eval_pdf(sol.pdf, R) - eval_pdf(pdf_4x4(), R)))
    ok = (dev <= 1e-8 and sol.max_held_out_error <= 1e-8
          and sol.seconds < 300 and sol.dps == 60)
    return record(5, 'solver vs closed form', ok,
                  'max |dev| = %.2e, held-out %.2e, %d digits, %.0f s'
                  % (dev, sol.max_held_out_error, sol.dps, sol.seconds))


def check_6():
    ok, parts = True, []
    for q in (5, 6):
        sol = solution(q)
        pdf = sol.pdf
        norm = abs(integrate_pdf(pdf) - 1)
        low = np.min(eval_pdf(pdf, np.linspace(0.25, 1, 10 ** 4)))
        jump = max(rel_jump(a, b) for _, a, b in breakpoint_jumps(pdf))
        held = sol.max_held_out_error
        good = (norm <= 1e-9 and low >= 0 and jump <= 1e-9
                and len(sol.held_out) == 10 and held <= 1e-8
                and sol.seconds < 900)
        ok &= good
        parts.append('q=%d norm %.1e min %.1e jump %.1e held %.1e %.0f s'
                     % (q, norm, low, jump, held, sol.seconds))
    return record(6, 'solver extension', ok, '; '.join(parts))


def check_7():
    ok, parts = True, []
    for dims in [(2, 2), (3, 3), (4, 4)]:
        t = time.perf_counter()
        rep = validate(dims, purity_pdf(*dims), 10 ** 6, seed=2024,
                       workers=WORKERS)
        dt = time.perf_counter() - t
        m1, m2 = rep.moment_deltas[:2]
        good = (rep.ks_statistic <= rep.ks_threshold and m1.within
                and m2.within and dt < 120)
        ok &= good
        parts.append('%dx%d KS %.2e/%.2e %.0f s'
                     % (dims + (rep.ks_statistic, rep.ks_threshold, dt)))
    return record(7, 'Monte Carlo', ok, '; '.join(parts))


def check_8():
    t = time.perf_counter()
    p33, p44 = pdf_3x3(), pdf_4x4()
    start = max(abs(p33(1 / 3)), abs(p44(0.25)))
    end = max(abs(p33(1.0)), abs(p44(1.0)))
    R = 0.5 + 10.0 ** -np.arange(4, 13)
    ratio = purity_pdf(2, 2)(R) / np.sqrt(2 * R - 1)
    lim = np.max(np.abs(ratio - 3))
    dt = time.perf_counter() - t
    ok = start == 0 and end <= 1e-12 and lim <= 1e-9 and dt < 1
    return record(8, 'endpoint behavior', ok,
                  'P(1/p) = %.1e, |P(1)| <= %.1e, 2x2 ratio err %.1e'
                  % (start, end, lim))


def check_9():
    t = time.perf_counter()
    rng = np.random.default_rng(9)
    dual, total = 0.0, 0.0
    for p in (2, 3, 4):
        for q in range(p, 9):
            psi = sample_states((p, q), 10 ** 4, rng)
            a = purity_of_state(psi, (p, q), 'trace')
            b = purity_of_state(psi, (p, q), 'spectrum')
            dual = max(dual, np.max(np.abs(a - b)))
            x = schmidt_spectrum(psi, (p, q))
            total = max(total, np.max(np.abs(x.sum(axis=1) - 1)))
    same = np.array_equal(sample_purities((3, 4), 5000, seed=1),
                          sample_purities((3, 4), 5000, seed=1))
    reports = [validate((3, 3), pdf_3x3(), 20000, seed=5).to_json()
               for _ in range(2)]
    same &= reports[0] == reports[1]
    negative = validate((3, 3), purity_pdf(2, 2), 10 ** 5, seed=1,
                        allow_mismatch=True)
    dt = time.perf_counter() - t
    ok = (dual <= 1e-10 and total <= 1e-10 and same and not negative.passed
          and dt < 60)
    return record(9, 'property suites', ok,
                  'dual path %.1e, sum %.1e, deterministic %s, negative '
                  'control pass=%s, %.0f s'
                  % (dual, total, same, negative.passed, dt))


def test_criterion_1_normalization():
    assert check_1()


def test_criterion_2_moments():
    assert check_2()


def test_criterion_3_degeneracy():
    assert check_3()


def test_criterion_4_continuity():
    assert check_4()


def test_criterion_5_solver_vs_closed_form():
    assert check_5()


def test_criterion_6_solver_extension():
    assert check_6()


def test_criterion_7_monte_carlo():
    assert check_7()


def test_criterion_8_endpoints():
    assert check_8()


def test_criterion_9_properties():
    assert check_9()


if __name__ == '__main__':
    results = [check() for check in (check_1, check_2, check_3, check_4,
                                     check_5, check_6, check_7, check_8,
                                     check_9)]
    sys.exit(0 if all(results) else 1)
