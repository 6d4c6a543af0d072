"""The twelve acceptance criteria, each with its runtime budget.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_LINES
from mirrorforge import anomaly, intersections as I, mirror as M, modular as MF, rmatrix as R
from mirrorforge.graph_sum import CorrelatorRequest, correlator, quantum_three_point
from mirrorforge.intersections import KappaPsiMonomial
from mirrorforge.rmatrix import LPoly
from mirrorforge.series import PowerSeries
from mirrorforge.suites import SuiteOptions, run_suite


@contextmanager
def criterion(number: int, title: str, budget: float):
    start = time.perf_counter()
    status, note = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if elapsed >= budget:
            note = f" (over budget {budget}s)"
            raise AssertionError(f"criterion {number} took {elapsed:.2f}s, budget {budget}s")
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        ACCEPTANCE_LINES.append(f"criterion {number:>2} {status}  {title}  [{elapsed:.2f}s / {budget:g}s]{note}")


def all_pass(checks):
    bad = [c for c in checks if not c.passed]
    assert not bad, [(c.name, c.first_failure) for c in bad]


def test_01_r_matrix_closed_forms():
    with criterion(1, "R-matrix closed forms r1, r2, r3", 1):
        rs = R.solve_r_recursion(3)
        assert rs[1] == LPoly({2: Fraction(-1, 18)})
        assert rs[2] == LPoly({4: Fraction(1, 648)})
        assert rs[3] == LPoly({6: 2875, 3: -3600, 0: 702}) * Fraction(1, 174960)


def test_02_initial_conditions():
    with criterion(2, "initial-condition consistency at L = 0", 1):
        rs = R.solve_r_recursion(12)
        assert rs[3](0) == Fraction(13, 3240) == R.bernoulli_polynomial(4, Fraction(1, 3)) / 4
        for k in range(1, 13):
            if k % 3:
                assert rs[k](0) == 0, k


def test_03_q0_cross_check():
    with criterion(3, "q = 0 cross-check against the twisted exponential, k <= 8", 1):
        rs = R.solve_r_recursion(8)
        assert rs[1](1) == Fraction(-1, 18) and rs[2](1) == Fraction(1, 648)
        assert R.delta_tw_q0_check(rs, 8).passed


def test_04_picard_fuchs_zinger_zagier():
    with criterion(4, "Picard-Fuchs to order 50, Zinger-Zagier to order 30", 5):
        assert M.pf_check_i0(M.i_series(50, "I0")).passed
        md = M.mirror_data(30)
        assert md.I11 * md.I22 * md.I33 == md.L ** 3
        assert md.ladder[(0, 0)] == md.I22 == md.I33 == md.i0
        assert md.I11 * md.i0 * md.i0 == md.L ** 3


def test_05_generators():
    with criterion(5, "generator relations to order 30", 5):
        md = M.mirror_data(30)
        gv = M.generator_values(md, 3)
        X1, Y1, Y2, Y3 = gv.X[1], gv.Y[1], gv.Y[2], gv.Y[3]
        one = PowerSeries.constant(1, 30)
        assert gv.X[2] == -(X1 * X1) - Y2 * Fraction(1, 2)
        assert md.L ** 2 == Y1 * 3
        assert md.L == Y1 * Y1 * 9 - Y2 * Fraction(9, 2)
        assert one == Y1 ** 3 * 27 - Y1 * Y2 * Fraction(135, 2) + Y3 * Fraction(27, 2)


def test_06_modular():
    with criterion(6, "Serre derivatives (30), identification and dictionary (20)", 10):
        all_pass(MF.serre_derivative_check(MF.theta_series(30), 30))
        md, ts = M.mirror_data(20), MF.theta_series(20)
        all_pass(MF.identification_check(ts, md, 20))
        checks = MF.generator_dictionary_check(md, M.generator_values(md, 3), ts, 20)
        assert len(checks) == 4
        all_pass(checks)


def test_07_qde_and_edge_kernel():
    with criterion(7, "QDE through z^7 at q-order 25; edge numerator divisible by (z+w)", 30):
        cols = R.build_R_columns(8)
        all_pass(R.qde_check(cols, M.mirror_data(25), z_top=7))
        assert R.edge_divisibility_check(8).passed
        assert R.edge_divisibility_series_check(8, 25).passed


def test_08_three_point_oracle():
    with criterion(8, "nine (0,3) correlators equal the quantum product, order 15", 60):
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    res = correlator(CorrelatorRequest(0, (i, j, k), order=15))
                    oracle = quantum_three_point(i, j, k, 15)
                    assert set(oracle) <= {res.lambda_power}
                    assert res.series == oracle.get(res.lambda_power, PowerSeries.constant(0, 15)), (i, j, k)


def test_09_quasimodularity():
    with criterion(9, "Omega_{1,1}(H) weight 2 and Omega_{1,2}(H,H) weight 4, guard 10", 120):
        for ins, weight in (((1,), 2), ((1, 1), 4)):
            req = CorrelatorRequest(1, ins, KappaPsiMonomial(), 25)
            res = correlator(req)
            p, fit = anomaly.fit_finite_generation(res.series, 1, ins, req.degree, 10, res.lambda_power)
            assert fit.passed and fit.check.detail["guard_rows"] >= 10
            qm, cert, _ = anomaly.quasimodularity_certify(p, order=25, guard=10)
            assert qm is not None and qm.weight == weight
            assert cert.check.detail["guard_rows"] >= 10


def test_10_holomorphic_anomaly():
    with criterion(10, "HAE at (1,1) to order 15 and (1,2) to order 12, conventions resolved", 300):
        conv = anomaly.resolve_conventions(15)
        ACCEPTANCE_LINES.append(f"    resolved: loop factor {conv['loop_factor']} from {conv['loop_source']}; "
                                f"split factor {anomaly.SPLIT_FACTOR} ({conv['split_source']})")
        assert conv["loop_factor"] == anomaly.LOOP_FACTOR
        assert anomaly.hae_check(1, (1,), order=15, loop_factor=conv["loop_factor"]).passed
        assert anomaly.hae_check(1, (1, 1), order=12, loop_factor=conv["loop_factor"]).passed


def test_11_two_route_e2():
    with criterion(11, "d/dE2 two-route agreement on Omega_{1,1}(H), order 15", 60):
        res = correlator(CorrelatorRequest(1, (1,), order=25))
        p, _ = anomaly.fit_finite_generation(res.series, 1, (1,), 1, 10, res.lambda_power)
        assert anomaly.two_route_e2_check(p, 15, 10).passed


def test_12_infrastructure(tmp_path):
    with criterion(12, "DVV vs string/dilaton for dim <= 6; lossless cache round trip", 60):
        for g, a in I.stable_keys(6):
            assert I.psi_integral(g, a) == I.psi_integral_reduced(g, a)
        store = I.CacheStore(tmp_path / "wk.json")
        store.absorb_memo()
        store.save()
        back = I.CacheStore(tmp_path / "wk.json")
        back.load()
        assert back.entries == store.entries and len(back.entries) >= 70


@pytest.mark.parametrize("suite", ["rclosed", "initial", "deltatw", "pf", "zz", "generators", "serre",
                                   "identification", "modgene", "qde", "oracle03", "quasimod", "hae",
                                   "e2two", "dvv", "cache"])
def test_suite_reports(suite):
    rep = run_suite(suite, SuiteOptions())
    assert rep.passed, rep.first_failure
