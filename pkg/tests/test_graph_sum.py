from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from mirrorforge import anomaly
from mirrorforge.algebra import GenExpr, Graded
from mirrorforge.graph_sum import (CorrelatorRequest, InsufficientZOrder, correlator, quantum_three_point,
                                   tail_sigma, _correlator_symbolic)
from mirrorforge.intersections import KappaPsiMonomial, psi_integral
from mirrorforge.rmatrix import edge_kernel, solve_r_recursion
from mirrorforge.series import Cyc, PowerSeries

K = KappaPsiMonomial
P2 = GenExpr.mono(p=2)
X1P2 = GenExpr.mono(a=1, p=2)
L2P2 = GenExpr.mono(b=2, p=2)


@pytest.mark.parametrize("ins", list(product(range(3), repeat=3)))
def test_three_point_oracle(ins):
    res = correlator(CorrelatorRequest(0, ins, order=15))
    oracle = quantum_three_point(*ins, 15)
    assert set(oracle) <= {res.lambda_power}
    assert res.series == oracle.get(res.lambda_power, PowerSeries.constant(0, 15))


def test_three_point_classical_term():
    # q^0 term of <1, 1, H> is the twisted pairing of 1 and H
    assert correlator(CorrelatorRequest(0, (0, 0, 1), order=0)).series[0] == 3


def test_one_one_graph_by_graph():
    _, count, parts = _correlator_symbolic(CorrelatorRequest(1, (1,)).key(), 8, 2)
    assert count == 2
    contrib = {len(gr.edges()): summed[0] for gr, summed in parts}
    # loop graph assembled by hand from the z^0 w^0 kernel entry and <tau_0^3>_0 = 1
    v00 = edge_kernel(8).v[(0, 0)]
    xi_free = sum((e for (lam, xis), e in v00.parts.items() if sum(xis) % 3 == 0), GenExpr())
    vertex = GenExpr.mono(p=-2) * P2          # Delta^{-1} times the leg (R_0)_1 = P^2
    hand = xi_free * vertex * psi_integral(0, (0, 0, 0)) * 3 * Fraction(1, 2)
    assert contrib[1] == hand == L2P2 * Fraction(-1, 12) + X1P2 * Fraction(-1, 2)
    # smooth genus-one vertex: leg at psi^1 plus one kappa_1 tail
    assert contrib[0] == X1P2 * Fraction(1, 8)
    total = correlator(CorrelatorRequest(1, (1,), order=3))
    assert total.series[0] == Fraction(-1, 12)


def test_omega_11_pairings():
    r = correlator(CorrelatorRequest(1, (1,), K(), order=10))
    assert r.expr == L2P2 * Fraction(-1, 12) + X1P2 * Fraction(-3, 8)
    r = correlator(CorrelatorRequest(1, (0,), K({1: 1}), order=6))
    assert r.series[0] == Fraction(1, 8) and r.lambda_power == 0


def test_tail_sigma():
    rs = solve_r_recursion(3)
    s = tail_sigma(3)
    assert s[1] == rs[1]
    assert s[2] == rs[1] * rs[1] * Fraction(1, 2) - rs[2]


CASES = [
    (1, (1,), K()), (1, (0,), K({1: 1})), (1, (2,), K()), (1, (1, 1), K()), (1, (1, 2), K()),
    (1, (1, 1), K({1: 1})), (0, (1, 1, 1, 1), K()), (0, (0, 1, 2, 2), K()), (2, (), K({}, (1, 1))),
    (2, (), K({}, (2,))), (2, (), K({}, (3,))), (1, (0, 0), K({}, (1,))),
]


@pytest.mark.parametrize("g,ins,pair", CASES)
def test_lambda_power_and_rationality(g, ins, pair):
    req = CorrelatorRequest(g, ins, pair, order=6)
    res = correlator(req)
    assert res.lambda_power == g - 1 + sum(ins) - req.degree
    assert res.series.is_rational()
    total, _, _ = _correlator_symbolic(req.key(), 8, 2)
    assert set(total) <= {res.lambda_power}


@pytest.mark.parametrize("g,ins", [(1, (1,)), (1, (1, 1)), (1, (1, 2)), (1, (0,)), (2, ())])
def test_finite_generation(g, ins):
    d = g - 1 + len(ins)
    if d > 3 * g - 3 + len(ins):
        pytest.skip("degree above dimension")
    res = correlator(CorrelatorRequest(g, ins, K({}, (1,) * (3 * g - 3 + len(ins) - d)), order=25))
    p, fit = anomaly.fit_finite_generation(res.series, g, ins, d, 10, res.lambda_power)
    assert fit.passed and p is not None


def test_explain_parts_sum_to_total():
    res = correlator(CorrelatorRequest(1, (1, 1), order=5), explain=True)
    assert len(res.contributions) == res.graph_count == 5
    acc = PowerSeries.constant(0, 5)
    for c in res.contributions:
        acc = acc + c["series"]
    assert acc == res.series


def test_order_independent_sum():
    _, _, parts = _correlator_symbolic(CorrelatorRequest(1, (1, 1)).key(), 8, 2)
    fwd = sum((s.get(1, GenExpr()) for _, s in parts), GenExpr())
    back = sum((s.get(1, GenExpr()) for _, s in reversed(parts)), GenExpr())
    assert fwd == back


def test_request_validation():
    with pytest.raises(ValueError):
        correlator(CorrelatorRequest(3, (1,)))
    with pytest.raises(ValueError):
        correlator(CorrelatorRequest(1, (3,)))
    with pytest.raises(ValueError):
        correlator(CorrelatorRequest(0, (1, 1)))


def test_insufficient_z_order():
    with pytest.raises(InsufficientZOrder):
        correlator(CorrelatorRequest(2, (), K({}, (1,)), order=3), z_max=2)


def test_odd_xi_power_is_annihilated():
    assert Graded.scalar(1, 5, 0, (1,)).alpha_sum() == {}
    assert Graded.scalar(2, 5, 0, (2, 0)).alpha_sum() == {}
    assert Graded.scalar(2, 5, 0, (0, 0)).alpha_sum() == {0: GenExpr.const(45)}


xis = st.tuples(st.integers(0, 2), st.integers(0, 2))


@given(st.dictionaries(st.tuples(st.integers(-3, 3), xis), st.fractions(max_denominator=9), max_size=5))
def test_alpha_sum_matches_cyclotomic_colour_sum(parts):
    g = Graded(2, {k: GenExpr.const(v) for k, v in parts.items()})
    xi = Cyc(0, 1)
    brute: dict = {}
    for a0, a1 in product(range(3), repeat=2):
        for (lam, (x0, x1)), e in g.parts.items():
            c = e.terms.get((0, 0, 0), Fraction(0)) * xi ** (a0 * x0 + a1 * x1)
            brute[lam] = brute.get(lam, Cyc(0)) + c
    expect = {lam: v for lam, v in brute.items() if v != 0}
    got = {lam: e.terms.get((0, 0, 0)) for lam, e in g.alpha_sum().items()}
    assert {k: Cyc(v) for k, v in got.items()} == expect
