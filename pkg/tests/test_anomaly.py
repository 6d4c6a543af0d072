from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mirrorforge import anomaly as A, mirror as M, modular as MF
from mirrorforge.graph_sum import CorrelatorRequest, correlator
from mirrorforge.intersections import KappaPsiMonomial as K
from mirrorforge.mirror import GeneratorPoly
from mirrorforge.series import PowerSeries


def omega(g, ins, pair=None, order=25):
    return correlator(CorrelatorRequest(g, ins, pair or K(), order))


def test_generator_basis():
    assert A.generator_basis(1) == [(1, 0), (0, 2)]
    assert set(A.generator_basis(2)) == {(2, 0), (1, 2), (0, 4), (0, 1)}


def test_fit_pure_x1_roundtrip():
    md = M.mirror_data(20)
    f = M.generator_values(md, 1).X[1] * md.i0_over_L_pow(2)
    p, res = A.fit_finite_generation(f, 1, (1,), 1)
    assert res.passed and p.terms == {(1, 0): 1}


def test_fit_omega_11():
    r = omega(1, (1,))
    p, res = A.fit_finite_generation(r.series, 1, (1,), 1, 10, r.lambda_power)
    assert res.passed
    assert p.terms == {(1, 0): Fraction(-3, 8), (0, 2): Fraction(-1, 12)}
    assert res.check.detail["guard_rows"] >= 10


def test_fit_negative_control():
    f = PowerSeries([Fraction(1, k + 1) for k in range(25)])
    p, res = A.fit_finite_generation(f, 1, (1,), 1)
    assert p is None and not res.passed


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=12)


@given(st.integers(min_value=1, max_value=3), st.data())
def test_fit_then_expand_reproduces(d, data):
    md = M.mirror_data(24)
    basis = A.generator_basis(d)
    p = GeneratorPoly({ab: data.draw(coeffs) for ab in basis}, 2, 0, d)
    f = p.evaluate(md)
    q, res = A.fit_finite_generation(f, 1, (1,), d)
    assert res.passed
    assert q.evaluate(md) == f
    assert {k: v for k, v in q.terms.items() if v} == {k: v for k, v in p.terms.items() if v}


def test_certify_weight_two():
    r = omega(1, (1,))
    p, _ = A.fit_finite_generation(r.series, 1, (1,), 1)
    qm, res, _ = A.quasimodularity_certify(p, order=25)
    assert qm is not None and qm.weight == 2
    assert qm.terms == {(0, 1, 0, 0): Fraction(-1, 32), (1, 0, 0, 0): Fraction(-5, 96)}


def test_certify_weight_four():
    r = omega(1, (1, 1))
    p, _ = A.fit_finite_generation(r.series, 1, (1, 1), 2)
    qm, res, _ = A.quasimodularity_certify(p, order=25)
    assert qm is not None and qm.weight == 4 == 2 * 1 - 2 + 2 * 2
    assert res.check.detail["guard_rows"] >= 10


def test_certify_pure_generator():
    qm, res, _ = A.quasimodularity_certify(GeneratorPoly({(1, 0): Fraction(1)}, 2, 0, 1), order=25)
    assert qm.terms == {(0, 1, 0, 0): Fraction(1, 12), (1, 0, 0, 0): Fraction(-1, 12)}


@pytest.mark.parametrize("g,ins", [(1, (1,)), (1, (1, 1)), (1, (1, 1, 1))])
def test_certified_weights(g, ins):
    r = omega(g, ins)
    d = CorrelatorRequest(g, ins).degree
    p, res = A.fit_finite_generation(r.series, g, ins, d, 10, r.lambda_power)
    assert res.passed
    qm, _, _ = A.quasimodularity_certify(p, order=30)
    assert qm is not None and qm.weight == 2 * g - 2 + 2 * len(ins)


def test_e2_derivative_examples():
    c = Fraction(7, 5)
    lin = GeneratorPoly({(1, 0): c}, 2, 0, 1)
    assert A.e2_derivative_series(lin, 10) == PowerSeries.constant(c / 12, 10)
    free = GeneratorPoly({(0, 2): Fraction(3)}, 2, 0, 1)
    assert A.e2_derivative_series(free, 10).is_zero()


def test_two_route_e2():
    r = omega(1, (1,))
    p, _ = A.fit_finite_generation(r.series, 1, (1,), 1)
    assert A.two_route_e2_check(p, 15).passed


def test_two_route_e2_weight_four():
    r = omega(1, (1, 1))
    p, _ = A.fit_finite_generation(r.series, 1, (1, 1), 2)
    assert A.two_route_e2_check(p, 15).passed


def test_e2_partial_consistency_against_dictionary():
    # d/dE2 of (E2 - a^2)/12 is 1/12, matching (1/12) d/dX1 of P^2 X1
    qm = MF.QuasiModPoly({(0, 1, 0, 0): Fraction(1, 12), (1, 0, 0, 0): Fraction(-1, 12)}, 2)
    assert MF.e2_partial(qm).terms == {(0, 0, 0, 0): Fraction(1, 12)}


# HAE -------------------------------------------------------------------------

def test_hae_11():
    rep = A.hae_check(1, (1,), order=15)
    assert rep.passed
    assert rep.convention_flags["loop_exercised"] is True
    assert rep.rhs_split.is_zero()        # no stable splitting of M_{1,1}


def test_hae_12():
    rep = A.hae_check(1, (1, 1), order=12)
    assert rep.passed


def test_hae_wrong_loop_factor_fails():
    assert not A.hae_check(1, (1,), order=10, loop_factor=Fraction(1)).passed


def test_hae_11_unit_values():
    t = A.hae_terms(1, (1,), K(), 8)
    assert t["lhs"][0] == Fraction(-1, 32)
    assert t["dilaton"][0] == Fraction(1, 96)


def test_resolve_conventions():
    conv = A.resolve_conventions(15)
    assert conv["loop_factor"] == Fraction(1, 2)
    assert conv["split_factor"] is None


def test_resolve_factor_cases():
    unit = PowerSeries([1, 2, 3])
    assert A.resolve_factor(unit * Fraction(1, 2), unit) == Fraction(1, 2)
    assert A.resolve_factor(PowerSeries([0], order=2), PowerSeries([0], order=2)) == "free"
    assert A.resolve_factor(PowerSeries([1], order=2), PowerSeries([0], order=2)) is None
    assert A.resolve_factor(unit * 5, unit) is None


@pytest.mark.parametrize("kappa", [(1, 1), (2,)])
def test_genus_two_hae(kappa):
    rep = A.hae_check(2, (), K({}, kappa), order=12)
    assert rep.passed
    if kappa == (1, 1):
        assert rep.convention_flags["split_exercised"]


def test_genus_two_split_resolution():
    conv = A.resolve_conventions(12, genus_two=True)
    assert conv["split_factor"] == Fraction(1, 2)


def test_hae_rejects_genus_zero():
    with pytest.raises(ValueError):
        A.hae_terms(0, (1, 1, 1), K(), 5)
