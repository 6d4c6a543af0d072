from fractions import Fraction
from math import comb

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from mirrorforge import mirror as M, modular as MF
from mirrorforge.series import PowerSeries

ORDER = 30


def chi3(d):
    return (0, 1, -1)[d % 3]


def a_oracle(n):
    """Representations by x^2+xy+y^2: 6 * sum_{d|n} chi_{-3}(d)."""
    return 1 if n == 0 else 6 * sum(chi3(d) for d in sp.divisors(n))


def b_oracle(order):
    """eta(tau)^3 / eta(3 tau) as an integer q-expansion."""
    def mul(u, v):
        return [sum(u[i] * v[k - i] for i in range(k + 1)) for k in range(order + 1)]
    out = [1] + [0] * order
    for n in range(1, order + 1):
        factor = [0] * (order + 1)
        factor[0], factor[n] = 1, -1
        for _ in range(3):
            out = mul(out, factor)
        # divide by (1 - Q^{3n}) = multiply by the geometric series
        if 3 * n <= order:
            geo = [1 if k % (3 * n) == 0 else 0 for k in range(order + 1)]
            out = mul(out, geo)
    return out


@pytest.fixture(scope="module")
def ts():
    return MF.theta_series(ORDER)


def test_theta_coefficients(ts):
    assert list(ts.a.coeffs[:5]) == [1, 6, 0, 6, 6]
    assert list(ts.a.coeffs) == [a_oracle(n) for n in range(ORDER + 1)]
    assert ts.b[1] == -3
    assert list(ts.b.coeffs) == b_oracle(ORDER)
    assert all(Fraction(c).denominator == 1 for c in ts.b.coeffs)


def test_eisenstein(ts):
    assert list(MF.eisenstein(2, 2).coeffs) == [1, -24, -72]
    assert MF.eisenstein(4, 3)[1] == 240
    assert MF.eisenstein(6, 3)[0] == 1
    for k, c in ((2, -24), (4, 240), (6, -504)):
        e = MF.eisenstein(k, 12)
        assert list(e.coeffs[1:]) == [c * sp.divisor_sigma(n, k - 1) for n in range(1, 13)]


@given(st.integers(min_value=0, max_value=40))
def test_coefficients_are_integers(n):
    ts = MF.theta_series(n)
    for s in (ts.a, ts.b, MF.eisenstein(2, n), MF.eisenstein(4, n), MF.eisenstein(6, n)):
        assert all(Fraction(c).denominator == 1 for c in s.coeffs)


def test_serre_identities(ts):
    assert all(c.passed for c in MF.serre_derivative_check(ts, 30))
    assert Fraction(1, 12) + Fraction(1, 4) - Fraction(1, 3) == 0


def test_serre_flags_perturbed_b(ts):
    cs = list(ts.b.coeffs)
    cs[4] = cs[4] + 1
    bad = MF.ThetaSeries(ts.a, PowerSeries(cs, "Q"), ts.order)
    assert not all(c.passed for c in MF.serre_derivative_check(bad, 30))


def test_identification():
    md = M.mirror_data(20)
    checks = MF.identification_check(MF.theta_series(20), md, 20)
    assert all(c.passed for c in checks)
    aQ = MF.to_Q(md.i0, md)
    assert aQ[0] == 1 and aQ[1] == 6


# weight basis ----------------------------------------------------------------

def stars_and_bars_count(weight):
    """#{(i, j, k, l) >= 0 : 2i + 2j + 4k + 6l = weight}."""
    h = weight // 2
    return sum(comb(h - 2 * k - 3 * l + 1, 1)
               for l in range(h // 3 + 1) for k in range((h - 3 * l) // 2 + 1))


def test_weight_basis_examples():
    assert MF.weight_basis(0) == [(0, 0, 0, 0)]
    assert set(MF.weight_basis(2)) == {(1, 0, 0, 0), (0, 1, 0, 0)}
    assert set(MF.weight_basis(6)) == {(3, 0, 0, 0), (2, 1, 0, 0), (1, 2, 0, 0), (0, 3, 0, 0),
                                       (1, 0, 1, 0), (0, 1, 1, 0), (0, 0, 0, 1)}


@given(st.integers(min_value=0, max_value=20).map(lambda h: 2 * h))
def test_weight_basis_exhaustive(w):
    basis = MF.weight_basis(w)
    assert len(set(basis)) == len(basis) == stars_and_bars_count(w)
    assert all(2 * i + 2 * j + 4 * k + 6 * l == w for i, j, k, l in basis)


def test_weight_basis_rejects_odd():
    with pytest.raises(ValueError):
        MF.weight_basis(3)


# fitting -------------------------------------------------------------------

def test_fit_generator_x1():
    md = M.mirror_data(25)
    gv = M.generator_values(md, 1)
    f = MF.to_Q(md.i0_over_L_pow(2) * gv.X[1], md)
    poly, res = MF.fit_to_qmod(f, 2, guard=10)
    assert res.passed
    assert poly.terms == {(0, 1, 0, 0): Fraction(1, 12), (1, 0, 0, 0): Fraction(-1, 12)}


def test_fit_zero_and_roundtrip(ts):
    poly, res = MF.fit_to_qmod(PowerSeries.constant(0, 20, "Q"), 4)
    assert res.passed and poly.is_zero()
    f = MF._monomial_value((1, 1, 0, 0), ts, 20)
    poly, res = MF.fit_to_qmod(f, 4, guard=10)
    assert poly.terms == {(1, 1, 0, 0): 1}


def test_fit_needs_guard_rows():
    with pytest.raises(MF.InsufficientOrder):
        MF.fit_to_qmod(PowerSeries.constant(1, 8, "Q"), 4, guard=10)


def test_fit_rejects_non_quasimodular():
    f = PowerSeries([1, 1, 1] + [0] * 20, "Q")
    poly, res = MF.fit_to_qmod(f, 4, guard=10)
    assert poly is None and not res.passed


coeff = st.fractions(min_value=-6, max_value=6, max_denominator=5)


@given(st.sampled_from([2, 4, 6]), st.data())
def test_fit_then_expand_reproduces_guards(w, data):
    ts = MF.theta_series(30)
    basis = MF.weight_basis(w)
    terms = {m: data.draw(coeff) for m in basis}
    target = MF.QuasiModPoly(terms, w)
    f = target.evaluate(ts, 30)
    poly, res = MF.fit_to_qmod(f, w, guard=10, ts=ts)
    assert res.passed
    assert poly.evaluate(ts, 30) == f
    assert poly == target


def test_dictionary():
    md = M.mirror_data(20)
    gv = M.generator_values(md, 3)
    checks = MF.generator_dictionary_check(md, gv, MF.theta_series(20), 20)
    assert len(checks) == 4 and all(c.passed for c in checks)
    assert gv.X[1][1] == -3 == Fraction(-24 - 12, 12)


def test_e2_partial():
    assert MF.e2_partial(MF.QuasiModPoly({(1, 1, 0, 0): 1}, 4)).terms == {(1, 0, 0, 0): 1}
    assert MF.e2_partial(MF.QuasiModPoly({(0, 2, 0, 0): 1}, 4)).terms == {(0, 1, 0, 0): 2}
    assert MF.e2_partial(MF.QuasiModPoly({(2, 0, 0, 0): 1}, 4)).is_zero()


def test_quasimod_weight_validation():
    with pytest.raises(ValueError):
        MF.QuasiModPoly({(1, 0, 0, 0): 1}, 4)


def test_cubic_relations(ts):
    res = MF.cubic_generator_fit(ts)
    assert res["E4"]["pass"] and res["E4"]["coeffs"] == {"a^4*b^0": "9", "a^1*b^3": "-8"}
    assert res["E6"]["pass"]
