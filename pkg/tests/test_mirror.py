from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from mirrorforge import mirror as M, series as S
from mirrorforge.series import PowerSeries


def i0_oracle(d):
    return factorial(3 * d) // factorial(d) ** 3


def i1_oracle(d):
    """(3d)!/(d!)^3 * 3 * (H_{3d} - H_d)."""
    harmonic = lambda n: sum(Fraction(1, j) for j in range(1, n + 1))  # noqa: E731
    return i0_oracle(d) * 3 * (harmonic(3 * d) - harmonic(d))


def test_i_series_coefficients():
    assert list(M.i_series(3, "I0").coeffs) == [1, 6, 90, 1680]
    i1 = M.i_series(6, "I1")
    assert i1[0] == 0 and i1[1] == 15
    assert list(i1.coeffs) == [i1_oracle(d) for d in range(7)]


@given(st.integers(min_value=0, max_value=30))
def test_i0_matches_multinomial(d):
    assert M.i_series(d, "I0")[d] == i0_oracle(d) == comb(3 * d, d) * comb(2 * d, d)


def test_pf_order_50():
    assert M.pf_check_i0(M.i_series(50, "I0")).passed


def test_pf_order_zero_is_vacuous():
    assert M.pf_check_i0(M.i_series(0, "I0")).passed


@pytest.mark.parametrize("bump", [1, 4, 9])
def test_pf_flags_perturbation(bump):
    i0 = M.i_series(12, "I0")
    cs = list(i0.coeffs)
    cs[bump] += 1
    chk = M.pf_check_i0(PowerSeries(cs))
    assert not chk.passed
    assert chk.first_failure[0] == bump


@given(st.integers(min_value=1, max_value=25))
def test_pf_residual_zero_any_order(n):
    assert M.pf_check_i0(M.i_series(n, "I0")).passed


@pytest.fixture(scope="module")
def md():
    return M.mirror_data(30)


def test_ladder_base_and_units(md):
    assert md.ladder[(0, 0)] == md.i0
    for m in range(4):
        assert md.ladder[(m, m)][0] == 1
    assert md.i2[0] == 0 and md.i3[0] == 0


def test_i11_two_routes(md):
    route2 = md.L ** 3 * S.invert_unit(md.i0 * md.i0)
    assert md.I11 == route2
    assert md.I11.truncate(2) == PowerSeries([1, 15, 333])


def test_zinger_zagier(md):
    checks = M.zinger_zagier_check(md)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert md.I11 * md.I22 * md.I33 == md.L ** 3
    assert md.I22 == md.i0 and md.I33 == md.i0


def test_mirror_map(md):
    assert md.mirror_Q.truncate(3) == PowerSeries([0, 1, 15, 279])
    assert md.mirror_Q[0] == 0
    # q dQ/dq = I11 Q, compared after dividing by Q
    Q_over_q = PowerSeries(list(md.mirror_Q.coeffs[1:]) + [0])
    assert S.qddq(md.mirror_Q) == md.I11 * md.mirror_Q
    assert Q_over_q[0] == 1
    ident = PowerSeries.monomial(1, md.order)
    assert S.compose(md.mirror_Q, md.inverse_q).retag("q") == ident
    assert all(c.passed for c in M.mirror_map_checks(md))


def test_generator_values(md):
    gv = M.generator_values(md, 4)
    assert gv.X[1].truncate(1) == PowerSeries([0, -3])
    assert gv.Y[1] == md.L ** 2 * Fraction(1, 3)
    assert gv.Y[1][0] == Fraction(1, 3)


def test_generator_relations(md):
    gv = M.generator_values(md, 4)
    checks = M.generator_relations_check(md, gv)
    assert all(c.passed for c in checks), [c.name for c in checks if not c.passed]


def test_generator_constant_terms(md):
    gv = M.generator_values(md, 3)
    y1, y2, y3 = (gv.Y[k][0] for k in (1, 2, 3))
    assert 27 * y1 ** 3 - Fraction(135, 2) * y1 * y2 + Fraction(27, 2) * y3 == 1


def test_generator_relations_flag_perturbation(md):
    gv = M.generator_values(md, 4)
    gv.Y[2] = gv.Y[2] + PowerSeries.monomial(3, md.order)
    assert not all(c.passed for c in M.generator_relations_check(md, gv))


def test_y4_relation():
    assert M.y4_from_relation() == {(2, 1, 0): -6, (0, 2, 0): 5, (1, 0, 1): 5}


def test_generator_poly_evaluation(md):
    p = M.GeneratorPoly({(1, 0): Fraction(1)}, 2, 0, 1)
    gv = M.generator_values(md, 1)
    assert p.evaluate(md) == gv.X[1] * md.i0_over_L_pow(2)
    assert p.d_x1() == M.GeneratorPoly({(0, 0): Fraction(1)}, 2, 0, 0)


@given(st.integers(min_value=-4, max_value=6))
def test_L_powers_multiply(e):
    md = M.mirror_data(12)
    assert md.L_pow(e) * md.L_pow(-e) == PowerSeries.constant(1, 12)
