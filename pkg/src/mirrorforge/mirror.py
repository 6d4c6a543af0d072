"""Geometric side: I-function, Birkhoff ladder, mirror map, degree generators."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial

from . import series as S
from .report import Check, equality_check, residual_check
from .series import PowerSeries

THIRD = Fraction(1, 3)


def i_series(d_max: int, which: str = "I0") -> PowerSeries:
    """Closed forms of I0 and I1 up to q^d_max."""
    if d_max < 0:
        raise ValueError("d_max must be non-negative")
    coeffs = []
    for d in range(d_max + 1):
        c = Fraction(factorial(3 * d), factorial(d) ** 3)
        if which == "I0":
            coeffs.append(c)
        elif which == "I1":
            coeffs.append(c * sum(Fraction(3, m) for m in range(d + 1, 3 * d + 1)))
        else:
            raise ValueError(f"unknown series {which!r}")
    return PowerSeries(coeffs, "q")


def _xpoly_mul(a, b, n):
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a):
        if ai:
            for j in range(n + 1 - i):
                out[i + j] += ai * b[j]
    return out


def _xpoly_inv(a, n):
    out = [Fraction(0)] * (n + 1)
    out[0] = 1 / a[0]
    for k in range(1, n + 1):
        out[k] = -sum(a[i] * out[k - i] for i in range(1, k + 1)) / a[0]
    return out


@lru_cache(maxsize=None)
def frobenius_coefficients(order: int, x_max: int = 3) -> tuple[PowerSeries, ...]:
    """I_0..I_{x_max}: coefficients of (H/z)^k in the Frobenius solution.

    With H^3 = lambda^3 the operator D_H^3 - lambda^3 - q prod(3 D_H + k z), divided by
    z^3, reads (x+theta)^3 - x^3 - q (3x+3theta+1)(3x+3theta+2)(3x+3theta+3), x = H/z.
    On sum_d a_d(x) q^d it gives the recurrence
        ((x+d)^3 - x^3) a_d = (3x+3d-2)(3x+3d-1)(3x+3d) a_{d-1},   a_0 = 1,
    solved here as power series in x truncated at x^x_max.
    """
    n = x_max
    a = [Fraction(1)] + [Fraction(0)] * n
    cols = [[a[k]] for k in range(n + 1)]
    for d in range(1, order + 1):
        num = [Fraction(1)] + [Fraction(0)] * n
        for k in (3 * d - 2, 3 * d - 1, 3 * d):
            num = _xpoly_mul(num, [Fraction(k), Fraction(3)] + [Fraction(0)] * (n - 1), n)
        # (x+d)^3 - x^3 = d^3 + 3 d^2 x + 3 d x^2
        den = [Fraction(d ** 3), Fraction(3 * d * d), Fraction(3 * d)] + [Fraction(0)] * max(0, n - 2)
        a = _xpoly_mul(_xpoly_mul(a, num, n), _xpoly_inv(den[: n + 1], n), n)
        for k in range(n + 1):
            cols[k].append(a[k])
    return tuple(PowerSeries(c, "q") for c in cols)


def frobenius_solutions(order: int) -> tuple[PowerSeries, PowerSeries]:
    sols = frobenius_coefficients(order)
    return sols[2], sols[3]


def pf_operator_residual(cols: tuple[PowerSeries, ...]) -> list[PowerSeries]:
    """Apply the x-form PF operator to sum_k cols[k] x^k; one residual per x-power."""
    n = len(cols) - 1
    order = cols[0].order
    zero = PowerSeries.constant(0, order)

    def shift_plus_theta(F, c=0, scale=1):
        # (scale*(x + theta) + c) F, truncated in x
        out = [scale * S.qddq(F[k]) + c * F[k] for k in range(n + 1)]
        for k in range(1, n + 1):
            out[k] = out[k] + scale * F[k - 1]
        return out

    F = list(cols)
    cube = shift_plus_theta(shift_plus_theta(shift_plus_theta(F)))
    x3F = [zero] * 3 + F[: n - 2] if n >= 3 else [zero] * (n + 1)
    G = shift_plus_theta(shift_plus_theta(shift_plus_theta(F, 3, 3), 2, 3), 1, 3)
    qG = [PowerSeries([Fraction(0)] + list(g.coeffs[:-1]), "q") for g in G]
    return [cube[k] - x3F[k] - qG[k] for k in range(n + 1)]


def pf_check_i0(i0: PowerSeries) -> Check:
    """(1-27q) D^2 I0 - 27 q D I0 - 6 q I0 = 0 with D = q d/dq."""
    q = PowerSeries.monomial(1, i0.order)
    d1 = S.qddq(i0)
    d2 = S.qddq(d1)
    residual = (1 - 27 * q) * d2 - 27 * q * d1 - 6 * q * i0
    return residual_check("pf_i0", residual)


def birkhoff_ladder(base: list[PowerSeries], m_max: int, n_max: int) -> dict[tuple[int, int], PowerSeries]:
    """I_{m,n} = I_{m-1,n-1}/I_{m-1,m-1} + D(I_{m-1,n}/I_{m-1,m-1}), I_{0,n} = I_n."""
    ladder = {(0, n): base[n] for n in range(n_max + 1)}
    for m in range(1, m_max + 1):
        inv = S.invert_unit(ladder[(m - 1, m - 1)])
        for n in range(m, n_max + 1):
            ladder[(m, n)] = ladder[(m - 1, n - 1)] * inv + S.qddq(ladder[(m - 1, n)] * inv)
    return ladder


def mirror_map(i0: PowerSeries, i1: PowerSeries) -> tuple[PowerSeries, PowerSeries]:
    """Q(q) = q exp(I1/I0) and its compositional inverse q(Q)."""
    n = i0.order
    e = S.exp(i1 * S.invert_unit(i0))
    Q = PowerSeries([Fraction(0)] + list(e.coeffs[:n]), "q")
    inv = S.revert(Q).retag("Q")
    return Q, inv


@dataclass
class MirrorData:
    order: int
    i0: PowerSeries
    i1: PowerSeries
    i2: PowerSeries
    i3: PowerSeries
    L: PowerSeries
    L_inv: PowerSeries
    ladder: dict = field(repr=False)
    mirror_Q: PowerSeries = field(repr=False)
    inverse_q: PowerSeries = field(repr=False)

    @property
    def I11(self) -> PowerSeries:
        return self.ladder[(1, 1)]

    @property
    def I22(self) -> PowerSeries:
        return self.ladder[(2, 2)]

    @property
    def I33(self) -> PowerSeries:
        return self.ladder[(3, 3)]

    def L_pow(self, e: int) -> PowerSeries:
        return _L_power(self.order, e)

    def i0_over_L_pow(self, e: int) -> PowerSeries:
        return _i0_over_L_power(self.order, e)

    def linv_d(self, f: PowerSeries) -> PowerSeries:
        """The derivation L^{-1} q d/dq."""
        return self.L_inv * S.qddq(f)


@lru_cache(maxsize=None)
def mirror_data(order: int) -> MirrorData:
    i0 = i_series(order, "I0")
    i1 = i_series(order, "I1")
    _, _, i2, i3 = frobenius_coefficients(order)
    if frobenius_coefficients(order)[0] != i0 or frobenius_coefficients(order)[1] != i1:
        raise AssertionError("Frobenius solution disagrees with the closed forms of I0, I1")
    one_minus_27q = PowerSeries([1, -27], "q", order)
    L = S.pow_rational(one_minus_27q, -THIRD)
    L_inv = S.pow_rational(one_minus_27q, THIRD)
    ladder = birkhoff_ladder([i0, i1, i2, i3], 3, 3)
    Q, inv = mirror_map(i0, i1)
    return MirrorData(order, i0, i1, i2, i3, L, L_inv, ladder, Q, inv)


@lru_cache(maxsize=None)
def _L_power(order: int, e: int) -> PowerSeries:
    md = mirror_data(order)
    if e == 0:
        return PowerSeries.constant(1, order)
    if e == 1:
        return md.L
    if e == -1:
        return md.L_inv
    half = e // 2
    return _L_power(order, half) * _L_power(order, e - half)


@lru_cache(maxsize=None)
def _i0_over_L_power(order: int, e: int) -> PowerSeries:
    md = mirror_data(order)
    if e == 0:
        return PowerSeries.constant(1, order)
    if e == 1:
        return md.i0 * md.L_inv
    if e == -1:
        return md.L * S.invert_unit(md.i0)
    half = e // 2
    return _i0_over_L_power(order, half) * _i0_over_L_power(order, e - half)


def zinger_zagier_check(md: MirrorData) -> list[Check]:
    L3 = md.L_pow(3)
    return [
        equality_check("I11*I22*I33 = L^3", md.I11 * md.I22 * md.I33, L3),
        equality_check("I22 = I00", md.I22, md.i0),
        equality_check("I33 = I00", md.I33, md.i0),
        equality_check("I11 = L^3/I0^2", md.I11, L3 * S.invert_unit(md.i0 * md.i0)),
    ]


def mirror_map_checks(md: MirrorData) -> list[Check]:
    ident = PowerSeries.monomial(1, md.order, "Q")
    return [
        equality_check("Q(q(Q)) = Q", S.compose(md.mirror_Q, md.inverse_q), ident),
        # q dQ/dq = I11 Q
        equality_check("D(Q) = I11*Q", S.qddq(md.mirror_Q), md.I11 * md.mirror_Q),
    ]


# degree generators ---------------------------------------------------------

@dataclass
class GeneratorValues:
    X: dict[int, PowerSeries]
    Y: dict[int, PowerSeries]
    max_k: int


def generator_values(md: MirrorData, k_max: int) -> GeneratorValues:
    """X_k = (L^-1 D)^k ln(I0/L), Y_k = (L^-1 D)^k ln(q^(1/3) L).

    D ln q = 1, so the first step of Y is L^-1 (1/3 + D L / L); from there on both
    families are ordinary power series.
    """
    DL_over_L = S.qddq(md.L) * md.L_inv
    X = {1: md.L_inv * (S.qddq(md.i0) * S.invert_unit(md.i0) - DL_over_L)}
    Y = {1: md.L_inv * (DL_over_L + THIRD)}
    for k in range(2, k_max + 1):
        X[k] = md.linv_d(X[k - 1])
        Y[k] = md.linv_d(Y[k - 1])
    return GeneratorValues(X, Y, k_max)


def _ypoly_derive(poly: dict) -> dict:
    """Apply the derivation Y_k -> Y_{k+1} to a polynomial {exponent tuple: coeff}."""
    out: dict = {}
    for exps, c in poly.items():
        for i, e in enumerate(exps):
            if not e:
                continue
            new = list(exps) + [0] * max(0, i + 2 - len(exps))
            new[i] -= 1
            new[i + 1] += 1
            key = tuple(new)
            out[key] = out.get(key, 0) + c * e
    return {k: v for k, v in out.items() if v}


def _ypoly_eval(poly: dict, Y: dict, order: int) -> PowerSeries:
    total = PowerSeries.constant(0, order)
    for exps, c in poly.items():
        term = PowerSeries.constant(c, order)
        for i, e in enumerate(exps):
            if e:
                term = term * Y[i + 1] ** e
        total = total + term
    return total


# 27 Y1^3 - 135/2 Y1 Y2 + 27/2 Y3 - 1 = 0
Y3_RELATION = {(3, 0, 0): Fraction(27), (1, 1, 0): Fraction(-135, 2), (0, 0, 1): Fraction(27, 2),
               (0, 0, 0): Fraction(-1)}


def y4_from_relation() -> dict:
    """Y4 as a polynomial in Y1, Y2, Y3, from differentiating the Y3 relation."""
    d = _ypoly_derive(Y3_RELATION)
    lead = d.pop((0, 0, 0, 1))
    return {k[:3]: -v / lead for k, v in d.items()}


def generator_relations_check(md: MirrorData, gv: GeneratorValues) -> list[Check]:
    if gv.max_k < 4:
        raise ValueError("generator relations need k_max >= 4")
    X, Y, n = gv.X, gv.Y, md.order
    one = PowerSeries.constant(1, n)
    return [
        equality_check("X2 = -X1^2 - Y2/2", X[2], -X[1] * X[1] - Y[2] * Fraction(1, 2)),
        equality_check("L^2 = 3 Y1", md.L_pow(2), 3 * Y[1]),
        equality_check("L = 9 Y1^2 - 9/2 Y2", md.L, 9 * Y[1] * Y[1] - Fraction(9, 2) * Y[2]),
        equality_check("1 = 27 Y1^3 - 135/2 Y1 Y2 + 27/2 Y3",
                       27 * Y[1] ** 3 - Fraction(135, 2) * Y[1] * Y[2] + Fraction(27, 2) * Y[3], one),
        equality_check("Y4 in Q[Y1,Y2,Y3]", Y[4], _ypoly_eval(y4_from_relation(), Y, n)),
        equality_check("L^-1 D L = (L^3 - 1)/3", md.linv_d(md.L), (md.L_pow(3) - 1) * THIRD),
    ]


# polynomials in X1 and L ---------------------------------------------------

@dataclass(frozen=True)
class GeneratorPoly:
    """(I0/L)^prefactor_weight * lambda^lambda_power * sum c_ab X1^a L^b."""

    terms: dict
    prefactor_weight: int = 0
    lambda_power: int = 0
    degree: int = 0

    def __post_init__(self):
        object.__setattr__(self, "terms", {k: Fraction(c) for k, c in self.terms.items() if c})

    def evaluate(self, md: MirrorData, X1: PowerSeries | None = None) -> PowerSeries:
        if X1 is None:
            X1 = generator_values(md, 1).X[1]
        n = md.order
        total = PowerSeries.constant(0, n)
        for (a, b), c in self.terms.items():
            if c:
                total = total + (X1 ** a) * md.L_pow(b) * c
        return total * md.i0_over_L_pow(self.prefactor_weight)

    def d_x1(self) -> "GeneratorPoly":
        terms = {(a - 1, b): c * a for (a, b), c in self.terms.items() if a and c}
        return GeneratorPoly(terms, self.prefactor_weight, self.lambda_power, self.degree - 1)

    def x1_degree(self) -> int:
        return max((a for (a, _), c in self.terms.items() if c), default=0)

    def is_zero(self) -> bool:
        return not any(self.terms.values())
