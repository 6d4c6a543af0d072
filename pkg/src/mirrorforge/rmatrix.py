"""R-matrix: the r_k recursion, assembled columns, the QDE check and the edge kernel.

Colour convention.  With t = xi^alpha * lambda every column entry is
    R_i^alpha(z) = sum_k t^(i-k) rho_{i,k} z^k,
where rho_{i,k} is a polynomial in X1, L and P = I0/L independent of alpha.
The gradings (lambda-power i-k, xi-exponent i-k mod 3) are therefore implicit
in (i, k) and carried explicitly by :class:`~mirrorforge.algebra.Graded` once
entries are multiplied together.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from . import series as S
from .algebra import GenExpr, Graded
from .mirror import MirrorData, birkhoff_ladder, mirror_data
from .report import Check, equality_check, residual_check
from .series import Cyc, PowerSeries


class RecursionError_(ArithmeticError):
    """The recursion produced a non-polynomial step."""


# Bernoulli -----------------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """B_n with B_1 = -1/2."""
    if n == 0:
        return Fraction(1)
    return -sum(comb(n + 1, k) * bernoulli_number(k) for k in range(n)) / Fraction(n + 1)


def bernoulli_polynomial(n: int, x) -> Fraction:
    if n < 0:
        raise ValueError("n must be non-negative")
    x = Fraction(x)
    return sum(comb(n, k) * bernoulli_number(k) * x ** (n - k) for k in range(n + 1))


def initial_constants(k_max: int) -> dict[int, Fraction]:
    """c_k = [z^k] exp(sum_m (-1)^(m+1) B_{3m+1}(1/3) / (m(3m+1)) z^(3m))."""
    expo = [Fraction(0)] * (k_max + 1)
    for m in range(1, k_max // 3 + 1):
        expo[3 * m] = (-1) ** (m + 1) * bernoulli_polynomial(3 * m + 1, Fraction(1, 3)) / (m * (3 * m + 1))
    e = S.exp(PowerSeries(expo, "z"))
    return {k: e[k] for k in range(k_max + 1)}


# polynomials in L ----------------------------------------------------------

class LPoly:
    """Laurent polynomial in L with rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {int(e): Fraction(c) for e, c in (coeffs or {}).items() if c}

    @classmethod
    def mono(cls, e, c=1):
        return cls({e: c})

    def __add__(self, other):
        if not isinstance(other, LPoly):
            other = LPoly({0: other})
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return LPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LPoly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LPoly):
            c = Fraction(other)
            return LPoly({e: v * c for e, v in self.coeffs.items()})
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LPoly):
            other = LPoly({0: other})
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def derivative(self) -> "LPoly":
        return LPoly({e - 1: c * e for e, c in self.coeffs.items() if e})

    def integrate(self) -> "LPoly":
        if -1 in self.coeffs:
            raise RecursionError_("L^-1 in the integrand: logarithmic term")
        return LPoly({e + 1: c / (e + 1) for e, c in self.coeffs.items()})

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        return sum((c * x ** e for e, c in self.coeffs.items()), Fraction(0))

    def support(self) -> set[int]:
        return set(self.coeffs)

    def is_polynomial(self) -> bool:
        return all(e >= 0 for e in self.coeffs)

    def divmod_poly(self, divisor: "LPoly") -> tuple["LPoly", "LPoly"]:
        """Long division of polynomials (non-negative exponents)."""
        if not (self.is_polynomial() and divisor.is_polynomial()):
            raise ValueError("division needs genuine polynomials")
        rem = dict(self.coeffs)
        dtop = max(divisor.coeffs)
        lead = divisor.coeffs[dtop]
        quot: dict = {}
        while rem and max(rem) >= dtop:
            top = max(rem)
            c = rem[top] / lead
            quot[top - dtop] = c
            for e, dc in divisor.coeffs.items():
                k = top - dtop + e
                rem[k] = rem.get(k, 0) - c * dc
                if not rem[k]:
                    del rem[k]
        return LPoly(quot), LPoly(rem)

    def to_genexpr(self) -> GenExpr:
        return GenExpr({(0, e, 0): c for e, c in self.coeffs.items()})

    def to_series(self, md: MirrorData) -> PowerSeries:
        total = PowerSeries.constant(0, md.order)
        for e, c in self.coeffs.items():
            total = total + md.L_pow(e) * c
        return total

    def to_json(self) -> dict:
        return {str(e): str(c) for e, c in sorted(self.coeffs.items())}

    def __repr__(self):
        return "LPoly(" + " + ".join(f"{c}*L^{e}" for e, c in sorted(self.coeffs.items())) + ")"


L1 = LPoly.mono(1)
L3_MINUS_1 = LPoly({3: 1, 0: -1})


def D(p: LPoly) -> LPoly:
    """q d/dq in the L-coordinate: (1/3) L (L^3 - 1) d/dL."""
    return LPoly({1: Fraction(1, 3)}) * L3_MINUS_1 * p.derivative()


def linv_D(p: LPoly) -> LPoly:
    """L^-1 q d/dq = (1/3)(L^3 - 1) d/dL."""
    return L3_MINUS_1 * p.derivative() * Fraction(1, 3)


def _Dn(p: LPoly, n: int) -> LPoly:
    for _ in range(n):
        p = D(p)
    return p


@dataclass
class RSeries:
    r: list  # r[k] for k = 0..k_max, r[0] = 1
    k_max: int
    constants: dict = field(default_factory=dict)

    def __getitem__(self, k) -> LPoly:
        return self.r[k]


def _D_rk(k: int, r: list) -> LPoly:
    """Right side of the z^(k+1) coefficient of the PF equation for the r_k."""
    L = lambda e, c=1: LPoly.mono(e, c)  # noqa: E731
    if k == 1:
        return Fraction(-1, 27) * L(2) * L3_MINUS_1
    if k == 2:
        r1 = r[1]
        body = ((L(3, 27) - 27) * D(r1) - L(8, 4) - L(6, 3) * r1 + L(5, 5) + L(3, 3) * r1
                - L(2) - 81 * _Dn(r1, 2))
        return body * L(-1, Fraction(1, 81))
    a, b = r[k - 1], r[k - 2]
    body = ((L(3, 27) - 27) * _Dn(b, 2)
            + (L(3, 6) - 6) * D(b)
            + (L(4, 27) - L(1, 27)) * D(a)
            - L(4, 3) * L3_MINUS_1 * a
            - L(3) * (L(3, 4) - 1) * L3_MINUS_1 * b
            - L(1, 81) * _Dn(a, 2)
            - 27 * _Dn(b, 3))
    return body * L(-2, Fraction(1, 81))


@lru_cache(maxsize=None)
def solve_r_recursion(k_max: int) -> RSeries:
    """r_1..r_{k_max} as polynomials in L.

    D(r_k) is assembled from lower r's, divided exactly by (1/3) L (L^3-1) to get
    dr_k/dL, integrated, and the constant fixed by r_k(0) = c_k.
    """
    consts = initial_constants(k_max)
    r = [LPoly({0: 1})]
    for k in range(1, k_max + 1):
        rhs = _D_rk(k, r)
        if not rhs.is_polynomial():
            raise RecursionError_(f"D(r_{k}) has negative L-powers")
        q, rem = rhs.divmod_poly(L3_MINUS_1)
        if rem.coeffs:
            raise RecursionError_(f"D(r_{k}) is not divisible by L^3 - 1")
        deriv = q * LPoly({-1: 3})
        if not deriv.is_polynomial():
            raise RecursionError_(f"dr_{k}/dL is not a polynomial")
        rk = deriv.integrate()
        rk = rk + consts[k]
        r.append(rk)
    return RSeries(r, k_max, consts)


def support_bound(k: int) -> set[int]:
    return {2 * k - 3 * j for j in range(0, (2 * k) // 3 + 1)}


# q = 0 ---------------------------------------------------------------------

XI = Cyc(0, 1)


def delta_tw_exponent_constants(m_max: int) -> dict[int, Fraction]:
    """beta_j = (-3)^-j + (1-xi)^-j + (1-xi^2)^-j for odd j, in Q."""
    out = {}
    one_minus_xi = Cyc(1, -1)
    one_minus_xi2 = 1 - XI * XI
    for j in range(1, m_max + 1, 2):
        v = Cyc(Fraction(1, (-3) ** j)) + one_minus_xi ** (-j) + one_minus_xi2 ** (-j)
        if not v.is_rational():
            raise ArithmeticError("non-rational q=0 exponent")
        out[j] = v.re
    return out


def delta_tw_series(k_max: int) -> PowerSeries:
    """exp(-sum_m B_2m/(2m(2m-1)) beta_{2m-1} z^(2m-1)), normalised at t = 1."""
    betas = delta_tw_exponent_constants(k_max)
    expo = [Fraction(0)] * (k_max + 1)
    for m in range(1, (k_max + 1) // 2 + 1):
        j = 2 * m - 1
        if j <= k_max:
            expo[j] = -bernoulli_number(2 * m) / (2 * m * (2 * m - 1)) * betas[j]
    return S.exp(PowerSeries(expo, "z"))


def delta_tw_q0_check(rs: RSeries, k_max: int) -> Check:
    if k_max > rs.k_max:
        raise ValueError("r-series not solved far enough")
    target = delta_tw_series(k_max)
    values = PowerSeries([rs[k](1) for k in range(k_max + 1)], "z")
    return equality_check("r_k(1) vs q=0 exponential", values, target)


# frame ---------------------------------------------------------------------

@dataclass(frozen=True)
class FrameData:
    """Pairing in the basis 1, H, H^2; entries are (coefficient, lambda-power)."""

    pairing: tuple = (((0, 0), (3, 0), (0, 0)),
                      ((3, 0), (0, 0), (0, 0)),
                      ((0, 0), (0, 0), (3, 3)))
    eta_inv: tuple = (((0, 0), (Fraction(1, 3), 0), (0, 0)),
                      ((Fraction(1, 3), 0), (0, 0), (0, 0)),
                      ((0, 0), (0, 0), (Fraction(1, 3), -3)))

    def h(self, alpha: int) -> tuple[int, int]:
        """Eigenvalue xi^alpha * lambda as (xi-power, lambda-power)."""
        return alpha % 3, 1

    def norm(self, alpha: int) -> tuple[Fraction, Fraction]:
        """||e_alpha|| = (xi^alpha lambda)^(-1/2), as (xi exponent, lambda exponent)."""
        return Fraction(-alpha, 2), Fraction(-1, 2)

    def check_inverse(self) -> bool:
        for i in range(3):
            for j in range(3):
                acc: dict = {}
                for k in range(3):
                    (a, la), (b, lb) = self.pairing[i][k], self.eta_inv[k][j]
                    if a and b:
                        acc[la + lb] = acc.get(la + lb, 0) + Fraction(a) * b
                acc = {k: v for k, v in acc.items() if v}
                if acc != ({0: 1} if i == j else {}):
                    return False
        return True


FRAME = FrameData()


# columns -------------------------------------------------------------------

P1 = GenExpr.mono(p=1)
P2 = GenExpr.mono(p=2)
X1 = GenExpr.mono(a=1)


@dataclass
class RColumns:
    """rho[i][k] for rows i = 0, 1, 2 and z-powers k <= z_max."""

    rho: list
    z_max: int
    rs: RSeries

    def entry(self, i: int, k: int) -> GenExpr:
        return self.rho[i][k]

    def grading(self, i: int, k: int) -> tuple[int, int]:
        """(lambda-power, xi-exponent relative to alpha) of (R_k)_i^alpha."""
        return i - k, (i - k) % 3

    def leg(self, i: int, k: int) -> Graded:
        """Coefficient of psi^k in R(-psi)_i^alpha, as a one-colour graded value."""
        lam, _ = self.grading(i, k)
        return Graded.scalar(1, self.rho[i][k] * (-1) ** k, lam, (lam,))

    def series(self, i: int, k: int, order: int) -> PowerSeries:
        return self.rho[i][k].evaluate(order)

    def column(self, alpha: int, order: int) -> dict:
        """Concrete colour: (i, k) -> (lambda-power, series over Q(xi))."""
        out = {}
        for i in range(3):
            for k in range(self.z_max + 1):
                lam, xe = self.grading(i, k)
                out[(i, k)] = (lam, self.series(i, k, order) * (XI ** (alpha * xe)))
        return out


def _lpoly_expr(p: LPoly) -> GenExpr:
    return p.to_genexpr()


@lru_cache(maxsize=None)
def build_R_columns(z_max: int) -> RColumns:
    rs = solve_r_recursion(max(z_max, 1))
    r = rs.r
    zero = LPoly()
    get = lambda k: r[k] if k >= 0 else zero  # noqa: E731
    row0, row1, row2 = [], [], []
    for k in range(z_max + 1):
        row0.append(_lpoly_expr(get(k)))
        row1.append(P2 * (_lpoly_expr(get(k)) - X1 * _lpoly_expr(get(k - 1))
                          + _lpoly_expr(linv_D(get(k - 1)))))
        quad = LPoly({4: Fraction(1, 9), 1: Fraction(-1, 9)}) * get(k - 2) + linv_D(linv_D(get(k - 2)))
        row2.append(P1 * _lpoly_expr(get(k) + 2 * linv_D(get(k - 1)) + quad))
    return RColumns([row0, row1, row2], z_max, rs)


def quantum_A_matrix(md: MirrorData) -> list:
    """A as a 3x3 matrix of {lambda-power: series}."""
    empty: dict = {}
    return [
        [empty, empty, {3: md.I33}],
        [{0: md.I11}, empty, empty],
        [empty, {0: md.I22}, empty],
    ]


def qde_check(cols: RColumns, md: MirrorData, z_top: int | None = None) -> list[Check]:
    """(z D + t L)(N R_i) = I_{i+1,i+1} N R_{i+1} with N = L/I0, cyclically (R_3 := t^3 R_0).

    In z^k, t^(i+1-k) coefficients:
        D(N rho_{i,k-1}) + L N rho_{i,k} - I_{i+1,i+1} N rho_{i+1,k} = 0.
    """
    n = md.order
    z_top = cols.z_max if z_top is None else z_top
    N = md.L * S.invert_unit(md.i0)
    A = quantum_A_matrix(md)
    # A[i+1][i] for i = 0, 1 and A[0][2] for the wrap-around
    diag = [A[1][0][0], A[2][1][0], A[0][2][3]]
    rows = [[cols.series(i, k, n) for k in range(z_top + 1)] for i in range(3)]
    checks = []
    for i in range(3):
        nxt = (i + 1) % 3
        resid_total = []
        for k in range(z_top + 1):
            term = md.L * N * rows[i][k] - diag[i] * N * rows[nxt][k]
            if k:
                term = term + S.qddq(N * rows[i][k - 1])
            resid_total.append(residual_check(f"QDE row {i} z^{k}", term, z=k))
        checks.append(_merge(f"QDE row {i} -> {nxt}", resid_total))
    return checks


def _merge(name: str, checks: list[Check]) -> Check:
    for c in checks:
        if not c.passed:
            return Check(name, False, c.first_failure, {**c.detail, "component": c.name})
    return Check(name, True, None, {"components": len(checks)})


# edge kernel ---------------------------------------------------------------

@dataclass
class EdgeKernel:
    """V(z, w) = sum v[(k, l)] z^k w^l with two-colour graded coefficients."""

    v: dict
    z_max: int

    def __getitem__(self, kl) -> Graded:
        return self.v[kl]

    def swapped(self) -> "EdgeKernel":
        out = {}
        for (k, l), g in self.v.items():
            out[(l, k)] = Graded(2, {(lam, (x[1], x[0])): e for (lam, x), e in g.parts.items()})
        return EdgeKernel(out, self.z_max)


def _two_colour(cols: RColumns, i: int, k: int, slot: int) -> Graded:
    lam, _ = cols.grading(i, k)
    xis = [0, 0]
    xis[slot] = lam
    return Graded.scalar(2, cols.rho[i][k] * (-1) ** k, lam, tuple(xis))


def edge_numerator(cols: RColumns, frame: FrameData = FRAME) -> dict:
    """Coefficients of sum eta^ij (Psi_i Psi_j - R(-z)_i R(-w)_j); keys (k, l)."""
    zm = cols.z_max
    num: dict = {}
    for i in range(3):
        for j in range(3):
            coef, lam = frame.eta_inv[i][j]
            if not coef:
                continue
            c = Graded.scalar(2, coef, lam)
            for k in range(zm + 1):
                for l in range(zm + 1):
                    if k + l > zm:
                        continue
                    term = c * _two_colour(cols, i, k, 0) * _two_colour(cols, j, l, 1)
                    key = (k, l)
                    # the Psi Psi term cancels the (0, 0) product exactly
                    if key == (0, 0):
                        continue
                    num[key] = num.get(key, Graded.zero(2)) - term
    return num


class DivisibilityError(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def edge_kernel(z_max: int) -> EdgeKernel:
    """Exact quotient of the edge numerator by (z + w), total degree < z_max."""
    cols = build_R_columns(z_max)
    num = edge_numerator(cols)
    v: dict = {}
    zero = Graded.zero(2)
    for deg in range(1, z_max + 1):
        # n_{k, deg-k} = v_{k-1, deg-k} + v_{k, deg-1-k}
        prev = zero
        for k in range(deg):
            cur = num.get((k, deg - k), zero) - prev
            v[(k, deg - 1 - k)] = cur
            prev = cur
        if num.get((deg, 0), zero) - prev:
            raise DivisibilityError(f"edge numerator not divisible by z+w in degree {deg}")
    return EdgeKernel(v, z_max)


def edge_divisibility_check(z_max: int) -> Check:
    try:
        edge_kernel(z_max)
    except DivisibilityError as exc:
        return Check("edge numerator divisible by z+w", False, (0, str(exc)))
    return Check("edge numerator divisible by z+w", True, None, {"z_max": z_max})


def edge_divisibility_series_check(z_max: int, order: int) -> Check:
    """Numerator at w = -z, expanded in q: every z^m coefficient must vanish."""
    cols = build_R_columns(z_max)
    num = edge_numerator(cols)
    worst = None
    for m in range(1, z_max + 1):
        acc = Graded.zero(2)
        for k in range(m + 1):
            term = num.get((k, m - k))
            if term is not None:
                acc = acc + term * (-1) ** (m - k)
        for key, expr in acc.parts.items():
            s = expr.evaluate(order)
            if not s.is_zero():
                worst = (m, key, s)
                break
        if worst:
            break
    if worst:
        m, key, s = worst
        v = s.valuation()
        return Check("edge numerator vanishes at w=-z", False, (v, s[v]), {"z_power": m, "grading": str(key)})
    return Check("edge numerator vanishes at w=-z", True, None, {"z_max": z_max, "order": order})


# d/dE2 ---------------------------------------------------------------------

def e2_derivative_R_check(cols: RColumns, kernel: EdgeKernel | None = None) -> list[Check]:
    """X1-structure behind the E2-derivatives of R and V.

    E2 enters only through X1 with dX1/dE2 = 1/(12 P^2).  Checked symbolically:
      rows 0 and 2 are X1-free;
      d/dX1 rho_{1,k} = -P^2 rho_{0,k-1}   (so d/dE2 R^-1 H = z R^-1 1 / 12);
      (1/(12 P^2)) d/dX1 V_{kl} = -(1/36) [z^k w^l] R(-z)_0 (x) R(-w)_0.
    """
    checks = []
    free = all(cols.rho[i][k].x1_free() for i in (0, 2) for k in range(cols.z_max + 1))
    checks.append(Check("rows 0, 2 are X1-free", free, None if free else (0, "X1 found")))
    bad = None
    for k in range(cols.z_max + 1):
        expect = -P2 * cols.rho[0][k - 1] if k else GenExpr()
        if cols.rho[1][k].d_x1() != expect:
            bad = k
            break
    checks.append(Check("dX1 row 1 = -P^2 * shifted row 0", bad is None,
                        None if bad is None else (bad, "mismatch")))
    kernel = kernel or edge_kernel(cols.z_max)
    inv = GenExpr.mono(p=-2, c=Fraction(1, 12))
    bad = None
    for (k, l), g in kernel.v.items():
        lhs = g.d_x1() * inv
        rhs = _two_colour(cols, 0, k, 0) * _two_colour(cols, 0, l, 1) * Fraction(-1, 36)
        if lhs != rhs:
            bad = (k, l)
            break
    checks.append(Check("dE2 V = -(1/36) R^-1 1 (x) R^-1 1", bad is None,
                        None if bad is None else (bad[0] * 100 + bad[1], "mismatch")))
    return checks


def r_series_report(rs: RSeries) -> dict:
    return {f"r{k}": rs[k].to_json() for k in range(1, rs.k_max + 1)}
