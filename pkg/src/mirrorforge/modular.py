"""Level-3 theta functions, Eisenstein series, and exact quasi-modular fitting."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from . import series as S
from .mirror import GeneratorValues, MirrorData
from .report import Check, equality_check
from .series import Cyc, PowerSeries


class InsufficientOrder(ValueError):
    pass


@dataclass(frozen=True)
class ThetaSeries:
    a: PowerSeries
    b: PowerSeries
    order: int


@lru_cache(maxsize=None)
def theta_series(order: int) -> ThetaSeries:
    """a = sum Q^(n^2+nm+m^2), b = sum w^(n-m) Q^(n^2+nm+m^2), w = exp(2 pi i/3)."""
    if order < 0:
        raise ValueError("order must be non-negative")
    # n^2+nm+m^2 >= 3/4 max(|n|,|m|)^2, so |n|,|m| <= bound covers all norms <= order
    bound = isqrt(4 * order // 3) + 1
    a = [0] * (order + 1)
    b = [Cyc(0)] * (order + 1)
    powers = [Cyc(1), Cyc(0, 1), Cyc(-1, -1)]
    for n in range(-bound, bound + 1):
        for m in range(-bound, bound + 1):
            norm = n * n + n * m + m * m
            if norm > order:
                continue
            if max(abs(n), abs(m)) == bound:
                raise AssertionError("lattice enumeration bound too small")
            a[norm] += 1
            b[norm] = b[norm] + powers[(n - m) % 3]
    for c in b:
        if not c.is_rational():
            raise ArithmeticError("b(Q) acquired an imaginary part")
    return ThetaSeries(PowerSeries(a, "Q"), PowerSeries(b, "Q"), order)


def _sigma(n: int, k: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def eisenstein(k: int, order: int) -> PowerSeries:
    const = {2: -24, 4: 240, 6: -504}
    if k not in const:
        raise ValueError("weight must be 2, 4 or 6")
    return PowerSeries([1] + [const[k] * _sigma(n, k - 1) for n in range(1, order + 1)], "Q")


def serre_derivative_check(ts: ThetaSeries, order: int | None = None) -> list[Check]:
    order = ts.order if order is None else order
    a, b = ts.a.truncate(order), ts.b.truncate(order)
    E2 = eisenstein(2, order)
    b3 = b ** 3
    return [
        equality_check("Q da/dQ = a E2/12 + a^3/4 - b^3/3", S.qddq(a),
                       a * E2 * Fraction(1, 12) + a ** 3 * Fraction(1, 4) - b3 * Fraction(1, 3)),
        equality_check("Q d(b^3)/dQ = b^3 E2/4 - a^2 b^3/4", S.qddq(b3),
                       b3 * E2 * Fraction(1, 4) - a * a * b3 * Fraction(1, 4)),
    ]


def to_Q(f: PowerSeries, md: MirrorData) -> PowerSeries:
    """Substitute q = q(Q)."""
    if f.var != "q":
        raise S.VariableMismatch("expected a q-series")
    return S.compose(f, md.inverse_q)


def identification_check(ts: ThetaSeries, md: MirrorData, order: int) -> list[Check]:
    a, b = ts.a.truncate(order), ts.b.truncate(order)
    qQ = md.inverse_q.truncate(order)
    ratio = b ** 3 * S.invert_unit(a ** 3)
    L_inv3 = to_Q(md.L_inv ** 3, md).truncate(order)
    return [
        equality_check("a(Q) = I0(q(Q))", a, to_Q(md.i0, md).truncate(order)),
        equality_check("L^-3(q(Q)) = b^3/a^3", L_inv3, ratio),
        equality_check("27 q(Q) = 1 - b^3/a^3", 27 * qQ, 1 - ratio),
    ]


# quasi-modular polynomials --------------------------------------------------

Monomial = tuple  # (i, j, k, l) for a^(2i) E2^j E4^k E6^l


def weight_basis(weight: int) -> list[Monomial]:
    if weight < 0 or weight % 2:
        raise ValueError("weight must be even and non-negative")
    h = weight // 2
    out = []
    for l in range(h // 3 + 1):
        for k in range((h - 3 * l) // 2 + 1):
            rest = h - 3 * l - 2 * k
            for j in range(rest + 1):
                out.append((rest - j, j, k, l))
    return sorted(out, key=lambda m: (m[1], -m[0], m[2], m[3]))


def is_modular(m: Monomial) -> bool:
    return m[1] == 0


@dataclass
class QuasiModPoly:
    terms: dict
    weight: int

    def __post_init__(self):
        self.terms = {m: Fraction(c) for m, c in self.terms.items() if c}
        for i, j, k, l in self.terms:
            if 2 * i + 2 * j + 4 * k + 6 * l != self.weight:
                raise ValueError(f"monomial {(i, j, k, l)} has the wrong weight")

    def evaluate(self, ts: ThetaSeries, order: int) -> PowerSeries:
        total = PowerSeries.constant(0, order, "Q")
        for m, c in self.terms.items():
            total = total + _monomial_value(m, ts, order) * c
        return total

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, QuasiModPoly) and self.weight == other.weight and self.terms == other.terms

    def to_json(self) -> dict:
        names = ("a^2", "E2", "E4", "E6")
        out = {}
        for m, c in sorted(self.terms.items()):
            label = "*".join(f"{nm}^{e}" if e > 1 else nm for nm, e in zip(names, m) if e) or "1"
            out[label] = str(c)
        return out


def _monomial_value(m: Monomial, ts: ThetaSeries, order: int) -> PowerSeries:
    i, j, k, l = m
    a2 = ts.a.truncate(order) ** 2
    return a2 ** i * eisenstein(2, order) ** j * eisenstein(4, order) ** k * eisenstein(6, order) ** l


def e2_partial(p: QuasiModPoly) -> QuasiModPoly:
    terms: dict = {}
    for (i, j, k, l), c in p.terms.items():
        if j:
            key = (i, j - 1, k, l)
            terms[key] = terms.get(key, 0) + c * j
    return QuasiModPoly(terms, max(p.weight - 2, 0))


# exact fitting ---------------------------------------------------------------

@dataclass
class FitResult:
    coeffs: list
    rank: int
    rows_used: int
    check: Check
    basis: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.check.passed


def solve_exact(columns: list[PowerSeries], target: PowerSeries, guard: int) -> FitResult:
    """Find c with sum c_i columns[i] = target coefficientwise.

    Rows are added until the column rank saturates; the remaining rows (at least
    ``guard`` of them) must then be reproduced exactly.
    """
    n = len(columns)
    total_rows = target.order + 1
    if total_rows < n + guard:
        raise InsufficientOrder(f"need order >= {n + guard - 1}, have {target.order}")
    pivots: list = []  # (pivot column, row vector, rhs)
    rows_used = 0
    for r in range(total_rows - guard):
        vec = [Fraction(col[r]) for col in columns]
        rhs = Fraction(target[r])
        for pc, pv, pr in pivots:
            f = vec[pc]
            if f:
                vec = [x - f * y for x, y in zip(vec, pv)]
                rhs -= f * pr
        rows_used = r + 1
        lead = next((i for i, x in enumerate(vec) if x), None)
        if lead is None:
            if rhs:
                return FitResult([], len(pivots), rows_used, Check("fit", False, (r, rhs), {"reason": "inconsistent"}))
            continue
        inv = 1 / vec[lead]
        vec = [x * inv for x in vec]
        rhs *= inv
        new = []
        for pc, pv, pr in pivots:
            f = pv[lead]
            if f:
                pv = [x - f * y for x, y in zip(pv, vec)]
                pr -= f * rhs
            new.append((pc, pv, pr))
        pivots = new + [(lead, vec, rhs)]
        if len(pivots) == n:
            break
    sol = [Fraction(0)] * n
    for pc, pv, pr in pivots:
        sol[pc] = pr
    recon = PowerSeries.constant(0, target.order, target.var)
    for c, col in zip(sol, columns):
        if c:
            recon = recon + col.truncate(target.order) * c
    diff = target - recon
    k = diff.valuation()
    unused = total_rows - rows_used
    if k is not None:
        chk = Check("fit", False, (k, diff[k]), {"rank": len(pivots), "rows_used": rows_used})
    elif unused < guard:
        chk = Check("fit", False, (rows_used, "guard rows unavailable"), {"rank": len(pivots)})
    else:
        chk = Check("fit", True, None, {"rank": len(pivots), "rows_used": rows_used, "guard_rows": unused})
    return FitResult(sol, len(pivots), rows_used, chk)


def fit_to_qmod(f: PowerSeries, weight: int, guard: int = 10, ts: ThetaSeries | None = None) -> tuple[QuasiModPoly | None, FitResult]:
    if f.var != "Q":
        raise S.VariableMismatch("quasi-modular fitting needs a Q-series")
    basis = weight_basis(weight)
    ts = ts or theta_series(f.order)
    cols = [_monomial_value(m, ts, f.order) for m in basis]
    res = solve_exact(cols, f, guard)
    res.basis = basis
    if not res.passed:
        return None, res
    return QuasiModPoly(dict(zip(basis, res.coeffs)), weight), res


def generator_dictionary_check(md: MirrorData, gv: GeneratorValues, ts: ThetaSeries, order: int) -> list[Check]:
    pw = md.i0_over_L_pow(2)
    X1, Y1, Y2, Y3 = gv.X[1], gv.Y[1], gv.Y[2], gv.Y[3]
    a2 = ts.a.truncate(order) ** 2
    E2, E4, E6 = (eisenstein(k, order) for k in (2, 4, 6))
    T = lambda f: to_Q(f, md).truncate(order)  # noqa: E731
    return [
        equality_check("P^2 X1 = E2/12 - a^2/12", T(pw * X1), (E2 - a2) * Fraction(1, 12)),
        equality_check("P^2 Y1 = a^2/3", T(pw * Y1), a2 * Fraction(1, 3)),
        equality_check("P^4 Y2 = -a^4/36 + E4/36", T(pw ** 2 * Y2), (E4 - a2 ** 2) * Fraction(1, 36)),
        equality_check("P^6 Y3 = a^6/216 + a^2 E4/216 - E6/108", T(pw ** 3 * Y3),
                       a2 ** 3 * Fraction(1, 216) + a2 * E4 * Fraction(1, 216) - E6 * Fraction(1, 108)),
    ]


def cubic_generator_fit(ts: ThetaSeries, guard: int = 10) -> dict:
    """Exploratory: E4 and E6 in the span of a^i b^(3j) of matching weight."""
    a, b3 = ts.a, ts.b ** 3
    out = {}
    for k, monos in ((4, [(4, 0), (1, 1)]), (6, [(6, 0), (3, 1), (0, 2)])):
        cols = [a ** i * b3 ** j for i, j in monos]
        res = solve_exact(cols, eisenstein(k, ts.order), guard)
        out[f"E{k}"] = {
            "pass": res.passed,
            "coeffs": {f"a^{i}*b^{3 * j}": str(c) for (i, j), c in zip(monos, res.coeffs)},
        }
    return out
