"""Exact truncated power series over Q(xi), xi a primitive cube root of unity.

Coefficients are plain :class:`fractions.Fraction` whenever they are rational and
:class:`Cyc` only when a genuine xi-component is present.  A series carries its
own truncation order (inclusive) and a variable tag; binary operations return the
minimum of the two orders and refuse to mix tags.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

VARIABLES = ("q", "Q", "z", "L")


class SeriesError(ValueError):
    pass


class VariableMismatch(SeriesError):
    pass


class Cyc:
    """An element re + xi*xi of Q(xi) with xi^2 = -1 - xi."""

    __slots__ = ("re", "xi")

    def __init__(self, re=0, xi=0):
        self.re = Fraction(re)
        self.xi = Fraction(xi)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Cyc):
            return other
        if isinstance(other, (int, Fraction)):
            return Cyc(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Cyc(self.re + o.re, self.xi + o.xi)

    __radd__ = __add__

    def __neg__(self):
        return Cyc(-self.re, -self.xi)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Cyc(self.re - o.re, self.xi - o.xi)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Cyc(self.re * other, self.xi * other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b, c, d = self.re, self.xi, o.re, o.xi
        bd = b * d
        return Cyc(a * c - bd, a * d + b * c - bd)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        a, b = self.re, self.xi
        return a * a - a * b + b * b

    def conjugate(self) -> "Cyc":
        # xi -> xi^2 = -1 - xi
        return Cyc(self.re - self.xi, -self.xi)

    def inverse(self) -> "Cyc":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("Cyc(0) has no inverse")
        c = self.conjugate()
        return Cyc(c.re / n, c.xi / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Cyc(self.re / other, self.xi / other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out, base = Cyc(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.xi == o.xi

    def __hash__(self):
        if self.xi == 0:
            return hash(self.re)
        return hash((self.re, self.xi))

    def __bool__(self):
        return bool(self.re) or bool(self.xi)

    def is_rational(self) -> bool:
        return self.xi == 0

    def __repr__(self):
        return f"Cyc({self.re}, {self.xi})"


XI = Cyc(0, 1)

Scalar = Union[Fraction, Cyc]


def normalize(c) -> Scalar:
    """Collapse a Cyc with zero xi-part to a Fraction."""
    if isinstance(c, Cyc):
        return c.re if c.xi == 0 else c
    return Fraction(c)


def as_rational(c) -> Fraction:
    c = normalize(c)
    if isinstance(c, Cyc):
        raise SeriesError(f"coefficient {c!r} is not rational")
    return c


class PowerSeries:
    """Truncated series sum_{k<=order} c_k x^k; immutable."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable, var: str = "q", order: int | None = None):
        if var not in VARIABLES:
            raise SeriesError(f"unknown variable tag {var!r}")
        cs = [normalize(c) for c in coeffs]
        if order is not None:
            if order < 0:
                raise SeriesError("order must be non-negative")
            cs = cs[: order + 1] + [Fraction(0)] * (order + 1 - len(cs))
        if not cs:
            raise SeriesError("a series needs at least one coefficient")
        self.coeffs = tuple(cs)
        self.var = var

    # construction helpers
    @classmethod
    def constant(cls, c, order: int, var: str = "q") -> "PowerSeries":
        return cls([c], var, order)

    @classmethod
    def monomial(cls, k: int, order: int, var: str = "q", c=1) -> "PowerSeries":
        cs = [Fraction(0)] * (order + 1)
        if k <= order:
            cs[k] = normalize(c)
        return cls(cs, var)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise SeriesError(f"cannot extend order {self.order} to {order}")
        return PowerSeries(self.coeffs[: order + 1], self.var)

    def retag(self, var: str) -> "PowerSeries":
        return PowerSeries(self.coeffs, var)

    def _check(self, other: "PowerSeries") -> int:
        if self.var != other.var:
            raise VariableMismatch(f"cannot combine {self.var}-series with {other.var}-series")
        return min(self.order, other.order)

    def _lift(self, other):
        if isinstance(other, PowerSeries):
            return other
        if isinstance(other, (int, Fraction, Cyc)):
            return PowerSeries.constant(other, self.order, self.var)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = self._check(other)
        a, b = self.coeffs, other.coeffs
        return PowerSeries([a[i] + b[i] for i in range(n + 1)], self.var)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = self._check(other)
        a, b = self.coeffs, other.coeffs
        return PowerSeries([a[i] - b[i] for i in range(n + 1)], self.var)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Cyc)):
            return PowerSeries([c * other for c in self.coeffs], self.var)
        if not isinstance(other, PowerSeries):
            return NotImplemented
        n = self._check(other)
        a, b = self.coeffs, other.coeffs
        # skip leading zeros: correlator pieces often have high valuation
        va = _valuation(a, n)
        vb = _valuation(b, n)
        out = [Fraction(0)] * (n + 1)
        for i in range(va, n + 1 - vb):
            ai = a[i]
            if not ai:
                continue
            for j in range(vb, n + 1 - i):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
        return PowerSeries(out, self.var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Cyc)):
            return PowerSeries([c / other for c in self.coeffs], self.var)
        if isinstance(other, PowerSeries):
            return self * invert_unit(other)
        return NotImplemented

    def __rtruediv__(self, other):
        return invert_unit(self) * other

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return pow_rational(self, Fraction(e))
        if e < 0:
            return invert_unit(self) ** (-e)
        out = PowerSeries.constant(1, self.order, self.var)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self.var == other.var and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.var, self.coeffs))

    def agrees_with(self, other: "PowerSeries") -> bool:
        """Coefficientwise equality up to the common order."""
        n = self._check(other)
        return self.coeffs[: n + 1] == other.coeffs[: n + 1]

    def first_difference(self, other: "PowerSeries"):
        """(order, self-minus-other) at the first differing coefficient, or None."""
        n = self._check(other)
        for k in range(n + 1):
            if self.coeffs[k] != other.coeffs[k]:
                return k, normalize(self.coeffs[k] - other.coeffs[k])
        return None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def valuation(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def is_rational(self) -> bool:
        return all(not isinstance(c, Cyc) for c in self.coeffs)

    def rational_coeffs(self) -> list[Fraction]:
        return [as_rational(c) for c in self.coeffs]

    def __repr__(self):
        shown = " + ".join(f"({c})*{self.var}^{k}" for k, c in enumerate(self.coeffs[:6]) if c)
        return f"PowerSeries[{self.var}, O({self.order + 1})]({shown or 0} ...)"


def _valuation(cs: Sequence, n: int) -> int:
    for k in range(n + 1):
        if cs[k]:
            return k
    return n + 1


def series(coeffs, var: str = "q", order: int | None = None) -> PowerSeries:
    return PowerSeries(coeffs, var, order)


def arith(a: PowerSeries, b: PowerSeries, op: str) -> PowerSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise SeriesError(f"unknown op {op!r}")


def invert_unit(a: PowerSeries) -> PowerSeries:
    a0 = a[0]
    if not a0:
        raise SeriesError("cannot invert a series with zero constant term")
    inv0 = 1 / a0
    n = a.order
    out = [Fraction(0)] * (n + 1)
    out[0] = normalize(inv0)
    for k in range(1, n + 1):
        s = 0
        for i in range(1, k + 1):
            if a[i]:
                s += a[i] * out[k - i]
        out[k] = normalize(-s * inv0)
    return PowerSeries(out, a.var)


def qddq(a: PowerSeries) -> PowerSeries:
    """The derivation x d/dx."""
    return PowerSeries([k * c for k, c in enumerate(a.coeffs)], a.var)


def pow_rational(a: PowerSeries, e) -> PowerSeries:
    """a**e for a with constant term 1, by the recurrence a*b' = e*a'*b."""
    e = Fraction(e)
    if a[0] != 1:
        raise SeriesError("pow_rational needs constant term 1")
    n = a.order
    b = [Fraction(0)] * (n + 1)
    b[0] = Fraction(1)
    for k in range(1, n + 1):
        s = 0
        for i in range(1, k + 1):
            if a[i]:
                s += (e * i - (k - i)) * a[i] * b[k - i]
        b[k] = normalize(s / k)
    return PowerSeries(b, a.var)


def log(a: PowerSeries) -> PowerSeries:
    if a[0] != 1:
        raise SeriesError("log needs constant term 1")
    n = a.order
    # x (log a)' = (x a') / a
    d = qddq(a) * invert_unit(a)
    return PowerSeries([Fraction(0)] + [d[k] / k for k in range(1, n + 1)], a.var)


def exp(a: PowerSeries) -> PowerSeries:
    if a[0]:
        raise SeriesError("exp needs zero constant term")
    n = a.order
    da = [k * c for k, c in enumerate(a.coeffs)]
    b = [Fraction(0)] * (n + 1)
    b[0] = Fraction(1)
    for k in range(1, n + 1):
        s = 0
        for i in range(1, k + 1):
            if da[i]:
                s += da[i] * b[k - i]
        b[k] = normalize(s / k)
    return PowerSeries(b, a.var)


def log_exp(a: PowerSeries, which: str) -> PowerSeries:
    if which == "log":
        return log(a)
    if which == "exp":
        return exp(a)
    raise SeriesError(f"unknown function {which!r}")


def compose(outer: PowerSeries, inner: PowerSeries) -> PowerSeries:
    """outer(inner(y)), tagged with inner's variable; Horner evaluation."""
    if inner[0]:
        raise SeriesError("inner series must have zero constant term")
    n = min(outer.order, inner.order)
    inner = inner.truncate(n)
    out = PowerSeries.constant(outer[n], n, inner.var)
    for k in range(n - 1, -1, -1):
        out = out * inner + outer[k]
    return out


def revert(a: PowerSeries) -> PowerSeries:
    """Compositional inverse by Lagrange inversion: [y^m]b = (1/m)[x^(m-1)](x/a)^m."""
    if a[0] or not a.order or not a[1]:
        raise SeriesError("revert needs zero constant term and invertible linear term")
    n = a.order
    h = invert_unit(PowerSeries(list(a.coeffs[1:]) + [Fraction(0)], a.var))
    out = [Fraction(0)] * (n + 1)
    power = PowerSeries.constant(1, n, a.var)
    for m in range(1, n + 1):
        power = power * h
        out[m] = normalize(power[m - 1] / m)
    return PowerSeries(out, a.var)


# serialization -------------------------------------------------------------

def format_scalar(c) -> str:
    c = normalize(c)
    if isinstance(c, Cyc):
        return f"{c.re}+{c.xi}*x"
    return str(c)


def parse_scalar(s: str) -> Scalar:
    s = s.strip()
    if s.endswith("*x"):
        body = s[:-2]
        idx = body.rfind("+")
        if idx <= 0:
            return normalize(Cyc(0, Fraction(body)))
        return normalize(Cyc(Fraction(body[:idx]), Fraction(body[idx + 1:])))
    return Fraction(s)


def to_json(a: PowerSeries) -> list[str]:
    return [format_scalar(c) for c in a.coeffs]


def from_json(data: Sequence[str], var: str = "q") -> PowerSeries:
    return PowerSeries([parse_scalar(s) for s in data], var)
