"""Symbolic layer: polynomials in X1, L, P = I0/L and their lambda/xi gradings.

Every R-matrix entry, edge coefficient and graph contribution is a finite
combination of monomials X1^a L^b P^p.  Evaluating to q-series is a ring
homomorphism, so the graph sum can be carried out on these small polynomials
and expanded once at the end.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .series import PowerSeries


class GenExpr:
    """sum c * X1^a L^b P^p, stored as {(a, b, p): c}."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, c) -> "GenExpr":
        return cls({(0, 0, 0): c})

    @classmethod
    def mono(cls, a=0, b=0, p=0, c=1) -> "GenExpr":
        return cls({(a, b, p): c})

    def __add__(self, other):
        if not isinstance(other, GenExpr):
            other = GenExpr.const(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return GenExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return GenExpr({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GenExpr):
            c = Fraction(other)
            return GenExpr({k: v * c for k, v in self.terms.items()})
        out: dict = {}
        for (a1, b1, p1), v1 in self.terms.items():
            for (a2, b2, p2), v2 in other.terms.items():
                k = (a1 + a2, b1 + b2, p1 + p2)
                out[k] = out.get(k, 0) + v1 * v2
        return GenExpr(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = GenExpr.const(1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GenExpr.const(other)
        return isinstance(other, GenExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def d_x1(self) -> "GenExpr":
        return GenExpr({(a - 1, b, p): v * a for (a, b, p), v in self.terms.items() if a})

    def x1_free(self) -> bool:
        return all(a == 0 for a, _, _ in self.terms)

    def p_powers(self) -> set:
        return {p for _, _, p in self.terms}

    def evaluate(self, order: int) -> PowerSeries:
        total = PowerSeries.constant(0, order)
        for (a, b, p), c in self.terms.items():
            total = total + _monomial_series(order, a, b, p) * c
        return total

    def __repr__(self):
        parts = [f"{v}*X1^{a}*L^{b}*P^{p}" for (a, b, p), v in sorted(self.terms.items())]
        return "GenExpr(" + (" + ".join(parts) or "0") + ")"


@lru_cache(maxsize=4096)
def _monomial_series(order: int, a: int, b: int, p: int) -> PowerSeries:
    from .mirror import mirror_data

    md = mirror_data(order)
    out = md.L_pow(b) * md.i0_over_L_pow(p)
    if a:
        out = out * _x1_power(order, a)
    return out


@lru_cache(maxsize=None)
def _x1_power(order: int, a: int) -> PowerSeries:
    from .mirror import generator_values, mirror_data

    if a == 1:
        return generator_values(mirror_data(order), 1).X[1]
    return _x1_power(order, a - 1) * _x1_power(order, 1)


class Graded:
    """Values graded by a total lambda-power and one xi-exponent (mod 3) per vertex.

    Key ``(lam, xis)``; ``xis`` is a tuple whose length is the number of vertex
    colours in play.  Multiplication adds lambda-powers and xi-exponents.
    """

    __slots__ = ("parts", "width")

    def __init__(self, width: int, parts=None):
        self.width = width
        self.parts: dict = {}
        for k, v in (parts or {}).items():
            if v:
                lam, xis = k
                if len(xis) != width:
                    raise ValueError("grading width mismatch")
                key = (lam, tuple(x % 3 for x in xis))
                self.parts[key] = self.parts.get(key, GenExpr()) + v
        self.parts = {k: v for k, v in self.parts.items() if v}

    @classmethod
    def scalar(cls, width: int, value, lam: int = 0, xis=None) -> "Graded":
        if not isinstance(value, GenExpr):
            value = GenExpr.const(value)
        return cls(width, {(lam, tuple(xis or (0,) * width)): value})

    @classmethod
    def zero(cls, width: int) -> "Graded":
        return cls(width)

    def __add__(self, other: "Graded") -> "Graded":
        if other.width != self.width:
            raise ValueError("grading width mismatch")
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out.get(k, GenExpr()) + v
        return Graded(self.width, out)

    def __neg__(self):
        return Graded(self.width, {k: -v for k, v in self.parts.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Graded):
            return Graded(self.width, {k: v * other for k, v in self.parts.items()})
        if other.width != self.width:
            raise ValueError("grading width mismatch")
        out: dict = {}
        for (l1, x1), v1 in self.parts.items():
            for (l2, x2), v2 in other.parts.items():
                k = (l1 + l2, tuple((a + b) % 3 for a, b in zip(x1, x2)))
                prod = v1 * v2
                out[k] = out[k] + prod if k in out else prod
        return Graded(self.width, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Graded) and self.width == other.width and self.parts == other.parts

    def __bool__(self):
        return bool(self.parts)

    def embed(self, slots: tuple, width: int) -> "Graded":
        """Place this value's xi-exponents at the given vertex positions of a wider grading.

        Two slots may coincide (a loop edge); their exponents then add.
        """
        out: dict = {}
        for (lam, xis), v in self.parts.items():
            new = [0] * width
            for s, x in zip(slots, xis):
                new[s] += x
            k = (lam, tuple(new))
            out[k] = out[k] + v if k in out else v
        return Graded(width, out)

    def alpha_sum(self) -> dict:
        """Sum over independent colours: keep xi-free parts, times 3 per vertex.

        Returns {lam: GenExpr}.
        """
        out: dict = {}
        factor = 3 ** self.width
        for (lam, xis), v in self.parts.items():
            if all(x == 0 for x in xis):
                out[lam] = out.get(lam, GenExpr()) + v * factor
        return {k: v for k, v in out.items() if v}

    def d_x1(self) -> "Graded":
        return Graded(self.width, {k: v.d_x1() for k, v in self.parts.items()})

    def __repr__(self):
        return f"Graded({self.width}, {self.parts!r})"
