"""Givental-Teleman graph sum for the shifted theory, paired with psi/kappa monomials.

Conventions (sqrt-free; every factor carries its lambda/xi grading):
  vertex of genus h and colour t:  Delta^(h-1),  Delta = t P^2
  leg with H^i at psi:             R(-psi)_i^alpha
  kappa tails:                     exp(sum_b t^-b sigma_b kappa_b),
                                   sigma(u) = -log sum_k r_k (-u)^k
  edge:                            V^{alpha beta}(psi, psi')
The sum over colours keeps the xi-free part and multiplies by 3 per vertex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial

from .algebra import GenExpr, Graded
from .graphs import StableGraph, enumerate_stable_graphs
from .intersections import KappaPsiMonomial, kappa_to_psi
from .mirror import mirror_data
from .rmatrix import FRAME, LPoly, RColumns, build_R_columns, edge_kernel, solve_r_recursion
from .series import PowerSeries
from . import series as S


class InsufficientZOrder(ValueError):
    pass


@dataclass
class CorrelatorRequest:
    g: int
    insertions: tuple            # powers of H, one per marking
    pairing: KappaPsiMonomial = field(default_factory=KappaPsiMonomial)
    order: int = 15

    @property
    def n(self) -> int:
        return len(self.insertions)

    @property
    def dim(self) -> int:
        return 3 * self.g - 3 + self.n

    @property
    def degree(self) -> int:
        """Cohomological degree of the part of Omega seen by the pairing."""
        return self.dim - self.pairing.degree

    def expected_lambda(self) -> int:
        return self.g - 1 + sum(self.insertions) - self.degree

    def expected_prefactor(self) -> int:
        return 2 * self.g - 2 + sum(2 if i == 1 else (1 if i == 2 else 0) for i in self.insertions)

    def key(self) -> tuple:
        return (self.g, tuple(self.insertions), tuple(sorted(self.pairing.psi.items())),
                tuple(sorted(self.pairing.kappa)))


@dataclass
class CorrelatorResult:
    expr: GenExpr
    lambda_power: int
    series: PowerSeries
    graph_count: int
    contributions: list = field(default_factory=list)

    def to_dict(self, explain: bool = False) -> dict:
        out = {"lambda_power": self.lambda_power, "series": self.series,
               "graph_count": self.graph_count, "generator_form": _expr_json(self.expr)}
        if explain:
            out["graphs"] = self.contributions
        return out


def _expr_json(e: GenExpr) -> dict:
    return {f"X1^{a}*L^{b}*P^{p}": str(c) for (a, b, p), c in sorted(e.terms.items())}


# kappa tails -----------------------------------------------------------------

@lru_cache(maxsize=None)
def tail_sigma(b_max: int) -> tuple:
    """sigma_1..sigma_{b_max} as LPoly, from -log sum_k r_k (-u)^k."""
    rs = solve_r_recursion(max(b_max, 1))
    a = [LPoly({0: 1})] + [rs[k] * (-1) ** k for k in range(1, b_max + 1)]
    f = [LPoly()] * (b_max + 1)
    for b in range(1, b_max + 1):
        acc = a[b] * b
        for i in range(1, b):
            acc = acc - f[i] * a[b - i] * i
        f[b] = acc * Fraction(1, b)
    return tuple([LPoly()] + [-x for x in f[1:]])


def _partitions(total: int, low: int = 1):
    """Multisets of positive integers >= low summing to total, as tuples."""
    if total == 0:
        yield ()
        return
    for first in range(low, total + 1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def tail_weight(multiset: tuple) -> Graded:
    """prod_b (t^-b sigma_b)^m_b / m_b!  for a kappa-tail multiset, one colour."""
    sig = tail_sigma(max(multiset) if multiset else 1)
    val = GenExpr.const(1)
    counts: dict = {}
    for b in multiset:
        counts[b] = counts.get(b, 0) + 1
        val = val * sig[b].to_genexpr()
    for m in counts.values():
        val = val * Fraction(1, factorial(m))
    s = sum(multiset)
    return Graded.scalar(1, val, -s, (-s,))


# one vertex ------------------------------------------------------------------

def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def vertex_sum(genus: int, legs: list, fixed_psi: list, kappa: tuple, cols: RColumns) -> Graded:
    """Integrated vertex factor for one colour.

    legs: [(insertion, pairing psi exponent)] for the markings at this vertex.
    fixed_psi: psi exponents on the edge half-edges at this vertex.
    kappa: pairing kappa indices assigned here.
    """
    n_v = len(legs) + len(fixed_psi)
    dim = 3 * genus - 3 + n_v
    budget = dim - sum(fixed_psi) - sum(p for _, p in legs) - sum(kappa)
    out = Graded.zero(1)
    if budget < 0:
        return out
    base = Graded.scalar(1, GenExpr.mono(p=2 * genus - 2), genus - 1, (genus - 1,))
    for tail_deg in range(budget + 1):
        for leg_exps in _compositions(budget - tail_deg, len(legs)):
            if any(k > cols.z_max for k in leg_exps):
                raise InsufficientZOrder(f"leg needs z^{max(leg_exps)} > z_max={cols.z_max}")
            leg_val = base
            for (ins, _), k in zip(legs, leg_exps):
                leg_val = leg_val * cols.leg(ins, k)
            if not leg_val:
                continue
            psi = [k + p for (_, p), k in zip(legs, leg_exps)] + list(fixed_psi)
            for tail in _partitions(tail_deg):
                integral = kappa_to_psi(psi, tuple(kappa) + tail, genus)
                if integral:
                    out = out + leg_val * tail_weight(tail) * integral
    return out


# one graph -------------------------------------------------------------------

def graph_contribution(graph: StableGraph, req: CorrelatorRequest, cols: RColumns, kernel) -> Graded:
    """Contribution of a graph before the colour sum and division by |Aut|."""
    V = graph.n_vertices
    edges = graph.edges()
    dims = [graph.dim(v) for v in range(V)]
    width = V
    total = Graded.zero(width)
    kappas = list(req.pairing.kappa)
    leg_data = [[] for _ in range(V)]
    for j, v in enumerate(graph.legs):
        leg_data[v].append((req.insertions[j], req.pairing.psi.get(j + 1, 0)))
    edge_choices = []
    for u, v in edges:
        reach = dims[u] if u == v else dims[u] + dims[v]
        if reach > kernel.z_max - 1:
            raise InsufficientZOrder(f"edge needs total degree {reach}, kernel has {kernel.z_max - 1}")
        edge_choices.append([(k, l) for (k, l) in kernel.v if k <= dims[u] and l <= dims[v]])
    for assign in product(range(V), repeat=len(kappas)):
        kap = [tuple(sorted(kappas[i] for i in range(len(kappas)) if assign[i] == v)) for v in range(V)]
        for choice in product(*edge_choices):
            fixed = [[] for _ in range(V)]
            for (u, v), (k, l) in zip(edges, choice):
                fixed[u].append(k)
                fixed[v].append(l)
            if any(sum(fixed[v]) + sum(p for _, p in leg_data[v]) + sum(kap[v]) > dims[v] for v in range(V)):
                continue
            term = Graded.scalar(width, 1)
            for (u, v), (k, l) in zip(edges, choice):
                term = term * kernel.v[(k, l)].embed((u, v), width)
                if not term:
                    break
            if not term:
                continue
            for v in range(V):
                vs = vertex_sum(graph.genera[v], leg_data[v], fixed[v], kap[v], cols)
                term = term * vs.embed((v,), width)
                if not term:
                    break
            if term:
                total = total + term
    return total


# correlators -----------------------------------------------------------------

@lru_cache(maxsize=None)
def _correlator_symbolic(key: tuple, z_max: int, g_max: int):
    g, ins, psi_items, kappa = key
    req = CorrelatorRequest(g, ins, KappaPsiMonomial(dict(psi_items), kappa))
    if req.degree < 0:
        return {}, 0, []
    cols = build_R_columns(z_max)
    kernel = edge_kernel(z_max)
    graphs = enumerate_stable_graphs(g, len(ins), max(g_max, g))
    total: dict = {}
    parts = []
    for gr in graphs:
        contrib = graph_contribution(gr, req, cols, kernel).alpha_sum()
        summed: dict = {}
        for lam, e in contrib.items():
            e = e * Fraction(1, gr.aut)
            summed[lam] = e
            total[lam] = total.get(lam, GenExpr()) + e
        parts.append((gr, summed))
    total = {k: v for k, v in total.items() if v}
    return total, len(graphs), parts


def correlator(req: CorrelatorRequest, z_max: int = 8, g_max: int = 2, explain: bool = False) -> CorrelatorResult:
    """The number  int_{M_{g,n}} Omega_{g,n}(H^i_1..H^i_n) * pairing  as a q-series."""
    if req.g > g_max:
        raise ValueError(f"genus {req.g} exceeds g_max={g_max}")
    if any(i not in (0, 1, 2) for i in req.insertions):
        raise ValueError("insertions must be 0, 1 or 2 (powers of H)")
    if 2 * req.g - 2 + req.n <= 0:
        raise ValueError("unstable (g, n)")
    total, count, parts = _correlator_symbolic(req.key(), z_max, g_max)
    lam = req.expected_lambda()
    if set(total) - {lam}:
        raise AssertionError(f"unexpected lambda powers {sorted(total)}; expected {lam}")
    expr = total.get(lam, GenExpr())
    series = expr.evaluate(max(req.order, 1)).truncate(req.order)
    if not series.is_rational():
        raise AssertionError("correlator has a non-rational coefficient")
    contributions = []
    if explain:
        for gr, summed in parts:
            e = summed.get(lam, GenExpr())
            contributions.append({"graph": gr.to_dict(), "generator_form": _expr_json(e),
                                  "series": e.evaluate(max(req.order, 1)).truncate(req.order)})
    return CorrelatorResult(expr, lam, series, count, contributions)


# quantum product oracle ------------------------------------------------------

def _mat_mul(A, B):
    """3x3 matrices of {lambda-power: series}."""
    out = [[{} for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            acc: dict = {}
            for k in range(3):
                for la, x in A[i][k].items():
                    for lb, y in B[k][j].items():
                        acc[la + lb] = acc[la + lb] + x * y if la + lb in acc else x * y
            out[i][j] = {k: v for k, v in acc.items() if not v.is_zero()}
    return out


def _mat_scale(A, s: PowerSeries):
    return [[{k: v * s for k, v in e.items()} for e in row] for row in A]


def quantum_multiplication(order: int) -> list:
    """Matrices of H^0, H^1, H^2 acting on the basis 1, H, H^2 (columns = images)."""
    from .rmatrix import quantum_A_matrix

    md = mirror_data(order)
    A = quantum_A_matrix(md)
    one = PowerSeries.constant(1, order)
    ident = [[({0: one} if i == j else {}) for j in range(3)] for i in range(3)]
    MH = _mat_scale(A, S.invert_unit(md.I11))
    MH2 = _mat_scale(_mat_mul(MH, MH), md.I11 * S.invert_unit(md.I22))
    return [ident, MH, MH2]


def quantum_three_point(i: int, j: int, k: int, order: int) -> dict:
    """<H^i, H^j, H^k> = eta(H^i * H^j, H^k) as {lambda-power: series}."""
    M = quantum_multiplication(order)[i]
    out: dict = {}
    for r in range(3):
        for la, x in M[r][j].items():
            coef, lb = FRAME.pairing[r][k]
            if coef:
                out[la + lb] = out[la + lb] + x * coef if la + lb in out else x * coef
    return {k: v for k, v in out.items() if not v.is_zero()}
