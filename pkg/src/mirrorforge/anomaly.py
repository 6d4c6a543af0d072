"""Finite generation, quasi-modular certification and the holomorphic anomaly equation."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .algebra import GenExpr
from .graph_sum import CorrelatorRequest, correlator
from .intersections import KappaPsiMonomial
from .mirror import GeneratorPoly, mirror_data
from .modular import (FitResult, QuasiModPoly, ThetaSeries, _monomial_value, e2_partial, solve_exact,
                      theta_series, to_Q, weight_basis)
from .report import Check, residual_check
from .series import PowerSeries

# i_* of the loop map is a degree-2 cover onto its image; the ordered split sum counts each divisor twice
LOOP_FACTOR = Fraction(1, 2)
SPLIT_FACTOR = Fraction(1, 2)
CANDIDATES = (Fraction(1), Fraction(1, 2), Fraction(2), Fraction(-1), Fraction(-1, 2), Fraction(-2))


def generator_basis(d: int) -> list[tuple[int, int]]:
    """(a, b) for X1^a L^b spanning degree d: b = 2(d-a) - 3j."""
    return [(a, 2 * (d - a) - 3 * j) for a in range(d, -1, -1) for j in range(2 * (d - a) // 3 + 1)]


def prefactor_weight(g: int, insertions) -> int:
    return 2 * g - 2 + sum(2 if i == 1 else (1 if i == 2 else 0) for i in insertions)


def fit_finite_generation(f: PowerSeries, g: int, insertions, d: int, guard: int = 10,
                          lambda_power: int = 0) -> tuple[GeneratorPoly | None, FitResult]:
    """Fit f = P^w * sum c_ab X1^a L^b over the degree-d basis, guards reproduced."""
    md = mirror_data(f.order)
    w = prefactor_weight(g, insertions)
    target = f * md.i0_over_L_pow(-w)
    basis = generator_basis(d)
    cols = [GenExpr.mono(a, b).evaluate(f.order) for a, b in basis]
    res = solve_exact(cols, target, guard)
    res.basis = basis
    if not res.passed:
        return None, res
    return GeneratorPoly(dict(zip(basis, res.coeffs)), w, lambda_power, d), res


def _ab_series(ts: ThetaSeries, order: int) -> PowerSeries:
    return ts.a.truncate(order) * ts.b.truncate(order)


def quasimodularity_certify(p: GeneratorPoly, ts: ThetaSeries | None = None, order: int = 25,
                            guard: int = 10) -> tuple[QuasiModPoly | None, FitResult, dict]:
    """Transport P^w * p(X1, L) to Q and fit it at weight w in Q[a^2, E2, E4, E6]."""
    md = mirror_data(order)
    ts = ts or theta_series(order)
    weight = p.prefactor_weight
    fQ = to_Q(p.evaluate(md), md)
    basis = weight_basis(weight)
    cols = [_monomial_value(m, ts, order) for m in basis]
    res = solve_exact(cols, fQ, guard)
    res.basis = basis
    extra: dict = {"weight": weight}
    if res.passed:
        return QuasiModPoly(dict(zip(basis, res.coeffs)), weight), res, extra
    # fallback ring with a*b adjoined, reported alongside
    if weight >= 2:
        ab = _ab_series(ts, order)
        ext_basis = basis + [("ab",) + m for m in weight_basis(weight - 2)]
        ext_cols = cols + [ab * _monomial_value(m, ts, order) for m in weight_basis(weight - 2)]
        ext = solve_exact(ext_cols, fQ, guard)
        extra["with_ab"] = {"pass": ext.passed,
                            "coeffs": {str(m): str(c) for m, c in zip(ext_basis, ext.coeffs) if c}}
    return None, res, extra


def e2_derivative_poly(p: GeneratorPoly) -> GeneratorPoly:
    """d/dE2 in generator form: dX1/dE2 = 1/(12 P^2)."""
    dp = p.d_x1()
    terms = {k: v * Fraction(1, 12) for k, v in dp.terms.items()}
    return GeneratorPoly(terms, p.prefactor_weight - 2, p.lambda_power, p.degree - 1)


def e2_derivative_series(p: GeneratorPoly, order: int) -> PowerSeries:
    return e2_derivative_poly(p).evaluate(mirror_data(order))


def two_route_e2_check(p: GeneratorPoly, order: int = 15, guard: int = 10) -> Check:
    """Formal d/dE2 of the certified quasi-modular form vs (1/12) d/dX1 transported to Q."""
    fit_order = max(order, len(weight_basis(p.prefactor_weight)) + guard + 2)
    qm, res, _ = quasimodularity_certify(p, order=fit_order, guard=guard)
    if qm is None:
        return Check("two-route d/dE2", False, res.check.first_failure, {"reason": "certification failed"})
    ts = theta_series(order)
    route_a = e2_partial(qm).evaluate(ts, order)
    md = mirror_data(order)
    route_b = to_Q(e2_derivative_series(p, order), md)
    return residual_check("two-route d/dE2", route_a - route_b, quasimodular=qm.to_json())


# HAE -------------------------------------------------------------------------

@dataclass
class HAEReport:
    g: int
    insertions: tuple
    pairing: str
    lhs: PowerSeries
    rhs_dilaton: PowerSeries
    rhs_loop: PowerSeries
    rhs_split: PowerSeries
    residual: PowerSeries
    convention_flags: dict = field(default_factory=dict)
    fitted: GeneratorPoly | None = None

    @property
    def check(self) -> Check:
        return residual_check(f"HAE ({self.g},{len(self.insertions)}) pairing {self.pairing}", self.residual,
                              **self.convention_flags)

    @property
    def passed(self) -> bool:
        return self.check.passed

    def to_dict(self) -> dict:
        return {"g": self.g, "insertions": list(self.insertions), "pairing": self.pairing,
                "lhs": self.lhs, "rhs_dilaton": self.rhs_dilaton, "rhs_loop": self.rhs_loop,
                "rhs_split": self.rhs_split, "residual": self.residual, "pass": self.passed,
                "convention_flags": self.convention_flags,
                "fitted": None if self.fitted is None else {f"X1^{a}*L^{b}": str(c)
                                                            for (a, b), c in sorted(self.fitted.terms.items())}}


def _series(req: CorrelatorRequest, lam: int, z_max: int, g_max: int) -> PowerSeries:
    """Correlator series, checked to sit in the given lambda-power (zero is allowed)."""
    if req.degree < 0:
        return PowerSeries.constant(0, req.order)
    res = correlator(req, z_max, g_max)
    if not res.series.is_zero() and res.lambda_power != lam:
        raise AssertionError(f"lambda-power {res.lambda_power} where {lam} was expected")
    return res.series


def hae_terms(g: int, insertions, pairing: KappaPsiMonomial, order: int, guard: int = 10,
              z_max: int = 8, g_max: int = 2) -> dict:
    """LHS and the three unnormalised right-hand pieces (loop and split without their factors)."""
    if g < 1:
        raise ValueError("the anomaly equation needs g >= 1")
    ins = tuple(insertions)
    n = len(ins)
    req = CorrelatorRequest(g, ins, pairing, order)
    d = req.degree
    lam = req.expected_lambda()
    # fit on enough coefficients for the guard, then read off d/dE2
    fit_order = max(order, len(generator_basis(d)) + guard + 1)
    full = correlator(CorrelatorRequest(g, ins, pairing, fit_order), z_max, g_max)
    p, fit = fit_finite_generation(full.series, g, ins, d, guard, lam)
    if p is None:
        raise AssertionError(f"finite-generation fit failed: {fit.check}")
    lhs = e2_derivative_series(p, order)

    dil = PowerSeries.constant(0, order)
    for j, i in enumerate(ins):
        if i != 1:
            continue
        new_ins = ins[:j] + (0,) + ins[j + 1:]
        psi = dict(pairing.psi)
        psi[j + 1] = psi.get(j + 1, 0) + 1
        dil = dil + _series(CorrelatorRequest(g, new_ins, KappaPsiMonomial(psi, pairing.kappa), order),
                            lam, z_max, g_max) * Fraction(1, 12)

    loop = PowerSeries.constant(0, order)
    if 2 * (g - 1) - 2 + n + 2 > 0:
        loop = _series(CorrelatorRequest(g - 1, ins + (0, 0), pairing, order), lam, z_max, g_max) * Fraction(-1, 36)

    split = PowerSeries.constant(0, order)
    kap = list(pairing.kappa)
    for g1 in range(g + 1):
        g2 = g - g1
        for size in range(n + 1):
            for S1 in combinations(range(n), size):
                S2 = [j for j in range(n) if j not in S1]
                if 2 * g1 - 2 + len(S1) + 1 <= 0 or 2 * g2 - 2 + len(S2) + 1 <= 0:
                    continue
                for assign in product((0, 1), repeat=len(kap)):
                    sides = []
                    for gi, Si, side in ((g1, S1, 0), (g2, S2, 1)):
                        psi = {pos + 1: pairing.psi[j + 1] for pos, j in enumerate(Si) if pairing.psi.get(j + 1)}
                        kk = tuple(sorted(kap[t] for t in range(len(kap)) if assign[t] == side))
                        sides.append(CorrelatorRequest(gi, tuple(ins[j] for j in Si) + (0,),
                                                       KappaPsiMonomial(psi, kk), order))
                    if sides[0].degree < 0 or sides[1].degree < 0:
                        continue
                    r0 = correlator(sides[0], z_max, g_max)
                    r1 = correlator(sides[1], z_max, g_max)
                    prod_series = r0.series * r1.series
                    if prod_series.is_zero():
                        continue
                    if r0.lambda_power + r1.lambda_power != lam:
                        raise AssertionError("split term in the wrong lambda-power")
                    split = split + prod_series * Fraction(-1, 36)
    return {"lhs": lhs, "dilaton": dil, "loop": loop, "split": split, "fitted": p, "fit": fit}


def resolve_factor(target: PowerSeries, unit: PowerSeries) -> Fraction | str | None:
    """The candidate c with target = c * unit exactly; "free" if unit vanishes and target does too."""
    if unit.is_zero():
        return "free" if target.is_zero() else None
    for c in CANDIDATES:
        if (target - unit * c).is_zero():
            return c
    return None


def hae_check(g: int, insertions, pairing: KappaPsiMonomial | None = None, order: int = 15,
              loop_factor: Fraction = LOOP_FACTOR, split_factor: Fraction = SPLIT_FACTOR,
              guard: int = 10, z_max: int = 8, g_max: int = 2) -> HAEReport:
    pairing = pairing or KappaPsiMonomial()
    t = hae_terms(g, insertions, pairing, order, guard, z_max, g_max)
    loop = t["loop"] * loop_factor
    split = t["split"] * split_factor
    residual = t["lhs"] - t["dilaton"] - loop - split
    flags = {"loop_factor": str(loop_factor), "split_factor": str(split_factor),
             "split_exercised": not t["split"].is_zero(), "loop_exercised": not t["loop"].is_zero()}
    return HAEReport(g, tuple(insertions), pairing.label(), t["lhs"], t["dilaton"], loop, split, residual,
                     flags, t["fitted"])


def resolve_conventions(order: int = 15, genus_two: bool = False, z_max: int = 8) -> dict:
    """Fix the loop factor at (1,1); optionally the split factor from genus-two pairings."""
    t = hae_terms(1, (1,), KappaPsiMonomial(), order, z_max=z_max)
    loop = resolve_factor(t["lhs"] - t["dilaton"] - t["split"] * SPLIT_FACTOR, t["loop"])
    if loop == "free":
        loop = None
    out = {"loop_factor": loop, "loop_source": "(1,1) pairing 1", "split_factor": None,
           "split_source": "not exercised at (1,1) or (1,2)"}
    if genus_two and loop is not None:
        found = []
        for kappa in ((1, 1), (2,)):
            t2 = hae_terms(2, (), KappaPsiMonomial({}, kappa), order, z_max=z_max)
            rest = t2["lhs"] - t2["dilaton"] - t2["loop"] * loop
            found.append(resolve_factor(rest, t2["split"]))
        pinned = {f for f in found if f != "free"}
        if None not in found and len(pinned) == 1:
            out["split_factor"] = pinned.pop()
            out["split_source"] = "(2,0) pairing kappa_1^2; kappa_2 consistent (split term vanishes)"
        else:
            out["split_source"] = f"(2,0) inconclusive: {found}"
    return out
