"""Named verification suites; each returns a VerificationReport."""
from __future__ import annotations

import tempfile
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import anomaly, intersections as inter, mirror as M, modular as MF, rmatrix as R
from .graph_sum import CorrelatorRequest, correlator, quantum_three_point
from .intersections import KappaPsiMonomial
from .report import Check, VerificationReport, equality_check


@dataclass
class SuiteOptions:
    q_order: int = 40
    z_order: int = 8
    g_max: int = 2
    guard: int = 10


class Skip(Exception):
    pass


def _cap(default: int, opts: SuiteOptions) -> int:
    return min(default, opts.q_order)


def _need(order: int, required: int, what: str):
    if order < required:
        raise Skip(f"insufficient order for {what}: need {required}, have {order}")


def _fit_budget(opts: SuiteOptions, basis_size: int, what: str):
    """Fit suites require q_order >= guard + basis size."""
    _need(opts.q_order, opts.guard + basis_size, what)


def suite_rclosed(opts: SuiteOptions) -> list[Check]:
    rs = R.solve_r_recursion(12)
    L = R.LPoly
    expected = {
        1: L({2: Fraction(-1, 18)}),
        2: L({4: Fraction(1, 648)}),
        3: L({6: 2875, 3: -3600, 0: 702}) * Fraction(1, 174960),
    }
    checks = [Check(f"r{k} closed form", rs[k] == v, None if rs[k] == v else (k, repr(rs[k])))
              for k, v in expected.items()]
    d1 = R.D(rs[1]) + L({2: Fraction(1, 27)}) * R.L3_MINUS_1
    checks.append(Check("D(r1) = -L^2(L^3-1)/27", d1 == L(), None if d1 == L() else (1, repr(d1))))
    bad = [k for k in range(1, 13) if not rs[k].support() <= R.support_bound(k)]
    checks.append(Check("support of r_k in {2k-3j}", not bad, (bad[0], "support") if bad else None))
    return checks


def suite_initial(opts: SuiteOptions) -> list[Check]:
    rs = R.solve_r_recursion(12)
    c = R.initial_constants(12)
    b4 = R.bernoulli_polynomial(4, Fraction(1, 3))
    checks = [
        Check("B4(1/3) = 13/810", b4 == Fraction(13, 810), None if b4 == Fraction(13, 810) else (4, b4)),
        Check("r3(0) = 13/3240 = B4(1/3)/4", rs[3](0) == Fraction(13, 3240) == b4 / 4,
              None if rs[3](0) == Fraction(13, 3240) == b4 / 4 else (3, rs[3](0))),
    ]
    bad = [k for k in range(1, 13) if k % 3 and rs[k](0) != 0]
    checks.append(Check("r_k(0) = 0 for k not divisible by 3", not bad, (bad[0], rs[bad[0]](0)) if bad else None))
    bad = [k for k in (3, 6, 9, 12) if rs[k](0) != c[k]]
    checks.append(Check("r_3m(0) = c_3m", not bad, (bad[0], rs[bad[0]](0)) if bad else None))
    return checks


def suite_deltatw(opts: SuiteOptions) -> list[Check]:
    rs = R.solve_r_recursion(8)
    checks = [R.delta_tw_q0_check(rs, 8)]
    ok = rs[1](1) == Fraction(-1, 18) and rs[2](1) == Fraction(1, 648)
    checks.append(Check("r1(1) = -1/18, r2(1) = 1/648", ok, None if ok else (1, rs[1](1))))
    return checks


def suite_pf(opts: SuiteOptions, order: int = 50) -> list[Check]:
    order = _cap(order, opts)
    return [M.pf_check_i0(M.i_series(order, "I0"))]


def suite_zz(opts: SuiteOptions, order: int = 30) -> list[Check]:
    md = M.mirror_data(_cap(order, opts))
    return M.zinger_zagier_check(md) + M.mirror_map_checks(md)


def suite_generators(opts: SuiteOptions, order: int = 30) -> list[Check]:
    md = M.mirror_data(_cap(order, opts))
    return M.generator_relations_check(md, M.generator_values(md, 4))


def suite_serre(opts: SuiteOptions, order: int = 30) -> list[Check]:
    order = _cap(order, opts)
    return MF.serre_derivative_check(MF.theta_series(order), order)


def suite_identification(opts: SuiteOptions, order: int = 20) -> list[Check]:
    order = _cap(order, opts)
    return MF.identification_check(MF.theta_series(order), M.mirror_data(order), order)


def suite_modgene(opts: SuiteOptions, order: int = 20) -> list[Check]:
    order = _cap(order, opts)
    md = M.mirror_data(order)
    return MF.generator_dictionary_check(md, M.generator_values(md, 3), MF.theta_series(order), order)


def suite_qde(opts: SuiteOptions, order: int = 25, z_top: int = 7) -> list[Check]:
    order = _cap(order, opts)
    z_max = max(opts.z_order, z_top + 1)
    cols = R.build_R_columns(z_max)
    checks = R.qde_check(cols, M.mirror_data(order), z_top)
    checks.append(R.edge_divisibility_check(z_max))
    checks.append(R.edge_divisibility_series_check(z_max, order))
    return checks


def suite_e2rv(opts: SuiteOptions) -> list[Check]:
    return R.e2_derivative_R_check(R.build_R_columns(opts.z_order))


def suite_oracle03(opts: SuiteOptions, order: int = 15) -> list[Check]:
    order = _cap(order, opts)
    checks = []
    for i in range(3):
        for j in range(3):
            for k in range(3):
                res = correlator(CorrelatorRequest(0, (i, j, k), order=order), opts.z_order, opts.g_max)
                oracle = M_get(quantum_three_point(i, j, k, order), res.lambda_power, order)
                extra = set(quantum_three_point(i, j, k, order)) - {res.lambda_power}
                c = equality_check(f"<H^{i},H^{j},H^{k}>", res.series, oracle, lam=res.lambda_power)
                if extra:
                    c = Check(c.name, False, (0, f"oracle has lambda-powers {sorted(extra)}"))
                checks.append(c)
    return checks


def M_get(d: dict, lam: int, order: int):
    from .series import PowerSeries
    return d.get(lam, PowerSeries.constant(0, order))


QUASIMOD_CASES = (("Omega_{1,1}(H)", 1, (1,)), ("Omega_{1,2}(H,H)", 1, (1, 1)))


def suite_quasimod(opts: SuiteOptions, order: int = 25) -> list[Check]:
    order = _cap(order, opts)
    checks = []
    for name, g, ins in QUASIMOD_CASES:
        w = 2 * g - 2 + 2 * len(ins)
        _fit_budget(opts, max(len(MF.weight_basis(w)), len(anomaly.generator_basis(len(ins)))), name)
        req = CorrelatorRequest(g, ins, KappaPsiMonomial(), order)
        res = correlator(req, opts.z_order, opts.g_max)
        p, fit = anomaly.fit_finite_generation(res.series, g, ins, req.degree, opts.guard, res.lambda_power)
        if p is None:
            checks.append(Check(f"{name} finite generation", False, fit.check.first_failure))
            continue
        checks.append(Check(f"{name} finite generation", True, None,
                            {"generator_form": {f"X1^{a}*L^{b}": str(c) for (a, b), c in p.terms.items()}}))
        qm, cert, extra = anomaly.quasimodularity_certify(p, order=order, guard=opts.guard)
        ok = qm is not None and qm.weight == w
        checks.append(Check(f"{name} quasi-modular of weight {w}", ok,
                            None if ok else (cert.check.first_failure or (0, "fit failed")),
                            {"form": qm.to_json() if qm else None, **cert.check.detail, **extra}))
    return checks


def suite_hae(opts: SuiteOptions) -> list[Check]:
    _fit_budget(opts, len(anomaly.generator_basis(2)), "HAE left-hand side")
    conv = anomaly.resolve_conventions(_cap(15, opts), z_max=opts.z_order)
    loop = conv["loop_factor"]
    checks = [Check("loop factor resolved at (1,1)", loop is not None, None if loop else (0, "unresolved"),
                    {"loop_factor": str(loop), "split_factor": str(anomaly.SPLIT_FACTOR)})]
    if loop is None:
        return checks
    for g, ins, order in ((1, (1,), 15), (1, (1, 1), 12)):
        rep = anomaly.hae_check(g, ins, order=_cap(order, opts), loop_factor=loop, guard=opts.guard,
                                z_max=opts.z_order, g_max=opts.g_max)
        checks.append(rep.check)
    return checks


def suite_genus2(opts: SuiteOptions) -> list[Check]:
    _fit_budget(opts, len(anomaly.generator_basis(2)), "genus-two HAE")
    conv = anomaly.resolve_conventions(_cap(15, opts), genus_two=True, z_max=opts.z_order)
    checks = [Check("split factor resolved at (2,0)", conv["split_factor"] is not None,
                    None if conv["split_factor"] is not None else (0, conv["split_source"]),
                    {k: str(v) for k, v in conv.items()})]
    for kappa in ((1, 1), (2,)):
        rep = anomaly.hae_check(2, (), KappaPsiMonomial({}, kappa), order=_cap(12, opts), guard=opts.guard,
                                z_max=opts.z_order, g_max=max(opts.g_max, 2))
        checks.append(rep.check)
    return checks


def suite_e2two(opts: SuiteOptions, order: int = 15) -> list[Check]:
    order = _cap(order, opts)
    _fit_budget(opts, len(MF.weight_basis(2)), "two-route check")
    fit_order = max(order, 25)
    res = correlator(CorrelatorRequest(1, (1,), KappaPsiMonomial(), fit_order), opts.z_order, opts.g_max)
    p, fit = anomaly.fit_finite_generation(res.series, 1, (1,), 1, opts.guard, res.lambda_power)
    if p is None:
        return [Check("Omega_{1,1}(H) finite generation", False, fit.check.first_failure)]
    return [anomaly.two_route_e2_check(p, order, opts.guard)]


def suite_dvv(opts: SuiteOptions, max_dim: int = 6) -> list[Check]:
    bad = None
    count = 0
    for g, a in inter.stable_keys(max_dim):
        count += 1
        if inter.psi_integral(g, a) != inter.psi_integral_reduced(g, a):
            bad = (g, a)
            break
    known = {(0, (0, 0, 0)): Fraction(1), (1, (1,)): Fraction(1, 24), (2, (4,)): Fraction(1, 1152),
             (3, (7,)): Fraction(1, 82944)}
    wrong = [k for k, v in known.items() if inter.psi_integral(*k) != v]
    return [Check("DVV = string/dilaton path", bad is None, None if bad is None else (0, str(bad)), {"keys": count}),
            Check("classical values", not wrong, (0, str(wrong[0])) if wrong else None)]


def suite_cache(opts: SuiteOptions) -> list[Check]:
    for g, a in inter.stable_keys(6):
        inter.psi_integral(g, a)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "wk.json"
        store = inter.CacheStore(path)
        store.absorb_memo()
        store.save()
        back = inter.CacheStore(path)
        back.load()
    ok = back.entries == store.entries and len(store.entries) > 0
    return [Check("cache round trip", ok, None if ok else (0, "mismatch"), {"entries": len(store.entries)})]


def suite_cubic(opts: SuiteOptions) -> list[Check]:
    res = MF.cubic_generator_fit(MF.theta_series(_cap(30, opts)), opts.guard)
    return [Check(f"{k} in Q[a, b^3]", v["pass"], None if v["pass"] else (0, "fit failed"), v["coeffs"])
            for k, v in res.items()]


SUITES = {
    "rclosed": suite_rclosed,
    "initial": suite_initial,
    "deltatw": suite_deltatw,
    "pf": suite_pf,
    "zz": suite_zz,
    "generators": suite_generators,
    "serre": suite_serre,
    "identification": suite_identification,
    "modgene": suite_modgene,
    "qde": suite_qde,
    "e2rv": suite_e2rv,
    "oracle03": suite_oracle03,
    "quasimod": suite_quasimod,
    "hae": suite_hae,
    "e2two": suite_e2two,
    "dvv": suite_dvv,
    "cache": suite_cache,
}
EXTENDED = {"genus2": suite_genus2, "cubic": suite_cubic}


def run_suite(name: str, opts: SuiteOptions | None = None, **kwargs) -> VerificationReport:
    opts = opts or SuiteOptions()
    fn = SUITES.get(name) or EXTENDED.get(name)
    if fn is None:
        raise KeyError(name)
    start = time.perf_counter()
    try:
        checks = fn(opts, **kwargs)
        skipped = None
    except (Skip, MF.InsufficientOrder) as exc:
        checks, skipped = [], str(exc)
    return VerificationReport(name, checks, time.perf_counter() - start, asdict(opts), skipped)


def run_all(opts: SuiteOptions | None = None, extended: bool = False) -> list[VerificationReport]:
    names = list(SUITES) + (list(EXTENDED) if extended else [])
    return [run_suite(n, opts) for n in names]
