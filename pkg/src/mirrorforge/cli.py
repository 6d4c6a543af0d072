"""Command-line entry point: ``mirrorforge <verb> ...``."""
from __future__ import annotations

import argparse
import inspect
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import anomaly, intersections as inter, mirror as M, modular as MF, rmatrix as R, suites
from .graph_sum import CorrelatorRequest, InsufficientZOrder, correlator
from .graphs import GraphRangeError
from .intersections import KappaPsiMonomial
from .report import emit
from .series import PowerSeries, to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
VERBS = ("series", "verify", "rmatrix", "modular", "intersect", "correlator", "fit", "certify", "hae", "cache")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    q_order: int = 40
    z_order: int = 8
    g_max: int = 2
    cache_path: Path | None = None
    output_format: str = "json"
    guard: int = 10

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        cfg = cls()
        if os.environ.get("MIRRORFORGE_ORDER"):
            cfg.q_order = int(os.environ["MIRRORFORGE_ORDER"])
        if os.environ.get("MIRRORFORGE_CACHE"):
            cfg.cache_path = Path(os.environ["MIRRORFORGE_CACHE"])
        for k, v in overrides.items():
            if v is not None:
                setattr(cfg, k, v)
        return cfg

    def suite_options(self) -> suites.SuiteOptions:
        return suites.SuiteOptions(self.q_order, self.z_order, self.g_max, self.guard)

    def store(self) -> inter.CacheStore:
        return inter.CacheStore(self.cache_path) if self.cache_path else inter.CacheStore.default()


def run_all(config: RunConfig | None = None, extended: bool = False) -> dict:
    """Every acceptance suite in dependency order, with an aggregate verdict."""
    config = config or RunConfig()
    reports = suites.run_all(config.suite_options(), extended)
    failed = [r.suite for r in reports if not r.skipped and not r.passed]
    return {"pass": not failed, "failed": failed,
            "skipped": [r.suite for r in reports if r.skipped], "reports": reports}


# argument helpers -------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _insertions(text: str) -> tuple:
    """'H,H' / '1,H^2' / '0,1,2' -> powers of H."""
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if tok == "1":
            out.append(0)
        elif tok == "H":
            out.append(1)
        elif tok.startswith("H^") and tok[2:].isdigit():
            out.append(int(tok[2:]))
        elif tok.isdigit():
            out.append(int(tok))
        else:
            raise argparse.ArgumentTypeError(f"bad insertion {tok!r}")
    return tuple(out)


def _pairing(text: str) -> KappaPsiMonomial:
    try:
        return KappaPsiMonomial.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", dest="output_format", choices=("json", "csv", "pretty"))
    p.add_argument("--cache", dest="cache_path", type=Path)
    p.add_argument("--guard", type=int)
    p.add_argument("--z-order", dest="z_order", type=int)
    p.add_argument("--g-max", dest="g_max", type=int)
    p.add_argument("--order", type=int, help="q-order")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _correlator_args(p: argparse.ArgumentParser):
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--ins", type=_insertions, default=())
    p.add_argument("--deg", type=int)
    p.add_argument("--pair", type=_pairing, default=KappaPsiMonomial())


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="mirrorforge", description="Exact verification of the mirror-side "
                                     "graph sum and holomorphic anomaly for local P^2.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("series", parents=[common], help="dump a named q-series")
    p.add_argument("--name", required=True,
                   choices=("I0", "I1", "I2", "I3", "L", "I11", "I22", "I33", "X1", "Y1", "Y2", "Y3", "Q", "q_of_Q"))

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", default="all", choices=("all",) + tuple(suites.SUITES) + tuple(suites.EXTENDED))
    p.add_argument("--extended", action="store_true", help="with --suite all, include exploratory suites")

    p = sub.add_parser("rmatrix", parents=[common], help="dump r_k and R-matrix columns")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--column", type=int, choices=(0, 1, 2))

    sub.add_parser("modular", parents=[common], help="dump a, b and Eisenstein series in Q")

    p = sub.add_parser("intersect", parents=[common], help="psi/kappa intersection number")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--psi", type=_int_list, default=[])
    p.add_argument("--kappa", type=_int_list, default=[])

    for verb, text in (("correlator", "graph-sum correlator"), ("fit", "finite-generation fit"),
                       ("certify", "quasi-modularity certificate"), ("hae", "holomorphic anomaly residual")):
        p = sub.add_parser(verb, parents=[common], help=text)
        _correlator_args(p)
        if verb == "correlator":
            p.add_argument("--explain", action="store_true")
        if verb == "hae":
            p.add_argument("--resolve", action="store_true", help="re-derive the pushforward factors first")

    p = sub.add_parser("cache", parents=[common], help="intersection-number cache")
    p.add_argument("action", choices=("load", "save", "warm", "clear", "info"))
    p.add_argument("--max-dim", type=int, default=8)
    return parser


# verbs ----------------------------------------------------------------------

def _series_named(name: str, order: int) -> PowerSeries:
    if name in ("I0", "I1", "I2", "I3", "L", "I11", "I22", "I33"):
        md = M.mirror_data(order)
        return {"I0": md.i0, "I1": md.i1, "I2": md.i2, "I3": md.i3, "L": md.L,
                "I11": md.I11, "I22": md.I22, "I33": md.I33}[name]
    if name in ("Q", "q_of_Q"):
        md = M.mirror_data(order)
        return md.mirror_Q if name == "Q" else md.inverse_q
    gv = M.generator_values(M.mirror_data(order), 3)
    return gv.X[1] if name == "X1" else gv.Y[int(name[1])]


def _dump_series(s: PowerSeries, fmt: str) -> str:
    coeffs = to_json(s)
    if fmt == "json":
        return json.dumps(coeffs)
    if fmt == "csv":
        return "index,coefficient\n" + "".join(f"{k},{c}\n" for k, c in enumerate(coeffs))
    width = len(str(len(coeffs)))
    return "\n".join(f"{s.var}^{str(k).ljust(width)}  {c}" for k, c in enumerate(coeffs))


def _request(args, cfg: RunConfig) -> CorrelatorRequest:
    if args.g > cfg.g_max:
        raise UsageError(f"genus {args.g} exceeds g_max={cfg.g_max}")
    if args.n is not None and args.n != len(args.ins):
        raise UsageError(f"--n {args.n} does not match {len(args.ins)} insertions")
    if any(i not in (0, 1, 2) for i in args.ins):
        raise UsageError("insertions must be 1, H or H^2")
    if 2 * args.g - 2 + len(args.ins) <= 0:
        raise UsageError(f"(g, n) = ({args.g}, {len(args.ins)}) is unstable")
    if any(j < 1 or j > len(args.ins) for j in args.pair.psi):
        raise UsageError("psi exponents given for more markings than insertions")
    req = CorrelatorRequest(args.g, tuple(args.ins), args.pair, min(args.order or 15, cfg.q_order))
    if args.deg is not None and args.deg != req.degree:
        raise UsageError(f"--deg {args.deg} is inconsistent: pairing {args.pair.label()} sees degree {req.degree}")
    return req


def _cmd_series(args, cfg):
    order = args.order if args.order is not None else cfg.q_order
    return _dump_series(_series_named(args.name, order), cfg.output_format), EXIT_OK


def _cmd_verify(args, cfg):
    opts = cfg.suite_options()
    if args.suite == "all":
        agg = run_all(cfg, args.extended)
        return emit(agg["reports"], cfg.output_format), EXIT_OK if agg["pass"] else EXIT_FAIL
    fn = suites.SUITES.get(args.suite) or suites.EXTENDED[args.suite]
    kwargs = {"order": args.order} if args.order is not None and "order" in inspect.signature(fn).parameters else {}
    rep = suites.run_suite(args.suite, opts, **kwargs)
    ok = rep.passed or rep.skipped is not None
    return emit(rep, cfg.output_format), EXIT_OK if ok else EXIT_FAIL


def _cmd_rmatrix(args, cfg):
    if args.k < 1:
        raise UsageError("--k must be positive")
    rs = R.solve_r_recursion(args.k)
    doc = {"r": R.r_series_report(rs), "r_at_0": {f"r{k}": rs[k](0) for k in range(1, args.k + 1)}}
    if args.column is not None:
        cols = R.build_R_columns(cfg.z_order)
        order = min(args.order or 10, cfg.q_order)
        doc["column"] = {"alpha": args.column, **cols.column(args.column, order)}
    return emit(doc, cfg.output_format), EXIT_OK


def _cmd_modular(args, cfg):
    order = args.order if args.order is not None else min(cfg.q_order, 20)
    ts = MF.theta_series(order)
    doc = {"a": ts.a, "b": ts.b, **{f"E{k}": MF.eisenstein(k, order) for k in (2, 4, 6)}}
    return emit(doc, cfg.output_format), EXIT_OK


def _cmd_intersect(args, cfg):
    store = cfg.store()
    if store.path.exists():
        store.load()
        store.install()
    try:
        val = inter.kappa_to_psi(args.psi, tuple(args.kappa), args.g)
    except (inter.UnstableError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return emit({"g": args.g, "psi": args.psi, "kappa": args.kappa, "value": val}, cfg.output_format), EXIT_OK


def _cmd_correlator(args, cfg):
    req = _request(args, cfg)
    res = correlator(req, cfg.z_order, cfg.g_max, explain=args.explain)
    doc = {"g": req.g, "insertions": list(req.insertions), "pairing": req.pairing.label(),
           "degree": req.degree, **res.to_dict(args.explain)}
    return emit(doc, cfg.output_format), EXIT_OK


def _fit(req, cfg):
    fit_order = max(req.order, cfg.guard + len(anomaly.generator_basis(req.degree)) + 1)
    res = correlator(CorrelatorRequest(req.g, req.insertions, req.pairing, fit_order), cfg.z_order, cfg.g_max)
    p, fit = anomaly.fit_finite_generation(res.series, req.g, req.insertions, req.degree, cfg.guard,
                                           res.lambda_power)
    return res, p, fit


def _poly_json(p) -> dict:
    return {f"X1^{a}*L^{b}": c for (a, b), c in sorted(p.terms.items())}


def _cmd_fit(args, cfg):
    req = _request(args, cfg)
    res, p, fit = _fit(req, cfg)
    doc = {"pass": p is not None, "prefactor": f"P^{anomaly.prefactor_weight(req.g, req.insertions)}",
           "lambda_power": res.lambda_power, "generator_form": _poly_json(p) if p else None,
           "rows_used": fit.rows_used, "guard": cfg.guard, "first_failure": fit.check.first_failure}
    return emit(doc, cfg.output_format), EXIT_OK if p is not None else EXIT_FAIL


def _cmd_certify(args, cfg):
    req = _request(args, cfg)
    res, p, fit = _fit(req, cfg)
    if p is None:
        return emit({"pass": False, "stage": "finite generation", "first_failure": fit.check.first_failure},
                    cfg.output_format), EXIT_FAIL
    order = max(req.order, cfg.guard + len(MF.weight_basis(p.prefactor_weight)) + 1)
    qm, cert, extra = anomaly.quasimodularity_certify(p, order=order, guard=cfg.guard)
    doc = {"pass": qm is not None, "weight": p.prefactor_weight, "generator_form": _poly_json(p),
           "quasimodular_form": qm.to_json() if qm else None, "extra": extra,
           "first_failure": cert.check.first_failure}
    return emit(doc, cfg.output_format), EXIT_OK if qm is not None else EXIT_FAIL


def _cmd_hae(args, cfg):
    req = _request(args, cfg)
    loop, split = anomaly.LOOP_FACTOR, anomaly.SPLIT_FACTOR
    conv = None
    if args.resolve:
        conv = anomaly.resolve_conventions(min(cfg.q_order, 15), genus_two=req.g >= 2, z_max=cfg.z_order)
        loop = conv["loop_factor"] if conv["loop_factor"] is not None else loop
        split = conv["split_factor"] if conv["split_factor"] is not None else split
    rep = anomaly.hae_check(req.g, req.insertions, req.pairing, order=req.order, loop_factor=loop,
                            split_factor=split, guard=cfg.guard, z_max=cfg.z_order, g_max=cfg.g_max)
    doc = rep.to_dict()
    if conv is not None:
        doc["resolution"] = conv
    return emit(doc, cfg.output_format), EXIT_OK if rep.passed else EXIT_FAIL


def _cmd_cache(args, cfg):
    store = cfg.store()
    if args.action == "clear":
        inter.clear_memo()
        if store.path.exists():
            store.path.unlink()
        return emit({"action": "clear", "path": str(store.path)}, cfg.output_format), EXIT_OK
    status = store.load()
    if args.action == "warm":
        store.install()
        for g, a in inter.stable_keys(args.max_dim):
            inter.psi_integral(g, a)
        added = store.absorb_memo()
        store.save()
        status = f"warmed (+{added})"
    elif args.action == "save":
        store.absorb_memo()
        status = store.save()
    doc = {"action": args.action, "path": str(store.path), "status": status, "entries": len(store.entries)}
    return emit(doc, cfg.output_format), EXIT_OK


COMMANDS = {"series": _cmd_series, "verify": _cmd_verify, "rmatrix": _cmd_rmatrix, "modular": _cmd_modular,
            "intersect": _cmd_intersect, "correlator": _cmd_correlator, "fit": _cmd_fit,
            "certify": _cmd_certify, "hae": _cmd_hae, "cache": _cmd_cache}


def dispatch(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.from_env(output_format=args.output_format, cache_path=args.cache_path, guard=args.guard,
                                 z_order=args.z_order, g_max=args.g_max)
        if args.verb == "verify" and args.order is not None:
            cfg.q_order = args.order
        if min(cfg.q_order, cfg.z_order, cfg.g_max, cfg.guard) < 0:
            raise UsageError("orders, g_max and guard must be non-negative")
        text, code = COMMANDS[args.verb](args, cfg)
    except (UsageError, GraphRangeError, InsufficientZOrder, inter.CacheVersionError) as exc:
        print(f"mirrorforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(text if text.endswith("\n") else text + "\n")
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
