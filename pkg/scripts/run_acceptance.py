"""Run every verification suite and print a pretty table; exit 1 on any failure."""
import argparse
import sys

from mirrorforge.cli import RunConfig, run_all
from mirrorforge.report import emit


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--order", type=int, default=40)
    ap.add_argument("--extended", action="store_true", help="add the genus-two and cubic-generator suites")
    ap.add_argument("--format", default="pretty", choices=("json", "csv", "pretty"))
    args = ap.parse_args()
    agg = run_all(RunConfig(q_order=args.order), extended=args.extended)
    print(emit(agg["reports"], args.format))
    total = sum(r.timing for r in agg["reports"])
    print(f"\n{'PASS' if agg['pass'] else 'FAIL'}  total {total:.2f}s  skipped: {agg['skipped'] or 'none'}")
    sys.exit(0 if agg["pass"] else 1)


if __name__ == "__main__":
    main()
