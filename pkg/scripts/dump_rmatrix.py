"""Print r_k(L) and the three R-matrix rows in generator form."""
import argparse

from mirrorforge.rmatrix import build_R_columns, solve_r_recursion


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=6)
    args = ap.parse_args()
    rs = solve_r_recursion(args.k)
    for k in range(1, args.k + 1):
        print(f"r{k} =", " + ".join(f"({c})L^{e}" for e, c in sorted(rs[k].coeffs.items())))
    cols = build_R_columns(args.k)
    for i in range(3):
        print(f"\nrow {i}")
        for k in range(args.k + 1):
            print(f"  z^{k}: t^{i - k} *", cols.entry(i, k))


if __name__ == "__main__":
    main()
