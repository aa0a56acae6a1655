#!/usr/bin/env python3
"""Independent recomputation of the rank-point table and Friedman test from
data/published_means.csv. With --check DIR it also compares against the
points.csv / friedman.csv written by `mabc compare`."""
import argparse
import csv
import sys
from collections import defaultdict

from scipy import stats

POINTS = [25, 18, 15, 12]


def load(path, fes):
    means = defaultdict(dict)
    order = []
    with open(path) as f:
        for row in csv.DictReader(f):
            if int(row["evaluations"]) != fes:
                continue
            if row["algorithm"] not in means:
                order.append(row["algorithm"])
            means[row["algorithm"]][row["problem"]] = float(row["mean"])
    return order, means


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("--fes", type=int, default=3000000)
    ap.add_argument("--check")
    args = ap.parse_args()

    algs, means = load(args.csv, args.fes)
    problems = sorted(means[algs[0]], key=lambda p: int(p[1:]))
    totals = [0] * len(algs)
    for p in problems:
        # equal means: the name that sorts first takes the better place
        order = sorted(range(len(algs)), key=lambda a: (means[algs[a]][p], algs[a]))
        for place, a in enumerate(order):
            totals[a] += POINTS[place]
    ranks = [stats.rankdata([means[a][p] for a in algs]) for p in problems]
    mean_ranks = [sum(r[a] for r in ranks) / len(problems) for a in range(len(algs))]
    chi, _ = stats.friedmanchisquare(*[[means[a][p] for p in problems] for a in algs])
    crit = stats.chi2.ppf(0.95, len(algs) - 1)

    for a, t, r in zip(algs, totals, mean_ranks):
        print(f"{a:8s} total {t:4d}  mean rank {r:.3f}")
    print(f"friedman {chi:.6f}  critical {crit:.6f}  reject {chi > crit}")

    if args.check:
        ok = True
        with open(f"{args.check}/points.csv") as f:
            got = {row["algorithm"]: int(row["total"]) for row in csv.DictReader(f)}
        ok &= got == dict(zip(algs, totals))
        with open(f"{args.check}/friedman.csv") as f:
            row = next(csv.DictReader(f))
        ok &= abs(float(row["statistic"]) - chi) <= 1e-5 * max(1.0, chi)
        ok &= abs(float(row["critical_value"]) - crit) <= 1e-4
        with open(f"{args.check}/ranks.csv") as f:
            got_r = {row["algorithm"]: float(row["mean_rank"]) for row in csv.DictReader(f)}
        ok &= all(abs(got_r[a] - r) <= 1e-5 for a, r in zip(algs, mean_ranks))
        print("PASS" if ok else "FAIL", "mabc compare agrees with the oracle")
        sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
