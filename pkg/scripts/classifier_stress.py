"""Classify randomly rotated members of every family and report recovery per family."""

import argparse
import time
import numpy as np

from cubicball.classify import Verdict, classify_s2
from cubicball.families import Form, sample_form
from cubicball.poly import apply_orthogonal, random_orthogonal


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--per-family", type=int, default=50)
    ap.add_argument("--families", default="ABCDEFGH")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--atol", type=float, default=1e-6)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    clean = 0
    start = time.perf_counter()
    for letter in args.families.upper():
        case = Form(letter)
        ok, worst = 0, 0.0
        for _ in range(args.per_family):
            form = sample_form(case, rng)
            r = classify_s2(apply_orthogonal(form.cubic(), random_orthogonal(rng)))
            hit = r.verdict is Verdict.EXTREMAL and r.form.case is case
            err = float(np.max(np.abs(np.subtract(r.form.params, form.params)), initial=0.0)) if hit else np.inf
            if hit and err <= args.atol:
                ok += 1
            else:
                print(f"  miss {letter} params={form.params} verdict={r.verdict.value} got={r.form}")
            worst = max(worst, err)
        clean += ok == args.per_family
        print(f"{letter}: {ok}/{args.per_family} recovered, worst parameter error {worst:.2e}")
    print(f"{clean} of {len(args.families)} families clean in {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
