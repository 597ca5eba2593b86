"""Distribution of admissible perturbation sizes for cubics with at most three maxima."""

import argparse

import numpy as np

from cubicball.certificate import perturbation_witness, witness_epsilon, witness_points
from cubicball.poly import Cubic3
from cubicball.sphere import CriticalPoint, Degeneracy, brute_force_norm, norm_s2


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=400)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    eps, skipped = [], 0
    for _ in range(args.count):
        p = Cubic3(rng.standard_normal(10))
        p = p * (1.0 / norm_s2(p)[0])
        maxima = norm_s2(p)[1]
        simple = all(isinstance(m, CriticalPoint) and m.degeneracy is Degeneracy.NON_DEGENERATE for m in maxima)
        if not simple or len(maxima) > 3:
            skipped += 1
            continue
        delta = perturbation_witness(*witness_points([m.location for m in maxima]))
        e = witness_epsilon(p, delta)
        grid = max(brute_force_norm(p + delta * (s * e), args.grid) for s in (1, -1))
        print(f"maxima={len(maxima)} eps={e:.3e} grid_norm={grid:.12f}")
        eps.append(e)
    eps = np.array(eps)
    print(f"{len(eps)} cubics, {skipped} skipped; eps min {eps.min():.3e} median {np.median(eps):.3e}")


if __name__ == "__main__":
    main()
