"""Annealed Gaussian rank search for tensor copies of the magic states.

Runs the plain chart search for each requested term count, then the
symmetry-restricted search on |M>|M> with the rank-3 obstruction report.
"""

import argparse

from gaussmagic import (
    RankSearchConfig,
    anneal_decomposition,
    m_state,
    mtilde_state,
    rank3_infeasibility_certificate,
    symmetric_rank_search,
)
from gaussmagic.states import tensor_power


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--target", choices=("M2", "Mtilde2"), default="Mtilde2")
    parser.add_argument("--terms", type=int, nargs="+", default=[2, 3, 4])
    parser.add_argument("--iterations", type=int, default=20_000)
    parser.add_argument("--restarts", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--skip-symmetric", action="store_true")
    args = parser.parse_args()

    base = m_state() if args.target == "M2" else mtilde_state()
    target = tensor_power(base, 2)
    print(f"target {args.target}, {args.restarts} restarts x {args.iterations} iterations")
    for k in args.terms:
        cfg = RankSearchConfig(
            terms=k,
            iterations=args.iterations,
            restarts=args.restarts,
            seed=args.seed,
        )
        d = anneal_decomposition(target, cfg)
        print(f"  k={k}: loss {d.loss:.3e}, extent {d.extent_value:.6f}")

    if args.skip_symmetric:
        return
    print("symmetry-restricted search on M2:")
    for k in (3, 4):
        cfg = RankSearchConfig(
            terms=k,
            iterations=args.iterations,
            restarts=args.restarts,
            seed=args.seed,
            min_state_pivot=0.05 if k == 3 else 0.0,
        )
        d = symmetric_rank_search(k, cfg)
        line = f"  k={k}: loss {d.loss:.3e}, extent {d.extent_value:.6f}"
        if k == 3:
            report = rank3_infeasibility_certificate(d)
            line += f", obstruction {report['obstruction']}, verdict {report['verdict']}"
        print(line)


if __name__ == "__main__":
    main()
