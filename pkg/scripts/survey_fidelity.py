"""Survey Gaussian fidelity and the 1/F extent lower bound for the
standard magic targets, plus an alpha sweep of the interpolating family."""

import argparse

import numpy as np

from gaussmagic import (
    extent_lower_via_fidelity,
    gaussian_fidelity,
    m_state,
    malpha_state,
    mtilde_state,
)
from gaussmagic.states import tensor_power


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--restarts", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--alphas", type=int, default=5, help="alpha grid points")
    parser.add_argument("--copies", type=int, default=1, help="tensor copies of M")
    args = parser.parse_args()

    targets = [("M", m_state()), ("Mtilde", mtilde_state())]
    if args.copies > 1:
        targets.append((f"M^{args.copies}", tensor_power(m_state(), args.copies)))
    for alpha in np.linspace(0.6, 0.95, args.alphas):
        targets.append((f"Malpha({alpha:.2f})", malpha_state(float(alpha))))

    print(f"{'target':<16} {'fidelity':>12} {'1/F':>10}  converged")
    for name, state in targets:
        result = gaussian_fidelity(state, restarts=args.restarts, seed=args.seed)
        bound, _ = extent_lower_via_fidelity(
            state, restarts=args.restarts, seed=args.seed
        )
        print(f"{name:<16} {result.value:>12.9f} {bound:>10.6f}  {result.converged}")


if __name__ == "__main__":
    main()
