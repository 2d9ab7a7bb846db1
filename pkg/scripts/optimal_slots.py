"""Per-policy slot-count search: full curve plus the best S per metric.

carp runs from a single slot; the other policies need at least two (sscp
sends two replicas, crdsap/irsap pick two or more distinct slots).
"""

import argparse
from pathlib import Path

from risra.cli import main as risra


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for policies, s_values in (("carp", "1:40"), ("sscp,crdsap,irsap", "2:40")):
        out = args.out_dir / f"optimal_slots_{policies.replace(',', '_')}.csv"
        code = risra(
            [
                "optimal-s", "--s-values", s_values, "--policies", policies,
                "--trials", str(args.trials), "--seed", str(args.seed),
                "--set", f"sim.workers={args.workers}",
                "--out", str(out),
            ]
        )
        if code != 0:
            raise SystemExit(code)
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
