"""Throughput and energy efficiency versus the number of reflecting elements.

Sweeps square surfaces from 2x2 to 20x20 for 5-slot and 20-slot frames.
"""

import argparse
from pathlib import Path

from risra.cli import main as risra

ELEMENT_GRID = "4,16,36,64,100,144,196,256,324,400"  # perfect squares only


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for slots in (5, 20):
        out = args.out_dir / f"elements_s{slots}.csv"
        code = risra(
            [
                "sweep", "--axis", "N", "--values", ELEMENT_GRID,
                "--policies", "carp,sscp,crdsap,irsap",
                "--trials", str(args.trials), "--seed", str(args.seed),
                "--set", f"sim.s={slots}", "--set", f"sim.workers={args.workers}",
                "--out", str(out),
            ]
        )
        if code != 0:
            raise SystemExit(code)
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
