"""Throughput and energy efficiency versus the device transmit power.

Sweeps 1..100 mW for 5-slot and 20-slot frames, all four policies.
"""

import argparse
from pathlib import Path

from risra.cli import main as risra

POWER_GRID_W = "0.001,0.002,0.005,0.01,0.02,0.03,0.05,0.07,0.1"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for slots in (5, 20):
        out = args.out_dir / f"tx_power_s{slots}.csv"
        code = risra(
            [
                "sweep", "--axis", "rho_mtd", "--values", POWER_GRID_W,
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
