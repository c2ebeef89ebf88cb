"""Plane-wave residuals and m^2 = a^2 e^2/(a-1) across the regularization parameter.

The mass diverges as a -> 1 from above; residuals should stay at round-off.

    python3 scripts/mass_scan.py --a 1.001 1.01 1.1 2 5 10 --e 1 --k 0 0.7 1.3
"""

import argparse
from dataclasses import dataclass, field

from fieldcon.verifier import PlaneWaveConfig, SampleGrid, ansatz_residuals


@dataclass
class ScanConfig:
    a_values: list = field(default_factory=lambda: [1.001, 1.01, 1.1, 1.5, 2.0, 3.0, 5.0, 10.0])
    e: float = 1.0
    k_values: list = field(default_factory=lambda: [0.0, 0.7, 1.3])
    grid: SampleGrid = field(default_factory=SampleGrid)


def scan(cfg: ScanConfig):
    for a in cfg.a_values:
        for k in cfg.k_values:
            pw = PlaneWaveConfig(a, cfg.e, k)
            res = ansatz_residuals(pw, cfg.grid)
            worst = max(r / s if s else r for r, s in res.values())
            yield a, k, pw.mass_squared, pw.omega, worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, nargs="+", dest="a_values", default=ScanConfig().a_values)
    ap.add_argument("--e", type=float, default=1.0)
    ap.add_argument("--k", type=float, nargs="+", dest="k_values", default=ScanConfig().k_values)
    args = ap.parse_args()
    cfg = ScanConfig(args.a_values, args.e, args.k_values)
    print(f"{'a':>8} {'k':>5} {'m^2':>12} {'omega':>10} {'max rel residual':>17}")
    for a, k, m2, w, worst in scan(cfg):
        print(f"{a:>8g} {k:>5g} {m2:>12.4f} {w:>10.4f} {worst:>17.2e}")


if __name__ == "__main__":
    main()
