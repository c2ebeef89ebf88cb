"""Smeared-bracket oracle error for every bracket-matrix entry, across grid sizes.

    python3 scripts/oracle_sweep.py --sizes 64 128 256 512 --seeds 0 1 2
"""

import argparse
import json
from dataclasses import asdict, dataclass, field

from fieldcon.dirac import analyze_model
from fieldcon.presets import PRESET_NAMES, preset_model
from fieldcon.verifier import DEFAULT_VALUES, delta_oracle_records


@dataclass
class SweepConfig:
    presets: list = field(default_factory=lambda: list(PRESET_NAMES))
    sizes: list = field(default_factory=lambda: [64, 128, 256, 512])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    tol: float = 1e-6
    values: dict = field(default_factory=lambda: dict(DEFAULT_VALUES))


def sweep(cfg: SweepConfig) -> list[dict]:
    rows = []
    for name in cfg.presets:
        cs = analyze_model(*preset_model(name))
        for n in cfg.sizes:
            records = delta_oracle_records(cs, name, n=n, seeds=cfg.seeds, rel_tol=cfg.tol, values=cfg.values)
            rows.append(
                {
                    "preset": name,
                    "n": n,
                    "entries": len(records),
                    "worst": max(r.value for r in records),
                    "pass": all(r.passed for r in records),
                }
            )
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--presets", nargs="+", default=list(PRESET_NAMES))
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    cfg = SweepConfig(args.presets, args.sizes, args.seeds)
    rows = sweep(cfg)
    if args.json:
        print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))
        return
    print(f"{'preset':<18} {'N':>5} {'entries':>8} {'worst rel err':>14}  verdict")
    for r in rows:
        print(f"{r['preset']:<18} {r['n']:>5} {r['entries']:>8} {r['worst']:>14.2e}  {'pass' if r['pass'] else 'FAIL'}")


if __name__ == "__main__":
    main()
