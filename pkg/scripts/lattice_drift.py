"""Energy and constraint drift of the RK4 lattice evolution as dt is halved.

    python3 scripts/lattice_drift.py --preset jr-a1 --n 256 --dt 4e-3 --halvings 3
    python3 scripts/lattice_drift.py --preset models/free_scalar.lag
"""

import argparse
import json
from dataclasses import asdict, dataclass

from fieldcon.cli import load_model
from fieldcon.dirac import analyze_model
from fieldcon.verifier import run_lattice


@dataclass
class DriftConfig:
    preset: str = "jr-a1"
    n: int = 256
    dt: float = 4e-3
    halvings: int = 3
    t_end: float = 10.0
    seed: int = 0


def drift_table(cfg: DriftConfig) -> list[dict]:
    m, gauge, name = load_model(cfg.preset)
    cs = analyze_model(m, gauge)
    rows, prev = [], None
    dt = cfg.dt
    for _ in range(cfg.halvings + 1):
        _, rep = run_lattice(cs, n=cfg.n, dt=dt, t_end=cfg.t_end, seed=cfg.seed)
        rows.append(
            {
                "model": name,
                "dt": dt,
                "steps": rep.steps,
                "energy_drift": rep.rel_energy_drift,
                "constraint_drift": rep.max_constraint_drift,
                "current_divergence": rep.current_divergence,
                "ratio": None if prev is None else prev / rep.rel_energy_drift,
            }
        )
        prev = rep.rel_energy_drift
        dt /= 2
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, v in asdict(DriftConfig()).items():
        ap.add_argument(f"--{f.replace('_', '-')}", type=type(v), default=v)
    ap.add_argument("--json", action="store_true")
    args = vars(ap.parse_args())
    as_json = args.pop("json")
    rows = drift_table(DriftConfig(**args))
    if as_json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'dt':>10} {'steps':>7} {'energy drift':>13} {'ratio':>7} {'constraint drift':>17} {'div J':>9}")
    for r in rows:
        ratio = "" if r["ratio"] is None else f"{r['ratio']:.1f}"
        div = "" if r["current_divergence"] is None else f"{r['current_divergence']:.1e}"
        print(f"{r['dt']:>10.2e} {r['steps']:>7} {r['energy_drift']:>13.2e} {ratio:>7} {r['constraint_drift']:>17.2e} {div:>9}")


if __name__ == "__main__":
    main()
