"""Write docs/discrepancies.md: each recorded disagreement with its confirmation.

    python3 scripts/discrepancy_doc.py [--out docs/discrepancies.md]
"""

import argparse
from pathlib import Path

from fieldcon.discrepancies import DISCREPANCIES, SIGN_NORMALIZATION, check_identity, confirm


def _fmt(x):
    return "n/a" if x is None else f"{x:.2e}"


def render() -> str:
    out = [
        "# Reference discrepancies",
        "",
        "Values published for the preset models that the engine does not reproduce, with the",
        "evidence for the derived value. Oracle errors are relative errors of the smeared",
        "lattice bracket (delta entries at N=512, Dirac brackets at N=128, three seeds).",
        "Generated by `scripts/discrepancy_doc.py`.",
        "",
        "## Sign normalization",
        "",
        "New constraints are scaled so the coefficient of the highest-index coordinate is monic.",
        "Factors relating engine constraints to the reference listing:",
        "",
    ]
    for model, signs in SIGN_NORMALIZATION.items():
        text = ", ".join(f"{k} -> {v:+d} x engine" for k, v in signs.items()) or "identical"
        out.append(f"- `{model}`: {text}")
    for d in DISCREPANCIES:
        out += ["", f"## {d.id}: {d.quantity} (`{d.model}`)", ""]
        out.append(f"- printed: {d.printed}")
        out.append(f"- derived: {d.derived}")
        out.append(f"- note: {d.note}")
        ident = check_identity(d)
        if ident is not None:
            out.append(f"- exact identity: {'holds' if ident else 'FAILS'}")
        results = confirm(d)
        if results:
            out += ["", "| bracket | engine error | printed error |", "|---|---|---|"]
            for r in results:
                p = r.probe
                pair = f"{{{p.left}, {p.right}}}" if p.kind == "delta" else f"[{p.left}, {p.right}]"
                out.append(f"| {pair} | {_fmt(r.engine_error)} | {_fmt(r.printed_error)} |")
        if not results and ident is None:
            out.append("- confirmed by the plane-wave verifier (`fieldcon verify ansatz`)")
    return "\n".join(out) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).parents[1] / "docs" / "discrepancies.md")
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(render())
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
