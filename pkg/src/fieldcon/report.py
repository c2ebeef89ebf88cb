"""Analysis reports: one pipeline run rendered as deterministic text or JSON."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping

from .dirac import (
    ConstraintSet,
    GaugeIncomplete,
    add_gauge_fixing,
    classify,
    commutator_report,
    consistency_closure,
    format_kernel_vector,
)
from .discrepancies import SIGN_NORMALIZATION, discrepancies_for
from .frontend import GaugeSpec, ModelIR
from .legendre import compute_momenta, momenta_json
from .symkernel import OpMatrix, OpRat, format_poly, kernel_text, mat_det, matrix_to_json

SCHEMA = 1


def _matrix_text(m: OpMatrix) -> list[list[str]]:
    return [[kernel_text(m[i, j]) for j in range(m.shape[1])] for i in range(m.shape[0])]


def _matrix_section(m: OpMatrix) -> dict:
    return {"json": matrix_to_json(m), "text": _matrix_text(m)}


def _constraint_classes(cs: ConstraintSet) -> dict[str, str]:
    out = {}
    for i, label in enumerate(cs.labels):
        touched = [v for v in cs.first_class if v[i]]
        if not touched:
            out[label] = "second-class"
        elif any(sum(1 for p in v if p) == 1 for v in touched):
            out[label] = "first-class"
        else:
            out[label] = "first-class combination"
    return out


@dataclass
class AnalysisReport:
    """Plain-data record of one analysis; every field is JSON-native."""

    model: dict
    momenta: list
    hamiltonian: dict
    constraints: list
    consistency: list
    multipliers: list
    classification: dict
    delta: dict | None = None
    delta_inverse: dict | None = None
    commutators: list | None = None
    discrepancies: list = field(default_factory=list)
    schema: int = SCHEMA

    def to_json(self) -> dict:
        d = asdict(self)
        return {"schema": d.pop("schema"), **d}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, obj: Mapping) -> AnalysisReport:
        if obj.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {obj.get('schema')!r}")
        return cls(**{k: v for k, v in obj.items()})

    def text(self) -> str:
        m = self.model
        out = [f"model: {m['name']}"]
        if m["bindings"]:
            out.append("bindings: " + ", ".join(f"{k}={v}" for k, v in m["bindings"].items()))
        if m["params"]:
            out.append("symbolic parameters: " + " ".join(m["params"]))
        out.append("fields: " + " ".join(m["fields"]))

        out += ["", "momenta:"]
        out += [f"  {p['momentum']} = {p['expression']}" for p in self.momenta]

        out += ["", "hamiltonian:", f"  H = {self.hamiltonian['density']}"]

        out += ["", "constraints:"]
        for c in self.constraints:
            origin = c["provenance"] if not c["parent"] else f"{c['provenance']} from {c['parent']}"
            out.append(f"  {c['label']} = {c['density']}  [{origin}; {c['class']}]")
        if not self.constraints:
            out.append("  none")

        out += ["", "consistency:"]
        out += [f"  d/dt {s['constraint']}: {s['outcome']}" for s in self.consistency] or ["  nothing to check"]

        out += ["", "multipliers:"]
        out += [f"  {d['text']}" for d in self.multipliers] or ["  none determined"]

        cl = self.classification
        out += ["", "classification:"]
        out.append(f"  delta determinant: {cl['det']}")
        out.append(f"  second-class rank: {cl['second_class_rank']} of {len(self.constraints)}")
        if cl["first_class"]:
            out.append("  first-class content:")
            out += [f"    {v}" for v in cl["first_class"]]
        elif self.constraints:
            out.append("  all constraints second class")

        if self.delta is not None:
            out += ["", "delta:"] + _grid(self.delta)
        if self.delta_inverse is not None:
            out += ["", "delta inverse:"] + _grid(self.delta_inverse)
            out.append(f"  multiply-back identity: {'holds' if self.delta_inverse['identity'] else 'FAILS'}")

        if self.commutators is not None:
            out += ["", "commutators:"]
            out += [f"  {e['text']}" for e in self.commutators] or ["  none"]
        else:
            out += ["", "commutators: not available (first-class constraints remain; supply gauge conditions)"]

        if self.discrepancies:
            out += ["", "reference discrepancies: " + ", ".join(self.discrepancies)]
        return "\n".join(out) + "\n"


def _grid(section: dict) -> list[str]:
    labels = section["json"]["row_labels"]
    rows = section["text"]
    width = max(len(x) for r in rows for x in r)
    out = []
    for lab, r in zip(labels, rows):
        out.append(f"  {lab:>3} | " + "  ".join(x.ljust(width) for x in r).rstrip())
    return out


def analyze(
    m: ModelIR,
    gauge: GaugeSpec | None = None,
    bindings: Mapping[str, Fraction] | None = None,
    name: str | None = None,
) -> tuple[AnalysisReport, ConstraintSet]:
    """Run the full pipeline.  Raises ``GaugeIncomplete`` or ``SingularMatrix`` on obstruction."""
    bindings = dict(bindings or {})
    if bindings:
        m = m.specialize(bindings)
    name = name or m.name or "model"
    cs = classify(consistency_closure(m))
    if gauge is not None and gauge.conditions:
        cs = add_gauge_fixing(cs, gauge)

    classes = _constraint_classes(cs)
    constraints = []
    for c in cs.constraints:
        entry = c.to_json()
        entry["class"] = classes[c.label]
        constraints.append(entry)

    multipliers = []
    for d in cs.determinations:
        entry = d.to_json()
        entry["text"] = d.text()
        multipliers.append(entry)

    det = mat_det(cs.delta) if len(cs) else None
    classification = {
        "det": "1" if det is None else _operator_text(det),
        "second_class_rank": cs.second_class_rank,
        "fully_second_class": cs.fully_second_class,
        "first_class": [format_kernel_vector(v, cs.labels) for v in cs.first_class],
        "free_multipliers": list(cs.free_multipliers()),
    }

    delta = inverse = commutators = None
    if len(cs):
        delta = _matrix_section(cs.delta)
    if cs.fully_second_class:
        if len(cs):
            inv = cs.delta_inverse
            inverse = _matrix_section(inv)
            ident = OpMatrix.identity(cs.labels, cs.space.field)
            inverse["identity"] = cs.delta.matmul(inv).equals(ident) and inv.matmul(cs.delta).equals(ident)
        commutators = commutator_report(cs).to_json()

    report = AnalysisReport(
        model={
            "name": name,
            "params": list(m.params),
            "bindings": {k: str(Fraction(v)) for k, v in sorted(bindings.items())},
            "fields": list(m.fields),
            "sign_normalization": dict(SIGN_NORMALIZATION.get(name, {})) if not bindings else {},
        },
        momenta=momenta_json(compute_momenta(m)),
        hamiltonian=cs.hamiltonian.to_json(),
        constraints=constraints,
        consistency=[s.to_json() for s in cs.steps],
        multipliers=multipliers,
        classification=classification,
        delta=delta,
        delta_inverse=inverse,
        commutators=commutators,
        discrepancies=[d.id for d in discrepancies_for(name)] if not bindings else [],
    )
    return report, cs


def _operator_text(r: OpRat) -> str:
    r = OpRat.of(r)
    if r.is_local():
        return format_poly(r.num)
    return f"({format_poly(r.num)}) / ({format_poly(r.den)})"


__all__ = ["AnalysisReport", "GaugeIncomplete", "SCHEMA", "analyze"]
