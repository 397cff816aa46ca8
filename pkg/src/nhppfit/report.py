"""Table and figure-data output for an evaluated partition."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Any

from .empirical import EmpiricalRate
from .partition import EvalResult


@dataclass(frozen=True)
class TestRow:
    __test__ = False

    interval: str
    k: int
    ks_p_value: float | None
    ks_h0: str
    dispersion_p_value: float | None
    dispersion_h0: str


@dataclass(frozen=True)
class StepRow:
    start_hour: float
    end_hour: float
    rate_per_hour: float


@dataclass(frozen=True)
class FineRow:
    cell_start_hour: float
    rate_per_hour: float


@dataclass(frozen=True)
class ReportBundle:
    test_table: tuple[TestRow, ...]
    step_function: tuple[StepRow, ...]
    fine_rate: tuple[FineRow, ...]
    partition: dict[str, Any] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return bool(self.partition.get("feasible", False))


def render(e: EvalResult, er: EmpiricalRate, meta: dict[str, Any] | None = None) -> ReportBundle:
    rows = tuple(
        TestRow(
            interval=iv.label,
            k=iv.k,
            ks_p_value=iv.ks.p_value,
            ks_h0=iv.ks.status.value,
            dispersion_p_value=iv.dispersion.p_value,
            dispersion_h0=iv.dispersion.status.value,
        )
        for iv in e.intervals
    )
    steps = tuple(StepRow(iv.a, iv.b, iv.rate) for iv in e.intervals)
    fine = tuple(FineRow(float(s), float(r)) for s, r in zip(er.cell_starts(), er.rates))
    metadata = dict(meta or {})
    metadata["feasible"] = e.feasible
    return ReportBundle(rows, steps, fine, e.to_json_dict(), metadata)


def to_json(bundle: ReportBundle) -> str:
    return json.dumps(asdict(bundle), indent=2, sort_keys=True, allow_nan=False) + "\n"


def from_json(text: str) -> ReportBundle:
    data = json.loads(text)
    return ReportBundle(
        test_table=tuple(TestRow(**row) for row in data["test_table"]),
        step_function=tuple(StepRow(**row) for row in data["step_function"]),
        fine_rate=tuple(FineRow(**row) for row in data["fine_rate"]),
        partition=data["partition"],
        metadata=data["metadata"],
    )


def _p(value: float | None) -> str:
    return "-" if value is None else f"{value:.3f}"


def table_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["interval", "k", "ks_p_value", "ks_h0", "dispersion_p_value", "dispersion_h0"])
    for row in bundle.test_table:
        writer.writerow([
            row.interval, row.k, _p(row.ks_p_value), row.ks_h0,
            _p(row.dispersion_p_value), row.dispersion_h0,
        ])
    return buf.getvalue()


def steps_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["start_hour", "end_hour", "rate_per_hour"])
    for row in bundle.step_function:
        writer.writerow([repr(row.start_hour), repr(row.end_hour), repr(row.rate_per_hour)])
    return buf.getvalue()


def fine_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cell_start_hour", "rate_per_hour"])
    for row in bundle.fine_rate:
        writer.writerow([repr(row.cell_start_hour), repr(row.rate_per_hour)])
    return buf.getvalue()


def to_text(bundle: ReportBundle) -> str:
    header = ("Interval", "k_i", "KS p-value", "KS H0", "Disp p-value", "Disp H0")
    body = [
        (r.interval, str(r.k), _p(r.ks_p_value), r.ks_h0, _p(r.dispersion_p_value), r.dispersion_h0)
        for r in bundle.test_table
    ]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    line = lambda row: "  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip()  # noqa: E731
    out = [line(header), "  ".join("-" * wd for wd in widths)]
    out += [line(row) for row in body]
    part = bundle.partition
    if part:
        status = "feasible" if part.get("feasible") else "INFEASIBLE"
        out.append("")
        out.append(
            f"N={len(bundle.test_table)}  E={part['E']:.4f}  S={part['S']:.4f}  f={part['f']:.4f}  ({status})"
        )
    meta = {k: v for k, v in bundle.metadata.items() if k != "feasible"}
    if meta:
        out.append("  ".join(f"{k}={v}" for k, v in sorted(meta.items())))
    return "\n".join(out) + "\n"
