"""Plot-data tables and trial logs as CSV / JSON.

Floats are written with ``repr`` (shortest round-tripping form), so re-parsed
values are bit-identical to the in-memory ones. Undefined values are the
token ``NA`` in CSV and ``null`` in JSON.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from underest.harness import BaselineResult, SweepResult, TrialResult, aggregate
from underest.metrics import BiasReport

NA = "NA"


@dataclass(frozen=True)
class PlotTable:
    x_name: str
    x_values: tuple
    series: tuple[tuple[str, tuple], ...]

    def __post_init__(self):
        object.__setattr__(self, "x_values", tuple(self.x_values))
        object.__setattr__(self, "series", tuple((n, tuple(v)) for n, v in self.series))
        for name, values in self.series:
            if len(values) != len(self.x_values):
                raise ValueError(f"series {name!r} has {len(values)} values, expected {len(self.x_values)}")

    def column(self, name: str) -> tuple:
        return dict(self.series)[name]

    def to_dict(self) -> dict:
        return {"x_name": self.x_name, "x_values": list(self.x_values),
                "series": {n: list(v) for n, v in self.series}}


def fmt(value: Any) -> str:
    if value is None:
        return NA
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def parse(cell: str) -> Any:
    """Inverse of :func:`fmt` for numeric / NA / boolean cells; other text passes through."""
    if cell == NA:
        return None
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def _median_of(aggregate: dict, metric: str):
    return aggregate["test"][metric]["median"]


def sweep_to_plot(sr: SweepResult) -> PlotTable:
    """Grid values against median test accuracy, US and US_S."""
    return PlotTable(
        x_name=sr.parameter,
        x_values=sr.grid,
        series=[(m, [_median_of(a, m) for a in sr.aggregates]) for m in ("accuracy", "us", "us_s")],
    )


def baseline_to_table(br: BaselineResult) -> PlotTable:
    return PlotTable(
        x_name="classifier",
        x_values=br.classifiers,
        series=[(m, [_median_of(a, m) for a in br.aggregates]) for m in ("accuracy", "us", "us_s")],
    )


def _rates(report: BiasReport) -> tuple[tuple[float, float], tuple[float, float]]:
    """((actual, predicted) overall, (actual, predicted) minority) positive rates."""
    o, m = report.overall_cm, report.minority_cm
    overall = (o.actual_pos / o.total, o.predicted_pos / o.total)
    minority = ((m.actual_pos / m.total, m.predicted_pos / m.total) if m.total else (None, None))
    return overall, minority


def _median(values):
    vals = [v for v in values if v is not None]
    return float(np.median(vals)) if vals else None


def pair_to_bars(pairs: Sequence[tuple[TrialResult, TrialResult]]) -> PlotTable:
    """Actual vs predicted positive rates, overall and for the minority.

    Rows are the groups ``overall`` and ``minority``; series are ``actual``,
    ``fitted`` and ``underfit``. Each value is the median over repeats of
    the test-set rate.
    """
    if not pairs:
        raise ValueError("no paired results")
    actual = {"overall": [], "minority": []}
    pred = {"fitted": {"overall": [], "minority": []}, "underfit": {"overall": [], "minority": []}}
    for underfit, fitted in pairs:
        for arm, trial in (("underfit", underfit), ("fitted", fitted)):
            (a_o, p_o), (a_m, p_m) = _rates(trial.test)
            pred[arm]["overall"].append(p_o)
            pred[arm]["minority"].append(p_m)
            if arm == "fitted":
                actual["overall"].append(a_o)
                actual["minority"].append(a_m)
    groups = ("overall", "minority")
    return PlotTable(
        x_name="group",
        x_values=groups,
        series=[
            ("actual", [_median(actual[g]) for g in groups]),
            ("fitted", [_median(pred["fitted"][g]) for g in groups]),
            ("underfit", [_median(pred["underfit"][g]) for g in groups]),
        ],
    )


def write_table_csv(table: PlotTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([table.x_name] + [n for n, _ in table.series])
        for i, x in enumerate(table.x_values):
            w.writerow([fmt(x)] + [fmt(v[i]) for _, v in table.series])


def read_table_csv(path) -> PlotTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return PlotTable(
        x_name=header[0],
        x_values=[parse(r[0]) for r in body],
        series=[(name, [parse(r[j]) for r in body]) for j, name in enumerate(header[1:], start=1)],
    )


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n",
                          encoding="utf-8")


def write_table_json(table: PlotTable, path) -> None:
    write_json(table.to_dict(), path)


CM_FIELDS = ("tp", "fp", "fn", "tn")


def trial_columns() -> list[str]:
    cols = ["arm", "classifier", "algorithm", "parameter", "value", "repeat", "grid_index", "seed"]
    for part in ("test", "train"):
        cols += [f"{part}_{m}" for m in (*BiasReport.METRICS, "di_pass_80")]
        for cm in ("overall", "minority", "majority"):
            cols += [f"{part}_{cm}_{f}" for f in CM_FIELDS]
    return cols


def trial_row(t: TrialResult) -> list[str]:
    row = [t.arm or NA, t.classifier, t.algorithm, fmt(t.parameter), fmt(t.value),
           str(t.repeat), str(t.grid_index), str(t.seed)]
    for rep in (t.test, t.train):
        row += [fmt(getattr(rep, m)) for m in (*BiasReport.METRICS, "di_pass_80")]
        for cm in (rep.overall_cm, rep.minority_cm, rep.majority_cm):
            row += [str(getattr(cm, f)) for f in CM_FIELDS]
    return row


def write_trials_csv(trials: Sequence[TrialResult], path) -> None:
    """One row per trial: identity columns then every test and train metric.

    Wall time is deliberately omitted so repeated runs are byte-identical.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trial_columns())
        for t in trials:
            w.writerow(trial_row(t))


def read_trials_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def sweep_to_json(sr: SweepResult) -> dict:
    return {
        "algorithm": sr.algorithm,
        "parameter": sr.parameter,
        "grid": list(sr.grid),
        "points": [{"value": v, "aggregate": a} for v, a in zip(sr.grid, sr.aggregates)],
    }


def baseline_to_json(br: BaselineResult) -> dict:
    return {"classifiers": [{"classifier": c, "aggregate": a}
                            for c, a in zip(br.classifiers, br.aggregates)]}


def pair_to_json(pairs, underfit_label: str, fitted_label: str) -> dict:
    return {
        "underfit": {"classifier": underfit_label, "aggregate": aggregate([p[0] for p in pairs])},
        "fitted": {"classifier": fitted_label, "aggregate": aggregate([p[1] for p in pairs])},
    }


def format_summary(rows: Sequence[Sequence[Any]], header: Sequence[str]) -> str:
    """Fixed-width text table for terminal output."""
    def cell(v):
        if v is None:
            return NA
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    body = [[cell(v) for v in r] for r in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in body)) if body else len(str(h))
              for i, h in enumerate(header)]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in body]
    return "\n".join(lines)
