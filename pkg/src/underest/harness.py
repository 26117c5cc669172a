"""Seeded experiment runner: paired under/fitted comparison, multi-classifier
baseline and single-parameter regularization sweeps.

Within one repeat every classifier and grid point sees the same injected
sensitive column and the same train/test split (paired design). Trials are
independent once data are prepared and may run on a thread pool; results
are keyed by (repeat, grid index) so ``jobs`` never changes the output.
"""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from underest import dataset as ds_mod
from underest.classifiers import ClassifierError, ClassifierSpec, fit, predict
from underest.dataset import EncodedData, InjectionSpec, Schema, SplitSpec
from underest.metrics import BiasReport, bias_report

log = logging.getLogger(__name__)

METRICS = BiasReport.METRICS


class SpecError(ValueError):
    """Invalid experiment specification; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def derive_seed(*parts: int) -> int:
    """Deterministic 32-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


@dataclass(frozen=True)
class DataSource:
    """Either a CSV file plus schema, or synthetic-generator parameters."""

    data: str | None = None
    schema: str | None = None
    synthetic: Mapping[str, Any] | None = None

    def load(self) -> ds_mod.Dataset:
        if self.synthetic is not None:
            return ds_mod.generate_synthetic(**self.synthetic)
        return ds_mod.load_csv(self.data, Schema.load(self.schema))

    def to_dict(self) -> dict:
        if self.synthetic is not None:
            return {"synthetic": dict(self.synthetic)}
        return {"data": self.data, "schema": self.schema}


@dataclass(frozen=True)
class SweepSpec:
    algorithm: str
    parameter: str
    grid: tuple


@dataclass(frozen=True)
class ExperimentSpec:
    source: DataSource
    split: SplitSpec = SplitSpec()
    classifiers: tuple[ClassifierSpec, ...] = ()
    injection: InjectionSpec | None = None
    injection_column: str = "S"
    repeats: int = 10
    base_seed: int = 0
    sweep: SweepSpec | None = None
    pair: tuple[ClassifierSpec, ClassifierSpec] | None = None

    def __post_init__(self):
        if self.repeats < 1:
            raise SpecError("repeats", "must be >= 1")
        if self.base_seed < 0:
            raise SpecError("base_seed", "must be >= 0")
        if not self.classifiers and self.pair is None and self.sweep is None:
            raise SpecError("classifiers", "at least one classifier is required")

    def to_dict(self) -> dict:
        out = {
            "dataset": self.source.to_dict(),
            "split": {"train_fraction": self.split.train_fraction, "seed": self.split.seed,
                      "stratified": self.split.stratified},
            "classifiers": [c.to_dict() for c in self.classifiers],
            "repeats": self.repeats,
            "base_seed": self.base_seed,
        }
        if self.injection is not None:
            out["injection"] = {
                "p_minority_given_pos": self.injection.p_minority_given_pos,
                "p_minority_given_neg": self.injection.p_minority_given_neg,
                "seed": self.injection.seed,
                "column": self.injection_column,
            }
        if self.sweep is not None:
            out["sweep"] = {"algorithm": self.sweep.algorithm, "parameter": self.sweep.parameter,
                            "grid": list(self.sweep.grid)}
        if self.pair is not None:
            out["pair"] = {"underfit": self.pair[0].to_dict(), "fitted": self.pair[1].to_dict()}
        return out

    @classmethod
    def from_dict(cls, d: Mapping, base_dir: str | Path | None = None) -> "ExperimentSpec":
        base = Path(base_dir) if base_dir is not None else None

        def resolve(p):
            if p is None:
                return None
            p = Path(p)
            return str(p if p.is_absolute() or base is None else base / p)

        src = d.get("dataset")
        if not isinstance(src, Mapping):
            raise SpecError("dataset", "missing or not an object")
        if "synthetic" in src:
            syn = dict(src["synthetic"])
            unknown = set(syn) - {"n", "n_features", "class_positive_rate", "class_separation", "seed"}
            if unknown:
                raise SpecError("dataset.synthetic", f"unknown keys {sorted(unknown)}")
            source = DataSource(synthetic=syn)
        elif "data" in src and "schema" in src:
            source = DataSource(data=resolve(src["data"]), schema=resolve(src["schema"]))
        else:
            raise SpecError("dataset", "needs either 'synthetic' or both 'data' and 'schema'")

        try:
            sp = d.get("split", {})
            split = SplitSpec(float(sp.get("train_fraction", 2 / 3)), int(sp.get("seed", 0)),
                              bool(sp.get("stratified", True)))
        except ValueError as exc:
            raise SpecError("split", str(exc)) from None

        injection, column = None, "S"
        if d.get("injection") is not None:
            inj = d["injection"]
            try:
                injection = InjectionSpec(float(inj["p_minority_given_pos"]),
                                          float(inj["p_minority_given_neg"]), int(inj.get("seed", 0)))
            except KeyError as exc:
                raise SpecError("injection", f"missing {exc.args[0]!r}") from None
            except ValueError as exc:
                raise SpecError("injection", str(exc)) from None
            column = inj.get("column", "S")

        def clf(obj, where):
            try:
                return ClassifierSpec.from_dict(obj)
            except (ClassifierError, TypeError, AttributeError) as exc:
                raise SpecError(where, str(exc)) from None

        classifiers = tuple(clf(c, f"classifiers[{i}]") for i, c in enumerate(d.get("classifiers", [])))

        sweep = None
        if d.get("sweep") is not None:
            sw = d["sweep"]
            for key in ("algorithm", "parameter", "grid"):
                if key not in sw:
                    raise SpecError(f"sweep.{key}", "missing")
            grid = tuple(sw["grid"])
            if not grid:
                raise SpecError("sweep.grid", "must not be empty")
            sweep = SweepSpec(sw["algorithm"], sw["parameter"], grid)
            base_clf = _sweep_base(classifiers, sweep.algorithm, "sweep.algorithm")
            for i, v in enumerate(grid):
                try:
                    base_clf.with_params(**{sweep.parameter: v})
                except ClassifierError as exc:
                    raise SpecError(f"sweep.grid[{i}]", str(exc)) from None

        pair = None
        if d.get("pair") is not None:
            pr = d["pair"]
            if "underfit" not in pr or "fitted" not in pr:
                raise SpecError("pair", "needs 'underfit' and 'fitted' classifier specs")
            pair = (clf(pr["underfit"], "pair.underfit"), clf(pr["fitted"], "pair.fitted"))
            if pair[0].algorithm != pair[1].algorithm:
                raise SpecError("pair", "both arms must use the same algorithm")

        repeats = d.get("repeats", 10)
        if not isinstance(repeats, int) or repeats < 1:
            raise SpecError("repeats", "must be an integer >= 1")
        base_seed = d.get("base_seed", 0)
        if not isinstance(base_seed, int) or base_seed < 0:
            raise SpecError("base_seed", "must be an integer >= 0")
        return cls(source=source, split=split, classifiers=classifiers, injection=injection,
                   injection_column=column, repeats=repeats, base_seed=base_seed,
                   sweep=sweep, pair=pair)

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        path = Path(path)
        try:
            d = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise SpecError("spec", f"file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise SpecError("spec", f"invalid JSON: {exc}") from None
        return cls.from_dict(d, base_dir=path.parent)


def _sweep_base(classifiers, algorithm, where="algorithm") -> ClassifierSpec:
    for c in classifiers:
        if c.algorithm == algorithm:
            return c
    try:
        return ClassifierSpec(algorithm)
    except ClassifierError as exc:
        raise SpecError(where, str(exc)) from None


@dataclass(frozen=True)
class TrialResult:
    classifier: str
    algorithm: str
    parameter: str | None
    value: Any
    repeat: int
    grid_index: int
    seed: int
    test: BiasReport
    train: BiasReport
    wall_time: float = field(default=0.0, compare=False)
    arm: str = ""


@dataclass(frozen=True)
class Prepared:
    repeat: int
    train: EncodedData
    test: EncodedData


def prepare(spec: ExperimentSpec, base: ds_mod.Dataset | None = None) -> list[Prepared]:
    """Inject, split and encode the dataset once per repeat."""
    if base is None:
        base = spec.source.load()
    out = []
    for r in range(spec.repeats):
        data = base
        if spec.injection is not None:
            inj = InjectionSpec(spec.injection.p_minority_given_pos,
                                spec.injection.p_minority_given_neg,
                                derive_seed(spec.injection.seed, spec.base_seed, r))
            data = ds_mod.inject_sensitive(data, inj, spec.injection_column)
        if data.schema.sensitive_column is None:
            raise SpecError("injection", "dataset has no sensitive column and no injection is configured")
        sp = SplitSpec(spec.split.train_fraction, derive_seed(spec.split.seed, spec.base_seed, r),
                       spec.split.stratified)
        train, test = ds_mod.split(data, sp)
        enc = ds_mod.fit_encoding(train)
        out.append(Prepared(r, ds_mod.encode(train, enc), ds_mod.encode(test, enc)))
    return out


def run_trial(prep: Prepared, clf: ClassifierSpec, base_seed: int, grid_index: int = 0,
              parameter: str | None = None, value: Any = None, arm: str = "") -> TrialResult:
    seed = derive_seed(clf.seed, base_seed, prep.repeat, grid_index)
    t0 = time.perf_counter()
    model = fit(clf.with_seed(seed), prep.train.X, prep.train.y, prep.train.groups)
    test = bias_report(prep.test.y, predict(model, prep.test.X), prep.test.minority)
    train = bias_report(prep.train.y, predict(model, prep.train.X), prep.train.minority)
    elapsed = time.perf_counter() - t0
    log.debug("trial %s repeat=%d grid=%d acc=%.4f us=%s us_s=%s", clf.label, prep.repeat,
              grid_index, test.accuracy, test.us, test.us_s)
    return TrialResult(clf.label, clf.algorithm, parameter, value, prep.repeat, grid_index,
                       seed, test, train, elapsed, arm)


def _run_all(tasks, jobs: int) -> list[TrialResult]:
    if jobs <= 1 or len(tasks) <= 1:
        return [run_trial(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda t: run_trial(*t), tasks))


def run_pair_comparison(spec: ExperimentSpec, underfit: ClassifierSpec | None = None,
                        fitted: ClassifierSpec | None = None, jobs: int = 1,
                        prepared: Sequence[Prepared] | None = None
                        ) -> list[tuple[TrialResult, TrialResult]]:
    """Train an underfit and a fitted model on identical splits per repeat.

    Both arms share the derived trial seed so identical specs give identical
    reports.
    """
    if underfit is None or fitted is None:
        if spec.pair is None:
            raise SpecError("pair", "no underfit/fitted classifiers given")
        underfit, fitted = spec.pair
    if underfit.algorithm != fitted.algorithm:
        raise SpecError("pair", "both arms must use the same algorithm")
    preps = list(prepared) if prepared is not None else prepare(spec)
    tasks = []
    for p in preps:
        tasks.append((p, underfit, spec.base_seed, 0, None, None, "underfit"))
        tasks.append((p, fitted, spec.base_seed, 0, None, None, "fitted"))
    res = _run_all(tasks, jobs)
    return [(res[2 * i], res[2 * i + 1]) for i in range(len(preps))]


def _finite(v):
    return v is not None and not (isinstance(v, float) and math.isnan(v))


def aggregate(trials: Sequence[TrialResult]) -> dict:
    """Median and interquartile range of every metric over ``trials``.

    Undefined values are dropped; their number is reported as
    ``undefined_count``. A metric with no defined values has null statistics.
    """
    if not trials:
        raise ValueError("aggregate needs at least one trial")
    out = {}
    for part in ("test", "train"):
        block = {}
        for name in METRICS:
            vals = [getattr(getattr(t, part), name) for t in trials]
            defined = np.array([v for v in vals if _finite(v)], dtype=np.float64)
            if defined.size:
                q25, med, q75 = np.percentile(defined, [25, 50, 75])
                stats = {"median": float(med), "q25": float(q25), "q75": float(q75),
                         "iqr": float(q75 - q25), "min": float(defined.min()),
                         "max": float(defined.max())}
            else:
                stats = {k: None for k in ("median", "q25", "q75", "iqr", "min", "max")}
            stats["n_defined"] = int(defined.size)
            stats["undefined_count"] = len(vals) - int(defined.size)
            block[name] = stats
        out[part] = block
    return out


@dataclass(frozen=True)
class BaselineResult:
    classifiers: tuple[str, ...]
    aggregates: tuple[dict, ...]
    trials: tuple[tuple[TrialResult, ...], ...]


def run_baseline(spec: ExperimentSpec, jobs: int = 1,
                 prepared: Sequence[Prepared] | None = None) -> BaselineResult:
    """Evaluate every classifier in ``spec`` on the same prepared repeats."""
    if not spec.classifiers:
        raise SpecError("classifiers", "at least one classifier is required")
    preps = list(prepared) if prepared is not None else prepare(spec)
    tasks = [(p, c, spec.base_seed, ci) for ci, c in enumerate(spec.classifiers) for p in preps]
    res = _run_all(tasks, jobs)
    k = len(preps)
    per = [tuple(res[ci * k:(ci + 1) * k]) for ci in range(len(spec.classifiers))]
    return BaselineResult(tuple(c.label for c in spec.classifiers),
                          tuple(aggregate(t) for t in per), tuple(per))


@dataclass(frozen=True)
class SweepResult:
    algorithm: str
    parameter: str
    grid: tuple
    aggregates: tuple[dict, ...]
    trials: tuple[tuple[TrialResult, ...], ...]


def run_sweep(spec: ExperimentSpec, algorithm: str | None = None, parameter: str | None = None,
              grid: Sequence | None = None, jobs: int = 1,
              prepared: Sequence[Prepared] | None = None) -> SweepResult:
    """Full grid x repeats factorial over one hyperparameter.

    The base classifier is the first entry of ``spec.classifiers`` with the
    swept algorithm, else that algorithm's defaults.
    """
    if algorithm is None:
        if spec.sweep is None:
            raise SpecError("sweep", "no sweep configured")
        algorithm, parameter, grid = spec.sweep.algorithm, spec.sweep.parameter, spec.sweep.grid
    grid = tuple(grid or ())
    if not grid:
        raise SpecError("sweep.grid", "must not be empty")
    base = _sweep_base(spec.classifiers, algorithm)
    try:
        points = [base.with_params(**{parameter: v}) for v in grid]
    except ClassifierError as exc:
        raise SpecError("sweep.parameter", str(exc)) from None
    preps = list(prepared) if prepared is not None else prepare(spec)
    tasks = [(p, c, spec.base_seed, gi, parameter, grid[gi])
             for gi, c in enumerate(points) for p in preps]
    res = _run_all(tasks, jobs)
    k = len(preps)
    per = [tuple(res[gi * k:(gi + 1) * k]) for gi in range(len(grid))]
    return SweepResult(algorithm, parameter, grid, tuple(aggregate(t) for t in per), tuple(per))
