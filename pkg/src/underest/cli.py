"""Command-line entry point: ``underest {audit,pair,baseline,sweep,inject,gen}``.

Exit codes: 0 success, 2 validation error, 3 runtime error. Machine-readable
artifacts go to files only; stdout carries a short human summary.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from underest import configure_logging
from underest import dataset as D
from underest import harness as H
from underest import report as R
from underest.classifiers import ClassifierError, ClassifierSpec, fit, predict
from underest.metrics import MetricError, bias_report

log = logging.getLogger("underest.cli")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3
VALIDATION_ERRORS = (D.DatasetError, H.SpecError, ClassifierError, MetricError)


class UsageError(Exception):
    pass


def _classifier_arg(text: str, seed: int) -> ClassifierSpec:
    p = Path(text)
    try:
        raw = p.read_text(encoding="utf-8") if not text.lstrip().startswith("{") and p.is_file() else text
        obj = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--classifier: not a JSON object or readable JSON file ({exc})") from None
    if not isinstance(obj, dict):
        raise UsageError("--classifier: expected a JSON object")
    obj.setdefault("seed", seed)
    return ClassifierSpec.from_dict(obj)


def cmd_audit(args) -> int:
    schema = D.Schema.load(args.schema)
    if schema.sensitive_column is None:
        raise UsageError("schema is missing field 'sensitive_column'")
    ds = D.load_csv(args.data, schema)
    clf = _classifier_arg(args.classifier, args.seed)
    train, test = D.split(ds, D.SplitSpec(args.train_fraction, args.seed, not args.no_stratify))
    enc = D.fit_encoding(train)
    a, b = D.encode(train, enc), D.encode(test, enc)
    model = fit(clf, a.X, a.y, a.groups)
    test_rep = bias_report(b.y, predict(model, b.X), b.minority)
    train_rep = bias_report(a.y, predict(model, a.X), a.minority)
    out = {
        "classifier": clf.to_dict(),
        "seed": args.seed,
        "n_train": train.n,
        "n_test": test.n,
        "test": test_rep.to_dict(),
        "train": train_rep.to_dict(),
    }
    R.write_json(out, args.out)
    print(f"seed={args.seed} classifier={clf.label} n_train={train.n} n_test={test.n}")
    print(R.format_summary(
        [["test", test_rep.accuracy, test_rep.us, test_rep.us_s, test_rep.cv, test_rep.di_s],
         ["train", train_rep.accuracy, train_rep.us, train_rep.us_s, train_rep.cv, train_rep.di_s]],
        ["split", "accuracy", "us", "us_s", "cv", "di_s"]))
    return EXIT_OK


def _load_spec(args) -> H.ExperimentSpec:
    spec = H.ExperimentSpec.load(args.spec)
    if args.seed is not None:
        d = spec.to_dict()
        d["base_seed"] = args.seed
        spec = H.ExperimentSpec.from_dict(d)
    return spec


def _prepare_out(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_common(out: Path, spec, trials, aggregate_obj, table):
    R.write_json(spec.to_dict(), out / "spec.json")
    R.write_trials_csv(trials, out / "trials.csv")
    R.write_json(aggregate_obj, out / "aggregate.json")
    R.write_table_csv(table, out / "plot.csv")
    R.write_table_json(table, out / "plot.json")


def _med(agg, metric):
    return agg["test"][metric]["median"]


def cmd_pair(args) -> int:
    spec = _load_spec(args)
    if spec.pair is None:
        raise H.SpecError("pair", "missing; the pair command needs 'pair.underfit' and 'pair.fitted'")
    pairs = H.run_pair_comparison(spec, jobs=args.jobs)
    out = _prepare_out(args.out)
    trials = [t for p in pairs for t in p]
    agg = R.pair_to_json(pairs, spec.pair[0].label, spec.pair[1].label)
    _write_common(out, spec, trials, agg, R.pair_to_bars(pairs))
    print(f"seed={spec.base_seed} repeats={spec.repeats} backend={_backend()}")
    rows = [[arm, agg[arm]["classifier"], _med(agg[arm]["aggregate"], "accuracy"),
             _med(agg[arm]["aggregate"], "us"), _med(agg[arm]["aggregate"], "us_s")]
            for arm in ("underfit", "fitted")]
    print(R.format_summary(rows, ["arm", "classifier", "accuracy", "us", "us_s"]))
    return EXIT_OK


def cmd_baseline(args) -> int:
    spec = _load_spec(args)
    if not spec.classifiers:
        raise H.SpecError("classifiers", "the baseline command needs at least one classifier")
    res = H.run_baseline(spec, jobs=args.jobs)
    out = _prepare_out(args.out)
    trials = [t for group in res.trials for t in group]
    _write_common(out, spec, trials, R.baseline_to_json(res), R.baseline_to_table(res))
    print(f"seed={spec.base_seed} repeats={spec.repeats} backend={_backend()}")
    rows = [[c, _med(a, "accuracy"), _med(a, "us"), _med(a, "us_s"), _med(a, "cv"), _med(a, "di_s")]
            for c, a in zip(res.classifiers, res.aggregates)]
    print(R.format_summary(rows, ["classifier", "accuracy", "us", "us_s", "cv", "di_s"]))
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _load_spec(args)
    if spec.sweep is None:
        raise H.SpecError("sweep", "missing; the sweep command needs 'sweep.algorithm/parameter/grid'")
    res = H.run_sweep(spec, jobs=args.jobs)
    out = _prepare_out(args.out)
    trials = [t for group in res.trials for t in group]
    _write_common(out, spec, trials, R.sweep_to_json(res), R.sweep_to_plot(res))
    print(f"seed={spec.base_seed} repeats={spec.repeats} backend={_backend()} "
          f"sweep={res.algorithm}.{res.parameter}")
    rows = [[R.fmt(v), _med(a, "accuracy"), _med(a, "us"), _med(a, "us_s"),
             a["test"]["us_s"]["undefined_count"]]
            for v, a in zip(res.grid, res.aggregates)]
    print(R.format_summary(rows, [res.parameter, "accuracy", "us", "us_s", "us_s_undef"]))
    return EXIT_OK


def cmd_inject(args) -> int:
    ds = D.load_csv(args.data, D.Schema.load(args.schema))
    spec = D.InjectionSpec(args.p_pos, args.p_neg, args.seed)
    out = D.inject_sensitive(ds, spec, args.column)
    out.to_csv(args.out)
    if args.schema_out:
        out.schema.save(args.schema_out)
    p, q = D.rates_by_label(out)
    print(f"seed={args.seed} rows={out.n} column={args.column}")
    print(R.format_summary(
        [["P[minority | positive]", args.p_pos, p], ["P[minority | negative]", args.p_neg, q]],
        ["rate", "target", "realized"]))
    return EXIT_OK


def cmd_gen(args) -> int:
    ds = D.generate_synthetic(args.n, args.d, args.pos_rate, args.separation, args.seed)
    ds.to_csv(args.out)
    if args.schema_out:
        ds.schema.save(args.schema_out)
    print(f"seed={args.seed} rows={ds.n} features={args.d} "
          f"positive_rate={float(ds.labels().mean()):.4f}")
    return EXIT_OK


def _backend() -> str:
    from underest.kernels import BACKEND
    return BACKEND


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="underest", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="train one model and write its bias report")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--classifier", required=True, help="classifier spec as JSON text or a JSON file")
    p.add_argument("--train-fraction", type=float, default=2 / 3)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output JSON report path")
    p.set_defaults(func=cmd_audit)

    for name, func, help_ in (("pair", cmd_pair, "underfit vs fitted comparison"),
                              ("baseline", cmd_baseline, "multi-classifier baseline"),
                              ("sweep", cmd_sweep, "regularization sweep")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--spec", required=True, help="experiment spec JSON")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the spec's base_seed")
        p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("inject", help="add a synthetic sensitive column")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--p-pos", type=_probability, required=True, help="P[minority | positive]")
    p.add_argument("--p-neg", type=_probability, required=True, help="P[minority | negative]")
    p.add_argument("--column", default="S")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--schema-out", default=None, help="also write the updated schema here")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("gen", help="write a synthetic two-cluster dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--pos-rate", type=_probability, required=True)
    p.add_argument("--separation", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--schema-out", default=None, help="also write the dataset schema here")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (UsageError, *VALIDATION_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - one-line diagnostic for the user
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
