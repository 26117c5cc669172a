import json
import math

import numpy as np
import pytest

from test_harness import make_spec
from underest import harness as H
from underest import report as R
from underest.classifiers import ClassifierSpec


@pytest.fixture(scope="module")
def sweep():
    return H.run_sweep(make_spec(), "decision_tree", "max_leaf_nodes", [2, 4, None])


def test_sweep_plot_shape(sweep):
    t = R.sweep_to_plot(sweep)
    assert t.x_name == "max_leaf_nodes" and t.x_values == (2, 4, None)
    assert [n for n, _ in t.series] == ["accuracy", "us", "us_s"]
    assert t.column("us") == tuple(a["test"]["us"]["median"] for a in sweep.aggregates)


def test_table_csv_roundtrip(tmp_path, sweep):
    t = R.sweep_to_plot(sweep)
    p = tmp_path / "plot.csv"
    R.write_table_csv(t, p)
    back = R.read_table_csv(p)
    assert back.x_values == t.x_values
    for (n1, v1), (n2, v2) in zip(t.series, back.series):
        assert n1 == n2
        assert all(abs(a - b) <= 1e-12 for a, b in zip(v1, v2))


def test_na_cells(tmp_path):
    t = R.PlotTable("alpha", [0.1, 1000.0], [("us_s", [0.8, None])])
    p = tmp_path / "t.csv"
    R.write_table_csv(t, p)
    assert p.read_text().splitlines() == ["alpha,us_s", "0.1,0.8", "1000.0,NA"]
    assert R.read_table_csv(p).column("us_s") == (0.8, None)
    with pytest.raises(ValueError):
        R.PlotTable("x", [1, 2], [("y", [1])])


def test_fmt_parse_inverse():
    for v in (None, True, False, 3, 0.1, 1 / 3, 1e-300, -2.5):
        assert R.parse(R.fmt(v)) == v
    assert R.parse("decision_tree") == "decision_tree"


def test_bars_recount_and_perfect_predictor():
    spec = make_spec()
    pairs = H.run_pair_comparison(spec, ClassifierSpec("decision_tree", {"max_leaf_nodes": 2}),
                                  ClassifierSpec("decision_tree"))
    t = R.pair_to_bars(pairs)
    assert t.x_values == ("overall", "minority")
    prep = H.prepare(spec)
    actual = [p.test.y.mean() for p in prep]
    actual_min = [p.test.y[p.test.minority == 1].mean() for p in prep]
    assert t.column("actual")[0] == pytest.approx(np.median(actual), abs=1e-12)
    assert t.column("actual")[1] == pytest.approx(np.median(actual_min), abs=1e-12)
    fitted_pred = [f.test.overall_cm.predicted_pos / f.test.overall_cm.total for _, f in pairs]
    assert t.column("fitted")[0] == pytest.approx(np.median(fitted_pred), abs=1e-12)

    # a perfect predictor's bars coincide with the actual rates
    perfect = [(u, H.TrialResult(f.classifier, f.algorithm, None, None, f.repeat, 0, 0,
                                 _perfect(f.test), f.train)) for u, f in pairs]
    tp = R.pair_to_bars(perfect)
    assert tp.column("fitted") == tp.column("actual")


def _perfect(rep):
    from underest.metrics import ConfusionMatrix
    def fix(cm):
        return ConfusionMatrix(cm.actual_pos, 0, 0, cm.actual_neg)
    return type(rep)(**{**rep.__dict__, "overall_cm": fix(rep.overall_cm),
                        "minority_cm": fix(rep.minority_cm), "majority_cm": fix(rep.majority_cm)})


def test_trials_csv_roundtrip(tmp_path, sweep):
    trials = [t for g in sweep.trials for t in g]
    p = tmp_path / "trials.csv"
    R.write_trials_csv(trials, p)
    rows = R.read_trials_csv(p)
    assert len(rows) == len(trials)
    assert list(rows[0]) == R.trial_columns()
    for row, t in zip(rows, trials):
        assert row["test_us"] == t.test.us and row["train_accuracy"] == t.train.accuracy
        assert row["test_overall_tp"] == t.test.overall_cm.tp
        assert row["value"] == t.value


def test_json_views_are_strict_json(tmp_path, sweep):
    p = tmp_path / "a.json"
    R.write_json(R.sweep_to_json(sweep), p)
    d = json.loads(p.read_text())
    assert [pt["value"] for pt in d["points"]] == [2, 4, None]
    with pytest.raises(ValueError):
        R.write_json({"x": math.nan}, p)


def test_format_summary():
    text = R.format_summary([["a", 0.5, None]], ["name", "acc", "us"])
    lines = text.splitlines()
    assert lines[0].split() == ["name", "acc", "us"]
    assert lines[2].split() == ["a", "0.5000", "NA"]
