"""Naive per-row recounts used as independent oracles for the metrics.

Written with plain Python loops over lists; shares no code with
``underest.metrics``.
"""
from fractions import Fraction


def recount(y_true, y_pred, rows=None):
    rows = range(len(y_true)) if rows is None else rows
    tp = fp = fn = tn = 0
    for i in rows:
        t, p = int(y_true[i]), int(y_pred[i])
        if t == 1 and p == 1:
            tp += 1
        elif t == 0 and p == 1:
            fp += 1
        elif t == 1 and p == 0:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def naive_metrics(y_true, y_pred, mask):
    """Exact rational values of every metric; None where undefined."""
    n = len(y_true)
    minority = [i for i in range(n) if mask[i]]
    majority = [i for i in range(n) if not mask[i]]
    tp, fp, fn, tn = recount(y_true, y_pred)
    out = {"accuracy": Fraction(tp + tn, n)}
    actual = sum(1 for i in range(n) if y_true[i])
    predicted = sum(1 for i in range(n) if y_pred[i])
    out["us"] = Fraction(predicted, actual) if actual else None
    m_actual = sum(1 for i in minority if y_true[i])
    m_pred = sum(1 for i in minority if y_pred[i])
    out["us_s"] = Fraction(m_pred, m_actual) if m_actual else None
    if minority and majority:
        r_maj = Fraction(sum(1 for i in majority if y_pred[i]), len(majority))
        r_min = Fraction(m_pred, len(minority))
        out["cv"] = r_maj - r_min
        out["di_s"] = r_min / r_maj if r_maj else None
    else:
        out["cv"] = None
        out["di_s"] = None
    out["di_pass_80"] = None if out["di_s"] is None else out["di_s"] >= Fraction(4, 5)
    out["overall"] = (tp, fp, fn, tn)
    out["minority"] = recount(y_true, y_pred, minority)
    out["majority"] = recount(y_true, y_pred, majority)
    return out
