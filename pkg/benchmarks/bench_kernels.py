"""Compare the compiled and numpy split-search backends.

Kernel timings call both implementations directly in this process. The
end-to-end timings fit whole models in a child process per backend
(``UNDEREST_PURE=1`` selects numpy) and also confirm the two backends
produce identical predictions.

Usage::

    python benchmarks/bench_kernels.py [--rows 2000] [--features 10] [--repeat 5]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from underest import _fallback

try:
    from underest import _core
except ImportError:
    _core = None

CHILD = r"""
import hashlib, json, sys, time
import numpy as np
from underest import dataset as D, kernels
from underest.classifiers import ClassifierSpec, fit, predict_score
rows, d = int(sys.argv[1]), int(sys.argv[2])
ds = D.inject_sensitive(D.generate_synthetic(rows, d, 0.3, 2.0, seed=0), D.InjectionSpec(0.15, 0.3, 0))
enc = D.encode(ds)
out = {"backend": kernels.BACKEND}
digest = hashlib.sha256()
for algo, params in (("decision_tree", {}), ("gradient_boost", {}), ("random_forest", {"n_trees": 30})):
    t0 = time.perf_counter()
    m = fit(ClassifierSpec(algo, params), enc.X, enc.y)
    out[algo] = time.perf_counter() - t0
    digest.update(predict_score(m, enc.X).tobytes())
out["digest"] = digest.hexdigest()
print(json.dumps(out))
"""


def kernel_timings(rows, features, repeat):
    rng = np.random.default_rng(0)
    X = np.round(rng.normal(size=(rows, features)), 2)
    order = np.argsort(X, axis=0, kind="stable").astype(np.intp)
    y = (rng.random(rows) < 0.3).astype(np.float64)
    r = rng.normal(size=rows)
    results = []
    for crit, target in (("gini", y), ("sse", r)):
        c = 0 if crit == "gini" else 1
        row = {"criterion": crit}
        for name, mod in (("numpy", _fallback), ("cython", _core)):
            if mod is None:
                continue
            t = min(timeit.repeat(lambda: mod.best_split(X, order, target, 1, c), number=5, repeat=repeat)) / 5
            row[name] = t
        if _core is not None:
            assert _core.best_split(X, order, target, 1, c) == _fallback.best_split(X, order, target, 1, c)
        results.append(row)
    return results


def model_timings(rows, features):
    out = {}
    for name, extra in (("cython", {}), ("numpy", {"UNDEREST_PURE": "1"})):
        env = {**os.environ, **extra}
        proc = subprocess.run([sys.executable, "-c", CHILD, str(rows), str(features)],
                              env=env, capture_output=True, text=True, check=True)
        out[name] = json.loads(proc.stdout)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--features", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"best_split on {args.rows} x {args.features} (seconds per call)")
    for row in kernel_timings(args.rows, args.features, args.repeat):
        speed = f"  speedup {row['numpy'] / row['cython']:.1f}x" if "cython" in row else ""
        print(f"  {row['criterion']:<5} numpy {row['numpy']:.5f}"
              + (f"  cython {row['cython']:.5f}" if "cython" in row else "") + speed)

    print("model fit on the same data (seconds)")
    m = model_timings(args.rows, args.features)
    for algo in ("decision_tree", "gradient_boost", "random_forest"):
        print(f"  {algo:<15} numpy {m['numpy'][algo]:.3f}  {m['cython']['backend']} {m['cython'][algo]:.3f}")
    same = m["numpy"]["digest"] == m["cython"]["digest"]
    print(f"identical predictions across backends: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
