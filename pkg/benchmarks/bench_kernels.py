"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 1000] [--json out.json]

Each kernel runs on the same inputs in both backends; the table lists the best
time per call, the speedup and the largest difference between the outputs.
The last row integrates one geodesic end to end with each backend.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from qhgeo import _kernels_py, geodesics
from qhgeo._backend import BALL, compiled_kernels


def cases(rng, size):
    pts = rng.normal(size=(size, 4))
    pts *= (0.9 * rng.random(size) ** 0.25 / np.linalg.norm(pts, axis=1))[:, None]
    vecs = rng.normal(size=(size, 4))
    coeffs = rng.normal(size=(64, 4))
    t = np.linspace(0.0, 1.0, 65)[:, None]
    poly = np.ascontiguousarray((1 - t) * pts[0] + t * pts[1])
    x, v = pts[0].copy(), vecs[0].copy()
    return {
        "qmul_batch": lambda k: k.qmul_batch(pts, vecs),
        "series_eval": lambda k: k.series_eval(coeffs, pts),
        "star_convolve": lambda k: k.star_convolve(coeffs, coeffs),
        "metric_sq": lambda k: k.metric_sq(pts, vecs, BALL),
        "polyline_length": lambda k: k.polyline_length(poly, BALL),
        "polyline_length_grad": lambda k: k.polyline_length_grad(poly, BALL),
        "geodesic_accel": lambda k: k.geodesic_accel(x, v, BALL),
    }


def flat(result):
    parts = result if isinstance(result, tuple) else (result,)
    return np.concatenate([np.ravel(p) for p in parts])


def best_time(func, repeat):
    timer = timeit.Timer(func)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def geodesic_run(kernels):
    saved = geodesics.kernels
    geodesics.kernels = kernels
    try:
        return geodesics.cartesian_geodesic([0.2, 0.3, 0.0, 0.1], [0.1, 0.5, -0.4, 0.2], 3.0, samples=31)
    finally:
        geodesics.kernels = saved


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", type=int, default=1000, help="batch size for vectorized kernels")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", default=None, help="also write the results here")
    args = parser.parse_args(argv)
    if compiled_kernels is None:
        print("compiled kernels are not built; only the numpy fallback is available", file=sys.stderr)
        return 1

    rows = []
    for name, call in cases(np.random.default_rng(args.seed), args.size).items():
        ref, out = call(_kernels_py), call(compiled_kernels)
        diff = float(np.max(np.abs(flat(ref) - flat(out))))
        rows.append({"kernel": name, "python_s": best_time(lambda: call(_kernels_py), args.repeat),
                     "cython_s": best_time(lambda: call(compiled_kernels), args.repeat), "max_diff": diff})
    ref, out = geodesic_run(_kernels_py), geodesic_run(compiled_kernels)
    rows.append({"kernel": "cartesian_geodesic (end to end)",
                 "python_s": best_time(lambda: geodesic_run(_kernels_py), 1),
                 "cython_s": best_time(lambda: geodesic_run(compiled_kernels), 1),
                 "max_diff": float(np.max(np.abs(ref.points - out.points)))})

    print(f"{'kernel':34s} {'python':>11s} {'cython':>11s} {'speedup':>8s} {'max diff':>9s}")
    for r in rows:
        print(f"{r['kernel']:34s} {r['python_s'] * 1e6:9.1f}us {r['cython_s'] * 1e6:9.1f}us "
              f"{r['python_s'] / r['cython_s']:7.1f}x {r['max_diff']:9.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"size": args.size, "results": rows}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
