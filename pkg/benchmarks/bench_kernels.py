"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel is compiled once before timing; the table reports the best of
``--repeat`` runs and checks the two paths agree on the benchmark inputs.
"""

import argparse
import json
import timeit

import numpy as np

from nmekit import _kernels
from nmekit.graded import SpaceConfig


def cases(rng, space):
    w, s = space.weights, space.scales
    K = space.coeffs
    decay = (1.0 + np.arange(K)) ** -(space.levels - 1)
    x = rng.uniform(-1, 1, K) * decay
    xs = rng.uniform(-1, 1, (2000, K)) * decay
    probes = rng.uniform(-1, 1, (256, K)) * decay
    conv_decay = 1.0 / (1.0 + np.arange(K)) ** 2
    return {
        "seminorms": (lambda k: k.seminorms(x, w)),
        "batch_seminorms 2000": (lambda k: k.batch_seminorms(xs, w)),
        "rho_from_zero": (lambda k: k.rho_from_zero(x, w, s)),
        "rho_to_many 2000": (lambda k: k.rho_to_many(x, xs, w, s)),
        "nearest_rho 256x2000": (lambda k: k.nearest_rho(probes, xs, w, s)),
        "conv_weighted": (lambda k: k.conv_weighted(x, x, conv_decay)),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return np.allclose(a[0], b[0], rtol=1e-12)
    return np.allclose(a, b, rtol=1e-12, atol=1e-300)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--levels", type=int, default=12)
    ap.add_argument("--coeffs", type=int, default=64)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)
    nb, npk = _kernels.numba_kernels, _kernels.numpy_kernels
    if nb is None:
        raise SystemExit("numba is not importable; nothing to compare")
    _kernels.warmup(nb)
    rng = np.random.default_rng(0)
    rows = []
    print(f"{'kernel':24s} {'numpy [us]':>12s} {'numba [us]':>12s} {'speedup':>8s}  agree")
    for name, fn in cases(rng, SpaceConfig(args.levels, args.coeffs)).items():
        times = {}
        for label, k in (("numpy", npk), ("numba", nb)):
            t = timeit.Timer(lambda: fn(k))
            n, _ = t.autorange()
            times[label] = min(t.repeat(args.repeat, n)) / n * 1e6
        ok = _same(fn(npk), fn(nb))
        rows.append({"kernel": name, **times, "speedup": times["numpy"] / times["numba"], "agree": bool(ok)})
        print(f"{name:24s} {times['numpy']:12.1f} {times['numba']:12.1f} {times['numpy'] / times['numba']:8.1f}  {ok}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
