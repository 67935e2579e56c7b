"""Numba kernels against their numpy fallbacks.

Both implementations are called directly, so the result does not depend on
PKE_LAB_DISABLE_NUMBA.  Each row checks that the outputs agree before timing.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json PATH]
"""
import argparse
import json
import timeit

import numpy as np

from pke_lab import _accel, geometry, jets, quartic_weyl as qw


def _jet(rng):
    a = rng.standard_normal((jets.N, jets.N)) * jets._MASK
    a[0, 0] = 1.5
    return a


def cases(rng, batch):
    a, b = _jet(rng), _jet(rng)
    h = _jet(rng)
    h[0, 0] = 0.0
    c = rng.standard_normal(jets.N)
    C = rng.standard_normal((batch, 5))
    g = np.array([[0.3, 0.1, 0.2, 1.0], [0.1, -0.4, -1.0, 0.0], [0.2, -1.0, 0.5, 0.0], [1.0, 0.0, 0.0, 0.1]])
    gi = np.linalg.inv(g)
    dg = rng.standard_normal((4, 4, 4))
    dg = dg + dg.transpose(0, 2, 1)
    ddg = rng.standard_normal((4, 4, 4, 4))
    ddg = ddg + ddg.transpose(1, 0, 2, 3)
    ddg = ddg + ddg.transpose(0, 1, 3, 2)
    return [
        ("jet mul", jets._mul_numba, jets._mul_numpy, (a, b)),
        ("jet div", jets._div_numba, jets._div_numpy, (a, b)),
        ("jet compose", jets._compose_numba, jets._compose_numpy, (c, h)),
        (f"invariants x{batch}", qw._invariants_batch_numba, qw._invariants_batch_numpy, (C,)),
        (f"classify x{batch}", qw._classify_batch_numba, qw._classify_batch_numpy, (C, 1e-9)),
        ("ricci contraction", geometry._ricci_numba, geometry._ricci_numpy, (g, gi, dg, ddg)),
    ]


def run(repeat=2000, batch=10_000, seed=0):
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(seed)
    rows = []
    for name, fast, slow, args in cases(rng, batch):
        out_fast, out_slow = fast(*args), slow(*args)     # also triggers compilation
        if not np.allclose(out_fast, out_slow, rtol=1e-10, atol=1e-12):
            raise AssertionError(f"{name}: numba and numpy disagree")
        n = max(1, repeat // 100) if "x" in name.split()[-1] else repeat
        t_fast = min(timeit.repeat(lambda: fast(*args), number=n, repeat=3)) / n
        t_slow = min(timeit.repeat(lambda: slow(*args), number=n, repeat=3)) / n
        rows.append({"kernel": name, "numba_us": 1e6 * t_fast, "numpy_us": 1e6 * t_slow,
                     "speedup": t_slow / t_fast})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--batch", type=int, default=10_000)
    ap.add_argument("--json", help="also write the rows to this path")
    args = ap.parse_args()
    rows = run(args.repeat, args.batch)
    print(f"{'kernel':<22}{'numba [us]':>12}{'numpy [us]':>12}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<22}{r['numba_us']:>12.2f}{r['numpy_us']:>12.2f}{r['speedup']:>10.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
