"""Time the compiled and pure-Python enumeration kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import random
import timeit

from jointfactor.kernels import compiled_backend, python_backend


def workloads():
    rng = random.Random(0)
    out = []
    for p, d, n, k in ((7, 3, 40, 3), (5, 4, 24, 4), (101, 3, 60, 3)):
        vecs = [tuple(rng.randrange(p) for _ in range(d)) for _ in range(n)]
        out.append((f"combos p={p} d={d} n={n} k={k}", "independent_combinations_mod_p", (vecs, k, p)))
    for p, d, n in ((7, 6, 6), (101, 8, 12)):
        rows = [[rng.randrange(p) for _ in range(d)] for _ in range(n)]
        out.append((f"rank   p={p} {n}x{d}", "rank_mod_p", (rows, p)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled_backend is None:
        print("compiled kernels not available; timing the Python fallback only")
    print(f"{'workload':32s} {'python (ms)':>12s} {'compiled (ms)':>14s} {'speedup':>8s}")
    for name, fn, call_args in workloads():
        py = getattr(python_backend, fn)
        number = 1 if fn.startswith("independent") else 200
        t_py = min(timeit.repeat(lambda: py(*call_args), number=number, repeat=args.repeat)) / number
        if compiled_backend is None:
            print(f"{name:32s} {t_py * 1e3:12.3f} {'-':>14s} {'-':>8s}")
            continue
        c = getattr(compiled_backend, fn)
        assert c(*call_args) == py(*call_args), name
        t_c = min(timeit.repeat(lambda: c(*call_args), number=number, repeat=args.repeat)) / number
        print(f"{name:32s} {t_py * 1e3:12.3f} {t_c * 1e3:14.3f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
