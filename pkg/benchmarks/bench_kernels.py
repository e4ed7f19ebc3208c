"""Time the pure-Python and compiled kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from hardcore._backend import compiled_kernels, python_kernels
from hardcore.graph import generate_lattice_patch


def cases():
    G = generate_lattice_patch("cartesian", [31, 31])
    indptr, indices = G.csr()
    lmax = 12
    yield ("saw_counts z2 l=12", lambda k: k.saw_counts(
        indptr, indices, G.n // 2, lmax, np.zeros(G.n, np.uint8),
        np.full(indices.shape[0], -1, np.int32), np.zeros((1, lmax + 1), np.int64), 10**9))

    H = generate_lattice_patch("cartesian", [5, 5])
    hp, hi = H.csr()
    spins = np.zeros(H.n, np.int8)
    yield ("weitz_interval 5x5 depth=18", lambda k: k.weitz_interval(hp, hi, spins, 12, 18, 1.0, 10**9))

    yield ("branching_transitions L=12", lambda k: k.branching_transitions(12, [0, 1, 2, 3], True, -1, 10**7))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled_kernels is None:
        print("compiled kernels not built; only the python backend is timed")
    print(f"{'kernel':<32}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, call in cases():
        tp = best_of(lambda: call(python_kernels), args.repeat)
        if compiled_kernels is None:
            print(f"{name:<32}{tp:12.4f}{'-':>12}{'-':>10}")
            continue
        rp, rc = call(python_kernels), call(compiled_kernels)
        same = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(rp, rc))
        tc = best_of(lambda: call(compiled_kernels), args.repeat)
        print(f"{name:<32}{tp:12.4f}{tc:12.4f}{tp / tc:10.1f}{'' if same else '  MISMATCH'}")


if __name__ == "__main__":
    main()
