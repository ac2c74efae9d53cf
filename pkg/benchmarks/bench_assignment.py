"""Benchmark the compiled assignment kernel against the pure NumPy twin.

Both backends solve the same random cost matrices; the script verifies the
matchings agree exactly before reporting timings, so a speedup never comes
at the price of a different answer.

Usage:
    python benchmarks/bench_assignment.py
    python benchmarks/bench_assignment.py --sizes 50x50,200x300,500x500 --repeats 5
"""

import argparse
import time

import numpy as np

from boxprop._lsap import available_backends, linear_assignment


def parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for token in text.split(","):
        token = token.strip().lower()
        if "x" in token:
            rows, cols = token.split("x", 1)
            sizes.append((int(rows), int(cols)))
        else:
            sizes.append((int(token), int(token)))
    return sizes


def time_backend(backend: str, matrices: list[np.ndarray], repeats: int) -> tuple[float, list]:
    """Best-of-``repeats`` wall time over one pass through ``matrices``."""
    best = float("inf")
    results = []
    for _ in range(repeats):
        started = time.perf_counter()
        results = [linear_assignment(m, backend=backend) for m in matrices]
        best = min(best, time.perf_counter() - started)
    return best, results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="20x20,100x100,200x300,500x500",
                        help="comma-separated ROWSxCOLS or N (square) sizes")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing passes per backend; best is reported")
    parser.add_argument("--matrices-per-size", type=int, default=5,
                        help="random matrices drawn for each size")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernel unavailable; timing the pure backend only")

    rng = np.random.default_rng(np.random.Philox(args.seed))
    print(f"{'size':>12} {'python (ms)':>14} {'cython (ms)':>14} {'speedup':>9}")
    for rows, cols in parse_sizes(args.sizes):
        matrices = [rng.uniform(size=(rows, cols))
                    for _ in range(args.matrices_per_size)]
        py_time, py_results = time_backend("python", matrices, args.repeats)
        line = f"{rows}x{cols:<6}"
        if "cython" in backends:
            cy_time, cy_results = time_backend("cython", matrices, args.repeats)
            for (pr, pc), (cr, cc) in zip(py_results, cy_results):
                if not (np.array_equal(pr, cr) and np.array_equal(pc, cc)):
                    raise AssertionError(
                        f"backends disagree on a {rows}x{cols} instance"
                    )
            print(f"{line:>12} {1e3 * py_time:>14.2f} {1e3 * cy_time:>14.2f}"
                  f" {py_time / cy_time:>8.1f}x")
        else:
            print(f"{line:>12} {1e3 * py_time:>14.2f} {'-':>14} {'-':>9}")


if __name__ == "__main__":
    main()
