"""Compiled vs pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from convso import kernels


def _cases(rng):
    for n in (4, 6, 8):
        dim = 1 << n
        x = np.ascontiguousarray(rng.standard_normal(dim))
        y = np.ascontiguousarray(rng.standard_normal(dim))
        yield f"blade_product n={n}", "blade_product", (x, y, n)
    for m in (8, 16, 32, 64):
        a = rng.standard_normal((m, m))
        yield f"jacobi_eigh m={m}", "jacobi_eigh", (np.ascontiguousarray(a + a.T),)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled extension not available; timing the python backend only")
    rng = np.random.default_rng(0)
    print(f"{'case':<22}{'python (ms)':>14}{'compiled (ms)':>16}{'speedup':>10}")
    for label, name, fargs in _cases(rng):
        py = getattr(kernels.python_backend, name)
        t_py = min(timeit.repeat(lambda: py(*fargs), number=1, repeat=args.repeat))
        if kernels.compiled_backend is None:
            print(f"{label:<22}{t_py * 1e3:>14.3f}{'-':>16}{'-':>10}")
            continue
        cc = getattr(kernels.compiled_backend, name)
        t_c = min(timeit.repeat(lambda: cc(*fargs), number=1, repeat=args.repeat))
        print(f"{label:<22}{t_py * 1e3:>14.3f}{t_c * 1e3:>16.3f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
