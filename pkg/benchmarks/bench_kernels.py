"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from fracmix import _kernels_py

try:
    from fracmix import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def cases():
    xs = -np.logspace(-2, 4, 200)
    inc = np.diff(np.sin(np.linspace(0.0, 5.0, 4097)))
    return {
        "ml_eval scalar (rho=0.7, x=-30)": lambda k: k.ml_eval(0.7, 1.0, -30.0),
        "ml_eval_array 200 pts (rho=1.5)": lambda k: k.ml_eval_array(1.5, 2.0, xs),
        "caputo_l1 4096 steps": lambda k: k.caputo_l1(inc, 0.7, 5.0 / 4096),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _kernels_py}
    if _compiled is not None:
        backends["cython"] = _compiled
    print(f"{'kernel':36s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup")
    for name, fn in cases().items():
        times = {}
        for b, mod in backends.items():
            timer = timeit.Timer(lambda fn=fn, mod=mod: fn(mod))
            n, _ = timer.autorange()
            times[b] = min(timer.repeat(args.repeat, n)) / n
        cells = " ".join(f"{times[b] * 1e3:10.3f}ms" for b in backends)
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else "      n/a"
        print(f"{name:36s} {cells} {speed}")


if __name__ == "__main__":
    main()
