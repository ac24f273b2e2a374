"""Timing of the compiled reconstruction kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 256 4096 65536] [--repeat 20]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from wenolab._kernels import reconstruct_faces, reconstruct_faces_ext
from wenolab.reconstruction import CWENO3, WENO3, EpsilonPolicy, ReconstructionConfig


def bench(n: int, config: ReconstructionConfig, backend: str, repeat: int) -> float:
    rng = np.random.default_rng(0)
    u = rng.standard_normal((1, n + 2))
    h = rng.uniform(0.5, 1.5, n + 2) / n
    reconstruct_faces(u, h, config, backend)
    t = timeit.repeat(lambda: reconstruct_faces(u, h, config, backend), number=1, repeat=repeat)
    return min(t)


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[256, 4096, 65536])
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)

    backends = ["python"] + (["cython"] if reconstruct_faces_ext is not None else [])
    print("kind,n," + ",".join(f"{b}_seconds" for b in backends) + ",speedup")
    for kind in (WENO3, CWENO3):
        config = ReconstructionConfig(kind, EpsilonPolicy.linear_h())
        for n in args.sizes:
            t = [bench(n, config, b, args.repeat) for b in backends]
            speedup = t[0] / t[-1] if len(t) > 1 else float("nan")
            print(f"{kind},{n}," + ",".join(f"{v:.3e}" for v in t) + f",{speedup:.2f}")


if __name__ == "__main__":
    main()
