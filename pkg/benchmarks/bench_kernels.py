"""Compiled vs numpy kernels on the workloads of one QITE step.

Usage::

    python benchmarks/bench_kernels.py --qubits 10 12 --repeat 3

Prints one CSV row per (kernel, n_qubits, backend) with the best wall time
over ``--repeat`` runs and the speed-up of the compiled backend.
"""

import argparse
import time

import numpy as np

from qitesim import kernels
from qitesim.pauli import strings_up_to_weight


def workload(n, D, seed):
    rng = np.random.default_rng(seed)
    pool = list(strings_up_to_weight(n, D))
    xs = np.array([p.x_mask for p in pool], dtype=np.uint64)
    zs = np.array([p.z_mask for p in pool], dtype=np.uint64)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi /= np.linalg.norm(psi)
    thetas = rng.uniform(-0.01, 0.01, len(pool))
    return psi, xs, zs, thetas


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[8, 10, 12])
    ap.add_argument("--domain", type=int, default=2, help="pool is every string of weight <= domain")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("# compiled kernels not built; timing numpy only")
    print("kernel,n_qubits,pool,backend,seconds,speedup")
    for n in args.qubits:
        psi, xs, zs, th = workload(n, args.domain, args.seed)
        jobs = {
            "apply_rotations": lambda k: k.apply_rotations(psi.copy(), xs, zs, th),
            "apply_rotations_real": lambda k: k.apply_rotations_real(psi.real.copy(), xs, zs, th),
            "pauli_columns": lambda k: k.pauli_columns(psi, xs, zs),
            "pauli_expectations": lambda k: k.pauli_expectations(psi, xs, zs),
            "rotation_schedule": lambda k: k.rotation_schedule(xs, zs, n),
        }
        for name, job in jobs.items():
            t = {b: best_of(lambda: job(mod), args.repeat) for b, mod in backends.items()}
            for b, sec in t.items():
                speed = t["numpy"] / sec if b != "numpy" else 1.0
                print(f"{name},{n},{len(xs)},{b},{sec:.6f},{speed:.1f}")


if __name__ == "__main__":
    main()
