"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from rydsim import kernels
from rydsim.register import build_lattice, interaction_matrix
from rydsim.routing import make_layout, random_circuit
from rydsim.variational import random_instance


def workloads():
    v = interaction_matrix(build_lattice("square", [4, 3], 1.0), 1.0, 6)
    masks = random_instance(18, seed=0, radius=1.0).graph.neighbor_masks()
    g = make_layout("nn2d", 16)
    dist, nxt = g.shortest_paths()
    pairs = np.array([gate.qubits for gate in random_circuit(16, 500, seed=1)], dtype=np.int64)
    return {
        "interaction_diagonal (12 atoms)": lambda k: k.interaction_diagonal(v),
        "mis_scan (18 vertices)": lambda k: k.mis_scan(masks),
        "route_greedy (16 qubits, 500 gates)": lambda k: k.route_greedy(pairs, dist, nxt, 16),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'kernel':<38}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in workloads().items():
        times = {}
        for b in backends:
            mod = kernels.get_backend(b)
            fn(mod)
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{name:<38}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
