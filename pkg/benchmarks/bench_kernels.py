"""Timing comparison of the numba kernels against the pure-numpy path.

Run:  python benchmarks/bench_kernels.py
The same problems are solved on both backends and checked for agreement.
"""

import time

import numpy as np

from pickands import _kernels_numpy as k_numpy
from pickands.projection import (
    KKT_DELTA,
    RIDGE_SCALE,
    basis_matrix,
    gram_matrix,
    moment_constraints,
    vertex_start,
)
from pickands.simplex import enumerate_grid, midpoint_rule

try:
    from pickands import _kernels_numba as k_numba
except ImportError:
    k_numba = None


def time_fn(fn, *args, repeat=5):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_surfaces(n=200, subdiv=80):
    rng = np.random.default_rng(0)
    u = rng.uniform(0.001, 0.999, (n, 3))
    neglogu = np.ascontiguousarray(-np.log(u))
    log_neglogu = np.log(neglogu)
    rule = midpoint_rule(3, subdiv)
    nodes = np.ascontiguousarray(rule.nodes)
    log_nodes = np.log(nodes)
    args = (neglogu, log_neglogu, nodes, log_nodes)
    t_np, out_np = time_fn(k_numpy.raw_surfaces, *args)
    print(f"raw_surfaces  n={n} nodes={len(rule)}")
    print(f"  numpy : {t_np * 1e3:8.2f} ms")
    if k_numba is not None:
        k_numba.raw_surfaces(*args)  # compile
        t_nb, out_nb = time_fn(k_numba.raw_surfaces, *args)
        agree = np.allclose(out_np[0], out_nb[0]) and np.allclose(out_np[1], out_nb[1])
        print(f"  numba : {t_nb * 1e3:8.2f} ms   speedup x{t_np / t_nb:.1f}   agree={agree}")


def bench_qp(m=20, subdiv=80, n=200, n_problems=10):
    rng = np.random.default_rng(1)
    grid = enumerate_grid(3, m)
    rule = midpoint_rule(3, subdiv)
    basis = basis_matrix(grid, rule)
    D = gram_matrix(grid, rule, basis)
    ridge = RIDGE_SCALE * np.trace(D) / len(grid)
    D_r = np.ascontiguousarray(D + ridge * np.eye(len(grid)))
    C, c = moment_constraints(grid)
    C = np.ascontiguousarray(C)
    c = np.ascontiguousarray(c)
    start = vertex_start(grid)
    pinned = start == 0.0
    # noisy near-independence pilots, the expensive regime
    pilots = 1.0 - rng.uniform(0.0, 0.12, (n_problems, len(rule)))
    rhs = [np.ascontiguousarray(basis @ (rule.weights * pv)) for pv in pilots]

    def run(kernel):
        sols = []
        for d in rhs:
            h, _, _, status = kernel.qp_active_set(
                D_r, d, C, c, start.copy(), pinned.copy(), KKT_DELTA, 10_000
            )
            assert status == kernel.QP_OPTIMAL
            sols.append(h)
        return np.array(sols)

    t_np, out_np = time_fn(run, k_numpy, repeat=3)
    print(f"qp_active_set  K={len(grid)} problems={n_problems}")
    print(f"  numpy : {t_np * 1e3:8.2f} ms")
    if k_numba is not None:
        run(k_numba)  # compile
        t_nb, out_nb = time_fn(run, k_numba, repeat=3)
        agree = np.allclose(out_np, out_nb, atol=1e-9)
        print(f"  numba : {t_nb * 1e3:8.2f} ms   speedup x{t_np / t_nb:.1f}   agree={agree}")


if __name__ == "__main__":
    if k_numba is None:
        print("numba not importable; timing the numpy path only")
    bench_surfaces()
    bench_qp()
