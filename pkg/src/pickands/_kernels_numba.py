"""Numba twins of the kernels in ``_kernels_numpy``.

Same algorithm, same tolerances, explicit loops instead of broadcasting.
Importing this module triggers JIT compilation on first call; compiled
code is cached on disk.
"""

import numpy as np
from numba import njit

from ._kernels_numpy import DUAL_TOL, QP_MAX_ITER, QP_OPTIMAL, STEP_TOL


@njit(cache=True)
def raw_surfaces(neglogu, log_neglogu, nodes, log_nodes):
    n, p = neglogu.shape
    m = nodes.shape[0]
    xi_mean = np.empty(m)
    logxi_mean = np.empty(m)
    for k in range(m):
        acc = 0.0
        lacc = 0.0
        for i in range(n):
            best = np.inf
            bj = 0
            for j in range(p):
                wj = nodes[k, j]
                if wj > 0.0:
                    v = neglogu[i, j] / wj
                    if v < best:
                        best = v
                        bj = j
            acc += best
            lacc += log_neglogu[i, bj] - log_nodes[k, bj]
        xi_mean[k] = acc / n
        logxi_mean[k] = lacc / n
    return xi_mean, logxi_mean


@njit(cache=True)
def qp_active_set(D, d, C, c, h0, pinned0, delta, max_iter):
    K = D.shape[0]
    p = C.shape[0]
    h = h0.copy()
    pinned = pinned0.copy()
    mu = np.zeros(p)
    status = QP_MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        f = 0
        for i in range(K):
            if not pinned[i]:
                f += 1
        free = np.empty(f, np.int64)
        pos = 0
        for i in range(K):
            if not pinned[i]:
                free[pos] = i
                pos += 1
        nsys = f + p
        kkt = np.zeros((nsys, nsys))
        for a in range(f):
            ia = free[a]
            for b in range(f):
                kkt[a, b] = D[ia, free[b]]
            for j in range(p):
                kkt[a, f + j] = C[j, ia]
                kkt[f + j, a] = C[j, ia]
        for j in range(p):
            kkt[f + j, f + j] = -delta
        rhs = np.empty(nsys)
        for a in range(f):
            rhs[a] = d[free[a]]
        for j in range(p):
            rhs[f + j] = c[j]
        sol = np.linalg.solve(kkt, rhs)
        for j in range(p):
            mu[j] = -sol[f + j]
        maxstep = 0.0
        maxtgt = 0.0
        for a in range(f):
            st = abs(sol[a] - h[free[a]])
            if st > maxstep:
                maxstep = st
            ta = abs(sol[a])
            if ta > maxtgt:
                maxtgt = ta
        if f == 0 or maxstep <= STEP_TOL * (1.0 + maxtgt):
            # subproblem optimum reached: price the pinned coordinates
            worst = -1
            worst_val = -DUAL_TOL
            for i in range(K):
                if pinned[i]:
                    g = -d[i]
                    for kk in range(K):
                        g += D[i, kk] * h[kk]
                    for j in range(p):
                        g -= C[j, i] * mu[j]
                    if g < worst_val:
                        worst_val = g
                        worst = i
            if worst < 0:
                status = QP_OPTIMAL
                break
            pinned[worst] = False
        else:
            alpha = 1.0
            block = -1
            best_ratio = np.inf
            for a in range(f):
                if sol[a] - h[free[a]] < -STEP_TOL:
                    ratio = -h[free[a]] / (sol[a] - h[free[a]])
                    if ratio < best_ratio:
                        best_ratio = ratio
                        block = a
            if block >= 0 and best_ratio < 1.0:
                alpha = best_ratio
                if alpha < 0.0:
                    alpha = 0.0
            else:
                block = -1
            for a in range(f):
                ia = free[a]
                hv = h[ia] + alpha * (sol[a] - h[ia])
                h[ia] = hv if hv > 0.0 else 0.0
            if block >= 0:
                gidx = free[block]
                h[gidx] = 0.0
                pinned[gidx] = True
    return h, mu, it, status
