"""Pure-numpy implementations of the hot kernels.

These are the fallback path selected by ``PICKANDS_DISABLE_NUMBA=1`` (or
when numba is missing).  The numba twins in ``_kernels_numba`` follow the
same algorithmic steps so that both backends agree to floating-point
rounding; ``benchmarks/bench_kernels.py`` compares their speed.
"""

import numpy as np

# Shared active-set tolerances.  A step below STEP_TOL (relative to the
# iterate scale) means the equality-constrained subproblem is solved; a
# bound multiplier above -DUAL_TOL counts as nonnegative.
STEP_TOL = 1e-11
DUAL_TOL = 1e-9

# status codes returned by qp_active_set
QP_OPTIMAL = 0
QP_MAX_ITER = 1


def raw_surfaces(neglogu, log_neglogu, nodes, log_nodes):
    """Per-node mean and log-mean of the min-ratio statistics.

    neglogu : (n, p) array of -log(pseudo-observations), all > 0, with
        log_neglogu its elementwise log.
    nodes : (M, p) array of simplex points, with log_nodes its
        elementwise log (coordinates with weight 0 carry -inf and are
        excluded from the min).

    Returns (xi_mean, logxi_mean), each (M,): the average over rows of
    xi = min_j neglogu[i, j] / nodes[k, j] and the average of log(xi).
    The log tables let the inner loop avoid transcendentals: log(xi) is
    looked up as log_neglogu[i, j*] - log_nodes[k, j*] at the argmin j*.
    """
    neglogu = np.ascontiguousarray(neglogu, dtype=np.float64)
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    n = neglogu.shape[0]
    m = nodes.shape[0]
    xi_mean = np.empty(m)
    logxi_mean = np.empty(m)
    rows = np.arange(n)[:, None]
    # keep the (n, chunk, p) temporary around ~32 MB
    chunk = max(1, 1_500_000 // max(n, 1))
    with np.errstate(divide="ignore"):
        for s in range(0, m, chunk):
            w = nodes[s : s + chunk]
            lw = log_nodes[s : s + chunk]
            ratios = neglogu[:, None, :] / w[None, :, :]
            jstar = np.argmin(ratios, axis=2)
            cols = np.arange(w.shape[0])[None, :]
            xi = ratios[rows, cols, jstar]
            logxi = log_neglogu[rows, jstar] - lw[cols, jstar]
            xi_mean[s : s + chunk] = xi.mean(axis=0)
            logxi_mean[s : s + chunk] = logxi.mean(axis=0)
    return xi_mean, logxi_mean


def qp_active_set(D, d, C, c, h0, pinned0, delta, max_iter):
    """Primal active-set iteration for min 1/2 h'Dh - d'h, Ch = c, h >= 0.

    D must be positive definite (callers add a ridge).  h0 must be
    feasible and pinned0 must mark exactly the coordinates held at zero.
    delta regularizes the equality block of the KKT systems so they stay
    nonsingular when the free columns of C lose row rank.

    Returns (h, mu, iterations, status) with mu the equality multipliers.
    """
    K = D.shape[0]
    p = C.shape[0]
    h = h0.copy()
    pinned = pinned0.copy()
    mu = np.zeros(p)
    status = QP_MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        free = np.where(~pinned)[0]
        f = free.size
        nsys = f + p
        kkt = np.zeros((nsys, nsys))
        kkt[:f, :f] = D[np.ix_(free, free)]
        kkt[:f, f:] = C[:, free].T
        kkt[f:, :f] = C[:, free]
        for j in range(p):
            kkt[f + j, f + j] = -delta
        rhs = np.empty(nsys)
        rhs[:f] = d[free]
        rhs[f:] = c
        sol = np.linalg.solve(kkt, rhs)
        target = sol[:f]
        mu = -sol[f:]
        step = target - h[free]
        scale = 1.0 + (np.abs(target).max() if f else 0.0)
        if f == 0 or np.abs(step).max() <= STEP_TOL * scale:
            # subproblem optimum reached: price the pinned coordinates
            lam = (D @ h - d) - C.T @ mu
            pin_idx = np.where(pinned)[0]
            if pin_idx.size == 0 or lam[pin_idx].min() >= -DUAL_TOL:
                status = QP_OPTIMAL
                break
            worst = pin_idx[np.argmin(lam[pin_idx])]
            pinned[worst] = False
        else:
            hf = h[free]
            neg = step < -STEP_TOL
            alpha = 1.0
            block = -1
            if neg.any():
                ratios = np.full(f, np.inf)
                ratios[neg] = -hf[neg] / step[neg]
                bl = int(np.argmin(ratios))
                if ratios[bl] < 1.0:
                    alpha = max(ratios[bl], 0.0)
                    block = bl
            h[free] = np.maximum(hf + alpha * step, 0.0)
            if block >= 0:
                gidx = free[block]
                h[gidx] = 0.0
                pinned[gidx] = True
    return h, mu, it, status
