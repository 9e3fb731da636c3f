"""Hot kernels: chain splitting solvers and support-cache queries.

Every kernel exists twice: a numba ``@njit`` build and a vectorized NumPy twin
with identical semantics; ``_backend`` decides which set the package binds at
import time (env flag ``STEINERCHASE_BACKEND``). Shapes throughout: request
normals ``A (t, d)`` with unit rows, offsets ``b (t,)``, start ``x0 (d,)``.
Min-movement state ``X (t, d)`` with duals ``Y (m, d)``, ``m = t`` plus one
when a terminal point is pinned. Support state ``V (t+1, d)`` whose last row
is the free endpoint, duals ``Y (t+1, d)``.

Both solvers are relaxed primal-dual splitting on
``min G(X) + F(K X + const)`` where K is the block chain-difference operator
(``||K|| < 2``, steps tau = sigma = 1/2):

    Xn <- prox_G(X - tau * K^T Y)            (row-wise half-space projections)
    Yn <- prox_F*(Y + sigma * (K(2Xn - X) + const))
    (X, Y) <- (X, Y) + relax * ((Xn, Yn) - (X, Y))

plus second-half ergodic averages. Certified bounds come from repairing the
dual iterates: chain residuals are projected onto each normal to get
inequality multipliers, and the leftover stationarity residual is charged
against a ball that provably contains every optimal trajectory.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import USE_NUMBA

TAU = 0.5
SIGMA = 0.5

STATUS_CERTIFIED = 0
STATUS_CAP = 2


# ---------------------------------------------------------------------------
# NumPy twins
# ---------------------------------------------------------------------------


def chain_cost_np(X, x0, term, has_term):
    """Sum of leg lengths of the trajectory X started at x0 (optional pin)."""
    if X.shape[0] == 0:
        return 0.0 if not has_term else float(np.linalg.norm(term - x0))
    legs = np.empty((X.shape[0], X.shape[1]))
    legs[0] = X[0] - x0
    legs[1:] = X[1:] - X[:-1]
    total = float(np.sqrt(np.einsum("ij,ij->i", legs, legs)).sum())
    if has_term:
        total += float(np.linalg.norm(term - X[-1]))
    return total


def minmv_cert_np(Y, A, b, x0, term, has_term, rbox):
    """Certified lower bound on the min-movement value from dual legs Y.

    Valid for any Y with row norms <= 1; rbox must upper-bound the optimal
    value (every optimal trajectory stays within rbox of x0).
    """
    t = A.shape[0]
    m = Y.shape[0]
    W = Y[:t].copy()
    W[: m - 1] -= Y[1:m]
    mu = np.maximum(0.0, np.einsum("ij,ij->i", A, W))
    E = W - mu[:, None] * A
    en = np.sqrt(np.einsum("ij,ij->i", E, E))
    lb = float(np.dot(mu, b)) - float(Y[0] @ x0)
    lb += float((E @ x0).sum()) - rbox * float(en.sum())
    if has_term:
        lb += float(Y[m - 1] @ term)
    return lb


def minmv_pdhg_np(A, b, x0, term, has_term, X, Y, eps, max_iter, check_every, relax):
    """Min-movement splitting solve; mutates X to the best trajectory found.

    Returns (status, value, lower_bound, iterations).
    """
    t, d = A.shape
    m = Y.shape[0]
    Xavg = np.zeros_like(X)
    Yavg = np.zeros_like(Y)
    navg = 0
    # initial incumbent: row-wise projection of the warm start (feasible)
    bestX = X.copy()
    v0 = b - np.einsum("ij,ij->i", A, bestX)
    p0 = v0 > 0.0
    if np.any(p0):
        bestX[p0] += v0[p0, None] * A[p0]
    best_p = chain_cost_np(bestX, x0, term, has_term)
    best_lb = -np.inf
    it = 0
    status = STATUS_CAP
    L = np.empty((m, d))
    while it < max_iter:
        it += 1
        KtY = Y[:t].copy()
        KtY[: m - 1] -= Y[1:m]
        Xn = X - TAU * KtY
        viol = b - np.einsum("ij,ij->i", A, Xn)
        pos = viol > 0.0
        if np.any(pos):
            Xn[pos] += viol[pos, None] * A[pos]
        Xb = 2.0 * Xn - X
        L[0] = Xb[0] - x0
        L[1:t] = Xb[1:] - Xb[:-1]
        if has_term:
            L[t] = term - Xb[t - 1]
        V = Y + SIGMA * L
        nrm = np.sqrt(np.einsum("ij,ij->i", V, V))
        Yn = V / np.maximum(1.0, nrm)[:, None]
        X += relax * (Xn - X)
        Y += relax * (Yn - Y)
        # measure and average the prox outputs only: the relaxed states
        # overshoot the projections, so Xn is feasible while X need not be
        Xavg += Xn
        Yavg += Yn
        navg += 1
        if it % check_every == 0:
            p_last = chain_cost_np(Xn, x0, term, has_term)
            if p_last < best_p:
                best_p = p_last
                bestX[:, :] = Xn
            lb = minmv_cert_np(Yn, A, b, x0, term, has_term, best_p)
            if lb > best_lb:
                best_lb = lb
            Xa = Xavg / navg  # average of feasible points stays feasible
            pa = chain_cost_np(Xa, x0, term, has_term)
            if pa < best_p:
                best_p = pa
                bestX[:, :] = Xa
            lba = minmv_cert_np(Yavg / navg, A, b, x0, term, has_term, best_p)
            if lba > best_lb:
                best_lb = lba
            if best_p - best_lb <= eps:
                status = STATUS_CERTIFIED
                break
            if 2 * navg > it:
                Xavg[:, :] = 0.0
                Yavg[:, :] = 0.0
                navg = 0
    X[:, :] = bestX
    return status, best_p, best_lb, it


def bcd_polish_np(A, b, x0, term, has_term, X, sweeps):
    """Cyclic exact block descent on the min-movement objective (mutates X).

    Each block solve is the two-point shortest-path-touching-a-half-space
    problem in closed form; the objective never increases. Returns the
    polished cost.
    """
    t, d = A.shape
    for _ in range(sweeps):
        for order in (range(t), range(t - 1, -1, -1)):
            for i in order:
                u = x0 if i == 0 else X[i - 1]
                if i == t - 1 and not has_term:
                    gap = b[i] - float(A[i] @ u)
                    X[i] = u + gap * A[i] if gap > 0.0 else u
                    continue
                v = term if i == t - 1 else X[i + 1]
                gu = float(A[i] @ u) - b[i]
                gv = float(A[i] @ v) - b[i]
                if gu < 0.0 and gv < 0.0:
                    up = u - 2.0 * gu * A[i]
                    s = gu / (gu + gv)
                    X[i] = up + s * (v - up)
                    continue
                dv = v - u
                den = float(dv @ dv)
                if den <= 1e-30:
                    X[i] = u - gu * A[i] if gu < 0.0 else u
                    continue
                s = float((X[i] - u) @ dv) / den
                s = min(1.0, max(0.0, s))
                # clamp into the feasible sub-segment
                gd = gv - gu
                if gu < 0.0:
                    s = max(s, -gu / gd)
                elif gv < 0.0:
                    s = min(s, -gu / gd)
                X[i] = u + s * dv
    return chain_cost_np(X, x0, term, has_term)


def normsum_project_np(Z, budget):
    """Projection onto {Z : sum_j ||Z_j|| <= budget} (block water-filling)."""
    n = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    tot = float(n.sum())
    if tot <= budget:
        return Z.copy()
    u = np.sort(n)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, n.shape[0] + 1, dtype=np.float64)
    lev = (css - budget) / ks
    ok = u - lev > 0.0
    rho = int(np.nonzero(ok)[0][-1])
    lam = lev[rho]
    f = np.maximum(n - lam, 0.0)
    scale = np.where(n > 1e-300, f / np.where(n > 1e-300, n, 1.0), 0.0)
    return Z * scale[:, None]


def support_cert_np(Y, A, b, x0, theta, budget):
    """Certified upper bound on the sublevel support value from dual legs Y."""
    t = A.shape[0]
    gamma = float(np.sqrt(np.einsum("ij,ij->i", Y, Y)).max())
    ub = gamma * budget + float(Y[0] @ x0)
    W = Y[:t] - Y[1 : t + 1]
    mu = np.maximum(0.0, np.einsum("ij,ij->i", A, W))
    C = mu[:, None] * A - W
    cn = np.sqrt(np.einsum("ij,ij->i", C, C))
    ub += float(-np.dot(mu, b) + (C @ x0).sum() + budget * cn.sum())
    ce = theta - Y[t]
    ub += float(ce @ x0) + budget * float(np.linalg.norm(ce))
    return ub


def _support_repair_np(V, x0, anchorV, anchor_cost, budget, theta):
    """Pull V into the movement budget (blend toward the anchor trajectory).

    Returns (value, chain_cost, Vr) where value is attained by the point
    Vr[t-1] + (budget - chain_cost) * theta and chain_cost covers the first t
    legs of Vr.
    """
    t1 = V.shape[0]
    t = t1 - 1
    legs = np.empty(t1)
    legs[0] = np.linalg.norm(V[0] - x0)
    dd = V[1:] - V[:-1]
    legs[1:] = np.sqrt(np.einsum("ij,ij->i", dd, dd))
    total = float(legs.sum())
    if total <= budget:
        Vr = V
        chain = total - float(legs[t1 - 1])
    elif anchor_cost < budget:
        alpha = (budget - anchor_cost) / (total - anchor_cost)
        Vr = anchorV + alpha * (V - anchorV)
        chain = chain_cost_np(Vr[:t], x0, x0, False)
    else:
        Vr = anchorV
        chain = anchor_cost
    val = float(theta @ Vr[t - 1]) + (budget - chain)
    return val, chain, Vr


def support_pdhg_np(A, b, x0, theta, budget, anchorV, anchor_cost, V, Y,
                    eps, max_iter, check_every, relax):
    """Sublevel support splitting solve; mutates V to the best repaired state.

    Returns (status, value, upper_bound, iterations, chain_cost).
    """
    t, d = A.shape
    m = t + 1
    Vavg = np.zeros_like(V)
    Yavg = np.zeros_like(Y)
    navg = 0
    # initial incumbent: the anchor itself (feasible, within budget)
    best_chain = anchor_cost
    best_val = float(theta @ anchorV[t - 1]) + (budget - anchor_cost)
    bestV = anchorV.copy()
    best_ub = np.inf
    it = 0
    status = STATUS_CAP
    L = np.empty((m, d))
    while it < max_iter:
        it += 1
        KtY = Y.copy()
        KtY[: m - 1] -= Y[1:m]
        Vn = V - TAU * KtY
        viol = b - np.einsum("ij,ij->i", A, Vn[:t])
        pos = viol > 0.0
        if np.any(pos):
            Vn[:t][pos] += viol[pos, None] * A[pos]
        Vn[t] += TAU * theta
        Vb = 2.0 * Vn - V
        L[0] = Vb[0] - x0
        L[1:] = Vb[1:] - Vb[:-1]
        W = Y + SIGMA * L
        Yn = W - SIGMA * normsum_project_np(W / SIGMA, budget)
        V += relax * (Vn - V)
        Y += relax * (Yn - Y)
        # measure and average the prox outputs only (see minmv_pdhg_np)
        Vavg += Vn
        Yavg += Yn
        navg += 1
        if it % check_every == 0:
            val, chain, Vr = _support_repair_np(Vn, x0, anchorV, anchor_cost, budget, theta)
            if val > best_val:
                best_val = val
                best_chain = chain
                bestV[:, :] = Vr
            ub = support_cert_np(Yn, A, b, x0, theta, budget)
            if ub < best_ub:
                best_ub = ub
            va, ca, Vra = _support_repair_np(Vavg / navg, x0, anchorV, anchor_cost, budget, theta)
            if va > best_val:
                best_val = va
                best_chain = ca
                bestV[:, :] = Vra
            uba = support_cert_np(Yavg / navg, A, b, x0, theta, budget)
            if uba < best_ub:
                best_ub = uba
            if best_ub - best_val <= eps:
                status = STATUS_CERTIFIED
                break
            if 2 * navg > it:
                Vavg[:, :] = 0.0
                Yavg[:, :] = 0.0
                navg = 0
    V[:, :] = bestV
    return status, best_val, best_ub, it, best_chain


def support_batch_np(A, b, x0, thetas, budget, anchorV, anchor_cost, Vs, Ys,
                     eps, max_iter, check_every, relax, vals, ends, costs, gaps):
    """Support solves for a batch of directions (loop twin of the numba build)."""
    t = A.shape[0]
    for j in range(thetas.shape[0]):
        st, val, ub, _, chain = support_pdhg_np(
            A, b, x0, thetas[j], budget, anchorV, anchor_cost, Vs[j], Ys[j],
            eps, max_iter, check_every, relax)
        vals[j] = val
        ends[j] = Vs[j][t - 1]
        costs[j] = chain
        gaps[j] = ub - val


def balls_max_np(thetas, centers, radii, out):
    """out[i] = max_j <thetas[i], centers[j]> + radii[j] (chunked matmul)."""
    n = thetas.shape[0]
    step = 8192
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        out[lo:hi] = (thetas[lo:hi] @ centers.T + radii[None, :]).max(axis=1)


def interp_circle_np(thetas, hvals, out):
    """Angular linear interpolation of anchor values on an even circle grid."""
    mm = hvals.shape[0]
    ang = np.arctan2(thetas[:, 1], thetas[:, 0])
    u = ang * (mm / (2.0 * np.pi))
    u = np.mod(u, mm)
    j0 = np.floor(u).astype(np.int64)
    f = u - j0
    j0 = np.mod(j0, mm)
    j1 = np.mod(j0 + 1, mm)
    out[:] = (1.0 - f) * hvals[j0] + f * hvals[j1]


# ---------------------------------------------------------------------------
# numba builds
# ---------------------------------------------------------------------------

if USE_NUMBA:
    from numba import njit, prange

    @njit(cache=True)
    def chain_cost_nb(X, x0, term, has_term):
        t = X.shape[0]
        d = X.shape[1]
        total = 0.0
        for i in range(t):
            s = 0.0
            for k in range(d):
                prev = x0[k] if i == 0 else X[i - 1, k]
                df = X[i, k] - prev
                s += df * df
            total += math.sqrt(s)
        if has_term:
            s = 0.0
            for k in range(d):
                df = term[k] - X[t - 1, k]
                s += df * df
            total += math.sqrt(s)
        return total

    @njit(cache=True)
    def minmv_cert_nb(Y, A, b, x0, term, has_term, rbox):
        t = A.shape[0]
        d = A.shape[1]
        m = Y.shape[0]
        lb = 0.0
        for i in range(t):
            mu = 0.0
            for k in range(d):
                w = Y[i, k]
                if i + 1 < m:
                    w -= Y[i + 1, k]
                mu += A[i, k] * w
            if mu < 0.0:
                mu = 0.0
            lb += mu * b[i]
            en = 0.0
            ex = 0.0
            for k in range(d):
                w = Y[i, k]
                if i + 1 < m:
                    w -= Y[i + 1, k]
                e = w - mu * A[i, k]
                en += e * e
                ex += e * x0[k]
            lb += ex - rbox * math.sqrt(en)
        for k in range(d):
            lb -= Y[0, k] * x0[k]
        if has_term:
            for k in range(d):
                lb += Y[m - 1, k] * term[k]
        return lb

    @njit(cache=True)
    def minmv_pdhg_nb(A, b, x0, term, has_term, X, Y, eps, max_iter, check_every, relax):
        t = A.shape[0]
        d = A.shape[1]
        m = Y.shape[0]
        Xn = np.empty((t, d))
        Yn = np.empty((m, d))
        Xavg = np.zeros((t, d))
        Yavg = np.zeros((m, d))
        Xa = np.empty((t, d))
        Ya = np.empty((m, d))
        navg = 0
        # initial incumbent: row-wise projection of the warm start (feasible)
        bestX = X.copy()
        for i in range(t):
            s = b[i]
            for k in range(d):
                s -= A[i, k] * bestX[i, k]
            if s > 0.0:
                for k in range(d):
                    bestX[i, k] += s * A[i, k]
        best_p = chain_cost_nb(bestX, x0, term, has_term)
        best_lb = -1e300
        it = 0
        status = STATUS_CAP
        while it < max_iter:
            it += 1
            for i in range(t):
                for k in range(d):
                    g = Y[i, k]
                    if i + 1 < m:
                        g -= Y[i + 1, k]
                    Xn[i, k] = X[i, k] - TAU * g
                s = b[i]
                for k in range(d):
                    s -= A[i, k] * Xn[i, k]
                if s > 0.0:
                    for k in range(d):
                        Xn[i, k] += s * A[i, k]
            for j in range(m):
                nn = 0.0
                for k in range(d):
                    if j < t:
                        xb = 2.0 * Xn[j, k] - X[j, k]
                        if j == 0:
                            zl = xb - x0[k]
                        else:
                            zl = xb - (2.0 * Xn[j - 1, k] - X[j - 1, k])
                    else:
                        zl = term[k] - (2.0 * Xn[t - 1, k] - X[t - 1, k])
                    v = Y[j, k] + SIGMA * zl
                    Yn[j, k] = v
                    nn += v * v
                nn = math.sqrt(nn)
                if nn > 1.0:
                    inv = 1.0 / nn
                    for k in range(d):
                        Yn[j, k] *= inv
            # measure and average the prox outputs only: the relaxed states
            # overshoot the projections, so Xn is feasible while X need not be
            for i in range(t):
                for k in range(d):
                    X[i, k] += relax * (Xn[i, k] - X[i, k])
                    Xavg[i, k] += Xn[i, k]
            for j in range(m):
                for k in range(d):
                    Y[j, k] += relax * (Yn[j, k] - Y[j, k])
                    Yavg[j, k] += Yn[j, k]
            navg += 1
            if it % check_every == 0:
                p_last = chain_cost_nb(Xn, x0, term, has_term)
                if p_last < best_p:
                    best_p = p_last
                    bestX[:, :] = Xn
                lb = minmv_cert_nb(Yn, A, b, x0, term, has_term, best_p)
                if lb > best_lb:
                    best_lb = lb
                inv = 1.0 / navg
                for i in range(t):
                    for k in range(d):
                        Xa[i, k] = Xavg[i, k] * inv
                for j in range(m):
                    for k in range(d):
                        Ya[j, k] = Yavg[j, k] * inv
                pa = chain_cost_nb(Xa, x0, term, has_term)
                if pa < best_p:
                    best_p = pa
                    bestX[:, :] = Xa
                lba = minmv_cert_nb(Ya, A, b, x0, term, has_term, best_p)
                if lba > best_lb:
                    best_lb = lba
                if best_p - best_lb <= eps:
                    status = STATUS_CERTIFIED
                    break
                if 2 * navg > it:
                    Xavg[:, :] = 0.0
                    Yavg[:, :] = 0.0
                    navg = 0
        X[:, :] = bestX
        return status, best_p, best_lb, it

    @njit(cache=True)
    def bcd_polish_nb(A, b, x0, term, has_term, X, sweeps):
        t = A.shape[0]
        d = A.shape[1]
        for _ in range(sweeps):
            for rev in range(2):
                for ii in range(t):
                    i = ii if rev == 0 else t - 1 - ii
                    gu = -b[i]
                    if i == 0:
                        for k in range(d):
                            gu += A[i, k] * x0[k]
                    else:
                        for k in range(d):
                            gu += A[i, k] * X[i - 1, k]
                    if i == t - 1 and not has_term:
                        if gu < 0.0:
                            for k in range(d):
                                prev = x0[k] if i == 0 else X[i - 1, k]
                                X[i, k] = prev - gu * A[i, k]
                        else:
                            for k in range(d):
                                X[i, k] = x0[k] if i == 0 else X[i - 1, k]
                        continue
                    gv = -b[i]
                    if i == t - 1:
                        for k in range(d):
                            gv += A[i, k] * term[k]
                    else:
                        for k in range(d):
                            gv += A[i, k] * X[i + 1, k]
                    if gu < 0.0 and gv < 0.0:
                        s = gu / (gu + gv)
                        for k in range(d):
                            u = x0[k] if i == 0 else X[i - 1, k]
                            v = term[k] if i == t - 1 else X[i + 1, k]
                            up = u - 2.0 * gu * A[i, k]
                            X[i, k] = up + s * (v - up)
                        continue
                    den = 0.0
                    num = 0.0
                    for k in range(d):
                        u = x0[k] if i == 0 else X[i - 1, k]
                        v = term[k] if i == t - 1 else X[i + 1, k]
                        dv = v - u
                        den += dv * dv
                        num += (X[i, k] - u) * dv
                    if den <= 1e-30:
                        if gu < 0.0:
                            for k in range(d):
                                u = x0[k] if i == 0 else X[i - 1, k]
                                X[i, k] = u - gu * A[i, k]
                        else:
                            for k in range(d):
                                X[i, k] = x0[k] if i == 0 else X[i - 1, k]
                        continue
                    s = num / den
                    if s < 0.0:
                        s = 0.0
                    if s > 1.0:
                        s = 1.0
                    gd = gv - gu
                    if gu < 0.0:
                        sf = -gu / gd
                        if s < sf:
                            s = sf
                    elif gv < 0.0:
                        sf = -gu / gd
                        if s > sf:
                            s = sf
                    for k in range(d):
                        u = x0[k] if i == 0 else X[i - 1, k]
                        v = term[k] if i == t - 1 else X[i + 1, k]
                        X[i, k] = u + s * (v - u)
        return chain_cost_nb(X, x0, term, has_term)

    @njit(cache=True)
    def normsum_project_nb(Z, budget):
        m = Z.shape[0]
        d = Z.shape[1]
        n = np.empty(m)
        tot = 0.0
        for j in range(m):
            s = 0.0
            for k in range(d):
                s += Z[j, k] * Z[j, k]
            n[j] = math.sqrt(s)
            tot += n[j]
        out = Z.copy()
        if tot <= budget:
            return out
        u = np.sort(n)[::-1]
        lam = 0.0
        css = 0.0
        for k in range(m):
            css += u[k]
            lev = (css - budget) / (k + 1)
            if u[k] - lev > 0.0:
                lam = lev
        for j in range(m):
            f = n[j] - lam
            if f < 0.0:
                f = 0.0
            scale = 0.0 if n[j] <= 1e-300 else f / n[j]
            for k in range(d):
                out[j, k] *= scale
        return out

    @njit(cache=True)
    def support_cert_nb(Y, A, b, x0, theta, budget):
        t = A.shape[0]
        d = A.shape[1]
        gamma = 0.0
        for j in range(t + 1):
            s = 0.0
            for k in range(d):
                s += Y[j, k] * Y[j, k]
            s = math.sqrt(s)
            if s > gamma:
                gamma = s
        ub = gamma * budget
        for k in range(d):
            ub += Y[0, k] * x0[k]
        for i in range(t):
            mu = 0.0
            for k in range(d):
                mu += A[i, k] * (Y[i, k] - Y[i + 1, k])
            if mu < 0.0:
                mu = 0.0
            ub -= mu * b[i]
            cn = 0.0
            cx = 0.0
            for k in range(d):
                c = mu * A[i, k] - (Y[i, k] - Y[i + 1, k])
                cn += c * c
                cx += c * x0[k]
            ub += cx + budget * math.sqrt(cn)
        cn = 0.0
        cx = 0.0
        for k in range(d):
            c = theta[k] - Y[t, k]
            cn += c * c
            cx += c * x0[k]
        ub += cx + budget * math.sqrt(cn)
        return ub

    @njit(cache=True)
    def _support_repair_nb(V, x0, anchorV, anchor_cost, budget, theta, Vr):
        t1 = V.shape[0]
        d = V.shape[1]
        t = t1 - 1
        total = 0.0
        lastleg = 0.0
        for j in range(t1):
            s = 0.0
            for k in range(d):
                prev = x0[k] if j == 0 else V[j - 1, k]
                df = V[j, k] - prev
                s += df * df
            s = math.sqrt(s)
            total += s
            if j == t1 - 1:
                lastleg = s
        if total <= budget:
            Vr[:, :] = V
            chain = total - lastleg
        elif anchor_cost < budget:
            alpha = (budget - anchor_cost) / (total - anchor_cost)
            chain = 0.0
            for j in range(t1):
                for k in range(d):
                    Vr[j, k] = anchorV[j, k] + alpha * (V[j, k] - anchorV[j, k])
            for j in range(t):
                s = 0.0
                for k in range(d):
                    prev = x0[k] if j == 0 else Vr[j - 1, k]
                    df = Vr[j, k] - prev
                    s += df * df
                chain += math.sqrt(s)
        else:
            Vr[:, :] = anchorV
            chain = anchor_cost
        val = budget - chain
        for k in range(d):
            val += theta[k] * Vr[t - 1, k]
        return val, chain

    @njit(cache=True)
    def support_pdhg_nb(A, b, x0, theta, budget, anchorV, anchor_cost, V, Y,
                        eps, max_iter, check_every, relax):
        t = A.shape[0]
        d = A.shape[1]
        m = t + 1
        Vn = np.empty((m, d))
        Yn = np.empty((m, d))
        W = np.empty((m, d))
        Vavg = np.zeros((m, d))
        Yavg = np.zeros((m, d))
        Va = np.empty((m, d))
        Ya = np.empty((m, d))
        Vr = np.empty((m, d))
        navg = 0
        # initial incumbent: the anchor itself (feasible, within budget)
        best_chain = anchor_cost
        best_val = budget - anchor_cost
        for k in range(d):
            best_val += theta[k] * anchorV[t - 1, k]
        bestV = anchorV.copy()
        best_ub = 1e300
        it = 0
        status = STATUS_CAP
        while it < max_iter:
            it += 1
            for i in range(m):
                for k in range(d):
                    g = Y[i, k]
                    if i + 1 < m:
                        g -= Y[i + 1, k]
                    Vn[i, k] = V[i, k] - TAU * g
                if i < t:
                    s = b[i]
                    for k in range(d):
                        s -= A[i, k] * Vn[i, k]
                    if s > 0.0:
                        for k in range(d):
                            Vn[i, k] += s * A[i, k]
                else:
                    for k in range(d):
                        Vn[i, k] += TAU * theta[k]
            for j in range(m):
                for k in range(d):
                    xb = 2.0 * Vn[j, k] - V[j, k]
                    if j == 0:
                        zl = xb - x0[k]
                    else:
                        zl = xb - (2.0 * Vn[j - 1, k] - V[j - 1, k])
                    W[j, k] = (Y[j, k] + SIGMA * zl) / SIGMA
            P = normsum_project_nb(W, budget)
            # measure and average the prox outputs only (see minmv_pdhg_nb)
            for j in range(m):
                for k in range(d):
                    Yn[j, k] = SIGMA * (W[j, k] - P[j, k])
                    Y[j, k] += relax * (Yn[j, k] - Y[j, k])
                    Yavg[j, k] += Yn[j, k]
            for j in range(m):
                for k in range(d):
                    V[j, k] += relax * (Vn[j, k] - V[j, k])
                    Vavg[j, k] += Vn[j, k]
            navg += 1
            if it % check_every == 0:
                val, chain = _support_repair_nb(Vn, x0, anchorV, anchor_cost, budget, theta, Vr)
                if val > best_val:
                    best_val = val
                    best_chain = chain
                    bestV[:, :] = Vr
                ub = support_cert_nb(Yn, A, b, x0, theta, budget)
                if ub < best_ub:
                    best_ub = ub
                inv = 1.0 / navg
                for j in range(m):
                    for k in range(d):
                        Va[j, k] = Vavg[j, k] * inv
                        Ya[j, k] = Yavg[j, k] * inv
                va, ca = _support_repair_nb(Va, x0, anchorV, anchor_cost, budget, theta, Vr)
                if va > best_val:
                    best_val = va
                    best_chain = ca
                    bestV[:, :] = Vr
                uba = support_cert_nb(Ya, A, b, x0, theta, budget)
                if uba < best_ub:
                    best_ub = uba
                if best_ub - best_val <= eps:
                    status = STATUS_CERTIFIED
                    break
                if 2 * navg > it:
                    Vavg[:, :] = 0.0
                    Yavg[:, :] = 0.0
                    navg = 0
        V[:, :] = bestV
        return status, best_val, best_ub, it, best_chain

    @njit(cache=True, parallel=True)
    def support_batch_nb(A, b, x0, thetas, budget, anchorV, anchor_cost, Vs, Ys,
                         eps, max_iter, check_every, relax, vals, ends, costs, gaps):
        t = A.shape[0]
        d = A.shape[1]
        for j in prange(thetas.shape[0]):
            st, val, ub, _, chain = support_pdhg_nb(
                A, b, x0, thetas[j], budget, anchorV, anchor_cost, Vs[j], Ys[j],
                eps, max_iter, check_every, relax)
            vals[j] = val
            for k in range(d):
                ends[j, k] = Vs[j][t - 1, k]
            costs[j] = chain
            gaps[j] = ub - val

    @njit(cache=True, parallel=True)
    def balls_max_nb(thetas, centers, radii, out):
        n = thetas.shape[0]
        mm = centers.shape[0]
        d = thetas.shape[1]
        for i in prange(n):
            best = -1e300
            for j in range(mm):
                s = radii[j]
                for k in range(d):
                    s += thetas[i, k] * centers[j, k]
                if s > best:
                    best = s
            out[i] = best

    @njit(cache=True, parallel=True)
    def interp_circle_nb(thetas, hvals, out):
        mm = hvals.shape[0]
        fac = mm / (2.0 * np.pi)
        for i in prange(thetas.shape[0]):
            ang = math.atan2(thetas[i, 1], thetas[i, 0])
            u = ang * fac
            u = u % mm
            j0 = int(math.floor(u))
            f = u - j0
            j0 = j0 % mm
            j1 = (j0 + 1) % mm
            out[i] = (1.0 - f) * hvals[j0] + f * hvals[j1]

    chain_cost = chain_cost_nb
    minmv_cert = minmv_cert_nb
    minmv_pdhg = minmv_pdhg_nb
    bcd_polish = bcd_polish_nb
    support_pdhg = support_pdhg_nb
    support_batch = support_batch_nb
    balls_max = balls_max_nb
    interp_circle = interp_circle_nb
else:
    chain_cost = chain_cost_np
    minmv_cert = minmv_cert_np
    minmv_pdhg = minmv_pdhg_np
    bcd_polish = bcd_polish_np
    support_pdhg = support_pdhg_np
    support_batch = support_batch_np
    balls_max = balls_max_np
    interp_circle = interp_circle_np
