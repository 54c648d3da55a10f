"""Numba kernels for the hard-sphere collision quadrature.

All kernels share one quadrature convention:

* omega integration over S^2 uses a frame adapted to g = v - u:
  int_{S^2} |g.w| h(w) dw = 2|g| int_0^1 int_0^{2pi} c h(c,phi) dphi dc,
  discretized by Gauss-Legendre in c and a uniform midpoint rule in phi
  (the c<0 hemisphere is folded in; v', u' are even under w -> -w).
* post-collision values are trilinear interpolations of weighted node ratios
  rat = F / wgt multiplied by the exact weight at the off-grid point, with
  wgt either the Maxwellian (absolute distributions) or its square root
  (fluctuations).  Energy conservation gives wgt(v') wgt(u') = wgt(v) wgt(u)
  exactly, so the inner loop is transcendental-free.
* the loss term uses node values directly with the exact angular integral
  int B dw = 2 pi |g|.

Parallel loops range over output rows only; every write is row-local, so
results are deterministic for any thread count.
"""

import numpy as np
from numba import njit, prange


@njit(inline="always")
def _trilerp(rat, xx, yy, zz, n):
    """Trilinear interpolation of `rat` (flattened n^3, cell-centered lattice
    coordinates) at fractional index (xx, yy, zz). Returns (value, inside)."""
    i0 = int(np.floor(xx))
    j0 = int(np.floor(yy))
    k0 = int(np.floor(zz))
    if i0 < 0 or i0 > n - 2 or j0 < 0 or j0 > n - 2 or k0 < 0 or k0 > n - 2:
        return 0.0, False
    fx = xx - i0
    fy = yy - j0
    fz = zz - k0
    b = (i0 * n + j0) * n + k0
    nn = n * n
    val = (
        rat[b] * (1 - fx) * (1 - fy) * (1 - fz)
        + rat[b + 1] * (1 - fx) * (1 - fy) * fz
        + rat[b + n] * (1 - fx) * fy * (1 - fz)
        + rat[b + n + 1] * (1 - fx) * fy * fz
        + rat[b + nn] * fx * (1 - fy) * (1 - fz)
        + rat[b + nn + 1] * fx * (1 - fy) * fz
        + rat[b + nn + n] * fx * fy * (1 - fz)
        + rat[b + nn + n + 1] * fx * fy * fz
    )
    return val, True


@njit(inline="always")
def _frame(ex, ey, ez):
    """Orthonormal tangent pair for a unit vector (branchless up to one sign)."""
    s = 1.0 if ez >= 0.0 else -1.0
    a = -1.0 / (s + ez)
    b = ex * ey * a
    return 1.0 + s * ex * ex * a, s * b, -s * ex, b, s + ey * ey * a, -ey


@njit(parallel=True, fastmath=True, cache=True)
def qfull(F, G, ratF, ratG, wgt, nodes, h, n, v_max, cn, cw, phic, phis):
    """Full collision operator Q(F, G) at every node, with ratF = F / wgt and
    ratG = G / wgt interpolated and the exact pair weight wgt(v) wgt(u).

    Returns (out, escaped, attempted): pair-weight mass of (u, omega) pairs
    whose post-collision stencil left the grid, and the total.
    """
    N = nodes.shape[0]
    out = np.zeros(N)
    nc = cn.shape[0]
    nphi = phic.shape[0]
    wphi = 2.0 * np.pi / nphi
    esc = np.zeros(N)
    att = np.zeros(N)
    w_u = h * h * h
    for i in prange(N):
        v0 = nodes[i, 0]
        v1 = nodes[i, 1]
        v2 = nodes[i, 2]
        wgt_i = wgt[i]
        F_i = F[i]
        acc = 0.0
        n_esc = 0.0
        n_att = 0.0
        for j in range(N):
            gx = v0 - nodes[j, 0]
            gy = v1 - nodes[j, 1]
            gz = v2 - nodes[j, 2]
            gn2 = gx * gx + gy * gy + gz * gz
            if gn2 < 1e-28:
                continue
            gn = np.sqrt(gn2)
            ex = gx / gn
            ey = gy / gn
            ez = gz / gn
            t1x, t1y, t1z, t2x, t2y, t2z = _frame(ex, ey, ez)
            pair_w = wgt_i * wgt[j] * w_u
            gain = 0.0
            for ic in range(nc):
                c = cn[ic]
                st = np.sqrt(1.0 - c * c)
                cb_w = 2.0 * gn * c * cw[ic] * wphi
                tpar = gn * c
                for ip in range(nphi):
                    ox = c * ex + st * (phic[ip] * t1x + phis[ip] * t2x)
                    oy = c * ey + st * (phic[ip] * t1y + phis[ip] * t2y)
                    oz = c * ez + st * (phic[ip] * t1z + phis[ip] * t2z)
                    xx = (v0 - tpar * ox + v_max) / h - 0.5
                    yy = (v1 - tpar * oy + v_max) / h - 0.5
                    zz = (v2 - tpar * oz + v_max) / h - 0.5
                    fv, ok1 = _trilerp(ratF, xx, yy, zz, n)
                    xx = (nodes[j, 0] + tpar * ox + v_max) / h - 0.5
                    yy = (nodes[j, 1] + tpar * oy + v_max) / h - 0.5
                    zz = (nodes[j, 2] + tpar * oz + v_max) / h - 0.5
                    gv, ok2 = _trilerp(ratG, xx, yy, zz, n)
                    n_att += pair_w
                    if not (ok1 and ok2):
                        n_esc += pair_w
                    gain += cb_w * fv * gv
            # gain carries wgt(v')wgt(u') = wgt_i wgt_j exactly; loss is nodal
            acc += pair_w * gain - w_u * 2.0 * np.pi * gn * F_i * G[j]
        out[i] = acc
        esc[i] = n_esc
        att[i] = n_att
    return out, esc.sum(), att.sum()


@njit(parallel=True, fastmath=True, cache=True)
def qgain_cells(ratFc, wgt, nodes, h, n, v_max, cn, cw, phic, phis,
                order_by_r2, r2_sorted, e_cut):
    """Gain part Q_+(F, F) for a stack of cells (ratFc = F / wgt per cell),
    sharing the pair geometry across cells.

    Pairs with |v|^2 + |u|^2 > e_cut are skipped (their weighted-class
    contribution is below roundoff); pass e_cut = inf to disable.  The
    partner loop runs over nodes sorted by |u|^2 so the cut is a prefix.
    """
    N = nodes.shape[0]
    C = ratFc.shape[0]
    out = np.zeros((C, N))
    nc = cn.shape[0]
    nphi = phic.shape[0]
    wphi = 2.0 * np.pi / nphi
    w_u = h * h * h
    for i in prange(N):
        v0 = nodes[i, 0]
        v1 = nodes[i, 1]
        v2 = nodes[i, 2]
        r2_i = v0 * v0 + v1 * v1 + v2 * v2
        wgt_i = wgt[i]
        budget = e_cut - r2_i
        acc = np.zeros(C)
        for jj in range(N):
            if r2_sorted[jj] > budget:
                break
            j = order_by_r2[jj]
            if j == i:
                continue
            gx = v0 - nodes[j, 0]
            gy = v1 - nodes[j, 1]
            gz = v2 - nodes[j, 2]
            gn = np.sqrt(gx * gx + gy * gy + gz * gz)
            ex = gx / gn
            ey = gy / gn
            ez = gz / gn
            t1x, t1y, t1z, t2x, t2y, t2z = _frame(ex, ey, ez)
            pair_w = wgt_i * wgt[j] * w_u
            for ic in range(nc):
                c = cn[ic]
                st = np.sqrt(1.0 - c * c)
                cb_w = 2.0 * gn * c * cw[ic] * wphi * pair_w
                tpar = gn * c
                for ip in range(nphi):
                    ox = c * ex + st * (phic[ip] * t1x + phis[ip] * t2x)
                    oy = c * ey + st * (phic[ip] * t1y + phis[ip] * t2y)
                    oz = c * ez + st * (phic[ip] * t1z + phis[ip] * t2z)
                    vx = (v0 - tpar * ox + v_max) / h - 0.5
                    vy = (v1 - tpar * oy + v_max) / h - 0.5
                    vz = (v2 - tpar * oz + v_max) / h - 0.5
                    i0 = int(np.floor(vx))
                    j0 = int(np.floor(vy))
                    k0 = int(np.floor(vz))
                    ux = (nodes[j, 0] + tpar * ox + v_max) / h - 0.5
                    uy = (nodes[j, 1] + tpar * oy + v_max) / h - 0.5
                    uz = (nodes[j, 2] + tpar * oz + v_max) / h - 0.5
                    i1 = int(np.floor(ux))
                    j1 = int(np.floor(uy))
                    k1 = int(np.floor(uz))
                    if (i0 < 0 or i0 > n - 2 or j0 < 0 or j0 > n - 2
                            or k0 < 0 or k0 > n - 2 or i1 < 0 or i1 > n - 2
                            or j1 < 0 or j1 > n - 2 or k1 < 0 or k1 > n - 2):
                        continue
                    for cc in range(C):
                        fv, _ = _trilerp(ratFc[cc], vx, vy, vz, n)
                        gv, _ = _trilerp(ratFc[cc], ux, uy, uz, n)
                        acc[cc] += cb_w * fv * gv
        for cc in range(C):
            out[cc, i] = acc[cc]
    return out


@njit(parallel=True, fastmath=True, cache=True)
def gamma_matrix(g_vals, g_loss, mu, sqrt_mu, nodes, h, n, v_max,
                 cn, cw, phic, phis):
    """Dense matrix of f -> Gamma(g, f) for a fixed fluctuation g.

    Gamma(g, f) = (1 / 2 sqrt(mu)) [Q(sqrt(mu) g, sqrt(mu) f)
                                    + Q(sqrt(mu) f, sqrt(mu) g)].
    Both collision arguments are interpolated in sqrt(mu)-weighted form
    (`g_vals` holds the node values of g, and the f-stencil coefficients act
    on node values of f directly), so matrix elements stay bounded for
    polynomially growing fluctuations.  `g_loss` holds sqrt(mu) g for the
    nodal loss terms.
    """
    N = nodes.shape[0]
    A = np.zeros((N, N))
    nc = cn.shape[0]
    nphi = phic.shape[0]
    wphi = 2.0 * np.pi / nphi
    w_u = h * h * h
    nn = n * n
    for i in prange(N):
        v0 = nodes[i, 0]
        v1 = nodes[i, 1]
        v2 = nodes[i, 2]
        inv_smu_i = 1.0 / sqrt_mu[i]
        row = A[i]
        nu_g = 0.0
        for j in range(N):
            gx = v0 - nodes[j, 0]
            gy = v1 - nodes[j, 1]
            gz = v2 - nodes[j, 2]
            gn2 = gx * gx + gy * gy + gz * gz
            if gn2 < 1e-28:
                continue
            gn = np.sqrt(gn2)
            ex = gx / gn
            ey = gy / gn
            ez = gz / gn
            t1x, t1y, t1z, t2x, t2y, t2z = _frame(ex, ey, ez)
            # (1/2 smu_i) * smu(v') smu(u') = (1/2 smu_i) smu_i smu_j
            pair_w = 0.5 * inv_smu_i * sqrt_mu[i] * sqrt_mu[j] * w_u
            for ic in range(nc):
                c = cn[ic]
                st = np.sqrt(1.0 - c * c)
                cb_w = 2.0 * gn * c * cw[ic] * wphi * pair_w
                tpar = gn * c
                for ip in range(nphi):
                    ox = c * ex + st * (phic[ip] * t1x + phis[ip] * t2x)
                    oy = c * ey + st * (phic[ip] * t1y + phis[ip] * t2y)
                    oz = c * ez + st * (phic[ip] * t1z + phis[ip] * t2z)
                    vx = (v0 - tpar * ox + v_max) / h - 0.5
                    vy = (v1 - tpar * oy + v_max) / h - 0.5
                    vz = (v2 - tpar * oz + v_max) / h - 0.5
                    ux = (nodes[j, 0] + tpar * ox + v_max) / h - 0.5
                    uy = (nodes[j, 1] + tpar * oy + v_max) / h - 0.5
                    uz = (nodes[j, 2] + tpar * oz + v_max) / h - 0.5
                    gv_v, ok_v = _trilerp(g_vals, vx, vy, vz, n)
                    gv_u, ok_u = _trilerp(g_vals, ux, uy, uz, n)
                    if not (ok_v and ok_u):
                        continue
                    # term Q(smu g, smu f): g at v', f-stencil at u'
                    i1 = int(np.floor(ux))
                    j1 = int(np.floor(uy))
                    k1 = int(np.floor(uz))
                    fx = ux - i1
                    fy = uy - j1
                    fz = uz - k1
                    b = (i1 * n + j1) * n + k1
                    wgt = cb_w * gv_v
                    row[b] += wgt * (1 - fx) * (1 - fy) * (1 - fz)
                    row[b + 1] += wgt * (1 - fx) * (1 - fy) * fz
                    row[b + n] += wgt * (1 - fx) * fy * (1 - fz)
                    row[b + n + 1] += wgt * (1 - fx) * fy * fz
                    row[b + nn] += wgt * fx * (1 - fy) * (1 - fz)
                    row[b + nn + 1] += wgt * fx * (1 - fy) * fz
                    row[b + nn + n] += wgt * fx * fy * (1 - fz)
                    row[b + nn + n + 1] += wgt * fx * fy * fz
                    # term Q(smu f, smu g): f-stencil at v', g at u'
                    i1 = int(np.floor(vx))
                    j1 = int(np.floor(vy))
                    k1 = int(np.floor(vz))
                    fx = vx - i1
                    fy = vy - j1
                    fz = vz - k1
                    b = (i1 * n + j1) * n + k1
                    wgt = cb_w * gv_u
                    row[b] += wgt * (1 - fx) * (1 - fy) * (1 - fz)
                    row[b + 1] += wgt * (1 - fx) * (1 - fy) * fz
                    row[b + n] += wgt * (1 - fx) * fy * (1 - fz)
                    row[b + n + 1] += wgt * (1 - fx) * fy * fz
                    row[b + nn] += wgt * fx * (1 - fy) * (1 - fz)
                    row[b + nn + 1] += wgt * fx * (1 - fy) * fz
                    row[b + nn + n] += wgt * fx * fy * (1 - fz)
                    row[b + nn + n + 1] += wgt * fx * fy * fz
            # loss of Q(smu g, smu f): -(smu g)(v_i) B-integral f-column at j
            bloss = w_u * 2.0 * np.pi * gn
            row[j] -= 0.5 * inv_smu_i * g_loss[i] * bloss * sqrt_mu[j]
            # loss of Q(smu f, smu g): -(smu f)(v_i) nu_g -> diagonal
            nu_g += bloss * g_loss[j]
        row[i] -= 0.5 * nu_g
    return A
