"""Loop kernels compiled with numba.  Layouts match ``_numpy_impl``.

Every ``*_terms`` kernel takes a flat parameter vector ``theta`` holding
the conditional tables row-major and returns rates in bits plus
distortion/cost statistics.  ``cost`` excludes forbidden actions; their
total probability is returned separately as ``forbidden``.
"""
import math

import numpy as np
from numba import njit

LOG2E = 1.0 / math.log(2.0)


@njit(cache=True, nogil=True)
def _nlog(p):
    if p > 0.0:
        return -p * math.log(p) * LOG2E
    return 0.0


@njit(cache=True, nogil=True)
def _h(arr):
    s = 0.0
    flat = arr.ravel()
    for i in range(flat.size):
        s += _nlog(flat[i])
    return s


@njit(cache=True, nogil=True)
def _cost(pa, lam):
    cost = 0.0
    forb = 0.0
    for a in range(pa.size):
        if math.isinf(lam[a]):
            forb += pa[a]
        else:
            cost += pa[a] * lam[a]
    return cost, forb


@njit(cache=True, nogil=True)
def cascade_terms(theta, pxy, vm, d1, d2, lam, nu):
    nx, ny = pxy.shape
    na, _, nz = vm.shape
    n1 = d1.shape[1]
    n2 = d2.shape[1]
    nt = n1 * na * nu
    pyt = np.zeros((ny, nt))
    pxya = np.zeros((nx, ny, na))
    m = np.zeros((nx, ny, na, nu))
    py = np.zeros(ny)
    h_xy = 0.0
    h_xyt = 0.0
    dist1 = 0.0
    for x in range(nx):
        for y in range(ny):
            w = pxy[x, y]
            py[y] += w
            h_xy += _nlog(w)
            if w == 0.0:
                continue
            base = (x * ny + y) * nt
            for x1 in range(n1):
                for a in range(na):
                    for u in range(nu):
                        t = (x1 * na + a) * nu + u
                        q = w * theta[base + t]
                        if q == 0.0:
                            continue
                        h_xyt += _nlog(q)
                        pyt[y, t] += q
                        pxya[x, y, a] += q
                        m[x, y, a, u] += q
                        dist1 += q * d1[x, x1]
    r1 = h_xy + _h(pyt) - h_xyt - _h(py)

    pa = np.zeros(na)
    h_xya = 0.0
    h_xyaz = 0.0
    for x in range(nx):
        for y in range(ny):
            for a in range(na):
                v = pxya[x, y, a]
                pa[a] += v
                h_xya += _nlog(v)
                if v == 0.0:
                    continue
                for z in range(nz):
                    h_xyaz += _nlog(v * vm[a, y, z])

    pauz = np.zeros((na, nu, nz))
    post = np.zeros((nu, nz, nx))
    h_xyauz = 0.0
    for x in range(nx):
        for y in range(ny):
            for a in range(na):
                for u in range(nu):
                    v = m[x, y, a, u]
                    if v == 0.0:
                        continue
                    for z in range(nz):
                        q = v * vm[a, y, z]
                        h_xyauz += _nlog(q)
                        pauz[a, u, z] += q
                        post[u, z, x] += q
    paz = np.zeros((na, nz))
    for a in range(na):
        for u in range(nu):
            for z in range(nz):
                paz[a, z] += pauz[a, u, z]
    r2 = (h_xy + _h(pa) - h_xya) + (h_xyaz + _h(pauz) - h_xyauz - _h(paz))

    dist2 = 0.0
    for u in range(nu):
        for z in range(nz):
            best = np.inf
            for x2 in range(n2):
                s = 0.0
                for x in range(nx):
                    s += post[u, z, x] * d2[x, x2]
                if s < best:
                    best = s
            dist2 += best
    cost, forb = _cost(pa, lam)
    return max(r1, 0.0), max(r2, 0.0), dist1, dist2, cost, forb


@njit(cache=True, nogil=True)
def cascade_lossless_terms(theta, pxy, vm, lam):
    nx, ny = pxy.shape
    na, _, nz = vm.shape
    pxya = np.zeros((nx, ny, na))
    for x in range(nx):
        for y in range(ny):
            for a in range(na):
                pxya[x, y, a] = pxy[x, y] * theta[(x * ny + y) * na + a]
    py = pxy.sum(axis=0)
    pay = pxya.sum(axis=0)
    pa = pay.sum(axis=0)
    pxaz = np.zeros((nx, na, nz))
    for x in range(nx):
        for y in range(ny):
            for a in range(na):
                v = pxya[x, y, a]
                if v == 0.0:
                    continue
                for z in range(nz):
                    pxaz[x, a, z] += v * vm[a, y, z]
    paz = pxaz.sum(axis=0)
    h_xy = _h(pxy)
    h_xya = _h(pxya)
    h_ay = _h(pay)
    i_xa_y = h_xy + h_ay - h_xya - _h(py)
    h_x_ay = h_xya - h_ay
    i_xy_a = h_xy + _h(pa) - h_xya
    h_x_az = _h(pxaz) - _h(paz)
    cost, forb = _cost(pa, lam)
    return max(i_xa_y, 0.0) + max(h_x_ay, 0.0), max(i_xy_a, 0.0) + max(h_x_az, 0.0), cost, forb


@njit(cache=True, nogil=True)
def broadcast_lossless_terms(theta, px, pyz, lam):
    na, nx, ny, nz = pyz.shape
    pxa = np.zeros((nx, na))
    for x in range(nx):
        for a in range(na):
            pxa[x, a] = px[x] * theta[x * na + a]
    pa = pxa.sum(axis=0)
    pxay = np.zeros((nx, na, ny))
    pxaz = np.zeros((nx, na, nz))
    for x in range(nx):
        for a in range(na):
            v = pxa[x, a]
            if v == 0.0:
                continue
            for y in range(ny):
                for z in range(nz):
                    q = v * pyz[a, x, y, z]
                    pxay[x, a, y] += q
                    pxaz[x, a, z] += q
    rb = max(_h(px) + _h(pa) - _h(pxa), 0.0)
    s1 = rb + max(_h(pxay) - _h(pxay.sum(axis=0)), 0.0)
    s2 = rb + max(_h(pxaz) - _h(pxaz.sum(axis=0)), 0.0)
    cost, forb = _cost(pa, lam)
    return rb, s1, s2, cost, forb


@njit(cache=True, nogil=True)
def cr_terms(theta, px, pyax, pzay, d1, d2, lam):
    na, nx, ny = pyax.shape
    nz = pzay.shape[2]
    n1 = d1.shape[1]
    n2 = d2.shape[1]
    off = nx * na
    pxa = np.zeros((nx, na))
    for x in range(nx):
        for a in range(na):
            pxa[x, a] = px[x] * theta[x * na + a]
    pa = pxa.sum(axis=0)
    i_xa = max(_h(px) + _h(pa) - _h(pxa), 0.0)

    pxay = np.zeros((nx, na, ny))
    pay12 = np.zeros((na, ny, n1, n2))
    pxay2 = np.zeros((nx, na, ny, n2))
    h_full = 0.0
    dist1 = 0.0
    dist2 = 0.0
    for x in range(nx):
        for a in range(na):
            v = pxa[x, a]
            if v == 0.0:
                continue
            rbase = off + (x * na + a) * n1 * n2
            for x1 in range(n1):
                for x2 in range(n2):
                    r = v * theta[rbase + x1 * n2 + x2]
                    dist1 += r * d1[x, x1]
                    dist2 += r * d2[x, x2]
            for y in range(ny):
                w = v * pyax[a, x, y]
                pxay[x, a, y] += w
                if w == 0.0:
                    continue
                for x1 in range(n1):
                    for x2 in range(n2):
                        q = w * theta[rbase + x1 * n2 + x2]
                        if q == 0.0:
                            continue
                        h_full += _nlog(q)
                        pay12[a, y, x1, x2] += q
                        pxay2[x, a, y, x2] += q
    pay = pxay.sum(axis=0)
    pay2 = pay12.sum(axis=2)
    h_xay = _h(pxay)
    h_ay = _h(pay)
    h_ay12 = _h(pay12)
    b = h_xay + h_ay12 - h_full - h_ay
    d = _h(pxay2) + h_ay12 - h_full - _h(pay2)

    pxaz = np.zeros((nx, na, nz))
    pxaz2 = np.zeros((nx, na, nz, n2))
    for x in range(nx):
        for a in range(na):
            for y in range(ny):
                for z in range(nz):
                    g = pzay[a, y, z]
                    if g == 0.0:
                        continue
                    pxaz[x, a, z] += pxay[x, a, y] * g
                    for x2 in range(n2):
                        pxaz2[x, a, z, x2] += pxay2[x, a, y, x2] * g
    c = _h(pxaz) + _h(pxaz2.sum(axis=0)) - _h(pxaz2) - _h(pxaz.sum(axis=0))
    cost, forb = _cost(pa, lam)
    return i_xa, max(b, 0.0), max(c, 0.0), max(d, 0.0), dist1, dist2, cost, forb


@njit(cache=True, nogil=True)
def _bh(p):
    return _nlog(p) + _nlog(1.0 - p)


@njit(cache=True, nogil=True)
def switching_grid(pxw, alphas, betas):
    """Sum-rate bounds for binary X with actions {1, 2} and p(1|x) = (α, β)."""
    nw = pxw.shape[1]
    px = pxw.sum(axis=1)
    h_x = _nlog(px[0]) + _nlog(px[1])
    hw_x = np.zeros(2)
    pw_x = np.zeros((2, nw))
    for x in range(2):
        for w in range(nw):
            pw_x[x, w] = pxw[x, w] / px[x] if px[x] > 0 else 1.0 / nw
            hw_x[x] += _nlog(pw_x[x, w])
    n = alphas.size
    f1 = np.empty(n)
    f2 = np.empty(n)
    ixa = np.empty(n)
    p1 = np.empty(n)
    for k in range(n):
        sel1 = (alphas[k], betas[k])
        out = np.zeros(2)
        pa1 = px[0] * sel1[0] + px[1] * sel1[1]
        for j in range(2):
            g0 = px[0] * (sel1[0] if j == 0 else 1.0 - sel1[0])
            g1 = px[1] * (sel1[1] if j == 0 else 1.0 - sel1[1])
            pj = g0 + g1
            if pj <= 0.0:
                continue
            hw = 0.0
            for w in range(nw):
                hw += _nlog((g0 * pw_x[0, w] + g1 * pw_x[1, w]) / pj)
            out[j] = hw - (g0 * hw_x[0] + g1 * hw_x[1]) / pj
            out[j] = pj * max(out[j], 0.0)
        f1[k] = h_x - out[0]
        f2[k] = h_x - out[1]
        ixa[k] = max(_bh(pa1) - px[0] * _bh(sel1[0]) - px[1] * _bh(sel1[1]), 0.0)
        p1[k] = pa1
    return f1, f2, ixa, p1
