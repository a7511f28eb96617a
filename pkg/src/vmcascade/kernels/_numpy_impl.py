"""Vectorized numpy kernels; same signatures and layouts as ``_numba_impl``."""
import numpy as np


def _h(p) -> float:
    p = np.asarray(p).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _bh(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))


def _cost(pa, lam):
    forbidden = np.isinf(lam)
    return float(pa[~forbidden] @ lam[~forbidden]), float(pa[forbidden].sum())


def cascade_terms(theta, pxy, vm, d1, d2, lam, nu):
    nx, ny = pxy.shape
    na, _, nz = vm.shape
    n1, n2 = d1.shape[1], d2.shape[1]
    # q[x, y, x1, a, u]
    q = pxy[:, :, None, None, None] * theta.reshape(nx, ny, n1, na, nu)
    r1 = _h(pxy) + _h(q.sum(axis=0)) - _h(q) - _h(pxy.sum(axis=0))
    pxya = q.sum(axis=(2, 4))
    m = q.sum(axis=2)                                   # [x, y, a, u]
    vm_t = np.transpose(vm, (1, 0, 2))                  # [y, a, z]
    full = m[..., None] * vm_t[None, :, :, None, :]     # [x, y, a, u, z]
    pxyaz = pxya[..., None] * vm_t[None]
    pauz = full.sum(axis=(0, 1))
    r2 = (_h(pxy) + _h(pxya.sum(axis=(0, 1))) - _h(pxya)) + (
        _h(pxyaz) + _h(pauz) - _h(full) - _h(pauz.sum(axis=1)))
    dist1 = float((q.sum(axis=(1, 3, 4)) * d1).sum())
    post = full.sum(axis=(1, 2))                        # [x, u, z]
    dist2 = float(np.einsum("xuz,xk->uzk", post, d2).min(axis=2).sum())
    cost, forb = _cost(pxya.sum(axis=(0, 1)), lam)
    return max(r1, 0.0), max(r2, 0.0), dist1, dist2, cost, forb


def cascade_lossless_terms(theta, pxy, vm, lam):
    nx, ny = pxy.shape
    na = vm.shape[0]
    pxya = pxy[:, :, None] * theta.reshape(nx, ny, na)
    pay = pxya.sum(axis=0)
    pa = pay.sum(axis=0)
    pxaz = np.einsum("xya,ayz->xaz", pxya, vm)
    r1 = max(_h(pxy) + _h(pay) - _h(pxya) - _h(pxy.sum(axis=0)), 0.0) + max(_h(pxya) - _h(pay), 0.0)
    r2 = max(_h(pxy) + _h(pa) - _h(pxya), 0.0) + max(_h(pxaz) - _h(pxaz.sum(axis=0)), 0.0)
    cost, forb = _cost(pa, lam)
    return r1, r2, cost, forb


def broadcast_lossless_terms(theta, px, pyz, lam):
    na, nx = pyz.shape[:2]
    pxa = px[:, None] * theta.reshape(nx, na)
    pa = pxa.sum(axis=0)
    full = pxa[:, :, None, None] * np.transpose(pyz, (1, 0, 2, 3))   # [x, a, y, z]
    pxay = full.sum(axis=3)
    pxaz = full.sum(axis=2)
    rb = max(_h(px) + _h(pa) - _h(pxa), 0.0)
    s1 = rb + max(_h(pxay) - _h(pxay.sum(axis=0)), 0.0)
    s2 = rb + max(_h(pxaz) - _h(pxaz.sum(axis=0)), 0.0)
    cost, forb = _cost(pa, lam)
    return rb, s1, s2, cost, forb


def cr_terms(theta, px, pyax, pzay, d1, d2, lam):
    na, nx, ny = pyax.shape
    n1, n2 = d1.shape[1], d2.shape[1]
    pxa = px[:, None] * theta[:nx * na].reshape(nx, na)
    rec = theta[nx * na:].reshape(nx, na, n1, n2)
    pa = pxa.sum(axis=0)
    i_xa = max(_h(px) + _h(pa) - _h(pxa), 0.0)
    pxay = pxa[:, :, None] * np.transpose(pyax, (1, 0, 2))            # [x, a, y]
    full = pxay[..., None, None] * rec[:, :, None]                     # [x, a, y, x1, x2]
    pay12 = full.sum(axis=0)
    pxay2 = full.sum(axis=3)
    h_full = _h(full)
    b = _h(pxay) + _h(pay12) - h_full - _h(pxay.sum(axis=0))
    d = _h(pxay2) + _h(pay12) - h_full - _h(pay12.sum(axis=2))
    pxaz = np.einsum("xay,ayz->xaz", pxay, pzay)
    pxaz2 = np.einsum("xayk,ayz->xazk", pxay2, pzay)
    c = _h(pxaz) + _h(pxaz2.sum(axis=0)) - _h(pxaz2) - _h(pxaz.sum(axis=0))
    pr = pxa[:, :, None, None] * rec
    dist1 = float((pr.sum(axis=(1, 3)) * d1).sum())
    dist2 = float((pr.sum(axis=(1, 2)) * d2).sum())
    cost, forb = _cost(pa, lam)
    return i_xa, max(b, 0.0), max(c, 0.0), max(d, 0.0), dist1, dist2, cost, forb


def switching_grid(pxw, alphas, betas):
    px = pxw.sum(axis=1)
    pw_x = np.where(px[:, None] > 0, pxw / np.where(px > 0, px, 1.0)[:, None], 1.0 / pxw.shape[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        hw_x = -np.where(pw_x > 0, pw_x * np.log2(pw_x), 0.0).sum(axis=1)
    h_x = _h(px)
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    p1 = px[0] * alphas + px[1] * betas
    gains = []
    for s0, s1 in ((alphas, betas), (1 - alphas, 1 - betas)):
        g0, g1 = px[0] * s0, px[1] * s1
        pj = g0 + g1
        safe = np.where(pj > 0, pj, 1.0)
        pw = (g0[:, None] * pw_x[0] + g1[:, None] * pw_x[1]) / safe[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            hw = -np.where(pw > 0, pw * np.log2(pw), 0.0).sum(axis=1)
        info = np.maximum(hw - (g0 * hw_x[0] + g1 * hw_x[1]) / safe, 0.0)
        gains.append(np.where(pj > 0, pj * info, 0.0))
    ixa = np.maximum(_bh(p1) - px[0] * _bh(alphas) - px[1] * _bh(betas), 0.0)
    return h_x - gains[0], h_x - gains[1], ixa, p1
