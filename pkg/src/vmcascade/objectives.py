"""Scalar objectives consumed by the search engine.

Each objective maps ``(theta, data) -> (objective, violation, cost)`` where
``violation`` is the summed budget excess plus forbidden-action mass; a
point is feasible when ``violation <= FEAS_TOL``.
"""
import math

from ._accel import jit
from .kernels import broadcast_lossless_terms, cascade_lossless_terms, cascade_terms, cr_terms

FEAS_TOL = 1e-12


@jit
def min_weighted_rates(rb, s1, s2, ssum, w1, w2, wb):
    """Minimize w1*R1 + w2*R2 + wb*Rb over the rate polyhedron.

    Constraints: Rb >= rb, R1+Rb >= s1, R2+Rb >= s2, R1+R2+Rb >= ssum and
    R >= 0.  The weights must be nonnegative; the minimum sits on a vertex,
    found by enumerating every triple of active constraints.
    Returns ``(value, R1, R2, Rb)``.
    """
    g = ((0.0, 0.0, 1.0), (1.0, 0.0, 1.0), (0.0, 1.0, 1.0), (1.0, 1.0, 1.0),
         (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    h = (rb, s1, s2, ssum, 0.0, 0.0, 0.0)
    best = math.inf
    br1 = 0.0
    br2 = 0.0
    brb = 0.0
    for i in range(7):
        for j in range(i + 1, 7):
            for k in range(j + 1, 7):
                a00, a01, a02 = g[i]
                a10, a11, a12 = g[j]
                a20, a21, a22 = g[k]
                det = (a00 * (a11 * a22 - a12 * a21) - a01 * (a10 * a22 - a12 * a20)
                       + a02 * (a10 * a21 - a11 * a20))
                if abs(det) < 1e-12:
                    continue
                b0, b1, b2 = h[i], h[j], h[k]
                x0 = (b0 * (a11 * a22 - a12 * a21) - a01 * (b1 * a22 - a12 * b2)
                      + a02 * (b1 * a21 - a11 * b2)) / det
                x1 = (a00 * (b1 * a22 - a12 * b2) - b0 * (a10 * a22 - a12 * a20)
                      + a02 * (a10 * b2 - b1 * a20)) / det
                x2 = (a00 * (a11 * b2 - b1 * a21) - a01 * (a10 * b2 - b1 * a20)
                      + b0 * (a10 * a21 - a11 * a20)) / det
                ok = True
                for r in range(7):
                    if g[r][0] * x0 + g[r][1] * x1 + g[r][2] * x2 < h[r] - 1e-12:
                        ok = False
                        break
                if not ok:
                    continue
                val = w1 * x0 + w2 * x1 + wb * x2
                if val < best - 1e-15:
                    best = val
                    br1, br2, brb = x0, x1, x2
    return best, br1, br2, brb


@jit
def cascade_objective(theta, data):
    pxy, vm, d1, d2, lam, nu, eta, dmax1, dmax2, gamma = data
    r1, r2, e1, e2, cost, forb = cascade_terms(theta, pxy, vm, d1, d2, lam, nu)
    viol = max(e1 - dmax1, 0.0) + max(e2 - dmax2, 0.0) + max(cost - gamma, 0.0) + forb
    return r1 + eta * r2, viol, cost


@jit
def cascade_lossless_objective(theta, data):
    pxy, vm, lam, eta, gamma = data
    r1, r2, cost, forb = cascade_lossless_terms(theta, pxy, vm, lam)
    return r1 + eta * r2, max(cost - gamma, 0.0) + forb, cost


@jit
def broadcast_lossless_objective(theta, data):
    px, pyz, lam, w1, w2, wb, gamma = data
    rb, s1, s2, cost, forb = broadcast_lossless_terms(theta, px, pyz, lam)
    val, _, _, _ = min_weighted_rates(rb, s1, s2, 0.0, w1, w2, wb)
    return val, max(cost - gamma, 0.0) + forb, cost


@jit
def cr_objective(theta, data):
    px, pyax, pzay, d1, d2, lam, w1, w2, wb, dmax1, dmax2, gamma = data
    ia, b, c, d, e1, e2, cost, forb = cr_terms(theta, px, pyax, pzay, d1, d2, lam)
    val, _, _, _ = min_weighted_rates(ia, ia + b, ia + c, ia + c + d, w1, w2, wb)
    viol = max(e1 - dmax1, 0.0) + max(e2 - dmax2, 0.0) + max(cost - gamma, 0.0) + forb
    return val, viol, cost
