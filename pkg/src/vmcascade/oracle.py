"""Brute-force reference implementations used for cross-validation.

Nothing here calls the evaluators, kernels or optimizers of the package.
Mutual informations are summed directly from their definition, and the
optimizers are replaced by exhaustive enumeration of quantized channels.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .broadcast import BroadcastRegionPoint
from .cascade import RegionPoint
from .errors import ConfigurationError, Infeasible, OracleBudgetExceeded
from .model import Budget, BroadcastModel, CascadeModel
from .prob import JointDistribution

_CHUNK = 1 << 14
_TOL = 1e-12


def mi_oracle(d: JointDistribution, a, b, given=()) -> float:
    """I(a; b | given) in bits by summing p log(p(abc) p(c) / (p(ac) p(bc)))."""
    a, b, given = (_names(v) for v in (a, b, given))
    if set(a) & set(b) or (set(a) | set(b)) & set(given):
        raise ConfigurationError("variable groups must be disjoint")
    names = d.names
    for n in a + b + given:
        if n not in names:
            raise ConfigurationError(f"unknown variable {n!r}")
    # p(a, b, c) as a dict keyed by symbol tuples, then marginals by looping
    pabc: dict = {}
    order = a + b + given
    idx = [names.index(n) for n in order]
    for cell in itertools.product(*(range(v.size) for v in d.variables)):
        p = float(d.mass[cell])
        if p > 0.0:
            key = tuple(cell[i] for i in idx)
            pabc[key] = pabc.get(key, 0.0) + p
    na, nb = len(a), len(b)
    pac: dict = {}
    pbc: dict = {}
    pc: dict = {}
    for key, p in pabc.items():
        ka, kb, kc = key[:na], key[na:na + nb], key[na + nb:]
        pac[ka + kc] = pac.get(ka + kc, 0.0) + p
        pbc[kb + kc] = pbc.get(kb + kc, 0.0) + p
        pc[kc] = pc.get(kc, 0.0) + p
    total = 0.0
    for key, p in pabc.items():
        ka, kb, kc = key[:na], key[na:na + nb], key[na + nb:]
        total += p * math.log2(p * pc[kc] / (pac[ka + kc] * pbc[kb + kc]))
    return max(total, 0.0)


def _names(v) -> tuple[str, ...]:
    if isinstance(v, str):
        return (v,)
    return tuple(v)


@dataclass(frozen=True)
class GridSpec:
    """Simplex step for every quantized row, plus enumeration caps."""

    step: float = 0.5
    u_size: int = 2
    max_channels: int = 4_000_000

    def __post_init__(self):
        if not 0.0 < self.step <= 0.5:
            raise ConfigurationError("grid step must lie in (0, 0.5]")
        n = round(1.0 / self.step)
        if abs(n * self.step - 1.0) > 1e-9:
            raise ConfigurationError("grid step must be 1/n")
        if self.u_size < 1 or self.max_channels < 1:
            raise ConfigurationError("u_size and max_channels must be positive")

    @property
    def n(self) -> int:
        return round(1.0 / self.step)


def _compositions(n: int, length: int):
    if length == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, length - 1):
            yield (first,) + rest


def simplex_grid(n: int, length: int) -> np.ndarray:
    """Every pmf of ``length`` entries with masses in multiples of 1/n."""
    rows = sorted(_compositions(n, length))
    return np.array(rows, dtype=float).reshape(-1, length) / n


def _check_size(n: int, lengths: list[int], cap: int):
    total = math.prod(math.comb(n + k - 1, k - 1) for k in lengths)
    if total > cap:
        raise OracleBudgetExceeded(total, cap)


def _batches(grids: list[np.ndarray], cap: int):
    """Yield (start_index, list of row batches) over the product of row grids."""
    sizes = [g.shape[0] for g in grids]
    total = math.prod(sizes)
    if total > cap:
        raise OracleBudgetExceeded(total, cap)
    for lo in range(0, total, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, total))
        digits = np.unravel_index(idx, sizes)
        yield lo, [g[k] for g, k in zip(grids, digits)]


def _xlogx_ratio(p, num, den):
    """Sum over cells of p log2(num / den), skipping p == 0 cells."""
    pos = p > 0
    safe_num = np.where(pos, num, 1.0)
    safe_den = np.where(pos, den, 1.0)
    return np.where(pos, p * np.log2(safe_num / safe_den), 0.0)


def _batched_cmi(p, a, b, c):
    """I(a;b|c) for a batch of joints ``p`` (axis 0 is the batch).

    ``a``, ``b``, ``c`` are tuples of joint axes (1-based).  Every other
    axis is summed out first.
    """
    keep = tuple(sorted(a + b + c))
    drop = tuple(ax for ax in range(1, p.ndim) if ax not in keep)
    q = p.sum(axis=drop, keepdims=True) if drop else p
    pac = q.sum(axis=b, keepdims=True) if b else q
    pbc = q.sum(axis=a, keepdims=True)
    pc = pac.sum(axis=a, keepdims=True)
    terms = _xlogx_ratio(q, q * pc, pac * pbc)
    return np.maximum(terms.reshape(p.shape[0], -1).sum(axis=1), 0.0)


def _expected_cost(pa, lam):
    finite = np.isfinite(lam)
    cost = (pa[:, finite] * lam[finite]).sum(axis=1)
    return np.where((pa[:, ~finite] > 0).any(axis=1), math.inf, cost)


def cascade_batch(m: CascadeModel, ch: np.ndarray, decode: np.ndarray | None = None) -> dict:
    """Rate terms, distortions and cost for a batch of cascade test channels.

    ``ch`` is indexed [b, x, y, x1, a, u].  Without ``decode`` the second
    reconstruction is the per-(u, z) minimizer of expected d2.
    """
    pxy = np.asarray(m.source.mass, dtype=float)
    vm = np.asarray(m.vm.mass, dtype=float)          # [a, y, z]
    # joint over (x, y, x1, a, u, z); axes 1..6 after the batch axis
    p = (pxy[None, :, :, None, None, None, None] * ch[..., None]
         * np.transpose(vm, (1, 0, 2))[None, None, :, None, :, None, :])
    pa = p.sum(axis=(1, 2, 3, 5, 6))
    pxuz = p.sum(axis=(2, 3, 4))                     # [b, x, u, z]
    risk = np.einsum("bxuz,xk->buzk", pxuz, np.asarray(m.d2, dtype=float))
    if decode is None:
        e2 = risk.min(axis=3).sum(axis=(1, 2))
    else:
        nu, nz = decode.shape
        e2 = sum(risk[:, u, z, decode[u, z]] for u in range(nu) for z in range(nz))
    return {
        "r1": _batched_cmi(p, (1,), (3, 4, 5), (2,)),
        "r2": _batched_cmi(p, (1, 2), (4,), ()) + _batched_cmi(p, (1, 2), (5,), (4, 6)),
        "d1": np.einsum("bxk,xk->b", p.sum(axis=(2, 4, 5, 6)), np.asarray(m.d1, dtype=float)),
        "d2": e2,
        "cost": _expected_cost(pa, np.asarray(m.cost, dtype=float)),
    }


def oracle_cascade_point(m: CascadeModel, mass, decode=None) -> RegionPoint:
    """Single test channel p(x1, a, u | x, y) evaluated by the batch path."""
    t = cascade_batch(m, np.asarray(mass, dtype=float)[None],
                      None if decode is None else np.asarray(decode))
    return RegionPoint(*(float(t[k][0]) for k in ("r1", "r2", "d1", "d2", "cost")))


def _feasible(t: dict, budget: Budget) -> np.ndarray:
    return ((t["cost"] <= budget.gamma + _TOL) & (t["d1"] <= budget.d1 + _TOL)
            & (t["d2"] <= budget.d2 + _TOL))


def brute_force_cascade(m: CascadeModel, budget: Budget, eta: float = 1.0,
                        grid: GridSpec = GridSpec()) -> RegionPoint:
    """Best feasible r1 + eta * r2 over every quantized cascade test channel.

    Each row p(x1, a, u | x, y) ranges over the grid; the decoder is chosen
    per (u, z) to minimize the conditional expected distortion.  Ties keep
    the first channel in enumeration order.
    """
    if eta < 0:
        raise ConfigurationError("eta must be >= 0")
    nx, ny, na = m.nx, m.ny, m.na
    n1, nu = m.d1.shape[1], grid.u_size
    _check_size(grid.n, [n1 * na * nu] * (nx * ny), grid.max_channels)
    grids = [simplex_grid(grid.n, n1 * na * nu)] * (nx * ny)
    best = None
    for _, rows in _batches(grids, grid.max_channels):
        ch = np.stack(rows, axis=1).reshape(-1, nx, ny, n1, na, nu)
        t = cascade_batch(m, ch)
        val = t["r1"] + eta * t["r2"]
        ok = _feasible(t, budget)
        if not ok.any():
            continue
        k = int(np.flatnonzero(ok)[np.argmin(val[ok])])
        if best is None or val[k] < best[0]:
            best = (float(val[k]), RegionPoint(*(float(t[n][k])
                                                 for n in ("r1", "r2", "d1", "d2", "cost"))))
    if best is None:
        raise Infeasible("no quantized test channel meets the budget")
    return best[1]


def lp_weighted_rates(rb, s1, s2, ssum, weights) -> float:
    """min w1 R1 + w2 R2 + wb Rb over the rate polyhedron, by a 1-D sweep.

    For fixed Rb = t the optimum puts R1, R2 at their individual floors
    and tops up the sum bound on the cheaper link; the result is convex
    piecewise linear in t, so checking its breakpoints suffices.
    """
    w1, w2, wb = weights

    def at(t):
        p = max(s1 - t, 0.0)
        q = max(s2 - t, 0.0)
        extra = max(ssum - t - p - q, 0.0)
        return wb * t + w1 * p + w2 * q + min(w1, w2) * extra

    cands = (rb, s1, s2, ssum, s1 + s2 - ssum)
    return min(at(max(rb, t)) for t in cands)


def cr_batch(m: BroadcastModel, act: np.ndarray, rec: np.ndarray) -> dict:
    """Terms of the common-reconstruction region for a batch of channels.

    ``act`` is [b, x, a] and ``rec`` is [b, x, a, x1, x2].  The vending
    machine enters as the full table p(y, z | a, x).
    """
    px = np.asarray(m.source.mass, dtype=float)
    vm = np.asarray(m.vm.mass, dtype=float)          # [a, x, y, z]
    # joint over (x, a, y, z, x1, x2)
    p = (px[None, :, None, None, None, None, None] * act[:, :, :, None, None, None, None]
         * np.transpose(vm, (1, 0, 2, 3))[None, :, :, :, :, None, None]
         * rec[:, :, :, None, None, :, :])
    ia = _batched_cmi(p, (1,), (2,), ())
    b = _batched_cmi(p, (1,), (5, 6), (2, 3))
    c = _batched_cmi(p, (1,), (6,), (2, 4))
    d = _batched_cmi(p, (1,), (5,), (2, 3, 6))
    return {
        "rb": ia, "s1": ia + b, "s2": ia + c, "ssum": ia + c + d,
        "d1": np.einsum("bxk,xk->b", p.sum(axis=(2, 3, 4, 6)), np.asarray(m.d1, dtype=float)),
        "d2": np.einsum("bxk,xk->b", p.sum(axis=(2, 3, 4, 5)), np.asarray(m.d2, dtype=float)),
        "cost": _expected_cost(p.sum(axis=(1, 3, 4, 5, 6)), np.asarray(m.cost, dtype=float)),
    }


def _cr_point(t: dict, k: int) -> BroadcastRegionPoint:
    return BroadcastRegionPoint(float(t["rb"][k]), float(t["s1"][k]), float(t["s2"][k]),
                                float(t["cost"][k]), float(t["ssum"][k]),
                                float(t["d1"][k]), float(t["d2"][k]))


def oracle_cr_point(m: BroadcastModel, action, recon) -> BroadcastRegionPoint:
    """Single channel: ``action`` [x, a], ``recon`` [x, a, x1, x2]."""
    t = cr_batch(m, np.asarray(action, dtype=float)[None], np.asarray(recon, dtype=float)[None])
    return _cr_point(t, 0)


def oracle_broadcast_lossless(m: BroadcastModel, action) -> BroadcastRegionPoint:
    """Lossless bounds through the CR batch with X1 = X2 = X.

    Then I(X; X1, X2 | A, Y) = H(X | A, Y) and I(X; X2 | A, Z) = H(X | A, Z).
    """
    nx, na = m.nx, m.na
    rec = np.zeros((nx, na, nx, nx))
    for x in range(nx):
        rec[x, :, x, x] = 1.0
    t = cr_batch(m, np.asarray(action, dtype=float)[None], rec[None])
    return BroadcastRegionPoint(float(t["rb"][0]), float(t["s1"][0]), float(t["s2"][0]),
                                float(t["cost"][0]))


def brute_force_cr(m: BroadcastModel, budget: Budget, weights=(1.0, 1.0, 1.0),
                   grid: GridSpec = GridSpec()) -> BroadcastRegionPoint:
    """Best weighted rate over every quantized common-reconstruction channel.

    Rows are p(a | x) and p(x1, x2 | x, a).  Degradedness is required of
    the model but never exploited here.
    """
    if not m.degraded:
        raise ConfigurationError("common-reconstruction region requires a degraded model")
    w = tuple(float(v) for v in weights)
    if len(w) != 3 or min(w) < 0:
        raise ConfigurationError("weights must be three nonnegative numbers")
    nx, na = m.nx, m.na
    n1, n2 = m.d1.shape[1], m.d2.shape[1]
    _check_size(grid.n, [na] * nx + [n1 * n2] * (nx * na), grid.max_channels)
    grids = [simplex_grid(grid.n, na)] * nx + [simplex_grid(grid.n, n1 * n2)] * (nx * na)
    best = None
    for _, rows in _batches(grids, grid.max_channels):
        act = np.stack(rows[:nx], axis=1)
        rec = np.stack(rows[nx:], axis=1).reshape(-1, nx, na, n1, n2)
        t = cr_batch(m, act, rec)
        for k in np.flatnonzero(_feasible(t, budget)):
            val = lp_weighted_rates(t["rb"][k], t["s1"][k], t["s2"][k], t["ssum"][k], w)
            if best is None or val < best[0]:
                best = (val, _cr_point(t, k))
    if best is None:
        raise Infeasible("no quantized test channel meets the budget")
    return best[1]


def oracle_value_cr(point: BroadcastRegionPoint, weights) -> float:
    return lp_weighted_rates(point.rb_min, point.r1_plus_rb_min, point.r2_plus_rb_min,
                             point.r_sum_min, tuple(float(v) for v in weights))


__all__ = ["GridSpec", "brute_force_cascade", "brute_force_cr", "cascade_batch", "cr_batch",
           "lp_weighted_rates", "mi_oracle", "oracle_broadcast_lossless", "oracle_cascade_point",
           "oracle_cr_point", "oracle_value_cr", "simplex_grid"]
