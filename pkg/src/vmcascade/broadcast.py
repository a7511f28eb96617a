"""Cascade-broadcast regions: lossless, switching side information, and
lossy with common reconstruction under degraded side information.

Adaptive actions (depending also on past Y samples) do not enlarge the
common-reconstruction region once Z is removed; evaluate that case with a
model whose Z alphabet has a single symbol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, Infeasible
from .model import Budget, BroadcastModel, SwitchingModel, expected_cost, expected_distortion
from .objectives import broadcast_lossless_objective, cr_objective, min_weighted_rates
from .prob import (ConditionalChannel, JointDistribution, binary_entropy, compose,
                   conditional_entropy, conditional_mutual_information, entropy)
from .search import Engine, SearchConfig

GRID_STEP = 1 / 200
FINE_STEP = 1 / 2000
_TOL = 1e-12


@dataclass(frozen=True)
class BroadcastRegionPoint:
    rb_min: float
    r1_plus_rb_min: float
    r2_plus_rb_min: float
    cost: float
    r_sum_min: float | None = None
    d1: float | None = None
    d2: float | None = None


@dataclass(frozen=True, eq=False)
class CRTestChannel:
    action: ConditionalChannel     # p(a | x)
    recon: ConditionalChannel      # p(x1, x2 | x, a)

    def __post_init__(self):
        if self.action.given_names != ("X",) or self.action.to_names != ("A",):
            raise ConfigurationError("action channel must be p(A | X)")
        if self.recon.given_names != ("X", "A") or self.recon.to_names != ("X1", "X2"):
            raise ConfigurationError("reconstruction channel must be p(X1, X2 | X, A)")

    @classmethod
    def from_arrays(cls, action, recon) -> "CRTestChannel":
        return cls(ConditionalChannel.from_array(("X",), ("A",), action),
                   ConditionalChannel.from_array(("X", "A"), ("X1", "X2"), recon))

    def theta(self) -> np.ndarray:
        return np.concatenate([self.action.mass.ravel(), self.recon.mass.ravel()])


def _action_check(nx: int, na: int, action: ConditionalChannel):
    if action.given_names != ("X",) or action.to_names != ("A",):
        raise ConfigurationError("action channel must be p(A | X)")
    if action.mass.shape != (nx, na):
        raise ConfigurationError(f"action channel shape {action.mass.shape}, expected {(nx, na)}")


def eval_broadcast_lossless(m: BroadcastModel, action: ConditionalChannel) -> BroadcastRegionPoint:
    _action_check(m.nx, m.na, action)
    joint = compose(compose(m.source, action), m.vm)      # X, A, Y, Z
    ia = conditional_mutual_information(joint, "X", "A")
    return BroadcastRegionPoint(
        ia,
        ia + conditional_entropy(joint, "X", ("A", "Y")),
        ia + conditional_entropy(joint, "X", ("A", "Z")),
        expected_cost(joint, m.cost),
    )


def eval_switching(m: SwitchingModel, action: ConditionalChannel) -> BroadcastRegionPoint:
    """Sum-rate bounds H(X) - Σ p_a I(X; W | A = a) over the actions reaching each node."""
    _action_check(m.nx, 4, action)
    pxw = m.source_pair.mass
    px = pxw.sum(axis=1)
    xa = compose(JointDistribution.from_array(("X",), px), action)
    pa = xa.mass.sum(axis=0)
    info = np.zeros(4)
    for a in range(4):
        if pa[a] <= 0:
            continue
        # p(x, w | A = a) = p(x | a) p(w | x)
        px_a = xa.mass[:, a] / pa[a]
        with np.errstate(invalid="ignore", divide="ignore"):
            pw_x = np.where(px[:, None] > 0, pxw / px[:, None], 0.0)
        cond = JointDistribution.from_array(("X", "W"), px_a[:, None] * pw_x)
        info[a] = conditional_mutual_information(cond, "X", "W")
    hx = entropy(xa, "X")
    return BroadcastRegionPoint(
        conditional_mutual_information(xa, "X", "A"),
        hx - pa[1] * info[1] - pa[3] * info[3],
        hx - pa[2] * info[2] - pa[3] * info[3],
        expected_cost(xa, m.cost),
    )


def bsc_example(delta: float) -> SwitchingModel:
    """Uniform binary X, W = X through a BSC(δ); actions 0 and 3 forbidden, λ1 = λ2 = 1."""
    pxw = 0.5 * np.array([[1 - delta, delta], [delta, 1 - delta]])
    return SwitchingModel.from_arrays(pxw, (math.inf, 1.0, 1.0, math.inf))


def bsc_action(q: float) -> ConditionalChannel:
    """Time-sharing action: A = 1 with probability q, else A = 2, independent of X."""
    row = [0.0, q, 1 - q, 0.0]
    return ConditionalChannel.from_array(("X",), ("A",), [row, row])


def schannel_example(delta: float) -> SwitchingModel:
    """Uniform binary X, W|X an S-channel (p(0|0) = 1-δ, p(1|1) = 1); λ = (∞, 1, 0, ∞)."""
    pxw = 0.5 * np.array([[1 - delta, delta], [0.0, 1.0]])
    return SwitchingModel.from_arrays(pxw, (math.inf, 1.0, 0.0, math.inf))


def schannel_action(alpha: float, beta: float) -> ConditionalChannel:
    """p(A = 1 | X = 0) = α, p(A = 1 | X = 1) = β; otherwise A = 2."""
    return ConditionalChannel.from_array(
        ("X",), ("A",), [[0.0, alpha, 1 - alpha, 0.0], [0.0, beta, 1 - beta, 0.0]])


def eval_bsc_closed_form(q: float, delta: float) -> BroadcastRegionPoint:
    """Closed-form BSC bounds 1 - q h(δ) and 1 - (1 - q) h(δ), as usually displayed.

    The action is chosen independently of X, so the broadcast bound is 0 and
    the cost is 1.  Note that ``eval_switching`` on the same instance gives
    1 - q (1 - h(δ)): the displayed expression carries h(δ) where the
    conditional mutual information I(X; W) = 1 - h(δ) belongs.
    """
    if not (0 <= q <= 1 and 0 <= delta <= 1):
        raise ConfigurationError("q and delta must lie in [0, 1]")
    hd = binary_entropy(delta)
    return BroadcastRegionPoint(0.0, 1 - q * hd, 1 - (1 - q) * hd, 1.0)


def _schannel_term(weight: float, frac: float, delta: float) -> float:
    # weight * (h((1-δ) frac) - h(1-δ) frac), zero when the action has no mass
    if weight <= 0:
        return 0.0
    return weight * (binary_entropy((1 - delta) * frac) - binary_entropy(1 - delta) * frac)


def eval_schannel_closed_form(alpha: float, beta: float, delta: float) -> BroadcastRegionPoint:
    """Closed-form S-channel bounds, with the α+β ∈ {0, 2} corners taken as limits."""
    for v in (alpha, beta, delta):
        if not 0 <= v <= 1:
            raise ConfigurationError("alpha, beta and delta must lie in [0, 1]")
    s, t = alpha + beta, 2 - alpha - beta
    r1 = 1 - _schannel_term(s / 2, alpha / s if s > 0 else 0.0, delta)
    r2 = 1 - _schannel_term(t / 2, (1 - alpha) / t if t > 0 else 0.0, delta)
    ia = max(binary_entropy(s / 2) - 0.5 * binary_entropy(alpha) - 0.5 * binary_entropy(beta), 0.0)
    return BroadcastRegionPoint(ia, r1, r2, s / 2)


@dataclass(frozen=True)
class SumRateResult:
    value: float
    alpha: float
    beta: float
    r1: float
    r2: float


def _grid_eval(m: SwitchingModel, alphas, betas, eta, rb, gamma):
    pxw = np.ascontiguousarray(m.source_pair.mass)
    f1, f2, ixa, p1 = kernels.switching_grid(pxw, np.ascontiguousarray(alphas, dtype=float),
                                             np.ascontiguousarray(betas, dtype=float))
    lam1, lam2 = m.lambdas[1], m.lambdas[2]
    cost = p1 * lam1 + (1 - p1) * lam2
    feasible = (cost <= gamma + _TOL) & (ixa <= rb + _TOL)
    r1 = np.maximum(f1 - rb, 0.0)
    r2 = np.maximum(f2 - rb, 0.0)
    obj = np.where(feasible, r1 + eta * r2, np.inf)
    return obj, r1, r2


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return np.clip(lo + step * np.arange(n + 1), 0.0, 1.0)


def weighted_sumrate(m: SwitchingModel, eta: float, rb: float, gamma: float,
                     mode: str = "optimal", step: float = GRID_STEP,
                     fine_step: float | None = FINE_STEP) -> SumRateResult:
    """Minimize max(f1 - Rb, 0) + η max(f2 - Rb, 0) over the (α, β) grid.

    Feasible points satisfy E[Λ(A)] <= Γ and I(X; A) <= Rb.  ``greedy``
    restricts to α = β (action independent of X).  After the coarse grid a
    single refinement at ``fine_step`` covers one coarse cell around the
    incumbent.  Ties resolve to the first grid point.
    """
    if m.nx != 2:
        raise ConfigurationError("the (α, β) parametrization needs binary X")
    if eta < 0 or rb < 0 or not 0 <= gamma:
        raise ConfigurationError("need eta >= 0, Rb >= 0, Γ >= 0")
    if mode not in ("optimal", "greedy"):
        raise ConfigurationError(f"mode must be optimal or greedy, got {mode!r}")

    def solve(al_axis, be_axis):
        if mode == "greedy":
            al = be = al_axis
        else:
            al, be = (g.ravel() for g in np.meshgrid(al_axis, be_axis, indexing="ij"))
        obj, r1, r2 = _grid_eval(m, al, be, eta, rb, gamma)
        k = int(np.argmin(obj))
        return obj[k], al[k], be[k], r1[k], r2[k]

    coarse = _grid(0.0, 1.0, step)
    best = solve(coarse, coarse)
    if not np.isfinite(best[0]):
        raise Infeasible(f"no (α, β) on the grid meets Γ = {gamma} and Rb = {rb}")
    if fine_step:
        a0, b0 = best[1], best[2]
        fa = _grid(max(a0 - step, 0.0), min(a0 + step, 1.0), fine_step)
        fb = _grid(max(b0 - step, 0.0), min(b0 + step, 1.0), fine_step)
        fine = solve(fa, fb)
        if fine[0] < best[0] - _TOL:
            best = fine
    return SumRateResult(*(float(v) for v in best))


def greedy_gain(m: SwitchingModel, eta: float, rb: float, gamma: float, **grid) -> tuple[float, SumRateResult, SumRateResult]:
    """greedy - optimal weighted sum-rate, with both witnesses."""
    opt = weighted_sumrate(m, eta, rb, gamma, "optimal", **grid)
    gr = weighted_sumrate(m, eta, rb, gamma, "greedy", **grid)
    return gr.value - opt.value, opt, gr


def _cr_joint(m: BroadcastModel, t: CRTestChannel) -> JointDistribution:
    p_y, p_z = m.degraded_factors()
    y_ch = ConditionalChannel.from_array(("A", "X"), ("Y",), p_y)
    z_ch = ConditionalChannel.from_array(("A", "Y"), ("Z",), p_z)
    joint = compose(compose(compose(m.source, t.action), y_ch), z_ch)
    return compose(joint, t.recon)       # X, A, Y, Z, X1, X2


def eval_cr_point(m: BroadcastModel, t: CRTestChannel) -> BroadcastRegionPoint:
    """Four rate bounds, distortions and cost under common reconstruction.

    Only defined for degraded side information (X - (A, Y) - Z).
    """
    if not m.degraded:
        raise ConfigurationError("common-reconstruction region requires a degraded model")
    _action_check(m.nx, m.na, t.action)
    if t.recon.mass.shape != (m.nx, m.na, m.n1, m.n2):
        raise ConfigurationError("reconstruction channel shape does not match the model")
    joint = _cr_joint(m, t)
    ia = conditional_mutual_information(joint, "X", "A")
    b = conditional_mutual_information(joint, "X", ("X1", "X2"), ("A", "Y"))
    c = conditional_mutual_information(joint, "X", "X2", ("A", "Z"))
    d = conditional_mutual_information(joint, "X", "X1", ("A", "Y", "X2"))
    return BroadcastRegionPoint(
        ia, ia + b, ia + c, expected_cost(joint, m.cost), ia + c + d,
        expected_distortion(joint, m.d1, "X", "X1"),
        expected_distortion(joint, m.d2, "X", "X2"),
    )


def lossless_cr_channel(m: BroadcastModel, action: ConditionalChannel) -> CRTestChannel:
    """X1 = X2 = X deterministically."""
    if m.n1 != m.nx or m.n2 != m.nx:
        raise ConfigurationError("reconstruction alphabets must equal X")
    recon = np.zeros((m.nx, m.na, m.nx, m.nx))
    for x in range(m.nx):
        recon[x, :, x, x] = 1.0
    return CRTestChannel(action, ConditionalChannel.from_array(("X", "A"), ("X1", "X2"), recon))


def region_weighted_value(point: BroadcastRegionPoint, weights) -> tuple[float, float, float, float]:
    """min w1 R1 + w2 R2 + wb Rb over the point's rate polyhedron -> (value, R1, R2, Rb)."""
    w1, w2, wb = _weights(weights)
    ssum = point.r_sum_min if point.r_sum_min is not None else 0.0
    return min_weighted_rates(point.rb_min, point.r1_plus_rb_min, point.r2_plus_rb_min,
                              ssum, w1, w2, wb)


def _weights(weights):
    w = tuple(float(v) for v in weights)
    if len(w) != 3 or min(w) < 0:
        raise ConfigurationError("weights (w1, w2, wb) must be three nonnegative numbers")
    return w


def optimize_broadcast_lossless(m: BroadcastModel, gamma: float, weights=(1.0, 1.0, 1.0),
                                search: SearchConfig = SearchConfig()):
    """Minimize w1 R1 + w2 R2 + wb Rb over p(a | x) with E[Λ(A)] <= gamma."""
    w1, w2, wb = _weights(weights)
    finite = np.isfinite(m.cost)
    if m.cost[finite].min() > gamma:
        raise Infeasible(f"no action has cost <= Γ = {gamma}")
    data = (np.ascontiguousarray(m.source.mass), np.ascontiguousarray(m.vm.mass),
            np.ascontiguousarray(m.cost), w1, w2, wb, float(gamma))
    out = Engine(broadcast_lossless_objective, data, [m.na] * m.nx, search).run()
    if out is None:
        raise Infeasible("no feasible action channel found for the budget")
    action = ConditionalChannel.from_array(("X",), ("A",), out.theta.reshape(m.nx, m.na))
    return eval_broadcast_lossless(m, action), action


def cr_arrays(m: BroadcastModel):
    p_y, p_z = m.degraded_factors()
    return (np.ascontiguousarray(m.source.mass), np.ascontiguousarray(p_y),
            np.ascontiguousarray(p_z), np.ascontiguousarray(m.d1), np.ascontiguousarray(m.d2),
            np.ascontiguousarray(m.cost))


def optimize_cr(m: BroadcastModel, budget: Budget, weights=(1.0, 1.0, 1.0),
                search: SearchConfig = SearchConfig(), initial=()):
    """Minimize w1 R1 + w2 R2 + wb Rb over feasible common-reconstruction channels.

    For each test channel the rate triple is the minimizer of the weighted
    sum over that channel's rate polyhedron (see ``region_weighted_value``).
    Returns ``(BroadcastRegionPoint, CRTestChannel)``.
    """
    if not m.degraded:
        raise ConfigurationError("common-reconstruction region requires a degraded model")
    w1, w2, wb = _weights(weights)
    finite = np.isfinite(m.cost)
    if m.cost[finite].min() > budget.gamma:
        raise Infeasible(f"no action has cost <= Γ = {budget.gamma}")
    px, p_y, p_z, d1, d2, lam = cr_arrays(m)
    data = (px, p_y, p_z, d1, d2, lam, w1, w2, wb, float(budget.d1), float(budget.d2),
            float(budget.gamma))
    rows = [m.na] * m.nx + [m.n1 * m.n2] * (m.nx * m.na)
    out = Engine(cr_objective, data, rows, search).run([np.ravel(t) for t in initial])
    if out is None:
        raise Infeasible("no feasible test channel found for the budget")
    split = m.nx * m.na
    chan = CRTestChannel.from_arrays(out.theta[:split].reshape(m.nx, m.na),
                                     out.theta[split:].reshape(m.nx, m.na, m.n1, m.n2))
    return eval_cr_point(m, chan), chan


__all__ = [
    "BroadcastRegionPoint", "CRTestChannel", "SumRateResult", "bsc_action", "bsc_example",
    "eval_broadcast_lossless", "eval_bsc_closed_form", "eval_cr_point", "eval_schannel_closed_form",
    "eval_switching", "greedy_gain", "lossless_cr_channel", "optimize_broadcast_lossless",
    "optimize_cr", "region_weighted_value", "schannel_action", "schannel_example",
    "weighted_sumrate",
]
