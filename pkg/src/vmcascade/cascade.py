"""Rate-distortion-cost region of the three-node cascade with a vending machine.

For a test channel p(x1, a, u | x, y) and decoder f(u, z) the region holds
every (R1, R2) with

    R1 >= I(X; X1, A, U | Y)
    R2 >= I(X, Y; A) + I(X, Y; U | A, Z)

under p(x, y) p(x1, a, u | x, y) p(z | a, y).  The lossless version
(Hamming, D1 = D2 = 0) takes U = X1 = X.

Adaptive actions (depending also on past Z samples) give the same region,
so these evaluators and optimizers cover that setting unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, Infeasible
from .model import Budget, CascadeModel, expected_cost, expected_distortion
from .objectives import FEAS_TOL, cascade_lossless_objective, cascade_objective
from .prob import (ConditionalChannel, JointDistribution, compose, conditional_entropy,
                   conditional_mutual_information)
from .search import Engine, SearchConfig


@dataclass(frozen=True)
class RegionPoint:
    r1_min: float
    r2_min: float
    d1: float
    d2: float
    cost: float

    def feasible(self, budget: Budget, tol: float = 1e-9) -> bool:
        return (self.d1 <= budget.d1 + tol and self.d2 <= budget.d2 + tol
                and self.cost <= budget.gamma + tol)


@dataclass(frozen=True, eq=False)
class CascadeTestChannel:
    """p(x1, a, u | x, y) plus a decode table f[u, z] -> x2.

    ``decode=None`` means: use the posterior-optimal reproduction for each
    (u, z), which is what the optimizer does.
    """

    ch: ConditionalChannel
    decode: np.ndarray | None = None

    def __post_init__(self):
        if self.ch.given_names != ("X", "Y") or self.ch.to_names != ("X1", "A", "U"):
            raise ConfigurationError("cascade test channel must be p(X1, A, U | X, Y)")
        if self.decode is not None:
            dec = np.asarray(self.decode)
            if dec.shape[0] != self.nu or not np.issubdtype(dec.dtype, np.integer):
                raise ConfigurationError("decode must be an integer table indexed [u, z]")
            object.__setattr__(self, "decode", dec)

    @classmethod
    def from_array(cls, mass, decode=None) -> "CascadeTestChannel":
        return cls(ConditionalChannel.from_array(("X", "Y"), ("X1", "A", "U"), mass), decode)

    nu = property(lambda self: self.ch.to[2].size)

    def theta(self) -> np.ndarray:
        return np.ascontiguousarray(self.ch.mass, dtype=float).ravel()


def _check_channel(m: CascadeModel, t: CascadeTestChannel):
    nx, ny = m.nx, m.ny
    shape = (nx, ny, m.n1, m.na)
    if t.ch.mass.shape[:4] != shape:
        raise ConfigurationError(f"test channel shape {t.ch.mass.shape} incompatible with model {shape}")
    if t.nu > m.u_bound:
        raise ConfigurationError(f"|U| = {t.nu} exceeds the cardinality bound {m.u_bound}")
    if t.decode is not None:
        if t.decode.shape != (t.nu, m.nz):
            raise ConfigurationError("decode table must cover U x Z")
        if t.decode.min() < 0 or t.decode.max() >= m.n2:
            raise ConfigurationError("decode entries outside the X2 alphabet")


def _cascade_joint(m: CascadeModel, t: CascadeTestChannel) -> JointDistribution:
    return compose(compose(m.source, t.ch), m.vm)


def optimal_decode(m: CascadeModel, t: CascadeTestChannel) -> np.ndarray:
    """f(u, z) minimizing posterior expected d2; ties go to the smallest index."""
    joint = _cascade_joint(m, t)
    post = joint.mass.sum(axis=(1, 2, 3))        # [x, u, z]
    risk = np.einsum("xuz,xk->uzk", post, m.d2)
    return risk.argmin(axis=2)


def eval_cascade_point(m: CascadeModel, t: CascadeTestChannel) -> RegionPoint:
    """Rate bounds, distortions and cost for one test channel.

    A forbidden action with positive mass yields ``cost = inf``.
    """
    _check_channel(m, t)
    joint = _cascade_joint(m, t)       # variables X, Y, X1, A, U, Z
    r1 = conditional_mutual_information(joint, "X", ("X1", "A", "U"), "Y")
    r2 = (conditional_mutual_information(joint, ("X", "Y"), "A")
          + conditional_mutual_information(joint, ("X", "Y"), "U", ("A", "Z")))
    decode = optimal_decode(m, t) if t.decode is None else t.decode
    pxuz = joint.mass.sum(axis=(1, 2, 3))
    d2 = float(sum(pxuz[:, u, z] @ m.d2[:, decode[u, z]]
                   for u in range(t.nu) for z in range(m.nz)))
    return RegionPoint(r1, r2, expected_distortion(joint, m.d1, "X", "X1"), d2,
                       expected_cost(joint, m.cost))


def eval_cascade_lossless(m: CascadeModel, action: ConditionalChannel) -> RegionPoint:
    """Lossless bounds I(X;A|Y) + H(X|A,Y) and I(X,Y;A) + H(X|A,Z)."""
    if action.given_names != ("X", "Y") or action.to_names != ("A",):
        raise ConfigurationError("action channel must be p(A | X, Y)")
    joint = compose(compose(m.source, action), m.vm)
    r1 = (conditional_mutual_information(joint, "X", "A", "Y")
          + conditional_entropy(joint, "X", ("A", "Y")))
    r2 = (conditional_mutual_information(joint, ("X", "Y"), "A")
          + conditional_entropy(joint, "X", ("A", "Z")))
    return RegionPoint(r1, r2, 0.0, 0.0, expected_cost(joint, m.cost))


def lossless_test_channel(m: CascadeModel, action: ConditionalChannel) -> CascadeTestChannel:
    """Embed p(a|x,y) as the test channel U := X, X1 := X, f(u, z) := u."""
    if m.n1 != m.nx or m.n2 != m.nx:
        raise ConfigurationError("lossless embedding needs reconstruction alphabets equal to X")
    nx, ny, na = m.nx, m.ny, m.na
    mass = np.zeros((nx, ny, nx, na, nx))
    for x in range(nx):
        mass[x, :, x, :, x] = action.mass[x]
    decode = np.repeat(np.arange(nx)[:, None], m.nz, axis=1)
    return CascadeTestChannel.from_array(mass, decode)


def _model_arrays(m: CascadeModel):
    vm = np.ascontiguousarray(m.vm.mass)
    return (np.ascontiguousarray(m.source.mass), vm, np.ascontiguousarray(m.d1),
            np.ascontiguousarray(m.d2), np.ascontiguousarray(m.cost))


def cascade_kernel_point(m: CascadeModel, theta: np.ndarray, nu: int) -> RegionPoint:
    """RegionPoint from the compiled kernel (optimal decode)."""
    pxy, vm, d1, d2, lam = _model_arrays(m)
    r1, r2, e1, e2, cost, forb = kernels.cascade_terms(np.ascontiguousarray(theta, dtype=float),
                                                       pxy, vm, d1, d2, lam, nu)
    return RegionPoint(r1, r2, e1, e2, math.inf if forb > 0 else cost)


def _require_feasible_budget(m, budget: Budget):
    finite = np.isfinite(m.cost)
    if not finite.any() or m.cost[finite].min() > budget.gamma:
        raise Infeasible(f"no action has cost <= Γ = {budget.gamma}")


def _cascade_search(m: CascadeModel, budget: Budget, eta: float, search: SearchConfig, nu: int,
                    initial=()):
    """Kernel-level search over channels with |U| = nu (no bound check)."""
    pxy, vm, d1, d2, lam = _model_arrays(m)
    data = (pxy, vm, d1, d2, lam, nu, float(eta), float(budget.d1), float(budget.d2),
            float(budget.gamma))
    row = m.n1 * m.na * nu
    engine = Engine(cascade_objective, data, [row] * (m.nx * m.ny), search)
    out = engine.run([np.ravel(t) for t in initial])
    if out is None:
        raise Infeasible("no feasible test channel found for the budget")
    return out


def optimize_cascade(m: CascadeModel, budget: Budget, eta: float = 1.0,
                     search: SearchConfig = SearchConfig(), initial=()):
    """Approximately minimize r1_min + eta * r2_min over feasible test channels.

    Returns ``(RegionPoint, CascadeTestChannel)``; raises ``Infeasible`` when
    no start reaches the budget.  ``initial`` accepts extra starting
    channels (arrays shaped like the test channel).
    """
    if eta < 0:
        raise ConfigurationError("eta must be >= 0")
    _require_feasible_budget(m, budget)
    nu = search.u_size or m.u_bound
    if nu > m.u_bound:
        raise ConfigurationError(f"u_size {nu} exceeds the cardinality bound {m.u_bound}")
    out = _cascade_search(m, budget, eta, search, nu, initial)
    mass = out.theta.reshape(m.nx, m.ny, m.n1, m.na, nu)
    chan = CascadeTestChannel.from_array(mass)
    chan = CascadeTestChannel(chan.ch, optimal_decode(m, chan))
    return eval_cascade_point(m, chan), chan


def optimize_cascade_lossless(m: CascadeModel, gamma: float, eta: float = 1.0,
                              search: SearchConfig = SearchConfig()):
    """Minimize the lossless weighted sum over p(a | x, y) with E[Λ(A)] <= gamma."""
    budget = Budget(gamma=gamma)
    _require_feasible_budget(m, budget)
    data = (np.ascontiguousarray(m.source.mass), np.ascontiguousarray(m.vm.mass),
            np.ascontiguousarray(m.cost), float(eta), float(gamma))
    engine = Engine(cascade_lossless_objective, data, [m.na] * (m.nx * m.ny), search)
    out = engine.run()
    if out is None:
        raise Infeasible("no feasible action channel found for the budget")
    action = ConditionalChannel.from_array(("X", "Y"), ("A",), out.theta.reshape(m.nx, m.ny, m.na))
    return eval_cascade_lossless(m, action), action


def cascade_objective_value(point: RegionPoint, eta: float) -> float:
    return point.r1_min + eta * point.r2_min


@dataclass(frozen=True)
class BoundaryTrace:
    """Points found by weighted-sum sweeps, and their lower convex envelope."""

    etas: tuple[float, ...]
    found: tuple[RegionPoint, ...]
    envelope: tuple[tuple[float, float], ...]


def lower_convex_envelope(pairs) -> list[tuple[float, float]]:
    """Lower-left convex hull of (r1, r2) pairs, sorted by r1."""
    pts = sorted(set((float(a), float(b)) for a, b in pairs))
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    # keep the decreasing (Pareto) part only
    out = []
    for p in hull:
        if not out or p[1] < out[-1][1]:
            out.append(p)
    return out


def trace_cascade_boundary(m: CascadeModel, budget: Budget, etas,
                           search: SearchConfig = SearchConfig()) -> BoundaryTrace:
    """Weighted-sum sweep; each run also starts from every earlier witness."""
    found, witnesses = [], []
    for eta in etas:
        point, chan = optimize_cascade(m, budget, eta, search, initial=witnesses)
        found.append(point)
        witnesses.append(chan.ch.mass)
    env = lower_convex_envelope((p.r1_min, p.r2_min) for p in found)
    return BoundaryTrace(tuple(float(e) for e in etas), tuple(found), tuple(env))


__all__ = [
    "BoundaryTrace", "CascadeTestChannel", "FEAS_TOL", "RegionPoint", "cascade_kernel_point",
    "eval_cascade_lossless", "eval_cascade_point", "lossless_test_channel",
    "lower_convex_envelope", "optimal_decode", "optimize_cascade", "optimize_cascade_lossless",
    "trace_cascade_boundary",
]
