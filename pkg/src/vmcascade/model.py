"""Network descriptions: cascade, cascade-broadcast and the switching example.

Variable names are fixed across the package: ``X`` source, ``Y`` side
information at Node 2, ``Z`` side information at Node 3, ``A`` action,
``X1``/``X2`` reconstructions, ``U`` auxiliary, ``W`` switched side
information.  Forbidden actions carry cost ``math.inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .prob import Alphabet, ConditionalChannel, JointDistribution, _marginal_mass

FORBIDDEN = math.inf
DEGRADED_TOL = 1e-9


def hamming(n: int, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    return (np.arange(n)[:, None] != np.arange(m)[None, :]).astype(float)


def _cost_table(cost, na: int) -> np.ndarray:
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (na,):
        raise ConfigurationError(f"cost table shape {cost.shape}, expected ({na},)")
    if np.isnan(cost).any() or (cost < 0).any():
        raise ConfigurationError("cost entries must be >= 0 (inf marks a forbidden action)")
    if np.isinf(cost).all():
        raise ConfigurationError("every action is forbidden")
    return cost


def _distortion_table(d, nx: int, what: str) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != nx:
        raise ConfigurationError(f"{what}: shape {d.shape} does not start with |X|={nx}")
    if not np.isfinite(d).all() or (d < 0).any():
        raise ConfigurationError(f"{what}: entries must be finite and >= 0")
    return d


@dataclass(frozen=True)
class Budget:
    """Cost budget Γ and distortion budgets D1, D2 (``inf`` = unconstrained)."""

    gamma: float = math.inf
    d1: float = math.inf
    d2: float = math.inf

    def __post_init__(self):
        for k in ("gamma", "d1", "d2"):
            v = getattr(self, k)
            if not v >= 0:
                raise ConfigurationError(f"budget {k} must be >= 0, got {v!r}")


@dataclass(frozen=True, eq=False)
class CascadeModel:
    source: JointDistribution      # (X, Y)
    vm: ConditionalChannel         # p(z | a, y)
    cost: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        if self.source.names != ("X", "Y"):
            raise ConfigurationError(f"cascade source must be over (X, Y), got {self.source.names}")
        if self.vm.given_names != ("A", "Y") or self.vm.to_names != ("Z",):
            raise ConfigurationError("vending machine must be p(Z | A, Y)")
        if self.vm.given[1].size != self.source.variables[1].size:
            raise ConfigurationError("|Y| differs between source and vending machine")
        nx = self.nx
        object.__setattr__(self, "cost", _cost_table(self.cost, self.vm.given[0].size))
        object.__setattr__(self, "d1", _distortion_table(self.d1, nx, "d1"))
        object.__setattr__(self, "d2", _distortion_table(self.d2, nx, "d2"))

    @classmethod
    def from_arrays(cls, pxy, p_z_ay, cost, d1=None, d2=None) -> "CascadeModel":
        pxy = np.asarray(pxy, dtype=float)
        nx = pxy.shape[0]
        return cls(JointDistribution.from_array(("X", "Y"), pxy),
                   ConditionalChannel.from_array(("A", "Y"), ("Z",), p_z_ay),
                   cost,
                   hamming(nx) if d1 is None else d1,
                   hamming(nx) if d2 is None else d2)

    nx = property(lambda self: self.source.variables[0].size)
    ny = property(lambda self: self.source.variables[1].size)
    na = property(lambda self: self.vm.given[0].size)
    nz = property(lambda self: self.vm.to[0].size)
    n1 = property(lambda self: self.d1.shape[1])
    n2 = property(lambda self: self.d2.shape[1])

    @property
    def dmax(self) -> float:
        return float(max(self.d1.max(), self.d2.max()))

    @property
    def forbidden(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(np.isinf(self.cost)))

    @property
    def u_bound(self) -> int:
        """Auxiliary cardinality sufficient for optimality: |X||Y||A| + 3."""
        return self.nx * self.ny * self.na + 3


@dataclass(frozen=True, eq=False)
class BroadcastModel:
    source: JointDistribution      # (X,)
    vm: ConditionalChannel         # p(y, z | a, x)
    cost: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    degraded: bool = False

    def __post_init__(self):
        if self.source.names != ("X",):
            raise ConfigurationError("broadcast source must be over (X,)")
        if self.vm.given_names != ("A", "X") or self.vm.to_names != ("Y", "Z"):
            raise ConfigurationError("vending machine must be p(Y, Z | A, X)")
        if self.vm.given[1].size != self.nx:
            raise ConfigurationError("|X| differs between source and vending machine")
        object.__setattr__(self, "cost", _cost_table(self.cost, self.na))
        object.__setattr__(self, "d1", _distortion_table(self.d1, self.nx, "d1"))
        object.__setattr__(self, "d2", _distortion_table(self.d2, self.nx, "d2"))
        if self.degraded:
            res = degradedness_residual(self.vm.mass)
            if res > DEGRADED_TOL:
                raise ConfigurationError(
                    f"flagged degraded but p(y,z|a,x) != p(y|a,x)p(z|a,y): residual {res:.3g}")

    @classmethod
    def from_arrays(cls, px, p_yz_ax, cost, d1=None, d2=None, degraded=False) -> "BroadcastModel":
        px = np.asarray(px, dtype=float)
        nx = px.shape[0]
        return cls(JointDistribution.from_array(("X",), px),
                   ConditionalChannel.from_array(("A", "X"), ("Y", "Z"), p_yz_ax),
                   cost,
                   hamming(nx) if d1 is None else d1,
                   hamming(nx) if d2 is None else d2,
                   degraded)

    @classmethod
    def degraded_from(cls, px, p_y_ax, p_z_ay, cost, d1=None, d2=None) -> "BroadcastModel":
        """Build p(y,z|a,x) = p(y|a,x) p(z|a,y); arrays indexed [a,x,y] and [a,y,z]."""
        p_y_ax = np.asarray(p_y_ax, dtype=float)
        p_z_ay = np.asarray(p_z_ay, dtype=float)
        joint = p_y_ax[:, :, :, None] * p_z_ay[:, None, :, :]
        return cls.from_arrays(px, joint, cost, d1, d2, degraded=True)

    nx = property(lambda self: self.source.variables[0].size)
    na = property(lambda self: self.vm.given[0].size)
    ny = property(lambda self: self.vm.to[0].size)
    nz = property(lambda self: self.vm.to[1].size)
    n1 = property(lambda self: self.d1.shape[1])
    n2 = property(lambda self: self.d2.shape[1])

    @property
    def dmax(self) -> float:
        return float(max(self.d1.max(), self.d2.max()))

    @property
    def forbidden(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(np.isinf(self.cost)))

    def degraded_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (p(y|a,x) as [a,x,y], p(z|a,y) as [a,y,z])."""
        return _factor(self.vm.mass)


def _factor(p_yz_ax: np.ndarray, weights: np.ndarray | None = None):
    na, nx, ny, nz = p_yz_ax.shape
    p_y = p_yz_ax.sum(axis=3)
    w = np.ones(nx) if weights is None else weights
    num = np.einsum("x,axyz->ayz", w, p_yz_ax)
    den = np.einsum("x,axy->ay", w, p_y)
    with np.errstate(invalid="ignore", divide="ignore"):
        p_z = np.where(den[..., None] > 0, num / den[..., None], 1.0 / nz)
    return p_y, p_z


def degradedness_residual(p_yz_ax: np.ndarray) -> float:
    """Max deviation of p(y,z|a,x) from the factorization p(y|a,x) p(z|a,y)."""
    p_y, p_z = _factor(np.asarray(p_yz_ax, dtype=float))
    rebuilt = p_y[:, :, :, None] * p_z[:, None, :, :]
    return float(np.abs(rebuilt - p_yz_ax).max())


@dataclass(frozen=True, eq=False)
class SwitchingModel:
    """Action-controlled switch routing W to Node 2 and/or Node 3.

    Actions 0..3 deliver W to nobody, Node 2, Node 3, both.  Y and Z take
    values in W's alphabet plus a trailing erasure symbol.
    """

    source_pair: JointDistribution   # (X, W)
    lambdas: tuple[float, float, float, float]

    def __post_init__(self):
        if self.source_pair.names != ("X", "W"):
            raise ConfigurationError("switching source must be over (X, W)")
        lam = tuple(float(v) for v in self.lambdas)
        _cost_table(lam, 4)
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def from_arrays(cls, pxw, lambdas) -> "SwitchingModel":
        return cls(JointDistribution.from_array(("X", "W"), pxw), tuple(lambdas))

    nx = property(lambda self: self.source_pair.variables[0].size)
    nw = property(lambda self: self.source_pair.variables[1].size)

    @property
    def erasure(self) -> int:
        return self.nw

    @property
    def cost(self) -> np.ndarray:
        return np.asarray(self.lambdas, dtype=float)

    def switch_channel(self) -> np.ndarray:
        """p(y, z | a, x) indexed [a, x, y, z] per the switch table."""
        pxw = self.source_pair.mass
        px = pxw.sum(axis=1)
        p_w_x = pxw / np.where(px > 0, px, 1.0)[:, None]
        p_w_x[px == 0] = 1.0 / self.nw
        nx, nw, e = self.nx, self.nw, self.erasure
        out = np.zeros((4, nx, nw + 1, nw + 1))
        for x in range(nx):
            out[0, x, e, e] = 1.0
            out[1, x, :nw, e] = p_w_x[x]
            out[2, x, e, :nw] = p_w_x[x]
            out[3, x, np.arange(nw), np.arange(nw)] = p_w_x[x]
        return out

    def to_broadcast(self) -> BroadcastModel:
        px = self.source_pair.mass.sum(axis=1)
        return BroadcastModel.from_arrays(px, self.switch_channel(), self.cost)


def validate(model):
    """Re-run every structural check and return the model; idempotent."""
    if isinstance(model, CascadeModel):
        return CascadeModel(model.source, model.vm, model.cost, model.d1, model.d2)
    if isinstance(model, BroadcastModel):
        return BroadcastModel(model.source, model.vm, model.cost, model.d1, model.d2,
                              model.degraded)
    if isinstance(model, SwitchingModel):
        return SwitchingModel(model.source_pair, model.lambdas)
    raise ConfigurationError(f"not a model: {type(model).__name__}")


def expected_cost(joint: JointDistribution, cost, action: str = "A") -> float:
    """E[Λ(A)]; ``inf`` if a forbidden action has positive probability."""
    pa = _marginal_mass(joint, (action,))
    cost = np.asarray(cost, dtype=float)
    if pa.shape != cost.shape:
        raise ConfigurationError("cost table does not match the action alphabet")
    forbidden = np.isinf(cost)
    if (pa[forbidden] > 0).any():
        return math.inf
    return float(pa[~forbidden] @ cost[~forbidden])


def expected_distortion(joint: JointDistribution, table, source: str = "X",
                        recon: str = "X1") -> float:
    pxx = _marginal_mass(joint, (source, recon))
    table = np.asarray(table, dtype=float)
    if pxx.shape != table.shape:
        raise ConfigurationError("distortion table does not match alphabets")
    return float((pxx * table).sum())


__all__ = [
    "Alphabet", "Budget", "BroadcastModel", "CascadeModel", "FORBIDDEN", "SwitchingModel",
    "degradedness_residual", "expected_cost", "expected_distortion", "hamming", "validate",
]
