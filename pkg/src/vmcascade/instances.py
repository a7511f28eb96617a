"""Seeded random models and distributions for tests and cross-checks."""
from __future__ import annotations

import numpy as np

from .model import Budget, BroadcastModel, CascadeModel
from .prob import ConditionalChannel, JointDistribution

NAMES = ("X", "Y", "Z", "A", "U")


def random_pmf(rng: np.random.Generator, shape, sparsity: float = 0.0) -> np.ndarray:
    """Dirichlet(1) pmf over ``shape``; ``sparsity`` zeroes that fraction of cells."""
    size = int(np.prod(shape))
    p = rng.dirichlet(np.ones(size))
    if sparsity > 0:
        p[rng.random(size) < sparsity] = 0.0
        if p.sum() == 0:
            p[rng.integers(size)] = 1.0
        p /= p.sum()
    return p.reshape(shape)


def random_conditional(rng, given_shape, n_out: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_out), size=tuple(given_shape))


def random_joint(rng, max_size: int = 4, n_vars: int = 3, sparsity: float = 0.0) -> JointDistribution:
    sizes = tuple(int(s) for s in rng.integers(1, max_size + 1, size=n_vars))
    return JointDistribution.from_array(NAMES[:n_vars], random_pmf(rng, sizes, sparsity))


def random_action(rng, nx: int, ny: int | None, na: int) -> ConditionalChannel:
    if ny is None:
        return ConditionalChannel.from_array(("X",), ("A",), random_conditional(rng, (nx,), na))
    return ConditionalChannel.from_array(("X", "Y"), ("A",), random_conditional(rng, (nx, ny), na))


def random_cascade_model(rng, nx: int = 2, ny: int = 2, na: int = 2, nz: int = 2,
                         free_action: bool = True) -> CascadeModel:
    """Random p(x,y) and p(z|a,y); costs 0..1 with action 0 free when asked."""
    cost = rng.uniform(0.0, 1.0, na)
    if free_action:
        cost[0] = 0.0
    return CascadeModel.from_arrays(random_pmf(rng, (nx, ny)),
                                    random_conditional(rng, (na, ny), nz), cost)


def random_degraded_model(rng, nx: int = 2, ny: int = 2, na: int = 2, nz: int = 2,
                          free_action: bool = True) -> BroadcastModel:
    cost = rng.uniform(0.0, 1.0, na)
    if free_action:
        cost[0] = 0.0
    return BroadcastModel.degraded_from(random_pmf(rng, (nx,)),
                                        random_conditional(rng, (na, nx), ny),
                                        random_conditional(rng, (na, ny), nz), cost)


def random_budget(rng) -> Budget:
    """Γ in [0.2, 0.8], D1 and D2 in [0.02, 0.2]."""
    return Budget(gamma=float(rng.uniform(0.2, 0.8)), d1=float(rng.uniform(0.02, 0.2)),
                  d2=float(rng.uniform(0.02, 0.2)))


def random_binary_cascade(seed: int):
    """Binary cascade instance with a budget that the lossless channel meets."""
    rng = np.random.default_rng(seed)
    m = CascadeModel.from_arrays(random_pmf(rng, (2, 2)), random_conditional(rng, (2, 2), 2),
                                 np.array([0.0, 1.0]))
    return m, random_budget(rng), float(rng.uniform(0.25, 2.0))


def random_binary_cr(seed: int):
    """Binary degraded broadcast instance, budget and weights (w1, w2, wb)."""
    rng = np.random.default_rng(seed)
    m = BroadcastModel.degraded_from(random_pmf(rng, (2,)), random_conditional(rng, (2, 2), 2),
                                     random_conditional(rng, (2, 2), 2), np.array([0.0, 1.0]))
    budget = random_budget(rng)
    return m, budget, tuple(float(w) for w in rng.uniform(0.2, 1.5, 3))
