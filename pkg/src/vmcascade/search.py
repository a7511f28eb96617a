"""Multi-start local search over products of probability simplices.

The decision vector ``theta`` is a concatenation of rows, each a pmf.
Every start runs a soft-penalty warm phase until the budget holds, then
descends with infeasible moves rejected.  Moves either re-pick a whole
row from the lattice of ``quantum``-compositions (when that lattice is
small) or transfer mass ``h`` between two entries of one row, with ``h``
halved whenever a full sweep makes no progress.  When single-row lattice
moves stall, pairs of rows are re-picked jointly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .errors import ConfigurationError
from .objectives import FEAS_TOL

_EPS = 1e-13


@dataclass(frozen=True)
class SearchConfig:
    starts: int = 64
    sweeps: int = 200
    seed: int = 0
    u_size: int | None = None        # cascade auxiliary alphabet; None = cardinality bound
    quantum: float | None = None     # lattice step for starts and the first descent level
    refine: bool = True              # continue below the lattice step
    min_step: float = 1e-4
    initial_step: float = 0.25
    row_enum_cap: int = 4096

    def __post_init__(self):
        if self.starts < 1 or self.sweeps < 1:
            raise ConfigurationError("starts and sweeps must be >= 1")
        if self.quantum is not None:
            n = round(1.0 / self.quantum)
            if not 0 < self.quantum <= 0.5 or abs(n * self.quantum - 1.0) > 1e-9:
                raise ConfigurationError("quantum must be 1/n for an integer n >= 2")
        if self.u_size is not None and self.u_size < 1:
            raise ConfigurationError("u_size must be >= 1")


@dataclass
class Outcome:
    theta: np.ndarray
    objective: float
    cost: float
    feasible_starts: int


@jit(cache=False)
def _score(fn, data, theta, penalty, tol):
    obj, viol, cost = fn(theta, data)
    if penalty > 0.0:
        return obj + penalty * viol, cost, True
    return obj, cost, viol <= tol


@jit(cache=False)
def _better(s, c, bs, bc):
    if s < bs - _EPS:
        return True
    return s <= bs + _EPS and c < bc - _EPS


@jit(cache=False)
def pair_pass(fn, data, theta, lo, hi, h, penalty, tol, bs, bc):
    """One first-improvement pass over all ordered pairs of a row."""
    moves = 0
    for i in range(lo, hi):
        for j in range(lo, hi):
            if i == j or theta[i] <= 0.0:
                continue
            ti = theta[i]
            tj = theta[j]
            amt = min(h, ti)
            theta[i] = ti - amt if amt < ti else 0.0
            theta[j] = tj + amt
            s, c, ok = _score(fn, data, theta, penalty, tol)
            if ok and _better(s, c, bs, bc):
                bs = s
                bc = c
                moves += 1
            else:
                theta[i] = ti
                theta[j] = tj
    return moves, bs, bc


@jit(cache=False)
def row_pick(fn, data, theta, lo, cands, penalty, tol, bs, bc):
    """Replace row ``lo:lo+L`` with the best lattice candidate, if better."""
    length = cands.shape[1]
    saved = theta[lo:lo + length].copy()
    best = -1
    for k in range(cands.shape[0]):
        theta[lo:lo + length] = cands[k]
        s, c, ok = _score(fn, data, theta, penalty, tol)
        if ok and _better(s, c, bs, bc):
            bs = s
            bc = c
            best = k
    if best >= 0:
        theta[lo:lo + length] = cands[best]
    else:
        theta[lo:lo + length] = saved
    return best, bs, bc


@jit(cache=False)
def pair_row_pick(fn, data, theta, lo1, c1, lo2, c2, penalty, tol, bs, bc):
    """Jointly re-pick two rows from their lattices, if that improves."""
    l1 = c1.shape[1]
    l2 = c2.shape[1]
    s1 = theta[lo1:lo1 + l1].copy()
    s2 = theta[lo2:lo2 + l2].copy()
    b1 = -1
    b2 = -1
    for i in range(c1.shape[0]):
        theta[lo1:lo1 + l1] = c1[i]
        for j in range(c2.shape[0]):
            theta[lo2:lo2 + l2] = c2[j]
            s, c, ok = _score(fn, data, theta, penalty, tol)
            if ok and _better(s, c, bs, bc):
                bs = s
                bc = c
                b1 = i
                b2 = j
    if b1 >= 0:
        theta[lo1:lo1 + l1] = c1[b1]
        theta[lo2:lo2 + l2] = c2[b2]
    else:
        theta[lo1:lo1 + l1] = s1
        theta[lo2:lo2 + l2] = s2
    return b1, bs, bc


def compositions(n: int, length: int) -> np.ndarray:
    """All vectors of ``length`` nonnegative integers summing to ``n`` (lexicographic)."""
    out = []
    for bars in itertools.combinations(range(n + length - 1), length - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(n + length - 1 - prev - 1)
        out.append(row)
    return np.array(out, dtype=np.int64).reshape(-1, length)


def lattice_size(n: int, length: int) -> int:
    return math.comb(n + length - 1, length - 1)


class Engine:
    """Runs multi-start descent for one objective and row layout."""

    def __init__(self, fn, data, row_lengths, config: SearchConfig):
        self.fn = fn
        self.data = data
        self.config = config
        self.rows = []
        lo = 0
        for length in row_lengths:
            self.rows.append((lo, lo + int(length)))
            lo += int(length)
        self.size = lo
        self._lattice: dict[int, np.ndarray] = {}
        if config.quantum is not None:
            n = round(1.0 / config.quantum)
            for length in set(row_lengths):
                if lattice_size(n, length) <= config.row_enum_cap:
                    self._lattice[length] = compositions(n, length).astype(float) / n

    def evaluate(self, theta):
        return self.fn(theta, self.data)

    def random_start(self, rng: np.random.Generator, k: int) -> np.ndarray:
        theta = np.empty(self.size)
        q = self.config.quantum
        for lo, hi in self.rows:
            length = hi - lo
            if q is not None:
                n = round(1.0 / q)
                theta[lo:hi] = rng.multinomial(n, rng.dirichlet(np.ones(length))) / n
            elif k % 2:
                theta[lo:hi] = 0.0
                theta[lo + rng.integers(length)] = 1.0
            else:
                theta[lo:hi] = rng.dirichlet(np.ones(length))
        return theta

    def _descend(self, theta, penalty, budget):
        """Descend at every step level; returns (score, cost, ok, sweeps used)."""
        cfg = self.config
        s, c, ok = _score(self.fn, self.data, theta, penalty, FEAS_TOL)
        if penalty == 0.0 and not ok:
            return s, c, ok, 0
        used = 0
        h = cfg.quantum if cfg.quantum is not None else cfg.initial_step
        while used < budget:
            on_lattice = cfg.quantum is not None and h == cfg.quantum
            improved = False
            for lo, hi in self.rows:
                cands = self._lattice.get(hi - lo) if on_lattice else None
                if cands is not None:
                    k, s, c = row_pick(self.fn, self.data, theta, lo, cands, penalty, FEAS_TOL, s, c)
                    improved |= k >= 0
                else:
                    while True:
                        moves, s, c = pair_pass(self.fn, self.data, theta, lo, hi, h,
                                                penalty, FEAS_TOL, s, c)
                        if moves == 0:
                            break
                        improved = True
            if on_lattice and not improved:
                improved = self._pair_sweep(theta, penalty, s, c)
                if improved:
                    s, c = improved
                    improved = True
            used += 1
            if not improved:
                if on_lattice and not cfg.refine:
                    break
                h /= 2.0
                if h < cfg.min_step:
                    break
        return s, c, True, used

    def _pair_sweep(self, theta, penalty, s, c):
        """Joint moves on every pair of rows whose lattice product is small."""
        cap = self.config.row_enum_cap
        found = False
        for a in range(len(self.rows)):
            ca = self._lattice.get(self.rows[a][1] - self.rows[a][0])
            if ca is None:
                continue
            for b in range(a + 1, len(self.rows)):
                cb = self._lattice.get(self.rows[b][1] - self.rows[b][0])
                if cb is None or ca.shape[0] * cb.shape[0] > cap:
                    continue
                k, s, c = pair_row_pick(self.fn, self.data, theta, self.rows[a][0], ca,
                                        self.rows[b][0], cb, penalty, FEAS_TOL, s, c)
                found |= k >= 0
        return (s, c) if found else None

    def run_start(self, theta):
        cfg = self.config
        obj, viol, cost = self.evaluate(theta)
        if viol > FEAS_TOL:
            for penalty in (10.0, 1e2, 1e3, 1e4, 1e5, 1e6):
                self._descend(theta, penalty, max(cfg.sweeps // 4, 1))
                obj, viol, cost = self.evaluate(theta)
                if viol <= FEAS_TOL:
                    break
            else:
                return None
        s, c, ok, _ = self._descend(theta, 0.0, cfg.sweeps)
        obj, viol, cost = self.evaluate(theta)
        return obj, cost

    def run(self, initial=()) -> Outcome | None:
        """Multi-start search; ``initial`` thetas are tried before random starts."""
        rng = np.random.default_rng(self.config.seed)
        best = None
        feasible = 0
        starts = [np.array(t, dtype=float) for t in initial]
        starts += [self.random_start(rng, k) for k in range(self.config.starts)]
        for theta in starts:
            res = self.run_start(theta)
            if res is None:
                continue
            feasible += 1
            key = (res[0], res[1], tuple(theta))
            if best is None or key < best[0]:
                best = (key, theta.copy())
        if best is None:
            return None
        (obj, cost, _), theta = best
        return Outcome(theta, obj, cost, feasible)
