"""Finite-alphabet distributions and information measures (bits)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, UsageError

NORM_TOL = 1e-9


@dataclass(frozen=True)
class Alphabet:
    name: str
    size: int

    def __post_init__(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise ConfigurationError(f"alphabet {self.name!r}: size must be a positive integer")


def _alphabets(spec) -> tuple[Alphabet, ...]:
    out = []
    for item in spec:
        out.append(item if isinstance(item, Alphabet) else Alphabet(*item))
    names = [a.name for a in out]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate variable names in {names}")
    return tuple(out)


def _check_table(mass: np.ndarray, shape: tuple[int, ...], what: str) -> np.ndarray:
    mass = np.asarray(mass, dtype=float)
    if mass.shape != shape:
        raise ConfigurationError(f"{what}: table shape {mass.shape} != declared {shape}")
    if np.isnan(mass).any():
        raise ConfigurationError(f"{what}: NaN entries")
    if (mass < 0).any():
        raise ConfigurationError(f"{what}: negative probability")
    return mass


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense pmf over an ordered list of named finite variables.

    Tables within ``NORM_TOL`` of unit mass are renormalized exactly;
    anything further off is rejected.
    """

    variables: tuple[Alphabet, ...]
    mass: np.ndarray

    def __post_init__(self):
        variables = _alphabets(self.variables)
        shape = tuple(a.size for a in variables)
        mass = _check_table(self.mass, shape, "joint distribution")
        total = mass.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ConfigurationError(f"joint distribution sums to {total!r}, not 1")
        mass = mass / total
        mass.setflags(write=False)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_array(cls, names: Sequence[str], mass) -> "JointDistribution":
        mass = np.asarray(mass, dtype=float)
        if len(names) != mass.ndim:
            raise ConfigurationError("one name per table axis required")
        return cls(tuple(Alphabet(n, s) for n, s in zip(names, mass.shape)), mass)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.variables)

    def axes(self, names: Iterable[str]) -> tuple[int, ...]:
        lookup = {n: i for i, n in enumerate(self.names)}
        try:
            return tuple(lookup[n] for n in names)
        except KeyError as exc:
            raise ConfigurationError(f"unknown variable {exc.args[0]!r}; have {self.names}") from None

    def alphabet(self, name: str) -> Alphabet:
        return self.variables[self.axes([name])[0]]


@dataclass(frozen=True, eq=False)
class ConditionalChannel:
    """p(to | given) stored as a table indexed ``[*given, *to]``."""

    given: tuple[Alphabet, ...]
    to: tuple[Alphabet, ...]
    mass: np.ndarray

    def __post_init__(self):
        given = _alphabets(self.given)
        to = _alphabets(self.to)
        _alphabets(given + to)
        shape = tuple(a.size for a in given + to)
        mass = _check_table(self.mass, shape, "conditional channel")
        flat = mass.reshape(int(np.prod([a.size for a in given], dtype=int)), -1)
        sums = flat.sum(axis=1)
        bad = np.abs(sums - 1.0) > NORM_TOL
        if bad.any():
            raise ConfigurationError(
                f"conditional channel slice sums to {sums[bad][0]!r}, not 1")
        mass = (flat / sums[:, None]).reshape(shape)
        mass.setflags(write=False)
        object.__setattr__(self, "given", given)
        object.__setattr__(self, "to", to)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_array(cls, given: Sequence[str], to: Sequence[str], mass) -> "ConditionalChannel":
        mass = np.asarray(mass, dtype=float)
        names = list(given) + list(to)
        if len(names) != mass.ndim:
            raise ConfigurationError("one name per table axis required")
        alph = [Alphabet(n, s) for n, s in zip(names, mass.shape)]
        return cls(tuple(alph[:len(given)]), tuple(alph[len(given):]), mass)

    @property
    def given_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.given)

    @property
    def to_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.to)


def _as_names(names) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


def _marginal_mass(d: JointDistribution, keep: Sequence[str]) -> np.ndarray:
    ax = d.axes(keep)
    drop = tuple(i for i in range(len(d.variables)) if i not in ax)
    m = d.mass.sum(axis=drop) if drop else d.mass
    # sum() keeps remaining axes in their original order; permute to `keep` order
    order = sorted(ax)
    return np.transpose(m, [order.index(i) for i in ax])


def marginalize(d: JointDistribution, keep) -> JointDistribution:
    keep = _as_names(keep)
    if not keep:
        raise UsageError("marginalize needs at least one variable to keep")
    if len(set(keep)) != len(keep):
        raise UsageError(f"repeated names in {keep}")
    m = _marginal_mass(d, keep)
    return JointDistribution(tuple(d.alphabet(n) for n in keep), m / m.sum())


def _plogp_sum(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(d: JointDistribution, subset) -> float:
    subset = _as_names(subset)
    if not subset:
        raise UsageError("entropy of an empty variable set")
    return max(_plogp_sum(_marginal_mass(d, subset).ravel()), 0.0)


def _entropy_or_zero(d, names) -> float:
    return entropy(d, names) if names else 0.0


def conditional_mutual_information(d: JointDistribution, a, b, given=()) -> float:
    """I(a; b | given) via H(a,g) + H(b,g) - H(a,b,g) - H(g), clamped at 0."""
    a, b, given = _as_names(a), _as_names(b), _as_names(given)
    if not a or not b:
        raise UsageError("mutual information needs nonempty groups")
    sa, sb, sg = set(a), set(b), set(given)
    if sa & sb or sa & sg or sb & sg:
        raise UsageError(f"groups overlap: {a} / {b} / {given}")
    d.axes(a + b + given)
    val = (_entropy_or_zero(d, a + given) + _entropy_or_zero(d, b + given)
           - entropy(d, a + b + given) - _entropy_or_zero(d, given))
    return max(val, 0.0)


def conditional_entropy(d: JointDistribution, a, given=()) -> float:
    a, given = _as_names(a), _as_names(given)
    return max(entropy(d, a + given) - _entropy_or_zero(d, given), 0.0)


def compose(base: JointDistribution, ch: ConditionalChannel) -> JointDistribution:
    """Joint of ``base`` followed by ``ch``; new variables are appended."""
    clash = set(ch.to_names) & set(base.names)
    if clash:
        raise UsageError(f"channel outputs {sorted(clash)} already present in base")
    gax = base.axes(ch.given_names)
    for name, alph in zip(ch.given_names, ch.given):
        if base.alphabet(name).size != alph.size:
            raise UsageError(f"alphabet size mismatch for {name!r}")
    nb = len(base.variables)
    # move the channel's conditioning axes into base order, then broadcast
    order = np.argsort(gax)
    cm = np.transpose(ch.mass, list(order) + list(range(len(gax), ch.mass.ndim)))
    shape = [1] * nb + [a.size for a in ch.to]
    for g in sorted(gax):
        shape[g] = base.variables[g].size
    cm = cm.reshape(shape)
    bm = base.mass.reshape(base.mass.shape + (1,) * len(ch.to))
    mass = bm * cm
    return JointDistribution(base.variables + ch.to, mass / mass.sum())


def is_markov_chain(d: JointDistribution, a, b, c, tol: float = 1e-9) -> bool:
    """True iff a - b - c, i.e. I(a; c | b) <= tol."""
    return conditional_mutual_information(d, a, c, b) <= tol


def binary_entropy(p) -> np.ndarray | float:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0)
              + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return float(h) if h.ndim == 0 else h
