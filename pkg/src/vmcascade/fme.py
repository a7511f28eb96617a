"""Fourier-Motzkin elimination over rational systems with symbolic parameters.

An inequality reads ``Σ c_v v >= Σ k_p p + k_0`` (or ``>`` when strict),
where ``v`` are rate/split variables and ``p`` are nonnegative symbolic
parameters such as H(X|A,Z).  All arithmetic is exact (``Fraction``).
Variables listed as nonnegative form the domain: elimination adds their
``v >= 0`` rows explicitly; redundancy and equivalence checks assume them.

Parameters are treated as independent nonnegative reals.  Information
measures obey extra relations (e.g. submodularity) that are not assumed
here, so a region identity verified this way holds a fortiori.

Text format, one statement per line, ``#`` starts a comment::

    vars: R1 R2 Rb r1b r1d
    params: I_XA H_X_AY
    nonneg: r1b r1d           # optional, default: every variable
    eliminate: r1b r1d
    r1b + r1d >= H_X_AY
    R1 >= r1d
    target:
    R1 + Rb >= I_XA + H_X_AY

Terms look like ``2*r1b``, ``3/2*R1``, ``-x`` or bare numbers; ``<=`` is
accepted and flipped.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .errors import ConfigurationError, RowCapExceeded, UsageError

ONE = "1"            # key of the constant term in a right-hand side
ROW_CAP = 10_000

Form = tuple[tuple[str, Fraction], ...]


def _form(d: Mapping[str, Fraction]) -> Form:
    return tuple(sorted((k, Fraction(v)) for k, v in d.items() if v != 0))


def _add(acc: dict, form: Iterable[tuple[str, Fraction]], scale: Fraction):
    for k, v in form:
        acc[k] = acc.get(k, Fraction(0)) + scale * v


@dataclass(frozen=True, order=True)
class Inequality:
    lhs: Form          # variables
    rhs: Form          # parameters and the constant ONE
    strict: bool = False

    @classmethod
    def make(cls, lhs: Mapping, rhs: Mapping, strict: bool = False) -> "Inequality":
        return cls(_form(lhs), _form(rhs), strict).normalized()

    def coef(self, var: str) -> Fraction:
        for k, v in self.lhs:
            if k == var:
                return v
        return Fraction(0)

    def normalized(self) -> "Inequality":
        """Scale so the first variable coefficient is ±1 (parametric rows: first rhs term)."""
        lead = self.lhs[0][1] if self.lhs else (self.rhs[0][1] if self.rhs else Fraction(1))
        s = abs(lead)
        if s == 1:
            return self
        return Inequality(tuple((k, v / s) for k, v in self.lhs),
                          tuple((k, v / s) for k, v in self.rhs), self.strict)

    def negated(self) -> "Inequality":
        """The complement: Σ c v < rhs, written as -Σ c v > -rhs (and vice versa)."""
        return Inequality(tuple((k, -v) for k, v in self.lhs),
                          tuple((k, -v) for k, v in self.rhs), not self.strict)

    def rhs_value(self, sample: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for k, v in self.rhs:
            total += v if k == ONE else v * sample[k]
        return total

    def __str__(self):
        def fmt(form):
            if not form:
                return "0"
            out = ""
            for i, (k, v) in enumerate(form):
                mag = abs(v)
                term = str(mag) if k == ONE else (k if mag == 1 else f"{mag}*{k}")
                if i == 0:
                    out = ("-" if v < 0 else "") + term
                else:
                    out += (" - " if v < 0 else " + ") + term
            return out
        op = ">" if self.strict else ">="
        return f"{fmt(self.lhs)} {op} {fmt(self.rhs)}"


@dataclass(frozen=True)
class InequalitySystem:
    variables: tuple[str, ...]
    parameters: tuple[str, ...]
    inequalities: tuple[Inequality, ...]
    nonnegative: frozenset[str] = None

    def __post_init__(self):
        if self.nonnegative is None:
            object.__setattr__(self, "nonnegative", frozenset(self.variables))
        known_v, known_p = set(self.variables), set(self.parameters)
        if known_v & known_p:
            raise ConfigurationError(f"names declared as both variable and parameter: {sorted(known_v & known_p)}")
        if not set(self.nonnegative) <= known_v:
            raise ConfigurationError("nonnegative names must be declared variables")
        for ineq in self.inequalities:
            for k, _ in ineq.lhs:
                if k not in known_v:
                    raise ConfigurationError(f"undeclared variable {k!r} in {ineq}")
            for k, _ in ineq.rhs:
                if k != ONE and k not in known_p:
                    raise ConfigurationError(f"undeclared parameter {k!r} in {ineq}")

    def domain_rows(self) -> list[Inequality]:
        return [Inequality.make({v: 1}, {}) for v in self.variables if v in self.nonnegative]

    def with_rows(self, rows) -> "InequalitySystem":
        return InequalitySystem(self.variables, self.parameters, tuple(rows), self.nonnegative)

    def __str__(self):
        return "\n".join(str(r) for r in self.inequalities)


# ---------------------------------------------------------------- elimination

def _dominates(a: Inequality, b: Inequality) -> bool:
    """a and b share a left side and a's right side exceeds b's for all params >= 0."""
    if a.lhs != b.lhs or (b.strict and not a.strict):
        return False
    diff: dict = {}
    _add(diff, a.rhs, Fraction(1))
    _add(diff, b.rhs, Fraction(-1))
    return all(v >= 0 for v in diff.values())


def _trivially_true(row: Inequality, domain: frozenset) -> bool:
    """Holds for every nonnegative parameter value and every point of the domain."""
    if any(v < 0 or k not in domain for k, v in row.lhs):
        return False
    if row.strict:
        const = dict(row.rhs).get(ONE, Fraction(0))
        return all(v <= 0 for v in dict(row.rhs).values()) and const < 0
    return all(v <= 0 for _, v in row.rhs)


def _prune(rows: Iterable[Inequality], domain: frozenset) -> list[Inequality]:
    unique = sorted(set(r.normalized() for r in rows if not _trivially_true(r, domain)))
    by_lhs: dict[Form, list[Inequality]] = {}
    for r in unique:
        by_lhs.setdefault(r.lhs, []).append(r)
    out = []
    for group in by_lhs.values():
        out.extend(r for r in group if not any(o is not r and _dominates(o, r) for o in group))
    return sorted(out)


def _combine(p: Inequality, n: Inequality, var: str) -> Inequality:
    cp, cn = p.coef(var), -n.coef(var)
    lhs: dict = {}
    rhs: dict = {}
    _add(lhs, p.lhs, cn)
    _add(lhs, n.lhs, cp)
    _add(rhs, p.rhs, cn)
    _add(rhs, n.rhs, cp)
    lhs.pop(var, None)
    return Inequality.make(lhs, rhs, p.strict or n.strict)


def _eliminate_rows(rows: list[Inequality], order: Iterable[str], domain: frozenset,
                    row_cap: int) -> list[Inequality]:
    """Eliminate ``order`` in turn; ``domain`` lists kept nonnegative variables."""
    rows = _prune(rows, domain)
    for var in order:
        pos = [r for r in rows if r.coef(var) > 0]
        neg = [r for r in rows if r.coef(var) < 0]
        keep = [r for r in rows if r.coef(var) == 0]
        if len(keep) + len(pos) * len(neg) > row_cap:
            raise RowCapExceeded(
                f"Fourier-Motzkin row cap {row_cap} exceeded while eliminating {var!r}")
        keep.extend(_combine(p, n, var) for p in pos for n in neg)
        rows = _prune(keep, domain)
    return rows


def fme_eliminate(system: InequalitySystem, drop: Iterable[str], *,
                  include_nonnegativity: bool = True, row_cap: int = ROW_CAP) -> InequalitySystem:
    """Project onto the variables not in ``drop``.

    With ``include_nonnegativity`` the rows ``v >= 0`` for eliminated
    nonnegative variables join the system before elimination.
    """
    drop = list(drop)
    unknown = set(drop) - set(system.variables)
    if unknown:
        raise UsageError(f"cannot eliminate undeclared variables {sorted(unknown)}")
    rows = list(system.inequalities)
    if include_nonnegativity:
        rows += [Inequality.make({v: 1}, {}) for v in drop if v in system.nonnegative]
    remaining = tuple(v for v in system.variables if v not in drop)
    domain = frozenset(system.nonnegative) - set(drop)
    out = _eliminate_rows(rows, drop, domain, row_cap)
    return InequalitySystem(remaining, system.parameters, tuple(out), domain)


# ------------------------------------------------------ parametric feasibility

def infeasibility_conditions(system: InequalitySystem, extra=()) -> list[Inequality]:
    """Parameter-only rows whose joint validity is equivalent to feasibility.

    Eliminates every variable (domain rows included) from the system plus
    ``extra``; the system is feasible at a parameter sample iff every
    returned row ``0 >= rhs`` (``0 > rhs`` when strict) holds there.
    """
    rows = list(system.inequalities) + list(extra) + system.domain_rows()
    out = _eliminate_rows(rows, system.variables, frozenset(), ROW_CAP)
    return [r for r in out if not r.lhs]


def _holds(cond: Inequality, sample) -> bool:
    v = cond.rhs_value(sample)
    return v < 0 if cond.strict else v <= 0


def feasible_at(conditions: list[Inequality], sample) -> bool:
    return all(_holds(c, sample) for c in conditions)


def implied_mask(system: InequalitySystem, ineq: Inequality, samples) -> list[bool]:
    """Per sample: does ``system`` (with its domain) imply ``ineq``?"""
    conds = infeasibility_conditions(system, [ineq.negated()])
    return [not feasible_at(conds, s) for s in samples]


# ------------------------------------------------------------------ sampling

Sampler = Callable[[random.Random, tuple[str, ...]], dict]


def nonnegative_sampler(rng: random.Random, params: tuple[str, ...]) -> dict:
    """Independent nonnegative rationals; roughly one in eight is exactly 0."""
    out = {}
    for p in params:
        out[p] = Fraction(0) if rng.random() < 0.125 else Fraction(rng.randint(1, 2000), rng.randint(1, 97))
    return out


def draw_samples(params, trials: int, seed: int = 0, sampler: Sampler = nonnegative_sampler):
    if trials < 1:
        raise UsageError("trials must be >= 1")
    rng = random.Random(seed)
    return [sampler(rng, tuple(params)) for _ in range(trials)]


def remove_redundant(system: InequalitySystem, sampler: Sampler = nonnegative_sampler,
                     trials: int = 1000, seed: int = 0) -> InequalitySystem:
    """Drop rows implied by the others under every sampled parameter value."""
    samples = draw_samples(system.parameters, trials, seed, sampler)
    kept = _prune(system.inequalities, frozenset(system.nonnegative))
    i = 0
    while i < len(kept):
        others = system.with_rows(kept[:i] + kept[i + 1:])
        if all(implied_mask(others, kept[i], samples)):
            kept.pop(i)
        else:
            i += 1
    return system.with_rows(kept)


@dataclass
class EquivalenceReport:
    equivalent: bool
    trials: int
    counterexample: dict | None = None
    sample_index: int | None = None
    failing: str | None = None
    direction: str | None = None
    note: str = ("parameters sampled as independent nonnegative rationals; "
                 "information-measure relations are not assumed")

    def lines(self) -> list[str]:
        out = [f"{'PASS' if self.equivalent else 'FAIL'}: {self.trials} parameter samples"]
        if not self.equivalent:
            out.append(f"  first counterexample: sample #{self.sample_index} "
                       f"{ {k: str(v) for k, v in (self.counterexample or {}).items()} }")
            out.append(f"  {self.direction}: {self.failing}")
        out.append(f"  note: {self.note}")
        return out


def verify_region_equivalence(a: InequalitySystem, b: InequalitySystem,
                              sampler: Sampler = nonnegative_sampler, trials: int = 1000,
                              seed: int = 0) -> EquivalenceReport:
    """Mutual implication of two polyhedra, checked exactly per parameter sample."""
    if set(a.variables) != set(b.variables):
        raise UsageError(f"variable sets differ: {sorted(a.variables)} vs {sorted(b.variables)}")
    if set(a.nonnegative) != set(b.nonnegative):
        raise UsageError("the two systems declare different nonnegative domains")
    params = tuple(dict.fromkeys(a.parameters + b.parameters))
    samples = draw_samples(params, trials, seed, sampler)
    merged_a = InequalitySystem(a.variables, params, a.inequalities, a.nonnegative)
    merged_b = InequalitySystem(a.variables, params, b.inequalities, a.nonnegative)
    first = None
    for src, dst, label in ((merged_a, merged_b, "not implied by the first system"),
                            (merged_b, merged_a, "not implied by the second system")):
        for row in dst.inequalities:
            mask = implied_mask(src, row, samples)
            if not all(mask):
                k = mask.index(False)
                if first is None or k < first[0]:
                    first = (k, str(row), label)
    if first is None:
        return EquivalenceReport(True, trials)
    k, row, label = first
    return EquivalenceReport(False, trials, samples[k], k, row, label)


# ------------------------------------------------------------------ text I/O

_TERM = re.compile(r"^(?:(?P<num>\d+(?:/\d+)?|\d*\.\d+)\s*\*?\s*)?(?P<name>[A-Za-z_][A-Za-z0-9_]*)?$")


def _parse_side(text: str, variables: set, params: set, lineno: int):
    lhs: dict = {}
    rhs: dict = {}
    expr = text.replace(" ", "")
    pieces = re.findall(r"([+-]?)([^+-]+)", expr)
    if not expr or "".join(s + b for s, b in pieces) != expr:
        raise ConfigurationError(f"line {lineno}: malformed expression {text!r}")
    for sign, body in pieces:
        m = _TERM.match(body)
        if not m or (m.group("num") is None and m.group("name") is None):
            raise ConfigurationError(f"line {lineno}: cannot parse term {body!r}")
        coef = Fraction(m.group("num")) if m.group("num") else Fraction(1)
        if sign == "-":
            coef = -coef
        name = m.group("name")
        if name is None:
            rhs[ONE] = rhs.get(ONE, 0) + coef
        elif name in variables:
            lhs[name] = lhs.get(name, 0) + coef
        elif name in params:
            rhs[name] = rhs.get(name, 0) + coef
        else:
            raise ConfigurationError(f"line {lineno}: undeclared name {name!r}")
    return lhs, rhs


def parse_inequality(line: str, variables, params, lineno: int = 0) -> Inequality:
    if ">=" in line:
        left, right = line.split(">=", 1)
    elif "<=" in line:
        right, left = line.split("<=", 1)
    else:
        raise ConfigurationError(f"line {lineno}: expected '>=' or '<=' in {line!r}")
    lv, lp = _parse_side(left, set(variables), set(params), lineno)
    rv, rp = _parse_side(right, set(variables), set(params), lineno)
    # left - right >= 0, variables on the left and parameters on the right
    lhs = dict(lv)
    _add(lhs, rv.items(), Fraction(-1))
    rhs = {k: -v for k, v in lp.items()}
    _add(rhs, rp.items(), Fraction(1))
    return Inequality.make(lhs, rhs)


@dataclass
class FmeProblem:
    system: InequalitySystem
    eliminate: tuple[str, ...]
    target: InequalitySystem | None = None
    source: str = field(default="")


def parse_fme_text(text: str, source: str = "<text>") -> FmeProblem:
    variables: list[str] = []
    params: list[str] = []
    nonneg = None
    eliminate: list[str] = []
    rows: list[Inequality] = []
    target_rows: list[Inequality] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        key = head.strip().lower()
        if sep and key in ("vars", "params", "nonneg", "eliminate", "target"):
            names = rest.split()
            if key == "vars":
                variables += names
            elif key == "params":
                params += names
            elif key == "nonneg":
                nonneg = (nonneg or []) + names
            elif key == "eliminate":
                eliminate += names
            else:
                if names:
                    raise ConfigurationError(f"line {lineno}: 'target:' takes no arguments")
                target_rows = []
            continue
        ineq = parse_inequality(line, variables, params, lineno)
        (rows if target_rows is None else target_rows).append(ineq)
    nn = frozenset(nonneg) if nonneg is not None else None
    system = InequalitySystem(tuple(variables), tuple(params), tuple(rows), nn)
    bad = set(eliminate) - set(variables)
    if bad:
        raise ConfigurationError(f"eliminate lists undeclared variables {sorted(bad)}")
    target = None
    if target_rows is not None:
        kept = tuple(v for v in variables if v not in eliminate)
        target = InequalitySystem(kept, tuple(params), tuple(target_rows),
                                  frozenset(system.nonnegative) - set(eliminate))
    return FmeProblem(system, tuple(eliminate), target, source)


BUILTINS = {"prop2": "prop2.fme", "prop3": "prop3.fme", "prop2-mutated": "prop2_mutated.fme"}


def load_fme(name_or_path: str) -> FmeProblem:
    if name_or_path in BUILTINS:
        text = resources.files("vmcascade").joinpath("data").joinpath(BUILTINS[name_or_path]).read_text()
        return parse_fme_text(text, name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigurationError(f"no such system file or built-in: {name_or_path!r}")
    return parse_fme_text(path.read_text(), str(path))


@dataclass
class FmeCheckResult:
    projected: InequalitySystem
    reduced: InequalitySystem
    report: EquivalenceReport

    @property
    def passed(self) -> bool:
        return self.report.equivalent


def run_fme_check(problem: FmeProblem, trials: int = 1000, seed: int = 0) -> FmeCheckResult:
    """eliminate -> remove_redundant -> verify against the bundled target."""
    if problem.target is None:
        raise ConfigurationError(f"{problem.source}: no 'target:' section to verify against")
    projected = fme_eliminate(problem.system, problem.eliminate)
    reduced = remove_redundant(projected, trials=trials, seed=seed)
    report = verify_region_equivalence(reduced, problem.target, trials=trials, seed=seed + 1)
    return FmeCheckResult(projected, reduced, report)
