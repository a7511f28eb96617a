"""Command-line front end: ``vmcascade {eval,optimize,fig6,fme-check,oracle-check}``.

Every command writes its output once, at the end, to ``--out`` or stdout.
CSV numbers use 9 significant digits and every row carries the first 12
hex digits of a SHA-256 over the command, the config and the seed.

Exit codes: 0 success, 2 invalid input, 3 infeasible budget, 4 failed check.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import oracle
from .broadcast import (CRTestChannel, eval_broadcast_lossless, eval_bsc_closed_form, eval_cr_point,
                        eval_schannel_closed_form, eval_switching, greedy_gain, lossless_cr_channel,
                        optimize_broadcast_lossless, optimize_cr, region_weighted_value,
                        schannel_action, schannel_example, bsc_action, weighted_sumrate)
from .cascade import (CascadeTestChannel, eval_cascade_lossless, eval_cascade_point,
                      lossless_test_channel, optimize_cascade, optimize_cascade_lossless)
from .config import RunConfig, builtin_model, config_hash, load_config, table
from .errors import (ConfigurationError, Infeasible, OracleBudgetExceeded, RowCapExceeded,
                     UsageError)
from .fme import load_fme, run_fme_check
from .instances import random_cascade_model, random_conditional, random_degraded_model, random_joint
from .model import SwitchingModel
from .prob import ConditionalChannel, conditional_mutual_information

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_CHECK = 0, 2, 3, 4

EVAL_HEADER = ("config_hash", "topology", "row", "q", "alpha", "beta", "delta",
               "rb_min", "r1_plus_rb_min", "r2_plus_rb_min", "r_sum_min",
               "r1_min", "r2_min", "d1", "d2", "cost")
OPTIMIZE_HEADER = ("config_hash", "topology", "mode", "delta", "eta", "gamma", "rb",
                   "objective", "R1", "R2", "Rb", "rb_min", "r1_plus_rb_min", "r2_plus_rb_min",
                   "r_sum_min", "r1_min", "r2_min", "alpha", "beta", "d1", "d2", "cost")
FIG6_HEADER = ("config_hash", "eta", "gamma", "gain", "optimal", "greedy",
               "alpha_optimal", "beta_optimal", "alpha_greedy", "beta_greedy")

FIG6_DEFAULTS = {"rb": 0.4, "delta": 0.6, "gammas": [0.1, 0.9],
                 "etas": [i / 50 for i in range(51)] + [0.05], "step": 1 / 200,
                 "fine_step": 1 / 2000}


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0.0:
        return "0"          # folds -0.0
    return f"{v:.9g}"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(row.get(k)) for k in header])
    return buf.getvalue()


def _point_fields(p) -> dict:
    return {k: getattr(p, k) for k in ("rb_min", "r1_plus_rb_min", "r2_plus_rb_min", "r_sum_min",
                                       "r1_min", "r2_min", "d1", "d2", "cost") if hasattr(p, k)}


# -- eval -------------------------------------------------------------------

def _sweep(cfg: RunConfig, key: str, default=None) -> list[float]:
    if key in cfg.sweep:
        return cfg.sweep[key]
    if default is None:
        raise ConfigurationError(f"sweep.{key} is required here")
    return default


def _channel(node, key: str, what: str):
    if not isinstance(node, dict) or key not in node:
        raise ConfigurationError(f"channels: each entry needs '{key}' ({what})")
    return table(node[key], f"channels.{key}")


def _eval_builtin(cfg: RunConfig):
    rows = []
    exact = cfg.evaluator == "exact"
    deltas = _sweep(cfg, "delta", [0.6])
    if cfg.builtin == "bsc-example":
        for delta in deltas:
            for q in _sweep(cfg, "q"):
                p = (eval_switching(builtin_model(cfg.builtin, delta), bsc_action(q)) if exact
                     else eval_bsc_closed_form(q, delta))
                rows.append({"q": q, "delta": delta, **_point_fields(p)})
        return rows
    for delta in deltas:
        for alpha in _sweep(cfg, "alpha"):
            for beta in _sweep(cfg, "beta"):
                p = (eval_switching(builtin_model(cfg.builtin, delta), schannel_action(alpha, beta))
                     if exact else eval_schannel_closed_form(alpha, beta, delta))
                rows.append({"alpha": alpha, "beta": beta, "delta": delta, **_point_fields(p)})
    return rows


def cmd_eval(cfg: RunConfig, seed: int | None = None):
    """One row per configured channel (or built-in grid point)."""
    if cfg.builtin is not None:
        rows = _eval_builtin(cfg)
    else:
        if not cfg.channels:
            raise ConfigurationError("eval needs a 'channels' list")
        m = cfg.model
        rows = []
        for node in cfg.channels:
            if cfg.topology == "cascade":
                if isinstance(node, dict) and "test_channel" in node:
                    dec = node.get("decode")
                    dec = None if dec is None else table(dec, "channels.decode").astype(np.int64)
                    t = CascadeTestChannel.from_array(_channel(node, "test_channel", ""), dec)
                    p = eval_cascade_point(m, t)
                else:
                    act = _channel(node, "action", "p(a|x,y) or test_channel")
                    p = eval_cascade_lossless(m, ConditionalChannel.from_array(("X", "Y"), ("A",), act))
            else:
                act = ConditionalChannel.from_array(("X",), ("A",),
                                                    _channel(node, "action", "p(a|x)"))
                if cfg.topology == "switching":
                    p = eval_switching(m, act)
                elif cfg.topology == "broadcast-lossless":
                    p = eval_broadcast_lossless(m, act)
                else:
                    rec = _channel(node, "recon", "p(x1,x2|x,a)")
                    p = eval_cr_point(m, CRTestChannel(act, ConditionalChannel.from_array(
                        ("X", "A"), ("X1", "X2"), rec)))
            rows.append(_point_fields(p))
    h = cfg.digest(seed, "eval")
    for i, row in enumerate(rows):
        row.update(config_hash=h, topology=cfg.topology, row=str(i))
    return EVAL_HEADER, rows


# -- optimize ---------------------------------------------------------------

def cmd_optimize(cfg: RunConfig, seed: int | None = None):
    """Optimize the configured region; one row per swept weight (and mode)."""
    rows = []
    b = cfg.budget
    if cfg.topology == "switching":
        deltas = _sweep(cfg, "delta", [0.6]) if cfg.builtin else [None]
        rb = _sweep(cfg, "rb", [0.4])[0]
        gamma = 1.0 if math.isinf(b.gamma) else b.gamma
        for delta in deltas:
            m = builtin_model(cfg.builtin, delta) if cfg.builtin else cfg.model
            for eta in _sweep(cfg, "eta", [1.0]):
                for mode in ("optimal", "greedy"):
                    r = weighted_sumrate(m, eta, rb, gamma, mode)
                    rows.append({"mode": mode, "delta": delta,
                                 "eta": eta, "gamma": gamma, "rb": rb, "objective": r.value,
                                 "R1": r.r1, "R2": r.r2, "Rb": rb,
                                 "alpha": r.alpha, "beta": r.beta})
    elif cfg.topology == "cascade":
        witnesses = []
        for eta in _sweep(cfg, "eta", [1.0]):
            if cfg.lossless:
                p, _ = optimize_cascade_lossless(cfg.model, b.gamma, eta, cfg.search)
            else:
                p, chan = optimize_cascade(cfg.model, b, eta, cfg.search, initial=witnesses)
                witnesses.append(chan.ch.mass)
            rows.append({"mode": "lossless" if cfg.lossless else "lossy", "eta": eta,
                         "gamma": b.gamma, "objective": p.r1_min + eta * p.r2_min,
                         "R1": p.r1_min, "R2": p.r2_min, **_point_fields(p)})
    else:
        if cfg.topology == "broadcast-lossless":
            p, _ = optimize_broadcast_lossless(cfg.model, b.gamma, cfg.weights, cfg.search)
        else:
            p, _ = optimize_cr(cfg.model, b, cfg.weights, cfg.search)
        val, r1, r2, rbv = region_weighted_value(p, cfg.weights)
        rows.append({"mode": "weighted", "gamma": b.gamma, "objective": val,
                     "R1": r1, "R2": r2, "Rb": rbv, **_point_fields(p)})
    h = cfg.digest(seed, "optimize")
    for row in rows:
        row.update(config_hash=h, topology=cfg.topology)
    return OPTIMIZE_HEADER, rows


# -- fig6 -------------------------------------------------------------------

def fig6_settings(raw: dict | None) -> dict:
    s = dict(FIG6_DEFAULTS)
    extra = set(raw or {}) - set(s)
    if extra:
        raise ConfigurationError(f"fig6: unknown keys {sorted(extra)}")
    s.update(raw or {})
    s["etas"] = sorted(set(float(e) for e in s["etas"]))
    s["gammas"] = [float(g) for g in s["gammas"]]
    return s


def cmd_fig6(settings: dict, digest: str):
    """Greedy minus optimal weighted sum-rate on the S-channel example."""
    m = schannel_example(float(settings["delta"]))
    rows = []
    for eta in settings["etas"]:
        for gamma in settings["gammas"]:
            gain, opt, gr = greedy_gain(m, eta, float(settings["rb"]), gamma,
                                        step=float(settings["step"]),
                                        fine_step=settings["fine_step"])
            rows.append({"config_hash": digest, "eta": eta, "gamma": gamma, "gain": gain,
                         "optimal": opt.value, "greedy": gr.value,
                         "alpha_optimal": opt.alpha, "beta_optimal": opt.beta,
                         "alpha_greedy": gr.alpha, "beta_greedy": gr.beta})
    return FIG6_HEADER, rows


# -- fme-check --------------------------------------------------------------

def cmd_fme_check(system: str, trials: int = 1000, seed: int = 0):
    """Returns (passed, report lines)."""
    problem = load_fme(system)
    res = run_fme_check(problem, trials, seed)
    lines = [f"system: {problem.source}", "projection after elimination and pruning:"]
    lines += [f"  {row}" for row in res.reduced.inequalities]
    lines += res.report.lines()
    return res.passed, lines


# -- oracle-check -----------------------------------------------------------

def _check_mi(rng, max_size):
    d = random_joint(rng, max_size, n_vars=int(rng.integers(2, 5)))
    names = list(d.names)
    rng.shuffle(names)
    k = int(rng.integers(1, len(names)))
    j = int(rng.integers(k + 1, len(names) + 1))
    a, b, c = names[:k], names[k:j], names[j:]
    return abs(oracle.mi_oracle(d, a, b, c) - conditional_mutual_information(d, a, b, c))


def _check_cascade(rng, max_size):
    nx, ny, na, nz = (int(v) for v in rng.integers(1, max_size + 1, 4))
    m = random_cascade_model(rng, max(nx, 2), ny, na, nz)
    nu = int(rng.integers(1, 4))
    mass = random_conditional(rng, (m.nx, m.ny), m.n1 * m.na * nu).reshape(
        m.nx, m.ny, m.n1, m.na, nu)
    p = eval_cascade_point(m, CascadeTestChannel.from_array(mass))
    q = oracle.oracle_cascade_point(m, mass)
    return max(abs(getattr(p, k) - getattr(q, k)) for k in ("r1_min", "r2_min", "d1", "d2", "cost"))


def _check_lossless_embedding(rng, max_size):
    nx, ny, na, nz = (int(v) for v in rng.integers(1, max_size + 1, 4))
    m = random_cascade_model(rng, nx, ny, na, nz)
    act = ConditionalChannel.from_array(("X", "Y"), ("A",), random_conditional(rng, (nx, ny), na))
    p = eval_cascade_point(m, lossless_test_channel(m, act))
    q = eval_cascade_lossless(m, act)
    return max(abs(p.r1_min - q.r1_min), abs(p.r2_min - q.r2_min), p.d1, p.d2)


def _check_cr(rng, max_size):
    nx, ny, na, nz = (int(v) for v in rng.integers(1, max_size + 1, 4))
    m = random_degraded_model(rng, nx, ny, na, nz)
    act = random_conditional(rng, (nx,), na)
    rec = random_conditional(rng, (nx, na), nx * nx).reshape(nx, na, nx, nx)
    p = eval_cr_point(m, CRTestChannel.from_arrays(act, rec))
    q = oracle.oracle_cr_point(m, act, rec)
    keys = ("rb_min", "r1_plus_rb_min", "r2_plus_rb_min", "r_sum_min", "d1", "d2", "cost")
    return max(abs(getattr(p, k) - getattr(q, k)) for k in keys)


def _check_cr_lossless(rng, max_size):
    nx, ny, na, nz = (int(v) for v in rng.integers(1, max_size + 1, 4))
    m = random_degraded_model(rng, nx, ny, na, nz)
    act = ConditionalChannel.from_array(("X",), ("A",), random_conditional(rng, (nx,), na))
    p = eval_cr_point(m, lossless_cr_channel(m, act))
    q = eval_broadcast_lossless(m, act)
    o = oracle.oracle_broadcast_lossless(m, act.mass)
    return max(abs(p.rb_min - q.rb_min), abs(p.r1_plus_rb_min - q.r1_plus_rb_min),
               abs(p.r2_plus_rb_min - q.r2_plus_rb_min), abs(q.rb_min - o.rb_min),
               abs(q.r1_plus_rb_min - o.r1_plus_rb_min), abs(q.r2_plus_rb_min - o.r2_plus_rb_min))


def _check_switching(rng, max_size):
    nw = int(rng.integers(1, max_size + 1))
    nx = int(rng.integers(1, max_size + 1))
    lam = rng.uniform(0, 1, 4)
    m = SwitchingModel.from_arrays(rng.dirichlet(np.ones(nx * nw)).reshape(nx, nw), lam)
    act = ConditionalChannel.from_array(("X",), ("A",), random_conditional(rng, (nx,), 4))
    p = eval_switching(m, act)
    q = eval_broadcast_lossless(m.to_broadcast(), act)
    return max(abs(p.rb_min - q.rb_min), abs(p.r1_plus_rb_min - q.r1_plus_rb_min),
               abs(p.r2_plus_rb_min - q.r2_plus_rb_min), abs(p.cost - q.cost))


def _check_schannel(rng, max_size):
    alpha, beta, delta = rng.random(3)
    p = eval_schannel_closed_form(alpha, beta, delta)
    q = eval_switching(schannel_example(delta), schannel_action(alpha, beta))
    return max(abs(p.rb_min - q.rb_min), abs(p.r1_plus_rb_min - q.r1_plus_rb_min),
               abs(p.r2_plus_rb_min - q.r2_plus_rb_min), abs(p.cost - q.cost))


ORACLE_CHECKS = (
    ("mutual-information", _check_mi),
    ("cascade-evaluator", _check_cascade),
    ("lossless-embedding", _check_lossless_embedding),
    ("cr-evaluator", _check_cr),
    ("cr-lossless-reduction", _check_cr_lossless),
    ("switching-expansion", _check_switching),
    ("schannel-closed-form", _check_schannel),
)


def cmd_oracle_check(max_size: int = 3, trials: int = 100, seed: int = 0,
                     tolerance: float = 1e-9):
    """Randomized cross-validation battery; returns (passed, report lines)."""
    if max_size < 1 or trials < 1 or tolerance < 0:
        raise ConfigurationError("need max_size >= 1, trials >= 1, tolerance >= 0")
    lines = []
    ok = True
    for i, (name, fn) in enumerate(ORACLE_CHECKS):
        rng = np.random.default_rng([seed, i])
        worst = max(fn(rng, max_size) for _ in range(trials))
        passed = worst <= tolerance
        ok &= passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {trials} trials, "
                     f"max |difference| {worst:.3g} (tolerance {tolerance:g})")
    return ok, lines


# -- entry point ------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vmcascade", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=None, help="search / sampling seed")
    for name, needs_config in (("eval", True), ("optimize", True), ("fig6", False)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--config", type=Path, required=needs_config)
    p = sub.add_parser("fme-check", parents=[common])
    p.add_argument("system", nargs="?", default="prop2",
                   help="prop2, prop3, prop2-mutated or a path to a .fme file")
    p.add_argument("--trials", type=int, default=1000)
    p = sub.add_parser("oracle-check", parents=[common])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-size", type=int, default=3, help="largest alphabet drawn")
    p.add_argument("--tolerance", type=float, default=1e-9)
    return ap


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command in ("eval", "optimize"):
            cfg = load_config(args.config, args.seed)
            fn = cmd_eval if args.command == "eval" else cmd_optimize
            _emit(render_csv(*fn(cfg, args.seed)), args.out)
        elif args.command == "fig6":
            raw = None
            if args.config is not None:
                loaded = yaml.safe_load(args.config.read_text()) or {}
                if not isinstance(loaded, dict):
                    raise ConfigurationError("fig6 config must be a mapping")
                raw = loaded.get("fig6", {})
            settings = fig6_settings(raw)
            digest = config_hash(settings, args.seed, "fig6")
            _emit(render_csv(*cmd_fig6(settings, digest)), args.out)
        elif args.command == "fme-check":
            passed, lines = cmd_fme_check(args.system, args.trials,
                                          0 if args.seed is None else args.seed)
            _emit("\n".join(lines) + "\n", args.out)
            return EXIT_OK if passed else EXIT_CHECK
        else:
            passed, lines = cmd_oracle_check(args.max_size, args.trials,
                                             0 if args.seed is None else args.seed,
                                             args.tolerance)
            _emit("\n".join(lines) + "\n", args.out)
            return EXIT_OK if passed else EXIT_CHECK
    except (ConfigurationError, UsageError, OracleBudgetExceeded, RowCapExceeded) as exc:
        print(f"vmcascade: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, yaml.YAMLError) as exc:
        print(f"vmcascade: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Infeasible as exc:
        print(f"vmcascade: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
