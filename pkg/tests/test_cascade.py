import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vmcascade.cascade import (CascadeTestChannel, _cascade_search, eval_cascade_lossless,
                               eval_cascade_point, lossless_test_channel, lower_convex_envelope,
                               optimal_decode, optimize_cascade, optimize_cascade_lossless,
                               trace_cascade_boundary)
from vmcascade.errors import ConfigurationError, Infeasible
from vmcascade.instances import random_action, random_cascade_model, random_conditional
from vmcascade.model import Budget, CascadeModel
from vmcascade.prob import ConditionalChannel, compose, conditional_entropy, conditional_mutual_information

FAST = dict(starts=8, u_size=2, seed=3)


def _model(seed, nx=2, ny=2, na=2, nz=2):
    return random_cascade_model(np.random.default_rng(seed), nx, ny, na, nz)


def _objective(point, eta):
    return point.r1_min + eta * point.r2_min


def test_constant_channel():
    m = _model(0, 3, 2, 2, 2)
    mass = np.zeros((3, 2, 3, 2, 1))
    mass[:, :, 1, 1, 0] = 1.0
    p = eval_cascade_point(m, CascadeTestChannel.from_array(mass))
    px = m.source.mass.sum(axis=1)
    assert p.r1_min == pytest.approx(0.0, abs=1e-12)
    assert p.r2_min == pytest.approx(0.0, abs=1e-12)
    assert p.d1 == pytest.approx(px @ m.d1[:, 1])
    assert p.d2 == pytest.approx(min(px @ m.d2[:, k] for k in range(3)))
    assert p.cost == pytest.approx(m.cost[1])


@pytest.mark.parametrize("seed", range(5))
def test_lossless_embedding(seed):
    rng = np.random.default_rng(seed)
    sizes = [int(v) for v in rng.integers(1, 4, size=4)]
    m = random_cascade_model(rng, *sizes)
    act = random_action(rng, sizes[0], sizes[1], sizes[2])
    a = eval_cascade_point(m, lossless_test_channel(m, act))
    b = eval_cascade_lossless(m, act)
    for u, v in zip((a.r1_min, a.r2_min, a.cost), (b.r1_min, b.r2_min, b.cost)):
        assert u == pytest.approx(v, abs=1e-9)
    assert a.d1 == 0.0 and a.d2 == 0.0


def test_single_action_lossless():
    m = _model(1, 3, 2, 1, 3)
    act = ConditionalChannel.from_array(("X", "Y"), ("A",), np.ones((3, 2, 1)))
    p = eval_cascade_lossless(m, act)
    joint = compose(m.source, ConditionalChannel.from_array(("Y",), ("Z",), m.vm.mass[0]))
    assert p.r1_min == pytest.approx(conditional_entropy(joint, "X", "Y"), abs=1e-12)
    assert p.r2_min == pytest.approx(conditional_entropy(joint, "X", "Z"), abs=1e-12)


def test_deterministic_action_with_z_equal_y():
    rng = np.random.default_rng(2)
    vm = np.broadcast_to(np.eye(3), (2, 3, 3)).copy()
    m = CascadeModel.from_arrays(rng.dirichlet(np.ones(6)).reshape(2, 3), vm, [0, 1])
    det = np.zeros((2, 3, 2))
    det[0, :, 1] = det[1, :, 0] = 1.0
    act = ConditionalChannel.from_array(("X", "Y"), ("A",), det)
    p = eval_cascade_lossless(m, act)
    joint = compose(m.source, act)
    expect = (conditional_mutual_information(joint, ("X", "Y"), "A")
              + conditional_entropy(joint, "X", ("A", "Y")))
    assert p.r2_min == pytest.approx(expect, abs=1e-12)


def test_forbidden_action_is_infeasible_point():
    m = CascadeModel.from_arrays(np.full((2, 2), 0.25), np.full((2, 2, 2), 0.5), [0, math.inf])
    act = ConditionalChannel.from_array(("X", "Y"), ("A",), np.full((2, 2, 2), 0.5))
    assert eval_cascade_lossless(m, act).cost == math.inf
    assert not eval_cascade_lossless(m, act).feasible(Budget(gamma=100))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_rates_nonnegative_and_finite(seed):
    rng = np.random.default_rng(seed)
    sizes = [int(v) for v in rng.integers(1, 4, size=4)]
    m = random_cascade_model(rng, *sizes)
    nu = int(rng.integers(1, 4))
    mass = random_conditional(rng, sizes[:2], sizes[0] * sizes[2] * nu)
    mass[rng.random(mass.shape) < 0.3] = 0.0
    mass[..., 0] += 1e-3
    mass /= mass.sum(axis=-1, keepdims=True)
    p = eval_cascade_point(m, CascadeTestChannel.from_array(
        mass.reshape(sizes[0], sizes[1], sizes[0], sizes[2], nu)))
    assert 0.0 <= p.r1_min < math.inf and 0.0 <= p.r2_min < math.inf


def test_channel_validation():
    m = _model(3)
    with pytest.raises(ConfigurationError, match="bound"):
        eval_cascade_point(m, CascadeTestChannel.from_array(np.full((2, 2, 2, 2, 12), 1 / 48)))
    with pytest.raises(ConfigurationError):
        CascadeTestChannel.from_array(np.full((2, 2, 2, 2, 2), 1 / 8), decode=np.zeros((2, 2)))
    t = CascadeTestChannel.from_array(np.full((2, 2, 2, 2, 2), 1 / 8),
                                      decode=np.full((2, 2), 5, dtype=int))
    with pytest.raises(ConfigurationError, match="X2"):
        eval_cascade_point(m, t)


def test_decode_ties_go_low():
    m = CascadeModel.from_arrays(np.full((2, 2), 0.25), np.full((1, 2, 2), 0.5), [0])
    t = CascadeTestChannel.from_array(np.full((2, 2, 2, 1, 1), 0.5))
    assert (optimal_decode(m, t) == 0).all()


def test_explicit_decode_never_beats_optimal():
    rng = np.random.default_rng(8)
    m = _model(8)
    mass = random_conditional(rng, (2, 2), 8).reshape(2, 2, 2, 2, 2)
    best = eval_cascade_point(m, CascadeTestChannel.from_array(mass)).d2
    for code in range(16):
        dec = np.array([(code >> k) & 1 for k in range(4)]).reshape(2, 2)
        assert eval_cascade_point(m, CascadeTestChannel.from_array(mass, dec)).d2 >= best - 1e-15


def test_zero_distortion_matches_lossless_space():
    m = _model(11)
    for gamma in (0.2, 0.6):
        for eta in (0.5, 1.0, 2.0):
            lossy, _ = optimize_cascade(m, Budget(gamma=gamma, d1=0.0, d2=0.0), eta,
                                        search_cfg(starts=32, u_size=2))
            lossless, _ = optimize_cascade_lossless(m, gamma, eta, search_cfg(starts=16))
            assert abs(_objective(lossy, eta) - _objective(lossless, eta)) <= 2e-3


def search_cfg(**kw):
    from vmcascade.search import SearchConfig
    return SearchConfig(**{**FAST, **kw})


@pytest.mark.parametrize("seed", [21, 22])
def test_monotone_in_budgets(seed):
    rng = np.random.default_rng(seed)
    m = random_cascade_model(rng, 2, 2, 2, 2)
    cfg = search_cfg()
    tight = Budget(gamma=0.2, d1=0.05, d2=0.05)
    p0, c0 = optimize_cascade(m, tight, 1.0, cfg)
    for looser in (Budget(0.6, 0.05, 0.05), Budget(0.2, 0.15, 0.05), Budget(0.2, 0.05, 0.15)):
        p1, _ = optimize_cascade(m, looser, 1.0, cfg, initial=[c0.ch.mass])
        assert _objective(p1, 1.0) <= _objective(p0, 1.0) + 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_returned_point_is_feasible(seed):
    rng = np.random.default_rng([seed, 5])
    m = random_cascade_model(rng, 2, int(rng.integers(1, 4)), 2, 2)
    budget = Budget(gamma=float(rng.uniform(0, 1)), d1=float(rng.uniform(0, 0.3)),
                    d2=float(rng.uniform(0, 0.3)))
    p, chan = optimize_cascade(m, budget, float(rng.uniform(0, 2)), search_cfg())
    assert p.feasible(budget, tol=1e-9)
    assert eval_cascade_point(m, chan) == p


def test_action_independent_side_information():
    rng = np.random.default_rng(31)
    pz_y = random_conditional(rng, (2,), 2)
    pxy = rng.dirichlet(np.ones(4)).reshape(2, 2)
    two = CascadeModel.from_arrays(pxy, np.stack([pz_y, pz_y]), [0.0, 0.5])
    one = CascadeModel.from_arrays(pxy, pz_y[None], [0.0])
    budget = Budget(gamma=0.5, d1=0.1, d2=0.1)
    for eta in (0.5, 1.5):
        a, _ = optimize_cascade(two, budget, eta, search_cfg(starts=16, u_size=3))
        b, _ = optimize_cascade(one, budget, eta, search_cfg(starts=16, u_size=3))
        assert abs(_objective(a, eta) - _objective(b, eta)) <= 2e-3


@pytest.mark.slow
@pytest.mark.parametrize("seed", [4, 5])
def test_auxiliary_sufficiency(seed):
    # both runs start from the same small-|U| witness, zero-padded
    m = _model(seed)
    budget = Budget(gamma=0.5, d1=0.1, d2=0.1)
    small = _cascade_search(m, budget, 1.0, search_cfg(starts=16, seed=1), 3)
    theta = small.theta.reshape(2, 2, 2, 2, 3)
    found = []
    for nu in (m.u_bound, m.u_bound + 2):
        init = np.zeros((2, 2, 2, 2, nu))
        init[..., :3] = theta
        found.append(_cascade_search(m, budget, 1.0, search_cfg(starts=2, seed=1), nu,
                                     [init]).objective)
    assert found[0] - found[1] < 1e-3


def test_infeasible_and_bad_arguments():
    m = CascadeModel.from_arrays(np.full((2, 2), 0.25), np.full((2, 2, 2), 0.5), [0.5, 1.0])
    with pytest.raises(Infeasible):
        optimize_cascade(m, Budget(gamma=0.1), 1.0, search_cfg())
    with pytest.raises(ConfigurationError):
        optimize_cascade(m, Budget(), -1.0, search_cfg())
    with pytest.raises(ConfigurationError):
        optimize_cascade(m, Budget(), 1.0, search_cfg(u_size=99))


def test_deterministic_given_seed():
    m = _model(41)
    budget = Budget(gamma=0.4, d1=0.1, d2=0.1)
    a = optimize_cascade(m, budget, 1.0, search_cfg())
    b = optimize_cascade(m, budget, 1.0, search_cfg())
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1].ch.mass, b[1].ch.mass)


def test_lower_convex_envelope():
    pts = [(0, 3), (1, 1), (2, 1.5), (3, 0), (1.5, 0.8), (4, 0)]
    assert lower_convex_envelope(pts) == [(0.0, 3.0), (1.0, 1.0), (3.0, 0.0)]
    assert lower_convex_envelope([(1, 1)]) == [(1.0, 1.0)]


def test_trace_boundary():
    m = _model(51)
    etas = (0.25, 1.0, 4.0)
    tr = trace_cascade_boundary(m, Budget(gamma=0.5, d1=0.1, d2=0.1), etas, search_cfg())
    assert tr.etas == etas and len(tr.found) == 3
    # a larger weight on r2 never picks a point with larger r2
    r2 = [p.r2_min for p in tr.found]
    assert all(b <= a + 1e-9 for a, b in zip(r2, r2[1:]))
    for r1, r2v in tr.envelope:
        assert any(abs(r1 - p.r1_min) < 1e-12 and abs(r2v - p.r2_min) < 1e-12 for p in tr.found)
