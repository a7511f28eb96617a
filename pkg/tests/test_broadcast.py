import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vmcascade.broadcast import (CRTestChannel, bsc_action, bsc_example, eval_broadcast_lossless,
                                 eval_bsc_closed_form, eval_cr_point, eval_schannel_closed_form,
                                 eval_switching, greedy_gain, lossless_cr_channel,
                                 optimize_broadcast_lossless, optimize_cr, region_weighted_value,
                                 schannel_action, schannel_example, weighted_sumrate)
from vmcascade.errors import ConfigurationError, Infeasible
from vmcascade.instances import random_action, random_degraded_model, random_pmf
from vmcascade.model import BroadcastModel, Budget, SwitchingModel
from vmcascade.oracle import mi_oracle
from vmcascade.prob import (ConditionalChannel, binary_entropy, compose, conditional_entropy,
                            entropy)
from vmcascade.search import SearchConfig

unit = st.floats(0.0, 1.0)


def _joint(m, action):
    return compose(compose(m.source, action), m.vm)


def test_single_action_lossless():
    m = random_degraded_model(np.random.default_rng(0), 3, 2, 1, 2)
    act = ConditionalChannel.from_array(("X",), ("A",), np.ones((3, 1)))
    p = eval_broadcast_lossless(m, act)
    j = _joint(m, act)
    assert p.rb_min == pytest.approx(0.0, abs=1e-12)
    assert p.r1_plus_rb_min == pytest.approx(conditional_entropy(j, "X", "Y"))
    assert p.r2_plus_rb_min == pytest.approx(conditional_entropy(j, "X", "Z"))


def test_identity_action_uninformative_outputs():
    px = np.array([0.2, 0.3, 0.5])
    m = BroadcastModel.from_arrays(px, np.ones((3, 3, 1, 1)), [0, 0, 0])
    p = eval_broadcast_lossless(m, ConditionalChannel.from_array(("X",), ("A",), np.eye(3)))
    hx = entropy(m.source, "X")
    for v in (p.rb_min, p.r1_plus_rb_min, p.r2_plus_rb_min):
        assert v == pytest.approx(hx, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_lossless_against_direct_summation(seed):
    rng = np.random.default_rng([seed, 7])
    m = random_degraded_model(rng, 2, 2, 2, 2)
    act = random_action(rng, 2, None, 2)
    p = eval_broadcast_lossless(m, act)
    j = _joint(m, act)
    ia = mi_oracle(j, "X", "A")
    # H(X|A,Y) = I(X;X|A,Y) by direct summation over a duplicated X
    dup = compose(j, ConditionalChannel.from_array(("X",), ("V",), np.eye(2)))
    assert p.rb_min == pytest.approx(ia, abs=1e-9)
    assert p.r1_plus_rb_min == pytest.approx(ia + mi_oracle(dup, "X", "V", ("A", "Y")), abs=1e-9)
    assert p.r2_plus_rb_min == pytest.approx(ia + mi_oracle(dup, "X", "V", ("A", "Z")), abs=1e-9)
    assert p.rb_min <= p.r1_plus_rb_min and p.rb_min <= p.r2_plus_rb_min


def test_forbidden_mass_is_infeasible():
    m = bsc_example(0.3)
    p = eval_switching(m, ConditionalChannel.from_array(("X",), ("A",), [[0.5, 0.5, 0, 0]] * 2))
    assert p.cost == math.inf


def test_bsc_closed_form_value():
    p = eval_bsc_closed_form(0.5, 0.6)
    assert binary_entropy(0.6) == pytest.approx(0.9709506, abs=1e-7)
    assert p.r1_plus_rb_min == pytest.approx(0.5145247, abs=1e-6)
    assert p.r2_plus_rb_min == pytest.approx(0.5145247, abs=1e-6)
    assert p.cost == 1.0


@given(unit)
def test_bsc_closed_form_noiseless(q):
    p = eval_bsc_closed_form(q, 0.0)
    assert (p.r1_plus_rb_min, p.r2_plus_rb_min) == (1.0, 1.0)


@given(unit, unit)
def test_bsc_exact_evaluation(q, delta):
    # time-sharing action: each node gains q (resp. 1 - q) times I(X; W) = 1 - h(δ)
    p = eval_switching(bsc_example(delta), bsc_action(q))
    gain = 1 - binary_entropy(delta)
    assert p.rb_min == pytest.approx(0.0, abs=1e-12)
    assert p.r1_plus_rb_min == pytest.approx(1 - q * gain, abs=1e-9)
    assert p.r2_plus_rb_min == pytest.approx(1 - (1 - q) * gain, abs=1e-9)
    assert p.cost == pytest.approx(1.0)


def test_bsc_closed_form_rejects_out_of_range():
    with pytest.raises(ConfigurationError):
        eval_bsc_closed_form(1.5, 0.1)


@given(unit, unit, unit)
def test_schannel_closed_form_matches_switching(alpha, beta, delta):
    a = eval_schannel_closed_form(alpha, beta, delta)
    b = eval_switching(schannel_example(delta), schannel_action(alpha, beta))
    for u, v in zip((a.rb_min, a.r1_plus_rb_min, a.r2_plus_rb_min, a.cost),
                    (b.rb_min, b.r1_plus_rb_min, b.r2_plus_rb_min, b.cost)):
        assert u == pytest.approx(v, abs=1e-9)


@given(unit)
def test_schannel_corners(delta):
    zero = eval_schannel_closed_form(0.0, 0.0, delta)
    assert zero.r1_plus_rb_min == pytest.approx(1.0) and zero.cost == 0.0
    one = eval_schannel_closed_form(1.0, 1.0, delta)
    assert one.r2_plus_rb_min == pytest.approx(1.0) and one.cost == 1.0


@given(unit, unit)
def test_schannel_greedy_diagonal(alpha, delta):
    # α = β: the action ignores X, so I(X; A) = 0
    p = eval_schannel_closed_form(alpha, alpha, delta)
    assert p.rb_min == pytest.approx(0.0, abs=1e-12)


def test_all_side_information_everywhere():
    pxw = np.array([[0.3, 0.1], [0.15, 0.45]])
    m = SwitchingModel.from_arrays(pxw, [1, 1, 1, 1])
    act = ConditionalChannel.from_array(("X",), ("A",), [[0, 0, 0, 1.0]] * 2)
    p = eval_switching(m, act)
    j = m.source_pair
    expect = entropy(j, "X") - mi_oracle(j, "X", "W")
    assert p.r1_plus_rb_min == pytest.approx(expect, abs=1e-12)
    assert p.r2_plus_rb_min == pytest.approx(expect, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_switching_equals_expanded_broadcast(seed):
    rng = np.random.default_rng(seed)
    nx, nw = (int(v) for v in rng.integers(1, 4, size=2))
    m = SwitchingModel.from_arrays(random_pmf(rng, (nx, nw), sparsity=0.2),
                                   rng.uniform(0, 2, 4))
    act = random_action(rng, nx, None, 4)
    a = eval_switching(m, act)
    b = eval_broadcast_lossless(m.to_broadcast(), act)
    for u, v in zip((a.rb_min, a.r1_plus_rb_min, a.r2_plus_rb_min, a.cost),
                    (b.rb_min, b.r1_plus_rb_min, b.r2_plus_rb_min, b.cost)):
        assert u == pytest.approx(v, abs=1e-9)


@given(st.floats(0, 3), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_greedy_never_beats_optimal(eta, rb, gamma, delta):
    for m in (bsc_example(delta), schannel_example(delta)):
        try:
            gain, opt, gr = greedy_gain(m, eta, rb, gamma, step=1 / 20, fine_step=1 / 200)
        except Infeasible:
            continue
        assert gain >= -1e-9
        assert gr.alpha == gr.beta


@given(st.floats(0, 3), st.floats(0, 1), st.floats(0, 1))
def test_zero_budget_forces_action_two(eta, rb, delta):
    gain, opt, gr = greedy_gain(schannel_example(delta), eta, rb, 0.0, step=1 / 20)
    assert gain == 0.0
    assert (opt.alpha, opt.beta) == (0.0, 0.0)


def test_weighted_sumrate_errors():
    with pytest.raises(ConfigurationError):
        weighted_sumrate(schannel_example(0.5), -1, 0.4, 0.5)
    with pytest.raises(ConfigurationError):
        weighted_sumrate(schannel_example(0.5), 1, 0.4, 0.5, mode="fast")
    with pytest.raises(Infeasible):
        weighted_sumrate(bsc_example(0.5), 1, 0.4, 0.5)     # every action costs 1


def test_symmetric_bsc_optimal_split():
    qs = np.linspace(0, 1, 201)
    worst = [max(eval_bsc_closed_form(q, 0.6).r1_plus_rb_min,
                 eval_bsc_closed_form(q, 0.6).r2_plus_rb_min) for q in qs]
    assert abs(qs[int(np.argmin(worst))] - 0.5) <= 1 / 200


def _random_recon(rng, nx, na, n1, n2):
    return rng.dirichlet(np.ones(n1 * n2), size=(nx, na)).reshape(nx, na, n1, n2)


@pytest.mark.parametrize("seed", range(8))
def test_cr_lossless_reduction(seed):
    rng = np.random.default_rng([seed, 11])
    sizes = [int(v) for v in rng.integers(1, 4, size=4)]
    m = random_degraded_model(rng, *sizes)
    act = random_action(rng, sizes[0], None, sizes[2])
    a = eval_cr_point(m, lossless_cr_channel(m, act))
    b = eval_broadcast_lossless(m, act)
    assert a.rb_min == pytest.approx(b.rb_min, abs=1e-12)
    assert a.r1_plus_rb_min == pytest.approx(b.r1_plus_rb_min, abs=1e-12)
    assert a.r2_plus_rb_min == pytest.approx(b.r2_plus_rb_min, abs=1e-12)
    assert a.r_sum_min == pytest.approx(b.r2_plus_rb_min, abs=1e-12)
    assert a.d1 == 0.0 and a.d2 == 0.0


def test_cr_constant_reconstructions():
    rng = np.random.default_rng(3)
    m = random_degraded_model(rng, 3, 2, 2, 2)
    act = random_action(rng, 3, None, 2)
    rec = np.zeros((3, 2, 3, 3))
    rec[:, :, 2, 0] = 1.0
    p = eval_cr_point(m, CRTestChannel(act, ConditionalChannel.from_array(("X", "A"), ("X1", "X2"), rec)))
    ia = p.rb_min
    for v in (p.r1_plus_rb_min, p.r2_plus_rb_min, p.r_sum_min):
        assert v == pytest.approx(ia, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_cr_terms_against_direct_summation(seed):
    rng = np.random.default_rng([seed, 13])
    m = random_degraded_model(rng, 2, 2, 2, 2)
    act = random_action(rng, 2, None, 2)
    t = CRTestChannel(act, ConditionalChannel.from_array(("X", "A"), ("X1", "X2"),
                                                         _random_recon(rng, 2, 2, 2, 2)))
    p = eval_cr_point(m, t)
    j = compose(compose(m.source, act), m.vm)
    j = compose(j, t.recon)
    ia = mi_oracle(j, "X", "A")
    c = mi_oracle(j, "X", "X2", ("A", "Z"))
    assert p.rb_min == pytest.approx(ia, abs=1e-9)
    assert p.r1_plus_rb_min == pytest.approx(ia + mi_oracle(j, "X", ("X1", "X2"), ("A", "Y")),
                                             abs=1e-9)
    assert p.r2_plus_rb_min == pytest.approx(ia + c, abs=1e-9)
    assert p.r_sum_min == pytest.approx(ia + c + mi_oracle(j, "X", "X1", ("A", "Y", "X2")),
                                        abs=1e-9)
    assert p.r_sum_min >= max(p.r1_plus_rb_min, p.r2_plus_rb_min) - 1e-9


def test_cr_rejects_nondegraded():
    px = np.array([0.5, 0.5])
    pyz = np.zeros((1, 2, 2, 2))
    for x in range(2):
        pyz[0, x, :, x] = 0.5
    m = BroadcastModel.from_arrays(px, pyz, [0])
    act = ConditionalChannel.from_array(("X",), ("A",), np.ones((2, 1)))
    with pytest.raises(ConfigurationError, match="degraded"):
        eval_cr_point(m, lossless_cr_channel(m, act))


@given(st.integers(0, 2**32 - 1))
def test_cr_without_z(seed):
    rng = np.random.default_rng(seed)
    m = random_degraded_model(rng, 2, 2, 2, 1)
    act = random_action(rng, 2, None, 2)
    p = eval_cr_point(m, lossless_cr_channel(m, act))
    j = _joint(m, act)
    assert p.r2_plus_rb_min == pytest.approx(p.rb_min + entropy(j, "X") - mi_oracle(j, "X", "A"),
                                             abs=1e-9)


def test_region_weighted_value_covers_bounds():
    rng = np.random.default_rng(17)
    m = random_degraded_model(rng, 2, 2, 2, 2)
    act = random_action(rng, 2, None, 2)
    t = CRTestChannel(act, ConditionalChannel.from_array(("X", "A"), ("X1", "X2"),
                                                         _random_recon(rng, 2, 2, 2, 2)))
    p = eval_cr_point(m, t)
    for w in ((1, 1, 1), (0.2, 1.5, 0.7), (2, 0.1, 3)):
        value, r1, r2, rb = region_weighted_value(p, w)
        assert rb >= p.rb_min - 1e-12
        assert r1 + rb >= p.r1_plus_rb_min - 1e-12
        assert r2 + rb >= p.r2_plus_rb_min - 1e-12
        assert r1 + r2 + rb >= p.r_sum_min - 1e-12
        assert value == pytest.approx(w[0] * r1 + w[1] * r2 + w[2] * rb)


@pytest.mark.parametrize("seed", [1, 2])
def test_zero_distortion_cr_matches_lossless(seed):
    rng = np.random.default_rng([seed, 19])
    m = random_degraded_model(rng, 2, 2, 2, 2)
    w = (1.0, 0.7, 1.3)
    lossless, act = optimize_broadcast_lossless(m, 0.5, w, SearchConfig(starts=16, seed=1))
    lossy, _ = optimize_cr(m, Budget(gamma=0.5, d1=0.0, d2=0.0), w, SearchConfig(starts=32, seed=1))
    ref = region_weighted_value(eval_cr_point(m, lossless_cr_channel(m, act)), w)[0]
    assert abs(region_weighted_value(lossy, w)[0] - ref) <= 2e-3


def test_cr_monotone_in_gamma():
    rng = np.random.default_rng(23)
    m = random_degraded_model(rng, 2, 2, 2, 2)
    cfg = SearchConfig(starts=16, seed=2)
    w = (1.0, 1.0, 1.0)
    p0, c0 = optimize_cr(m, Budget(gamma=0.1, d1=0.1, d2=0.1), w, cfg)
    p1, _ = optimize_cr(m, Budget(gamma=0.7, d1=0.1, d2=0.1), w, cfg, initial=[c0.theta()])
    assert region_weighted_value(p1, w)[0] <= region_weighted_value(p0, w)[0] + 1e-12
    assert p1.d1 <= 0.1 + 1e-9 and p1.d2 <= 0.1 + 1e-9 and p1.cost <= 0.7 + 1e-9


def test_optimizers_reject_bad_input():
    rng = np.random.default_rng(29)
    m = random_degraded_model(rng, 2, 2, 2, 2, free_action=False)
    m = BroadcastModel.degraded_from(m.source.mass, *m.degraded_factors(), [0.5, 0.6])
    with pytest.raises(Infeasible):
        optimize_cr(m, Budget(gamma=0.1), (1, 1, 1), SearchConfig(starts=2))
    with pytest.raises(Infeasible):
        optimize_broadcast_lossless(m, 0.1)
    with pytest.raises(ConfigurationError):
        optimize_cr(m, Budget(), (1, -1, 1))
