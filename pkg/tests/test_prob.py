import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import joints
from vmcascade.errors import ConfigurationError, UsageError
from vmcascade.oracle import mi_oracle
from vmcascade.prob import (Alphabet, ConditionalChannel, JointDistribution, binary_entropy,
                            compose, conditional_entropy, conditional_mutual_information, entropy,
                            is_markov_chain, marginalize)

H06 = -(0.6 * math.log2(0.6) + 0.4 * math.log2(0.4))


def jd(names, mass):
    return JointDistribution.from_array(names, mass)


def test_entropy_examples():
    assert entropy(jd(["X"], np.full(4, 0.25)), "X") == pytest.approx(2.0, abs=1e-12)
    assert entropy(jd(["X"], [0, 1, 0]), "X") == 0.0
    assert entropy(jd(["X"], [0.6, 0.4]), "X") == pytest.approx(0.9709506, abs=1e-7)


def test_mutual_information_examples():
    indep = jd(["X", "Y"], np.full((2, 2), 0.25))
    assert conditional_mutual_information(indep, "X", "Y") == pytest.approx(0.0, abs=1e-12)
    copy = jd(["X", "Y"], np.diag([0.5, 0.5]))
    assert conditional_mutual_information(copy, "X", "Y") == pytest.approx(1.0, abs=1e-12)
    dsbs = jd(["X", "Y"], 0.5 * np.array([[0.4, 0.6], [0.6, 0.4]]))
    assert conditional_mutual_information(dsbs, "X", "Y") == pytest.approx(1 - 0.9709506, abs=1e-7)
    assert mi_oracle(dsbs, "X", "Y") == pytest.approx(1 - H06, abs=1e-12)


def test_validation_errors():
    with pytest.raises(ConfigurationError):
        jd(["X"], [0.5, 0.4])
    with pytest.raises(ConfigurationError):
        jd(["X"], [1.2, -0.2])
    with pytest.raises(ConfigurationError):
        jd(["X"], [np.nan, 1.0])
    with pytest.raises(ConfigurationError):
        jd(["X", "X"], np.full((2, 2), 0.25))
    with pytest.raises(ConfigurationError):
        Alphabet("X", 0)
    with pytest.raises(ConfigurationError):
        ConditionalChannel.from_array(["X"], ["Y"], [[0.5, 0.48], [0.5, 0.5]])


def test_renormalizes_within_tolerance():
    d = jd(["X"], [0.5, 0.5 + 5e-10])
    assert d.mass.sum() == pytest.approx(1.0, abs=1e-15)
    assert not d.mass.flags.writeable


def test_name_errors():
    d = jd(["X", "Y"], np.full((2, 2), 0.25))
    with pytest.raises(ConfigurationError):
        entropy(d, "Q")
    with pytest.raises(UsageError):
        conditional_mutual_information(d, "X", "X")
    with pytest.raises(UsageError):
        conditional_mutual_information(d, "X", "Y", "X")
    with pytest.raises(UsageError):
        marginalize(d, [])


def test_marginalize_examples():
    px, py = np.array([0.2, 0.8]), np.array([0.1, 0.3, 0.6])
    d = jd(["X", "Y"], np.outer(px, py))
    np.testing.assert_allclose(marginalize(d, "Y").mass, py, atol=1e-15)
    np.testing.assert_allclose(marginalize(d, ["X", "Y"]).mass, d.mass, atol=0)
    np.testing.assert_allclose(marginalize(d, ["Y", "X"]).mass, d.mass.T, atol=0)


def test_compose_examples(rng):
    px = jd(["X"], [0.3, 0.7])
    diag = compose(px, ConditionalChannel.from_array(["X"], ["Y"], np.eye(2)))
    np.testing.assert_allclose(diag.mass, np.diag([0.3, 0.7]))
    pxy = jd(["X", "Y"], rng.dirichlet(np.ones(6)).reshape(2, 3))
    const = compose(pxy, ConditionalChannel.from_array(["X", "Y"], ["A"], np.ones((2, 3, 1))))
    np.testing.assert_allclose(const.mass[..., 0], pxy.mass)
    with pytest.raises(UsageError):
        compose(pxy, ConditionalChannel.from_array(["X"], ["Y"], np.eye(2)))


def test_compose_matches_nested_loops(rng):
    pxy = rng.dirichlet(np.ones(6)).reshape(2, 3)
    pa = rng.dirichlet(np.ones(2), size=(2, 3))      # p(a|x,y)
    pz = rng.dirichlet(np.ones(2), size=(2, 3))      # p(z|a,y)
    d = compose(compose(jd(["X", "Y"], pxy), ConditionalChannel.from_array(["X", "Y"], ["A"], pa)),
                ConditionalChannel.from_array(["A", "Y"], ["Z"], pz))
    ref = np.zeros((2, 3, 2, 2))
    for x in range(2):
        for y in range(3):
            for a in range(2):
                for z in range(2):
                    ref[x, y, a, z] = pxy[x, y] * pa[x, y, a] * pz[a, y, z]
    np.testing.assert_allclose(d.mass, ref, atol=1e-15)
    np.testing.assert_allclose(marginalize(d, ["X", "Y"]).mass, pxy, atol=1e-12)
    assert is_markov_chain(d, "X", ("A", "Y"), "Z")
    assert mi_oracle(d, "X", "Z", ("A", "Y")) <= 1e-12


def test_markov_examples(rng):
    pa = rng.dirichlet(np.ones(3))
    d = compose(compose(jd(["A"], pa),
                        ConditionalChannel.from_array(["A"], ["B"], rng.dirichlet(np.ones(2), 3))),
                ConditionalChannel.from_array(["B"], ["C"], rng.dirichlet(np.ones(4), 2)))
    assert is_markov_chain(d, "A", "B", "C")
    copy = np.zeros((2, 2, 2))
    copy[0, :, 0] = 0.25
    copy[1, :, 1] = 0.25
    assert not is_markov_chain(jd(["A", "B", "C"], copy), "A", "B", "C")


def test_binary_entropy():
    assert binary_entropy(0.6) == pytest.approx(H06, abs=1e-15)
    np.testing.assert_allclose(binary_entropy(np.array([0.0, 0.5, 1.0])), [0, 1, 0])


@given(joints())
def test_chain_rule(d):
    a, rest = d.names[0], d.names[1:]
    lhs = entropy(d, d.names)
    assert lhs == pytest.approx(entropy(d, a) + conditional_entropy(d, rest, a), abs=1e-9)


@given(joints())
def test_nonnegativity(d):
    names = d.names
    assert entropy(d, names) >= 0
    assert conditional_mutual_information(d, names[0], names[1], names[2:]) >= 0
    assert conditional_entropy(d, names[0], names[1:]) >= 0


@given(joints(max_vars=4, min_vars=3))
def test_mi_oracle_agreement(d):
    n = d.names
    for a, b, c in ((n[0], n[1], n[2:]), (n[1:2], n[2:], n[:1]), (n[:2], n[2:], ())):
        assert abs(mi_oracle(d, a, b, c) - conditional_mutual_information(d, a, b, c)) <= 1e-9


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_data_processing(seed, na, nb, nc):
    rng = np.random.default_rng(seed)
    d = compose(compose(jd(["A"], rng.dirichlet(np.ones(na))),
                        ConditionalChannel.from_array(["A"], ["B"], rng.dirichlet(np.ones(nb), na))),
                ConditionalChannel.from_array(["B"], ["C"], rng.dirichlet(np.ones(nc), nb)))
    assert conditional_mutual_information(d, "A", "C") <= conditional_mutual_information(d, "A", "B") + 1e-9
    assert is_markov_chain(d, "A", "B", "C")


@given(joints(min_vars=2, max_vars=3))
def test_marginalize_compose_roundtrip(d):
    rng = np.random.default_rng(7)
    ch = ConditionalChannel.from_array(d.names, ["Z"], rng.dirichlet(np.ones(3), size=d.mass.shape))
    back = marginalize(compose(d, ch), d.names)
    np.testing.assert_allclose(back.mass, d.mass, atol=1e-12)
