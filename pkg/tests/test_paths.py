# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function, unicode_literals

import math

import numpy as np
import pytest

from ntrmst import (
    CompoundPriorSpec,
    exponential_functionals,
    marginal_moments,
    MomentTable,
    path_survival,
    PosteriorLaplace,
    PriorLaplace,
    rmst_correlation,
    simulate_jumps,
    simulate_posterior_jumps,
    variance_correlation,
    variance_difference_moments,
)
from ntrmst._paths import PathJumps
from ntrmst.data import default_scenario, generate, make_rng


def _within(sample, expected, se=4.0):
    error = se * np.std(sample) / math.sqrt(len(sample))
    return abs(np.mean(sample) - expected) <= error


@pytest.fixture()
def hand_jumps():
    # S_1 halves at 1 and at 2, S_2 only at 2
    return PathJumps(1, 3.0, [0, 0], [1.0, 2.0], [math.log(2), math.log(2)], [[1, 0], [1, 1]])


def test_hand_path(hand_jumps):
    assert exponential_functionals(hand_jumps, 1) == pytest.approx([1.75])
    assert exponential_functionals(hand_jumps, 2) == pytest.approx([2.5])
    assert exponential_functionals(hand_jumps, 1, k=2) == pytest.approx([3.75])
    assert exponential_functionals(hand_jumps, 1, t=1.5) == pytest.approx([1.25])
    assert path_survival(hand_jumps, 1, 3.0) == pytest.approx([0.25])
    assert path_survival(hand_jumps, 1, 1.5) == pytest.approx([0.5])
    assert path_survival(hand_jumps, 2, 1.5) == pytest.approx([1.0])
    with pytest.raises(ValueError):
        exponential_functionals(hand_jumps, 3)
    with pytest.raises(ValueError):
        path_survival(hand_jumps, 0, 1.0)


def test_paths_without_jumps():
    jumps = PathJumps(3, 2.0, [], [], [], [])
    assert len(jumps) == 0
    assert exponential_functionals(jumps, 1) == pytest.approx([2.0] * 3)
    assert exponential_functionals(jumps, 2, k=2) == pytest.approx([4.0] * 3)
    assert path_survival(jumps, 1, 2.0) == pytest.approx([1.0] * 3)


def test_jump_order_does_not_matter(hand_jumps):
    swapped = PathJumps(2, 3.0, [1, 0, 1, 0], [2.0, 2.0, 1.0, 1.0], [math.log(2)] * 4,
                        [[1, 1], [1, 1], [1, 0], [1, 0]])
    assert exponential_functionals(swapped, 1) == pytest.approx([1.75, 1.75])


def test_concatenate_and_subset(hand_jumps):
    joined = hand_jumps.concatenate(PathJumps(1, 4.0, [0], [3.5], [1.0], [[0, 1]]))
    assert len(joined) == 3
    assert joined.t == 4.0
    assert len(joined.subset(joined.time < 2.5)) == 2
    with pytest.raises(ValueError):
        hand_jumps.concatenate(PathJumps(2, 3.0, [], [], [], []))


def test_simulate_validation():
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.4, 0.3, 0.3))
    with pytest.raises(ValueError):
        simulate_jumps(spec, np.inf, 10, make_rng(0))
    with pytest.raises(ValueError):
        simulate_jumps(spec, 1.0, 10, make_rng(0), eps=0.0)


def test_simulated_jumps_are_inside_horizon():
    spec = CompoundPriorSpec.build(gamma=2.0, rate=0.3, pi1=(0.4, 0.3, 0.3))
    jumps = simulate_jumps(spec, 3.0, 200, make_rng(1))
    assert len(jumps) > 0
    assert np.all((jumps.time >= 0) & (jumps.time <= 3.0))
    assert np.all(jumps.size >= 1e-6 * (1 - 1e-9))
    assert np.all((jumps.path >= 0) & (jumps.path < 200))
    assert set(map(tuple, jumps.score.tolist())) <= {(1, 1), (1, 0), (0, 1)}
    assert simulate_jumps(spec, 3.0, 200, make_rng(1)).time == pytest.approx(jumps.time)


def test_prior_paths_match_moment_recursion():
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.4, 0.3, 0.3))
    laplace = PriorLaplace(spec)
    t = 3.0
    jumps = simulate_jumps(spec, t, 20000, make_rng(2))
    for group in (1, 2):
        assert _within(path_survival(jumps, group, t), float(laplace.survival(group, t)))
        mu = exponential_functionals(jumps, group)
        m1, m2 = marginal_moments(group, 'mean', 2, t, laplace).values
        assert _within(mu, m1)
        assert _within(mu ** 2, m2)
    mixed = MomentTable(laplace, (1, 2), (1, 1), t).moment((1, 1))
    assert _within(exponential_functionals(jumps, 1) * exponential_functionals(jumps, 2), mixed)


def test_posterior_paths_match_moment_recursion(tied_dataset):
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.4, 0.3, 0.3))
    laplace = PosteriorLaplace(spec, tied_dataset)
    t = 2.5
    jumps = simulate_posterior_jumps(laplace, t, 20000, make_rng(3))
    # one fixed jump per path at every exact time up to t
    assert np.sum(jumps.time == 2.0) >= 20000
    for group in (1, 2):
        assert _within(path_survival(jumps, group, t), float(laplace.survival(group, t)))
        m1, m2 = marginal_moments(group, 'mean', 2, t, laplace).values
        mu = exponential_functionals(jumps, group)
        assert _within(mu, m1)
        assert _within(mu ** 2, m2)


def test_restricted_moments_match_paths_at_five():
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.5, 0.25, 0.25))
    t = 5.0
    prior = PriorLaplace(spec)
    jumps = simulate_jumps(spec, t, 100000, make_rng(4))
    expected = MomentTable(prior, (1,), (1,), t).moment((2,))
    assert _within(exponential_functionals(jumps, 1) ** 2, expected, se=3.0)

    post = PosteriorLaplace(spec, generate(default_scenario(n=10, seed=4)))
    jumps = simulate_posterior_jumps(post, t, 100000, make_rng(5))
    expected = MomentTable(post, (1, 2), (1, 1), t).moment((1, 1))
    assert _within(exponential_functionals(jumps, 1) * exponential_functionals(jumps, 2), expected, se=3.0)


def test_variance_functionals_match_paths():
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.5, 0.25, 0.25))
    laplace = PriorLaplace(spec)
    t = 3.0
    jumps = simulate_jumps(spec, t, 20000, make_rng(6))
    means = [exponential_functionals(jumps, g) for g in (1, 2)]
    variances = [exponential_functionals(jumps, g, k=2) - mu ** 2 for g, mu in zip((1, 2), means)]

    moments = variance_difference_moments(2, t, laplace)
    assert _within(variances[0] - variances[1], moments[1])
    assert _within((variances[0] - variances[1]) ** 2, moments[2])
    assert variance_correlation(t, laplace) == pytest.approx(np.corrcoef(*variances)[0, 1], abs=0.03)
    assert rmst_correlation(t, laplace) == pytest.approx(np.corrcoef(*means)[0, 1], abs=0.03)
