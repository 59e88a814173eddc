# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function, unicode_literals

import itertools
import math
import warnings

import numpy as np
import pytest
from scipy.integrate import dblquad, quad, trapezoid

from ntrmst import (
    CombinatorialError,
    CompoundPriorSpec,
    DegenerateVarianceError,
    linear_combination_moment,
    marginal_moments,
    mean_difference_moments,
    mixed_moment,
    MomentSpec,
    MomentTable,
    NumericalWarning,
    PosteriorLaplace,
    PriorLaplace,
    rmst_correlation,
    variance_correlation,
    variance_difference_moments,
)
from ntrmst._moments import functional_moments
from ntrmst.data import default_scenario, generate


def _prior(pi=(1.0, 0.0, 0.0), gamma=1.0):
    return PriorLaplace(CompoundPriorSpec.build(gamma=gamma, rate=0.3, pi1=pi))


def test_first_prior_moment_is_integrated_survival():
    laplace = _prior(pi=(0.5, 0.25, 0.25))
    # E[S_1(u)] = beta(u)^(3/4)
    expected, _ = quad(lambda u: math.exp(-0.3 * 0.75 * u), 0, 5.0)
    assert mixed_moment(MomentSpec((1,), (1,), (1,), 5.0), laplace) == pytest.approx(expected, rel=1e-9)
    # k = 2 weights the survival with 2u
    expected, _ = quad(lambda u: 2 * u * math.exp(-0.3 * 0.75 * u), 0, 5.0)
    assert mixed_moment(MomentSpec((1,), (2,), (1,), 5.0), laplace) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize('gamma', [0.5, 2.0])
def test_second_prior_moment(gamma):
    laplace = _prior(gamma=gamma)
    t = 5.0

    def beta(u):
        return math.exp(-0.3 * u)

    # E[S(u) S(v)] = beta(v) (gamma beta(u) + 1) / (gamma + 1) for u < v
    expected, _ = dblquad(lambda v, u: 2 * beta(v) * (gamma * beta(u) + 1) / (gamma + 1), 0, t, lambda u: u,
                          lambda u: t, epsabs=1e-12, epsrel=1e-12)
    assert mixed_moment(MomentSpec((1,), (1,), (2,), t), laplace) == pytest.approx(expected, rel=1e-8)


def test_restriction_start():
    laplace = _prior()
    expected = (math.exp(-0.3) - math.exp(-0.3 * 4.0)) / 0.3
    assert mixed_moment(MomentSpec((1,), (1,), (1,), 4.0, s=1.0), laplace) == pytest.approx(expected, rel=1e-9)


def test_moment_table_shares_recursion(tied_dataset):
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.5, 0.25, 0.25))
    laplace = PosteriorLaplace(spec, tied_dataset)
    table = MomentTable(laplace, (1, 2), (1, 1), 3.0)
    assert table.moment((0, 0)) == 1.0
    assert table.moment((1, 1)) == pytest.approx(mixed_moment(MomentSpec((1, 2), (1, 1), (1, 1), 3.0), laplace))
    at_nodes = table.at_nodes((1, 0))
    assert at_nodes[-1] == 0
    assert np.all(np.diff(at_nodes) <= 1e-14)
    frame = table.to_frame()
    assert list(frame.columns) == ['r1', 'r2', 'k1', 'k2', 's', 't', 'value']
    assert frame[['r1', 'r2']].values.tolist() == [[0, 0], [1, 1]]
    assert frame['value'].tolist() == [1.0, table.moment((1, 1))]
    assert frame['t'].tolist() == [3.0, 3.0]


def test_restricted_mean_is_below_horizon(tied_dataset):
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.4, 0.3, 0.3))
    laplace = PosteriorLaplace(spec, tied_dataset)
    for group in (1, 2):
        m1, m2 = marginal_moments(group, 'mean', 2, 3.0, laplace).values
        assert 0 < m1 < 3.0
        assert m2 >= m1 ** 2
        # E[mu] is the integral of the posterior mean survival
        grid = np.linspace(0, 3.0, 20001)
        assert m1 == pytest.approx(trapezoid(laplace.survival(group, grid), grid), rel=1e-5)


def test_difference_moments_are_consistent(tied_dataset):
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.4, 0.3, 0.3))
    laplace = PosteriorLaplace(spec, tied_dataset)
    t = 2.5
    diff = mean_difference_moments(3, t, laplace)
    m1 = marginal_moments(1, 'mean', 2, t, laplace)
    m2 = marginal_moments(2, 'mean', 2, t, laplace)
    table = MomentTable(laplace, (1, 2), (1, 1), t)
    assert diff[0] == 1.0
    assert diff.order == 3
    assert diff[1] == pytest.approx(m1[1] - m2[1], rel=1e-10, abs=1e-12)
    assert diff[2] == pytest.approx(m1[2] - 2 * table.moment((1, 1)) + m2[2], rel=1e-8)

    var = variance_difference_moments(2, t, laplace)
    v1 = marginal_moments(1, 'variance', 1, t, laplace)
    v2 = marginal_moments(2, 'variance', 1, t, laplace)
    assert var[1] == pytest.approx(v1[1] - v2[1], rel=1e-8, abs=1e-12)
    assert var[2] >= var[1] ** 2
    assert var.to_dict() == {'functional': 'variance-difference', 't': t, 'moments': var.values}


@pytest.mark.parametrize('t', [1.0, 2.5])
def test_shared_score_makes_difference_vanish(t, tied_dataset):
    laplace = _prior()
    for evaluator in (laplace, PosteriorLaplace(laplace.spec, tied_dataset)):
        diff = mean_difference_moments(6, t, evaluator)
        assert np.max(np.abs(diff.values)) <= 1e-10


def test_linear_combination_moment():
    laplace = _prior(pi=(0.0, 0.5, 0.5))
    t = 4.0
    # independent processes: E[(mu_1 + mu_2)^2] = 2 E[mu^2] + 2 E[mu]^2
    m = marginal_moments(1, 'mean', 2, t, laplace)
    value = linear_combination_moment([1.0, 1.0], [(1, 1, 1), (2, 1, 1)], 2, laplace, t)
    assert value == pytest.approx(2 * m[2] + 2 * m[1] ** 2, rel=1e-7)
    assert linear_combination_moment([2.0], [(1, 1, 1)], 0, laplace, t) == 1.0

    with pytest.raises(CombinatorialError):
        linear_combination_moment([1, -1, -1, 1], [(1, 2, 1), (1, 1, 2), (2, 2, 1), (2, 1, 2)], 200, laplace, t)
    with pytest.raises(ValueError):
        linear_combination_moment([1.0], [(1, 1, 1), (2, 1, 1)], 1, laplace, t)


@pytest.mark.parametrize('t', [5.0, 10.0])
def test_correlation_endpoints(t):
    assert rmst_correlation(t, _prior(pi=(1.0, 0.0, 0.0))) == pytest.approx(1.0, abs=1e-6)
    assert variance_correlation(t, _prior(pi=(1.0, 0.0, 0.0))) == pytest.approx(1.0, abs=1e-6)
    assert rmst_correlation(t, _prior(pi=(0.0, 0.5, 0.5))) == pytest.approx(0.0, abs=1e-6)
    assert variance_correlation(t, _prior(pi=(0.0, 0.5, 0.5))) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize('t', [5.0, 10.0])
def test_correlation_increases_with_shared_weight(t):
    sweep = np.linspace(0.1, 0.9, 9)
    rmst = [rmst_correlation(t, _prior(pi=(p, (1 - p) / 2, (1 - p) / 2))) for p in sweep]
    variance = [variance_correlation(t, _prior(pi=(p, (1 - p) / 2, (1 - p) / 2))) for p in sweep]
    assert np.all(np.diff(rmst) >= -1e-9)
    assert np.all(np.diff(variance) >= -1e-9)
    assert all(0 < c < 1 for c in rmst)


def test_posterior_correlation_in_range(tied_dataset):
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.5, 0.25, 0.25))
    laplace = PosteriorLaplace(spec, tied_dataset)
    assert -1 <= rmst_correlation(2.0, laplace) <= 1
    assert -1 <= variance_correlation(2.0, laplace) <= 1


def test_degenerate_variance(mocker):
    laplace = _prior()
    mocker.patch('ntrmst._moments._expect', return_value=0.0)
    with pytest.raises(DegenerateVarianceError):
        rmst_correlation(5.0, laplace)


def test_coarse_grid_warns():
    laplace = _prior()
    with pytest.warns(NumericalWarning):
        mixed_moment(MomentSpec((1,), (1,), (3,), 20.0), laplace, nodes=3)


def test_extrapolated_moments_are_quiet_on_default_grid():
    dataset = generate(default_scenario(n=300, seed=1))
    laplace = PosteriorLaplace(CompoundPriorSpec.build(gamma=1.0, rate=0.1, pi1=(0.4, 0.3, 0.3)), dataset)
    with warnings.catch_warnings():
        warnings.simplefilter('error', NumericalWarning)
        diff = mean_difference_moments(6, 30.0, laplace)
    assert diff.order == 6
    assert diff[2] >= diff[1] ** 2


@pytest.mark.parametrize('pi', [(1.0, 0.0, 0.0), (0.5, 0.25, 0.25), (0.2, 0.4, 0.4)])
def test_moments_are_bounded(pi, tied_dataset):
    t = 3.0
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=pi)
    for laplace in (PriorLaplace(spec), PosteriorLaplace(spec, tied_dataset)):
        table = MomentTable(laplace, (1, 2), (1, 1), t)
        for r in itertools.product(range(5), repeat=2):
            # every restricted mean is below t
            assert 0 < table.moment(r) <= t ** sum(r) * (1 + 1e-12)
        assert table.moment((1, 1)) <= math.sqrt(table.moment((2, 0)) * table.moment((0, 2))) * (1 + 1e-12)


def test_moment_spec_validation():
    with pytest.raises(ValueError):
        MomentSpec((1, 3), (1, 1), (1, 1), 1.0)
    with pytest.raises(ValueError):
        MomentSpec((1,), (0,), (1,), 1.0)
    with pytest.raises(ValueError):
        MomentSpec((1,), (1,), (1,), 1.0, s=1.0)
    with pytest.raises(ValueError):
        MomentSpec((1, 2), (1,), (1, 1), 1.0)
    with pytest.raises(ValueError):
        functional_moments('median-difference', 2, 1.0, _prior())
