# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function, unicode_literals

import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from ntrmst import (
    BaselineCentering,
    CompoundPriorSpec,
    directing_psi_star,
    LogBetaDirecting,
    prior_psi,
    prior_survival,
    prior_survival_variance,
    PriorLaplace,
    ScoreDistribution,
    StratifiedScore,
)


def _levy_quadrature(m, s, t, directing):
    gamma, baseline = directing.gamma, directing.baseline

    def inner(u):
        c = gamma * float(baseline.survival(u))
        value, _ = quad(lambda x: math.expm1(-m * x) / math.expm1(-x) * math.exp(-c * x), 0.0, np.inf,
                        epsabs=1e-13, epsrel=1e-12, limit=200)
        return gamma * float(baseline.density(u)) * value

    value, _ = quad(inner, s, t, epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


@pytest.mark.parametrize('m', range(1, 7))
@pytest.mark.parametrize('gamma', [0.5, 1.0, 2.0])
@pytest.mark.parametrize('t', [0.5, 1.0, 5.0])
def test_directing_psi_star_matches_levy_quadrature(m, gamma, t):
    directing = LogBetaDirecting(gamma, BaselineCentering(0.3))
    assert directing_psi_star(m, 0.0, t, directing) == pytest.approx(_levy_quadrature(m, 0.0, t, directing),
                                                                     abs=1e-8)


def test_directing_psi_star_edges():
    directing = LogBetaDirecting(1.0, BaselineCentering(0.3))
    assert directing_psi_star(0, 0.0, 2.0, directing) == 0
    # m = 1 telescopes to log(beta(s) / beta(t))
    assert directing_psi_star(1, 1.0, 3.0, directing) == pytest.approx(0.3 * 2.0)
    assert directing_psi_star(3, 1.0, 3.0, directing) > directing_psi_star(2, 1.0, 3.0, directing)
    with pytest.raises(ValueError):
        directing_psi_star(1, 2.0, 1.0, directing)
    with pytest.raises(ValueError):
        directing_psi_star(1, 0.0, math.inf, directing)
    with pytest.raises(ValueError):
        directing_psi_star(-1, 0.0, 1.0, directing)


@pytest.mark.parametrize('a', np.linspace(0, 1, 10))
def test_centering_on_full_group_weight(a):
    spec = CompoundPriorSpec.build(gamma=1.7, rate=0.3, pi1=(a, 1 - a, 0.0))
    for t in np.linspace(0.05, 20, 100):
        assert prior_survival(t, spec, 1) == pytest.approx(math.exp(-0.3 * t), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize('pi', [(0.5, 0.25, 0.25), (0.1, 0.3, 0.6), (0.0, 0.5, 0.5)])
def test_marginal_survival_is_power_of_baseline(pi):
    spec = CompoundPriorSpec.build(gamma=2.0, rate=0.3, pi1=pi)
    for t in (0.5, 3.0, 10.0):
        beta = math.exp(-0.3 * t)
        assert prior_survival(t, spec, 1) == pytest.approx(beta ** (pi[0] + pi[1]), rel=1e-12)
        assert prior_survival(t, spec, 2) == pytest.approx(beta ** (pi[0] + pi[2]), rel=1e-12)
    assert prior_survival(0, spec, 1) == 1


@pytest.mark.parametrize('gamma', [0.5, 1.0, 4.0])
def test_prior_survival_variance_centred(gamma):
    spec = CompoundPriorSpec.build(gamma=gamma, rate=0.3)
    for t in (0.5, 2.0, 7.0):
        beta = math.exp(-0.3 * t)
        assert prior_survival_variance(t, spec, 2) == pytest.approx(beta * (1 - beta) / (1 + gamma), rel=1e-10)
    assert prior_survival_variance(0, spec, 1) == 0


def test_prior_psi_independent_scores_split():
    spec = CompoundPriorSpec.build(gamma=1.0, rate=0.3, pi1=(0.0, 0.5, 0.5))
    directing = spec.directing
    expected = 0.5 * directing_psi_star(2, 0, 4.0, directing) + 0.5 * directing_psi_star(3, 0, 4.0, directing)
    assert prior_psi((2, 3), 4.0, spec) == pytest.approx(expected)
    assert prior_psi((0, 0), 4.0, spec) == 0
    with pytest.raises(ValueError):
        prior_psi((1, 0), 0.0, spec)


def test_stratified_prior_psi():
    pre, post = (0.2, 0.4, 0.4), (0.9, 0.05, 0.05)
    spec = CompoundPriorSpec.build(gamma=1.3, rate=0.3, pi1=pre, pi2=post, tau=2.0)
    flat = CompoundPriorSpec.build(gamma=1.3, rate=0.3, pi1=pre)
    assert spec.stratified
    # before tau only the first triplet matters
    assert prior_psi((2, 1), 1.5, spec) == pytest.approx(prior_psi((2, 1), 1.5, flat), rel=1e-14)

    r = np.array([2, 1])
    directing = spec.directing
    support = [(1, 1), (1, 0), (0, 1)]
    expected = sum(p * directing_psi_star(int(r @ w), 0.0, 2.0, directing) for p, w in zip(pre, support))
    expected += sum(p * directing_psi_star(int(r @ w), 2.0, 5.0, directing) for p, w in zip(post, support))
    assert prior_psi((2, 1), 5.0, spec) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize('tau', [0.3, 2.0, 25.0])
def test_equal_strata_match_flat_score(tau):
    pi = (0.5, 0.2, 0.3)
    stratified = CompoundPriorSpec.build(gamma=1.3, rate=0.3, pi1=pi, pi2=pi, tau=tau)
    flat = CompoundPriorSpec.build(gamma=1.3, rate=0.3, pi1=pi)
    for r in [(1, 0), (0, 1), (2, 1), (4, 3)]:
        for t in (0.1, 1.0, 2.0, 7.5):
            assert prior_psi(r, t, stratified) == pytest.approx(prior_psi(r, t, flat), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize('tau', [None, 1.5])
def test_prior_laplace_matches_prior_psi(tau):
    spec = CompoundPriorSpec.build(gamma=0.8, rate=0.3, pi1=(0.5, 0.25, 0.25),
                                   pi2=None if tau is None else (0.1, 0.6, 0.3), tau=tau)
    laplace = PriorLaplace(spec)
    for r in [(1, 0), (0, 1), (2, 3), (5, 1)]:
        for t in (0.3, 1.5, 4.0):
            assert laplace.psi(r, t) == pytest.approx(prior_psi(r, t, spec), rel=1e-12)
    ts = np.array([0.0, 1.0, 3.0])
    assert np.allclose(laplace.survival(1, ts), [prior_survival(t, spec, 1) for t in ts])
    assert laplace.jump_times(0, 10).size == 0


def test_log_ratio_path_requires_ordered_vectors(make_spec):
    laplace = PriorLaplace(make_spec())
    with pytest.raises(ValueError):
        laplace.log_ratio_path((1, 0), (0, 1), [1.0])


@pytest.mark.parametrize('pi', [(0.5, 0.5), (0.5, 0.6, -0.1), (0.2, 0.2, 0.2), (np.nan, 0.5, 0.5)])
def test_score_distribution_validation(pi):
    with pytest.raises(ValueError):
        ScoreDistribution(pi)


def test_score_probabilities():
    score = ScoreDistribution((0.5, 0.25, 0.25))
    assert score.probabilities_at([1.0, 2.0]).shape == (2, 3)
    assert score.marginal_weight(1) == pytest.approx(0.75)
    assert score.tau is None

    stratified = StratifiedScore((1, 0, 0), (0, 0.5, 0.5), tau=2.0)
    probs = stratified.probabilities_at([1.0, 2.0, 2.5])
    assert probs[1].tolist() == [1.0, 0.0, 0.0]
    assert probs[2].tolist() == [0.0, 0.5, 0.5]
    with pytest.raises(ValueError):
        StratifiedScore((1, 0, 0), (1, 0, 0), tau=0.0)


def test_baseline_validation():
    with pytest.raises(ValueError):
        BaselineCentering(0.0)
    with pytest.raises(ValueError):
        BaselineCentering(1.0, family='weibull')
    with pytest.raises(ValueError):
        LogBetaDirecting(-1.0, BaselineCentering(0.3))

    baseline = BaselineCentering(0.3)
    assert float(baseline.inverse_survival(baseline.survival(2.5))) == pytest.approx(2.5)


def test_spec_build_and_serialize(tmp_path):
    with pytest.raises(ValueError):
        CompoundPriorSpec.build(pi1=(1, 0, 0), pi2=(0, 1, 0))

    spec = CompoundPriorSpec.build(gamma=2.0, rate=0.5, pi1=(0.2, 0.3, 0.5), pi2=(0.6, 0.2, 0.2), tau=1.25)
    d = spec.to_dict()
    assert d == {'gamma': 2.0, 'baseline': {'family': 'exponential', 'rate': 0.5},
                 'score': {'pi1': [0.2, 0.3, 0.5], 'pi2': [0.6, 0.2, 0.2], 'tau': 1.25}}
    assert CompoundPriorSpec.from_dict(d) == spec
    assert CompoundPriorSpec.from_dict(json.loads(json.dumps(d))) == spec

    path = tmp_path / 'hyperfit.json'
    path.write_text(json.dumps({'spec': d, 'loglik': -3.0}))
    assert CompoundPriorSpec.load(str(path)) == spec

    with pytest.raises(ValueError):
        CompoundPriorSpec.from_dict({'gamma': 1.0})
