# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function, unicode_literals

# The MIT License

# Copyright (c) 2024 ntrmst developers

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in
# all copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
# THE SOFTWARE.

import json
import math

import numpy as np

from ._util import as_count, as_count_vector, log_rising_ratio

# Score support points, in the order of the probability triplets.
SUPPORT = np.array([[1, 1], [1, 0], [0, 1]], dtype=np.int64)


class BaselineCentering(object):
    """Parametric centering measure: density `alpha` and survival `beta`.

    Only the exponential family is shipped: `alpha(s) = rate * exp(-rate * s)`.
    """
    FAMILIES = ('exponential',)

    def __init__(self, rate, family='exponential'):
        if family not in self.FAMILIES:
            raise ValueError('Unknown baseline family {!r}, supported: {}.'.format(family, self.FAMILIES))
        rate = float(rate)
        if not (rate > 0 and math.isfinite(rate)):
            raise ValueError('Baseline rate has to be positive and finite, got {}.'.format(rate))
        self._family = family
        self._rate = rate

    @property
    def family(self):
        return self._family

    @property
    def rate(self):
        return self._rate

    def density(self, s):
        return self._rate * np.exp(-self._rate * np.asarray(s, dtype=float))

    def log_density(self, s):
        return math.log(self._rate) - self._rate * np.asarray(s, dtype=float)

    def survival(self, s):
        return np.exp(-self._rate * np.asarray(s, dtype=float))

    def inverse_survival(self, b):
        return -np.log(b) / self._rate

    def to_dict(self):
        return {'family': self._family, 'rate': self._rate}

    @classmethod
    def from_dict(cls, d):
        return cls(rate=d['rate'], family=d.get('family', 'exponential'))

    def __eq__(self, other):
        return isinstance(other, BaselineCentering) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return 'BaselineCentering(rate={}, family={!r})'.format(self._rate, self._family)


class LogBetaDirecting(object):
    """Log-Beta directing Levy measure with precision `gamma`.

    The intensity `gamma * exp(-gamma * beta(s) * x) * alpha(s) / (1 - exp(-x))`
    is only ever integrated in closed form.
    """
    def __init__(self, gamma, baseline):
        gamma = float(gamma)
        if not (gamma > 0 and math.isfinite(gamma)):
            raise ValueError('gamma has to be positive and finite, got {}.'.format(gamma))
        if not isinstance(baseline, BaselineCentering):
            raise ValueError('baseline has to be a BaselineCentering, got {!r}.'.format(baseline))
        self._gamma = gamma
        self._baseline = baseline

    @property
    def gamma(self):
        return self._gamma

    @property
    def baseline(self):
        return self._baseline

    def shape(self, s):
        """`gamma * beta(s)`, the exponential rate of the jump sizes at time `s`."""
        return self._gamma * self._baseline.survival(s)

    def __eq__(self, other):
        return (isinstance(other, LogBetaDirecting) and self._gamma == other._gamma
                and self._baseline == other._baseline)

    def __repr__(self):
        return 'LogBetaDirecting(gamma={}, baseline={!r})'.format(self._gamma, self._baseline)


def _check_triplet(pi):
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (3,):
        raise ValueError('Score probabilities have to be a triplet, got {!r}.'.format(pi.tolist()))
    if np.any(pi < 0) or not np.all(np.isfinite(pi)):
        raise ValueError('Score probabilities have to be nonnegative, got {}.'.format(pi.tolist()))
    if abs(pi.sum() - 1.0) > 1e-9:
        raise ValueError('Score probabilities have to sum to 1, got {}.'.format(pi.tolist()))
    return pi / pi.sum()


class ScoreDistribution(object):
    """Categorical score on (1, 1), (1, 0), (0, 1) with probabilities `pi`."""
    def __init__(self, pi):
        self._pi = _check_triplet(pi)

    @property
    def pi(self):
        return tuple(self._pi.tolist())

    @property
    def tau(self):
        return None

    @property
    def strata(self):
        """List of `(start, end, probabilities)` covering the time axis."""
        return [(0.0, math.inf, self._pi)]

    def probabilities_at(self, s):
        """Score probabilities for jumps at time(s) `s`, shape `s.shape + (3,)`."""
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self._pi, s.shape + (3,))

    def marginal_weight(self, group):
        return float(self._pi @ SUPPORT[:, group - 1])

    def to_dict(self):
        return {'pi1': list(self.pi)}

    def __eq__(self, other):
        return isinstance(other, ScoreDistribution) and np.array_equal(self._pi, other._pi)

    def __repr__(self):
        return 'ScoreDistribution(pi={})'.format(self.pi)


class StratifiedScore(object):
    """Score switching from `pre` to `post` for jump times after `tau`."""
    def __init__(self, pre, post, tau):
        if not isinstance(pre, ScoreDistribution):
            pre = ScoreDistribution(pre)
        if not isinstance(post, ScoreDistribution):
            post = ScoreDistribution(post)
        tau = float(tau)
        if not (tau > 0 and math.isfinite(tau)):
            raise ValueError('tau has to be positive and finite, got {}.'.format(tau))
        self._pre = pre
        self._post = post
        self._tau = tau

    @property
    def pre(self):
        return self._pre

    @property
    def post(self):
        return self._post

    @property
    def tau(self):
        return self._tau

    @property
    def strata(self):
        return [(0.0, self._tau, self._pre._pi), (self._tau, math.inf, self._post._pi)]

    def probabilities_at(self, s):
        s = np.asarray(s, dtype=float)
        return np.where((s <= self._tau)[..., None], self._pre._pi, self._post._pi)

    def to_dict(self):
        return {'pi1': list(self._pre.pi), 'pi2': list(self._post.pi), 'tau': self._tau}

    def __eq__(self, other):
        return (isinstance(other, StratifiedScore) and self._tau == other._tau
                and self._pre == other._pre and self._post == other._post)

    def __repr__(self):
        return 'StratifiedScore(pre={}, post={}, tau={})'.format(self._pre.pi, self._post.pi, self._tau)


class CompoundPriorSpec(object):
    """Two-sample compound Log-Beta prior: directing measure plus score."""
    dimension = 2

    def __init__(self, directing, score):
        if not isinstance(directing, LogBetaDirecting):
            raise ValueError('directing has to be a LogBetaDirecting, got {!r}.'.format(directing))
        if not isinstance(score, (ScoreDistribution, StratifiedScore)):
            raise ValueError('score has to be a ScoreDistribution or StratifiedScore, got {!r}.'.format(score))
        self._directing = directing
        self._score = score

    @classmethod
    def build(cls, gamma=1.0, rate=0.3, pi1=(1.0, 0.0, 0.0), pi2=None, tau=None):
        """Convenience constructor from plain values."""
        directing = LogBetaDirecting(gamma, BaselineCentering(rate))
        if pi2 is None and tau is None:
            score = ScoreDistribution(pi1)
        elif tau is None:
            raise ValueError('A second score triplet needs a threshold tau.')
        else:
            score = StratifiedScore(pi1, pi1 if pi2 is None else pi2, tau)
        return cls(directing, score)

    @property
    def directing(self):
        return self._directing

    @property
    def score(self):
        return self._score

    @property
    def gamma(self):
        return self._directing.gamma

    @property
    def baseline(self):
        return self._directing.baseline

    @property
    def tau(self):
        return self._score.tau

    @property
    def stratified(self):
        return isinstance(self._score, StratifiedScore)

    def with_score(self, score):
        return CompoundPriorSpec(self._directing, score)

    def to_dict(self):
        return {
            'gamma': self.gamma,
            'baseline': self.baseline.to_dict(),
            'score': self._score.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        try:
            score = d['score']
            return cls.build(gamma=d['gamma'], rate=d['baseline']['rate'],
                             pi1=score['pi1'], pi2=score.get('pi2'), tau=score.get('tau'))
        except (KeyError, TypeError) as e:
            raise ValueError('Invalid prior specification, missing {}.'.format(e))

    @classmethod
    def load(cls, path):
        with open(path) as f:
            d = json.load(f)
        # a fitted hyper parameter file carries the prior under 'spec'
        return cls.from_dict(d.get('spec', d))

    def __eq__(self, other):
        return (isinstance(other, CompoundPriorSpec) and self._directing == other._directing
                and self._score == other._score)

    def __repr__(self):
        return 'CompoundPriorSpec({!r}, {!r})'.format(self._directing, self._score)


def directing_psi_star(m, s, t, directing):
    """Increment of the directing Laplace exponent over `(s, t]` at integer `m`.

    `sum_{i < m} log((gamma * beta(s) + i) / (gamma * beta(t) + i))`, the
    closed form of the Frullani integral of `(1 - exp(-m x))` against the
    Log-Beta intensity.

    Parameters:
        m: int                       Nonnegative integer argument.
        s, t: float                  Interval with `0 <= s < t < inf`.
        directing: LogBetaDirecting  The directing measure.

    Returns:
        float: psi*_t(m) - psi*_s(m) >= 0
    """
    m = as_count(m)
    if not math.isfinite(t) or not 0 <= s < t:
        raise ValueError('Need 0 <= s < t < inf, got s={}, t={}.'.format(s, t))
    if m == 0:
        return 0.0
    return float(log_rising_ratio(directing.shape(s), directing.shape(t), 0, m))


def prior_psi(r, t, spec):
    """Prior Laplace exponent of the score-compounded vector at integer `r`.

    The score expectation is taken piecewise over the strata of the score,
    i.e. before and after `tau` for a stratified score.

    Parameters:
        r: Tuple[int, int]        Nonnegative integer argument vector.
        t: float                  Time, `t > 0`.
        spec: CompoundPriorSpec   The prior.

    Returns:
        float: psi_t(r) >= 0
    """
    r = np.array(as_count_vector(r))
    if not (t > 0 and math.isfinite(t)):
        raise ValueError('Need 0 < t < inf, got t={}.'.format(t))
    terms = []
    for start, end, probs in spec.score.strata:
        end = min(t, end)
        if end <= start:
            continue
        for weight, p in zip(SUPPORT, probs):
            m = int(r @ weight)
            if p > 0 and m > 0:
                terms.append(p * directing_psi_star(m, start, end, spec.directing))
    return math.fsum(terms)


def prior_survival(t, spec, group):
    """Prior mean survival `exp(-psi_t(e_group))` of group 1 or 2."""
    if t < 0:
        raise ValueError('Need t >= 0, got {}.'.format(t))
    if t == 0:
        return 1.0
    return math.exp(-prior_psi(_unit(group), t, spec))


def prior_survival_variance(t, spec, group):
    """Prior variance of the survival function `S_group(t)`."""
    if t < 0:
        raise ValueError('Need t >= 0, got {}.'.format(t))
    if t == 0:
        return 0.0
    e = _unit(group)
    return math.exp(-prior_psi(tuple(2 * x for x in e), t, spec)) - math.exp(-2 * prior_psi(e, t, spec))


def _unit(group):
    if group not in (1, 2):
        raise ValueError('group has to be 1 or 2, got {!r}.'.format(group))
    return (1, 0) if group == 1 else (0, 1)


class LaplaceExponent(object):
    """Piecewise Laplace exponent over a knot partition.

    The continuous part on interval `(knots[i], knots[i+1]]` is the directing
    exponent with the jump rate shifted by the at-risk vector `risk[i]`
    (zero a priori); subclasses add fixed jumps.

    Parameters:
        spec: CompoundPriorSpec  The prior.
        knots: np.ndarray        Strictly increasing, starting at 0; contains `tau` if stratified.
        risk: np.ndarray         Integer at-risk vectors, shape (len(knots), 2); the last row is
                                 used beyond the last knot.
    """
    def __init__(self, spec, knots, risk):
        knots = np.asarray(knots, dtype=float)
        risk = np.asarray(risk, dtype=np.int64)
        assert knots[0] == 0 and np.all(np.diff(knots) > 0)
        assert risk.shape == (len(knots), 2)
        self._spec = spec
        self._knots = knots
        self._risk = risk
        self._knot_shape = spec.directing.shape(knots)
        # interval i is (knots[i], knots[i+1]], classified by its right end
        right = np.append(knots[1:], math.inf)
        self._probs = spec.score.probabilities_at(right)
        self._shift = risk @ SUPPORT.T

    @property
    def spec(self):
        return self._spec

    @property
    def knots(self):
        return self._knots

    def breakpoints(self, s, t):
        """Knots strictly inside `(s, t)`."""
        return self._knots[(self._knots > s) & (self._knots < t)]

    def jump_times(self, s, t):
        """Fixed jump times in `(s, t]`."""
        return np.empty(0)

    def log_ratio_path(self, hi, lo, points, left=None):
        """`psi_u(hi) - psi_u(lo)` for every `u` in `points`.

        Parameters:
            hi, lo: Tuple[int, int]  Integer vectors with `lo <= hi` componentwise.
            points: array-like       Nondecreasing evaluation times >= 0.
            left: array-like[bool]   Evaluate the left limit at these points.

        Returns:
            np.ndarray: the differences, same shape as `points`.
        """
        hi = np.array(as_count_vector(hi))
        lo = np.array(as_count_vector(lo))
        if np.any(lo > hi):
            raise ValueError('Need lo <= hi componentwise, got lo={}, hi={}.'.format(lo.tolist(), hi.tolist()))
        points = np.asarray(points, dtype=float)
        if left is None:
            left = np.zeros(points.shape, dtype=bool)
        return self._continuous_path(hi, lo, points) + self._jump_path(hi, lo, points, np.asarray(left))

    def _continuous_path(self, hi, lo, points):
        hz, lz = SUPPORT @ hi, SUPPORT @ lo
        # complete intervals
        a = self._knot_shape[:-1, None] + self._shift[:-1]
        b = self._knot_shape[1:, None] + self._shift[:-1]
        full = self._weighted(self._probs[:-1], log_rising_ratio(a, b, lz, hz))
        cum = np.concatenate([[0.0], np.cumsum(full)])
        # partial interval up to each point
        idx = np.clip(np.searchsorted(self._knots, points, side='left') - 1, 0, None)
        shift = self._shift[idx]
        a = self._knot_shape[idx, None] + shift
        b = self._spec.directing.shape(points)[..., None] + shift
        partial = self._weighted(self._probs[idx], log_rising_ratio(a, b, lz, hz))
        return cum[idx] + partial

    @staticmethod
    def _weighted(probs, values):
        return np.sum(np.where(probs > 0, probs * values, 0.0), axis=-1)

    def _jump_path(self, hi, lo, points, left):
        return np.zeros(points.shape)

    def psi(self, r, t):
        return float(self.log_ratio_path(r, (0, 0), [t])[0])

    def survival(self, group, t):
        """Mean survival `exp(-psi_t(e_group))`, vectorized over `t`."""
        t = np.asarray(t, dtype=float)
        return np.exp(-self.log_ratio_path(_unit(group), (0, 0), t))


class PriorLaplace(LaplaceExponent):
    """Vectorized prior Laplace exponent, no data."""
    def __init__(self, spec):
        knots = [0.0] if spec.tau is None else [0.0, spec.tau]
        super(PriorLaplace, self).__init__(spec, knots, np.zeros((len(knots), 2), dtype=np.int64))
