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

from concurrent.futures import ThreadPoolExecutor
import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ._survival import Observation, SurvivalDataset

logger = logging.getLogger(__name__)

RATE_FLOOR = 1e-12


def make_rng(seed):
    """Counter based generator for a seed or a `SeedSequence`."""
    return np.random.Generator(np.random.Philox(seed))


def replicate_seeds(seed, count):
    """Independent child seeds, one per replicate."""
    return np.random.SeedSequence(seed).spawn(count)


class WeibullMixture(object):
    """Finite mixture of Weibull laws with survival `sum_j w_j exp(-(t / scale_j)^shape_j)`.

    Parameters:
        components: List[Tuple[float, float, float]]  (shape, scale, weight) triples.
    """
    def __init__(self, components):
        components = [tuple(float(x) for x in c) for c in components]
        if not components:
            raise ValueError('A mixture needs at least one component.')
        for shape, scale, weight in components:
            if not (shape > 0 and scale > 0 and weight >= 0):
                raise ValueError('Need shape, scale > 0 and weight >= 0, got {}.'.format((shape, scale, weight)))
        self._shape, self._scale, self._weight = (np.array(x) for x in zip(*components))
        if abs(self._weight.sum() - 1) > 1e-9:
            raise ValueError('Mixture weights have to sum to 1, got {}.'.format(self._weight.sum()))

    @property
    def components(self):
        return list(zip(self._shape.tolist(), self._scale.tolist(), self._weight.tolist()))

    def survival(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return np.sum(self._weight * np.exp(-(np.maximum(t, 0) / self._scale) ** self._shape), axis=-1)

    def density(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        z = np.maximum(t, 0) / self._scale
        f = self._shape / self._scale * z ** (self._shape - 1) * np.exp(-z ** self._shape)
        return np.sum(self._weight * np.where(t > 0, f, 0.0), axis=-1)

    def quantile(self, q):
        """Numerically inverted distribution function at level `q` in (0, 1)."""
        if not 0 < q < 1:
            raise ValueError('Quantile level has to be in (0, 1), got {}.'.format(q))
        # the mixture quantile is below the largest component quantile
        upper = float(np.max(self._scale * (-math.log1p(-q)) ** (1 / self._shape)))
        return brentq(lambda t: float(self.survival(t)) - (1 - q), 0.0, upper, xtol=1e-12)

    def sample(self, n, rng):
        idx = rng.choice(len(self._weight), size=n, p=self._weight)
        return self._scale[idx] * rng.weibull(self._shape[idx])

    def to_dict(self):
        return [{'shape': a, 'scale': b, 'weight': w} for a, b, w in self.components]

    @classmethod
    def from_dict(cls, components):
        try:
            return cls([(c['shape'], c['scale'], c['weight']) for c in components])
        except (KeyError, TypeError) as e:
            raise ValueError('Invalid mixture component, missing {}.'.format(e))

    def __eq__(self, other):
        return isinstance(other, WeibullMixture) and self.components == other.components

    def __repr__(self):
        return 'WeibullMixture({})'.format(self.components)


class CensoringSpec(object):
    """Exponential censoring with a fixed `rate` or a Robbins-Monro calibration target.

    `rate=None` means calibrate so that `P(Y < C) = target`; `rate=0` means no censoring.
    With `average` the calibrated rate is the mean of the second half of the iterates.
    """
    def __init__(self, rate=None, target=0.8, iterations=10000, initial=3.0, exponent=0.75, average=True):
        if rate is not None and not rate >= 0:
            raise ValueError('Censoring rate has to be nonnegative, got {}.'.format(rate))
        if not 0 < target < 1:
            raise ValueError('Target event probability has to be in (0, 1), got {}.'.format(target))
        self.rate = None if rate is None else float(rate)
        self.target = float(target)
        self.iterations = int(iterations)
        self.initial = float(initial)
        self.exponent = float(exponent)
        self.average = bool(average)

    @property
    def calibrated(self):
        return self.rate is not None

    def with_rate(self, rate):
        return CensoringSpec(rate, self.target, self.iterations, self.initial, self.exponent, self.average)

    def to_dict(self):
        return {'rate': self.rate, 'target': self.target, 'iterations': self.iterations,
                'initial': self.initial, 'exponent': self.exponent, 'average': self.average}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ('rate', 'target', 'iterations', 'initial', 'exponent', 'average') if k in d})

    def __eq__(self, other):
        return isinstance(other, CensoringSpec) and self.to_dict() == other.to_dict()


class ScenarioSpec(object):
    """Two-group simulation design.

    Parameters:
        mixtures: Tuple[WeibullMixture, WeibullMixture]    Event time laws.
        censoring: Tuple[CensoringSpec, CensoringSpec]     Censoring per group.
        n: int                                             Observations per group.
        seed: int                                          Seed of the Philox stream.
        horizon: float                                     Horizon of the truth values.
    """
    def __init__(self, mixtures, censoring, n=300, seed=0, horizon=30.0):
        if len(mixtures) != 2 or len(censoring) != 2:
            raise ValueError('A scenario has exactly two groups.')
        if int(n) < 1:
            raise ValueError('n has to be positive, got {}.'.format(n))
        if not horizon > 0:
            raise ValueError('horizon has to be positive, got {}.'.format(horizon))
        self.mixtures = tuple(mixtures)
        self.censoring = tuple(censoring)
        self.n = int(n)
        self.seed = int(seed)
        self.horizon = float(horizon)

    @property
    def calibrated(self):
        return all(c.calibrated for c in self.censoring)

    def calibrate(self, rng=None):
        """Scenario with every censoring rate fixed, calibrating the missing ones."""
        rng = make_rng(self.seed) if rng is None else rng
        censoring = []
        for mixture, c in zip(self.mixtures, self.censoring):
            if not c.calibrated:
                c = c.with_rate(robbins_monro_rate(c.target, mixture, c.iterations, c.initial, c.exponent, rng,
                                                   average=c.average))
            censoring.append(c)
        return ScenarioSpec(self.mixtures, censoring, self.n, self.seed, self.horizon)

    def to_dict(self):
        return {
            'n': self.n,
            'seed': self.seed,
            'horizon': self.horizon,
            'groups': [{'components': m.to_dict(), 'censoring': c.to_dict()}
                       for m, c in zip(self.mixtures, self.censoring)],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            groups = d['groups']
            mixtures = [WeibullMixture.from_dict(g['components']) for g in groups]
            censoring = [CensoringSpec.from_dict(g.get('censoring', {})) for g in groups]
        except (KeyError, TypeError, AttributeError) as e:
            raise ValueError('Invalid scenario, missing {}.'.format(e))
        return cls(mixtures, censoring, n=d.get('n', 300), seed=d.get('seed', 0), horizon=d.get('horizon', 30.0))

    def __eq__(self, other):
        return isinstance(other, ScenarioSpec) and self.to_dict() == other.to_dict()


def default_scenario(n=300, seed=0, horizon=30.0):
    """Weibull mixtures `f1 = (W(2.1, 5) + W(1.2, 5.5)) / 2` and `f2 = (W(2.1, 5) + W(5.3, 4.75)) / 2`.

    Censoring rates are calibrated to an event probability of 0.8.
    """
    f1 = WeibullMixture([(2.1, 5.0, 0.5), (1.2, 5.5, 0.5)])
    f2 = WeibullMixture([(2.1, 5.0, 0.5), (5.3, 4.75, 0.5)])
    return ScenarioSpec((f1, f2), (CensoringSpec(), CensoringSpec()), n=n, seed=seed, horizon=horizon)


def robbins_monro_rate(target, mixture, iterations=10000, initial=3.0, exponent=0.75, rng=None, average=False):
    """Exponential censoring rate `theta` with `P(Y < C) = target`.

    Iterates `theta <- max(theta + i^(-exponent) * (1{Y_i < C_i} - target), 1e-12)`
    with fresh draws `Y_i` from `mixture` and `C_i ~ Exp(theta)`.

    Parameters:
        target: float             Event probability in (0, 1).
        mixture: WeibullMixture   Law of the event times.
        iterations: int           Number of updates.
        initial: float            Starting rate.
        exponent: float           Gain exponent, in (1/2, 1].
        rng: np.random.Generator  Random stream, default Philox seeded with 0.
        average: bool             Return the mean of the second half of the iterates.

    Returns:
        float: the final (or averaged) iterate.
    """
    if not 0 < target < 1:
        raise ValueError('Target event probability has to be in (0, 1), got {}.'.format(target))
    if iterations < 1 or not initial > 0:
        raise ValueError('Need iterations >= 1 and a positive initial rate.')
    rng = make_rng(0) if rng is None else rng
    y = mixture.sample(iterations, rng)
    # C = E / theta with E ~ Exp(1), so Y < C iff Y * theta < E
    e = rng.standard_exponential(iterations)
    gains = np.arange(1, iterations + 1, dtype=float) ** -exponent

    theta = float(initial)
    half = iterations // 2
    total = 0.0
    for i in range(iterations):
        theta = max(theta + gains[i] * (float(y[i] * theta < e[i]) - target), RATE_FLOOR)
        if i >= half:
            total += theta
    result = total / (iterations - half) if average else theta
    logger.debug('robbins-monro: target %g, rate %g after %d iterations', target, result, iterations)
    return result


def generate(scenario, rng=None):
    """Simulate a right-censored two-group dataset.

    `T = min(Y, C)` and the event flag `Y <= C`, with `Y` from the group mixture
    and `C` exponential; uncalibrated rates are calibrated first on the same stream.
    """
    rng = make_rng(scenario.seed) if rng is None else rng
    if not scenario.calibrated:
        scenario = scenario.calibrate(rng)
    observations = []
    for group, (mixture, censoring) in enumerate(zip(scenario.mixtures, scenario.censoring), start=1):
        y = mixture.sample(scenario.n, rng)
        if censoring.rate > 0:
            c = rng.exponential(1.0 / censoring.rate, scenario.n)
        else:
            c = np.full(scenario.n, np.inf)
        time = np.minimum(y, c)
        observations.extend(Observation(t, e, group) for t, e in zip(time, y <= c))
    return SurvivalDataset(observations)


def generate_replicates(scenario, count, workers=None):
    """`count` datasets on independent child streams of `scenario.seed`."""
    if not scenario.calibrated:
        scenario = scenario.calibrate()
    seeds = replicate_seeds(scenario.seed, count)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: generate(scenario, make_rng(s)), seeds))


class TruthOracle(object):
    """Closed form survival functions and quadrature restricted moments of a scenario."""
    def __init__(self, mixtures):
        self._mixtures = tuple(mixtures)

    @classmethod
    def of(cls, scenario):
        return cls(scenario.mixtures)

    def survival(self, group, t):
        if group not in (1, 2):
            raise ValueError('group has to be 1 or 2, got {!r}.'.format(group))
        return self._mixtures[group - 1].survival(t)

    def restricted_mean(self, group, t):
        return true_restricted_moments(self, t, 1, group)

    def restricted_variance(self, group, t):
        return true_restricted_moments(self, t, 2, group) - self.restricted_mean(group, t) ** 2

    def to_dict(self, t):
        means = [self.restricted_mean(g, t) for g in (1, 2)]
        variances = [self.restricted_variance(g, t) for g in (1, 2)]
        return {
            't': t,
            'survival': [float(self.survival(g, t)) for g in (1, 2)],
            'mean': means,
            'variance': variances,
            'mean_difference': means[0] - means[1],
            'variance_difference': variances[0] - variances[1],
        }


def true_restricted_moments(oracle, t, k=1, group=1):
    """`k * int_0^t S(u) u^(k-1) du` by adaptive quadrature.

    Parameters:
        oracle: TruthOracle|callable  An oracle, or a survival function of one argument.
        t: float                      Finite horizon.
        k: int                        Order.
        group: int                    Group of the oracle.
    """
    if not (t > 0 and math.isfinite(t)):
        raise ValueError('Need 0 < t < inf, got {}.'.format(t))
    if int(k) != k or k < 1:
        raise ValueError('Order has to be a positive integer, got {}.'.format(k))
    if isinstance(oracle, TruthOracle):
        def survival(u):
            return float(oracle.survival(group, u))
    else:
        def survival(u):
            return float(oracle(u))
    value, _ = quad(lambda u: k * survival(u) * u ** (k - 1), 0.0, t, epsabs=0.0, epsrel=1e-12, limit=200)
    return value
