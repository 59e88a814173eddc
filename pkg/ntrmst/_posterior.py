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

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging
import math
import threading

import numpy as np
import pandas as pd
from scipy.special import betaln, logsumexp

from ._errors import DegenerateScoreError
from ._prior import _check_triplet, _unit, CompoundPriorSpec, LaplaceExponent, ScoreDistribution
from ._prior import StratifiedScore, SUPPORT
from ._util import as_count_vector, log_rising_ratio, simplex_grid

logger = logging.getLogger(__name__)

JumpDescriptor = namedtuple('JumpDescriptor', ['time', 'exact', 'at_risk'])


def _log_jump_normalizer(exact, at_risk, shape, probs, m):
    """Log of `sum_z pi_z B((R - c + m).z + gamma beta(T), c.z)` for each fixed jump.

    A support point is inactive when it gives zero weight to a group with
    exact observations at the jump time. Ties (`c.z > 1`) are covered by the
    Beta function, the closed form of the binomial expansion.

    Parameters:
        exact: np.ndarray    Exact counts, shape (J, 2).
        at_risk: np.ndarray  At-risk vectors at the jump times, shape (J, 2).
        shape: np.ndarray    `gamma * beta(T)`, shape (J,).
        probs: np.ndarray    Score probabilities at the jump times, shape (J, 3).
        m: np.ndarray        Integer argument vector, shape (2,).

    Returns:
        np.ndarray: shape (J,), `-inf` where no support point is active.
    """
    blocked = exact @ (1 - SUPPORT).T > 0
    size = exact @ SUPPORT.T
    a = (at_risk - exact + m) @ SUPPORT.T + shape[:, None]
    with np.errstate(divide='ignore', invalid='ignore'):
        logs = np.log(probs) + betaln(a, size)
        logs = np.where(blocked | (probs <= 0) | (size == 0), -np.inf, logs)
        return logsumexp(logs, axis=1)


class PosteriorLaplace(LaplaceExponent):
    """Posterior Laplace exponent given right-censored two-sample data.

    Continuous part: the directing intensity tilted by `exp(-R(s).z x)` on
    the partition formed by the observation times (and `tau`). Fixed jumps at
    every exact observation time.
    """
    def __init__(self, spec, dataset):
        parts = [[0.0], dataset.times]
        if spec.tau is not None:
            parts.append([spec.tau])
        knots = np.unique(np.concatenate(parts))
        risk = np.vstack([dataset.at_risk(knots[1:]).reshape(-1, 2), np.zeros((1, 2), dtype=np.int64)])
        super(PosteriorLaplace, self).__init__(spec, knots, risk)

        self._dataset = dataset
        rows = dataset.n_exact.sum(axis=1) > 0
        self._jump_times = dataset.times[rows]
        self._jump_exact = dataset.n_exact[rows]
        self._jump_risk = dataset.at_risk(self._jump_times).reshape(-1, 2)
        self._jump_shape = spec.directing.shape(self._jump_times)
        self._jump_probs = np.array(spec.score.probabilities_at(self._jump_times)).reshape(-1, 3)
        self._log_norms = {}
        self._lock = threading.Lock()
        degenerate = ~np.isfinite(self._log_norm((0, 0)))
        if np.any(degenerate):
            raise DegenerateScoreError(
                'The score gives zero weight to the exact observations at time(s) {}.'.format(
                    self._jump_times[degenerate].tolist()))

    @property
    def dataset(self):
        return self._dataset

    @property
    def jumps(self):
        return [JumpDescriptor(float(t), tuple(c.tolist()), tuple(r.tolist()))
                for t, c, r in zip(self._jump_times, self._jump_exact, self._jump_risk)]

    def jump_times(self, s, t):
        return self._jump_times[(self._jump_times > s) & (self._jump_times <= t)]

    def _log_norm(self, m):
        m = tuple(m)
        # memo shared by the threads of one evaluator
        with self._lock:
            if m not in self._log_norms:
                self._log_norms[m] = _log_jump_normalizer(self._jump_exact, self._jump_risk, self._jump_shape,
                                                          self._jump_probs, np.array(m))
            return self._log_norms[m]

    def _jump_path(self, hi, lo, points, left):
        if len(self._jump_times) == 0 or np.array_equal(hi, lo):
            return np.zeros(points.shape)
        # -log E[exp(-hi.J)] + log E[exp(-lo.J)] per jump
        step = self._log_norm(lo) - self._log_norm(hi)
        cum = np.concatenate([[0.0], np.cumsum(step)])
        count = np.where(left,
                         np.searchsorted(self._jump_times, points, side='left'),
                         np.searchsorted(self._jump_times, points, side='right'))
        return cum[count]


def jump_laplace(jump, r, spec):
    """Laplace transform `E[exp(-r.J)]` of the fixed jump described by `jump`.

    Parameters:
        jump: JumpDescriptor     Time, exact counts and at-risk vector at the time.
        r: Tuple[int, int]       Nonnegative integer argument.
        spec: CompoundPriorSpec  The prior.

    Returns:
        float: value in (0, 1], 1 at r = 0.
    """
    m = np.array(as_count_vector(r))
    exact = np.array([jump.exact], dtype=np.int64)
    if not np.any(exact > 0):
        raise ValueError('Jump descriptors belong to exact observations, got counts {}.'.format(jump.exact))
    at_risk = np.array([jump.at_risk], dtype=np.int64)
    shape = np.atleast_1d(spec.directing.shape(jump.time))
    probs = np.array(spec.score.probabilities_at([jump.time])).reshape(1, 3)
    log0 = _log_jump_normalizer(exact, at_risk, shape, probs, np.zeros(2, dtype=np.int64))[0]
    if not np.isfinite(log0):
        raise DegenerateScoreError('The score gives zero weight to the jump at time {}.'.format(jump.time))
    return math.exp(_log_jump_normalizer(exact, at_risk, shape, probs, m)[0] - log0)


def posterior_psi(r, t, post):
    """Posterior Laplace exponent at integer `r` and time `t > 0`."""
    if not (t > 0 and math.isfinite(t)):
        raise ValueError('Need 0 < t < inf, got t={}.'.format(t))
    return post.psi(r, t)


def posterior_survival(group, t, post):
    """Posterior mean survival `exp(-psi_t(e_group))`."""
    if t < 0:
        raise ValueError('Need t >= 0, got {}.'.format(t))
    if t == 0:
        return 1.0
    return math.exp(-posterior_psi(_unit(group), t, post))


def posterior_survival_variance(group, t, post):
    """Posterior variance of `S_group(t)`: `exp(-psi(2e)) - exp(-2 psi(e))`."""
    if t < 0:
        raise ValueError('Need t >= 0, got {}.'.format(t))
    if t == 0:
        return 0.0
    e = _unit(group)
    return math.exp(-posterior_psi(tuple(2 * x for x in e), t, post)) - math.exp(-2 * posterior_psi(e, t, post))


def psi_ratio_factor(r, ell, u, post):
    """`exp(-(psi_u(r) - psi_u(ell)))`, evaluated as one fused difference.

    Parameters:
        r, ell: Tuple[int, int]  Integer vectors with `ell <= r` componentwise.
        u: float                 Time, `u >= 0`.
        post: LaplaceExponent    Prior or posterior evaluator.
    """
    if u < 0:
        raise ValueError('Need u >= 0, got {}.'.format(u))
    return math.exp(-post.log_ratio_path(r, ell, [u])[0])


class _LikelihoodTerms(object):
    """Score independent pieces of the marginal log-likelihood.

    Per partition interval and support point: minus the prior exponent
    increment at the at-risk vector. Per exact time and support point: the
    log Beta integral of the fixed jump.
    """
    def __init__(self, directing, dataset, tau=None):
        parts = [[0.0], dataset.times]
        if tau is not None:
            parts.append([tau])
        knots = np.unique(np.concatenate(parts))
        shape = directing.shape(knots)
        risk = dataset.at_risk(knots[1:]).reshape(-1, 2)
        self._interval_end = knots[1:]
        self._interval = -log_rising_ratio(shape[:-1, None], shape[1:, None], 0, risk @ SUPPORT.T)

        rows = dataset.n_exact.sum(axis=1) > 0
        times = dataset.times[rows]
        exact = dataset.n_exact[rows]
        at_risk = dataset.at_risk(times).reshape(-1, 2)
        blocked = exact @ (1 - SUPPORT).T > 0
        a = (at_risk - exact) @ SUPPORT.T + directing.shape(times)[:, None]
        with np.errstate(divide='ignore', invalid='ignore'):
            self._jump = np.where(blocked, -np.inf, betaln(a, exact @ SUPPORT.T))
        self._jump_time = times
        self._jump_const = math.log(directing.gamma) + directing.baseline.log_density(times)

    def loglik(self, probs, start=0.0, end=math.inf):
        """Contribution of intervals and jumps with right end in `(start, end]`.

        Parameters:
            probs: np.ndarray  Score probabilities, shape (G, 3).

        Returns:
            np.ndarray: shape (G,)
        """
        probs = np.atleast_2d(probs)
        inside = (self._interval_end > start) & (self._interval_end <= end)
        total = probs @ self._interval[inside].sum(axis=0)
        jumps = (self._jump_time > start) & (self._jump_time <= end)
        if np.any(jumps):
            with np.errstate(divide='ignore'):
                logp = np.log(probs)
                per_jump = logsumexp(self._jump[jumps][None, :, :] + logp[:, None, :], axis=2)
            total = total + per_jump.sum(axis=1) + self._jump_const[jumps].sum()
        return total


def marginal_log_likelihood(spec, dataset):
    """Log marginal likelihood of the data with the subordinators integrated out.

    Raises:
        DegenerateScoreError: if the score makes the data impossible.
    """
    if len(dataset) == 0:
        raise ValueError('The marginal likelihood needs a nonempty dataset.')
    terms = _LikelihoodTerms(spec.directing, dataset, spec.tau)
    total = math.fsum(float(terms.loglik(probs, start, end)[0]) for start, end, probs in spec.score.strata)
    if not math.isfinite(total):
        raise DegenerateScoreError('The score gives zero weight to some exact observation.')
    return total


class HyperFit(object):
    """Marginal log-likelihood surface over a score grid and its maximizer.

    Parameters:
        directing: LogBetaDirecting  The fixed directing measure.
        pre: np.ndarray              Score triplets (before tau), shape (S, 3).
        post: np.ndarray             Score triplets after tau, shape (S, 3), or None.
        tau: np.ndarray              Thresholds, shape (S,), or None.
        loglik: np.ndarray           Log-likelihoods, shape (S,), `-inf` for impossible scores.
    """
    def __init__(self, directing, pre, post, tau, loglik):
        self._directing = directing
        self._pre = np.asarray(pre, dtype=float)
        self._post = None if post is None else np.asarray(post, dtype=float)
        self._tau = None if tau is None else np.asarray(tau, dtype=float)
        self._loglik = np.asarray(loglik, dtype=float)
        if not np.any(np.isfinite(self._loglik)):
            raise DegenerateScoreError('Every grid point gives zero weight to some exact observation.')
        self._best = int(np.argmax(np.where(np.isfinite(self._loglik), self._loglik, -np.inf)))

    def __len__(self):
        return len(self._loglik)

    @property
    def stratified(self):
        return self._tau is not None

    @property
    def best_pi1(self):
        return tuple(self._pre[self._best].tolist())

    @property
    def best_pi2(self):
        return None if self._post is None else tuple(self._post[self._best].tolist())

    @property
    def best_tau(self):
        return None if self._tau is None else float(self._tau[self._best])

    @property
    def best_loglik(self):
        return float(self._loglik[self._best])

    @property
    def loglik(self):
        return self._loglik

    @property
    def spec(self):
        if self.stratified:
            score = StratifiedScore(self.best_pi1, self.best_pi2, self.best_tau)
        else:
            score = ScoreDistribution(self.best_pi1)
        return CompoundPriorSpec(self._directing, score)

    def surface_frame(self):
        if not self.stratified:
            frame = pd.DataFrame(self._pre, columns=['pi1', 'pi2', 'pi3'])
            frame['tau'] = np.nan
        else:
            frame = pd.DataFrame(np.hstack([self._pre, self._post]),
                                 columns=['pre_pi1', 'pre_pi2', 'pre_pi3', 'post_pi1', 'post_pi2', 'post_pi3'])
            frame['tau'] = self._tau
        frame['loglik'] = self._loglik
        return frame

    def to_dict(self):
        return {
            'spec': self.spec.to_dict(),
            'loglik': self.best_loglik,
            'grid_size': len(self),
            'stratified': self.stratified,
        }


def default_taus(dataset):
    """Observed deciles of the pooled times, the default threshold candidates."""
    return np.unique(dataset.pooled_quantile(np.arange(1, 10) / 10.0))


def fit_map(dataset, directing, grid=None, step=0.1, taus=None, stratify=True, workers=None):
    """Exhaustive maximum a posteriori search of the score hyperparameters.

    Because the log-likelihood splits into the part before `tau` and the part
    after it, every (pre, post) pair of a stratified grid is the sum of two
    one-dimensional evaluations.

    Parameters:
        dataset: SurvivalDataset     Nonempty data.
        directing: LogBetaDirecting  Fixed gamma and baseline.
        grid: array-like             Score triplets, default: simplex with spacing `step`.
        step: float                  Simplex spacing if no grid is given.
        taus: List[float]            Threshold candidates, default: observed deciles.
        stratify: bool               Search (pre, post, tau); otherwise a single triplet.
        workers: int                 Threads evaluating the thresholds in parallel.

    Returns:
        HyperFit: the argmax and the full surface.
    """
    if len(dataset) == 0:
        raise ValueError('fit_map needs a nonempty dataset.')
    grid = simplex_grid(step) if grid is None else np.array([_check_triplet(p) for p in grid])
    if len(grid) == 0:
        raise ValueError('The score grid is empty.')

    if not stratify:
        loglik = _LikelihoodTerms(directing, dataset).loglik(grid)
        logger.debug('evaluated %d score triplets', len(grid))
        return HyperFit(directing, grid, None, None, loglik)

    taus = default_taus(dataset) if taus is None else np.asarray(taus, dtype=float)
    if len(taus) == 0 or np.any(taus <= 0):
        raise ValueError('Threshold candidates have to be positive, got {}.'.format(list(taus)))

    def evaluate(tau):
        terms = _LikelihoodTerms(directing, dataset, tau)
        pre = terms.loglik(grid, 0.0, tau)
        post = terms.loglik(grid, tau, math.inf)
        logger.debug('evaluated %d score pairs at tau=%g', len(grid) ** 2, tau)
        return (pre[:, None] + post[None, :]).ravel()

    with ThreadPoolExecutor(max_workers=workers) as pool:
        surfaces = list(pool.map(evaluate, taus))

    n = len(grid)
    pre = np.tile(np.repeat(grid, n, axis=0), (len(taus), 1))
    post = np.tile(grid, (n * len(taus), 1))
    tau = np.repeat(taus, n * n)
    return HyperFit(directing, pre, post, tau, np.concatenate(surfaces))
