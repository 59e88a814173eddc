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

import logging
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import betaln

from ._errors import DegenerateScoreError
from ._prior import SUPPORT

logger = logging.getLogger(__name__)

# Sizes are tabulated on a log grid up to this many units of 1 / (gamma beta(t)).
_SIZE_TAIL = 50.0


class PathJumps(object):
    """Jumps of simulated score-compounded paths on `(0, t]`.

    Parameters:
        n_paths: int         Number of paths.
        t: float             Horizon.
        path: np.ndarray     Path index of every jump.
        time: np.ndarray     Jump times.
        size: np.ndarray     Jump sizes of the directing process.
        score: np.ndarray    Score vectors, shape (N, 2).
    """
    def __init__(self, n_paths, t, path, time, size, score):
        self.n_paths = n_paths
        self.t = t
        self.path = np.asarray(path, dtype=np.int64)
        self.time = np.asarray(time, dtype=float)
        self.size = np.asarray(size, dtype=float)
        self.score = np.asarray(score, dtype=np.int64).reshape(-1, 2)

    def __len__(self):
        return len(self.path)

    def subset(self, mask):
        return PathJumps(self.n_paths, self.t, self.path[mask], self.time[mask], self.size[mask], self.score[mask])

    def concatenate(self, other):
        if other.n_paths != self.n_paths:
            raise ValueError('Cannot join jumps of {} and {} paths.'.format(self.n_paths, other.n_paths))
        return PathJumps(self.n_paths, max(self.t, other.t),
                         np.concatenate([self.path, other.path]), np.concatenate([self.time, other.time]),
                         np.concatenate([self.size, other.size]), np.vstack([self.score, other.score]))


def _size_intensity(x, gamma, beta_t):
    """Levy density of the jump sizes on `(0, t]`: `(exp(-gamma beta_t x) - exp(-gamma x)) / (x (1 - exp(-x)))`."""
    return np.exp(-gamma * beta_t * x) * -np.expm1(-gamma * (1 - beta_t) * x) / (x * -np.expm1(-x))


def _draw_scores(probs, rng):
    cum = np.cumsum(probs, axis=1)
    u = rng.uniform(size=(len(probs), 1))
    return SUPPORT[np.minimum((u > cum).sum(axis=1), 2)]


def simulate_jumps(spec, t, n_paths, rng, eps=1e-6, grid=4000):
    """Jumps above `eps` of prior paths on `(0, t]`.

    The jumps form a Poisson process: sizes from the tabulated size intensity,
    times from `beta(s)` given the size in closed form, scores drawn at the
    jump times.

    Parameters:
        spec: CompoundPriorSpec    The prior.
        t: float                   Horizon.
        n_paths: int               Number of paths.
        rng: np.random.Generator   Random stream.
        eps: float                 Truncation of small jumps.
        grid: int                  Points of the size table.

    Returns:
        PathJumps: the jumps of all paths.
    """
    if not (t > 0 and math.isfinite(t)):
        raise ValueError('Need 0 < t < inf, got {}.'.format(t))
    if not eps > 0:
        raise ValueError('eps has to be positive, got {}.'.format(eps))
    gamma = spec.gamma
    baseline = spec.baseline
    beta_t = float(baseline.survival(t))

    upper = max(_SIZE_TAIL / (gamma * beta_t), 10 * eps)
    y = np.linspace(math.log(eps), math.log(upper), grid)
    x = np.exp(y)
    cum = cumulative_trapezoid(_size_intensity(x, gamma, beta_t) * x, y, initial=0.0)
    total = cum[-1]

    counts = rng.poisson(total, n_paths)
    n = int(counts.sum())
    path = np.repeat(np.arange(n_paths), counts)
    size = np.exp(np.interp(rng.uniform(0.0, total, n), cum, y))
    # beta(s) given the size has density proportional to exp(-gamma x b) on [beta_t, 1]
    a = gamma * size
    b = beta_t - np.log1p(rng.uniform(size=n) * np.expm1(-a * (1 - beta_t))) / a
    time = np.minimum(baseline.inverse_survival(np.clip(b, beta_t, 1.0)), t)
    score = _draw_scores(np.asarray(spec.score.probabilities_at(time)).reshape(-1, 3), rng)
    logger.debug('simulated %d jumps on %d paths (rate %.3g per path)', n, n_paths, total)
    return PathJumps(n_paths, t, path, time, size, score)


def simulate_posterior_jumps(post, t, n_paths, rng, eps=1e-6):
    """Jumps of posterior paths on `(0, t]`.

    The continuous part thins prior jumps with probability `exp(-x R(s).z)`;
    every exact observation time up to `t` adds a fixed jump per path, a
    score drawn from its posterior weights and `exp(-x)` from a Beta law.

    Parameters:
        post: PosteriorLaplace     Posterior given the data.
        t: float                   Horizon.
        n_paths: int               Number of paths.
        rng: np.random.Generator   Random stream.
        eps: float                 Truncation of small continuous jumps.
    """
    spec = post.spec
    prior = simulate_jumps(spec, t, n_paths, rng, eps)
    risk = post.dataset.at_risk(prior.time).reshape(-1, 2)
    tilt = np.sum(risk * prior.score, axis=1)
    jumps = prior.subset(rng.uniform(size=len(prior)) < np.exp(-prior.size * tilt))

    for jump in post.jumps:
        if jump.time > t:
            break
        exact, at_risk = np.array(jump.exact), np.array(jump.at_risk)
        probs = np.asarray(spec.score.probabilities_at(jump.time), dtype=float).ravel()
        a = (at_risk - exact) @ SUPPORT.T + float(spec.directing.shape(jump.time))
        b = exact @ SUPPORT.T
        active = (exact @ (1 - SUPPORT).T == 0) & (b > 0) & (probs > 0)
        if not np.any(active):
            raise DegenerateScoreError('No active score at the fixed jump at {}.'.format(jump.time))
        logw = np.where(active, np.log(np.where(active, probs, 1.0)) + betaln(a, np.maximum(b, 1)), -np.inf)
        w = np.exp(logw - logw.max())
        z = rng.choice(3, size=n_paths, p=w / w.sum())
        v = rng.beta(a[z], b[z])
        fixed = PathJumps(n_paths, t, np.arange(n_paths), np.full(n_paths, jump.time),
                          -np.log(np.maximum(v, 1e-300)), SUPPORT[z])
        jumps = jumps.concatenate(fixed)
    return jumps


def exponential_functionals(jumps, group, k=1, t=None):
    """`k * int_0^t S(u) u^(k-1) du` of every path, with `S = exp(-sum of scored jumps)`.

    Exact for the step paths:
    `t^k - sum_j (S(s_j-) - S(s_j)) (t^k - s_j^k)` over the jumps of the group.

    Returns:
        np.ndarray: shape (n_paths,).
    """
    if group not in (1, 2):
        raise ValueError('group has to be 1 or 2, got {!r}.'.format(group))
    t = jumps.t if t is None else t
    mask = (jumps.score[:, group - 1] == 1) & (jumps.time <= t)
    path, time, size = jumps.path[mask], jumps.time[mask], jumps.size[mask]
    order = np.lexsort((time, path))
    path, time, size = path[order], time[order], size[order]

    cum = np.cumsum(size)
    start = np.searchsorted(path, path, side='left')
    hazard = cum - (cum[start] - size[start])
    drop = np.exp(-(hazard - size)) - np.exp(-hazard)
    lost = np.bincount(path, weights=drop * (t ** k - time ** k), minlength=jumps.n_paths)
    return t ** k - lost


def path_survival(jumps, group, t):
    """`S_group(t)` of every path."""
    if group not in (1, 2):
        raise ValueError('group has to be 1 or 2, got {!r}.'.format(group))
    mask = (jumps.score[:, group - 1] == 1) & (jumps.time <= t)
    return np.exp(-np.bincount(jumps.path[mask], weights=jumps.size[mask], minlength=jumps.n_paths))
