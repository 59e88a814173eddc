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
import warnings

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, lstsq, solve
from scipy.special import logsumexp

from ._errors import ConvergenceError, InfeasibleMomentsError
from ._moments import DEFAULT_NODES, functional_moments
from ._posterior import PosteriorLaplace
from ._util import as_count

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 600
ADAPTIVE_CAP = 10
ADAPTIVE_TOLERANCE = 0.1
DIVERGENCE_NORM = 1e6


class Mesh(object):
    """Strictly increasing support points of a discrete max-ent density."""
    def __init__(self, points):
        points = np.asarray(points, dtype=float).ravel()
        if len(points) < 2:
            raise ValueError('A mesh needs at least 2 points, got {}.'.format(len(points)))
        if not np.all(np.isfinite(points)) or np.any(np.diff(points) <= 0):
            raise ValueError('Mesh points have to be finite and strictly increasing.')
        self._points = points

    @classmethod
    def uniform(cls, lower, upper, count=DEFAULT_POINTS):
        if not lower < upper:
            raise ValueError('Need lower < upper, got {} and {}.'.format(lower, upper))
        return cls(np.linspace(lower, upper, count))

    @classmethod
    def around(cls, center, std, count=DEFAULT_POINTS, width=6.0, floor=0.0):
        """`count` points on `center +- max(width * std, floor)`."""
        half = max(width * std, floor)
        if not half > 0:
            raise ValueError('The mesh half width has to be positive, got {}.'.format(half))
        return cls.uniform(center - half, center + half, count)

    @property
    def points(self):
        return self._points

    @property
    def count(self):
        return len(self._points)

    @property
    def lower(self):
        return float(self._points[0])

    @property
    def upper(self):
        return float(self._points[-1])

    def to_dict(self):
        return {'count': self.count, 'lower': self.lower, 'upper': self.upper}


class MaxEntDensity(object):
    """Solution of the discrete maximum entropy problem.

    `multipliers` and `residuals` refer to the moments of the mesh rescaled
    to [-1, 1].
    """
    def __init__(self, mesh, p, multipliers, residuals, iterations=0):
        self.mesh = mesh
        self.p = np.asarray(p, dtype=float)
        self.multipliers = np.asarray(multipliers, dtype=float)
        self.residuals = np.asarray(residuals, dtype=float)
        self.iterations = iterations

    @property
    def entropy(self):
        p = self.p[self.p > 0]
        return float(-np.sum(p * np.log(p)))

    def moments(self, n):
        """Raw moments of orders 1..n of the discrete solution."""
        x = self.mesh.points
        return np.array([np.sum(self.p * x ** k) for k in range(1, n + 1)])


def _rescale_moments(moments, center, half):
    """Moments of `(X - center) / half` from the raw moments of `X`."""
    raw = [1.0] + list(moments)
    out = []
    for k in range(1, len(raw)):
        terms = [math.comb(k, j) * raw[j] * (-center) ** (k - j) for j in range(k + 1)]
        out.append(math.fsum(terms) / half ** k)
    return np.array(out)


def solve_maxent(mesh, moments, tol=1e-8, max_iter=200):
    """Maximum entropy distribution on `mesh` matching raw `moments` 1..N.

    Damped Newton on the dual `log Z(lam) - lam.c` with the mesh rescaled to
    [-1, 1]; a step is halved until the dual objective or the residual
    decreases.

    Parameters:
        mesh: Mesh               Support points.
        moments: List[float]     Raw moments c^(1), ..., c^(N).
        tol: float               Residual infinity norm at convergence.
        max_iter: int            Newton iteration limit.

    Returns:
        MaxEntDensity: the solution.

    Raises:
        InfeasibleMomentsError: the multipliers diverge.
        ConvergenceError: no convergence within `max_iter` iterations.
    """
    c = np.asarray(moments, dtype=float)
    if c.ndim != 1 or len(c) < 1:
        raise ValueError('Need at least one moment constraint.')
    x = mesh.points
    if not x[0] <= c[0] <= x[-1]:
        raise ValueError('The first moment {} lies outside the mesh [{}, {}].'.format(c[0], x[0], x[-1]))
    center, half = 0.5 * (x[0] + x[-1]), 0.5 * (x[-1] - x[0])
    target = _rescale_moments(c, center, half)
    basis = ((x - center) / half)[:, None] ** np.arange(1, len(c) + 1)

    def dual(lam):
        logits = basis @ lam
        log_z = logsumexp(logits)
        p = np.exp(logits - log_z)
        return log_z - lam @ target, p, p @ basis - target

    lam = np.zeros(len(c))
    objective, p, residual = dual(lam)
    iterations = 0
    while np.max(np.abs(residual)) > tol:
        if iterations == max_iter:
            raise ConvergenceError('Max-ent Newton did not converge in {} iterations, residuals {}.'.format(
                max_iter, residual.tolist()), residuals=residual)
        iterations += 1
        centered = basis - (residual + target)
        hessian = (centered * p[:, None]).T @ centered
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', LinAlgWarning)
            try:
                step = solve(hessian, residual, assume_a='pos')
            except (LinAlgError, ValueError):
                step = lstsq(hessian, residual)[0]
        scale = 1.0
        for _ in range(60):
            candidate = lam - scale * step
            c_objective, c_p, c_residual = dual(candidate)
            if c_objective < objective or np.max(np.abs(c_residual)) < np.max(np.abs(residual)):
                break
            scale *= 0.5
        lam, objective, p, residual = candidate, c_objective, c_p, c_residual
        if np.linalg.norm(lam) > DIVERGENCE_NORM:
            raise InfeasibleMomentsError('Dual multipliers diverged (norm {:.3g}), the moments are infeasible '
                                         'on the mesh.'.format(np.linalg.norm(lam)))
    logger.debug('max-ent with %d moments converged in %d iterations', len(c), iterations)
    return MaxEntDensity(mesh, p, lam, residual, iterations)


def point_mass(mesh, value, moments=()):
    """Distribution concentrated on the mesh cell `(x_{j-1}, x_j]` containing `value`."""
    x = mesh.points
    j = int(np.clip(np.searchsorted(x, value, side='left'), 1, len(x) - 1))
    p = np.zeros(len(x))
    p[j] = 1.0
    residuals = np.array([x[j] ** k - c for k, c in enumerate(moments, start=1)])
    return MaxEntDensity(mesh, p, [], residuals)


class PiecewiseDensity(object):
    """Density `p_j / (x_j - x_{j-1})` on `(x_{j-1}, x_j]` plus an atom `p_1` at `x_1`."""
    def __init__(self, edges, p):
        self._edges = np.asarray(edges, dtype=float)
        p = np.asarray(p, dtype=float)
        self._atom = float(p[0])
        self._heights = p[1:] / np.diff(self._edges)
        self._cdf = np.concatenate([[p[0]], p[0] + np.cumsum(p[1:])])

    @property
    def edges(self):
        return self._edges

    @property
    def heights(self):
        return self._heights

    @property
    def atom(self):
        return self._atom

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        idx = np.searchsorted(self._edges, v, side='left')
        inside = (idx >= 1) & (idx < len(self._edges))
        return np.where(inside, self._heights[np.clip(idx - 1, 0, len(self._heights) - 1)], 0.0)

    def cdf(self, v, left=False):
        """`P(X <= v)`, or `P(X < v)` with `left=True`."""
        x = self._edges
        if v < x[0] or (left and v == x[0]):
            return 0.0
        if v >= x[-1]:
            return 1.0
        j = int(np.searchsorted(x, v, side='right')) - 1
        return float(self._cdf[j] + self._heights[j] * (v - x[j]))

    def integral(self):
        return self._atom + float(np.sum(self._heights * np.diff(self._edges)))

    def sup_distance(self, other, lower=-np.inf, upper=np.inf):
        """Largest height difference over the cells meeting `[lower, upper]`, all cells if none does."""
        cells = (self._edges[1:] > lower) & (self._edges[:-1] < upper)
        if not np.any(cells):
            cells[:] = True
        return float(np.max(np.abs(self._heights[cells] - other._heights[cells])))


def density_estimate(maxent):
    """Piecewise constant density of a solved `MaxEntDensity`."""
    return PiecewiseDensity(maxent.mesh.points, maxent.p)


def tail_probability(density, c, kind='abs'):
    """Tail mass of a `PiecewiseDensity`.

    Parameters:
        density: PiecewiseDensity  The density of X.
        c: float                   Threshold.
        kind: str                  'abs': P(|X| > c), 'upper': P(X > c), 'squared': P(X^2 > c).
    """
    if kind == 'upper':
        return max(0.0, 1.0 - density.cdf(c))
    if kind == 'squared':
        if c < 0:
            return 1.0
        c = math.sqrt(c)
    elif kind != 'abs':
        raise ValueError('Unknown tail kind {!r}.'.format(kind))
    if c < 0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - density.cdf(c) + density.cdf(-c, left=True)))


class HPDRegion(object):
    """Highest density region on the mesh: sorted disjoint closed intervals."""
    def __init__(self, level, intervals, mass, threshold):
        self.level = level
        self.intervals = [(float(a), float(b)) for a, b in intervals]
        self.mass = float(mass)
        self.threshold = float(threshold)

    def __contains__(self, v):
        return any(a <= v <= b for a, b in self.intervals)

    def to_dict(self):
        return {'level': self.level, 'intervals': [list(i) for i in self.intervals], 'mass': self.mass}


def hpd(maxent, level=0.95):
    """Highest posterior density region of a discrete density.

    Cells `(x_{j-1}, x_j]` of the piecewise density are taken by decreasing
    height, ties to the lower x first, until their mass reaches `level`. The
    atom `p_1` at `x_1` comes last.
    """
    if not 0 < level < 1:
        raise ValueError('level has to be in (0, 1), got {}.'.format(level))
    x, p = maxent.mesh.points, maxent.p
    heights = density_estimate(maxent).heights
    order = np.append(np.lexsort((x[1:], -heights)) + 1, 0)
    cum = np.cumsum(p[order])
    count = min(int(np.searchsorted(cum, level, side='left')) + 1, len(x))
    selected = np.zeros(len(x), dtype=bool)
    selected[order[:count]] = True

    edges = np.diff(np.concatenate([[0], selected.astype(np.int8), [0]]))
    starts, ends = np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0] - 1
    intervals = [(x[max(s - 1, 0)], x[e]) for s, e in zip(starts, ends)]
    last = order[count - 1]
    return HPDRegion(level, intervals, p[selected].sum(), heights[last - 1] if last > 0 else 0.0)


class DensityEstimate(object):
    """Result of the density pipeline for one functional and horizon."""
    def __init__(self, functional, t, moments, maxent, region, moments_used):
        self.functional = functional
        self.t = t
        self.moments = moments
        self.maxent = maxent
        self.density = density_estimate(maxent)
        self.hpd = region
        self.moments_used = moments_used

    def to_dict(self):
        return {
            'functional': self.functional,
            't': self.t,
            'moments': self.moments.values[:self.moments_used],
            'mesh': self.maxent.mesh.points,
            'p': self.maxent.p,
            'hpd': self.hpd.to_dict(),
            'moments_used': self.moments_used,
        }


def _adaptive(mesh, values, window=(-np.inf, np.inf)):
    """Add constraints until successive densities agree on `window` to `ADAPTIVE_TOLERANCE`."""
    previous = None
    for n in range(2, ADAPTIVE_CAP + 1):
        current = solve_maxent(mesh, values[:n])
        if previous is not None:
            distance = density_estimate(current).sup_distance(density_estimate(previous), *window)
            logger.debug('adaptive max-ent: N=%d differs from N=%d by %.3g', n, n - 1, distance)
            if distance < ADAPTIVE_TOLERANCE:
                return current, n
        previous = current
    return current, ADAPTIVE_CAP


def estimate_density(dataset, spec, functional, t, mesh=None, moments=6, level=0.95, nodes=DEFAULT_NODES,
                     laplace=None, mesh_points=DEFAULT_POINTS):
    """Posterior density of an RMST functional at horizon `t`.

    Posterior moments from the moment recursion, then the max-ent density
    on `mesh` and its HPD region.

    Parameters:
        dataset: SurvivalDataset   The data.
        spec: CompoundPriorSpec    Fitted or given prior.
        functional: str            'mean-difference', 'variance-difference', 'mean-1', ...
        t: float                   Horizon.
        mesh: Mesh                 Default: center c^(1), half width 6 std, `mesh_points` points.
        moments: int|str           Number of moment constraints, or 'adaptive' (densities compared on [0, t]).
        level: float               HPD level.
        nodes: int                 Quadrature nodes of the moment recursion.
        laplace: LaplaceExponent   Reuse an evaluator instead of building the posterior.

    Returns:
        DensityEstimate: density, HPD region and the number of moments used.
    """
    adaptive = moments == 'adaptive'
    n = ADAPTIVE_CAP if adaptive else as_count(moments)
    if n < 1:
        raise ValueError('Need at least one moment constraint.')
    if laplace is None:
        laplace = PosteriorLaplace(spec, dataset)
    fm = functional_moments(functional, max(n, 2), t, laplace, nodes)
    std = math.sqrt(max(fm[2] - fm[1] ** 2, 0.0))
    if mesh is None:
        mesh = Mesh.around(fm[1], std, count=mesh_points, floor=1e-2 * t)

    if std < np.min(np.diff(mesh.points)):
        logger.debug('%s at t=%g is below the mesh resolution, using a point mass', functional, t)
        maxent, used = point_mass(mesh, fm[1], fm.values[:n]), n
    elif adaptive:
        maxent, used = _adaptive(mesh, fm.values, (0.0, t))
    else:
        maxent, used = solve_maxent(mesh, fm.values[:n]), n
    return DensityEstimate(functional, t, fm, maxent, hpd(maxent, level), used)
