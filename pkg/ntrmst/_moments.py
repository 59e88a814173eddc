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

from collections import defaultdict
import itertools
import logging
import math
import warnings

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from ._errors import CombinatorialError, DegenerateVarianceError, NumericalWarning
from ._util import as_count, as_count_vector

logger = logging.getLogger(__name__)

DEFAULT_NODES = 512
# relative change under grid refinement above which a moment is reported as under-resolved
GRID_TOLERANCE = 1e-4
COMPOSITION_CAP = 10 ** 5

FUNCTIONALS = ('mean-difference', 'variance-difference', 'mean-1', 'mean-2', 'variance-1', 'variance-2')


class MomentSpec(object):
    """Which k-mixed moment exponential functional to compute.

    Parameters:
        entries: Tuple[int]  Underlying process (1 or 2) of every entry, repeats allowed.
        k: Tuple[int]        Positive time-power orders.
        r: Tuple[int]        Nonnegative moment orders.
        t: float             Upper end of the restriction interval.
        s: float             Lower end, `0 <= s < t`.
    """
    def __init__(self, entries, k, r, t, s=0.0):
        entries, k = tuple(entries), tuple(k)
        r = as_count_vector(r, dim=len(entries))
        if len(k) != len(entries):
            raise ValueError('entries and k need the same length, got {} and {}.'.format(entries, k))
        if any(e not in (1, 2) for e in entries):
            raise ValueError('entries have to be processes 1 or 2, got {}.'.format(entries))
        if any(as_count(x) < 1 for x in k):
            raise ValueError('time powers k have to be positive integers, got {}.'.format(k))
        if not math.isfinite(t) or not 0 <= s < t:
            raise ValueError('Need 0 <= s < t < inf, got s={}, t={}.'.format(s, t))
        self.entries = entries
        self.k = tuple(int(x) for x in k)
        self.r = r
        self.s = float(s)
        self.t = float(t)

    def __repr__(self):
        return 'MomentSpec(entries={}, k={}, r={}, t={}, s={})'.format(self.entries, self.k, self.r, self.t, self.s)


def _quadrature_nodes(laplace, s, t, nodes):
    """Uniform nodes merged with the breakpoints of `laplace` in (s, t).

    Interior fixed-jump times appear twice: first as left limit, then as the
    value after the jump. A jump at `t` itself is evaluated as left limit.

    Returns:
        (points, left): node times and left-limit flags.
    """
    if nodes < 2:
        raise ValueError('Need at least 2 quadrature nodes, got {}.'.format(nodes))
    points = np.union1d(np.linspace(s, t, nodes), laplace.breakpoints(s, t))
    left = np.zeros(points.shape, dtype=bool)
    jumps = laplace.jump_times(s, t)
    if len(jumps) and jumps[-1] == t:
        left[-1] = True
        jumps = jumps[:-1]
    points = np.concatenate([points, jumps])
    left = np.concatenate([left, np.ones(jumps.shape, dtype=bool)])
    order = np.lexsort((~left, points))
    return points[order], left[order]


def _bisect(points, left):
    """Insert the midpoint of every segment of positive length."""
    gap = np.diff(points) > 0
    mids = 0.5 * (points[:-1] + points[1:])[gap]
    position = np.nonzero(gap)[0] + 1
    return np.insert(points, position, mids), np.insert(left, position, False)


class _TrapezoidTable(object):
    """Backward trapezoid recursion on one fixed grid, memoized over r."""
    def __init__(self, laplace, entries, k, points, left):
        self._laplace = laplace
        self._entries = np.asarray(entries)
        self._points = points
        self._left = left
        self._weights = [ki * points ** (ki - 1) for ki in k]
        self._memo = {}
        self._factors = {}

    @property
    def points(self):
        return self._points

    def _collapse(self, r):
        r = np.asarray(r)
        return (int(r[self._entries == 1].sum()), int(r[self._entries == 2].sum()))

    def factor(self, hi, lo):
        """`exp(-(psi_u(hi) - psi_u(lo)))` at every node, for collapsed vectors."""
        key = (hi, lo)
        if key not in self._factors:
            self._factors[key] = np.exp(-self._laplace.log_ratio_path(hi, lo, self._points, self._left))
        return self._factors[key]

    def values(self, r):
        """`M_{u,t}^{(r)}` at every node `u`."""
        r = tuple(r)
        if r in self._memo:
            return self._memo[r]
        if not any(r):
            out = np.ones(self._points.shape)
        else:
            collapsed = self._collapse(r)
            integrand = np.zeros(self._points.shape)
            for i, ri in enumerate(r):
                if ri == 0:
                    continue
                lower = r[:i] + (ri - 1,) + r[i + 1:]
                integrand += ri * self._weights[i] * self.values(lower) * self.factor(collapsed,
                                                                                     self._collapse(lower))
            # backward cumulative integral from each node to t
            out = -cumulative_trapezoid(integrand[::-1], self._points[::-1], initial=0.0)[::-1]
        self._memo[r] = out
        return out


class MomentTable(object):
    """Memoized mixed moments `M_{u,t}^{(r)}(xi; k)` for one entry map and k.

    The recursion runs on a grid of `nodes` uniform points merged with all
    breakpoints and on two successive bisections of it. Reported moments are
    the Richardson extrapolation of the two finer trapezoid values; the gap to
    the extrapolation of the two coarser ones drives the coarse-grid warning.

    Parameters:
        laplace: LaplaceExponent  Prior or posterior evaluator.
        entries: Tuple[int]       Underlying process of every entry.
        k: Tuple[int]             Time-power orders.
        t: float                  Restriction end.
        s: float                  Restriction start.
        nodes: int                Number of uniform nodes.
        extrapolate: bool         Report the extrapolated value; otherwise the plain G-node trapezoid.
    """
    def __init__(self, laplace, entries, k, t, s=0.0, nodes=DEFAULT_NODES, extrapolate=True):
        spec = MomentSpec(entries, k, (0,) * len(tuple(entries)), t, s)
        self._spec = spec
        self._laplace = laplace
        self._extrapolate = extrapolate
        points, left = _quadrature_nodes(laplace, spec.s, spec.t, nodes)
        fine = _bisect(points, left)
        self._tables = [_TrapezoidTable(laplace, spec.entries, spec.k, points, left),
                        _TrapezoidTable(laplace, spec.entries, spec.k, *fine)]
        if extrapolate:
            self._tables.append(_TrapezoidTable(laplace, spec.entries, spec.k, *_bisect(*fine)))
        self._values = {}

    @property
    def entries(self):
        return self._spec.entries

    @property
    def k(self):
        return self._spec.k

    @property
    def s(self):
        return self._spec.s

    @property
    def t(self):
        return self._spec.t

    @property
    def points(self):
        return self._tables[0].points

    def at_nodes(self, r):
        """`M_{u,t}^{(r)}` on the coarse grid."""
        return self._tables[0].values(as_count_vector(r, dim=len(self.entries)))

    def moment(self, r):
        """`M_{s,t}^{(r)}`."""
        r = as_count_vector(r, dim=len(self.entries))
        if r in self._values:
            return self._values[r]
        values = [float(table.values(r)[0]) for table in self._tables]
        if self._extrapolate:
            value = _richardson(values[1], values[2])
            reference = _richardson(values[0], values[1])
        else:
            value, reference = values
        change = abs(value - reference) / max(abs(value), 1e-300)
        if change > GRID_TOLERANCE:
            warnings.warn('Moment {} changes by {:.2e} (relative) under grid refinement, '
                          'the grid may be too coarse.'.format(r, change),
                          NumericalWarning)
        self._values[r] = value
        return value

    def to_frame(self):
        """Computed moments as a flat table with columns `r1, r2, ..., k1, k2, ..., s, t, value`."""
        d = len(self.entries)
        columns = ['r{}'.format(i) for i in range(1, d + 1)] + ['k{}'.format(i) for i in range(1, d + 1)]
        records = [list(r) + list(self.k) + [self.s, self.t, v] for r, v in sorted(self._values.items())]
        return pd.DataFrame(records, columns=columns + ['s', 't', 'value'])

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format='%.17g')


def _richardson(coarse, fine):
    return (4.0 * fine - coarse) / 3.0


def mixed_moment(spec, laplace, nodes=DEFAULT_NODES):
    """`M_{s,t}^{(r)}(xi; k)` of a `MomentSpec` by the moment recursion.

    Parameters:
        spec: MomentSpec          Entries, k, r and restriction interval.
        laplace: LaplaceExponent  Prior or posterior evaluator.
        nodes: int                Number of uniform quadrature nodes.

    Returns:
        float: the mixed moment.
    """
    table = MomentTable(laplace, spec.entries, spec.k, spec.t, spec.s, nodes=nodes)
    return table.moment(spec.r)


def _compositions(n, m):
    """All tuples of `m` nonnegative integers summing to `n`."""
    for cut in itertools.combinations(range(n + m - 1), m - 1):
        bounds = (-1,) + cut + (n + m - 1,)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(m))


def _multinomial(parts):
    out = math.factorial(sum(parts))
    for p in parts:
        out //= math.factorial(p)
    return out


def linear_combination_moment(coeffs, terms, n, laplace, t, s=0.0, nodes=DEFAULT_NODES,
                              cap=COMPOSITION_CAP, table=None):
    """`E[(sum_l a_l X_l)^n]` for `X_l = mu_{l}^{r_l}` by multinomial expansion.

    Parameters:
        coeffs: List[float]            Coefficients a_l.
        terms: List[(int, int, int)]   Per term: process, time power k, moment order r.
        n: int                         Order.
        laplace: LaplaceExponent       Prior or posterior evaluator.
        t, s: float                    Restriction interval.
        cap: int                       Largest admissible number of compositions.
        table: MomentTable             Reuse an existing table with matching entries and k.

    Returns:
        float: the moment.
    """
    n = as_count(n)
    coeffs = [float(a) for a in coeffs]
    terms = [tuple(x) for x in terms]
    if len(coeffs) != len(terms) or not terms:
        raise ValueError('Need one coefficient per term, got {} and {}.'.format(len(coeffs), len(terms)))
    if n == 0:
        return 1.0
    m = len(terms)
    size = math.comb(n + m - 1, m - 1)
    if size > cap:
        raise CombinatorialError('{} compositions of {} into {} parts exceed the cap {}.'.format(size, n, m, cap))
    if table is None:
        table = MomentTable(laplace, [x[0] for x in terms], [x[1] for x in terms], t, s, nodes=nodes)
    orders = [x[2] for x in terms]
    parts = []
    for ell in _compositions(n, m):
        weight = _multinomial(ell) * np.prod([a ** e for a, e in zip(coeffs, ell)])
        if weight != 0:
            parts.append(weight * table.moment(tuple(e * r for e, r in zip(ell, orders))))
    return math.fsum(parts)


class FunctionalMoments(object):
    """Posterior moments `c^(1..N)` of a scalar functional at horizon `t`.

    `table` is the `MomentTable` the moments were expanded from, if any.
    """
    def __init__(self, tag, t, values, table=None):
        self.tag = tag
        self.t = float(t)
        self.values = [float(v) for v in values]
        self.table = table

    @property
    def order(self):
        return len(self.values)

    def __getitem__(self, n):
        return 1.0 if n == 0 else self.values[n - 1]

    def to_dict(self):
        return {'functional': self.tag, 't': self.t, 'moments': self.values}

    def __repr__(self):
        return 'FunctionalMoments({!r}, t={}, values={})'.format(self.tag, self.t, self.values)


def _functional_terms(tag):
    if tag == 'mean-difference':
        return [1.0, -1.0], [(1, 1, 1), (2, 1, 1)]
    if tag == 'variance-difference':
        return [1.0, -1.0, -1.0, 1.0], [(1, 2, 1), (1, 1, 2), (2, 2, 1), (2, 1, 2)]
    kind, _, group = tag.partition('-')
    if group in ('1', '2') and kind in ('mean', 'variance'):
        g = int(group)
        if kind == 'mean':
            return [1.0], [(g, 1, 1)]
        return [1.0, -1.0], [(g, 2, 1), (g, 1, 2)]
    raise ValueError('Unknown functional {!r}, supported: {}.'.format(tag, FUNCTIONALS))


def functional_moments(tag, n, t, laplace, nodes=DEFAULT_NODES):
    """Moments of order 1..n of a named functional, sharing one moment table."""
    coeffs, terms = _functional_terms(tag)
    table = MomentTable(laplace, [x[0] for x in terms], [x[1] for x in terms], t, nodes=nodes)
    values = [linear_combination_moment(coeffs, terms, order, laplace, t, table=table)
              for order in range(1, as_count(n) + 1)]
    logger.debug('%s moments at t=%g: %s', tag, t, values)
    return FunctionalMoments(tag, t, values, table)


def mean_difference_moments(n, t, laplace, nodes=DEFAULT_NODES):
    """`E[(mu_1 - mu_2)^j]`, j = 1..n."""
    return functional_moments('mean-difference', n, t, laplace, nodes)


def variance_difference_moments(n, t, laplace, nodes=DEFAULT_NODES):
    """`E[(sigma^2_1 - sigma^2_2)^j]`, j = 1..n, with `sigma^2 = mu^(2) - mu^2`."""
    return functional_moments('variance-difference', n, t, laplace, nodes)


def marginal_moments(group, kind, n, t, laplace, nodes=DEFAULT_NODES):
    """Moments of the restricted mean (`kind='mean'`) or variance of one group."""
    return functional_moments('{}-{}'.format(kind, group), n, t, laplace, nodes)


def _expect(table, polynomial):
    """Expectation of a polynomial `{r-vector: coefficient}` in the table entries."""
    return math.fsum(c * table.moment(r) for r, c in polynomial.items() if c != 0)


def _product(p, q):
    out = defaultdict(float)
    for (r1, c1), (r2, c2) in itertools.product(p.items(), q.items()):
        out[tuple(a + b for a, b in zip(r1, r2))] += c1 * c2
    return dict(out)


def _correlation(table, x, y):
    mx, my = _expect(table, x), _expect(table, y)
    vx = _expect(table, _product(x, x)) - mx ** 2
    vy = _expect(table, _product(y, y)) - my ** 2
    scale = max(mx ** 2, my ** 2, 1.0)
    if vx <= 1e-12 * scale or vy <= 1e-12 * scale:
        raise DegenerateVarianceError('Correlation undefined, variances {} and {}.'.format(vx, vy))
    rho = (_expect(table, _product(x, y)) - mx * my) / math.sqrt(vx * vy)
    if abs(rho) > 1.0:
        if abs(rho) - 1.0 > 1e-6:
            warnings.warn('Correlation {} clamped into [-1, 1].'.format(rho), NumericalWarning)
        rho = math.copysign(1.0, rho)
    return rho


def rmst_correlation(t, laplace, nodes=DEFAULT_NODES):
    """Correlation of the restricted means `mu_{1,t}` and `mu_{2,t}`."""
    table = MomentTable(laplace, (1, 2), (1, 1), t, nodes=nodes)
    return _correlation(table, {(1, 0): 1.0}, {(0, 1): 1.0})


def variance_correlation(t, laplace, nodes=DEFAULT_NODES):
    """Correlation of the restricted variances `sigma^2_{1,t}` and `sigma^2_{2,t}`."""
    table = MomentTable(laplace, (1, 1, 2, 2), (2, 1, 2, 1), t, nodes=nodes)
    first = {(1, 0, 0, 0): 1.0, (0, 2, 0, 0): -1.0}
    second = {(0, 0, 1, 0): 1.0, (0, 0, 0, 2): -1.0}
    return _correlation(table, first, second)
