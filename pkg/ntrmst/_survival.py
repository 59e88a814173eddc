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
import math

import numpy as np
import pandas as pd

from ._errors import DataFormatError, EmptyGroupError

COLUMNS = ('time', 'event', 'group')


class Observation(namedtuple('Observation', COLUMNS)):
    """One right-censored observation: `event` is True for an exact time."""
    __slots__ = ()

    def __new__(cls, time, event, group):
        time = float(time)
        if not (time > 0 and math.isfinite(time)):
            raise ValueError('Observation time has to be positive and finite, got {}.'.format(time))
        if group not in (1, 2):
            raise ValueError('group has to be 1 or 2, got {!r}.'.format(group))
        return super(Observation, cls).__new__(cls, time, bool(event), int(group))


class SurvivalDataset(object):
    """Two-sample right-censored data with its count arrays.

    Derived arrays (rows follow the distinct sorted times, columns the groups):
        times:       distinct observation times T_1 < ... < T_k
        n_exact:     exact observations at T_i, shape (k, 2)
        n_censored:  censored observations at T_i, shape (k, 2)
        bar_exact, bar_censored:
                     counts at times >= T_i, shape (k + 1, 2), last row zero
    """
    def __init__(self, observations=()):
        obs = [o if isinstance(o, Observation) else Observation(*o) for o in observations]
        self._observations = tuple(sorted(obs))
        time = np.array([o.time for o in self._observations], dtype=float)
        event = np.array([o.event for o in self._observations], dtype=bool)
        group = np.array([o.group for o in self._observations], dtype=np.int64)

        self._times, inverse = np.unique(time, return_inverse=True)
        k = len(self._times)
        self._n_exact = np.zeros((k, 2), dtype=np.int64)
        self._n_censored = np.zeros((k, 2), dtype=np.int64)
        np.add.at(self._n_exact, (inverse[event], group[event] - 1), 1)
        np.add.at(self._n_censored, (inverse[~event], group[~event] - 1), 1)
        self._bar_exact = _reverse_cumsum(self._n_exact)
        self._bar_censored = _reverse_cumsum(self._n_censored)

    @property
    def observations(self):
        return self._observations

    @property
    def times(self):
        return self._times

    @property
    def n_exact(self):
        return self._n_exact

    @property
    def n_censored(self):
        return self._n_censored

    @property
    def bar_exact(self):
        return self._bar_exact

    @property
    def bar_censored(self):
        return self._bar_censored

    @property
    def sizes(self):
        return self._bar_exact[0] + self._bar_censored[0]

    def __len__(self):
        return len(self._observations)

    def exact_times(self):
        """Distinct times with at least one exact observation."""
        return self._times[self._n_exact.sum(axis=1) > 0]

    def at_risk(self, s):
        """`R_j(s)`: number of observations of each group with time >= s.

        Returns:
            np.ndarray: shape `np.shape(s) + (2,)`.
        """
        idx = np.searchsorted(self._times, s, side='left')
        return self._bar_exact[idx] + self._bar_censored[idx]

    def group_times(self, group):
        """Observation times and event flags of one group."""
        rows = [(o.time, o.event) for o in self._observations if o.group == group]
        if not rows:
            return np.empty(0), np.empty(0, dtype=bool)
        time, event = zip(*rows)
        return np.array(time), np.array(event, dtype=bool)

    def pooled_quantile(self, q):
        """Quantile(s) of the pooled observation times; `q = 1` gives the largest time."""
        if len(self) == 0:
            raise ValueError('Quantiles of an empty dataset are undefined.')
        q = np.asarray(q, dtype=float)
        if np.any(q <= 0) or np.any(q > 1):
            raise ValueError('Quantile levels have to be in (0, 1], got {}.'.format(q.tolist()))
        return np.quantile([o.time for o in self._observations], q)

    def to_frame(self):
        return pd.DataFrame({
            'time': [o.time for o in self._observations],
            'event': [int(o.event) for o in self._observations],
            'group': [o.group for o in self._observations],
        }, columns=list(COLUMNS))

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format='%.17g')

    def summary(self):
        return {
            'n': self.sizes.tolist(),
            'exact': self._n_exact.sum(axis=0).tolist(),
            'censored': self._n_censored.sum(axis=0).tolist(),
            'distinct_times': len(self._times),
        }

    def __eq__(self, other):
        return isinstance(other, SurvivalDataset) and self._observations == other._observations

    def __repr__(self):
        return 'SurvivalDataset(n={})'.format(self.sizes.tolist())


def _reverse_cumsum(counts):
    out = np.zeros((counts.shape[0] + 1, counts.shape[1]), dtype=np.int64)
    out[:-1] = np.cumsum(counts[::-1], axis=0)[::-1]
    return out


def load_csv(path):
    """Read a `time,event,group` CSV file into a `SurvivalDataset`.

    Parameters:
        path: str  File path.

    Returns:
        SurvivalDataset: with all derived counts.

    Raises:
        DataFormatError: on malformed content, with the offending file line.
        EmptyGroupError: if a group has no observations.
    """
    try:
        frame = pd.read_csv(path, dtype=str, skip_blank_lines=False, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataFormatError('empty file, expected header `time,event,group`', line=1)
    except pd.errors.ParserError as e:
        raise DataFormatError(str(e))
    header = tuple(str(c).strip() for c in frame.columns)
    if header != COLUMNS:
        raise DataFormatError('expected header `time,event,group`, got `{}`'.format(','.join(header)), line=1)

    observations = []
    for idx, row in enumerate(frame.itertuples(index=False)):
        if all(pd.isna(x) or not str(x).strip() for x in row):
            continue
        fields = [str(x).strip() for x in row]
        observations.append(_parse_row(fields, line=idx + 2))

    dataset = SurvivalDataset(observations)
    for group, n in zip((1, 2), dataset.sizes):
        if n == 0:
            raise EmptyGroupError('group {} has no observations'.format(group))
    return dataset


def _parse_row(fields, line):
    time, event, group = fields
    try:
        time = float(time)
    except ValueError:
        raise DataFormatError('time {!r} is not a number'.format(time), line=line)
    if not (time > 0 and math.isfinite(time)):
        raise DataFormatError('time has to be positive and finite, got {}'.format(time), line=line)
    if event not in ('0', '1'):
        raise DataFormatError('event has to be 0 or 1, got {!r}'.format(event), line=line)
    if group not in ('1', '2'):
        raise DataFormatError('group has to be 1 or 2, got {!r}'.format(group), line=line)
    return Observation(time, event == '1', int(group))


def counts_at(dataset, t):
    """Reverse-cumulative counts and at-risk vector at time `t`.

    Counts include observations at exactly `t`, matching `R_j(t) = #{time >= t}`.

    Returns:
        (n_bar_exact, n_bar_censored, at_risk): three integer 2-vectors.
    """
    if t < 0:
        raise ValueError('Need t >= 0, got {}.'.format(t))
    idx = np.searchsorted(dataset.times, t, side='left')
    exact = dataset.bar_exact[idx]
    censored = dataset.bar_censored[idx]
    return exact.copy(), censored.copy(), exact + censored


class KMEstimate(object):
    """Kaplan-Meier step function of one group.

    Parameters:
        group: int             1 or 2.
        times: np.ndarray      Distinct exact times where the curve drops.
        survival: np.ndarray   Survival values right after each time.
    """
    def __init__(self, group, times, survival):
        self._group = group
        self._times = np.asarray(times, dtype=float)
        self._survival = np.asarray(survival, dtype=float)

    @property
    def group(self):
        return self._group

    @property
    def times(self):
        return self._times

    @property
    def survival(self):
        return self._survival

    def __call__(self, t):
        idx = np.searchsorted(self._times, t, side='right')
        return np.concatenate([[1.0], self._survival])[idx]

    def restricted_moment(self, t, k=1):
        """`k * int_0^t S(u) u^(k-1) du` of the step function, exact."""
        if t <= 0:
            raise ValueError('Need t > 0, got {}.'.format(t))
        inside = self._times < t
        edges = np.concatenate([[0.0], self._times[inside], [t]])
        levels = np.concatenate([[1.0], self._survival[inside]])
        return float(np.sum(levels * (edges[1:] ** k - edges[:-1] ** k)))

    def to_dict(self):
        return {'group': self._group, 'times': self._times.tolist(), 'survival': self._survival.tolist()}


def kaplan_meier(dataset, group):
    """Product-limit estimate of group 1 or 2."""
    if group not in (1, 2):
        raise ValueError('group has to be 1 or 2, got {!r}.'.format(group))
    j = group - 1
    if dataset.sizes[j] == 0:
        raise ValueError('group {} has no observations.'.format(group))
    deaths = dataset.n_exact[:, j]
    at_risk = dataset.bar_exact[:-1, j] + dataset.bar_censored[:-1, j]
    drops = deaths > 0
    survival = np.cumprod(1.0 - deaths[drops] / at_risk[drops])
    return KMEstimate(group, dataset.times[drops], survival)
