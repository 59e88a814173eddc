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
import numbers

import numpy as np
from scipy.special import gammaln

# Beyond this many terms rising-factorial ratios go through log-gamma.
_DIRECT_TERMS = 64


def _numpy_to_native(x):
    # cf. https://numpy.org/doc/stable/reference/generated/numpy.ndarray.item.html
    if isinstance(x, np.ndarray):
        return x.tolist()
    if ("<class 'numpy." in str(type(x)) or "<type 'numpy." in str(type(x))) and callable(x.item):
        return x.item()
    raise TypeError('Object of type {} is not JSON serializable'.format(type(x).__name__))


def dumps(obj):
    """Deterministic JSON text: sorted keys, two space indent, numpy aware."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_numpy_to_native)


def as_count(m):
    """Validate a nonnegative integer argument of a Laplace exponent."""
    if isinstance(m, bool) or not isinstance(m, numbers.Integral):
        if not isinstance(m, bool) and isinstance(m, numbers.Real) and float(m).is_integer():
            m = int(m)
        else:
            raise ValueError('Laplace arguments have to be nonnegative integers, got {!r}.'.format(m))
    if m < 0:
        raise ValueError('Laplace arguments have to be nonnegative integers, got {!r}.'.format(m))
    return int(m)


def as_count_vector(r, dim=2):
    """Validate a vector of nonnegative integers of length `dim`.

    Returns:
        Tuple[int]: the validated vector.
    """
    r = tuple(r)
    if len(r) != dim:
        raise ValueError('Expected a vector of length {}, got {!r}.'.format(dim, r))
    return tuple(as_count(x) for x in r)


def log_rising_ratio(a, b, lo, hi):
    """Sum of `log((a + j) / (b + j))` for `j = lo, ..., hi - 1`.

    All arguments broadcast against each other. Short sums are accumulated
    term by term with `log1p((a - b) / (b + j))`, long ones via log-gamma
    differences.

    Parameters:
        a, b: array-like     Positive shifts.
        lo, hi: array-like   Integer summation limits with `lo <= hi`.

    Returns:
        np.ndarray: the sums, zero where `lo == hi`.
    """
    a, b, lo, hi = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                                       np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64))
    count = hi - lo
    out = np.zeros(a.shape)
    if out.size == 0:
        return out
    longest = int(count.max())
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        if longest <= _DIRECT_TERMS:
            diff = a - b
            for j in range(longest):
                active = j < count
                term = np.log1p(diff / (b + lo + j))
                out += np.where(active, term, 0.0)
            return out
        out = gammaln(a + hi) - gammaln(a + lo) - gammaln(b + hi) + gammaln(b + lo)
    return np.where(count > 0, out, 0.0)


def simplex_grid(step=0.1):
    """All score triplets on the probability simplex with spacing `step`.

    Parameters:
        step: float  Grid spacing, `1 / step` has to be an integer.

    Returns:
        np.ndarray: shape (n, 3), e.g. 66 rows for step 0.1.
    """
    if not 0 < step <= 1:
        raise ValueError('Simplex step has to be in (0, 1], got {}.'.format(step))
    n = int(round(1.0 / step))
    if abs(n * step - 1.0) > 1e-9:
        raise ValueError('1 / step has to be an integer, got step {}.'.format(step))
    rows = [(i / n, j / n, (n - i - j) / n)
            for i in range(n, -1, -1)
            for j in range(n - i, -1, -1)]
    return np.array(rows)


def parse_floats(text):
    """Parse a comma separated list of numbers, e.g. `'0.5,0.25,0.25'`."""
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise ValueError('Could not parse number list {!r}.'.format(text))
