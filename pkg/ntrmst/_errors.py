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


class NumericalWarning(UserWarning):
    """Emitted when a numerical result is usable but should be looked at."""


class DataFormatError(ValueError):
    """Malformed survival data input.

    Parameters:
        msg: str   Description of the problem.
        line: int  1-based line in the input file, if known.
    """
    def __init__(self, msg, line=None):
        if line is not None:
            msg = 'line {}: {}'.format(line, msg)
        super(DataFormatError, self).__init__(msg)
        self.line = line


class EmptyGroupError(DataFormatError):
    pass


class CombinatorialError(ValueError):
    pass


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class DegenerateScoreError(NumericalError):
    pass


class DegenerateVarianceError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, msg, residuals=None):
        super(ConvergenceError, self).__init__(msg)
        self.residuals = residuals


class InfeasibleMomentsError(NumericalError):
    pass
