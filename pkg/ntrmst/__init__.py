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

from ._errors import (
    CombinatorialError,
    ConvergenceError,
    DataFormatError,
    DegenerateScoreError,
    DegenerateVarianceError,
    EmptyGroupError,
    InfeasibleMomentsError,
    NumericalError,
    NumericalWarning,
)
from ._maxent import (
    DensityEstimate,
    density_estimate,
    estimate_density,
    hpd,
    HPDRegion,
    MaxEntDensity,
    Mesh,
    PiecewiseDensity,
    solve_maxent,
    tail_probability,
)
from ._moments import (
    FunctionalMoments,
    linear_combination_moment,
    marginal_moments,
    mean_difference_moments,
    mixed_moment,
    MomentSpec,
    MomentTable,
    rmst_correlation,
    variance_correlation,
    variance_difference_moments,
)
from ._paths import exponential_functionals, path_survival, simulate_jumps, simulate_posterior_jumps
from ._posterior import (
    fit_map,
    HyperFit,
    jump_laplace,
    JumpDescriptor,
    marginal_log_likelihood,
    posterior_psi,
    posterior_survival,
    posterior_survival_variance,
    PosteriorLaplace,
    psi_ratio_factor,
)
from ._prior import (
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
from ._survival import counts_at, kaplan_meier, KMEstimate, load_csv, Observation, SurvivalDataset
from ._util import simplex_grid


__all__ = [
    'BaselineCentering',
    'CombinatorialError',
    'CompoundPriorSpec',
    'ConvergenceError',
    'counts_at',
    'DataFormatError',
    'DegenerateScoreError',
    'DegenerateVarianceError',
    'density_estimate',
    'DensityEstimate',
    'directing_psi_star',
    'EmptyGroupError',
    'estimate_density',
    'exponential_functionals',
    'fit_map',
    'FunctionalMoments',
    'hpd',
    'HPDRegion',
    'HyperFit',
    'InfeasibleMomentsError',
    'jump_laplace',
    'JumpDescriptor',
    'kaplan_meier',
    'KMEstimate',
    'linear_combination_moment',
    'load_csv',
    'LogBetaDirecting',
    'marginal_log_likelihood',
    'marginal_moments',
    'MaxEntDensity',
    'mean_difference_moments',
    'Mesh',
    'mixed_moment',
    'MomentSpec',
    'MomentTable',
    'NumericalError',
    'NumericalWarning',
    'Observation',
    'path_survival',
    'PiecewiseDensity',
    'posterior_psi',
    'posterior_survival',
    'posterior_survival_variance',
    'PosteriorLaplace',
    'prior_psi',
    'prior_survival',
    'prior_survival_variance',
    'PriorLaplace',
    'psi_ratio_factor',
    'rmst_correlation',
    'ScoreDistribution',
    'simplex_grid',
    'simulate_jumps',
    'simulate_posterior_jumps',
    'solve_maxent',
    'StratifiedScore',
    'SurvivalDataset',
    'tail_probability',
    'variance_correlation',
    'variance_difference_moments',
]
