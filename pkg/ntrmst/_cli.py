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

import argparse
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
import json
import logging
import os
import sys

import numpy as np

from ._errors import NumericalError
from ._maxent import DEFAULT_POINTS, estimate_density, Mesh, tail_probability
from ._moments import DEFAULT_NODES, FUNCTIONALS, rmst_correlation, variance_correlation
from ._posterior import fit_map, PosteriorLaplace
from ._prior import BaselineCentering, CompoundPriorSpec, LogBetaDirecting, PriorLaplace, ScoreDistribution
from ._survival import kaplan_meier, load_csv
from ._util import dumps, parse_floats
from .data import default_scenario, generate, generate_replicates, ScenarioSpec, TruthOracle

logger = logging.getLogger(__name__)

DEFAULT_QUANTILES = (0.25, 0.5, 0.75, 1.0)
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class RunConfig(object):
    """Resolved configuration of one CLI run, embedded in every output file."""
    def __init__(self, command, out='.', data=None, spec=None, horizons=(), quantile_horizons=(), **options):
        self.command = command
        self.out = out
        self.data = data
        self.spec = spec
        self.horizons = [float(t) for t in horizons or ()]
        self.quantile_horizons = [float(q) for q in quantile_horizons or ()]
        if any(not t > 0 for t in self.horizons):
            raise ValueError('Horizons have to be positive, got {}.'.format(self.horizons))
        if any(not 0 < q <= 1 for q in self.quantile_horizons):
            raise ValueError('Quantile horizons have to be in (0, 1], got {}.'.format(self.quantile_horizons))
        self.options = options

    def resolve_horizons(self, dataset):
        """Absolute horizons followed by the pooled-data quantiles."""
        times = list(self.horizons)
        if self.quantile_horizons:
            times.extend(float(x) for x in dataset.pooled_quantile(self.quantile_horizons))
        if not times:
            raise ValueError('No horizons given.')
        return times

    def to_dict(self):
        d = {
            'command': self.command,
            'out': self.out,
            'data': self.data,
            'spec': None if self.spec is None else self.spec.to_dict(),
            'horizons': self.horizons,
            'quantile_horizons': self.quantile_horizons,
        }
        d.update(self.options)
        return d


def _spec_from_args(args):
    """Prior from `--spec` and the prior flags, flags winning; None if neither is given."""
    base = CompoundPriorSpec.load(args.spec).to_dict() if getattr(args, 'spec', None) else None
    pi1 = parse_floats(getattr(args, 'pi1', None))
    if base is None and pi1 is None:
        return None
    base = base or {'gamma': 1.0, 'baseline': {'rate': 0.3}, 'score': {}}
    if args.gamma is not None:
        base['gamma'] = args.gamma
    if args.baseline_rate is not None:
        base['baseline']['rate'] = args.baseline_rate
    if pi1 is not None:
        base['score'] = {'pi1': pi1, 'pi2': parse_floats(args.pi2), 'tau': args.tau}
    return CompoundPriorSpec.from_dict(base)


def _directing_from_args(args):
    """Directing measure from `--spec` (if any) overridden by `--gamma` and `--baseline-rate`."""
    gamma, rate = 1.0, 0.3
    if getattr(args, 'spec', None):
        base = CompoundPriorSpec.load(args.spec)
        gamma, rate = base.gamma, base.baseline.rate
    if args.gamma is not None:
        gamma = args.gamma
    if args.baseline_rate is not None:
        rate = args.baseline_rate
    return LogBetaDirecting(gamma, BaselineCentering(rate))


def _stamp(payload, config):
    payload['config'] = config.to_dict()
    payload['created'] = datetime.now(timezone.utc).isoformat()
    return payload


def _write_json(config, name, payload):
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, name)
    with open(path, 'w') as f:
        f.write(dumps(_stamp(payload, config)))
        f.write('\n')
    logger.info('wrote %s', path)
    return path


def cmd_fit(args):
    dataset = load_csv(args.data)
    directing = _directing_from_args(args)
    grid = taus = None
    pi1 = parse_floats(args.pi1)
    if pi1 is not None:
        grid = [pi1]
    if args.tau is not None:
        taus = [args.tau]
    fit = fit_map(dataset, directing, grid=grid, step=args.pi_step, taus=taus,
                  stratify=not args.no_stratify, workers=args.workers)
    config = RunConfig('fit', out=args.out, data=args.data, spec=fit.spec, pi_step=args.pi_step,
                       stratify=not args.no_stratify, taus=None if taus is None else list(taus))
    fit.surface_frame().to_csv(os.path.join(_ensure(config.out), 'surface.csv'), index=False, float_format='%.17g')
    _write_json(config, 'hyperfit.json', fit.to_dict())
    return 0


def _ensure(directory):
    os.makedirs(directory, exist_ok=True)
    return directory


def cmd_survival(args):
    spec = _spec_from_args(args) or CompoundPriorSpec(_directing_from_args(args), ScoreDistribution((1.0, 0.0, 0.0)))
    dataset = load_csv(args.data) if args.data else None
    times = parse_floats(args.times)
    if times is None:
        if dataset is None and args.t_max is None:
            raise ValueError('Without data the time grid needs --times or --t-max.')
        t_max = args.t_max if args.t_max is not None else float(dataset.times[-1])
        times = np.linspace(0.0, t_max, args.grid_points).tolist()
    if any(t < 0 for t in times):
        raise ValueError('Survival times have to be nonnegative, got {}.'.format(times))

    laplace = PriorLaplace(spec) if dataset is None else PosteriorLaplace(spec, dataset)
    payload = {
        'times': times,
        'posterior': {str(g): laplace.survival(g, times) for g in (1, 2)},
        'km': None if dataset is None else {str(g): kaplan_meier(dataset, g)(times) for g in (1, 2)},
    }
    config = RunConfig('survival', out=args.out, data=args.data, spec=spec, times=times, t_max=args.t_max,
                       grid_points=args.grid_points)
    _write_json(config, 'curves.json', payload)
    return 0


def _km_estimate(dataset, functional, t):
    km = {g: kaplan_meier(dataset, g) for g in (1, 2)}

    def mean(g):
        return km[g].restricted_moment(t)

    def variance(g):
        return km[g].restricted_moment(t, 2) - mean(g) ** 2

    if functional == 'mean-difference':
        return mean(1) - mean(2)
    if functional == 'variance-difference':
        return variance(1) - variance(2)
    kind, group = functional.split('-')
    return mean(int(group)) if kind == 'mean' else variance(int(group))


def _mesh_from_args(args):
    """Fixed mesh from `--mesh-lo` and `--mesh-hi`, None for the moment-centered default."""
    if args.mesh_lo is None and args.mesh_hi is None:
        return None
    if args.mesh_lo is None or args.mesh_hi is None:
        raise ValueError('--mesh-lo and --mesh-hi have to be given together.')
    return Mesh.uniform(args.mesh_lo, args.mesh_hi, args.mesh_points)


def cmd_compare(args):
    dataset = load_csv(args.data)
    spec = _spec_from_args(args)
    if spec is None:
        logger.info('no prior given, fitting the score by maximum a posteriori')
        spec = fit_map(dataset, _directing_from_args(args), step=args.pi_step, workers=args.workers).spec
    quantiles = parse_floats(args.quantile_horizons)
    horizons = parse_floats(args.horizons)
    if quantiles is None and horizons is None:
        quantiles = list(DEFAULT_QUANTILES)
    moments = 'adaptive' if args.adaptive else args.moments
    tails = parse_floats(args.tail) or []
    config = RunConfig('compare', out=args.out, data=args.data, spec=spec, horizons=horizons,
                       quantile_horizons=quantiles, functional=args.functional, moments=moments,
                       level=args.level, mesh_points=args.mesh_points, mesh_lo=args.mesh_lo,
                       mesh_hi=args.mesh_hi, nodes=args.nodes, tail=tails)
    times = config.resolve_horizons(dataset)
    laplace = PosteriorLaplace(spec, dataset)
    mesh = _mesh_from_args(args)

    def run(t):
        return estimate_density(dataset, spec, args.functional, t, mesh=mesh, moments=moments, level=args.level,
                                nodes=args.nodes, laplace=laplace, mesh_points=args.mesh_points)

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        estimates = list(pool.map(run, times))

    regions = []
    for i, est in enumerate(estimates, start=1):
        est.moments.table.to_csv(os.path.join(_ensure(config.out), 'moments_{:02d}.csv'.format(i)))
        tail = [{'c': c,
                 'abs': tail_probability(est.density, c, 'abs'),
                 'upper': tail_probability(est.density, c, 'upper'),
                 'squared': tail_probability(est.density, c, 'squared')} for c in tails]
        region = est.hpd.to_dict()
        region.update({'t': est.t, 'functional': est.functional, 'tail': tail,
                       'km_estimate': _km_estimate(dataset, est.functional, est.t)})
        regions.append(region)
    _write_json(config, 'densities.json', {'densities': [est.to_dict() for est in estimates]})
    _write_json(config, 'hpd.json', {'hpd': regions})
    return 0


def cmd_simulate(args):
    if args.scenario:
        with open(args.scenario) as f:
            scenario = ScenarioSpec.from_dict(json.load(f))
    else:
        scenario = default_scenario()
    d = scenario.to_dict()
    if args.n is not None:
        d['n'] = args.n
    if args.seed is not None:
        d['seed'] = args.seed
    if args.horizon is not None:
        d['horizon'] = args.horizon
    scenario = ScenarioSpec.from_dict(d).calibrate()

    config = RunConfig('simulate', out=args.out, scenario=scenario.to_dict(), replicates=args.replicates)
    _ensure(config.out)
    if args.replicates == 1:
        generate(scenario).to_csv(os.path.join(config.out, 'data.csv'))
    else:
        for i, dataset in enumerate(generate_replicates(scenario, args.replicates, args.workers), start=1):
            dataset.to_csv(os.path.join(config.out, 'data_{:03d}.csv'.format(i)))
    _write_json(config, 'truth.json', {'truth': TruthOracle.of(scenario).to_dict(scenario.horizon)})
    return 0


def cmd_km(args):
    dataset = load_csv(args.data)
    horizons = parse_floats(args.horizons) or []
    config = RunConfig('km', out=args.out, data=args.data, horizons=horizons)
    groups = []
    for g in (1, 2):
        km = kaplan_meier(dataset, g)
        d = km.to_dict()
        d['restricted_mean'] = [{'t': t, 'value': km.restricted_moment(t)} for t in horizons]
        groups.append(d)
    _write_json(config, 'km.json', {'groups': groups, 'summary': dataset.summary()})
    return 0


def cmd_corr(args):
    directing = _directing_from_args(args)
    dataset = load_csv(args.data) if args.data else None
    horizons = parse_floats(args.horizons) or [5.0, 10.0]
    n = int(round(1 / args.pi_step))
    sweep = [i / n for i in range(n + 1)]
    config = RunConfig('corr', out=args.out, data=args.data, horizons=horizons, pi_step=args.pi_step,
                       gamma=directing.gamma, baseline_rate=directing.baseline.rate, nodes=args.nodes)

    curves = [{'t': t, 'rmst': [], 'variance': []} for t in horizons]
    for pi1 in sweep:
        spec = CompoundPriorSpec.build(gamma=directing.gamma, rate=directing.baseline.rate,
                                       pi1=(pi1, (1 - pi1) / 2, (1 - pi1) / 2))
        laplace = PriorLaplace(spec) if dataset is None else PosteriorLaplace(spec, dataset)
        for curve in curves:
            curve['rmst'].append(rmst_correlation(curve['t'], laplace, args.nodes))
            curve['variance'].append(variance_correlation(curve['t'], laplace, args.nodes))
    _write_json(config, 'correlations.json', {'pi1': sweep, 'curves': curves})
    return 0


def _prior_flags(parser):
    parser.add_argument('--spec', help='prior specification JSON (a hyperfit.json works too)')
    parser.add_argument('--pi1', help='score probabilities, e.g. 0.5,0.25,0.25')
    parser.add_argument('--pi2', help='score probabilities after --tau')
    parser.add_argument('--tau', type=float, help='threshold time of the stratified score')
    parser.add_argument('--gamma', type=float, help='precision of the directing measure (default: 1.0)')
    parser.add_argument('--baseline-rate', type=float, help='exponential centering rate (default: 0.3)')


def _parser():
    parser = argparse.ArgumentParser(prog='ntrmst', description='Bayesian nonparametric comparison of '
                                     'restricted mean survival times with compound NTR priors.')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    fit = commands.add_parser('fit', help='maximum a posteriori score hyperparameters')
    fit.add_argument('--data', required=True)
    _prior_flags(fit)
    fit.add_argument('--pi-step', type=float, default=0.1)
    fit.add_argument('--no-stratify', action='store_true')
    fit.set_defaults(handler=cmd_fit)

    survival = commands.add_parser('survival', help='posterior mean survival curves')
    survival.add_argument('--data')
    _prior_flags(survival)
    survival.add_argument('--times', help='comma separated time grid')
    survival.add_argument('--t-max', type=float)
    survival.add_argument('--grid-points', type=int, default=101)
    survival.set_defaults(handler=cmd_survival)

    compare = commands.add_parser('compare', help='posterior densities and HPD regions of a functional')
    compare.add_argument('--data', required=True)
    _prior_flags(compare)
    compare.add_argument('--functional', choices=FUNCTIONALS, default='mean-difference')
    compare.add_argument('--horizons', help='comma separated absolute horizons')
    compare.add_argument('--quantile-horizons', help='comma separated pooled-data quantile levels '
                         '(default: 0.25,0.5,0.75,1 unless --horizons is given)')
    compare.add_argument('--mesh-points', type=int, default=DEFAULT_POINTS)
    compare.add_argument('--mesh-lo', type=float)
    compare.add_argument('--mesh-hi', type=float)
    n_moments = compare.add_mutually_exclusive_group()
    n_moments.add_argument('--moments', type=int, default=6)
    n_moments.add_argument('--adaptive', action='store_true')
    compare.add_argument('--level', type=float, default=0.95)
    compare.add_argument('--tail', help='comma separated thresholds c of the tail masses')
    compare.add_argument('--nodes', type=int, default=DEFAULT_NODES)
    compare.add_argument('--pi-step', type=float, default=0.1)
    compare.set_defaults(handler=cmd_compare)

    simulate = commands.add_parser('simulate', help='simulate a two-group censored dataset')
    simulate.add_argument('--scenario', help='scenario JSON (default: the Weibull mixture design)')
    simulate.add_argument('--n', type=int)
    simulate.add_argument('--seed', type=int)
    simulate.add_argument('--horizon', type=float)
    simulate.add_argument('--replicates', type=int, default=1)
    simulate.set_defaults(handler=cmd_simulate)

    km = commands.add_parser('km', help='Kaplan-Meier curves')
    km.add_argument('--data', required=True)
    km.add_argument('--horizons')
    km.set_defaults(handler=cmd_km)

    corr = commands.add_parser('corr', help='correlation curves over a sweep of pi1')
    corr.add_argument('--data')
    corr.add_argument('--gamma', type=float)
    corr.add_argument('--baseline-rate', type=float)
    corr.add_argument('--horizons')
    corr.add_argument('--pi-step', type=float, default=0.1)
    corr.add_argument('--nodes', type=int, default=DEFAULT_NODES)
    corr.set_defaults(handler=cmd_corr)

    for sub in (fit, survival, compare, simulate, km, corr):
        sub.add_argument('--out', default='.')
    for sub in (fit, compare, simulate):
        sub.add_argument('--workers', type=int)
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    try:
        return args.handler(args)
    except NumericalError as e:
        logger.error('numerical failure: %s', e)
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as e:
        logger.error('configuration error: %s', e)
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG
