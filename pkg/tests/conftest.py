# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function, unicode_literals

import math

import numpy as np
import pytest
from scipy.integrate import quad

from ntrmst import CompoundPriorSpec, JumpDescriptor, SurvivalDataset
from ntrmst._prior import SUPPORT


@pytest.fixture()
def make_spec():
    def make(**kwargs):
        return CompoundPriorSpec.build(**kwargs)

    return make


@pytest.fixture()
def make_dataset():
    def make(rows):
        return SurvivalDataset(rows)

    return make


@pytest.fixture()
def tied_dataset():
    # ties across groups and between exact and censored observations
    return SurvivalDataset([
        (0.5, True, 1), (1.0, True, 1), (1.0, False, 1), (2.0, True, 1), (3.5, False, 1),
        (0.7, True, 2), (1.0, True, 2), (1.5, False, 2), (2.0, True, 2), (2.5, True, 2),
    ])


@pytest.fixture()
def write_csv(tmp_path):
    def write(text, name='data.csv'):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


@pytest.fixture()
def posterior_psi_oracle():
    """Posterior exponent by direct quadrature of the tilted intensity and of the jump densities."""
    def jump_log_transform(spec, time, exact, at_risk, r):
        exact, at_risk = np.array(exact), np.array(at_risk)
        probs = np.asarray(spec.score.probabilities_at(time)).ravel()
        shape = float(spec.directing.shape(time))

        def normalizer(m):
            total = 0.0
            for z, p in zip(SUPPORT, probs):
                if p == 0 or np.any(exact[z == 0] > 0):
                    continue
                a = float((at_risk - exact + m) @ z) + shape
                b = int(exact @ z)
                value, _ = quad(lambda v: v ** (a - 1) * (1 - v) ** (b - 1), 0.0, 1.0, epsabs=1e-14, epsrel=1e-12,
                                limit=200)
                total += p * value
            return total

        return -math.log(normalizer(np.array(r)) / normalizer(np.zeros(2)))

    def oracle(r, t, spec, dataset):
        r = np.array(r)
        gamma, baseline = spec.gamma, spec.baseline

        def intensity(s):
            risk = dataset.at_risk(s)
            probs = np.asarray(spec.score.probabilities_at(s)).ravel()
            total = 0.0
            for z, p in zip(SUPPORT, probs):
                c = gamma * float(baseline.survival(s)) + float(risk @ z)
                total += p * sum(1.0 / (c + i) for i in range(int(r @ z)))
            return gamma * float(baseline.density(s)) * total

        cuts = sorted({0.0, t} | {float(x) for x in dataset.times if x < t}
                      | ({spec.tau} if spec.tau is not None and spec.tau < t else set()))
        continuous = math.fsum(quad(intensity, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
                               for a, b in zip(cuts[:-1], cuts[1:]))
        jumps = math.fsum(jump_log_transform(spec, j.time, j.exact, j.at_risk, r)
                          for j in _posterior_jumps(dataset) if j.time <= t)
        return continuous + jumps

    return oracle


def _posterior_jumps(dataset):
    """Exact times with their exact counts and at-risk vectors, counted from the raw observations."""
    times = sorted({o.time for o in dataset.observations if o.event})
    for time in times:
        exact = [sum(1 for o in dataset.observations if o.event and o.time == time and o.group == g) for g in (1, 2)]
        at_risk = [sum(1 for o in dataset.observations if o.time >= time and o.group == g) for g in (1, 2)]
        yield JumpDescriptor(time, tuple(exact), tuple(at_risk))
