# -*- coding: utf-8 -*-

'''
Synthetic multi-study data.

Four scenario kinds ship:

* ``ex1``: two studies, no covariates, y ~ N(mu_k, 1) with mu_k ~ N(0, sigma^2)
* ``ex2``: linear model y = x'beta_k + eps, beta_k ~ N(beta0, sigma_beta^2 I), x ~ N(0, I), eps ~ N(0, sigma^2)
* ``ex3``: as ex2 but beta_k is beta0 with probability mix and N(beta0, sigma_beta^2 I) otherwise
* ``hier-uniform``: beta_k components, x components and eps all uniform (on [0, 1], [-1, 1], [-1, 1])

Created on  2024-03-15

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import dataclass, field
from typing import Optional
import numpy as np
from mstack import streams
from mstack.data import StudyCollection
from mstack.exceptions import InvalidArgument


logger = logging.getLogger('mstack')

SCENARIO_KINDS = ('ex1', 'ex2', 'ex3', 'hier-uniform')

DEFAULTS = {
    'ex1': {'K': 2, 'n': 50, 'sigma': 1.0},
    'ex2': {'K': 5, 'n': 100, 'p': 10, 'beta0': 1.0, 'sigma_beta': 1.0, 'sigma': 1.0},
    'ex3': {'K': 3, 'n': 2000, 'p': 5, 'beta0': 1.0, 'sigma_beta': 1.0, 'sigma2': 10.0, 'mix': 0.5},
    'hier-uniform': {'K': 20, 'n': 100, 'p': 10},
}

PATTERN_ATTEMPTS = 1000


@dataclass(frozen=True, eq=False)
class Scenario():
    '''
    A generator kind with its parameters.  n may be one size or a list of K sizes;
    beta0 may be a scalar (broadcast to p) or a vector.

    params is merged over DEFAULTS[kind] key by key, so a partial dict keeps the built-in
    value of every key it omits; the merged dict replaces params.  with_params merges again
    on top, as the figure runners do when they sweep one parameter.  Unknown keys are
    rejected earlier, by the per-kind serializers in mstack.serializers; Scenario itself
    only range-checks.
    '''
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    replicate: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise InvalidArgument(f'--scenario: unknown scenario {self.kind}, expected one of {", ".join(SCENARIO_KINDS)}')
        params = dict(DEFAULTS[self.kind])
        params.update(self.params or {})
        if self.kind == 'ex1' and params['K'] != 2:
            raise InvalidArgument('--params: ex1 has exactly 2 studies')
        if params['K'] < 1:
            raise InvalidArgument(f'--params: K must be positive, got {params["K"]}')
        sizes = np.broadcast_to(np.asarray(params['n'], dtype=int), (params['K'],)).copy()
        if np.any(sizes < 1):
            raise InvalidArgument(f'--params: sample sizes must be positive, got {sizes.tolist()}')
        for name in ('sigma', 'sigma_beta', 'sigma2'):
            if name in params and params[name] < 0:
                raise InvalidArgument(f'--params: {name} must be nonnegative')
        if 'mix' in params and not 0 <= params['mix'] <= 1:
            raise InvalidArgument('--params: mix must be in [0, 1]')
        object.__setattr__(self, 'params', params)
        object.__setattr__(self, 'sizes', sizes)

    @property
    def K(self):
        return self.params['K']

    @property
    def p(self):
        return self.params.get('p', 0)

    @property
    def beta0(self):
        if self.kind == 'hier-uniform':
            return np.full(self.p, 0.5)
        if self.kind == 'ex1':
            return np.zeros(0)
        return np.broadcast_to(np.asarray(self.params['beta0'], dtype=float), (self.p,)).copy()

    def with_params(self, **params):
        merged = dict(self.params)
        merged.update(params)
        return Scenario(self.kind, merged, self.seed, self.replicate)

    def for_replicate(self, replicate):
        return Scenario(self.kind, self.params, self.seed, replicate)


@dataclass(frozen=True, eq=False)
class TruthBundle():
    '''
    True study parameters and the hyper-level moments needed by the oracle.

    intercepts and B (p x K) hold the per-study truth.  The target distribution P0 has
    intercept mean mu0 and variance intercept_var, slope mean beta0 and per-coordinate
    variance slope_var.  Covariates have second moment tau; noise has variance noise_var.
    '''
    kind: str
    intercepts: np.ndarray
    B: np.ndarray
    mu0: float
    intercept_var: float
    beta0: np.ndarray
    slope_var: float
    tau: float
    noise_var: float
    covariates: str = 'normal'
    noise: str = 'normal'
    pattern: Optional[np.ndarray] = None
    mix: float = 0.0

    @property
    def K(self):
        return len(self.intercepts)

    @property
    def p(self):
        return len(self.beta0)

    def study_moments(self, k):
        '''
        (intercept mean, intercept variance, slope mean, slope variance) for study k
        '''
        return self.intercepts[k], 0.0, self.B[:, k], 0.0

    def target_moments(self):
        return self.mu0, self.intercept_var, self.beta0, self.slope_var


def _covariates(truth, rng, m):
    if truth.covariates == 'uniform':
        return rng.uniform(-1.0, 1.0, size=(m, truth.p))
    return rng.standard_normal((m, truth.p))


def _noise(truth, rng, m):
    if truth.noise == 'uniform':
        return rng.uniform(-1.0, 1.0, size=m)
    return np.sqrt(truth.noise_var) * rng.standard_normal(m)


def pattern_indicators(s):
    '''
    Mixture indicators for every attempt: row a, column k is True when study k takes beta0 exactly
    '''
    rng = streams.generator(s.seed, s.replicate, -1, 'pattern')
    return rng.uniform(size=(PATTERN_ATTEMPTS, s.K)) < s.params['mix']


def draw_truth(s, attempt=0):
    '''
    Draw the study-level parameters of a scenario
    '''
    K, p = s.K, s.p
    params = s.params
    if s.kind == 'ex1':
        sigma = params['sigma']
        mu = np.array([sigma * streams.generator(s.seed, s.replicate, k, 'hyper').standard_normal() for k in range(K)])
        return TruthBundle('ex1', mu, np.zeros((0, K)), 0.0, sigma ** 2, np.zeros(0), 0.0, 1.0, 1.0)

    beta0 = s.beta0
    if s.kind == 'hier-uniform':
        B = np.column_stack([streams.generator(s.seed, s.replicate, k, 'hyper').uniform(size=p) for k in range(K)])
        return TruthBundle('hier-uniform', np.zeros(K), B, 0.0, 0.0, beta0, 1.0 / 12.0, 1.0 / 3.0, 1.0 / 3.0, 'uniform', 'uniform')

    sigma_beta = params['sigma_beta']
    deviations = np.column_stack([
        sigma_beta * streams.generator(s.seed, s.replicate, k, 'hyper').standard_normal(p) for k in range(K)
    ]) if K else np.zeros((p, 0))
    if s.kind == 'ex2':
        return TruthBundle('ex2', np.zeros(K), beta0[:, None] + deviations, 0.0, 0.0, beta0, sigma_beta ** 2, 1.0, params['sigma'] ** 2)

    pattern = pattern_indicators(s)[attempt]
    B = beta0[:, None] + deviations * (~pattern)[None, :]
    slope_var = (1.0 - params['mix']) * sigma_beta ** 2
    return TruthBundle('ex3', np.zeros(K), B, 0.0, 0.0, beta0, slope_var, 1.0, params['sigma2'], pattern=pattern, mix=params['mix'])


def draw_study(truth, k, n, rng_covariates, rng_noise):
    X = _covariates(truth, rng_covariates, n)
    y = truth.intercepts[k] + X @ truth.B[:, k] + _noise(truth, rng_noise, n)
    return y, X


def generate(s, attempt=0):
    '''
    Draw a study collection and its truth from a scenario

    :param s: The scenario
    :type s: :class:`~mstack.simulation.Scenario`

    :param attempt: Row of the mixture-indicator table used by ex3
    :type attempt: int, optional

    :return: The studies and the truth that generated them
    :rtype: tuple
    '''
    truth = draw_truth(s, attempt)
    ys, Xs = [], []
    for k, n in enumerate(s.sizes):
        y, X = draw_study(
            truth, k, n,
            streams.generator(s.seed, s.replicate, k, 'covariates'),
            streams.generator(s.seed, s.replicate, k, 'noise'),
        )
        ys.append(y)
        Xs.append(X)
    return StudyCollection.from_arrays(ys, Xs), truth


def until_pattern(s, pattern=None):
    '''
    Generate an ex3 collection whose mixture draw matches pattern (default: every study but
    the last takes beta0 exactly).  Raises InvalidArgument if no attempt matches.
    '''
    if s.kind != 'ex3':
        raise InvalidArgument('until_pattern needs an ex3 scenario')
    if pattern is None:
        pattern = np.array([True] * (s.K - 1) + [False])
    pattern = np.asarray(pattern, dtype=bool)
    matches = np.flatnonzero(np.all(pattern_indicators(s) == pattern, axis=1))
    if len(matches) == 0:
        raise InvalidArgument(f'No mixture draw matched {pattern.tolist()} in {PATTERN_ATTEMPTS} attempts')
    logger.debug(f'ex3 pattern found at attempt {matches[0]}')
    return generate(s, int(matches[0]))


def draw_target_samples(truth, region, m, rng):
    '''
    Fresh (X, y) from the target distribution P0 (region 'P0') or from study k (region k)
    '''
    X = _covariates(truth, rng, m)
    if region == 'P0':
        if truth.kind == 'hier-uniform':
            betas = rng.uniform(size=(m, truth.p))
        elif truth.kind == 'ex3':
            exact = rng.uniform(size=m) < truth.mix
            spread = np.sqrt(truth.slope_var / (1.0 - truth.mix)) if truth.mix < 1 else 0.0
            betas = truth.beta0[None, :] + spread * rng.standard_normal((m, truth.p)) * (~exact)[:, None]
        else:
            betas = truth.beta0[None, :] + np.sqrt(truth.slope_var) * rng.standard_normal((m, truth.p))
        intercepts = truth.mu0 + np.sqrt(truth.intercept_var) * rng.standard_normal(m)
        y = intercepts + np.einsum('ij,ij->i', X, betas) + _noise(truth, rng, m)
        return X, y
    k = int(region)
    return X, truth.intercepts[k] + X @ truth.B[:, k] + _noise(truth, rng, m)

