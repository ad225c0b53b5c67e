# -*- coding: utf-8 -*-

'''
Oracle quantities: true utilities of fitted libraries, oracle and limiting weights,
principal-deviation moments, Bayesian-oracle utilities and the PCA embedding of
prediction vectors.

Closed forms cover the shipped linear families.  Non-linear plug-in learners are
evaluated by Monte Carlo on fresh samples.

Created on  2024-03-16

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import dataclass
import numpy as np
from scipy import linalg
from mstack import qp, streams
from mstack.data import FeasibleSet
from mstack.exceptions import DegenerateRank, InsufficientStudies, InvalidArgument, SingularSystem, Undefined, UnknownEstimator
from mstack.simulation import draw_target_samples
from mstack.utility import UtilityQuadratic


logger = logging.getLogger('mstack')

PD_EX1_ESTIMATORS = ('dr-gen', 'dr-spec', 'ws-spec', 'cs-gen', 'bayes-spec')
PD_EX2_ESTIMATORS = ('dr', 'cs')
SINGULAR_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class PdStats():
    '''
    Mean and variance of a principal deviation at w
    '''
    mean: float
    variance: float
    w: np.ndarray
    estimator: str


def oracle_generalist_weights_ex1(y1, y2):
    '''
    Weights on (mean of study 1, mean of study 2) minimizing the generalist error (w1 y1 + w2 y2)^2
    over the simplex.  Equal means return (1/2, 1/2).
    '''
    if y1 == y2:
        return np.array([0.5, 0.5])
    if y1 * y2 < 0:
        w1 = abs(y2) / (abs(y1) + abs(y2))
    else:
        w1 = 1.0 if abs(y1) <= abs(y2) else 0.0
    return np.array([w1, 1.0 - w1])


def oracle_specialist_weight_ex1(y1, y2, mu1):
    '''
    Study-1 specialist weight on the study-1 mean: the clamped ratio (mu1 - y2) / (y1 - y2)
    '''
    if y1 == y2:
        return 0.5
    return float(min(max((mu1 - y2) / (y1 - y2), 0.0), 1.0))


def _bayes_shrinkage(sigma, n):
    if sigma <= 0:
        raise InvalidArgument(f'The Bayesian oracle needs sigma > 0, got {sigma}')
    precision = 1.0 / sigma ** 2
    alpha1 = (n + 0.5 * precision) / (n + precision)
    return alpha1, 1.0 - alpha1


def pd_closed_forms_ex1(w, sigma, n, estimator, folds=5):
    '''
    Mean and variance of the principal deviation for the two-study mean-only example

    :param w: Weights on the two study means
    :type w: numpy.ndarray

    :param sigma: Standard deviation of the study means
    :type sigma: float

    :param n: Samples per study
    :type n: int

    :param estimator: One of dr-gen, dr-spec, ws-spec, cs-gen, bayes-spec
    :type estimator: str

    :param folds: Fold count for ws-spec
    :type folds: int, optional

    :return: The moments
    :rtype: :class:`~mstack.oracle.PdStats`
    '''
    w = np.asarray(w, dtype=float)
    w1, w2 = w
    S = w1 ** 2 + w2 ** 2
    total = w1 + w2
    s = sigma ** 2 + 1.0 / n
    if estimator == 'dr-gen':
        mean = s * total
        variance = 2.0 * s ** 2 * S + s ** 2 * total ** 2
    elif estimator == 'dr-spec':
        mean = 2.0 * w1 / n
        variance = 4.0 * (sigma ** 2 + 2.0 / n) * w1 ** 2 / n + 4.0 * s * w2 ** 2 / n
    elif estimator == 'ws-spec':
        M = folds
        if M < 2:
            raise InvalidArgument(f'--folds: must be at least 2, got {M}')
        mean = -S / (n * (M - 1))
        fold_part = S ** 2 / (M - 1) ** 4 + 4.0 * w1 * S / (M - 1) ** 3 + 2.0 * (w1 ** 2 + S) / (M - 1) ** 2
        variance = pd_closed_forms_ex1(w, sigma, n, 'dr-spec').variance + 2.0 * (M - 1) / n ** 2 * fold_part
    elif estimator == 'cs-gen':
        mean = -s * S
        variance = 2.0 * s ** 2 * S ** 2
    elif estimator == 'bayes-spec':
        alpha1, alpha2 = _bayes_shrinkage(sigma, n)
        mean = total / n
        spread = alpha1 ** 2 / n + alpha2 ** 2 * (2.0 * sigma ** 2 + 1.0 / n)
        variance = 4.0 * spread * s * S + total ** 2 / n ** 2
    else:
        raise UnknownEstimator(f'Unknown estimator {estimator}, expected one of {", ".join(PD_EX1_ESTIMATORS)}')
    return PdStats(float(mean), float(variance), w, estimator)


def pd_samples_ex1(estimator, w, sigma, n, replicates, seed, folds=5):
    '''
    Principal-deviation draws for the two-study mean-only example, one per replicate.
    Fold means for ws-spec use sample i in fold i mod folds; n must be a multiple of folds.
    '''
    if estimator not in PD_EX1_ESTIMATORS:
        raise UnknownEstimator(f'Unknown estimator {estimator}, expected one of {", ".join(PD_EX1_ESTIMATORS)}')
    w = np.asarray(w, dtype=float)
    mu = sigma * streams.generator(seed, 0, -1, 'hyper').standard_normal((replicates, 2))
    samples = np.stack([
        mu[:, k, None] + streams.generator(seed, 0, k, 'noise').standard_normal((replicates, n)) for k in range(2)
    ], axis=1)
    ybar = samples.mean(axis=2)
    fitted = ybar @ w
    if estimator == 'dr-gen':
        return fitted * ybar.sum(axis=1)
    if estimator == 'dr-spec':
        return 2.0 * fitted * (ybar[:, 0] - mu[:, 0])
    if estimator == 'cs-gen':
        return -(w[0] * ybar[:, 0] - w[1] * ybar[:, 1]) ** 2
    if estimator == 'bayes-spec':
        alpha1, alpha2 = _bayes_shrinkage(sigma, n)
        return 2.0 * (alpha1 * (ybar[:, 0] - mu[:, 0]) + alpha2 * (ybar[:, 1] - mu[:, 0])) * fitted

    M = folds
    if n % M:
        raise InvalidArgument(f'--folds: {n} samples do not split into {M} equal folds')
    fold_means = samples.reshape(replicates, 2, n // M, M).mean(axis=2)
    deviations = fold_means - ybar[:, :, None]
    C = np.einsum('rtm,rsm->rts', deviations, deviations) / M
    Cw = C @ w
    return 2.0 * fitted * (ybar[:, 0] - mu[:, 0]) - (Cw @ w) / (M - 1) ** 2 - 2.0 * Cw[:, 0] / (M - 1)


def pd_closed_forms_ex2(w, K, n, p, beta0, sigma_beta, sigma, estimator):
    '''
    Expected principal deviation of the generalist DR or CS utility for study-specific OLS
    under the linear-Gaussian model
    '''
    if n <= p + 1:
        raise Undefined(f'Expected deviation needs n > p + 1, got n={n}, p={p}')
    w = np.asarray(w, dtype=float)
    beta0 = np.broadcast_to(np.asarray(beta0, dtype=float), (p,))
    norm0 = float(beta0 @ beta0)
    squared = float(w @ w)
    if estimator == 'dr':
        return p * (p + 1) * sigma ** 2 / (K * n * (n - p - 1)) * squared + 2.0 * (p * sigma_beta ** 2 + p * sigma ** 2 / n) / K * w.sum()
    if estimator == 'cs':
        cross = w.sum() ** 2 - squared
        return norm0 / (K - 1) ** 2 * cross - (norm0 + p * sigma_beta ** 2 + p * sigma ** 2 / (n - p - 1)) / (K - 1) * squared
    raise UnknownEstimator(f'Unknown estimator {estimator}, expected one of {", ".join(PD_EX2_ESTIMATORS)}')


def bayes_oracle_utilities_ex1(w, y1, y2, sigma, n):
    '''
    Posterior-mean utilities under the correctly specified hierarchical model with a flat prior
    on the grand mean.  Returns the generalist utility and the two specialist utilities.
    '''
    w = np.asarray(w, dtype=float)
    alpha1, alpha2 = _bayes_shrinkage(sigma, n)
    fitted = w[0] * y1 + w[1] * y2
    generalist = -(fitted - 0.5 * (y1 + y2)) ** 2 - 1.0 - 1.5 * sigma ** 2 - 0.5 / n
    predictive_var = 1.0 + alpha1 / n
    specialists = (
        -(fitted - (alpha1 * y1 + alpha2 * y2)) ** 2 - predictive_var,
        -(fitted - (alpha1 * y2 + alpha2 * y1)) ** 2 - predictive_var,
    )
    return float(generalist), tuple(float(u) for u in specialists)


def mse_ex1(w, ybar, sigma, mu1=None):
    '''
    Generalist error (w.ybar)^2 + 1 + sigma^2, or the study-1 error (w.ybar - mu1)^2 + 1 when mu1 is given
    '''
    fitted = float(np.asarray(w, dtype=float) @ np.asarray(ybar, dtype=float))
    if mu1 is None:
        return fitted ** 2 + 1.0 + sigma ** 2
    return (fitted - mu1) ** 2 + 1.0


def ws_specialist_weight_ex1(fold_means_1, fold_means_2):
    '''
    Within-study CV specialist weight on the study-1 mean from equal-size fold means
    '''
    a = np.asarray(fold_means_1, dtype=float)
    b = np.asarray(fold_means_2, dtype=float)
    M = len(a)
    held_a = (a.sum() - a) / (M - 1)
    held_b = (b.sum() - b) / (M - 1)
    gap = held_a - held_b
    denominator = gap @ gap
    if denominator == 0:
        return 0.5
    return float(min(max((a - held_b) @ gap / denominator, 0.0), 1.0))


def psi(w, B_hat, beta0, sigma_beta, sigma):
    '''
    Generalist squared error of the stacked linear predictor under the linear-Gaussian model
    '''
    B_hat = np.asarray(B_hat, dtype=float)
    p = B_hat.shape[0]
    residual = B_hat @ np.asarray(w, dtype=float) - np.broadcast_to(np.asarray(beta0, dtype=float), (p,))
    return float(residual @ residual + p * sigma_beta ** 2 + sigma ** 2)


def truth_quadratic(intercepts, slopes, truth, region='P0'):
    '''
    True utility of linear predictors a_j + x'G_j as a quadratic.  region is 'P0' or a study index.
    '''
    a = np.asarray(intercepts, dtype=float)
    G = np.asarray(slopes, dtype=float).reshape(truth.p, len(a))
    if region == 'P0':
        mu, mu_var, beta, beta_var = truth.target_moments()
    else:
        mu, mu_var, beta, beta_var = truth.study_moments(int(region))
    tau = truth.tau
    Sigma = np.outer(a, a) + tau * G.T @ G
    b = mu * a + tau * G.T @ beta
    c = mu ** 2 + mu_var + tau * (beta @ beta + truth.p * beta_var) + truth.noise_var
    return UtilityQuadratic(Sigma, b, c)


def oracle_quadratic(library, truth, region='P0'):
    '''
    True generalist (region 'P0') or specialist (region k) utility of a linear SPF library
    '''
    intercepts, slopes = library.linear_form()
    q = truth_quadratic(intercepts, slopes, truth, region)
    return UtilityQuadratic(q.Sigma, q.b, q.c, tuple(library.ordering))


def oracle_weights(library, truth, region='P0', W=None):
    return qp.maximize(oracle_quadratic(library, truth, region), W or FeasibleSet.simplex()).w


def psi_truth(w, B, truth):
    '''
    Generalist error of the stacked predictor with slope columns B under the truth's family
    '''
    B = np.asarray(B, dtype=float)
    return float(-truth_quadratic(np.zeros(B.shape[1]), B, truth).value(w))


def oracle_limit_weights(B, beta0, W=None):
    '''
    Minimizer of ||Bw - beta0||^2 over W
    '''
    B = np.asarray(B, dtype=float)
    beta0 = np.broadcast_to(np.asarray(beta0, dtype=float), (B.shape[0],))
    q = UtilityQuadratic(B.T @ B, B.T @ beta0, float(beta0 @ beta0))
    return qp.maximize(q, W or FeasibleSet.simplex()).w


def dr_limit_quadratic(B, sigma):
    '''
    Large-sample limit of the generalist DR utility for study-specific OLS with standard normal covariates
    '''
    B = np.asarray(B, dtype=float)
    K = B.shape[1]
    gram = B.T @ B
    return UtilityQuadratic(gram, gram @ np.ones(K) / K, float(np.trace(gram)) / K + sigma ** 2)


def cs_limit_quadratic(B, sigma):
    '''
    Large-sample limit of the generalist CS utility for study-specific OLS with standard normal covariates
    '''
    B = np.asarray(B, dtype=float)
    K = B.shape[1]
    if K < 2:
        raise InsufficientStudies(f'The cross-set limit needs at least 2 studies, got {K}')
    gram = B.T @ B
    D = np.diag(np.diag(gram))
    Sigma = ((K * K - 2 * K) * gram + K * D) / (K - 1) ** 2
    b = (gram - D) @ np.ones(K) / (K - 1)
    return UtilityQuadratic(Sigma, b, float(np.trace(gram)) / K + sigma ** 2)


def asymptotic_cs_weights(B):
    '''
    Stationary point of the limiting CS utility over unconstrained weights, together with
    the limiting DR weights 1/K

    :param B: p x K matrix of true study coefficients
    :type B: numpy.ndarray

    :return: (CS weights, DR weights)
    :rtype: tuple
    '''
    B = np.asarray(B, dtype=float)
    K = B.shape[1]
    if K <= 2:
        raise InsufficientStudies(f'The asymptotic CS weights need more than 2 studies, got {K}')
    gram = B.T @ B
    D = np.diag(np.diag(gram))
    A = (K - 2) * gram + D
    if np.linalg.cond(A) > SINGULAR_CONDITION:
        raise SingularSystem('(K - 2) B\'B + D is numerically singular')
    w = (K - 1) / K * linalg.solve(A, (gram - D) @ np.ones(K), assume_a='sym')
    return w, np.full(K, 1.0 / K)


def mse_region(collection, truth, model, region='P0', mc_n=100000, seed=0, replicate=0):
    '''
    Mean squared error of a stacked model on the target distribution or on study k.
    Linear libraries use the closed form; others are estimated from mc_n fresh samples.
    '''
    if collection.p != truth.p:
        raise InvalidArgument(f'Collection has {collection.p} features but the truth has {truth.p}')
    try:
        return float(-oracle_quadratic(model.library, truth, region).value(model.weights))
    except NotImplementedError:
        logger.debug('Library has no linear form; estimating the error by Monte Carlo')
    X, y = draw_target_samples(truth, region, mc_n, streams.generator(seed, replicate, -1, 'target'))
    residual = y - model.predict(X)
    return float(residual @ residual / mc_n)


def pca_project(vectors):
    '''
    Two-dimensional principal-component coordinates of the m columns of an n x m matrix.
    Each coordinate axis is signed so its first nonzero entry is positive.  With fewer than
    two nonzero eigenvalues the second coordinate is zero.
    '''
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2 or V.shape[1] < 2:
        raise DegenerateRank(f'PCA needs at least 2 vectors, got shape {V.shape}')
    centered = V - V.mean(axis=1, keepdims=True)
    gram = centered.T @ centered
    values, directions = linalg.eigh(gram)
    order = np.argsort(values)[::-1][:2]
    values = np.clip(values[order], 0.0, None)
    directions = directions[:, order]
    scale = max(values[0], 1.0) * 1e-12
    coordinates = directions * np.sqrt(values)[None, :]
    for j in range(2):
        if values[j] <= scale:
            coordinates[:, j] = 0.0
            continue
        nonzero = np.flatnonzero(np.abs(coordinates[:, j]) > 1e-15)
        if len(nonzero) and coordinates[nonzero[0], j] < 0:
            coordinates[:, j] = -coordinates[:, j]
    return coordinates
