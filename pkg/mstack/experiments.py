# -*- coding: utf-8 -*-

'''
Figure reproduction runners.

Every runner takes (seed, replicates, jobs) and returns a dict of named pandas tables.
Replicates run on a joblib worker pool and are gathered in replicate order, so output
does not depend on the pool size.

Created on  2024-03-18

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import replace
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats
from django.conf import settings
from mstack import qp, streams
from mstack.calculator import StackConfig, StackingCalculator
from mstack.data import FeasibleSet, generalist_nu, specialist_nu, study_specific_lts
from mstack.exceptions import InvalidArgument, MstackException
from mstack.learners import MeanOnly, OLS, train_library, prediction_matrix
from mstack.oracle import (
    asymptotic_cs_weights, dr_limit_quadratic, mse_ex1, mse_region, oracle_quadratic, oracle_weights, pca_project,
    pd_closed_forms_ex2, psi_truth, truth_quadratic
)
from mstack.simulation import Scenario, draw_target_samples, generate, until_pattern
from mstack.utility import (
    PenaltySpec, WsPartition, apply_penalty, cs_utility, dr_utility, principal_deviation, ws_utility
)


logger = logging.getLogger('mstack')

FIGURES = ('2a', '2bc', '2def', '3-left', '3-right', '4', '5a', '5bc', '5d', 'E1')
SCALES = ('full', 'desk')


def replicate_count(figure, scale='desk'):
    '''
    Replicates for a figure at the given scale
    '''
    if figure not in FIGURES:
        raise InvalidArgument(f'--figure: unknown figure {figure}, expected one of {", ".join(FIGURES)}')
    if scale not in SCALES:
        raise InvalidArgument(f'--scale: unknown scale {scale}')
    full = settings.REPRODUCTION.REPLICATES[figure]
    if scale == 'full' or figure in settings.REPRODUCTION.FIXED:
        return full
    return max(1, full // settings.REPRODUCTION.DESK_FACTOR)


def _values(q, W):
    '''
    Utility of every row of W
    '''
    return -(np.einsum('ij,jk,ik->i', W, q.Sigma, W) - 2.0 * W @ q.b + q.c)


def _study_specific(collection, learners=None):
    learners = learners or (OLS(),)
    lts = study_specific_lts(collection)
    library = train_library(learners, collection, lts)
    return lts, library, prediction_matrix(library, collection)


def _learners_of(library):
    return tuple(spf.learner for spf in library.spfs[0])


def _slopes(library):
    return library.linear_form()[1]


def _summarize(frame, by, columns):
    '''
    Mean, standard deviation and standard error of columns grouped by the keys in by
    '''
    grouped = frame.groupby(by, sort=False)[columns]
    summary = grouped.mean().add_suffix('_mean')
    sd = grouped.std(ddof=1)
    count = grouped.count()
    summary = summary.join(sd.add_suffix('_sd')).join((sd / np.sqrt(count)).add_suffix('_se'))
    return summary.reset_index()


def _line_fit(x, y, form):
    fit = stats.linregress(x, y)
    return {'form': form, 'c0': fit.intercept, 'c1': fit.slope, 'r2': fit.rvalue ** 2}


def _parallel(jobs, function, items):
    return Parallel(n_jobs=jobs)(delayed(function)(*item) for item in items)


# Fig 2a: agreement of the DR and within-study CV utilities, and DR convergence

FIG2A_N = (100, 200, 400, 800, 1600, 3200)


def _fig2a_repeat(seed, r, n_grid, K, p, folds, n_weights):
    base = Scenario('ex2', {'K': K, 'p': p, 'sigma': 1.0, 'sigma_beta': 1.0}, seed, r)
    W = streams.generator(seed, r, -1, 'weights').dirichlet(np.ones(K), size=n_weights)
    uniform = np.full((1, K), 1.0 / K)
    nu = generalist_nu(K)
    rows = []
    for n in n_grid:
        collection, truth = generate(base.with_params(n=n))
        lts, library, P = _study_specific(collection)
        q_dr = dr_utility(library, collection, nu, P)
        q_ws = ws_utility(_learners_of(library), collection, lts, nu, WsPartition.random(collection, folds, 1, seed, r))
        q_limit = dr_limit_quadratic(truth.B, 1.0)
        rows.append({
            'repeat': r,
            'n': n,
            'dr_ws_gap': abs(_values(q_dr, uniform) - _values(q_ws, uniform))[0],
            'dr_limit_gap': abs(_values(q_dr, uniform) - _values(q_limit, uniform))[0],
            'dr_ws_sup_gap': np.max(np.abs(_values(q_dr, W) - _values(q_ws, W))),
            'dr_limit_sup_gap': np.max(np.abs(_values(q_dr, W) - _values(q_limit, W))),
        })
    return rows


def run_fig2a(seed, replicates, jobs=1, n_grid=FIG2A_N, K=5, p=10, folds=5, n_weights=100):
    '''
    Tables:

    * gaps: repeat, n, dr_ws_gap, dr_limit_gap (at w = 1/K), dr_ws_sup_gap, dr_limit_sup_gap (over random w)
    * summary: n and the mean of each gap over repeats
    * slopes: quantity, slope, intercept, r2 of log(mean gap) against log(n)
    '''
    results = _parallel(jobs, _fig2a_repeat, [(seed, r, n_grid, K, p, folds, n_weights) for r in range(replicates)])
    gaps = pd.DataFrame([row for rows in results for row in rows])
    columns = ['dr_ws_gap', 'dr_limit_gap', 'dr_ws_sup_gap', 'dr_limit_sup_gap']
    summary = gaps.groupby('n', sort=True)[columns].mean().reset_index()
    slopes = []
    for column in columns:
        fit = stats.linregress(np.log(summary['n']), np.log(summary[column]))
        slopes.append({'quantity': column, 'slope': fit.slope, 'intercept': fit.intercept, 'r2': fit.rvalue ** 2})
    return {'gaps': gaps, 'summary': summary, 'slopes': pd.DataFrame(slopes)}


# Fig 2b-c: principal deviations of the DR, within-study CV and cross-set utilities

FIG2BC_W1 = tuple(np.round(np.arange(0, 0.55, 0.05), 2))


def _fig2bc_replicate(seed, r, K, n, p, sigma, sigma_beta, folds, w1_grid):
    collection, truth = generate(Scenario('ex2', {'K': K, 'n': n, 'p': p, 'sigma': sigma, 'sigma_beta': sigma_beta}, seed, r))
    lts, library, P = _study_specific(collection)
    nu = generalist_nu(K)
    estimates = {
        'dr': dr_utility(library, collection, nu, P),
        'ws': ws_utility(_learners_of(library), collection, lts, nu, WsPartition.random(collection, folds, 1, seed, r)),
        'cs': cs_utility(library, collection, lts, nu, P=P),
    }
    truth_q = oracle_quadratic(library, truth, 'P0')
    rows = []
    for w1 in w1_grid:
        w = np.full(K, (1.0 - w1) / (K - 1))
        w[0] = w1
        for estimator, q in estimates.items():
            rows.append({'replicate': r, 'w1': w1, 'estimator': estimator, 'pd': principal_deviation(q, truth_q, w)})
    return rows


def run_fig2bc(seed, replicates, jobs=1, K=20, n=100, p=10, sigma=1.0, sigma_beta=1.0, folds=5, w1_grid=FIG2BC_W1):
    '''
    Tables:

    * deviations: replicate, w1, estimator (dr, ws, cs), pd
    * summary: w1, estimator, pd_mean, pd_sd, pd_se, closed_form (dr and cs only)
    '''
    results = _parallel(jobs, _fig2bc_replicate, [(seed, r, K, n, p, sigma, sigma_beta, folds, w1_grid) for r in range(replicates)])
    deviations = pd.DataFrame([row for rows in results for row in rows])
    summary = _summarize(deviations, ['w1', 'estimator'], ['pd'])

    def closed_form(row):
        if row['estimator'] not in ('dr', 'cs'):
            return np.nan
        w = np.full(K, (1.0 - row['w1']) / (K - 1))
        w[0] = row['w1']
        return pd_closed_forms_ex2(w, K, n, p, np.ones(p), sigma_beta, sigma, row['estimator'])

    summary['closed_form'] = summary.apply(closed_form, axis=1)
    return {'deviations': deviations, 'summary': summary}


# Fig 2d-f: utility landscapes over the 2-simplex and the PCA embedding of prediction vectors

def run_fig2def(seed, replicates=1, jobs=1, n=2000, p=5, sigma2=10.0, folds=5, resolution=50, target_n=10000):
    '''
    Tables:

    * contours: w1, w2, w3, ws_utility, cs_utility on a simplex lattice
    * weights: label (ws, cs, oracle), w1, w2, w3
    * pca: label (spf1, spf2, spf3, ws, cs, oracle), pc1, pc2
    '''
    collection, truth = until_pattern(Scenario('ex3', {'n': n, 'p': p, 'sigma2': sigma2}, seed, 0))
    lts, library, P = _study_specific(collection)
    nu = generalist_nu(3)
    q_ws = ws_utility(_learners_of(library), collection, lts, nu, WsPartition.random(collection, folds, 1, seed))
    q_cs = cs_utility(library, collection, lts, nu, P=P)
    lattice = qp.simplex_lattice(3, resolution)
    contours = pd.DataFrame(lattice, columns=['w1', 'w2', 'w3'])
    contours['ws_utility'] = _values(q_ws, lattice)
    contours['cs_utility'] = _values(q_cs, lattice)

    W = FeasibleSet.simplex()
    weights = {
        'ws': qp.maximize(q_ws, W).w,
        'cs': qp.maximize(q_cs, W).w,
        'oracle': oracle_weights(library, truth, 'P0', W),
    }
    weight_table = pd.DataFrame([{'label': label, 'w1': w[0], 'w2': w[1], 'w3': w[2]} for label, w in weights.items()])

    X, _ = draw_target_samples(truth, 'P0', target_n, streams.generator(seed, 0, -1, 'target'))
    spf_predictions = library.predict_matrix(X)
    vectors = np.column_stack([
        spf_predictions,
        spf_predictions @ weights['ws'],
        spf_predictions @ weights['cs'],
        X @ truth.beta0,
    ])
    coordinates = pca_project(vectors)
    labels = ['spf1', 'spf2', 'spf3', 'ws', 'cs', 'oracle']
    pca = pd.DataFrame({'label': labels, 'pc1': coordinates[:, 0], 'pc2': coordinates[:, 1]})
    return {'contours': contours, 'weights': weight_table, 'pca': pca}


# Fig 3 left: specialist error over the penalty path

def _fig3left_replicate(seed, r, K, n1, n, p, sigma, sigma_beta, grid):
    sizes = [n1] + [n] * (K - 1)
    collection, truth = generate(Scenario('ex2', {'K': K, 'n': sizes, 'p': p, 'sigma': sigma, 'sigma_beta': sigma_beta}, seed, r))
    _, library, P = _study_specific(collection)
    calculator = StackingCalculator()
    config = StackConfig(task='specialist', study=0, grid=grid)
    anchor = calculator.generalist_anchor(config, collection, library, P)
    q = dr_utility(library, collection, specialist_nu(K, 0), P)
    truth_q = oracle_quadratic(library, truth, 0)
    selected, _ = calculator.select_lambda_loo(config, collection, 0, grid)
    rows = []
    for lam in grid:
        w = qp.maximize(apply_penalty(q, PenaltySpec(lam, anchor)), config.feasible).w
        rows.append({'replicate': r, 'lambda': lam, 'mse1': -truth_q.value(w), 'selected': lam == selected})
    generalist = -truth_q.value(anchor)
    for row in rows:
        row['mse1_generalist'] = generalist
    return rows


def run_fig3left(seed, replicates=1, jobs=1, K=5, n1=10, n=100, p=5, sigma=5.0, sigma_beta=1.0, grid=None):
    '''
    Tables:

    * curve: replicate, lambda, mse1, selected (the leave-one-out choice), mse1_generalist
    '''
    grid = tuple(grid) if grid is not None else (0.0,) + tuple(settings.PENALTY.LAMBDA_GRID)
    results = _parallel(jobs, _fig3left_replicate, [(seed, r, K, n1, n, p, sigma, sigma_beta, grid) for r in range(replicates)])
    return {'curve': pd.DataFrame([row for rows in results for row in rows])}


# Fig 3 right: iterative averaging of small-study specialists

FIG3RIGHT_GRID = tuple(np.logspace(-3, 3, 13))


def _fig3right_replicate(seed, r, K_small, n_small, K_large, n_large, p, sigma, sigma_beta, max_rounds, grid):
    sizes = [n_small] * K_small + [n_large] * K_large
    collection, truth = generate(Scenario(
        'ex2', {'K': K_small + K_large, 'n': sizes, 'p': p, 'sigma': sigma, 'sigma_beta': sigma_beta}, seed, r
    ))

    def mse0(round_number, weights, library):
        return -oracle_quadratic(library, truth, 'P0').value(weights)

    _, trajectory, _ = StackingCalculator().iterative_generalist_average(
        collection, (OLS(),), grid, max_rounds, 0.0, monitor=mse0
    )
    truth_average = psi_truth(np.full(truth.K, 1.0 / truth.K), truth.B, truth)
    return [
        {
            'replicate': r,
            'round': entry['round'],
            'mse0': entry['metric'],
            'change': entry['change'],
            'mse0_true_average': truth_average,
            'errors': len(entry['errors']),
        }
        for entry in trajectory
    ]


def run_fig3right(seed, replicates, jobs=1, K_small=10, n_small=15, K_large=10, n_large=100, p=10, sigma=5.0, sigma_beta=1.0, max_rounds=8, grid=FIG3RIGHT_GRID):
    '''
    Tables:

    * trajectory: replicate, round, mse0, change (max-norm move of the average), mse0_true_average, errors
    * summary: round, mse0 mean/sd/se, change mean/sd/se
    '''
    results = _parallel(jobs, _fig3right_replicate, [
        (seed, r, K_small, n_small, K_large, n_large, p, sigma, sigma_beta, max_rounds, grid) for r in range(replicates)
    ])
    trajectory = pd.DataFrame([row for rows in results for row in rows])
    return {'trajectory': trajectory, 'summary': _summarize(trajectory, ['round'], ['mse0', 'change'])}


# Fig 4 and Fig 5d: generalist accuracy of DR against cross-set stacking

FIG4_K = (2, 9)
FIG4_SIGMA_BETA = (0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0)
FIG5D_K = (3, 5, 10, 20, 50)
FIG5D_SIGMA_BETA = tuple(np.arange(0, 4.5, 0.5))


def _psi_comparison(seed, r, K, n, p, sigma, sigma_beta):
    collection, truth = generate(Scenario('ex2', {'K': K, 'n': n, 'p': p, 'sigma': sigma, 'sigma_beta': sigma_beta}, seed, r))
    lts, library, P = _study_specific(collection)
    nu = generalist_nu(K)
    W = FeasibleSet.simplex()
    w_dr = qp.maximize(dr_utility(library, collection, nu, P), W).w
    w_cs = qp.maximize(cs_utility(library, collection, lts, nu, P=P), W).w
    B_hat = _slopes(library)
    psi_dr = psi_truth(w_dr, B_hat, truth)
    psi_cs = psi_truth(w_cs, B_hat, truth)
    return {'K': K, 'sigma_beta': sigma_beta, 'replicate': r, 'psi_dr': psi_dr, 'psi_cs': psi_cs, 'gap': psi_dr - psi_cs}


def _psi_grid(seed, replicates, jobs, Ks, sigma_betas, n, p, sigma):
    items = []
    for cell, (K, sigma_beta) in enumerate((K, s) for K in Ks for s in sigma_betas):
        # cells use disjoint replicate ranges so their draws are independent
        items.extend((seed, cell * replicates + r, K, n, p, sigma, sigma_beta) for r in range(replicates))
    comparisons = pd.DataFrame(_parallel(jobs, _psi_comparison, items))
    return {'comparisons': comparisons, 'summary': _summarize(comparisons, ['K', 'sigma_beta'], ['gap'])}


def run_fig4(seed, replicates, jobs=1, Ks=FIG4_K, sigma_betas=FIG4_SIGMA_BETA, n=200, p=10, sigma=1.0):
    '''
    Tables:

    * comparisons: K, sigma_beta, replicate, psi_dr, psi_cs, gap (psi_dr - psi_cs)
    * summary: K, sigma_beta, gap mean/sd/se
    '''
    return _psi_grid(seed, replicates, jobs, Ks, sigma_betas, n, p, sigma)


def run_fig5d(seed, replicates, jobs=1, Ks=FIG5D_K, sigma_betas=FIG5D_SIGMA_BETA, n=200, p=10, sigma=1.0):
    '''
    Same tables as run_fig4 over the wider (K, sigma_beta) grid
    '''
    return _psi_grid(seed, replicates, jobs, Ks, sigma_betas, n, p, sigma)


# Fig 5a: penalized specialist against the unpenalized specialist and the generalist

FIG5A_N1 = (15, 20, 25, 30, 35, 40, 45)


def _fig5a_replicate(seed, r, n1, K, n, p, sigma, sigma_beta, grid):
    sizes = [n1] + [n] * (K - 1)
    collection, truth = generate(Scenario('ex2', {'K': K, 'n': sizes, 'p': p, 'sigma': sigma, 'sigma_beta': sigma_beta}, seed, r))
    calculator = StackingCalculator()
    generalist = calculator.fit(StackConfig(), collection)
    specialist = calculator.fit(StackConfig(task='specialist', study=0), collection)
    penalized = calculator.fit(StackConfig(task='specialist', study=0, lam='auto', grid=grid), collection)
    truth_q = oracle_quadratic(generalist.library, truth, 0)
    return {
        'n1': n1,
        'replicate': r,
        'mse_generalist': -truth_q.value(generalist.weights),
        'mse_specialist': -truth_q.value(specialist.weights),
        'mse_penalized': -truth_q.value(penalized.weights),
        'lambda': penalized.lam,
    }


def run_fig5a(seed, replicates, jobs=1, n1_grid=FIG5A_N1, K=5, n=100, p=10, sigma=5.0, sigma_beta=1.0, grid=None):
    '''
    Tables:

    * errors: n1, replicate, mse_generalist, mse_specialist, mse_penalized, lambda
    * summary: n1 and the median of each error
    '''
    grid = tuple(grid) if grid is not None else tuple(settings.PENALTY.LAMBDA_GRID)
    items = [(seed, j * replicates + r, n1, K, n, p, sigma, sigma_beta, grid) for j, n1 in enumerate(n1_grid) for r in range(replicates)]
    errors = pd.DataFrame(_parallel(jobs, _fig5a_replicate, items))
    summary = errors.groupby('n1')[['mse_generalist', 'mse_specialist', 'mse_penalized']].median().add_suffix('_median').reset_index()
    return {'errors': errors, 'summary': summary}


# Fig 5b-c and E.1: excess generalist error over the limiting oracle

FIG5BC_N = (100, 200, 400)
FIG5BC_K = (20, 30, 40, 50)
FIG5BC_SMALL_K = (5, 15, 20)
FIG5BC_SMALL_N = (20, 40, 60, 80, 100)


def _excess_psi(seed, r, K, n, p, method):
    collection, truth = generate(Scenario('hier-uniform', {'K': K, 'n': n, 'p': p}, seed, r))
    lts, library, P = _study_specific(collection)
    nu = generalist_nu(K)
    W = FeasibleSet.simplex()
    q = dr_utility(library, collection, nu, P) if method == 'dr' else cs_utility(library, collection, lts, nu, P=P)
    w_hat = qp.maximize(q, W).w
    limit = truth_quadratic(np.zeros(K), truth.B, truth)
    w_limit = qp.maximize(limit, W).w
    return {'K': K, 'n': n, 'replicate': r, 'gap': limit.value(w_limit) - limit.value(w_hat)}


def _excess_grid(seed, replicates, jobs, p, method):
    cells = [('K', n, K) for n in FIG5BC_N for K in FIG5BC_K] + [('n', n, K) for K in FIG5BC_SMALL_K for n in FIG5BC_SMALL_N]
    items = []
    for c, (_, n, K) in enumerate(cells):
        items.extend((seed, c * replicates + r, K, n, p, method) for r in range(replicates))
    gaps = pd.DataFrame(_parallel(jobs, _excess_psi, items))
    gaps.insert(0, 'sweep', np.repeat([sweep for sweep, _, _ in cells], replicates))
    summary = _summarize(gaps, ['sweep', 'K', 'n'], ['gap'])

    fits = []
    for n in FIG5BC_N:
        rows = summary[(summary['sweep'] == 'K') & (summary['n'] == n)]
        K = rows['K'].to_numpy(dtype=float)
        gap = rows['gap_mean'].to_numpy()
        for form, x in (('sqrt(log K / K)', np.sqrt(np.log(K) / K)), ('log K / K', np.log(K) / K)):
            fits.append(dict(_line_fit(x, gap, form), sweep='K', fixed=n))
    for K in FIG5BC_SMALL_K:
        rows = summary[(summary['sweep'] == 'n') & (summary['K'] == K)]
        n = rows['n'].to_numpy(dtype=float)
        fits.append(dict(_line_fit(1.0 / np.sqrt(n), rows['gap_mean'].to_numpy(), '1 / sqrt(n)'), sweep='n', fixed=K))
    return {'gaps': gaps, 'summary': summary, 'fits': pd.DataFrame(fits)}


def run_fig5bc(seed, replicates, jobs=1, p=10):
    '''
    Tables for DR stacking:

    * gaps: sweep (K or n), K, n, replicate, gap = psi(w_hat) - psi(limit oracle)
    * summary: sweep, K, n, gap mean/sd/se
    * fits: form, c0, c1, r2, sweep, fixed (the n or K held fixed)
    '''
    return _excess_grid(seed, replicates, jobs, p, 'dr')


def run_figE1(seed, replicates, jobs=1, p=10):
    '''
    Same tables as run_fig5bc for cross-set stacking
    '''
    return _excess_grid(seed, replicates, jobs, p, 'cs')


def cs_stationarity_residuals(seed, count=50, K=5, p=10):
    '''
    Residual of the limiting CS stationarity equation at the closed-form weights for random B
    '''
    residuals = []
    for r in range(count):
        B = streams.generator(seed, r, -1, 'hyper').standard_normal((p, K)) + 1.0
        w, _ = asymptotic_cs_weights(B)
        gram = B.T @ B
        D = np.diag(np.diag(gram))
        Sigma = ((K * K - 2 * K) * gram + K * D) / (K - 1) ** 2
        b = (gram - D) @ np.ones(K) / (K - 1)
        residuals.append(float(np.max(np.abs(Sigma @ w - b)) / (1.0 + np.max(np.abs(b)))))
    return np.array(residuals)


def default_learners(scenario):
    '''
    Mean-only SPFs for the covariate-free ex1 scenario, OLS otherwise
    '''
    return (MeanOnly(),) if scenario.kind == 'ex1' else (OLS(),)


def _simulate_replicate(scenario, r, configs):
    collection, truth = generate(scenario.for_replicate(r))
    calculator = StackingCalculator()
    rows = []
    errors = []
    for config in configs:
        config = replace(config, replicate=r)
        try:
            model = calculator.fit(config, collection)
        except MstackException as e:
            errors.append(f'Replicate {r + 1}, method {config.method}: {e}')
            continue
        region = 'P0' if config.task == 'generalist' else config.study
        row = {'replicate': r, 'seed': scenario.seed, 'method': config.method, 'task': config.task_label}
        row.update({f'w{j + 1}': weight for j, weight in enumerate(model.weights)})
        row['mse'] = mse_region(collection, truth, model, region, seed=scenario.seed, replicate=r)
        if scenario.kind == 'ex1':
            ybar = np.array([study.y.mean() for study in collection])
            mu1 = truth.intercepts[0] if region == 0 else None
            row['mse_closed_form'] = mse_ex1(model.weights, ybar, scenario.params['sigma'], mu1) if region in ('P0', 0) else np.nan
        row['converged'] = model.report.converged
        rows.append(row)
    return rows, errors


def simulate(scenario, methods, replicates, config=None, jobs=1):
    '''
    Fit every method on every replicate of a scenario and score the stacked predictor on
    its target (P0 for generalist fits, study k for specialist fits)

    :param scenario: Scenario with seed
    :type scenario: :class:`~mstack.simulation.Scenario`

    :param methods: Stacking methods to compare
    :type methods: list

    :param replicates: Number of replicates
    :type replicates: int

    :param config: Base fit configuration; method is replaced per entry of methods
    :type config: :class:`~mstack.calculator.StackConfig`, optional

    :return: Per-replicate rows, summary rows (method, mse mean and standard error), and error messages
    :rtype: dict
    '''
    if replicates < 1:
        raise InvalidArgument(f'--replicates: must be positive, got {replicates}')
    base = config or StackConfig(learners=default_learners(scenario), seed=scenario.seed)
    configs = [replace(base, method=method) for method in methods]
    results = _parallel(jobs, _simulate_replicate, [(scenario, r, configs) for r in range(replicates)])
    rows = [row for replicate_rows, _ in results for row in replicate_rows]
    errors = [error for _, replicate_errors in results for error in replicate_errors]
    table = pd.DataFrame(rows)
    if table.empty:
        return {'replicates': table, 'summary': pd.DataFrame(), 'errors': errors}
    columns = ['mse'] + (['mse_closed_form'] if 'mse_closed_form' in table else [])
    summary = _summarize(table, ['method', 'task'], columns)
    return {'replicates': table, 'summary': summary, 'errors': errors}


RUNNERS = {
    '2a': run_fig2a,
    '2bc': run_fig2bc,
    '2def': run_fig2def,
    '3-left': run_fig3left,
    '3-right': run_fig3right,
    '4': run_fig4,
    '5a': run_fig5a,
    '5bc': run_fig5bc,
    '5d': run_fig5d,
    'E1': run_figE1,
}


def reproduce(figure, seed, scale='desk', jobs=1, replicates=None):
    '''
    Run the named figure.  Returns (tables, replicates used).
    '''
    count = replicates if replicates is not None else replicate_count(figure, scale)
    kwargs = {}
    if figure == '2def':
        kwargs['n'] = 10000 if scale == 'full' else 2000
    logger.debug(f'Reproducing figure {figure} at {scale} scale with {count} replicates')
    return RUNNERS[figure](seed, count, jobs, **kwargs), count
