# -*- coding: utf-8 -*-

'''
Test oracle quantities

Created on  2024-03-21

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import numpy as np
from django.test import SimpleTestCase
from mstack import qp, streams
from mstack.calculator import StackConfig, fit
from mstack.data import FeasibleSet, StudyCollection, TrainingSetList, generalist_nu, specialist_nu
from mstack.exceptions import DegenerateRank, InsufficientStudies, Undefined, UnknownEstimator
from mstack.experiments import cs_stationarity_residuals
from mstack.learners import MeanOnly, OLS, train_library
from mstack.oracle import (
    PD_EX1_ESTIMATORS, asymptotic_cs_weights, bayes_oracle_utilities_ex1, dr_limit_quadratic, mse_ex1, mse_region,
    oracle_generalist_weights_ex1, oracle_limit_weights, oracle_quadratic, oracle_specialist_weight_ex1, pca_project,
    pd_closed_forms_ex1, pd_closed_forms_ex2, pd_samples_ex1, psi, psi_truth, ws_specialist_weight_ex1
)
from mstack.simulation import Scenario, draw_target_samples, generate
from mstack.utility import WsPartition, dr_utility, ws_utility


class TestExampleOne(SimpleTestCase):
    '''
    Two-study mean-only closed forms
    '''
    def testPrincipalDeviationMoments(self):
        '''
        Simulated deviations match the closed-form mean and variance
        '''
        replicates = 20000
        for estimator in PD_EX1_ESTIMATORS:
            for w in ([1.0, 0.0], [0.5, 0.5], [0.0, 1.0]):
                x = pd_samples_ex1(estimator, w, 1.0, 50, replicates, seed=31)
                stats = pd_closed_forms_ex1(w, 1.0, 50, estimator)
                mean_se = x.std(ddof=1) / np.sqrt(replicates)
                centered = x - x.mean()
                var_se = np.sqrt(max(np.mean(centered ** 4) - np.var(centered) ** 2, 0.0) / replicates)
                self.assertTrue(
                    abs(x.mean() - stats.mean) < 4 * mean_se + 1e-12,
                    f'{estimator} at {w}: mean {x.mean()} vs {stats.mean} (se {mean_se})'
                )
                self.assertTrue(
                    abs(x.var(ddof=1) - stats.variance) < 4 * var_se + 1e-12,
                    f'{estimator} at {w}: variance {x.var(ddof=1)} vs {stats.variance} (se {var_se})'
                )

    def testUnknownEstimator(self):
        with self.assertRaises(UnknownEstimator):
            pd_closed_forms_ex1([0.5, 0.5], 1.0, 50, 'loo')

    def testOracleWeights(self):
        w = oracle_generalist_weights_ex1(2.0, -1.0)
        self.assertTrue(np.allclose(w, [1 / 3, 2 / 3]), f'Incorrect oracle weights {w}')
        self.assertTrue(np.allclose(oracle_generalist_weights_ex1(1.0, 3.0), [1.0, 0.0]), 'Same-sign means use the smaller one')
        self.assertTrue(abs(mse_ex1(w, [2.0, -1.0], 1.0) - 2.0) < 1e-12, 'Oracle generalist error is not 1 + sigma^2')

    def testOracleSpecialistWeight(self):
        '''
        The study-1 weight reproduces mu1 when it can and clamps to [0, 1] otherwise
        '''
        self.assertTrue(abs(oracle_specialist_weight_ex1(2.0, -1.0, 1.0) - 2 / 3) < 1e-12, 'Incorrect interior weight')
        self.assertTrue(oracle_specialist_weight_ex1(2.0, -1.0, 5.0) == 1.0, 'Weight not clamped at 1')
        self.assertTrue(oracle_specialist_weight_ex1(2.0, -1.0, -3.0) == 0.0, 'Weight not clamped at 0')
        self.assertTrue(oracle_specialist_weight_ex1(1.5, 1.5, 0.0) == 0.5, 'Equal means should split evenly')

    def testBayesSpecialistWeight(self):
        '''
        The Bayesian specialist utility peaks at the posterior shrinkage weight
        '''
        sigma, n = 0.8, 20
        grid = np.linspace(0, 1, 2001)
        values = [bayes_oracle_utilities_ex1([g, 1 - g], 1.3, -0.4, sigma, n)[1][0] for g in grid]
        alpha1 = (n + 0.5 / sigma ** 2) / (n + 1 / sigma ** 2)
        self.assertTrue(abs(grid[int(np.argmax(values))] - alpha1) < 1e-3, f'Peak at {grid[int(np.argmax(values))]}, expected {alpha1}')

    def testWithinStudySpecialist(self):
        '''
        The closed-form within-study specialist weight matches the fitted CVws specialist
        '''
        rng = np.random.default_rng(8)
        ys = [rng.normal(0.7, 1.0, 10), rng.normal(-0.3, 1.0, 10)]
        collection = StudyCollection.from_arrays(ys)
        part = WsPartition(5, ((np.arange(10) % 5, np.arange(10) % 5),))
        lts = TrainingSetList.study_specific(collection)
        q = ws_utility((MeanOnly(),), collection, lts, specialist_nu(2, 0), part)
        w = qp.maximize(q, FeasibleSet.simplex()).w
        expected = ws_specialist_weight_ex1(ys[0].reshape(2, 5).mean(axis=0), ys[1].reshape(2, 5).mean(axis=0))
        self.assertTrue(abs(w[0] - expected) < 1e-7, f'Fitted {w[0]} vs closed form {expected}')


class TestLinearOracle(SimpleTestCase):
    '''
    Oracle quantities for the linear families
    '''
    def setUp(self):
        self.scenario = Scenario('ex2', {'K': 3, 'n': 60, 'p': 3, 'sigma': 1.0, 'sigma_beta': 0.7}, seed=5)
        self.collection, self.truth = generate(self.scenario)

    def testOracleQuadraticMatchesMonteCarlo(self):
        '''
        Closed-form target error agrees with fresh samples from the target distribution
        '''
        model = fit(StackConfig(), self.collection)
        closed = mse_region(self.collection, self.truth, model)
        X, y = draw_target_samples(self.truth, 'P0', 200000, streams.generator(6, 0, -1, 'target'))
        sampled = np.mean((y - model.predict(X)) ** 2)
        self.assertTrue(abs(closed - sampled) / closed < 0.02, f'Closed form {closed} vs Monte Carlo {sampled}')
        specialist = mse_region(self.collection, self.truth, model, 1)
        X1, y1 = draw_target_samples(self.truth, 1, 200000, streams.generator(6, 0, 1, 'target'))
        sampled1 = np.mean((y1 - model.predict(X1)) ** 2)
        self.assertTrue(abs(specialist - sampled1) / specialist < 0.02, f'Study 2 error {specialist} vs {sampled1}')

    def testPsi(self):
        '''
        psi_truth reduces to ||Bw - beta0||^2 + p sigma_beta^2 + sigma^2 for the Gaussian family
        '''
        library = train_library((OLS(),), self.collection, TrainingSetList.study_specific(self.collection))
        B_hat = library.linear_form()[1]
        w = np.array([0.2, 0.5, 0.3])
        expected = psi(w, B_hat, 1.0, 0.7, 1.0)
        self.assertTrue(abs(psi_truth(w, B_hat, self.truth) - expected) < 1e-10, 'psi_truth disagrees with psi')
        self.assertTrue(abs(-oracle_quadratic(library, self.truth).value(w) - expected) < 1e-10, 'Oracle quadratic disagrees with psi')

    def testDataReuseLimit(self):
        '''
        With many samples the DR quadratic approaches its limit
        '''
        collection, truth = generate(self.scenario.with_params(n=40000))
        library = train_library((OLS(),), collection, TrainingSetList.study_specific(collection))
        q = dr_utility(library, collection, generalist_nu(3))
        limit = dr_limit_quadratic(truth.B, 1.0)
        scale = np.abs(limit.Sigma).max()
        self.assertTrue(np.abs(q.Sigma - limit.Sigma).max() < 0.1 * scale, f'Sigma far from its limit {q.Sigma} {limit.Sigma}')
        self.assertTrue(np.abs(q.b - limit.b).max() < 0.1 * scale, f'b far from its limit {q.b} {limit.b}')

    def testLimitWeights(self):
        beta0 = np.ones(4)
        w = oracle_limit_weights(np.column_stack([-beta0, 3 * beta0]), beta0)
        self.assertTrue(np.allclose(w, [0.5, 0.5], atol=1e-8), f'Incorrect limit weights {w}')

    def testAsymptoticCrossSet(self):
        residuals = cs_stationarity_residuals(seed=3)
        self.assertTrue(len(residuals) == 50 and residuals.max() < 1e-8, f'Stationarity residual {residuals.max()}')
        w, dr = asymptotic_cs_weights(np.eye(3))
        self.assertTrue(np.allclose(dr, 1 / 3), 'DR limit weights are not uniform')
        self.assertTrue(np.allclose(w, 0.0), f'Orthogonal studies should get zero CS weight {w}')
        with self.assertRaises(InsufficientStudies):
            asymptotic_cs_weights(np.ones((3, 2)))

    def testExampleTwoClosedForms(self):
        with self.assertRaises(Undefined):
            pd_closed_forms_ex2(np.full(3, 1 / 3), 3, 11, 10, 1.0, 1.0, 1.0, 'dr')
        uniform = np.full(4, 0.25)
        cs = pd_closed_forms_ex2(uniform, 4, 100, 5, 1.0, 0.0, 1.0, 'cs')
        expected = 5 / 9 * 0.75 - (5 + 5 / 94) / 3 * 0.25
        self.assertTrue(abs(cs - expected) < 1e-12, f'Incorrect CS expected deviation {cs} vs {expected}')


class TestPca(SimpleTestCase):
    '''
    PCA embedding of prediction vectors
    '''
    def testCollinear(self):
        a = np.array([1.0, -2.0, 2.0])
        coordinates = pca_project(np.column_stack([a, 2 * a, 3 * a]))
        self.assertTrue(np.allclose(coordinates[:, 0], [3.0, 0.0, -3.0]), f'Incorrect first axis {coordinates[:, 0]}')
        self.assertTrue(np.allclose(coordinates[:, 1], 0.0), 'Second axis of collinear points is not zero')

    def testDistancesPreserved(self):
        rng = np.random.default_rng(3)
        V = rng.standard_normal((2, 4)) * 3
        V = np.vstack([V, np.zeros((5, 4))])
        coordinates = pca_project(V)
        original = np.linalg.norm(V[:, 0] - V[:, 2])
        embedded = np.linalg.norm(coordinates[0] - coordinates[2])
        self.assertTrue(abs(original - embedded) < 1e-10, f'Planar distances changed {original} vs {embedded}')

    def testTooFew(self):
        with self.assertRaises(DegenerateRank):
            pca_project(np.ones((4, 1)))
