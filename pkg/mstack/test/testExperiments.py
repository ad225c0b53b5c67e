# -*- coding: utf-8 -*-

'''
Test simulation batches and figure runners at small sizes

Created on  2024-03-22

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import numpy as np
from django.test import SimpleTestCase
from mstack import experiments
from mstack.calculator import StackConfig, fit
from mstack.exceptions import InvalidArgument
from mstack.simulation import Scenario, generate


class TestReplicateCount(SimpleTestCase):
    '''
    Desk and full replicate counts
    '''
    def testCounts(self):
        self.assertTrue(experiments.replicate_count('4', 'full') == 1000, 'Incorrect full count for figure 4')
        self.assertTrue(experiments.replicate_count('4', 'desk') == 200, 'Incorrect desk count for figure 4')
        self.assertTrue(experiments.replicate_count('2a', 'desk') == 40, 'Figure 2a should not be reduced')
        self.assertTrue(experiments.replicate_count('3-left', 'desk') == 1, 'Figure 3-left should not be reduced')

    def testUnknown(self):
        with self.assertRaises(InvalidArgument):
            experiments.replicate_count('6')
        with self.assertRaises(InvalidArgument):
            experiments.replicate_count('4', 'laptop')


class TestSimulate(SimpleTestCase):
    '''
    Batches of fits on simulated replicates
    '''
    def testExampleOneClosedForm(self):
        '''
        The oracle error of mean-only stacks equals (w.ybar)^2 + 1 + sigma^2
        '''
        result = experiments.simulate(Scenario('ex1', {'n': 10}, seed=3), ['dr', 'cvcs'], 3)
        table = result['replicates']
        self.assertTrue(len(table) == 6, f'Incorrect number of rows {len(table)}')
        self.assertTrue(np.allclose(table['mse'], table['mse_closed_form']), 'Oracle error disagrees with the closed form')
        self.assertTrue(set(table['method']) == {'dr', 'cvcs'}, f'Incorrect methods {set(table["method"])}')
        summary = result['summary']
        self.assertTrue(len(summary) == 2 and 'mse_se' in summary.columns, f'Incorrect summary {summary.columns}')
        self.assertTrue(not result['errors'], f'Unexpected errors {result["errors"]}')

    def testPoolSizeDoesNotMatter(self):
        scenario = Scenario('ex2', {'K': 3, 'n': 20, 'p': 2}, seed=4)
        serial = experiments.simulate(scenario, ['dr'], 3, jobs=1)['replicates']
        pooled = experiments.simulate(scenario, ['dr'], 3, jobs=2)['replicates']
        self.assertTrue(serial.equals(pooled), 'Results depend on the worker pool size')

    def testWithinStudyFoldsFollowReplicate(self):
        '''
        The CVws row for replicate 2 matches a direct fit that draws the folds of replicate 2
        '''
        scenario = Scenario('ex2', {'K': 3, 'n': 20, 'p': 2}, seed=7)
        table = experiments.simulate(scenario, ['cvws'], 2)['replicates']
        collection, _ = generate(scenario.for_replicate(1))
        config = StackConfig(method='cvws', learners=experiments.default_learners(scenario), seed=scenario.seed, replicate=1)
        weights = fit(config, collection).weights
        row = table[table['replicate'] == 1].iloc[0]
        simulated = np.array([row[f'w{j + 1}'] for j in range(len(weights))])
        self.assertTrue(np.array_equal(simulated, weights), f'Simulated weights {simulated} differ from the direct fit {weights}')

    def testErrorsCollected(self):
        '''
        Failing fits are reported per replicate without stopping the batch
        '''
        result = experiments.simulate(Scenario('ex2', {'K': 2, 'n': 3, 'p': 4}, seed=5), ['dr'], 2)
        self.assertTrue(len(result['errors']) == 2, f'Incorrect errors {result["errors"]}')
        self.assertTrue(result['errors'][0].startswith('Replicate 1'), f'Incorrect message {result["errors"][0]}')

    def testNoReplicates(self):
        with self.assertRaises(InvalidArgument):
            experiments.simulate(Scenario('ex2'), ['dr'], 0)


class TestRunners(SimpleTestCase):
    '''
    Figure runners on reduced grids
    '''
    def testFig2a(self):
        tables = experiments.run_fig2a(1, 2, n_grid=(50, 100, 200), K=3, p=2, n_weights=10)
        self.assertTrue(set(tables) == {'gaps', 'summary', 'slopes'}, f'Incorrect tables {set(tables)}')
        self.assertTrue(len(tables['gaps']) == 6 and len(tables['summary']) == 3, 'Incorrect table sizes')
        self.assertTrue((tables['gaps']['dr_ws_gap'] >= 0).all(), 'Negative gap')
        self.assertTrue(len(tables['slopes']) == 4, 'Missing slopes')

    def testFig2bc(self):
        tables = experiments.run_fig2bc(2, 2, K=4, n=20, p=2, w1_grid=(0.0, 0.5))
        self.assertTrue(len(tables['deviations']) == 12, f'Incorrect deviations {len(tables["deviations"])}')
        summary = tables['summary']
        ws = summary[summary['estimator'] == 'ws']
        self.assertTrue(ws['closed_form'].isna().all(), 'Within-study deviations have no closed form')
        self.assertTrue(summary[summary['estimator'] != 'ws']['closed_form'].notna().all(), 'Missing closed forms')

    def testFig3Left(self):
        tables = experiments.run_fig3left(3, 1, K=3, n1=6, n=20, p=2, sigma=1.0, grid=(0.0, 1.0, 10.0))
        curve = tables['curve']
        self.assertTrue(len(curve) == 3 and curve['selected'].sum() == 1, f'Incorrect curve {curve}')
        self.assertTrue((curve['mse1'] > 0).all(), 'Errors must be positive')

    def testFig3Right(self):
        tables = experiments.run_fig3right(4, 2, K_small=2, n_small=8, K_large=2, n_large=20, p=2, sigma=1.0, max_rounds=1, grid=(0.1, 1.0))
        trajectory = tables['trajectory']
        self.assertTrue(set(trajectory['round']) <= {0, 1} and 0 in set(trajectory['round']), 'Incorrect rounds')
        self.assertTrue((trajectory['mse0'] >= 1.0 - 1e-9).all(), 'Error below the noise floor')

    def testFig4(self):
        tables = experiments.run_fig4(5, 2, Ks=(2, 3), sigma_betas=(0.0, 1.0), n=30, p=3)
        comparisons = tables['comparisons']
        self.assertTrue(len(comparisons) == 8 and len(tables['summary']) == 4, 'Incorrect table sizes')
        self.assertTrue(np.allclose(comparisons['gap'], comparisons['psi_dr'] - comparisons['psi_cs']), 'Incorrect gap')
        self.assertTrue(comparisons['replicate'].is_unique, 'Cells reuse replicate draws')

    def testFig5a(self):
        tables = experiments.run_fig5a(6, 2, n1_grid=(8,), K=3, n=20, p=2, sigma=1.0, grid=(0.0, 1.0))
        errors = tables['errors']
        self.assertTrue(len(errors) == 2 and errors['lambda'].isin([0.0, 1.0]).all(), f'Incorrect errors {errors}')
        self.assertTrue(list(tables['summary'].columns) == ['n1', 'mse_generalist_median', 'mse_specialist_median', 'mse_penalized_median'], 'Incorrect summary')
