# -*- coding: utf-8 -*-

'''
Long Monte Carlo checks of the simulation designs.  Set MSTACK_SLOW_TESTS=TRUE to run them.

Created on  2024-03-23

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import unittest
import numpy as np
from django.conf import settings
from django.test import SimpleTestCase
from mstack import experiments


SEED = 20240323


@unittest.skipUnless(settings.MSTACK_SLOW_TESTS, 'MSTACK_SLOW_TESTS is not set')
class TestDeviationDesigns(SimpleTestCase):
    '''
    Utility estimator deviations on the linear-Gaussian design
    '''
    def testDeviationMeans(self):
        '''
        DR and within-study CV deviations agree, CS sits below DR, and DR matches its expectation
        '''
        summary = experiments.run_fig2bc(SEED, 50, jobs=settings.MSTACK_JOBS)['summary']
        by = {estimator: frame.set_index('w1') for estimator, frame in summary.groupby('estimator')}
        dr, ws, cs = by['dr'], by['ws'], by['cs']
        se = np.sqrt(dr['pd_se'] ** 2 + ws['pd_se'] ** 2)
        self.assertTrue(((dr['pd_mean'] - ws['pd_mean']).abs() < 5 * se).all(), 'DR and WS deviations differ')
        self.assertTrue((cs['pd_mean'] < dr['pd_mean']).all(), 'CS deviation is not below DR')
        self.assertTrue(((dr['pd_mean'] - dr['closed_form']).abs() < 3 * dr['pd_se']).all(), 'DR deviation differs from its expectation')

    def testConvergenceRates(self):
        slopes = experiments.run_fig2a(SEED, 40, jobs=settings.MSTACK_JOBS)['slopes'].set_index('quantity')['slope']
        self.assertTrue(-1.2 <= slopes['dr_ws_sup_gap'] <= -0.8, f'DR/WS slope {slopes["dr_ws_sup_gap"]}')
        self.assertTrue(-0.65 <= slopes['dr_limit_sup_gap'] <= -0.35, f'DR limit slope {slopes["dr_limit_sup_gap"]}')


@unittest.skipUnless(settings.MSTACK_SLOW_TESTS, 'MSTACK_SLOW_TESTS is not set')
class TestGeneralistDesigns(SimpleTestCase):
    '''
    Generalist accuracy of DR and cross-set stacking
    '''
    def testHeterogeneitySign(self):
        '''
        CS wins under strong heterogeneity and loses when studies are nearly alike
        '''
        summary = experiments.run_fig4(SEED, 500, jobs=settings.MSTACK_JOBS, sigma_betas=(0.25, 4.0))['summary']
        for K in (2, 9):
            rows = summary[summary['K'] == K].set_index('sigma_beta')['gap_mean']
            self.assertTrue(rows[0.25] < 0, f'K={K}: DR should win at sigma_beta 0.25, gap {rows[0.25]}')
            self.assertTrue(rows[4.0] > 0, f'K={K}: CS should win at sigma_beta 4, gap {rows[4.0]}')

    def testExcessErrorShrinks(self):
        for runner in (experiments.run_fig5bc, experiments.run_figE1):
            tables = runner(SEED, 200, jobs=settings.MSTACK_JOBS)
            summary = tables['summary']
            self.assertTrue((summary['gap_mean'] > 0).all(), f'{runner.__name__}: nonpositive excess error')
            for n, rows in summary[summary['sweep'] == 'K'].groupby('n'):
                gaps = rows.sort_values('K')['gap_mean'].to_numpy()
                self.assertTrue(gaps[-1] < gaps[0], f'{runner.__name__}: excess error does not shrink in K at n={n}')
            for K, rows in summary[summary['sweep'] == 'n'].groupby('K'):
                gaps = rows.sort_values('n')['gap_mean'].to_numpy()
                self.assertTrue(gaps[-1] < gaps[0], f'{runner.__name__}: excess error does not shrink in n at K={K}')
            fits = tables['fits']
            root = fits[fits['form'] == 'sqrt(log K / K)']
            self.assertTrue((root['r2'] >= 0.85).all(), f'{runner.__name__}: poor fits {root}')


@unittest.skipUnless(settings.MSTACK_SLOW_TESTS, 'MSTACK_SLOW_TESTS is not set')
class TestSpecialistDesigns(SimpleTestCase):
    '''
    Generalist shrinkage and iterative averaging
    '''
    def testPenalizedSpecialist(self):
        tables = experiments.run_fig5a(SEED, 50, jobs=settings.MSTACK_JOBS)
        summary = tables['summary']
        self.assertTrue((summary['mse_penalized_median'] <= summary['mse_specialist_median']).all(), 'Penalty hurts the specialist')
        self.assertTrue((summary['mse_penalized_median'] <= summary['mse_generalist_median']).all(), 'Generalist beats the penalized specialist')
        errors = tables['errors']
        share = float(np.mean(errors['mse_penalized'] <= errors['mse_specialist']))
        self.assertTrue(share >= 0.6, f'Selected lambda helps in only {share:.0%} of replicates')

    def testIterativeAverage(self):
        trajectory = experiments.run_fig3right(SEED, 50, jobs=settings.MSTACK_JOBS)['trajectory']
        start = trajectory[trajectory['round'] == 0].set_index('replicate')['mse0']
        third = trajectory[trajectory['round'] == 3].set_index('replicate')['mse0']
        share = float(np.mean(third < start[third.index]))
        self.assertTrue(share >= 0.8, f'Averaging improved only {share:.0%} of replicates by round 3')
        sixth = trajectory[trajectory['round'] == 6]['change']
        self.assertTrue(sixth.mean() < 1e-3, f'Average still moving at round 6: {sixth.mean()}')
