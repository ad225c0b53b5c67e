# -*- coding: utf-8 -*-

'''
Stacking calculators

Fits DR, CVws and CVcs stacked models, selects the generalist-shrinkage penalty by
leave-one-out cross-validation, and runs the iterative small-study averaging procedure.

Created on  2024-03-14

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import linalg
from django.conf import settings
from mstack import qp
from mstack.data import FeasibleSet, TargetWeights, TrainingSetList, generalist_nu, specialist_nu, study_specific_lts, validate_lts
from mstack.exceptions import (
    InvalidArgument, InsufficientStudies, StudyTooSmall, UnknownEstimator, SingularDesign, MstackException
)
from mstack.learners import OLS, Spf, train_library, prediction_matrix
from mstack.utility import (
    CS_MODES, PenaltySpec, UtilityQuadratic, WsPartition, apply_penalty, cs_self_nu_utility, cs_utility, dr_utility,
    ws_utility
)


logger = logging.getLogger('mstack')

METHODS = ('dr', 'cvws', 'cvcs')
TASKS = ('generalist', 'specialist')


@dataclass(frozen=True, eq=False)
class StackConfig():
    '''
    Everything needed to fit a stacked model.  study is the 0-based specialist target.
    lam is None (no penalty), a nonnegative number, or 'auto' for leave-one-out selection.
    replicate keys the fold stream, so simulated replicates get their own folds.
    '''
    method: str = 'dr'
    task: str = 'generalist'
    study: Optional[int] = None
    learners: Tuple = field(default_factory=lambda: (OLS(),))
    lts: object = 'study-specific'
    feasible: FeasibleSet = field(default_factory=FeasibleSet)
    folds: Optional[int] = None
    repeats: Optional[int] = None
    cs_mode: str = 'fixed-nu'
    lam: object = None
    grid: Optional[Tuple[float, ...]] = None
    anchor: Optional[np.ndarray] = None
    nu: Optional[np.ndarray] = None
    seed: int = 0
    replicate: int = 0
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    loo_fast: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise UnknownEstimator(f'--method: unknown method {self.method}, expected one of {", ".join(METHODS)}')
        if self.task not in TASKS:
            raise InvalidArgument(f'--task: unknown task {self.task}')
        if self.task == 'specialist' and self.study is None:
            raise InvalidArgument('--task: specialist needs a study, as in specialist:K')
        if self.cs_mode not in CS_MODES:
            raise InvalidArgument(f'--cs-mode: unknown mode {self.cs_mode}')
        if not self.learners:
            raise InvalidArgument('--learner: at least one learner is required')
        if self.folds is not None and self.folds < 2:
            raise InvalidArgument(f'--folds: must be at least 2, got {self.folds}')
        if self.repeats is not None and self.repeats < 1:
            raise InvalidArgument(f'--repeats: must be at least 1, got {self.repeats}')
        if self.lam is not None and self.lam != 'auto':
            lam = float(self.lam)
            if not np.isfinite(lam) or lam < 0:
                raise InvalidArgument(f'--lambda: must be auto or a nonnegative number, got {self.lam}')
            object.__setattr__(self, 'lam', lam)
        if self.grid is not None:
            grid = tuple(float(g) for g in self.grid)
            if not grid or any(g < 0 or not np.isfinite(g) for g in grid):
                raise InvalidArgument('--lambda: the grid must be nonempty and nonnegative')
            object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'learners', tuple(self.learners))

    @property
    def lambda_grid(self):
        return self.grid if self.grid is not None else settings.PENALTY.LAMBDA_GRID

    @property
    def fold_count(self):
        return self.folds if self.folds is not None else settings.CVWS.FOLDS

    @property
    def repeat_count(self):
        return self.repeats if self.repeats is not None else settings.CVWS.REPEATS

    @property
    def tolerance(self):
        return self.tol if self.tol is not None else settings.SOLVER.TOLERANCE

    @property
    def iteration_cap(self):
        return self.max_iter if self.max_iter is not None else settings.SOLVER.MAX_ITER

    @property
    def task_label(self):
        if self.task == 'specialist':
            return f'specialist:{self.study + 1}'
        return 'generalist'

    def target_weights(self, collection):
        if self.nu is not None:
            nu = TargetWeights(self.nu)
            if len(nu) != collection.K:
                raise InvalidArgument(f'Target weights have length {len(nu)} for {collection.K} studies')
            return nu
        if self.task == 'specialist':
            return specialist_nu(collection.K, self.study)
        return generalist_nu(collection.K)

    def training_sets(self, collection):
        if isinstance(self.lts, TrainingSetList):
            lts = self.lts
        else:
            lts = TrainingSetList.from_descriptor(self.lts, collection)
        validate_lts(lts, collection)
        return lts


@dataclass(frozen=True, eq=False)
class StackedModel():
    '''
    Stacking weights over a fitted SPF library
    '''
    weights: np.ndarray
    library: object
    config: StackConfig
    report: qp.SolveReport
    lam: Optional[float] = None
    study_ids: Tuple = ()
    lambda_table: Optional[pd.DataFrame] = None
    quadratic: Optional[UtilityQuadratic] = None

    @property
    def ordering(self):
        return self.library.ordering

    def predict(self, X):
        return predict_stacked(self, X)


def predict_stacked(model, X):
    '''
    Weighted combination of the SPF predictions, row by row

    :param model: The fitted model
    :type model: :class:`~mstack.calculator.StackedModel`

    :param X: Feature matrix
    :type X: numpy.ndarray

    :return: Predictions
    :rtype: numpy.ndarray
    '''
    return model.library.predict_matrix(X) @ model.weights


class PenalizedSelfNu():
    '''
    Self-nu cross-set objective minus lambda ||w - anchor||^2
    '''
    def __init__(self, objective, pen):
        self.objective = objective
        self.pen = pen

    @property
    def dimension(self):
        return self.objective.dimension

    def value(self, w):
        deviation = w - self.pen.anchor
        return self.objective.value(w) - self.pen.lam * deviation @ deviation

    def gradient(self, w):
        return self.objective.gradient(w) - 2.0 * self.pen.lam * (w - self.pen.anchor)


def _loo_error(calculator, config, collection, lts, k, i, grid, anchor):
    '''
    Squared prediction error on sample i of study k at every lambda, with the sample excluded
    from the library
    '''
    reduced = collection.without_sample(k, i)
    reduced_lts = lts.without_sample(k, i)
    library = train_library(config.learners, reduced, reduced_lts)
    return calculator.penalized_errors(config, reduced, library, reduced_lts, k, grid, anchor, collection[k].X[i], collection[k].y[i])


class StackingCalculator():
    '''
    Fits stacked models.  fit() is the entry point used by the management commands;
    the penalty and iterative-averaging procedures build on it.

    Batch loops capture errors and return them in 'errors' lists; the verbosity setting
    decides whether they are logged.
    '''
    QUIET = 0
    CHATTY = 1
    LOUD = 2

    def __init__(self, verbosity=0, jobs=1):
        self.verbosity = verbosity
        self.jobs = jobs

    def report_error(self, e):
        if self.verbosity == self.CHATTY:
            logger.error(e)
        if self.verbosity == self.LOUD:
            logger.exception(e)

    def solve(self, q, W, config):
        '''
        Maximize a quadratic, or a smooth objective exposing value/gradient
        '''
        if hasattr(q, 'Sigma'):
            return qp.maximize(q, W, config.tolerance, config.iteration_cap)
        x0 = np.full(q.dimension, 1.0 / q.dimension)
        return qp.maximize_smooth(q.value, q.gradient, W, x0, config.tolerance, min(config.iteration_cap, 5000))

    def partition(self, config, collection):
        '''
        Within-study folds drawn from the fold stream of config.replicate
        '''
        return WsPartition.random(collection, config.fold_count, config.repeat_count, config.seed, config.replicate)

    def utility(self, config, collection, library, lts, nu, P=None):
        '''
        Utility estimate named by config.method
        '''
        if config.method == 'dr':
            return dr_utility(library, collection, nu, P)
        if config.method == 'cvws':
            return ws_utility(config.learners, collection, lts, nu, self.partition(config, collection))
        if config.cs_mode == 'self-nu':
            return cs_self_nu_utility(library, collection, P)
        return cs_utility(library, collection, lts, nu, config.cs_mode, P)

    def generalist_anchor(self, config, collection, library, P=None):
        '''
        DR generalist weights of the library, the default penalty anchor
        '''
        q = dr_utility(library, collection, generalist_nu(collection.K), P)
        return qp.maximize(q, config.feasible, config.tolerance, config.iteration_cap).w

    def penalize(self, q, pen):
        if hasattr(q, 'Sigma'):
            return apply_penalty(q, pen)
        return PenalizedSelfNu(q, pen)

    def fit(self, config, collection):
        '''
        Train the SPF library on the LTS, build the utility estimate, apply the penalty and maximize

        :param config: Fit configuration
        :type config: :class:`~mstack.calculator.StackConfig`

        :param collection: The studies
        :type collection: :class:`~mstack.data.StudyCollection`

        :return: The fitted model.  Check model.report.converged.
        :rtype: :class:`~mstack.calculator.StackedModel`
        '''
        if config.task == 'specialist' and not 0 <= config.study < collection.K:
            raise InvalidArgument(f'--task: specialist study {config.study + 1} is not in 1..{collection.K}')
        lts = config.training_sets(collection)
        nu = config.target_weights(collection)
        library = train_library(config.learners, collection, lts)
        P = prediction_matrix(library, collection)
        logger.debug(f'Fitting {config.method} {config.task_label} on {collection.K} studies with {library.size} SPFs')
        q = self.utility(config, collection, library, lts, nu, P)

        lam = config.lam
        table = None
        if lam == 'auto':
            if config.task != 'specialist':
                raise InvalidArgument('--lambda: auto selection needs a specialist task')
            lam, table = self.select_lambda_loo(config, collection, config.study, config.lambda_grid)
        if lam is not None:
            anchor = config.anchor if config.anchor is not None else self.generalist_anchor(config, collection, library, P)
            q = self.penalize(q, PenaltySpec(lam, anchor))

        report = self.solve(q, config.feasible, config)
        if not report.converged:
            logger.warning(f'Solver stopped without converging, KKT residual {report.kkt_residual:.3e}')
        quadratic = q if isinstance(q, UtilityQuadratic) else None
        return StackedModel(report.w, library, config, report, lam, tuple(collection.ids), table, quadratic)

    def penalized_errors(self, config, collection, library, lts, k, grid, anchor, x, y):
        '''
        Squared error at (x, y) of the penalized specialist for study k, one entry per lambda
        '''
        P = prediction_matrix(library, collection)
        if anchor is None:
            anchor = self.generalist_anchor(config, collection, library, P)
        q = self.utility(config, collection, library, lts, specialist_nu(collection.K, k), P)
        predictions = library.predict_matrix(np.asarray(x).reshape(1, -1))[0]
        errors = np.empty(len(grid))
        for j, lam in enumerate(grid):
            report = self.solve(self.penalize(q, PenaltySpec(lam, anchor)), config.feasible, config)
            errors[j] = (y - predictions @ report.w) ** 2
        return errors

    def _fast_loo_errors(self, config, collection, lts, k, grid, anchor):
        '''
        Leave-one-out errors for a study-specific LTS of linear learners: only the SPFs of
        study k change, and their coefficients come from rank-one downdates
        '''
        study = collection[k]
        loo = [learner.loo_coefficients(study.X, study.y) for learner in config.learners]
        full = train_library(config.learners, collection, lts)
        errors = []
        for i in range(study.n):
            reduced = collection.without_sample(k, i)
            row = tuple(
                Spf(learner, coefficients[i], collection.p) for learner, coefficients in zip(config.learners, loo)
            )
            library = full.replace_set(k, row)
            errors.append(self.penalized_errors(
                config, reduced, library, study_specific_lts(reduced), k, grid, anchor, study.X[i], study.y[i]
            ))
        return errors

    def select_lambda_loo(self, config, collection, k, grid=None):
        '''
        Choose the penalty for the study-k specialist by leave-one-out cross-validation over study k.
        Ties go to the larger lambda.

        :param config: Fit configuration; its anchor, if set, stays fixed across folds
        :type config: :class:`~mstack.calculator.StackConfig`

        :param collection: The studies
        :type collection: :class:`~mstack.data.StudyCollection`

        :param k: 0-based study index
        :type k: int

        :param grid: Candidate lambdas.  Defaults to the config grid.
        :type grid: list, optional

        :return: Selected lambda and a table of mean leave-one-out errors
        :rtype: tuple
        '''
        grid = tuple(float(g) for g in (grid if grid is not None else config.lambda_grid))
        if not grid or any(g < 0 for g in grid):
            raise InvalidArgument('--lambda: the grid must be nonempty and nonnegative')
        if not 0 <= k < collection.K:
            raise InvalidArgument(f'Specialist study {k + 1} is not in 1..{collection.K}')
        n = collection.sizes[k]
        if n < 2:
            raise StudyTooSmall(f'Study {k + 1} has {n} sample(s); leave-one-out needs at least 2')
        lts = config.training_sets(collection)
        anchor = config.anchor

        errors = None
        fast = (
            config.loo_fast and config.method == 'dr' and lts.is_study_specific(collection)
            and all(hasattr(learner, 'loo_coefficients') for learner in config.learners)
        )
        if fast:
            try:
                errors = self._fast_loo_errors(config, collection, lts, k, grid, anchor)
            except (SingularDesign, linalg.LinAlgError) as e:
                logger.debug(f'Leave-one-out downdate failed for study {k + 1}, refitting: {e}')
                errors = None
        if errors is None:
            errors = Parallel(n_jobs=self.jobs)(
                delayed(_loo_error)(self, config, collection, lts, k, i, grid, anchor) for i in range(n)
            )
        errors = np.asarray(errors)
        mean = errors.mean(axis=0)
        best = np.flatnonzero(mean <= mean.min() * (1.0 + 1e-10) + 1e-15)
        lam = max(grid[j] for j in best)
        logger.debug(f'Selected lambda {lam:g} for study {k + 1}')
        table = pd.DataFrame({
            'lambda': grid,
            'loo_error': mean,
            'loo_se': errors.std(axis=0, ddof=1) / np.sqrt(n),
        })
        return lam, table

    def iterative_generalist_average(self, collection, learners, grid=None, max_rounds=None, tol=None, config=None, monitor=None):
        '''
        Borrow information across small studies: average the DR specialist weights, then
        repeatedly refit each specialist with the penalty anchored at the average

        :param collection: The studies.  K >= 2.
        :type collection: :class:`~mstack.data.StudyCollection`

        :param learners: Learners for the study-specific library
        :type learners: list

        :param grid: Candidate lambdas
        :type grid: list, optional

        :param max_rounds: Round cap.  0 returns the initial average.
        :type max_rounds: int, optional

        :param tol: Stop when the average moves less than this in the max norm
        :type tol: float, optional

        :param config: Base configuration for feasible set and solver settings
        :type config: :class:`~mstack.calculator.StackConfig`, optional

        :param monitor: Called with (round, weights, library); its return value is stored as the round's metric
        :type monitor: callable, optional

        :return: Final averaged weights, the per-round trajectory, and the library
        :rtype: tuple
        '''
        if collection.K < 2:
            raise InsufficientStudies(f'Iterative averaging needs at least 2 studies, got {collection.K}')
        max_rounds = settings.PENALTY.ITERATIVE_MAX_ROUNDS if max_rounds is None else max_rounds
        tol = settings.PENALTY.ITERATIVE_TOLERANCE if tol is None else tol
        base = config or StackConfig()
        base = replace(base, method='dr', learners=tuple(learners), lts='study-specific', lam=None, anchor=None)
        grid = tuple(grid if grid is not None else base.lambda_grid)

        lts = study_specific_lts(collection)
        library = train_library(base.learners, collection, lts)
        P = prediction_matrix(library, collection)
        quadratics = [dr_utility(library, collection, specialist_nu(collection.K, k), P) for k in range(collection.K)]
        specialists = [qp.maximize(q, base.feasible, base.tolerance, base.iteration_cap).w for q in quadratics]
        average = np.mean(specialists, axis=0)

        def record(round_number, weights, change, lambdas, errors):
            entry = {
                'round': round_number,
                'weights': weights.copy(),
                'change': change,
                'lambdas': lambdas,
                'errors': errors,
            }
            if monitor is not None:
                entry['metric'] = monitor(round_number, weights, library)
            return entry

        trajectory = [record(0, average, np.nan, [], [])]
        for round_number in range(1, max_rounds + 1):
            anchored = replace(base, anchor=average)
            lambdas = []
            errors = []
            updated = list(specialists)
            for k in range(collection.K):
                try:
                    lam, _ = self.select_lambda_loo(anchored, collection, k, grid)
                    pen = PenaltySpec(lam, average)
                    updated[k] = qp.maximize(apply_penalty(quadratics[k], pen), base.feasible, base.tolerance, base.iteration_cap).w
                    lambdas.append(lam)
                except MstackException as e:
                    errors.append(f'Study {k + 1}: {e}')
                    lambdas.append(np.nan)
                    self.report_error(e)
            specialists = updated
            new_average = np.mean(specialists, axis=0)
            change = float(np.max(np.abs(new_average - average)))
            average = new_average
            trajectory.append(record(round_number, average, change, lambdas, errors))
            logger.debug(f'Iterative averaging round {round_number}: change {change:.3e}')
            if change < tol:
                break
        return average, trajectory, library


def fit(config, collection, verbosity=0, jobs=1):
    return StackingCalculator(verbosity, jobs).fit(config, collection)


def select_lambda_loo(config, collection, k, grid=None, jobs=1):
    return StackingCalculator(jobs=jobs).select_lambda_loo(config, collection, k, grid)


def iterative_generalist_average(collection, learners, grid=None, max_rounds=None, tol=None, config=None, monitor=None, jobs=1):
    return StackingCalculator(jobs=jobs).iterative_generalist_average(collection, learners, grid, max_rounds, tol, config, monitor)
