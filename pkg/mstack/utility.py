# -*- coding: utf-8 -*-

'''
Squared-error utility estimators as quadratic forms in the stacking weights.

Every estimator returns a UtilityQuadratic (Sigma, b, c) whose value at w is
-(w'Sigma w - 2 b'w + c).  Columns follow the library's flat (t, l) order.

Created on  2024-03-13

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np
from mstack import streams
from mstack.learners import train_rows, prediction_matrix
from mstack.exceptions import (
    DegenerateScaling, FoldTooSmall, InsufficientStudies, InvalidArgument, SingularDesign, ShapeMismatch
)


logger = logging.getLogger('mstack')

CS_MODES = ('fixed-nu', 'self-nu', 'uniform-elim')
SCALING_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class UtilityQuadratic():
    '''
    Quadratic utility -(w'Sigma w - 2 b'w + c)
    '''
    Sigma: np.ndarray
    b: np.ndarray
    c: float
    ordering: Optional[Tuple] = None

    def __post_init__(self):
        Sigma = np.array(self.Sigma, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if Sigma.shape != (len(b), len(b)):
            raise ShapeMismatch(f'Sigma has shape {Sigma.shape} but b has length {len(b)}')
        Sigma = 0.5 * (Sigma + Sigma.T)
        Sigma.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, 'Sigma', Sigma)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'c', float(self.c))

    @property
    def dimension(self):
        return len(self.b)

    def value(self, w):
        w = np.asarray(w, dtype=float)
        return -(w @ self.Sigma @ w - 2.0 * self.b @ w + self.c)

    def scaled(self, factor):
        return UtilityQuadratic(factor * self.Sigma, factor * self.b, factor * self.c, self.ordering)

    @classmethod
    def mean(cls, quadratics):
        quadratics = list(quadratics)
        return cls(
            np.mean([q.Sigma for q in quadratics], axis=0),
            np.mean([q.b for q in quadratics], axis=0),
            float(np.mean([q.c for q in quadratics])),
            quadratics[0].ordering,
        )


@dataclass(frozen=True, eq=False)
class PenaltySpec():
    '''
    Generalist-shrinkage penalty lambda * ||w - anchor||^2
    '''
    lam: float
    anchor: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidArgument(f'--lambda: penalty must be nonnegative, got {self.lam}')
        anchor = np.array(self.anchor, dtype=float).reshape(-1)
        if not np.all(np.isfinite(anchor)):
            raise InvalidArgument('Penalty anchor must be finite')
        object.__setattr__(self, 'anchor', anchor)


@dataclass(frozen=True, eq=False)
class WsPartition():
    '''
    Within-study fold assignments.  assignments[r][k] maps sample i of study k to its fold in
    repeat r.  With holdout False every fold's SPFs are trained on the full sets.
    '''
    folds: int
    assignments: Tuple[Tuple[np.ndarray, ...], ...]
    holdout: bool = True

    @property
    def repeats(self):
        return len(self.assignments)

    def validate(self, collection):
        if self.folds < 2 or self.folds > collection.sizes.min():
            raise FoldTooSmall(f'--folds: need 2 <= M <= {collection.sizes.min()} (smallest study), got {self.folds}')
        for assignment in self.assignments:
            for k, folds in enumerate(assignment):
                if len(folds) != collection.sizes[k]:
                    raise ShapeMismatch(f'Fold assignment for study {k + 1} has {len(folds)} entries')
                if len(np.unique(folds)) != self.folds:
                    raise FoldTooSmall(f'Study {k + 1} has an empty fold')

    @classmethod
    def random(cls, collection, folds, repeats=1, seed=0, replicate=0):
        '''
        Seeded balanced assignment: fold sizes within a study differ by at most one.
        Repeat r draws from the fold stream of replicate * repeats + r.
        '''
        if folds < 2 or folds > collection.sizes.min():
            raise FoldTooSmall(f'--folds: need 2 <= M <= {collection.sizes.min()} (smallest study), got {folds}')
        if repeats < 1:
            raise InvalidArgument(f'--repeats: must be at least 1, got {repeats}')
        assignments = []
        for r in range(repeats):
            per_study = []
            for k, n in enumerate(collection.sizes):
                rng = streams.generator(seed, replicate * repeats + r, k, 'folds')
                assignment = np.empty(n, dtype=int)
                assignment[rng.permutation(n)] = np.arange(n) % folds
                per_study.append(assignment)
            assignments.append(tuple(per_study))
        return cls(folds, tuple(assignments))

    @classmethod
    def full_data(cls, collection, folds=2):
        '''
        Degenerate partition whose folds all train on the full data
        '''
        assignment = tuple(np.arange(n) % folds for n in collection.sizes)
        return cls(folds, (assignment,), holdout=False)


def _row_weights(collection, nu):
    nu = np.asarray(getattr(nu, 'nu', nu), dtype=float)
    if len(nu) != collection.K:
        raise ShapeMismatch(f'Target weights have length {len(nu)} for {collection.K} studies')
    return np.repeat(nu / collection.sizes, collection.sizes)


def quadratic_from_predictions(P, y, row_weights, ordering=None):
    '''
    Sigma = P' diag(omega) P, b = P' diag(omega) y, c = sum omega y^2
    '''
    weighted = P * row_weights[:, None]
    return UtilityQuadratic(P.T @ weighted, weighted.T @ y, float(row_weights @ (y * y)), ordering)


def dr_utility(library, collection, nu, P=None):
    '''
    Data-reuse estimate: every SPF is validated on all samples, including its own training data

    :param library: Fitted SPFs
    :type library: :class:`~mstack.learners.SpfLibrary`

    :param collection: The studies
    :type collection: :class:`~mstack.data.StudyCollection`

    :param nu: Target weights
    :type nu: :class:`~mstack.data.TargetWeights`

    :param P: Precomputed prediction matrix, optional
    :type P: numpy.ndarray

    :return: The quadratic
    :rtype: :class:`~mstack.utility.UtilityQuadratic`
    '''
    if P is None:
        P = prediction_matrix(library, collection)
    return quadratic_from_predictions(P, collection.stacked_y(), _row_weights(collection, nu), tuple(library.ordering))


def ws_predictions(learners, collection, lts, assignment, holdout=True):
    '''
    Held-out prediction matrix for one repeat: row (i, k) holds the predictions of the SPFs
    retrained without the fold of (i, k)
    '''
    X = collection.stacked_X()
    y = collection.stacked_y()
    fold_of_row = np.concatenate(assignment)
    folds = np.unique(fold_of_row)
    L = len(learners)
    P = np.empty((len(y), lts.T * L))
    for m in folds:
        validation = np.flatnonzero(fold_of_row == m)
        for t in range(lts.T):
            rows = lts.rows(collection, t)
            if holdout:
                rows = rows[fold_of_row[rows] != m]
            if len(rows) == 0:
                raise FoldTooSmall(f'Training set {t + 1} is empty once fold {m + 1} is held out')
            for l, learner in enumerate(learners):
                try:
                    spf = train_rows(learner, X, y, rows)
                except SingularDesign as e:
                    raise FoldTooSmall(f'Training set {t + 1} without fold {m + 1} cannot be fit by {learner}: {e}') from e
                P[validation, t * L + l] = spf.predict(X[validation])
    return P


def ws_utility(learners, collection, lts, nu, part):
    '''
    Within-study cross-validation estimate averaged over the repeats of the partition
    '''
    part.validate(collection)
    row_weights = _row_weights(collection, nu)
    y = collection.stacked_y()
    ordering = tuple((t + 1, l + 1) for t in range(lts.T) for l in range(len(learners)))
    quadratics = []
    for r, assignment in enumerate(part.assignments):
        logger.debug(f'CVws repeat {r + 1} of {part.repeats} with {part.folds} folds')
        P = ws_predictions(learners, collection, lts, assignment, part.holdout)
        quadratics.append(quadratic_from_predictions(P, y, row_weights, ordering))
    return UtilityQuadratic.mean(quadratics)


def cs_coefficients(collection, lts, nu, L=1):
    '''
    K x TL matrix of cross-set coefficients 1(k not in s_t) / (1 - sum of nu over s_t)
    '''
    nu = np.asarray(getattr(nu, 'nu', nu), dtype=float)
    K = collection.K
    coefficients = np.zeros((K, lts.T))
    for t, support in enumerate(lts.supports):
        scaling = 1.0 - sum(nu[k] for k in support)
        if scaling <= SCALING_TOLERANCE:
            if len(support) == K:
                raise DegenerateScaling(t, scaling)
            # every study outside s_t has nu_k = 0, so the coefficient is never used
            continue
        outside = np.array([k not in support for k in range(K)])
        coefficients[outside, t] = 1.0 / scaling
    return np.repeat(coefficients, L, axis=1)


def cs_utility(library, collection, lts, nu, mode='fixed-nu', P=None):
    '''
    Cross-set cross-validation estimate.  Each study is validated only by SPFs whose training
    set does not touch it, rescaled by 1 / (1 - nu mass of the set's studies).

    mode 'uniform-elim' replaces nu by 1/K.  The 'self-nu' mode is not quadratic;
    use cs_self_nu_utility.
    '''
    if mode not in CS_MODES:
        raise InvalidArgument(f'--cs-mode: unknown mode {mode}')
    if mode == 'self-nu':
        raise InvalidArgument('--cs-mode: self-nu is not a quadratic utility; use cs_self_nu_utility')
    if mode == 'uniform-elim':
        nu = np.full(collection.K, 1.0 / collection.K)
    if P is None:
        P = prediction_matrix(library, collection)
    coefficients = cs_coefficients(collection, lts, nu, library.L)
    effective = P * coefficients[collection.study_index()]
    return quadratic_from_predictions(effective, collection.stacked_y(), _row_weights(collection, nu), tuple(library.ordering))


class SelfNuUtility():
    '''
    Cross-set utility whose target weights are the stacking weights themselves:
    nu_k = sum over learners of w_(k, l).  Requires a study-specific LTS.
    '''
    EPSILON = 1e-12

    def __init__(self, library, collection, P=None):
        if library.T != collection.K:
            raise InvalidArgument('--cs-mode: self-nu needs a study-specific LTS')
        self.L = library.L
        self.K = collection.K
        if P is None:
            P = prediction_matrix(library, collection)
        self.blocks = [P[collection.study_rows(k)] for k in range(self.K)]
        self.ys = [collection[k].y for k in range(self.K)]
        self.sizes = collection.sizes

    @property
    def dimension(self):
        return self.K * self.L

    def _own(self, k):
        own = np.zeros(self.K * self.L, dtype=bool)
        own[k * self.L:(k + 1) * self.L] = True
        return own

    def _terms(self, w, k):
        own = self._own(k)
        v = w[own].sum()
        denominator = max(1.0 - v, self.EPSILON)
        fitted = self.blocks[k][:, ~own] @ w[~own] / denominator
        return own, v, denominator, fitted

    def value(self, w):
        w = np.asarray(w, dtype=float)
        total = 0.0
        for k in range(self.K):
            _, v, _, fitted = self._terms(w, k)
            residual = self.ys[k] - fitted
            total += v / self.sizes[k] * residual @ residual
        return -total

    def gradient(self, w):
        w = np.asarray(w, dtype=float)
        gradient = np.zeros_like(w)
        for k in range(self.K):
            own, v, denominator, fitted = self._terms(w, k)
            residual = self.ys[k] - fitted
            n = self.sizes[k]
            gradient[own] -= residual @ residual / n
            gradient[~own] += 2.0 * v / n * (self.blocks[k][:, ~own].T @ residual) / denominator
            gradient[own] += 2.0 * v / n * (residual @ fitted) / denominator
        return gradient


def cs_self_nu_utility(library, collection, P=None):
    return SelfNuUtility(library, collection, P)


def _set_columns(library, t):
    return np.arange(t * library.L, (t + 1) * library.L)


def unbiased_sigma_g(library, collection, t, t2, P=None):
    '''
    Average over the studies outside {t, t2} of the empirical inner products of the SPFs of sets
    t and t2.  Returns an L x L matrix.
    '''
    if collection.K < 3:
        raise InsufficientStudies(f'The unbiased Sigma_g estimator needs at least 3 studies, got {collection.K}')
    if P is None:
        P = prediction_matrix(library, collection)
    others = [k for k in range(collection.K) if k not in (t, t2)]
    a, b = _set_columns(library, t), _set_columns(library, t2)
    blocks = []
    for k in others:
        rows = collection.study_rows(k)
        blocks.append(P[np.ix_(rows, a)].T @ P[np.ix_(rows, b)] / len(rows))
    return np.mean(blocks, axis=0)


def unbiased_b_g(library, collection, t, P=None):
    '''
    Average over the studies other than t of the empirical covariance between the SPFs of set t and y
    '''
    if collection.K < 2:
        raise InsufficientStudies(f'The unbiased b_g estimator needs at least 2 studies, got {collection.K}')
    if P is None:
        P = prediction_matrix(library, collection)
    columns = _set_columns(library, t)
    blocks = []
    for k in range(collection.K):
        if k == t:
            continue
        rows = collection.study_rows(k)
        blocks.append(P[np.ix_(rows, columns)].T @ collection[k].y / len(rows))
    return np.mean(blocks, axis=0)


def apply_penalty(q, pen):
    '''
    Quadratic of U(w) - lambda ||w - anchor||^2
    '''
    if len(pen.anchor) != q.dimension:
        raise ShapeMismatch(f'Penalty anchor has length {len(pen.anchor)}, quadratic has {q.dimension}')
    if pen.lam == 0:
        return q
    return UtilityQuadratic(
        q.Sigma + pen.lam * np.eye(q.dimension),
        q.b + pen.lam * pen.anchor,
        q.c + pen.lam * pen.anchor @ pen.anchor,
        q.ordering,
    )


def principal_deviation(estimate, oracle, w):
    '''
    w-dependent part of estimate(w) - oracle(w): -w'(S_hat - S)w + 2w'(b_hat - b)
    '''
    w = np.asarray(w, dtype=float)
    return -w @ (estimate.Sigma - oracle.Sigma) @ w + 2.0 * w @ (estimate.b - oracle.b)
