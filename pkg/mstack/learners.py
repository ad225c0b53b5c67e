# -*- coding: utf-8 -*-

'''
Learners and single-set prediction functions (SPFs)

A learner is any object with a ``train(X, y)`` method returning an object with
``predict(X)``.  Three linear learners ship with the package: MeanOnly, OLS and
Ridge.  Others can be plugged in by dotted class path.

No intercept is ever added; callers append a constant column if they want one.

Created on  2024-03-12

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple
import numpy as np
from scipy import linalg
from mstack.exceptions import InvalidArgument, SingularDesign, ShapeMismatch, EmptySet
from mstack.util import load_learner_class


logger = logging.getLogger('mstack')

CONDITION_LIMIT = 1e12
FALLBACK_ALPHA = 1e-8


@dataclass(frozen=True, eq=False)
class Spf():
    '''
    Fitted single-set prediction function.  For linear learners the prediction
    is intercept + X @ coefficients; MeanOnly stores its constant as the single coefficient.
    '''
    learner: object
    coefficients: np.ndarray
    p: int
    training_set: Optional[np.ndarray] = None
    fallback: bool = False

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float).reshape(-1)
        if not np.all(np.isfinite(coefficients)):
            raise SingularDesign(f'{self.learner} produced non-finite coefficients')
        coefficients.flags.writeable = False
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def is_constant(self):
        return isinstance(self.learner, MeanOnly)

    def linear_form(self):
        '''
        (intercept, slope) such that predict(X) = intercept + X @ slope
        '''
        if self.is_constant:
            return float(self.coefficients[0]), np.zeros(self.p)
        return 0.0, self.coefficients

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1) if self.p else X.reshape(-1, 0)
        if self.is_constant:
            return np.full(X.shape[0], self.coefficients[0])
        if X.shape[1] != self.p:
            raise ShapeMismatch(f'SPF expects {self.p} features, got {X.shape[1]}')
        return X @ self.coefficients


class Learner():
    '''
    Base class for the shipped learners
    '''
    name = None

    def train(self, X, y):
        raise NotImplementedError

    def __str__(self):
        return self.name

    def __eq__(self, other):
        return type(self) is type(other) and str(self) == str(other)

    def __hash__(self):
        return hash(str(self))


class MeanOnly(Learner):
    '''
    Constant predictor equal to the training mean
    '''
    name = 'mean'

    def train(self, X, y):
        y = np.asarray(y, dtype=float)
        return Spf(self, [y.mean()], np.asarray(X).shape[1])

    def loo_coefficients(self, X, y):
        y = np.asarray(y, dtype=float)
        n = len(y)
        return ((y.sum() - y) / (n - 1)).reshape(-1, 1)


class OLS(Learner):
    '''
    Least squares by column-pivoted QR.  With fallback set, a numerically singular design is
    refit as Ridge(1e-8) and the SPF is flagged.
    '''
    name = 'ols'

    def __init__(self, fallback=False):
        self.fallback = fallback

    def __str__(self):
        return 'ols+fallback' if self.fallback else 'ols'

    def train(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, p = X.shape
        if p == 0:
            return Spf(self, [], 0)
        singular = n <= p
        if not singular:
            Q, R, perm = linalg.qr(X, mode='economic', pivoting=True)
            diag = np.abs(np.diag(R))
            singular = diag[0] == 0 or diag[0] / max(diag[-1], np.finfo(float).tiny) > CONDITION_LIMIT
        if singular:
            if self.fallback:
                logger.debug(f'Singular OLS design ({n} x {p}); falling back to ridge {FALLBACK_ALPHA}')
                spf = Ridge(FALLBACK_ALPHA).train(X, y)
                return Spf(self, spf.coefficients, p, fallback=True)
            raise SingularDesign(f'OLS design with {n} samples and {p} features is numerically singular')
        beta = np.empty(p)
        beta[perm] = linalg.solve_triangular(R, Q.T @ y)
        return Spf(self, beta, p)

    def loo_coefficients(self, X, y):
        return _linear_loo(X, y, 0.0)


class Ridge(Learner):
    '''
    Minimizes ||y - X b||^2 + alpha ||b||^2 through an augmented least-squares problem
    '''
    name = 'ridge'

    def __init__(self, alpha):
        alpha = float(alpha)
        if not np.isfinite(alpha) or alpha < 0:
            raise InvalidArgument(f'--learner: ridge alpha must be nonnegative, got {alpha}')
        self.alpha = alpha

    def __str__(self):
        return f'ridge:{self.alpha!r}'

    def train(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        p = X.shape[1]
        if p == 0:
            return Spf(self, [], 0)
        A = np.vstack([X, np.sqrt(self.alpha) * np.eye(p)])
        b = np.concatenate([y, np.zeros(p)])
        beta = linalg.lstsq(A, b)[0]
        return Spf(self, beta, p)

    def loo_coefficients(self, X, y):
        return _linear_loo(X, y, self.alpha)


def _linear_loo(X, y, alpha):
    '''
    Leave-one-out coefficients by rank-one downdates of the (ridge) normal equations:
    b_(-i) = b - A^-1 x_i r_i / (1 - h_i) with A = X'X + alpha I
    '''
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if p == 0:
        return np.zeros((n, 0))
    A = X.T @ X + alpha * np.eye(p)
    cho = linalg.cho_factor(A)
    beta = linalg.cho_solve(cho, X.T @ y)
    AinvXt = linalg.cho_solve(cho, X.T)
    leverage = np.einsum('ij,ji->i', X, AinvXt)
    if np.any(1.0 - leverage < 1e-10):
        raise SingularDesign('Leave-one-out downdate hit a leverage-one sample')
    residual = y - X @ beta
    return beta[None, :] - (AinvXt * (residual / (1.0 - leverage))).T


def parse_learner(text):
    '''
    Learner from its command line form: mean, ols, ols+fallback, ridge:ALPHA, or a dotted class path
    '''
    text = (text or '').strip()
    if text == 'mean':
        return MeanOnly()
    if text == 'ols':
        return OLS()
    if text == 'ols+fallback':
        return OLS(fallback=True)
    if text.startswith('ridge:'):
        try:
            return Ridge(float(text[len('ridge:'):]))
        except ValueError as e:
            raise InvalidArgument(f'--learner: cannot parse ridge alpha from {text}') from e
    if '.' in text:
        return load_learner_class(text, Learner)()
    raise InvalidArgument(f'--learner: unknown learner {text}')


def train(learner, collection, D):
    '''
    Train a learner on the (i, k) pairs in D

    :param learner: Learner to train
    :type learner: :class:`~mstack.learners.Learner`

    :param collection: The studies
    :type collection: :class:`~mstack.data.StudyCollection`

    :param D: (m, 2) array of 0-based (sample, study) pairs
    :type D: numpy.ndarray

    :return: Fitted SPF
    :rtype: :class:`~mstack.learners.Spf`
    '''
    D = np.asarray(D, dtype=int).reshape(-1, 2)
    if len(D) == 0:
        raise EmptySet(-1)
    rows = collection.offsets[D[:, 1]] + D[:, 0]
    return train_rows(learner, collection.stacked_X(), collection.stacked_y(), rows, D)


def train_rows(learner, X, y, rows, D=None):
    spf = learner.train(X[rows], y[rows])
    if isinstance(spf, Spf) and D is not None:
        spf = replace(spf, training_set=D)
    return spf


def predict(spf, X):
    return spf.predict(X)


@dataclass(frozen=True, eq=False)
class SpfLibrary():
    '''
    T x L grid of fitted SPFs.  The flat index of (t, l) is t * L + l.
    '''
    spfs: Tuple[Tuple[object, ...], ...]

    @property
    def T(self):
        return len(self.spfs)

    @property
    def L(self):
        return len(self.spfs[0])

    @property
    def size(self):
        return self.T * self.L

    @property
    def flat(self):
        return [spf for row in self.spfs for spf in row]

    @property
    def ordering(self):
        '''
        1-based (t, l) pairs in flat order
        '''
        return [(t + 1, l + 1) for t in range(self.T) for l in range(self.L)]

    def set_of(self, j):
        return j // self.L

    def predict_matrix(self, X):
        return np.column_stack([spf.predict(X) for spf in self.flat])

    def linear_form(self):
        '''
        Intercept vector a (TL) and slope matrix G (p x TL) for a library of linear SPFs.
        Raises NotImplementedError for plug-in learners without a linear form.
        '''
        forms = []
        for spf in self.flat:
            if not hasattr(spf, 'linear_form'):
                raise NotImplementedError(f'{spf} has no linear form')
            forms.append(spf.linear_form())
        intercepts = np.array([a for a, _ in forms])
        slopes = np.column_stack([g for _, g in forms]) if forms[0][1].size else np.zeros((0, len(forms)))
        return intercepts, slopes

    def replace_set(self, t, row):
        spfs = list(self.spfs)
        spfs[t] = tuple(row)
        return SpfLibrary(tuple(spfs))


def train_library(learners, collection, lts):
    '''
    Train every learner on every set of the LTS
    '''
    X = collection.stacked_X()
    y = collection.stacked_y()
    spfs = []
    for t, D in enumerate(lts.sets):
        rows = lts.rows(collection, t)
        spfs.append(tuple(train_rows(learner, X, y, rows, D) for learner in learners))
    return SpfLibrary(tuple(spfs))


def prediction_matrix(library, collection):
    '''
    Column j holds SPF j evaluated at every sample of every study, stacked in study order
    '''
    return library.predict_matrix(collection.stacked_X())
