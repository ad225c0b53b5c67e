# -*- coding: utf-8 -*-

'''
Studies, training-set lists, target weights and feasible sets.

Indices are 0-based throughout the Python API.  Messages and command line
arguments use 1-based study and set numbers.

Created on  2024-03-11

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np
import pandas as pd
from mstack.exceptions import (
    InvalidArgument, IndexOutOfRange, EmptySet, DuplicatePair, ShapeMismatch, DataFileError
)


logger = logging.getLogger('mstack')

NU_TOLERANCE = 1e-12


def _frozen(array):
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Study():
    '''
    A single study: response vector y (length n) and feature matrix X (n x p).
    p may be 0.
    '''
    id: str
    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(len(y), -1) if X.size else np.zeros((len(y), 0))
        if len(y) < 1:
            raise ShapeMismatch(f'Study {self.id} has no samples')
        if X.ndim != 2 or X.shape[0] != len(y):
            raise ShapeMismatch(f'Study {self.id}: X has shape {X.shape} but y has {len(y)} values')
        if not np.all(np.isfinite(y)):
            raise DataFileError(f'Study {self.id}: y contains non-finite values')
        if not np.all(np.isfinite(X)):
            raise DataFileError(f'Study {self.id}: X contains non-finite values')
        object.__setattr__(self, 'y', _frozen(y))
        object.__setattr__(self, 'X', _frozen(X))

    @property
    def n(self):
        return len(self.y)

    @property
    def p(self):
        return self.X.shape[1]

    def without_sample(self, i):
        '''
        Copy of the study with sample i removed
        '''
        keep = np.arange(self.n) != i
        return Study(self.id, self.y[keep], self.X[keep])


@dataclass(frozen=True, eq=False)
class StudyCollection():
    '''
    Ordered collection of K studies sharing the feature width p.
    '''
    studies: Tuple[Study, ...]

    def __post_init__(self):
        studies = tuple(self.studies)
        if not studies:
            raise InvalidArgument('A study collection needs at least one study')
        widths = {s.p for s in studies}
        if len(widths) != 1:
            raise ShapeMismatch(f'Studies have different feature widths {sorted(widths)}')
        ids = [s.id for s in studies]
        if len(set(ids)) != len(ids):
            raise DataFileError(f'Study ids are not unique: {ids}')
        object.__setattr__(self, 'studies', studies)

    def __len__(self):
        return len(self.studies)

    def __getitem__(self, k):
        return self.studies[k]

    def __iter__(self):
        return iter(self.studies)

    @property
    def K(self):
        return len(self.studies)

    @property
    def p(self):
        return self.studies[0].p

    @property
    def sizes(self):
        return np.array([s.n for s in self.studies])

    @property
    def ids(self):
        return [s.id for s in self.studies]

    @property
    def offsets(self):
        '''
        Row offset of each study in the stacked arrays, with the total appended
        '''
        return np.concatenate([[0], np.cumsum(self.sizes)])

    def stacked_X(self):
        return np.vstack([s.X for s in self.studies])

    def stacked_y(self):
        return np.concatenate([s.y for s in self.studies])

    def study_rows(self, k):
        offsets = self.offsets
        return np.arange(offsets[k], offsets[k + 1])

    def study_index(self):
        '''
        Study index of every stacked row
        '''
        return np.repeat(np.arange(self.K), self.sizes)

    def without_sample(self, k, i):
        '''
        Copy of the collection with sample i of study k removed
        '''
        studies = list(self.studies)
        studies[k] = studies[k].without_sample(i)
        return StudyCollection(tuple(studies))

    @classmethod
    def from_arrays(cls, ys, Xs=None, ids=None):
        '''
        Build a collection from per-study y vectors and feature matrices
        '''
        if Xs is None:
            Xs = [np.zeros((len(y), 0)) for y in ys]
        if ids is None:
            ids = [str(k + 1) for k in range(len(ys))]
        return cls(tuple(Study(str(sid), y, X) for sid, y, X in zip(ids, ys, Xs)))

    @classmethod
    def from_frame(cls, frame):
        '''
        Build a collection from a DataFrame with columns study, y and features.
        Studies are ordered by first appearance; row order defines the sample index.
        '''
        missing = [c for c in ('study', 'y') if c not in frame.columns]
        if missing:
            raise DataFileError(f'Data is missing required column(s) {missing}')
        if frame.empty:
            raise DataFileError('Data has no rows')
        if frame.isnull().values.any():
            rows = frame.index[frame.isnull().any(axis=1)].tolist()
            raise DataFileError(f'Data has missing values in rows {rows[:10]}')
        feature_columns = [c for c in frame.columns if c not in ('study', 'y')]
        try:
            numeric = frame[['y'] + feature_columns].apply(pd.to_numeric, errors='raise')
        except (ValueError, TypeError) as e:
            raise DataFileError(f'Data has non-numeric values: {e}') from e
        study_column = frame['study'].astype(str)
        studies = []
        for study_id in pd.unique(study_column):
            rows = numeric[study_column == study_id]
            studies.append(Study(study_id, rows['y'].to_numpy(), rows[feature_columns].to_numpy(dtype=float)))
        logger.debug(f'Ingested {len(studies)} studies with {len(feature_columns)} features')
        return cls(tuple(studies))

    @classmethod
    def read_csv(cls, path):
        '''
        Read the multi-study delimited file format
        '''
        try:
            frame = pd.read_csv(path, dtype={'study': str})
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataFileError(f'Cannot read data file {path}: {e}') from e
        return cls.from_frame(frame)

    def to_frame(self, feature_names=None):
        if feature_names is None:
            feature_names = [f'x{j + 1}' for j in range(self.p)]
        frame = pd.DataFrame(self.stacked_X(), columns=feature_names)
        frame.insert(0, 'y', self.stacked_y())
        frame.insert(0, 'study', np.repeat(self.ids, self.sizes))
        return frame

    def to_csv(self, path, float_format='%.17g'):
        self.to_frame().to_csv(path, index=False, float_format=float_format)


@dataclass(frozen=True, eq=False)
class TrainingSetList():
    '''
    List of T training sets.  Each set is an (m, 2) integer array of (i, k) pairs.
    '''
    sets: Tuple[np.ndarray, ...]

    def __post_init__(self):
        sets = []
        for D in self.sets:
            D = np.asarray(D, dtype=int).reshape(-1, 2)
            D.flags.writeable = False
            sets.append(D)
        object.__setattr__(self, 'sets', tuple(sets))

    def __len__(self):
        return len(self.sets)

    @property
    def T(self):
        return len(self.sets)

    @property
    def supports(self):
        '''
        s_t: the studies appearing in each set
        '''
        return [frozenset(int(k) for k in np.unique(D[:, 1])) for D in self.sets]

    def validate(self, collection):
        '''
        Check the index structure against the collection.
        Raises InvalidArgument for an empty list, IndexOutOfRange, EmptySet or DuplicatePair.
        '''
        if not self.sets:
            raise InvalidArgument('--lts: at least one training set is required')
        sizes = collection.sizes
        for t, D in enumerate(self.sets):
            if len(D) == 0:
                raise EmptySet(t)
            i, k = D[:, 0], D[:, 1]
            bad = (k < 0) | (k >= collection.K) | (i < 0)
            bad[~bad] = i[~bad] >= sizes[k[~bad]]
            if np.any(bad):
                first = np.argmax(bad)
                raise IndexOutOfRange(t, int(i[first]), int(k[first]))
            _, first, counts = np.unique(D, axis=0, return_index=True, return_counts=True)
            if np.any(counts > 1):
                i, k = D[first[np.argmax(counts > 1)]]
                raise DuplicatePair(t, int(i), int(k))

    def rows(self, collection, t):
        '''
        Stacked row indices of set t
        '''
        D = self.sets[t]
        return collection.offsets[D[:, 1]] + D[:, 0]

    def spans_all(self, t, K):
        return len(self.supports[t]) == K

    def is_study_specific(self, collection):
        if self.T != collection.K:
            return False
        for t, D in enumerate(self.sets):
            if len(D) != collection.sizes[t] or np.any(D[:, 1] != t):
                return False
            if not np.array_equal(np.sort(D[:, 0]), np.arange(collection.sizes[t])):
                return False
        return True

    def without_sample(self, k, i):
        '''
        LTS for the collection with sample i of study k removed.  The pair is dropped
        and later samples of study k are renumbered.
        '''
        sets = []
        for D in self.sets:
            keep = ~((D[:, 1] == k) & (D[:, 0] == i))
            D = D[keep].copy()
            shift = (D[:, 1] == k) & (D[:, 0] > i)
            D[shift, 0] -= 1
            sets.append(D)
        return TrainingSetList(tuple(sets))

    @classmethod
    def study_specific(cls, collection):
        return cls(tuple(
            np.column_stack([np.arange(n), np.full(n, k)]) for k, n in enumerate(collection.sizes)
        ))

    @classmethod
    def from_studies(cls, collection, groups):
        '''
        One set per group; each group is a list of study indices whose samples are pooled
        '''
        sets = []
        for group in groups:
            pairs = [np.column_stack([np.arange(collection.sizes[k]), np.full(collection.sizes[k], k)]) for k in group]
            sets.append(np.vstack(pairs) if pairs else np.zeros((0, 2), dtype=int))
        return cls(tuple(sets))

    @classmethod
    def from_descriptor(cls, descriptor, collection):
        '''
        Build an LTS from a config descriptor: 'study-specific', 'pooled',
        'study-specific+pooled', or a list whose entries are {"studies": [ids]}, {"pairs": [[i, k], ...]}
        or a bare [[i, k], ...] list (1-based pairs).
        '''
        K = collection.K
        if descriptor in (None, '', 'study-specific'):
            return cls.study_specific(collection)
        if descriptor == 'pooled':
            return cls.from_studies(collection, [list(range(K))])
        if descriptor == 'study-specific+pooled':
            return cls.from_studies(collection, [[k] for k in range(K)] + [list(range(K))])
        if isinstance(descriptor, (list, tuple)):
            ids = collection.ids
            sets = []
            for entry in descriptor:
                if isinstance(entry, (list, tuple)):
                    sets.append(np.asarray(entry, dtype=int).reshape(-1, 2) - 1)
                elif 'studies' in entry:
                    try:
                        group = [ids.index(str(s)) for s in entry['studies']]
                    except ValueError as e:
                        raise InvalidArgument(f'--lts: unknown study in {entry["studies"]}') from e
                    sets.append(cls.from_studies(collection, [group]).sets[0])
                elif 'pairs' in entry:
                    sets.append(np.asarray(entry['pairs'], dtype=int).reshape(-1, 2) - 1)
                else:
                    raise InvalidArgument(f'--lts: entry {entry} needs "studies" or "pairs"')
            return cls(tuple(sets))
        raise InvalidArgument(f'--lts: unknown descriptor {descriptor}')


def study_specific_lts(collection):
    '''
    D_t = all samples of study t, for t = 1..K
    '''
    return TrainingSetList.study_specific(collection)


def validate_lts(lts, collection):
    lts.validate(collection)


@dataclass(frozen=True, eq=False)
class TargetWeights():
    '''
    Target weights over studies: nonnegative and summing to one
    '''
    nu: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float).reshape(-1)
        if len(nu) == 0 or np.any(~np.isfinite(nu)) or np.any(nu < 0):
            raise InvalidArgument(f'Target weights must be finite and nonnegative: {nu}')
        if abs(nu.sum() - 1.0) > NU_TOLERANCE:
            raise InvalidArgument(f'Target weights must sum to 1, got {nu.sum()!r}')
        object.__setattr__(self, 'nu', _frozen(nu))

    def __len__(self):
        return len(self.nu)


def generalist_nu(K):
    if K < 1:
        raise InvalidArgument(f'Number of studies must be positive, got {K}')
    return TargetWeights(np.full(K, 1.0 / K))


def specialist_nu(K, k):
    '''
    e_k for the 0-based study index k
    '''
    if K < 1 or k < 0 or k >= K:
        raise InvalidArgument(f'Specialist study {k + 1} is not in 1..{K}')
    nu = np.zeros(K)
    nu[k] = 1.0
    return TargetWeights(nu)


@dataclass(frozen=True, eq=False)
class FeasibleSet():
    '''
    Feasible weight set: simplex, box [lower, upper] or free
    '''
    kind: str = 'simplex'
    lower: Optional[float] = None
    upper: Optional[float] = None

    KINDS = ('simplex', 'box', 'free')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidArgument(f'--constraint: unknown feasible set {self.kind}')
        if self.kind == 'box':
            lower = np.asarray(self.lower, dtype=float)
            upper = np.asarray(self.upper, dtype=float)
            if np.any(lower > upper):
                raise InvalidArgument(f'--constraint: box lower {self.lower} exceeds upper {self.upper}')

    @classmethod
    def simplex(cls):
        return cls('simplex')

    @classmethod
    def box(cls, lower, upper):
        return cls('box', lower, upper)

    @classmethod
    def free(cls):
        return cls('free')

    @classmethod
    def parse(cls, text):
        '''
        'simplex', 'free' or 'box:L,U'
        '''
        text = (text or 'simplex').strip().lower()
        if text in ('simplex', 'free'):
            return cls(text)
        if text.startswith('box:'):
            try:
                lower, upper = (float(v) for v in text[4:].split(','))
            except ValueError as e:
                raise InvalidArgument(f'--constraint: cannot parse box bounds from {text}') from e
            return cls.box(lower, upper)
        raise InvalidArgument(f'--constraint: unknown feasible set {text}')

    def describe(self):
        if self.kind == 'box':
            return f'box:{self.lower},{self.upper}'
        return self.kind
