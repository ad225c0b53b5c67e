# -*- coding: utf-8 -*-

'''
Test data

Created on  2024-03-20

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import os
import numpy as np
from mstack import streams
from mstack.data import StudyCollection


# Two-study covariate-free data with study means 2 and -1
EX1_STUDIES = [
    [1.0, 2.0, 3.0],
    [-2.0, -1.0, 0.0, -1.5, -0.5],
]
EX1_MEANS = (2.0, -1.0)

# Small three-study linear data set in the CSV layout (study, y, x1, x2)
CSV_ROWS = [
    ('a', 1.2, 0.5, -0.3),
    ('a', 0.4, -0.2, 0.9),
    ('a', 2.1, 1.1, 0.2),
    ('a', -0.7, -0.8, -0.4),
    ('a', 1.5, 0.6, 0.6),
    ('b', 0.3, 0.1, -1.0),
    ('b', 1.9, 0.9, 0.7),
    ('b', -1.1, -1.2, 0.3),
    ('b', 0.8, 0.4, 0.1),
    ('b', 2.4, 1.3, 0.8),
    ('c', -0.2, -0.1, -0.6),
    ('c', 1.0, 0.7, -0.2),
    ('c', 0.6, 0.2, 0.5),
    ('c', -1.4, -0.9, -0.8),
    ('c', 1.7, 1.0, 0.4),
]


def ex1_collection(studies=None):
    '''
    Covariate-free collection (p = 0)
    '''
    return StudyCollection.from_arrays([np.array(y) for y in (studies or EX1_STUDIES)])


def linear_collection(seed=1, K=3, n=30, p=2, sigma=0.5, spread=0.5):
    '''
    Studies y = x'beta_k + noise with beta_k scattered around the ones vector
    '''
    rng = streams.generator(seed, 0, -1, 'hyper')
    sizes = np.broadcast_to(n, (K,))
    ys, Xs = [], []
    for k in range(K):
        beta = 1.0 + spread * rng.standard_normal(p)
        X = rng.standard_normal((sizes[k], p))
        ys.append(X @ beta + sigma * rng.standard_normal(sizes[k]))
        Xs.append(X)
    return StudyCollection.from_arrays(ys, Xs)


def identical_collection(K=3, n=12, p=2):
    '''
    K copies of one noiseless study
    '''
    rng = streams.generator(7, 0, -1, 'hyper')
    X = rng.standard_normal((n, p))
    y = X @ np.arange(1.0, p + 1.0)
    return StudyCollection.from_arrays([y] * K, [X] * K)


def write_csv(directory, rows=None, name='studies.csv'):
    '''
    Write rows in the multi-study CSV layout and return the path
    '''
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        f.write('study,y,x1,x2\n')
        for row in rows or CSV_ROWS:
            f.write(','.join(str(v) for v in row) + '\n')
    return path


def write_ex1_csv(directory, studies=None, name='ex1.csv'):
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        f.write('study,y\n')
        for k, ys in enumerate(studies or EX1_STUDIES):
            for y in ys:
                f.write(f'{k + 1},{y}\n')
    return path


def random_quadratic(rng, d, definite=True):
    '''
    Random quadratic (Sigma, b, c); indefinite when definite is False
    '''
    A = rng.standard_normal((d, d))
    Sigma = A @ A.T if definite else 0.5 * (A + A.T)
    return Sigma, rng.standard_normal(d), float(rng.uniform(0, 2))
