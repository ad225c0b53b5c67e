# -*- coding: utf-8 -*-

'''
Maximization of quadratic utilities -(w'Sw - 2b'w + c) over the simplex, a box,
or without constraints.

Simplex and box problems are solved by accelerated projected gradient with
backtracking and function-value restarts.  Once the iterates settle on an
active set the equality-constrained problem on that set is solved directly and
accepted if it satisfies the KKT conditions.  Indefinite matrices (cross-set
estimators) are started from every vertex and the uniform point.

Created on  2024-03-12

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import logging
from dataclasses import dataclass
import numpy as np
from scipy import linalg
from mstack.exceptions import DimensionTooLarge, NonFiniteObjective


logger = logging.getLogger('mstack')

DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ITER = 50000
POWER_ITERATIONS = 30
CHECK_EVERY = 20
MAX_GRID_DIMENSION = 4


@dataclass(frozen=True, eq=False)
class SolveReport():
    '''
    Result of a maximization
    '''
    w: np.ndarray
    objective: float
    iterations: int
    converged: bool
    kkt_residual: float


def project_simplex(v):
    '''
    Euclidean projection onto the probability simplex (sort based)
    '''
    v = np.asarray(v, dtype=float).ravel()
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(len(v)) + 1
    rho = np.count_nonzero(u - cssv / ind > 0)
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0)


def project(v, W):
    '''
    Projection onto the feasible set W
    '''
    if W.kind == 'simplex':
        return project_simplex(v)
    if W.kind == 'box':
        return np.clip(v, W.lower, W.upper)
    return np.asarray(v, dtype=float)


def evaluate(q, w):
    '''
    Utility value -(w'Sw - 2b'w + c)
    '''
    w = np.asarray(w, dtype=float)
    return -(w @ q.Sigma @ w - 2.0 * q.b @ w + q.c)


def lipschitz(Sigma, iterations=POWER_ITERATIONS):
    '''
    Largest absolute eigenvalue of Sigma by power iteration
    '''
    d = Sigma.shape[0]
    x = np.linspace(1.0, 2.0, d)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iterations):
        y = Sigma @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            break
        estimate = norm
        x = y / norm
    return estimate


def kkt_residual(q, W, w):
    '''
    Natural residual ||w - P_W(w - (Sw - b))||_inf plus feasibility violation.
    Zero exactly at stationary points.
    '''
    w = np.asarray(w, dtype=float)
    g = q.Sigma @ w - q.b
    if W.kind == 'free':
        return float(np.max(np.abs(g))) if len(g) else 0.0
    residual = float(np.max(np.abs(w - project(w - g, W))))
    if W.kind == 'simplex':
        residual = max(residual, abs(w.sum() - 1.0), float(np.max(np.maximum(-w, 0))))
    else:
        residual = max(residual, float(np.max(np.maximum(W.lower - w, 0))), float(np.max(np.maximum(w - W.upper, 0))))
    return residual


def _polish(q, W, w):
    '''
    Solve the equality-constrained problem on the active set of w.  Returns None if the
    solution leaves the feasible set.
    '''
    Sigma, b = q.Sigma, q.b
    d = len(b)
    if W.kind == 'simplex':
        support = np.flatnonzero(w > 0)
        m = len(support)
        A = np.zeros((m + 1, m + 1))
        A[:m, :m] = Sigma[np.ix_(support, support)]
        A[:m, m] = -1.0
        A[m, :m] = 1.0
        rhs = np.concatenate([b[support], [1.0]])
        solution = linalg.lstsq(A, rhs)[0]
        candidate = np.zeros(d)
        candidate[support] = solution[:m]
        if np.any(candidate < 0):
            return None
        return candidate / candidate.sum()
    lower = np.broadcast_to(np.asarray(W.lower, dtype=float), (d,))
    upper = np.broadcast_to(np.asarray(W.upper, dtype=float), (d,))
    free = np.flatnonzero((w > lower) & (w < upper))
    if len(free) == 0:
        return None
    candidate = w.copy()
    bound = np.setdiff1d(np.arange(d), free)
    rhs = b[free] - Sigma[np.ix_(free, bound)] @ candidate[bound]
    candidate[free] = linalg.lstsq(Sigma[np.ix_(free, free)], rhs)[0]
    if np.any(candidate < lower) or np.any(candidate > upper):
        return None
    return candidate


def _accelerated(q, W, x0, tol, max_iter):
    '''
    Accelerated projected gradient on f(w) = w'Sw - 2b'w.  Returns (w, iterations, converged).
    '''
    Sigma, b = q.Sigma, q.b

    def f(w):
        return w @ Sigma @ w - 2.0 * b @ w

    L = max(2.0 * lipschitz(Sigma), 1e-12)
    x = project(x0, W)
    if kkt_residual(q, W, x) <= tol:
        return x, 0, True
    fx = f(x)
    y = x.copy()
    t = 1.0
    for iteration in range(1, max_iter + 1):
        gradient = 2.0 * (Sigma @ y - b)
        fy = f(y)
        while True:
            z = project(y - gradient / L, W)
            step = z - y
            if f(z) <= fy + gradient @ step + 0.5 * L * step @ step + 1e-15 * abs(fy):
                break
            L *= 2.0
        fz = f(z)
        if fz > fx:
            # restart momentum from the last accepted point
            y = x.copy()
            t = 1.0
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = z + ((t - 1.0) / t_next) * (z - x)
        x, fx, t = z, fz, t_next
        if iteration % CHECK_EVERY == 0 or not np.any(step):
            if kkt_residual(q, W, x) <= tol:
                return x, iteration, True
            polished = _polish(q, W, x)
            if polished is not None and kkt_residual(q, W, polished) <= tol and f(polished) <= fx + 1e-12 * (1.0 + abs(fx)):
                return polished, iteration, True
    return x, max_iter, kkt_residual(q, W, x) <= tol


def _starts(q, W):
    d = len(q.b)
    if W.kind == 'simplex':
        starts = [np.full(d, 1.0 / d)]
        if d > 1 and linalg.eigvalsh(q.Sigma)[0] < -1e-12 * max(1.0, np.abs(q.Sigma).max()):
            starts.extend(np.eye(d))
        return starts
    lower = np.broadcast_to(np.asarray(W.lower, dtype=float), (d,))
    upper = np.broadcast_to(np.asarray(W.upper, dtype=float), (d,))
    return [0.5 * (lower + upper)]


def maximize(q, W, tol=DEFAULT_TOLERANCE, max_iter=DEFAULT_MAX_ITER):
    '''
    Maximize the quadratic utility over W

    :param q: Quadratic with Sigma, b and c
    :type q: :class:`~mstack.utility.UtilityQuadratic`

    :param W: Feasible set
    :type W: :class:`~mstack.data.FeasibleSet`

    :param tol: KKT residual tolerance
    :type tol: float, optional

    :param max_iter: Iteration cap for each start
    :type max_iter: int, optional

    :return: Solution report.  converged is False if the cap was hit.
    :rtype: :class:`~mstack.qp.SolveReport`
    '''
    Sigma = np.asarray(q.Sigma, dtype=float)
    b = np.asarray(q.b, dtype=float)
    if not (np.all(np.isfinite(Sigma)) and np.all(np.isfinite(b)) and np.isfinite(q.c)):
        raise NonFiniteObjective('Utility quadratic has non-finite entries')
    if W.kind == 'free':
        w = linalg.lstsq(Sigma, b)[0] if len(b) else np.zeros(0)
        residual = kkt_residual(q, W, w)
        converged = residual < max(tol, 1e-8) * (1.0 + np.abs(b).max(initial=0.0))
        return SolveReport(w, float(evaluate(q, w)), 1, bool(converged), residual)

    best = None
    total = 0
    for x0 in _starts(q, W):
        w, iterations, converged = _accelerated(q, W, x0, tol, max_iter)
        total += iterations
        value = float(evaluate(q, w))
        if not np.isfinite(value):
            raise NonFiniteObjective(f'Objective is not finite at {w}')
        if best is None or value > best[1] + 1e-12 * (1.0 + abs(best[1])):
            best = (w, value, converged)
    w, value, converged = best
    residual = kkt_residual(q, W, w)
    if not converged:
        logger.debug(f'maximize stopped after {total} iterations with KKT residual {residual:.3e}')
    return SolveReport(w, value, total, bool(converged), residual)


def maximize_smooth(value, gradient, W, x0, tol=DEFAULT_TOLERANCE, max_iter=5000):
    '''
    Projected gradient ascent with Armijo backtracking for smooth non-quadratic utilities.
    Convergence is declared when the natural residual drops below tol.
    '''
    x = project(np.asarray(x0, dtype=float), W)
    fx = value(x)
    step = 1.0
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        g = gradient(x)
        residual = float(np.max(np.abs(x - project(x + g, W))))
        if residual <= tol:
            return SolveReport(x, float(fx), iteration - 1, True, residual)
        while True:
            z = project(x + step * g, W)
            fz = value(z)
            if fz >= fx + g @ (z - x) - 0.5 / step * (z - x) @ (z - x) or step < 1e-20:
                break
            step *= 0.5
        if not np.isfinite(fz):
            raise NonFiniteObjective(f'Objective is not finite at {z}')
        x, fx = z, fz
        step *= 2.0
    return SolveReport(x, float(fx), max_iter, False, residual)


def simplex_lattice(d, resolution):
    '''
    All points of the simplex with coordinates in multiples of 1/resolution
    '''
    if d == 1:
        return np.array([[1.0]])
    axes = np.meshgrid(*([np.arange(resolution + 1)] * (d - 1)), indexing='ij')
    counts = np.column_stack([a.ravel() for a in axes])
    counts = counts[counts.sum(axis=1) <= resolution]
    counts = np.column_stack([counts, resolution - counts.sum(axis=1)])
    return counts / resolution


def grid_oracle(q, resolution):
    '''
    Best point of the simplex lattice.  Test oracle for small dimensions.
    '''
    d = len(q.b)
    if d > MAX_GRID_DIMENSION:
        raise DimensionTooLarge(f'grid_oracle supports at most {MAX_GRID_DIMENSION} weights, got {d}')
    points = simplex_lattice(d, resolution)
    values = -(np.einsum('ij,jk,ik->i', points, q.Sigma, points) - 2.0 * points @ q.b + q.c)
    best = int(np.argmax(values))
    return points[best], float(values[best])
