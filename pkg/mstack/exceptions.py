# -*- coding: utf-8 -*-

'''
Exceptions raised by mstack.

Every exception carries the exit code used by the management commands so that
a CommandError can be raised with the proper returncode.

Created on  2024-03-11

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''


class MstackException(Exception):
    '''
    Base class for mstack errors
    '''
    exit_code = 1


class ConfigException(MstackException):
    '''
    Invalid configuration or arguments
    '''
    exit_code = 2


class DataException(MstackException):
    '''
    Problems with input data or index structures
    '''
    exit_code = 3


class SolverException(MstackException):
    '''
    Optimizer failures
    '''
    exit_code = 1


class InvalidArgument(ConfigException):
    pass


class UnknownEstimator(ConfigException):
    pass


class InsufficientStudies(ConfigException):
    pass


class StudyTooSmall(ConfigException):
    pass


class DimensionTooLarge(ConfigException):
    pass


class Undefined(ConfigException):
    '''
    Closed form does not exist for the requested parameters
    '''


class FoldTooSmall(ConfigException):
    pass


class DegenerateScaling(ConfigException):
    '''
    The cross-set rescaling 1 - sum(nu over s_t) vanishes for a set spanning every study
    '''
    def __init__(self, t, scaling):
        self.t = t
        self.scaling = scaling
        super().__init__(f'DegenerateScaling: training set {t + 1} spans all studies and has scaling {scaling}')


class IndexOutOfRange(DataException):
    def __init__(self, t, i, k):
        self.t, self.i, self.k = t, i, k
        super().__init__(f'IndexOutOfRange: training set {t + 1} refers to sample {i + 1} of study {k + 1}')


class EmptySet(DataException):
    def __init__(self, t):
        self.t = t
        super().__init__(f'EmptySet: training set {t + 1} is empty')


class DuplicatePair(DataException):
    def __init__(self, t, i, k):
        self.t, self.i, self.k = t, i, k
        super().__init__(f'DuplicatePair: training set {t + 1} lists sample {i + 1} of study {k + 1} more than once')


class ShapeMismatch(DataException):
    pass


class DataFileError(DataException):
    pass


class SingularDesign(DataException):
    pass


class DegenerateRank(DataException):
    pass


class NotConverged(SolverException):
    '''
    Raised when a caller insists on convergence.  The partial report is attached.
    '''
    def __init__(self, report, message=None):
        self.report = report
        super().__init__(message or f'NotConverged after {report.iterations} iterations, KKT residual {report.kkt_residual:.3e}')


class NonFiniteObjective(SolverException):
    pass


class SingularSystem(SolverException):
    pass
