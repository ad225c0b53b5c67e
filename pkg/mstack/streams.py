# -*- coding: utf-8 -*-

'''
Seeded random streams.

Every draw comes from numpy's Philox counter-based generator keyed by
SeedSequence(seed, spawn_key=(replicate, study, purpose)).  Any implementation
of Philox4x64 with the same SeedSequence hashing reproduces the outputs.

Study index -1 (stored as the key 0; studies are shifted by one) is used for
draws that belong to no particular study.
'''
from numpy.random import Generator, Philox, SeedSequence


PURPOSES = {
    'hyper': 0,
    'covariates': 1,
    'noise': 2,
    'folds': 3,
    'target': 4,
    'weights': 5,
    'pattern': 6,
}


def generator(seed, replicate=0, study=-1, purpose='hyper'):
    '''
    Independent Generator for one (replicate, study, purpose) stream
    '''
    try:
        code = PURPOSES[purpose]
    except KeyError as e:
        raise ValueError(f'Unknown random stream purpose {purpose}') from e
    sequence = SeedSequence(int(seed), spawn_key=(int(replicate), int(study) + 1, code))
    return Generator(Philox(sequence))
