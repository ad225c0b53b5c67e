# -*- coding: utf-8 -*-

'''
utility functions

Created on  2024-03-11

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import os
import json
from importlib import import_module
from django.conf import settings
from mstack.exceptions import InvalidArgument


def load_learner_class(dotted_path, base=None):
    '''
    Class named by a dotted path such as mypackage.learners.Forest, for --learner plug-ins.
    With base given, the class must subclass it.  Every failure is an InvalidArgument naming
    --learner.
    '''
    module_path, _, class_name = dotted_path.rpartition('.')
    if not module_path or not class_name:
        raise InvalidArgument(f'--learner: {dotted_path} is not a dotted class path')
    try:
        module = import_module(module_path)
    except ImportError as e:
        raise InvalidArgument(f'--learner: cannot import {module_path}: {e}') from e
    cls = getattr(module, class_name, None)
    if not isinstance(cls, type):
        raise InvalidArgument(f'--learner: {module_path} has no class {class_name}')
    if base is not None and not issubclass(cls, base):
        raise InvalidArgument(f'--learner: {dotted_path} is not a {base.__name__}')
    return cls


def resolve_seed(seed=None):
    '''
    Return the integer seed to use.  Falls back to MSTACK_SEED from the environment
    (via settings).  Raises InvalidArgument if neither is set.
    '''
    if seed is None or seed == '':
        seed = settings.MSTACK_SEED
    if seed is None or seed == '':
        raise InvalidArgument('--seed: no seed given and MSTACK_SEED is not set')
    try:
        seed = int(seed)
    except (TypeError, ValueError) as e:
        raise InvalidArgument(f'--seed: {seed} is not an integer') from e
    if seed < 0:
        raise InvalidArgument(f'--seed: {seed} must be non-negative')
    return seed


def load_json_argument(value):
    '''
    Parse a JSON argument that may be either literal JSON or a path to a JSON file
    '''
    if value is None or value == '':
        return {}
    if os.path.exists(value):
        with open(value, 'r') as f:
            return json.load(f)
    try:
        return json.loads(value)
    except json.JSONDecodeError as e:
        raise InvalidArgument(f'--params: not valid JSON and not a file: {e}') from e
