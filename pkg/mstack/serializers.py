# -*- coding: utf-8 -*-

'''
Serializers for mstack.

Argument serializers validate command line flags and JSON parameters and turn
them into configuration objects.  Output serializers render fitted models,
utility quadratics and run manifests as JSON-ready dicts.

Created on  2024-03-19

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import json
import logging
from rest_framework import serializers
from mstack.calculator import METHODS, StackConfig
from mstack.data import FeasibleSet
from mstack.exceptions import InvalidArgument, MstackException
from mstack.learners import parse_learner
from mstack.simulation import SCENARIO_KINDS, Scenario
from mstack.utility import CS_MODES


logger = logging.getLogger('mstack')

FLAGS = {
    'task': '--task',
    'method': '--method',
    'learners': '--learner',
    'constraint': '--constraint',
    'folds': '--folds',
    'repeats': '--repeats',
    'cs_mode': '--cs-mode',
    'lam': '--lambda',
    'lts': '--lts',
    'seed': '--seed',
    'kind': '--scenario',
    'params': '--params',
    'replicates': '--replicates',
    'methods': '--methods',
}


def _messages(detail, prefix=''):
    if isinstance(detail, dict):
        for key, value in detail.items():
            name = FLAGS.get(key, key) if not prefix else f'{prefix}.{key}'
            yield from _messages(value, name)
    elif isinstance(detail, list):
        for value in detail:
            yield from _messages(value, prefix)
    else:
        yield f'{prefix}: {detail}' if prefix else str(detail)


def validated(serializer):
    '''
    Validated data of a serializer, or InvalidArgument naming the offending flag(s)
    '''
    if not serializer.is_valid():
        raise InvalidArgument('; '.join(_messages(serializer.errors)))
    return serializer.validated_data


def _from_mstack(call, *args):
    try:
        return call(*args)
    except MstackException as e:
        raise serializers.ValidationError(str(e)) from e


class SizesField(serializers.Field):
    '''
    One positive sample size or a list of them
    '''
    def to_internal_value(self, data):
        values = data if isinstance(data, (list, tuple)) else [data]
        try:
            sizes = [int(v) for v in values]
        except (TypeError, ValueError) as e:
            raise serializers.ValidationError(f'{data} is not a size or list of sizes') from e
        if any(s < 1 or s != float(v) for s, v in zip(sizes, values)):
            raise serializers.ValidationError(f'sizes must be positive integers, got {data}')
        return sizes if isinstance(data, (list, tuple)) else sizes[0]

    def to_representation(self, value):
        return value


class VectorField(serializers.Field):
    '''
    A number, broadcast later, or a list of numbers
    '''
    def to_internal_value(self, data):
        try:
            if isinstance(data, (list, tuple)):
                return [float(v) for v in data]
            return float(data)
        except (TypeError, ValueError) as e:
            raise serializers.ValidationError(f'{data} is not a number or list of numbers') from e

    def to_representation(self, value):
        return value


class ScenarioParamsSerializer(serializers.Serializer):
    '''
    Common scenario parameters.  Unknown keys are rejected.
    '''
    K = serializers.IntegerField(min_value=1, required=False)
    n = SizesField(required=False)

    def validate(self, attrs):
        unknown = set(self.initial_data) - set(self.fields)
        if unknown:
            raise serializers.ValidationError(f'unknown parameter(s) {sorted(unknown)}')
        return attrs


class Ex1ParamsSerializer(ScenarioParamsSerializer):
    sigma = serializers.FloatField(min_value=0, required=False)


class Ex2ParamsSerializer(ScenarioParamsSerializer):
    p = serializers.IntegerField(min_value=0, required=False)
    beta0 = VectorField(required=False)
    sigma_beta = serializers.FloatField(min_value=0, required=False)
    sigma = serializers.FloatField(min_value=0, required=False)


class Ex3ParamsSerializer(ScenarioParamsSerializer):
    p = serializers.IntegerField(min_value=0, required=False)
    beta0 = VectorField(required=False)
    sigma_beta = serializers.FloatField(min_value=0, required=False)
    sigma2 = serializers.FloatField(min_value=0, required=False)
    mix = serializers.FloatField(min_value=0, max_value=1, required=False)


class HierUniformParamsSerializer(ScenarioParamsSerializer):
    p = serializers.IntegerField(min_value=1, required=False)


PARAMS_SERIALIZERS = {
    'ex1': Ex1ParamsSerializer,
    'ex2': Ex2ParamsSerializer,
    'ex3': Ex3ParamsSerializer,
    'hier-uniform': HierUniformParamsSerializer,
}


class ScenarioSerializer(serializers.Serializer):
    '''
    Scenario kind, JSON parameters and seed.  Parameters are checked against the kind and
    merged over the built-in defaults by :class:`~mstack.simulation.Scenario`.
    '''
    kind = serializers.ChoiceField(choices=SCENARIO_KINDS)
    params = serializers.DictField(required=False, default=dict)
    seed = serializers.IntegerField(min_value=0)

    def validate(self, attrs):
        params = PARAMS_SERIALIZERS[attrs['kind']](data=attrs.get('params') or {})
        if not params.is_valid():
            raise serializers.ValidationError({'params': params.errors})
        attrs['params'] = dict(params.validated_data)
        attrs['scenario'] = _from_mstack(Scenario, attrs['kind'], attrs['params'], attrs['seed'])
        return attrs


class FitArgumentsSerializer(serializers.Serializer):
    '''
    Arguments of a stacking fit, as given on the command line
    '''
    task = serializers.CharField(default='generalist')
    method = serializers.ChoiceField(choices=METHODS, default='dr')
    learners = serializers.ListField(child=serializers.CharField(), required=False, allow_empty=False, default=lambda: ['ols'])
    constraint = serializers.CharField(default='simplex')
    folds = serializers.IntegerField(min_value=2, required=False, allow_null=True, default=None)
    repeats = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    cs_mode = serializers.ChoiceField(choices=CS_MODES, default='fixed-nu')
    lam = serializers.CharField(required=False, allow_null=True, default=None)
    lts = serializers.CharField(default='study-specific')
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate_task(self, value):
        '''
        generalist or specialist:K with K 1-based; stored as (task, 0-based study)
        '''
        if value == 'generalist':
            return ('generalist', None)
        if value.startswith('specialist:'):
            try:
                study = int(value[len('specialist:'):])
            except ValueError as e:
                raise serializers.ValidationError(f'cannot parse a study number from {value}') from e
            if study < 1:
                raise serializers.ValidationError(f'study numbers start at 1, got {study}')
            return ('specialist', study - 1)
        raise serializers.ValidationError(f'expected generalist or specialist:K, got {value}')

    def validate_learners(self, value):
        return tuple(_from_mstack(parse_learner, text) for text in value)

    def validate_constraint(self, value):
        return _from_mstack(FeasibleSet.parse, value)

    def validate_lam(self, value):
        if value in (None, ''):
            return None
        if value == 'auto':
            return 'auto'
        try:
            lam = float(value)
        except ValueError as e:
            raise serializers.ValidationError(f'expected auto or a nonnegative number, got {value}') from e
        if not lam >= 0:
            raise serializers.ValidationError(f'must be nonnegative, got {value}')
        return lam

    def validate_lts(self, value):
        text = value.strip()
        if text.startswith('['):
            try:
                return json.loads(text)
            except json.JSONDecodeError as e:
                raise serializers.ValidationError(f'not valid JSON: {e}') from e
        return text

    def validate(self, attrs):
        if attrs.get('lam') == 'auto' and attrs['task'][0] != 'specialist':
            raise serializers.ValidationError({'lam': 'auto selection needs a specialist task'})
        return attrs

    def to_config(self):
        data = validated(self)
        task, study = data['task']
        return StackConfig(
            method=data['method'],
            task=task,
            study=study,
            learners=data['learners'],
            lts=data['lts'],
            feasible=data['constraint'],
            folds=data['folds'],
            repeats=data['repeats'],
            cs_mode=data['cs_mode'],
            lam=data['lam'],
            seed=data['seed'],
        )


class UtilityQuadraticSerializer(serializers.Serializer):
    '''
    {Sigma, b, c, ordering} of a utility quadratic
    '''
    Sigma = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()))
    b = serializers.ListField(child=serializers.FloatField())
    c = serializers.FloatField()
    ordering = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()), allow_null=True)


class SolveReportSerializer(serializers.Serializer):
    objective = serializers.FloatField()
    iterations = serializers.IntegerField()
    converged = serializers.BooleanField()
    kkt_residual = serializers.FloatField()


class StackedModelSerializer(serializers.Serializer):
    '''
    JSON form of a fitted model: {weights, ordering, method, task, lambda, seed, constraint,
    learners, report, study_ids}.  ordering holds 1-based (set, learner) pairs.
    '''
    weights = serializers.ListField(child=serializers.FloatField())
    ordering = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()))
    method = serializers.CharField(source='config.method')
    task = serializers.CharField(source='config.task_label')
    lam = serializers.FloatField(allow_null=True)
    seed = serializers.IntegerField(source='config.seed')
    constraint = serializers.CharField(source='config.feasible.describe')
    learners = serializers.SerializerMethodField()
    report = SolveReportSerializer()
    study_ids = serializers.ListField(child=serializers.CharField())

    def get_learners(self, obj):
        return [str(learner) for learner in obj.config.learners]

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data['lambda'] = data.pop('lam')
        return data


class RunManifestSerializer(serializers.Serializer):
    '''
    Manifest written at the start of every command and updated when it finishes
    '''
    command = serializers.CharField()
    config = serializers.DictField()
    seed = serializers.IntegerField(allow_null=True)
    version = serializers.CharField()
    outputs = serializers.ListField(child=serializers.CharField())
    scale = serializers.CharField(allow_null=True, required=False)
    replicates = serializers.IntegerField(allow_null=True, required=False)
    status = serializers.ChoiceField(choices=('running', 'complete', 'failed'))
    started = serializers.CharField()
    wall_time = serializers.FloatField(allow_null=True)
    error = serializers.CharField(allow_null=True, required=False)
