# -*- coding: utf-8 -*-

'''
Run a simulated multi-study scenario and compare stacking methods
'''
import os
import logging
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from mstack import experiments
from mstack.calculator import METHODS
from mstack.exceptions import InvalidArgument, MstackException
from mstack.manifest import RunManifest
from mstack.serializers import FitArgumentsSerializer, ScenarioSerializer, validated
from mstack.util import load_json_argument, resolve_seed


logger = logging.getLogger('mstack')


def parse_methods(text):
    methods = [m.strip() for m in (text or 'dr,cvcs').split(',') if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise InvalidArgument(f'--methods: expected a comma-separated list from {", ".join(METHODS)}, got {text}')
    return methods


class Command(BaseCommand):
    '''
    Simulate a scenario and score each stacking method on every replicate
    '''
    help = 'Simulate a scenario (ex1, ex2, ex3, hier-uniform) and compare stacking methods. Usage:\n' + \
        './manage.py simulate --scenario ex2 --params \'{"K": 9, "sigma_beta": 0.25}\' --replicates 50 --methods dr,cvcs --seed 1 --out results'

    def add_arguments(self, parser):
        parser.add_argument(
            '--scenario',
            dest='scenario',
            required=True,
            help='ex1, ex2, ex3 or hier-uniform',
        )
        parser.add_argument(
            '--params',
            dest='params',
            help='Scenario parameters as JSON, or a path to a JSON file',
        )
        parser.add_argument(
            '--replicates',
            dest='replicates',
            type=int,
            default=1,
            help='Number of replicates',
        )
        parser.add_argument(
            '--methods',
            dest='methods',
            default='dr,cvcs',
            help='Comma-separated stacking methods',
        )
        parser.add_argument(
            '--task',
            dest='task',
            help='generalist (default) or specialist:K',
        )
        parser.add_argument(
            '--learner',
            dest='learners',
            action='append',
            help='Learner for the SPF library.  Defaults to mean for ex1 and ols otherwise.',
        )
        parser.add_argument(
            '--seed',
            dest='seed',
            help='Random seed.  Defaults to MSTACK_SEED.',
        )
        parser.add_argument(
            '--out',
            dest='out',
            help='Output directory',
        )
        parser.add_argument(
            '--jobs',
            dest='jobs',
            type=int,
            default=settings.MSTACK_JOBS,
            help='Replicate worker pool size',
        )
        parser.add_argument(
            '--verbose',
            dest='verbose',
            type=int,
            default=0,
            help='Set verbosity: 0 - quiet, 1 - chatty, 2 - loud',
        )

    def handle(self, *args, **kwargs):
        out = kwargs.get('out') or os.path.join(settings.MSTACK_DATA_DIR, 'simulate')
        echo = {name: kwargs.get(name) for name in ('scenario', 'params', 'replicates', 'methods', 'task', 'learners')}
        manifest = RunManifest(out, 'simulate', echo, None, replicates=kwargs['replicates'])
        try:
            manifest.start()
        except MstackException as e:
            raise CommandError(str(e), returncode=e.exit_code) from e
        try:
            manifest.seed = resolve_seed(kwargs.get('seed'))
            methods = parse_methods(kwargs['methods'])
            scenario = validated(ScenarioSerializer(data={
                'kind': kwargs['scenario'],
                'params': load_json_argument(kwargs.get('params')),
                'seed': manifest.seed,
            }))['scenario']
            manifest.config = dict(echo, params=scenario.params, methods=methods)
            manifest.write()

            arguments = {'seed': manifest.seed}
            if kwargs.get('task'):
                arguments['task'] = kwargs['task']
            arguments['learners'] = kwargs.get('learners') or [str(learner) for learner in experiments.default_learners(scenario)]
            config = FitArgumentsSerializer(data=arguments).to_config()
            if config.task == 'specialist' and config.study >= scenario.K:
                raise InvalidArgument(f'--task: specialist study {config.study + 1} is not in 1..{scenario.K}')

            results = experiments.simulate(scenario, methods, kwargs['replicates'], config, kwargs['jobs'])
            manifest.write_table('replicates', results['replicates'])
            manifest.write_table('summary', results['summary'])
            for error in results['errors']:
                if kwargs['verbose']:
                    logger.error(error)
        except MstackException as e:
            manifest.finish('failed', str(e))
            raise CommandError(str(e), returncode=e.exit_code) from e
        manifest.finish('complete', '\n'.join(results['errors']) or None)
        self.stdout.write(f'{len(results["replicates"])} replicate rows written to {out}')
        if results['errors']:
            self.stdout.write(f'Errors: {len(results["errors"])}')
