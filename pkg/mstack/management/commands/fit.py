# -*- coding: utf-8 -*-

'''
Fit a stacked model on a multi-study data file
'''
import os
import logging
import pandas as pd
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from mstack.calculator import StackingCalculator
from mstack.data import StudyCollection
from mstack.exceptions import MstackException, NotConverged
from mstack.manifest import RunManifest
from mstack.serializers import FitArgumentsSerializer, StackedModelSerializer, UtilityQuadraticSerializer
from mstack.util import resolve_seed


logger = logging.getLogger('mstack')


def fitted_table(model, collection):
    '''
    (study, i, y, fitted) rows for every sample; i is 1-based
    '''
    frames = []
    for study in collection:
        frames.append(pd.DataFrame({
            'study': study.id,
            'i': range(1, study.n + 1),
            'y': study.y,
            'fitted': model.predict(study.X),
        }))
    return pd.concat(frames, ignore_index=True)


class Command(BaseCommand):
    '''
    Fit a stacked model
    '''
    help = 'Fit DR, within-study CV or cross-set CV stacking on a multi-study CSV file (columns study, y, features). Usage:\n' + \
        './manage.py fit --data studies.csv --task specialist:1 --method dr --learner ols --lambda auto --seed 1 --out results'

    def add_arguments(self, parser):
        parser.add_argument(
            '--data',
            dest='data',
            required=True,
            help='Multi-study CSV file',
        )
        parser.add_argument(
            '--task',
            dest='task',
            help='generalist (default) or specialist:K with K the 1-based study number',
        )
        parser.add_argument(
            '--method',
            dest='method',
            help='dr (default), cvws or cvcs',
        )
        parser.add_argument(
            '--learner',
            dest='learners',
            action='append',
            help='mean, ols, ols+fallback, ridge:ALPHA or a dotted class path.  Repeat for several learners.',
        )
        parser.add_argument(
            '--constraint',
            dest='constraint',
            help='simplex (default), box:L,U or free',
        )
        parser.add_argument(
            '--folds',
            dest='folds',
            type=int,
            help='Within-study CV folds (default 5)',
        )
        parser.add_argument(
            '--repeats',
            dest='repeats',
            type=int,
            help='Within-study CV partition repeats (default 1)',
        )
        parser.add_argument(
            '--cs-mode',
            dest='cs_mode',
            help='fixed-nu (default), self-nu or uniform-elim',
        )
        parser.add_argument(
            '--lambda',
            dest='lam',
            help='Generalist-shrinkage penalty: a nonnegative value, or auto for leave-one-out selection',
        )
        parser.add_argument(
            '--lts',
            dest='lts',
            help='study-specific (default), pooled, study-specific+pooled, or a JSON list of sets',
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
            help='Worker pool size for leave-one-out refits',
        )
        parser.add_argument(
            '--fitted-table',
            action='store_true',
            help='Also write per-sample fitted values',
        )
        parser.add_argument(
            '--utility',
            action='store_true',
            help='Also write the maximized utility quadratic {Sigma, b, c, ordering}',
        )
        parser.add_argument(
            '--verbose',
            dest='verbose',
            type=int,
            default=0,
            help='Set verbosity: 0 - quiet, 1 - chatty, 2 - loud',
        )

    def handle(self, *args, **kwargs):
        names = ('task', 'method', 'learners', 'constraint', 'folds', 'repeats', 'cs_mode', 'lam', 'lts')
        arguments = {name: kwargs.get(name) for name in names if kwargs.get(name) is not None}
        out = kwargs.get('out') or os.path.join(settings.MSTACK_DATA_DIR, 'fit')
        manifest = RunManifest(out, 'fit', dict(arguments, data=kwargs['data']), None)
        try:
            manifest.start()
        except MstackException as e:
            raise CommandError(str(e), returncode=e.exit_code) from e
        try:
            manifest.seed = resolve_seed(kwargs.get('seed'))
            config = FitArgumentsSerializer(data=dict(arguments, seed=manifest.seed)).to_config()
            collection = StudyCollection.read_csv(kwargs['data'])
            model = StackingCalculator(kwargs['verbose'], kwargs['jobs']).fit(config, collection)
            manifest.write_json('weights', StackedModelSerializer(model).data)
            if model.lambda_table is not None:
                manifest.write_table('lambda', model.lambda_table)
            if kwargs['fitted_table']:
                manifest.write_table('fitted', fitted_table(model, collection))
            if kwargs['utility'] and model.quadratic is not None:
                manifest.write_json('utility', UtilityQuadraticSerializer(model.quadratic).data)
            if not model.report.converged:
                raise NotConverged(model.report)
        except MstackException as e:
            manifest.finish('failed', str(e))
            raise CommandError(str(e), returncode=e.exit_code) from e
        manifest.finish()
        weights = ', '.join(f'{w:.6g}' for w in model.weights)
        self.stdout.write(f'{config.method} {config.task_label} weights: {weights}')
