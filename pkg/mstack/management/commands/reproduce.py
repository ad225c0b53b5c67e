# -*- coding: utf-8 -*-

'''
Emit the data behind a figure of the stacking study
'''
import os
import logging
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from mstack import experiments
from mstack.exceptions import InvalidArgument, MstackException
from mstack.manifest import RunManifest
from mstack.util import resolve_seed


logger = logging.getLogger('mstack')


class Command(BaseCommand):
    '''
    Run a figure's simulation design and write its tables
    '''
    help = f'Reproduce the data behind a figure ({", ".join(experiments.FIGURES)}). Desk scale divides ' + \
        'the replicate count by REPRODUCTION.DESK_FACTOR. Usage:\n' + \
        './manage.py reproduce --figure 5d --scale desk --seed 1 --out results'

    def add_arguments(self, parser):
        parser.add_argument(
            '--figure',
            dest='figure',
            required=True,
            help='Figure identifier',
        )
        parser.add_argument(
            '--scale',
            dest='scale',
            default='desk',
            help='full or desk (default)',
        )
        parser.add_argument(
            '--replicates',
            dest='replicates',
            type=int,
            help='Override the replicate count',
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
        figure = kwargs['figure']
        scale = kwargs['scale']
        out = kwargs.get('out') or os.path.join(settings.MSTACK_DATA_DIR, f'figure-{figure}')
        config = {
            'figure': figure,
            'desk_factor': settings.REPRODUCTION.DESK_FACTOR,
            'fixed_replicates': list(settings.REPRODUCTION.FIXED),
        }
        manifest = RunManifest(out, 'reproduce', config, None, scale=scale)
        try:
            manifest.start()
        except MstackException as e:
            raise CommandError(str(e), returncode=e.exit_code) from e
        try:
            manifest.seed = resolve_seed(kwargs.get('seed'))
            manifest.replicates = experiments.replicate_count(figure, scale)
            if kwargs.get('replicates') is not None:
                if kwargs['replicates'] < 1:
                    raise InvalidArgument(f'--replicates: must be positive, got {kwargs["replicates"]}')
                manifest.replicates = kwargs['replicates']
            manifest.write()
            tables, _ = experiments.reproduce(figure, manifest.seed, scale, kwargs['jobs'], manifest.replicates)
            for name, frame in tables.items():
                manifest.write_table(f'fig{figure}_{name}', frame)
        except MstackException as e:
            manifest.finish('failed', str(e))
            raise CommandError(str(e), returncode=e.exit_code) from e
        manifest.finish()
        self.stdout.write(f'Figure {figure}: {len(tables)} tables from {manifest.replicates} replicates written to {out}')
