# -*- coding: utf-8 -*-

'''
Run manifests and output files for the management commands.

The manifest is written to the output directory before any computation, with
status "running", and rewritten when the run completes or fails.  Its seed and config
reproduce the result tables byte for byte; started and wall_time record this run only.

Created on  2024-03-19

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''
import os
import json
import time
import logging
from datetime import datetime, timezone
from django.conf import settings
from mstack import __version__
from mstack.exceptions import InvalidArgument
from mstack.serializers import RunManifestSerializer


logger = logging.getLogger('mstack')


class RunManifest():
    '''
    Tracks a command run and the files it writes
    '''
    def __init__(self, out, command, config, seed, scale=None, replicates=None):
        self.out = out
        self.command = command
        self.config = config
        self.seed = seed
        self.scale = scale
        self.replicates = replicates
        self.outputs = []
        self.status = 'running'
        self.error = None
        self.started = datetime.now(timezone.utc).isoformat()
        self._clock = time.monotonic()
        self.wall_time = None

    @property
    def path(self):
        return os.path.join(self.out, settings.OUTPUT.MANIFEST_NAME)

    def as_dict(self):
        return RunManifestSerializer(self).data

    def write(self):
        try:
            os.makedirs(self.out, exist_ok=True)
        except OSError as e:
            raise InvalidArgument(f'--out: cannot create {self.out}: {e}') from e
        with open(self.path, 'w') as f:
            json.dump(self.as_dict(), f, indent=2)
            f.write('\n')

    def start(self):
        self.write()
        logger.debug(f'Manifest written to {self.path}')
        return self

    def finish(self, status='complete', error=None):
        self.status = status
        self.error = error
        self.wall_time = time.monotonic() - self._clock
        self.write()

    @property
    def version(self):
        return __version__

    def write_table(self, name, frame):
        '''
        Write a pandas table as comma-delimited text and record it
        '''
        filename = f'{name}.csv'
        frame.to_csv(os.path.join(self.out, filename), index=False, float_format=settings.OUTPUT.FLOAT_FORMAT)
        self.outputs.append(filename)
        return filename

    def write_json(self, name, data):
        filename = f'{name}.json'
        with open(os.path.join(self.out, filename), 'w') as f:
            json.dump(data, f, indent=2)
            f.write('\n')
        self.outputs.append(filename)
        return filename
