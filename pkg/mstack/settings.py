"""
Django settings for mstack project.

Configuration is taken from environment variables where it makes sense to
change it per run (log level, default seed, worker count).  Everything else
is a constant group below.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/
"""

import os
import numpy as np
from joblib import cpu_count

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('MSTACK_DJANGO_KEY', 'mstack-development-key-not-for-production')

DEBUG = os.environ.get('MSTACK_DEBUG', 'FALSE').upper() == 'TRUE'
LOGLEVEL = os.environ.get('MSTACK_LOGLEVEL', 'INFO')

# Seed used by the management commands when --seed is omitted
MSTACK_SEED = os.environ.get('MSTACK_SEED')

# Replicate worker pool size
MSTACK_JOBS = int(os.environ.get('MSTACK_JOBS', cpu_count()))

# Default root for command output directories
MSTACK_DATA_DIR = os.environ.get('MSTACK_DATA_DIR', os.getcwd())

# Long Monte Carlo acceptance tests are skipped unless this is set
MSTACK_SLOW_TESTS = os.environ.get('MSTACK_SLOW_TESTS', 'FALSE').upper() == 'TRUE'

ALLOWED_HOSTS = ['*']

# Application definition

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'rest_framework',
    'mstack',
]

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.path.join(BASE_DIR, 'mstack.sqlite3'),
    },
}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

REST_FRAMEWORK = {
    'COERCE_DECIMAL_TO_STRING': False,
}

## Logging setup
# Logging setup.  Meant to log everything to stderrr
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'filters': {
        'require_debug_false': {
            '()': 'django.utils.log.RequireDebugFalse'
        },
        'require_debug_true': {
            '()': 'django.utils.log.RequireDebugTrue'
        },
    },
    'formatters': {
        'console': {
            'format': '%(asctime)s %(name)-12s %(levelname)-8s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'console',
            'level': LOGLEVEL,
            'filters': ['require_debug_false'],
        },
        'console_debug': {
            'class': 'logging.StreamHandler',
            'formatter': 'console',
            'level': 'DEBUG',
            'filters': ['require_debug_true'],
        },
    },
    'loggers': {
        'mstack': {
            'handlers': ['console', 'console_debug'],
            'level': 'DEBUG' if DEBUG else LOGLEVEL,
            'propagate': False,
        }
    },
}


class SOLVER():
    '''
    Quadratic program defaults
    '''
    TOLERANCE = 1e-9
    MAX_ITER = 50000
    POWER_ITERATIONS = 30


class PENALTY():
    '''
    Generalist-shrinkage penalty defaults
    '''
    LAMBDA_GRID = tuple(np.logspace(-3, 3, 25))
    ITERATIVE_TOLERANCE = 1e-6
    ITERATIVE_MAX_ROUNDS = 50


class CVWS():
    '''
    Within-study cross-validation defaults
    '''
    FOLDS = 5
    REPEATS = 1


class REPRODUCTION():
    '''
    Replicate counts for figure reproduction at full scale.  Desk scale divides
    by DESK_FACTOR except for the figures listed in FIXED.
    '''
    DESK_FACTOR = 5
    FIXED = ('2a', '2bc', '2def', '3-left', '3-right', '5a')
    REPLICATES = {
        '2a': 40,
        '2bc': 50,
        '2def': 1,
        '3-left': 1,
        '3-right': 50,
        '4': 1000,
        '5a': 50,
        '5bc': 1000,
        '5d': 1000,
        'E1': 1000,
    }


class OUTPUT():
    '''
    Output formatting
    '''
    FLOAT_FORMAT = '%.17g'
    MANIFEST_NAME = 'manifest.json'
