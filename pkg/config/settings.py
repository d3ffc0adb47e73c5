"""
Django settings for the qnet simulator project.

The project has no web surface; Django supplies settings, management
commands and logging configuration. Simulator defaults live in
``qnet.conf.DEFAULTS``; ``QNET`` overrides them.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SECRET_KEY', 'qnet-local-only-not-a-secret')

DEBUG = os.environ.get('DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Third-party
    'rest_framework',

    # Our apps
    'qnet',
]

# No models are stored; every artifact is a file in a run or dataset directory.
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Django REST Framework: only serializers, parser and renderer are used
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
    'STRICT_JSON': True,
}

# Overrides of the simulator defaults in qnet.conf.DEFAULTS; config files and
# command-line flags override both
QNET = {}
if 'QNET_SEED' in os.environ:
    QNET['SEED'] = int(os.environ['QNET_SEED'])

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'qnet': {
            'handlers': ['console'],
            'level': os.environ.get('QNET_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
