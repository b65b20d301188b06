"""
Django settings for hyperlq project.

The project has no web surface: it hosts the `core` app, whose library
modules synthesize LQ-optimal boundary feedback for 1-D hyperbolic PDEs and
whose management commands form the command-line toolkit.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""
import os
from dotenv import load_dotenv
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv()

# Only used by Django internals; nothing here is signed or served.
SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'hyperlq-development-key')

DEBUG = os.getenv('DJANGO_DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'core',
]

# No models are stored; commands and tests run without a database.
DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# ===== HYPERLQ =====

# Worker threads for frequency sweeps and batch verification (0 = one per CPU)
HYPERLQ_THREADS = int(os.getenv('HYPERLQ_THREADS', '0'))

# Default grid for constant/affine speed profiles (odd, so Simpson applies)
HYPERLQ_GRID_POINTS = int(os.getenv('HYPERLQ_GRID_POINTS', '2001'))

# Riccati value iteration defaults for --tol / --max-iter
HYPERLQ_CARE_TOL = float(os.getenv('HYPERLQ_CARE_TOL', '1e-13'))
HYPERLQ_MAX_ITER = int(os.getenv('HYPERLQ_MAX_ITER', '200000'))

HYPERLQ_LOG_LEVEL = os.getenv('HYPERLQ_LOG_LEVEL', 'WARNING')


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'core': {
            'handlers': ['console'],
            'level': HYPERLQ_LOG_LEVEL,
            'propagate': False,
        },
    },
}
