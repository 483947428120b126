import os
from dotenv import load_dotenv
from pathlib import Path


BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / '.env')

SECRET_KEY = os.environ.get('SECRET_KEY', 'insecure-default-key')

DEBUG = os.environ.get('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'relab',
]

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Numerical tolerances (override per run with --tol-gap / --tol-rank,
# or per instance file with a "tolerance" block)
RELAB_TOL_GAP = float(os.environ.get('RELAB_TOL_GAP', 1e-9))    # subspace equality on the gap metric
RELAB_TOL_RANK = float(os.environ.get('RELAB_TOL_RANK', 1e-10))  # relative singular-value cutoff

RELAB_MAX_DIM = int(os.environ.get('RELAB_MAX_DIM', 32))  # largest ambient dimension accepted from files
RELAB_WORKERS = int(os.environ.get('RELAB_WORKERS', 4))   # threads for multi-file runs

RELAB_FIXTURES_DIR = BASE_DIR / 'relab' / 'fixtures'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'relab': {
            'handlers': ['console'],
            'level': os.environ.get('RELAB_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}
