# kempfness_project/settings.py
import os
import sys
from pathlib import Path

import environ

# Caminhos dentro do projeto: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

env = environ.Env()

environ.Env.read_env(os.path.join(BASE_DIR, '.env'))

# Sem superfície web: a chave só existe porque o Django a exige.
SECRET_KEY = env('DJANGO_SECRET_KEY', default='zstability-sem-superficie-web')

DEBUG = env.bool('ZSTAB_DEBUG', default=False)

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'zstability',
]

# Nenhum banco de dados: os comandos leem e escrevem apenas arquivos JSON/CSV.
DATABASES = {}

LANGUAGE_CODE = 'pt-br'
TIME_ZONE = 'America/Sao_Paulo'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Parâmetros da biblioteca, lidos somente pelos comandos de gerenciamento.
ZSTABILITY = {
    'THREADS': env.int('ZSTAB_THREADS', default=os.cpu_count() or 1),
    'SOLVER_TOL': env.float('ZSTAB_SOLVER_TOL', default=1e-8),
    'MAX_ITER': env.int('ZSTAB_MAX_ITER', default=2000),
    'GRAD_BOUND': env.int('ZSTAB_GRAD_BOUND', default=2),
    'ORACLE_BOUND': env.int('ZSTAB_ORACLE_BOUND', default=0),  # 0 = automático
    'WEYL_CAP': env.int('ZSTAB_WEYL_CAP', default=50000),
}

LOG_FILE = env('ZSTAB_LOG_FILE', default='')
LOG_LEVEL = env('ZSTAB_LOG_LEVEL', default='INFO').upper()

# Logs vão para stderr: stdout fica reservado para JSON e CSV.
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG' if DEBUG else LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'simple' if DEBUG else 'verbose',
            'stream': sys.stderr,
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
        'zstability': {
            'handlers': ['console'],
            'level': 'DEBUG' if DEBUG else LOG_LEVEL,
            'propagate': False,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
}

# Arquivo de log rotativo opcional (5 MB x 5).
if LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': 'DEBUG',
        'class': 'logging.handlers.RotatingFileHandler',
        'filename': LOG_FILE,
        'maxBytes': 1024 * 1024 * 5,
        'backupCount': 5,
        'formatter': 'verbose',
    }
    LOGGING['loggers']['zstability']['handlers'].append('file')
    LOGGING['root']['handlers'].append('file')
