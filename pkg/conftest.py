# conftest.py
# Configura o Django para o pytest, como o manage.py faz para `manage.py test`.
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'kempfness_project.settings')
django.setup()
