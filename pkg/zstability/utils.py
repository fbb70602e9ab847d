# zstability/utils.py

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path

import numpy as np
import sympy
from django.core.serializers.json import DjangoJSONEncoder

from .algebra import LinearisedFactor, RootDatumLite, Scene
from .charge import CentralCharge, TabulatedCharge
from .constants import CLI_JSON_SYNTAX, CLI_SCHEMA, CLI_SIGMA_INVALID, CLI_UNKNOWN_CHARGE, SCENARIO_VERSION
from .exceptions import DimensionMismatch, PreconditionError, ScenarioParseError
from .forms import ScenarioForm, TableForm, parse_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    """Cenário carregado: a cena, as cargas por nome e o caminho de origem."""
    scene: object
    charges: dict
    path: str = ''

    def charge(self, name):
        if name not in self.charges:
            available = ', '.join(sorted(self.charges)) or '(nenhuma)'
            raise PreconditionError(CLI_UNKNOWN_CHARGE.format(name=name, available=available))
        return self.charges[name]


def load_json(path):
    """
    Lê um documento JSON preservando decimais exatos.

    Raises:
        ScenarioParseError: em erro de leitura ou de sintaxe (com linha e coluna).
    """
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ScenarioParseError(CLI_JSON_SYNTAX.format(path=path, message=exc.strerror, line=0, column=0))
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            CLI_JSON_SYNTAX.format(path=path, message=exc.msg, line=exc.lineno, column=exc.colno),
            line=exc.lineno, column=exc.colno,
        )


def _validated(form_class, data, path):
    if not isinstance(data, dict):
        raise ScenarioParseError(CLI_SCHEMA.format(path=path, errors="o documento deve ser um objeto."))
    form = form_class(data=data)
    if not form.is_valid():
        errors = '; '.join(f"{field}: {' '.join(messages)}" for field, messages in form.errors.items())
        raise ScenarioParseError(CLI_SCHEMA.format(path=path, errors=errors))
    return form.cleaned_data


def scenario_from_data(data, path='<memória>'):
    """Valida um cenário (dict) e constrói a Scene e as CentralCharge declaradas."""
    cleaned = _validated(ScenarioForm, data, path)
    factors = tuple(
        LinearisedFactor(f['weights'], f['shift'], f.get('label') or f'F{k}')
        for k, f in enumerate(cleaned['factors'])
    )
    point = tuple(tuple(complex(c) for c in coords) for coords in cleaned['point'])
    # Suporte decidido no valor exato lido do arquivo, antes da conversão para float.
    supports = tuple(tuple(i for i, c in enumerate(coords) if c != 0) for coords in cleaned['point'])
    scene = Scene(cleaned['rank'], factors, point, supports)
    charges = {
        c['name']: CentralCharge(tuple(c['coefficients']), c['phase'], c['name'])
        for c in cleaned.get('charges') or []
    }
    logger.debug(f"Cenário {path}: posto {scene.rank}, {len(factors)} fatores, {len(charges)} cargas.")
    return Scenario(scene, charges, str(path))


def load_scenario(path):
    return scenario_from_data(load_json(path), path)


def load_table(path):
    """Lê e valida uma tabela de valores de carga em BG."""
    cleaned = _validated(TableForm, load_json(path), path)
    datum = RootDatumLite.from_spec(cleaned['group'])
    table = {tuple(entry['cocharacter']): entry['value'] for entry in cleaned['entries']}
    return TabulatedCharge(table, datum, cleaned['bound'])


def parse_sigma(text, rank=None):
    """Lista 'v1,...,vr' de racionais ou floats."""
    try:
        values = []
        for part in str(text).split(','):
            part = part.strip()
            try:
                values.append(parse_rational(part))
            except Exception:
                values.append(float(part))
    except ValueError:
        raise ScenarioParseError(CLI_SIGMA_INVALID.format(value=text))
    if rank is not None and len(values) != rank:
        raise DimensionMismatch(f"sigma tem {len(values)} entradas; o posto é {rank}.")
    return tuple(values)


# --- Serialização ---

def format_complex(value):
    """Formata um complexo como 'a+bi' (exato quando as partes são racionais)."""
    expr = sympy.sympify(value)
    real, imag = expr.as_real_imag()
    if real.is_Rational and imag.is_Rational:
        real_text, imag_text = str(real), str(imag)
    else:
        real_text, imag_text = repr(float(real)), repr(float(imag))
    if imag == 0:
        return real_text
    imag_text = {'1': '', '-1': '-'}.get(imag_text, imag_text)
    if real == 0:
        return f"{imag_text}i"
    sign = '' if imag_text.startswith('-') else '+'
    return f"{real_text}{sign}{imag_text}i"


def format_scalar(value):
    if isinstance(value, sympy.Integer):
        return int(value)
    if isinstance(value, sympy.Rational):
        return str(value)
    if isinstance(value, sympy.Expr):
        return format_complex(value) if not value.is_real else float(value)
    return value


class ZStabilityJSONEncoder(DjangoJSONEncoder):
    """Codifica racionais do sympy como 'p/q', complexos como 'a+bi' e arrays do numpy como listas."""

    def default(self, o):
        if isinstance(o, sympy.Integer):
            return int(o)
        if isinstance(o, sympy.Rational):
            return str(o)
        if isinstance(o, sympy.Expr):
            return format_scalar(o)
        if isinstance(o, complex):
            return format_complex(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if hasattr(o, 'to_dict'):
            return o.to_dict()
        if hasattr(o, 'entries'):
            return list(o.entries)
        if dataclasses.is_dataclass(o):
            return dataclasses.asdict(o)
        return super().default(o)


def dumps(payload):
    return json.dumps(payload, cls=ZStabilityJSONEncoder, indent=2, ensure_ascii=False)


def write_trace_csv(stream, trace, rank):
    """Traço do fluxo em CSV: t, sigma_1..sigma_r, residual_norm, energy."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['t', *[f'sigma_{i + 1}' for i in range(rank)], 'residual_norm', 'energy'])
    for row in trace.rows():
        writer.writerow([repr(float(v)) for v in row])


def scene_to_dict(scene, charges=()):
    """Cena (e cargas opcionais) no formato de arquivo de cenário."""
    return {
        'version': SCENARIO_VERSION,
        'rank': scene.rank,
        'factors': [
            {'weights': [list(row) for row in f.weights], 'shift': [str(s) for s in f.shift], 'label': f.label}
            for f in scene.factors
        ],
        'point': [
            [format_complex(c) if i in support else '0' for i, c in enumerate(coords)]
            for coords, support in zip(scene.point, scene.supports)
        ],
        'charges': [charge_to_dict(c) for c in charges],
    }


def format_phase(phase):
    """Fase como 'p/q*pi', 'p/q*pi+r' com r racional, ou em radianos; sempre legível por parse_phase."""
    phase = sympy.expand(sympy.sympify(phase))
    if phase.is_Rational:
        return format_scalar(phase)
    coefficient = phase.coeff(sympy.pi)
    offset = sympy.expand(phase - coefficient * sympy.pi)
    if not (coefficient.is_Rational and offset.is_Rational):
        return repr(float(phase))
    if offset == 0:
        return f"{coefficient}*pi"
    sign = '-' if offset < 0 else '+'
    return f"{coefficient}*pi{sign}{abs(offset)}"


def charge_to_dict(charge):
    return {
        'name': charge.name or 'carga',
        'coefficients': [format_complex(c) for c in charge.coefficients],
        'phase': format_phase(charge.phase),
    }


def report_to_json(report):
    """Relatório (qualquer objeto com to_dict) como documento JSON."""
    return dumps(report.to_dict() if hasattr(report, 'to_dict') else report)
