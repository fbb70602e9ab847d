# zstability/forms.py

import re
from decimal import Decimal

import sympy
from django import forms
from django.core.exceptions import ValidationError

from .constants import (
    CLI_COMPLEX_INVALID, CLI_PHASE_INVALID, CLI_RATIONAL_INVALID, CLI_UNKNOWN_KEYS,
    MAX_COORDINATES, MAX_FACTORS, MAX_RANK, SCENARIO_VERSION,
)

# Número racional em texto: inteiro, decimal, notação científica ou fração p/q.
NUMBER = r'\d+(?:\.\d*)?(?:[eE][+-]?\d+)?(?:/\d+)?'
REAL_PATTERN = re.compile(rf'^(?P<re>[+-]?{NUMBER})$')
IMAGINARY_PATTERN = re.compile(rf'^(?P<im>[+-]?(?:{NUMBER})?)\*?[ij]$')
COMPLEX_PATTERN = re.compile(rf'^(?P<re>[+-]?{NUMBER})(?P<im>[+-](?:{NUMBER})?)\*?[ij]$')
PHASE_PATTERN = re.compile(rf'^(?P<sign>[+-])?(?P<coef>{NUMBER})?\*?pi(?:/(?P<den>\d+))?(?P<offset>[+-]{NUMBER})?$')


def parse_rational(value):
    """Converte texto ('1/3', '0.25', '-2') ou número JSON em sympy.Rational sem passar por float."""
    if isinstance(value, bool):
        raise ValidationError(CLI_RATIONAL_INVALID.format(value=value))
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, (Decimal, str)):
        text = str(value).strip()
        if REAL_PATTERN.match(text):
            return sympy.Rational(text)
    raise ValidationError(CLI_RATIONAL_INVALID.format(value=value))


def parse_complex(value):
    """Converte 'a+bi', 'a-bi', 'bi', 'i' ou um número (partes racionais) em expressão sympy exata."""
    if isinstance(value, (int, Decimal)) and not isinstance(value, bool):
        return parse_rational(value)
    if not isinstance(value, str):
        raise ValidationError(CLI_COMPLEX_INVALID.format(value=value))
    text = value.replace(' ', '')
    if REAL_PATTERN.match(text):
        return sympy.Rational(text)
    match = IMAGINARY_PATTERN.match(text) or COMPLEX_PATTERN.match(text)
    if not match:
        raise ValidationError(CLI_COMPLEX_INVALID.format(value=value))
    real = sympy.Rational(match.groupdict().get('re') or 0)
    imaginary = match.group('im')
    imaginary = sympy.Rational(imaginary + '1' if imaginary in ('', '+', '-') else imaginary)
    return sympy.expand(real + sympy.I * imaginary)


def parse_phase(value):
    """
    Fase como múltiplo racional de pi ('pi/4', '-pi/2', '3*pi/4'), opcionalmente
    somado a um racional ('pi/2-1/10'), ou em radianos.
    """
    if isinstance(value, (int, Decimal)) and not isinstance(value, bool):
        return parse_rational(value)
    if not isinstance(value, str):
        raise ValidationError(CLI_PHASE_INVALID.format(value=value))
    text = value.replace(' ', '')
    if REAL_PATTERN.match(text):
        return sympy.Rational(text)
    match = PHASE_PATTERN.match(text)
    if not match:
        raise ValidationError(CLI_PHASE_INVALID.format(value=value))
    coefficient = sympy.Rational(match.group('coef') or 1) / int(match.group('den') or 1)
    if match.group('sign') == '-':
        coefficient = -coefficient
    offset = sympy.Rational(match.group('offset').lstrip('+')) if match.group('offset') else sympy.Integer(0)
    return coefficient * sympy.pi + offset


class StrictFormMixin:
    """Rejeita chaves que o formulário não declara."""

    def clean(self):
        cleaned_data = super().clean()
        unknown = sorted(set(self.data) - set(self.fields))
        if unknown:
            raise ValidationError(CLI_UNKNOWN_KEYS.format(keys=', '.join(unknown)))
        return cleaned_data


class RationalField(forms.Field):
    def to_python(self, value):
        if value in self.empty_values:
            return None
        return parse_rational(value)


class ComplexField(forms.Field):
    def to_python(self, value):
        if value in self.empty_values:
            return None
        return parse_complex(value)


class PhaseField(forms.Field):
    def to_python(self, value):
        if value in self.empty_values:
            return sympy.Integer(0)
        phase = parse_phase(value)
        if not -sympy.pi < phase < sympy.pi:
            raise ValidationError(CLI_PHASE_INVALID.format(value=value))
        return phase


class ListField(forms.Field):
    """Lista JSON cujos itens passam por parse (com índice nas mensagens de erro)."""
    item_parser = None

    def __init__(self, *args, min_length=0, max_length=None, **kwargs):
        self.min_length, self.max_length = min_length, max_length
        super().__init__(*args, **kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, list):
            raise ValidationError("Esperada uma lista.")
        if len(value) < self.min_length or (self.max_length is not None and len(value) > self.max_length):
            raise ValidationError(f"A lista deve ter entre {self.min_length} e {self.max_length} itens.")
        items = []
        for index, item in enumerate(value):
            try:
                items.append(self.parse_item(item))
            except ValidationError as exc:
                raise ValidationError(f"item {index}: {'; '.join(exc.messages)}")
        return items

    def parse_item(self, item):
        return type(self).item_parser(item)


def _parse_integer(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"'{value}' não é um inteiro.")
    return value


def _parse_integer_row(value):
    if not isinstance(value, list) or not value:
        raise ValidationError("Esperada uma linha de inteiros.")
    return tuple(_parse_integer(v) for v in value)


class IntegerListField(ListField):
    item_parser = staticmethod(_parse_integer)


class IntegerMatrixField(ListField):
    """Matriz inteira como lista de linhas de mesmo comprimento."""
    item_parser = staticmethod(_parse_integer_row)

    def to_python(self, value):
        rows = super().to_python(value)
        if len({len(row) for row in rows}) > 1:
            raise ValidationError("As linhas da matriz têm comprimentos diferentes.")
        return rows


class RationalListField(ListField):
    item_parser = staticmethod(parse_rational)


class ComplexListField(ListField):
    item_parser = staticmethod(parse_complex)


class ComplexMatrixField(ListField):
    def parse_item(self, item):
        if not isinstance(item, list) or not item:
            raise ValidationError("Esperada uma lista de coordenadas complexas.")
        return tuple(parse_complex(v) for v in item)


class NestedFormListField(ListField):
    """Lista de objetos JSON validados, cada um, por um formulário."""

    def __init__(self, form_class, *args, **kwargs):
        self.form_class = form_class
        super().__init__(*args, **kwargs)

    def parse_item(self, item):
        if not isinstance(item, dict):
            raise ValidationError("Esperado um objeto.")
        form = self.form_class(data=item)
        if not form.is_valid():
            raise ValidationError(_flatten_errors(form.errors))
        return form.cleaned_data


def _flatten_errors(errors):
    return '; '.join(f"{field}: {' '.join(messages)}" for field, messages in errors.items())


# Formulário de um fator linearizado: pesos inteiros por coordenada e deslocamento racional.
class FactorForm(StrictFormMixin, forms.Form):
    weights = IntegerMatrixField(min_length=2, max_length=MAX_COORDINATES)
    shift = RationalListField(min_length=1, max_length=MAX_RANK)
    label = forms.CharField(required=False, max_length=64)

    def clean(self):
        cleaned_data = super().clean()
        weights, shift = cleaned_data.get('weights'), cleaned_data.get('shift')
        if weights and shift and len(weights[0]) != len(shift):
            raise ValidationError("O deslocamento e as linhas de pesos têm comprimentos diferentes.")
        return cleaned_data


# Formulário de uma carga central nomeada.
class ChargeForm(StrictFormMixin, forms.Form):
    name = forms.CharField(max_length=64)
    coefficients = ComplexListField(min_length=1, max_length=MAX_FACTORS)
    phase = PhaseField(required=False)


# Formulário do cenário completo: toro, fatores, ponto marcado e cargas.
class ScenarioForm(StrictFormMixin, forms.Form):
    version = forms.IntegerField(min_value=SCENARIO_VERSION, max_value=SCENARIO_VERSION)
    rank = forms.IntegerField(min_value=1, max_value=MAX_RANK)
    factors = NestedFormListField(FactorForm, min_length=1, max_length=MAX_FACTORS)
    point = ComplexMatrixField(min_length=1, max_length=MAX_FACTORS)
    charges = NestedFormListField(ChargeForm, required=False, max_length=32)

    def clean(self):
        cleaned_data = super().clean()
        rank, factors = cleaned_data.get('rank'), cleaned_data.get('factors')
        point, charges = cleaned_data.get('point'), cleaned_data.get('charges') or []
        if rank is None or factors is None or point is None:
            return cleaned_data
        if len(point) != len(factors):
            raise ValidationError(f"O ponto tem {len(point)} fatores, mas foram declarados {len(factors)}.")
        for index, (factor, coords) in enumerate(zip(factors, point)):
            if len(factor['shift']) != rank:
                raise ValidationError(f"fator {index}: deslocamento de comprimento {len(factor['shift'])} != posto {rank}.")
            if len(coords) != len(factor['weights']):
                raise ValidationError(f"fator {index}: {len(coords)} coordenadas para {len(factor['weights'])} pesos.")
            if all(c == 0 for c in coords):
                raise ValidationError(f"fator {index}: coordenadas todas nulas.")
        names = [charge['name'] for charge in charges]
        if len(set(names)) != len(names):
            raise ValidationError("Nomes de cargas repetidos.")
        for charge in charges:
            if len(charge['coefficients']) != len(factors):
                raise ValidationError(f"carga '{charge['name']}': número de coeficientes != número de fatores.")
        return cleaned_data


# Formulário de uma entrada da tabela de valores: cocaractere e valor complexo.
class TableEntryForm(StrictFormMixin, forms.Form):
    cocharacter = IntegerListField(min_length=1, max_length=MAX_RANK)
    value = ComplexField()


# Formulário da tabela de uma carga em BG.
class TableForm(StrictFormMixin, forms.Form):
    version = forms.IntegerField(min_value=SCENARIO_VERSION, max_value=SCENARIO_VERSION)
    group = forms.RegexField(regex=r'^(gl|sl|torus):\d+$')
    bound = forms.IntegerField(min_value=1, max_value=8)
    entries = NestedFormListField(TableEntryForm, min_length=1)
