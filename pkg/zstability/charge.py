# zstability/charge.py
"""
Cargas centrais: pesos de Hilbert-Mumford, combinações complexas de
linearizações, avaliação em pontos graduados e as cargas de exemplo
(feixes coerentes e K-estabilidade).

Convenção de sinal: nu_k = <u_k, lam> - min_{i no suporte} <w_i, lam>, de modo que
semiestabilidade clássica equivale a u_k pertencer ao fecho convexo dos pesos suportados.
"""

import cmath
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
import sympy

from .algebra import (
    Cocharacter, RootDatumLite, as_complex_expr, as_rational, in_stabiliser,
    is_exact_scalar, is_gaussian_rational, pairing,
)
from .constants import (
    ALGEBRA_NOT_IN_STABILISER, CHARGE_ALL_ZERO, CHARGE_EMPTY_TABLE, CHARGE_FACTOR_COUNT,
    CHARGE_K_LEADING, CHARGE_NEGATIVE_RANK, CHARGE_PHASE_DOMAIN, CHARGE_PHASE_MISMATCH,
    CHARGE_PHASE_RANGE, FLOAT_TOLERANCE, MSG_DIMENSION_MISMATCH,
)
from .exceptions import (
    DimensionMismatch, InvalidGradedPoint, PhaseDomainError, PreconditionError,
)

logger = logging.getLogger(__name__)

RATIONAL_DENOMINATOR = 10 ** 6


def _as_phase(value):
    if isinstance(value, sympy.Expr):
        return value
    if isinstance(value, float):
        return sympy.Float(value)
    return as_rational(value)


def _is_exact_expr(value):
    return bool(getattr(value, 'is_Rational', False))


def _real_imag(expr):
    """
    Partes real e imaginária de uma expressão sympy.

    Uma parte fica racional quando é exata, ou quando um racional de denominador
    pequeno a aproxima com 30 dígitos e a simplificação confirma a igualdade;
    caso contrário vira float. Entradas com Float ficam sempre em float.
    """
    numeric = complex(sympy.N(expr, 30))
    parts = []
    for part, approx in zip(expr.as_real_imag(), (numeric.real, numeric.imag)):
        if part.is_Rational:
            parts.append(part)
            continue
        if part.has(sympy.Float):
            parts.append(approx)
            continue
        guess = Fraction(approx).limit_denominator(RATIONAL_DENOMINATOR)
        guess = sympy.Rational(guess.numerator, guess.denominator)
        close = abs(complex(sympy.N(part - guess, 30))) < 1e-20
        parts.append(guess if close and sympy.simplify(part - guess) == 0 else approx)
    return tuple(parts)


@dataclass(frozen=True)
class CentralCharge:
    """
    Carga central Z = sum_k c_k * nu_k com fase phi em (-pi, pi).

    Os reais derivados r_k = Im(e^{-i phi} c_k) e s_k = Re(e^{-i phi} c_k)
    satisfazem e^{-i phi} c_k = s_k + i r_k e são calculados uma única vez.
    """
    coefficients: tuple
    phase: object = 0
    name: str = ''

    def __post_init__(self):
        coefficients = tuple(as_complex_expr(c) for c in self.coefficients)
        if not coefficients or all(complex(c) == 0 for c in coefficients):
            raise PreconditionError(CHARGE_ALL_ZERO)
        phase = _as_phase(self.phase)
        if not -math.pi < float(phase) < math.pi:
            raise PreconditionError(CHARGE_PHASE_RANGE.format(phase=phase))
        object.__setattr__(self, 'coefficients', coefficients)
        object.__setattr__(self, 'phase', phase)

    def __len__(self):
        return len(self.coefficients)

    @cached_property
    def _rotated(self):
        rotation = sympy.exp(-sympy.I * self.phase)
        return tuple(sympy.expand_complex(rotation * c) for c in self.coefficients)

    @cached_property
    def _parts(self):
        return tuple(_real_imag(rotated) for rotated in self._rotated)

    @cached_property
    def r_values(self):
        """Coeficientes r_k; sympy.Rational quando exatos, float caso contrário."""
        return tuple(imag for _, imag in self._parts)

    @cached_property
    def s_values(self):
        return tuple(real for real, _ in self._parts)

    @cached_property
    def coefficients_exact(self):
        return all(is_gaussian_rational(c) for c in self.coefficients)

    @property
    def is_exact(self):
        return all(_is_exact_expr(r) for r in self.r_values)

    @cached_property
    def r_array(self):
        return np.array([float(r) for r in self.r_values], dtype=float)

    @cached_property
    def s_array(self):
        return np.array([float(s) for s in self.s_values], dtype=float)

    @cached_property
    def coefficient_array(self):
        return np.array([complex(c) for c in self.coefficients], dtype=complex)

    @cached_property
    def rotation(self):
        return cmath.exp(-1j * float(self.phase))

    def check_factors(self, scene):
        if len(self.coefficients) != len(scene.factors):
            raise DimensionMismatch(CHARGE_FACTOR_COUNT.format(
                coefficients=len(self.coefficients), factors=len(scene.factors)))

    def rotated(self, theta):
        """(phi, c) -> (phi + theta, e^{i theta} c); margens e vereditos não mudam."""
        theta = _as_phase(theta)
        factor = sympy.exp(sympy.I * theta)
        coefficients = tuple(sympy.expand_complex(factor * c) for c in self.coefficients)
        phase = self.phase + theta
        # e^{-i phi} não muda ao somar 2 pi; a fase volta para (-pi, pi).
        if float(phase) >= math.pi:
            phase -= 2 * sympy.pi
        elif float(phase) <= -math.pi:
            phase += 2 * sympy.pi
        return CentralCharge(coefficients, phase, self.name)

    def scaled(self, t):
        t = as_complex_expr(t)
        return CentralCharge(tuple(sympy.expand(t * c) for c in self.coefficients), self.phase, self.name)

    def interpolate(self, other, t):
        """(1 - t) * self + t * other, mantendo a fase de self."""
        if len(self) != len(other):
            raise DimensionMismatch(MSG_DIMENSION_MISMATCH.format(expected=len(self), received=len(other)))
        t = as_complex_expr(t)
        coefficients = tuple(
            sympy.expand((1 - t) * a + t * b) for a, b in zip(self.coefficients, other.coefficients)
        )
        return CentralCharge(coefficients, self.phase, self.name)

    def __add__(self, other):
        if len(self) != len(other):
            raise DimensionMismatch(MSG_DIMENSION_MISMATCH.format(expected=len(self), received=len(other)))
        if sympy.simplify(self.phase - other.phase) != 0:
            logger.warning(CHARGE_PHASE_MISMATCH.format(left=self.phase, right=other.phase))
        coefficients = tuple(sympy.expand(a + b) for a, b in zip(self.coefficients, other.coefficients))
        return CentralCharge(coefficients, self.phase, self.name)

    def __mul__(self, scalar):
        return self.scaled(scalar)

    __rmul__ = __mul__


# --- Pesos e avaliação em degenerações ---

def minimal_pairing(scene, k, lam):
    return min(pairing(row, lam) for row in scene.supported_weights(k))


def hm_weight(scene, k, lam):
    """Peso de Hilbert-Mumford nu_k = <u_k, lam> - m_k(x, lam)."""
    lam = Cocharacter(tuple(lam))
    factor = scene.factors[k]
    return pairing(factor.shift, lam) - minimal_pairing(scene, k, lam)


def z_of_degeneration(scene, charge, lam):
    """Z(y, lam) = sum_k c_k nu_k para y = lim lam(t).x; expressão sympy exata quando a carga é exata."""
    charge.check_factors(scene)
    total = sympy.Integer(0)
    for k, c in enumerate(charge.coefficients):
        total += c * hm_weight(scene, k, lam)
    return sympy.expand(total)


def margin_of_degeneration(scene, charge, lam):
    """Margem Im(e^{-i phi} Z(y, lam)) = sum_k r_k nu_k."""
    charge.check_factors(scene)
    weights = [hm_weight(scene, k, lam) for k in range(len(scene.factors))]
    if charge.is_exact:
        return sum((r * w for r, w in zip(charge.r_values, weights)), sympy.Integer(0))
    return float(sum(float(r) * float(w) for r, w in zip(charge.r_values, weights)))


def stability_margin_real(scene, charge, v):
    """Margem estendida a direções reais (possivelmente irracionais) v; contínua em v."""
    charge.check_factors(scene)
    v = np.array([float(e) for e in v], dtype=float)
    total = 0.0
    for k, factor in enumerate(scene.factors):
        supported = factor.weight_array[list(scene.supports[k])]
        total += charge.r_array[k] * (factor.shift_array @ v - (supported @ v).min())
    return float(total)


@dataclass(frozen=True)
class LatticeMargins:
    """Margens de vários cocaracteres; 'values' exatos são inteiros escalados por 1/scale."""
    values: np.ndarray
    scale: int
    exact: bool

    def as_floats(self):
        return np.array([float(v) for v in self.values], dtype=float) / self.scale


def lattice_margins(scene, charge, lambdas):
    """
    Margens vetorizadas sobre uma matriz de cocaracteres (uma linha por cocaractere).

    No modo exato, r_k e u_k são reescalados por denominadores comuns para
    que sinais e zeros sejam decididos em aritmética inteira.
    """
    charge.check_factors(scene)
    lambdas = np.asarray(lambdas, dtype=np.int64).reshape(-1, scene.rank)
    if charge.is_exact:
        r_scale = math.lcm(*[int(sympy.Rational(r).q) for r in charge.r_values])
        u_scale = math.lcm(*[int(s.q) for f in scene.factors for s in f.shift])
        grid = lambdas.astype(object)
        total = np.zeros(len(lambdas), dtype=object)
        for k, factor in enumerate(scene.factors):
            r_int = int(sympy.Rational(charge.r_values[k]) * r_scale)
            if r_int == 0:
                continue
            weights = np.array([factor.weights[i] for i in scene.supports[k]], dtype=object)
            shift = np.array([int(s * u_scale) for s in factor.shift], dtype=object)
            levels = (grid @ weights.T).min(axis=1)
            total = total + r_int * (grid @ shift - u_scale * levels)
        return LatticeMargins(total, r_scale * u_scale, True)
    grid = lambdas.astype(float)
    total = np.zeros(len(lambdas))
    for k, factor in enumerate(scene.factors):
        supported = factor.weight_array[list(scene.supports[k])]
        total += charge.r_array[k] * (grid @ factor.shift_array - (grid @ supported.T).min(axis=1))
    return LatticeMargins(total, 1, False)


def z_on_stabiliser(scene, charge, v):
    """
    Extensão linear de Z à álgebra de Lie do estabilizador:
    sum_k c_k (<u_k, v> - l_k(v)), com l_k(v) o valor comum do pareamento no suporte.
    """
    charge.check_factors(scene)
    entries = tuple(v)
    if not in_stabiliser(scene, entries):
        raise InvalidGradedPoint(ALGEBRA_NOT_IN_STABILISER.format(direction=entries))
    exact = all(is_exact_scalar(e) for e in entries)
    total = sympy.Integer(0) if exact else 0j
    for k, factor in enumerate(scene.factors):
        common = pairing(scene.supported_weights(k)[0], entries)
        if exact:
            total += charge.coefficients[k] * (pairing(factor.shift, entries) - common)
        else:
            total += complex(charge.coefficients[k]) * (pairing(factor.shift, entries) - common)
    return sympy.expand(total) if exact else total


# --- Fases e cargas de exemplo ---

def phase_of(z):
    """Argumento principal de z no semiplano H = {Im >= 0} sem a semirreta real não positiva."""
    value = complex(z)
    if value == 0 or value.imag < 0 or (value.imag == 0 and value.real <= 0):
        raise PhaseDomainError(CHARGE_PHASE_DOMAIN.format(value=z))
    return cmath.phase(value)


def slope_charge(rank, degree):
    """Z(E) = rk E - i deg E."""
    if as_rational(rank) < 0:
        raise PreconditionError(CHARGE_NEGATIVE_RANK.format(rank=rank))
    return sympy.expand(as_rational(rank) - sympy.I * as_rational(degree))


def direct_sum_charge(values, exponents):
    """Z(E_1 + ... + E_k, (exp(a_1 t), ..., exp(a_k t))) = sum_j a_j Z(E_j)."""
    values, exponents = list(values), list(exponents)
    if len(values) != len(exponents):
        raise DimensionMismatch(MSG_DIMENSION_MISMATCH.format(expected=len(values), received=len(exponents)))
    total = sympy.Integer(0)
    for value, exponent in zip(values, exponents):
        total += int(exponent) * as_complex_expr(value)
    return sympy.expand(total)


def filtration_margin(values, exponents, phase=0):
    """Desigualdade de fase numa filtração por soma direta: Im(e^{-i phi} Z)."""
    total = direct_sum_charge(values, exponents)
    _, margin = _real_imag(sympy.expand_complex(sympy.exp(-sympy.I * _as_phase(phase)) * total))
    return margin


@dataclass(frozen=True)
class KChargeResult:
    z_total: object
    z_tc: object
    df_margin: object

    @property
    def phase(self):
        return phase_of(self.z_total)

    @property
    def semistable(self):
        return self.df_margin >= 0


def k_charge(a0, a1, b0, b1):
    """
    Carga do exemplo de K-estabilidade a partir dos coeficientes líderes dos
    polinômios de Hilbert (a0, a1) e de peso (b0, b1).

    A margem de Donaldson-Futaki é devolvida exata: a1*b0 - a0*b1.
    """
    a0, a1, b0, b1 = (as_rational(x) for x in (a0, a1, b0, b1))
    if a0 <= 0:
        raise PreconditionError(CHARGE_K_LEADING.format(a0=a0))
    z_total = sympy.I * a0 - a1
    z_tc = -sympy.I * b0 + b1
    return KChargeResult(z_total=z_total, z_tc=z_tc, df_margin=a1 * b0 - a0 * b1)


# --- Cargas tabeladas ---

@dataclass(frozen=True)
class TabulatedCharge:
    """Valores de psi_x numa caixa simétrica de cocaracteres, ligados a um RootDatumLite."""
    table: dict
    datum: RootDatumLite
    bound: int

    def __post_init__(self):
        if not self.table:
            raise PreconditionError(CHARGE_EMPTY_TABLE)
        table = {}
        for key, value in self.table.items():
            key = tuple(int(a) for a in key)
            if len(key) != self.datum.rank:
                raise DimensionMismatch(MSG_DIMENSION_MISMATCH.format(expected=self.datum.rank, received=len(key)))
            table[key] = as_complex_expr(value)
        object.__setattr__(self, 'table', table)
        object.__setattr__(self, 'bound', int(self.bound))

    @classmethod
    def from_function(cls, function, datum, bound):
        box = itertools.product(range(-bound, bound + 1), repeat=datum.rank)
        return cls({lam: function(lam) for lam in box}, datum, bound)

    @cached_property
    def exact(self):
        return all(is_gaussian_rational(v) for v in self.table.values())


@dataclass
class ValidationReport:
    additivity_violations: list = field(default_factory=list)
    weyl_violations: list = field(default_factory=list)
    zero_violation: bool = False
    character: tuple = None
    residual: object = None
    exact: bool = False

    @property
    def passed(self):
        return not (self.additivity_violations or self.weyl_violations or self.zero_violation)


def _same_value(left, right, exact):
    if exact:
        return sympy.expand(left - right) == 0
    return abs(complex(left) - complex(right)) <= FLOAT_TOLERANCE


def validate_tabulated(charge):
    """
    Verifica as condições de um caráter complexo numa tabela de valores.

    Returns:
        ValidationReport: violações de aditividade em pares comutantes da caixa,
        violações de invariância de Weyl e, quando ambas passam, o caráter
        reconstruído por mínimos quadrados com o maior resíduo.
    """
    table, exact = charge.table, charge.exact
    report = ValidationReport(exact=exact)
    zero = (0,) * charge.datum.rank
    if zero in table and not _same_value(table[zero], 0, exact):
        report.zero_violation = True

    keys = sorted(table)
    for lam, mu in itertools.product(keys, repeat=2):
        total = tuple(a + b for a, b in zip(lam, mu))
        if total in table and not _same_value(table[total], table[lam] + table[mu], exact):
            report.additivity_violations.append((lam, mu))

    generators = [np.array(g, dtype=np.int64) for g in charge.datum.weyl_generators]
    for lam in keys:
        for generator in generators:
            image = tuple(int(a) for a in generator @ np.array(lam, dtype=np.int64))
            if image in table and not _same_value(table[image], table[lam], exact):
                report.weyl_violations.append((lam, image))

    if report.passed:
        report.character, report.residual = _reconstruct_character(keys, table, exact)
    logger.info(
        f"Tabela validada: {len(report.additivity_violations)} violações de aditividade, "
        f"{len(report.weyl_violations)} de Weyl."
    )
    return report


def _reconstruct_character(keys, table, exact):
    if exact:
        A = sympy.Matrix([list(k) for k in keys])
        b = sympy.Matrix([table[k] for k in keys])
        normal = A.T * A
        if normal.rank() < A.cols:
            return None, None
        chi = normal.LUsolve(A.T * b).applyfunc(sympy.expand)
        residuals = (A * chi - b).applyfunc(sympy.expand)
        residual = max((sympy.Abs(r) for r in residuals), default=sympy.Integer(0))
        return tuple(chi), residual
    A = np.array(keys, dtype=float)
    b = np.array([complex(table[k]) for k in keys], dtype=complex)
    chi, *_ = np.linalg.lstsq(A.astype(complex), b, rcond=None)
    residual = float(np.abs(A @ chi - b).max()) if len(keys) else 0.0
    return tuple(complex(c) for c in chi), residual
