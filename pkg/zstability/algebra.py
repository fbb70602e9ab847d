# zstability/algebra.py
"""
Substrato exato de reticulados e álgebra linear.

Cocaracteres e dados de pesos são exatos (inteiros e racionais do sympy);
coordenadas dos pontos são complexos em ponto flutuante. A ação do toro,
a álgebra de Lie do estabilizador e os dados de Weyl vivem aqui.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from numbers import Integral

import numpy as np
import sympy
from scipy.linalg import null_space

from .constants import (
    ALGEBRA_BAD_RANK, ALGEBRA_FACTOR_TOO_SMALL, ALGEBRA_NOT_INTEGER, ALGEBRA_NOT_UNIMODULAR,
    ALGEBRA_RAGGED_WEIGHTS, ALGEBRA_UNKNOWN_GROUP, ALGEBRA_WEYL_CAP, ALGEBRA_ZERO_COORDINATES,
    DEFAULT_WEYL_CAP, MSG_DIMENSION_MISMATCH, STABILISER_FLOAT_TOL,
)
from .exceptions import DimensionMismatch, PreconditionError, WeylClosureError

logger = logging.getLogger(__name__)


# --- Escalares exatos ---

def as_rational(value):
    """
    Converte um escalar em sympy.Rational sem passar por aproximações.

    Floats são convertidos pelo seu valor binário exato; strings aceitam
    a forma 'p/q' e decimais ('0.25').
    """
    if isinstance(value, sympy.Rational):
        return value
    if isinstance(value, bool):
        raise TypeError(f"Valor booleano não é um racional: {value!r}")
    if isinstance(value, Integral):
        return sympy.Integer(int(value))
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        exact = Fraction(value)
        return sympy.Rational(exact.numerator, exact.denominator)
    if isinstance(value, str):
        return sympy.Rational(value.strip())
    converted = sympy.sympify(value)
    if not converted.is_Rational:
        raise TypeError(f"Valor não racional: {value!r}")
    return converted


def as_complex_expr(value):
    """Converte um escalar complexo em expressão sympy (exata quando a entrada é exata)."""
    if isinstance(value, sympy.Expr):
        return value
    if isinstance(value, complex):
        return sympy.Float(value.real) + sympy.I * sympy.Float(value.imag)
    if isinstance(value, float):
        return sympy.Float(value)
    return as_rational(value)


def is_exact_scalar(value):
    if isinstance(value, bool):
        return False
    if isinstance(value, (Integral, Fraction)):
        return True
    return isinstance(value, sympy.Rational)


def is_gaussian_rational(value):
    expr = sympy.sympify(value)
    real, imag = expr.as_real_imag()
    return bool(real.is_Rational and imag.is_Rational)


def primitive_vector(entries):
    """Reescala um vetor racional para o vetor inteiro primitivo de mesma direção."""
    rationals = [as_rational(e) for e in entries]
    if all(r == 0 for r in rationals):
        return tuple(0 for _ in rationals)
    scale = math.lcm(*[int(r.q) for r in rationals])
    integers = [int(r * scale) for r in rationals]
    divisor = math.gcd(*integers)
    return tuple(i // divisor for i in integers)


def rational_rank(rows):
    if not rows:
        return 0
    return sympy.Matrix(rows).rank()


def rational_nullspace(rows, ncols):
    """Base inteira primitiva do núcleo de uma matriz racional (linhas como equações)."""
    if not rows:
        return tuple(tuple(1 if i == j else 0 for j in range(ncols)) for i in range(ncols))
    basis = sympy.Matrix(rows).nullspace()
    return tuple(primitive_vector(list(vector)) for vector in basis)


# --- Tipos de domínio ---

@dataclass(frozen=True)
class Cocharacter:
    """Subgrupo a um parâmetro do toro: um vetor inteiro de comprimento r."""
    entries: tuple

    def __post_init__(self):
        values = []
        for entry in tuple(self.entries):
            if isinstance(entry, bool) or int(entry) != entry:
                raise ValueError(ALGEBRA_NOT_INTEGER.format(value=entry))
            values.append(int(entry))
        object.__setattr__(self, 'entries', tuple(values))

    @classmethod
    def zero(cls, rank):
        return cls((0,) * rank)

    @property
    def rank(self):
        return len(self.entries)

    @property
    def is_trivial(self):
        return not any(self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index):
        return self.entries[index]

    def __add__(self, other):
        other = Cocharacter(tuple(other))
        _check_lengths(self.rank, other.rank)
        return Cocharacter(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __neg__(self):
        return Cocharacter(tuple(-a for a in self.entries))

    def __sub__(self, other):
        return self + (-Cocharacter(tuple(other)))

    def scaled(self, factor):
        return Cocharacter(tuple(int(factor) * a for a in self.entries))

    def __str__(self):
        return '(' + ','.join(str(a) for a in self.entries) + ')'


@dataclass(frozen=True)
class GroupDirection:
    """
    Direção real na álgebra de Lie do toro compacto. Entradas racionais
    correspondem a múltiplos de cocaracteres; entradas irracionais são permitidas.
    """
    entries: tuple

    def __post_init__(self):
        values = []
        for entry in tuple(self.entries):
            if isinstance(entry, Fraction):
                entry = as_rational(entry)
            elif isinstance(entry, np.floating):
                entry = float(entry)
            elif isinstance(entry, np.integer):
                entry = int(entry)
            values.append(entry)
        object.__setattr__(self, 'entries', tuple(values))

    @classmethod
    def zero(cls, rank):
        return cls((0,) * rank)

    @classmethod
    def from_cocharacter(cls, lam):
        return cls(tuple(lam))

    @property
    def rank(self):
        return len(self.entries)

    @property
    def is_rational(self):
        return all(is_exact_scalar(e) for e in self.entries)

    def as_array(self):
        return np.array([float(e) for e in self.entries], dtype=float)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class LinearisedFactor:
    """Um fator P^{n_k} com sua linearização: pesos inteiros por coordenada e deslocamento racional."""
    weights: tuple
    shift: tuple
    label: str = ''

    def __post_init__(self):
        rows = tuple(tuple(int(w) for w in row) for row in self.weights)
        if len(rows) < 2:
            raise PreconditionError(ALGEBRA_FACTOR_TOO_SMALL.format(label=self.label))
        if len({len(row) for row in rows}) != 1:
            raise PreconditionError(ALGEBRA_RAGGED_WEIGHTS.format(label=self.label))
        shift = tuple(as_rational(s) for s in self.shift)
        _check_lengths(len(rows[0]), len(shift))
        object.__setattr__(self, 'weights', rows)
        object.__setattr__(self, 'shift', shift)

    @property
    def dimension(self):
        return len(self.weights) - 1

    @property
    def rank(self):
        return len(self.shift)

    @cached_property
    def weight_array(self):
        return np.array(self.weights, dtype=float)

    @cached_property
    def shift_array(self):
        return np.array([float(s) for s in self.shift], dtype=float)


@dataclass(frozen=True)
class Scene:
    """
    Ação linearizada de um toro de posto r num produto de espaços projetivos,
    junto com um ponto marcado.

    O suporte de cada fator é decidido por teste exato de zero nas coordenadas
    fornecidas e acompanha a órbita: aplicar elementos do grupo nunca o altera.
    """
    rank: int
    factors: tuple
    point: tuple
    supports: tuple = None

    def __post_init__(self):
        if int(self.rank) <= 0:
            raise PreconditionError(ALGEBRA_BAD_RANK.format(rank=self.rank))
        factors = tuple(self.factors)
        point = tuple(tuple(complex(c) for c in coords) for coords in self.point)
        _check_lengths(len(factors), len(point))
        for factor, coords in zip(factors, point):
            _check_lengths(factor.rank, int(self.rank))
            _check_lengths(len(factor.weights), len(coords))
        if self.supports is None:
            supports = tuple(tuple(i for i, c in enumerate(coords) if c != 0) for coords in point)
        else:
            supports = tuple(tuple(sorted(int(i) for i in support)) for support in self.supports)
            _check_lengths(len(factors), len(supports))
        for factor, support in zip(factors, supports):
            if not support:
                raise PreconditionError(ALGEBRA_ZERO_COORDINATES.format(label=factor.label))
        object.__setattr__(self, 'rank', int(self.rank))
        object.__setattr__(self, 'factors', factors)
        object.__setattr__(self, 'point', point)
        object.__setattr__(self, 'supports', supports)

    def with_point(self, point, supports=None):
        return Scene(self.rank, self.factors, point, supports if supports is not None else self.supports)

    def supported_weights(self, k):
        factor = self.factors[k]
        return [factor.weights[i] for i in self.supports[k]]

    @cached_property
    def weight_spread(self):
        """Maior diferença entre entradas de pesos suportados, sobre todos os fatores."""
        entries = [w for k in range(len(self.factors)) for row in self.supported_weights(k) for w in row]
        return max(entries) - min(entries)


@dataclass(frozen=True)
class RootDatumLite:
    """Grupo de Weyl agindo no reticulado de cocaracteres de um toro maximal."""
    rank: int
    weyl_generators: tuple = ()
    name: str = ''

    def __post_init__(self):
        if int(self.rank) <= 0:
            raise PreconditionError(ALGEBRA_BAD_RANK.format(rank=self.rank))
        generators = tuple(tuple(tuple(int(a) for a in row) for row in matrix) for matrix in self.weyl_generators)
        for index, matrix in enumerate(generators):
            _check_lengths(int(self.rank), len(matrix))
            for row in matrix:
                _check_lengths(int(self.rank), len(row))
            if abs(sympy.Matrix(matrix).det()) != 1:
                raise PreconditionError(ALGEBRA_NOT_UNIMODULAR.format(index=index))
        object.__setattr__(self, 'rank', int(self.rank))
        object.__setattr__(self, 'weyl_generators', generators)

    @classmethod
    def torus(cls, rank):
        return cls(rank, (), f'torus:{rank}')

    @classmethod
    def gl(cls, n):
        generators = []
        for i in range(n - 1):
            matrix = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
            matrix[i][i] = matrix[i + 1][i + 1] = 0
            matrix[i][i + 1] = matrix[i + 1][i] = 1
            generators.append(matrix)
        return cls(n, tuple(generators), f'gl:{n}')

    @classmethod
    def sl(cls, n):
        """SL_n na base de co-raízes simples; reflexões simples vindas da matriz de Cartan."""
        if n < 2:
            raise PreconditionError(ALGEBRA_UNKNOWN_GROUP.format(spec=f'sl:{n}'))
        rank = n - 1
        cartan = [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(rank)] for i in range(rank)]
        generators = []
        for i in range(rank):
            matrix = [[1 if r == c else 0 for c in range(rank)] for r in range(rank)]
            for j in range(rank):
                matrix[i][j] -= cartan[i][j]
            generators.append(matrix)
        return cls(rank, tuple(generators), f'sl:{n}')

    @classmethod
    def from_spec(cls, spec):
        kind, _, size = str(spec).partition(':')
        builders = {'gl': cls.gl, 'sl': cls.sl, 'torus': cls.torus}
        if kind not in builders or not size.isdigit() or int(size) < 1:
            raise PreconditionError(ALGEBRA_UNKNOWN_GROUP.format(spec=spec))
        return builders[kind](int(size))

    def weyl_group(self, cap=DEFAULT_WEYL_CAP):
        return _weyl_closure(self.weyl_generators, self.rank, self.name, cap)

    def orbit(self, lam, cap=DEFAULT_WEYL_CAP):
        _check_lengths(self.rank, len(lam))
        vector = np.array(tuple(lam), dtype=np.int64)
        images = {tuple(int(a) for a in np.array(g, dtype=np.int64) @ vector) for g in self.weyl_group(cap)}
        return tuple(sorted(images))


@lru_cache(maxsize=64)
def _weyl_closure(generators, rank, name, cap):
    identity = tuple(tuple(1 if r == c else 0 for c in range(rank)) for r in range(rank))
    matrices = [np.array(g, dtype=np.int64) for g in generators]
    seen = {identity}
    queue = deque([identity])
    while queue:
        element = np.array(queue.popleft(), dtype=np.int64)
        for generator in matrices:
            product = tuple(tuple(int(a) for a in row) for row in generator @ element)
            if product not in seen:
                seen.add(product)
                if len(seen) > cap:
                    raise WeylClosureError(ALGEBRA_WEYL_CAP.format(name=name, cap=cap))
                queue.append(product)
    logger.debug(f"Grupo de Weyl '{name}' fechado com {len(seen)} elementos.")
    return tuple(sorted(seen))


# --- Operações ---

def _check_lengths(expected, received):
    if expected != received:
        raise DimensionMismatch(MSG_DIMENSION_MISMATCH.format(expected=expected, received=received))


def _entries(vector):
    if isinstance(vector, (Cocharacter, GroupDirection)):
        return vector.entries
    if isinstance(vector, np.ndarray):
        return tuple(vector.tolist())
    return tuple(vector)


def pairing(w, v):
    """Pareamento <w, v>; exato (int ou Rational) quando ambos os argumentos são exatos."""
    left, right = _entries(w), _entries(v)
    _check_lengths(len(left), len(right))
    if all(is_exact_scalar(a) for a in left) and all(is_exact_scalar(b) for b in right):
        total = sum((as_rational(a) * as_rational(b) for a, b in zip(left, right)), sympy.Integer(0))
        return int(total) if total.is_Integer else total
    return float(np.dot(np.array(left, dtype=float), np.array(right, dtype=float)))


def direction_array(direction, rank):
    """Converte uma direção (cocaractere, GroupDirection, sequência) em vetor numpy de floats."""
    if direction is None:
        return np.zeros(rank)
    values = np.array([float(e) for e in _entries(direction)], dtype=float)
    _check_lengths(rank, len(values))
    return values


def act(scene, sigma, theta=None):
    """
    Aplica exp(sigma + i*theta): a coordenada i do fator k é multiplicada por
    e^{<w_i,sigma>} e^{i<w_i,theta>}; cada fator é renormalizado para norma unitária.
    """
    s = direction_array(sigma, scene.rank)
    t = direction_array(theta, scene.rank)
    new_point = []
    for factor, coords, support in zip(scene.factors, scene.point, scene.supports):
        x = np.array(coords, dtype=complex)
        W = factor.weight_array
        idx = list(support)
        log_moduli = np.full(len(x), -np.inf)
        log_moduli[idx] = np.log(np.abs(x[idx])) + W[idx] @ s
        moduli = np.exp(log_moduli - log_moduli[idx].max())
        unit = np.zeros(len(x), dtype=complex)
        unit[idx] = x[idx] / np.abs(x[idx])
        moved = moduli * unit * np.exp(1j * (W @ t))
        moved /= np.linalg.norm(moved)
        new_point.append(tuple(complex(c) for c in moved))
    return scene.with_point(tuple(new_point), supports=scene.supports)


def stabiliser_lie(scene):
    """
    Base inteira de {v : <w_i - w_j, v> = 0 para todo fator e todo i, j no suporte}.
    A tupla vazia representa a álgebra trivial.
    """
    rows = []
    for k in range(len(scene.factors)):
        weights = scene.supported_weights(k)
        base = weights[0]
        rows.extend(tuple(a - b for a, b in zip(row, base)) for row in weights[1:])
    rows = [row for row in rows if any(row)]
    return rational_nullspace(rows, scene.rank)


def stabiliser_complement(scene):
    """Base ortonormal (colunas) do complemento ortogonal euclidiano da álgebra do estabilizador."""
    basis = stabiliser_lie(scene)
    if not basis:
        return np.eye(scene.rank)
    return null_space(np.array(basis, dtype=float))


def in_stabiliser(scene, v, tol=STABILISER_FLOAT_TOL):
    """Testa se v fixa o ponto: pareamentos iguais no suporte de cada fator."""
    entries = _entries(v)
    _check_lengths(scene.rank, len(entries))
    exact = all(is_exact_scalar(e) for e in entries)
    for k in range(len(scene.factors)):
        values = [pairing(row, entries) for row in scene.supported_weights(k)]
        if exact:
            if any(value != values[0] for value in values):
                return False
        elif max(values) - min(values) > tol:
            return False
    return True


def weyl_canonical(lam, datum, cap=DEFAULT_WEYL_CAP):
    """Representante lexicograficamente máximo da órbita de Weyl de lam."""
    return Cocharacter(datum.orbit(lam, cap)[-1])
