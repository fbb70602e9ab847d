# zstability/moment.py
"""
Mapas de momento complexos, compatibilidade, subsoluções, Z-energia,
o solucionador de pontos Z-críticos, o Z-fluxo e pontos Z-extremais.

Convenções de sinal:
    residual(x) = Im(e^{-i phi} Z~(x)) = sum_k r_k (u_k - b_k(x)),
    grad E_phi(sigma) = -residual(e^sigma . x),
    inclinação assintótica de s -> E_phi(-s lam) = margem de lam.
"""

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from django.db.models import TextChoices

from .algebra import GroupDirection, direction_array, pairing, stabiliser_complement
from .charge import z_of_degeneration
from .constants import (
    ARMIJO_C, CURVATURE_FLOOR, DIVERGENCE_FACTOR, EIGEN_FLOOR, FLOAT_TOLERANCE, FLOW_DT_MAX,
    FLOW_DT_MIN, FLOW_MAX_STEPS, MAX_ITER, MOMENT_NOT_SUBSOLUTION, MOMENT_STEP_UNDERFLOW,
    RESIDUAL_INCREASE_SLACK, SOLVER_TOL, STAGNATION_WINDOW, STEP_CAP,
)
from .exceptions import PreconditionError

logger = logging.getLogger(__name__)

CRITICAL_TOLERANCE = 1e-6
POLISH_STEPS = 3
VANISHING_GRADIENT = 1e-12


class FlowStatus(TextChoices):
    CONVERGED = 'Converged'
    MAX_STEPS = 'MaxSteps'
    DIVERGING = 'Diverging'


# --- Dados por fator ---

@dataclass(frozen=True)
class _FactorData:
    weights: np.ndarray        # linhas suportadas, float
    log_moduli: np.ndarray     # log |x_i|^2 nas coordenadas suportadas
    shift: np.ndarray
    diameter: float


@lru_cache(maxsize=256)
def _factor_data(scene):
    data = []
    for k, factor in enumerate(scene.factors):
        support = list(scene.supports[k])
        weights = factor.weight_array[support]
        moduli = np.abs(np.array(scene.point[k], dtype=complex)[support]) ** 2
        spread = weights[:, None, :] - weights[None, :, :]
        diameter = float(np.sqrt((spread ** 2).sum(axis=2).max()))
        data.append(_FactorData(weights, np.log(moduli), factor.shift_array, diameter))
    return tuple(data)


@dataclass(frozen=True)
class _Evaluation:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    residual: np.ndarray
    log_sums: np.ndarray
    barycenters: tuple


def _evaluate(scene, charge, sigma, with_hessian=True):
    """Log-soma-exp deslocada pelo máximo em cada fator; baricentros e covariâncias de Gibbs."""
    r = charge.r_array
    value = 0.0
    residual = np.zeros(scene.rank)
    hessian = np.zeros((scene.rank, scene.rank))
    log_sums, barycenters = [], []
    for k, data in enumerate(_factor_data(scene)):
        exponents = data.log_moduli + 2.0 * data.weights @ sigma
        top = exponents.max()
        weights = np.exp(exponents - top)
        total = weights.sum()
        p = weights / total
        log_sum = top + math.log(total)
        mean = p @ data.weights
        value += r[k] * (0.5 * log_sum - data.shift @ sigma)
        residual += r[k] * (data.shift - mean)
        if with_hessian:
            centred = data.weights - mean
            hessian += 2.0 * r[k] * (centred.T * p) @ centred
        log_sums.append(log_sum)
        barycenters.append(mean)
    return _Evaluation(value, -residual, hessian, residual, np.array(log_sums), tuple(barycenters))


def _sigma(scene, sigma):
    return direction_array(sigma, scene.rank) if sigma is not None else np.zeros(scene.rank)


# --- Mapa de momento complexo ---

@dataclass(frozen=True)
class MomentValue:
    z_tilde: np.ndarray
    residual: np.ndarray
    residual_norm: float

    @property
    def trace(self):
        return complex(self.z_tilde.sum())

    def to_dict(self):
        return {
            'z_tilde': [complex(z) for z in self.z_tilde],
            'residual': self.residual.tolist(),
            'residual_norm': self.residual_norm,
        }


def complex_moment(scene, charge, sigma=None):
    """
    Z~(x) = sum_k c_k (u_k - b_k(x)), com b_k o baricentro de Fubini-Study do fator k.

    Quando sigma é dado, avalia em e^sigma . x.
    """
    charge.check_factors(scene)
    evaluation = _evaluate(scene, charge, _sigma(scene, sigma), with_hessian=False)
    z_tilde = np.zeros(scene.rank, dtype=complex)
    for k, data in enumerate(_factor_data(scene)):
        z_tilde += charge.coefficient_array[k] * (data.shift - evaluation.barycenters[k])
    return MomentValue(z_tilde, evaluation.residual, float(np.linalg.norm(evaluation.residual)))


def _exact_barycenter_pairing(scene, k, lam):
    """<b_k(x), lam> com pesos de Gibbs racionais obtidos dos floats |x_i|^2."""
    support = scene.supports[k]
    moduli = [Fraction(abs(scene.point[k][i]) ** 2) for i in support]
    total = sum(moduli)
    value = sum((m / total) * pairing(scene.factors[k].weights[i], lam) for m, i in zip(moduli, support))
    return sympy.Rational(value.numerator, value.denominator)


@dataclass(frozen=True)
class CompatibilityReport:
    deviation: object
    exact: bool
    residual_norm: float
    phase_deviation: float = None

    def to_dict(self):
        return {
            'deviation': float(self.deviation),
            'exact': self.exact,
            'residual_norm': self.residual_norm,
            'phase_deviation': self.phase_deviation,
        }


def phase_deviation(trace, phase, tol=FLOAT_TOLERANCE):
    """Distância angular de tr Z~ à reta e^{i phi} R; zero quando |tr Z~| está abaixo da tolerância."""
    if abs(trace) < tol:
        return 0.0
    delta = (cmath.phase(trace) - float(phase)) % math.pi
    return float(min(delta, math.pi - delta))


def compatibility_check(scene, charge, graded, critical_tol=CRITICAL_TOLERANCE):
    """
    Compara <Z~(y), lam> com Z(y, lam) num ponto graduado (y, lam).

    A igualdade é verificada em aritmética racional quando os coeficientes da carga
    são racionais gaussianos. Se y for numericamente Z-crítico, também reporta
    o desvio de fase de tr Z~(y) em relação a phi.
    """
    charge.check_factors(graded.scene)
    graded.validate()
    y, lam = graded.scene, graded.lam
    expected = z_of_degeneration(y, charge, lam)
    moment = complex_moment(y, charge)
    if charge.coefficients_exact:
        paired = sum(
            (c * (pairing(factor.shift, lam) - _exact_barycenter_pairing(y, k, lam))
             for k, (c, factor) in enumerate(zip(charge.coefficients, y.factors))),
            sympy.Integer(0),
        )
        deviation = sympy.Abs(sympy.expand(paired - expected))
        exact = True
    else:
        paired = complex(moment.z_tilde @ np.array([float(e) for e in lam]))
        deviation = abs(paired - complex(expected))
        exact = False
    phase = None
    if moment.residual_norm < critical_tol:
        phase = phase_deviation(moment.trace, charge.phase)
    return CompatibilityReport(deviation, exact, moment.residual_norm, phase)


# --- Subsoluções ---

@dataclass(frozen=True)
class FactorPositivity:
    index: int
    label: str
    r: object
    positive: bool
    degenerate: bool


@dataclass(frozen=True)
class SubsolutionReport:
    ok: bool
    factors: tuple = field(default=())

    def __bool__(self):
        return self.ok

    def failing(self):
        return [f.label or str(f.index) for f in self.factors if not (f.positive or f.degenerate)]


def subsolution_check(scene, charge):
    """r_k > 0 em todo fator cuja órbita suportada não é um ponto (fatores degenerados são isentos)."""
    charge.check_factors(scene)
    rows = []
    for k, factor in enumerate(scene.factors):
        supported = scene.supported_weights(k)
        degenerate = all(row == supported[0] for row in supported)
        r = charge.r_values[k]
        rows.append(FactorPositivity(k, factor.label, r, bool(r > 0), degenerate))
    return SubsolutionReport(all(f.positive or f.degenerate for f in rows), tuple(rows))


# --- Z-energia ---

@dataclass(frozen=True)
class EnergyReport:
    value: float
    complex_value: complex
    gradient: np.ndarray
    hessian: np.ndarray

    def to_dict(self):
        return {
            'value': self.value,
            'complex_value': self.complex_value,
            'gradient': self.gradient.tolist(),
            'hessian': self.hessian.tolist(),
        }


def energy(scene, charge, sigma=None):
    """
    Z-energia E_phi(sigma) = sum_k r_k (1/2 log sum_i |x_i|^2 e^{2<w_i, sigma>} - <u_k, sigma>).

    O valor complexo é i * sum_k c_k (<u_k, sigma> - 1/2 log ||e^sigma x_k||^2), de modo
    que Re(e^{-i phi} E_Z) = E_phi. Gradiente = -resíduo; Hessiana = sum_k 2 r_k Cov_k.
    """
    charge.check_factors(scene)
    s = _sigma(scene, sigma)
    evaluation = _evaluate(scene, charge, s)
    complex_value = 0j
    for k, data in enumerate(_factor_data(scene)):
        complex_value += charge.coefficient_array[k] * (data.shift @ s - 0.5 * evaluation.log_sums[k])
    hessian = 0.5 * (evaluation.hessian + evaluation.hessian.T)
    return EnergyReport(evaluation.value, 1j * complex_value, evaluation.gradient, hessian)


# --- Traços e solucionadores ---

@dataclass
class FlowTrace:
    times: list = field(default_factory=list)
    sigmas: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    energy_changes: list = field(default_factory=list)
    status: FlowStatus = FlowStatus.MAX_STEPS
    message: str = ''

    def record(self, time, sigma, residual_norm, value):
        self.times.append(float(time))
        self.sigmas.append(GroupDirection(tuple(float(e) for e in sigma)))
        self.residual_norms.append(float(residual_norm))
        self.energies.append(float(value))

    @property
    def final_sigma(self):
        return self.sigmas[-1] if self.sigmas else None

    @property
    def residual_floor(self):
        return min(self.residual_norms) if self.residual_norms else None

    def rows(self):
        for t, sigma, norm, value in zip(self.times, self.sigmas, self.residual_norms, self.energies):
            yield [t, *[float(e) for e in sigma], norm, value]


@dataclass(frozen=True)
class CriticalSolution:
    sigma: GroupDirection
    trace: FlowTrace
    residual_norm: float
    iterations: int

    @property
    def status(self):
        return self.trace.status

    @property
    def converged(self):
        return self.trace.status == FlowStatus.CONVERGED

    def __iter__(self):
        yield self.sigma if self.converged else None
        yield self.trace

    def to_dict(self):
        return {
            'status': self.status.value,
            'sigma': [float(e) for e in self.sigma],
            'residual_norm': self.residual_norm,
            'residual_floor': self.trace.residual_floor,
            'iterations': self.iterations,
            'message': self.trace.message,
        }


def divergence_radius(scene):
    return DIVERGENCE_FACTOR * (1 + scene.weight_spread)


def _restricted_min_eigenvalue(hessian, complement):
    if complement.shape[1] == 0:
        return math.inf
    return float(np.linalg.eigvalsh(complement.T @ hessian @ complement).min())


def _trust_region_step(gradient, hessian, cap=STEP_CAP):
    """Passo de Newton amortecido (H + mu I) p = -g com o menor mu >= 0 que respeita ||p|| <= cap."""
    if gradient.size == 0:
        return np.zeros(0)
    eigenvalues, vectors = np.linalg.eigh(hessian)
    projected = vectors.T @ gradient

    def step(mu):
        return -vectors @ (projected / (eigenvalues + mu))

    mu_low = max(0.0, EIGEN_FLOOR - eigenvalues.min())
    if np.linalg.norm(step(mu_low)) <= cap:
        return step(mu_low)
    mu_high = mu_low + np.linalg.norm(gradient) / cap + 1.0
    for _ in range(100):
        mu = 0.5 * (mu_low + mu_high)
        if np.linalg.norm(step(mu)) > cap:
            mu_low = mu
        else:
            mu_high = mu
    return step(mu_high)


def _require_subsolution(scene, charge):
    report = subsolution_check(scene, charge)
    if not report:
        raise PreconditionError(MOMENT_NOT_SUBSOLUTION.format(factors=', '.join(report.failing())))


def solve_critical(scene, charge, sigma0=None, tol=SOLVER_TOL, max_iter=MAX_ITER):
    """
    Procura sigma* com resíduo de e^{sigma*} . x abaixo de tol.

    Newton amortecido com região de confiança e busca de Armijo sobre E_phi,
    restrito ao complemento ortogonal da álgebra do estabilizador. O estado é
    Converged só com resíduo < tol e curvatura restrita > 1e-6; Diverging quando
    sigma sai do raio de divergência com resíduo estagnado ou quando o gradiente
    restrito se anula sem certificado de curvatura.

    Returns:
        CriticalSolution: sigma final, traço das iterações, resíduo e número de iterações.
    """
    charge.check_factors(scene)
    _require_subsolution(scene, charge)
    complement = stabiliser_complement(scene)
    radius = divergence_radius(scene)
    sigma = _sigma(scene, sigma0).copy()
    trace = FlowTrace()
    evaluation = _evaluate(scene, charge, sigma)
    trace.record(0, sigma, np.linalg.norm(evaluation.residual), evaluation.value)

    iteration = 0
    while True:
        residual_norm = trace.residual_norms[-1]
        restricted_gradient = complement.T @ evaluation.gradient
        curvature = _restricted_min_eigenvalue(evaluation.hessian, complement)

        if residual_norm < tol and curvature > CURVATURE_FLOOR:
            sigma, evaluation = _polish(scene, charge, sigma, evaluation, complement, trace, iteration)
            trace.status = FlowStatus.CONVERGED
            trace.message = f"Convergiu em {iteration} iterações."
            break
        if np.linalg.norm(restricted_gradient) < VANISHING_GRADIENT:
            trace.status = FlowStatus.DIVERGING
            trace.message = "Gradiente restrito nulo sem ponto crítico certificado."
            break
        if np.linalg.norm(sigma) > radius and _stagnated(trace.residual_norms):
            trace.status = FlowStatus.DIVERGING
            trace.message = f"sigma saiu do raio {radius:g} com resíduo estagnado."
            break
        if iteration >= max_iter:
            trace.status = FlowStatus.MAX_STEPS
            trace.message = f"Limite de {max_iter} iterações atingido."
            break

        restricted_hessian = complement.T @ evaluation.hessian @ complement
        direction = complement @ _trust_region_step(restricted_gradient, restricted_hessian)
        slope = evaluation.gradient @ direction
        t = 1.0
        while True:
            candidate = _evaluate(scene, charge, sigma + t * direction)
            if candidate.value <= evaluation.value + ARMIJO_C * t * slope or t < 1e-12:
                break
            t *= 0.5
        sigma = sigma + t * direction
        evaluation = candidate
        iteration += 1
        trace.record(iteration, sigma, np.linalg.norm(evaluation.residual), evaluation.value)
        logger.debug(f"Iteração {iteration}: resíduo {trace.residual_norms[-1]:.3e}, passo {t:g}.")

    if trace.status != FlowStatus.CONVERGED:
        logger.warning(f"solve_critical: {trace.status.label} ({trace.message}) piso {trace.residual_floor:.6g}.")
    else:
        logger.info(trace.message)
    return CriticalSolution(GroupDirection(tuple(float(e) for e in sigma)), trace, trace.residual_norms[-1], iteration)


def _polish(scene, charge, sigma, evaluation, complement, trace, iteration):
    for step in range(POLISH_STEPS):
        restricted_hessian = complement.T @ evaluation.hessian @ complement
        direction = complement @ _trust_region_step(complement.T @ evaluation.gradient, restricted_hessian)
        candidate = _evaluate(scene, charge, sigma + direction)
        if np.linalg.norm(candidate.residual) >= np.linalg.norm(evaluation.residual):
            break
        sigma, evaluation = sigma + direction, candidate
        trace.record(iteration + step + 1, sigma, np.linalg.norm(evaluation.residual), evaluation.value)
    return sigma, evaluation


def _stagnated(norms, window=STAGNATION_WINDOW):
    if len(norms) <= window:
        return False
    recent = norms[-window - 1]
    return abs(recent - norms[-1]) <= 1e-9 * max(1.0, recent)


def solve_batch(problems, threads=None, **options):
    """Resolve vários pares (cena, carga) em paralelo; a ordem do resultado segue a da entrada."""
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(lambda item: solve_critical(item[0], item[1], **options), problems))


def _energy_change(scene, charge, sigma, delta):
    """E_phi(sigma + delta) - E_phi(sigma) por log1p/expm1 sobre os pesos de Gibbs em sigma."""
    r = charge.r_array
    change = 0.0
    for k, data in enumerate(_factor_data(scene)):
        exponents = data.log_moduli + 2.0 * data.weights @ sigma
        p = np.exp(exponents - exponents.max())
        p /= p.sum()
        growth = p @ np.expm1(2.0 * data.weights @ delta)
        change += r[k] * (0.5 * math.log1p(growth) - data.shift @ delta)
    return float(change)


def z_flow(scene, charge, sigma0=None, t_end=10.0, tol=SOLVER_TOL, dt_max=FLOW_DT_MAX, max_steps=FLOW_MAX_STEPS):
    """
    Integra d sigma / dt = resíduo = -grad E_phi por Euler explícito.

    O passo começa em min(dt_max, 1/L), L = sum_k r_k D_k^2 / 2 (cota da Hessiana).
    Um passo só é aceito se a variação de energia, calculada sem cancelamento,
    for estritamente negativa e o resíduo não crescer mais que 1e-8; senão o passo
    cai à metade. Depois de cada passo aceito ele volta a dobrar, até o teto inicial.
    O fluxo para em t_end, no ponto crítico certificado ou quando o passo fica
    abaixo de FLOW_DT_MIN sem nenhuma queda de energia representável.
    """
    charge.check_factors(scene)
    sigma = _sigma(scene, sigma0).copy()
    complement = stabiliser_complement(scene)
    radius = divergence_radius(scene)
    lipschitz = sum(max(float(r), 0.0) * data.diameter ** 2 / 2 for r, data in zip(charge.r_values, _factor_data(scene)))
    ceiling = min(dt_max, 1.0 / lipschitz) if lipschitz > 0 else dt_max
    dt = ceiling
    trace = FlowTrace()
    evaluation = _evaluate(scene, charge, sigma)
    time = 0.0
    trace.record(time, sigma, np.linalg.norm(evaluation.residual), evaluation.value)

    steps = 0
    while time < t_end and steps < max_steps:
        norm = trace.residual_norms[-1]
        if norm < tol and _restricted_min_eigenvalue(evaluation.hessian, complement) > CURVATURE_FLOOR:
            break
        step = min(dt, t_end - time)
        delta = step * evaluation.residual
        change = _energy_change(scene, charge, sigma, delta)
        candidate = _evaluate(scene, charge, sigma + delta)
        if not change < 0 or np.linalg.norm(candidate.residual) > norm + RESIDUAL_INCREASE_SLACK:
            dt = step / 2
            if dt < FLOW_DT_MIN:
                trace.message = MOMENT_STEP_UNDERFLOW.format(dt_min=FLOW_DT_MIN, time=time)
                logger.warning(trace.message)
                break
            continue
        sigma, evaluation, time = sigma + delta, candidate, time + step
        steps += 1
        trace.record(time, sigma, np.linalg.norm(evaluation.residual), evaluation.value)
        trace.energy_changes.append(change)
        dt = min(ceiling, 2 * dt)

    final_norm = trace.residual_norms[-1]
    curvature = _restricted_min_eigenvalue(evaluation.hessian, complement)
    if final_norm < tol and curvature > CURVATURE_FLOOR:
        trace.status = FlowStatus.CONVERGED
    elif np.linalg.norm(sigma) > radius or (final_norm >= tol and curvature <= CURVATURE_FLOOR):
        trace.status = FlowStatus.DIVERGING
    else:
        trace.status = FlowStatus.MAX_STEPS
    if not trace.message:
        trace.message = f"Fluxo até t={time:g} em {steps} passos."
    logger.info(f"z_flow: {trace.status.label}, resíduo final {final_norm:.3e}.")
    return trace


def is_extremal(scene, charge, tol=SOLVER_TOL, sigma=None):
    """A projeção do resíduo no complemento do estabilizador tem norma < tol."""
    moment = complex_moment(scene, charge, sigma)
    complement = stabiliser_complement(scene)
    return bool(np.linalg.norm(complement.T @ moment.residual) < tol)


def asymptotic_slope(scene, charge, lam, scale=100.0):
    """Inclinação de s -> E_phi(-s lam) para s grande; coincide com a margem de lam."""
    direction = direction_array(lam, scene.rank)
    near = energy(scene, charge, -scale * direction).value
    far = energy(scene, charge, -2 * scale * direction).value
    return (far - near) / scale


def flow_destabiliser(trace):
    """Direção assintótica -sigma(t)/t de um Z-fluxo divergente, pela secante da segunda metade do traço."""
    if len(trace.sigmas) < 2:
        return None
    middle = len(trace.sigmas) // 2
    start = np.array([float(e) for e in trace.sigmas[middle]])
    end = np.array([float(e) for e in trace.sigmas[-1]])
    span = trace.times[-1] - trace.times[middle]
    if span <= 0:
        return None
    velocity = -(end - start) / span
    norm = np.linalg.norm(velocity)
    if norm == 0:
        return None
    return GroupDirection(tuple(float(e) for e in velocity / norm))
