# biharmonic_gluing.py

import configparser
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from tqdm import tqdm

from functionals import FunctionalReport
from geometry_errors import IllConditionedError, OrientationError, ParameterError
from mobius import fit_decay_exponent
from settings import get_float, get_int

log = logging.getLogger(__name__)

GraphFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

# r^p (log r)^j terms spanning each Fourier mode of a biharmonic function on an annulus
RADIAL_BASIS: Tuple[Tuple[int, int], ...] = ((0, 0), (2, 0), (0, 1), (2, 1))
MODE2_BASIS: Tuple[Tuple[int, int], ...] = ((2, 0), (4, 0), (-2, 0), (0, 0))
MODES = ('radial', 'cos2', 'sin2')

GRID_COLUMNS = ['r', 'theta', 'w']
SCALING_COLUMNS = ['alpha', 'beta', 'strip_sum', 'strip_ratio', 'removed_gap', 'middle_W', 'delta_W',
                   'predicted_delta_W', 'graph_ratio_max']


# --- Small matrix helpers ---

def trace_free(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return M - 0.5 * np.trace(M) * np.eye(2)


def frobenius(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.sum(np.asarray(A, dtype=float) * np.asarray(B, dtype=float)))


def _symmetric_2x2(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or not np.all(np.isfinite(M)):
        raise ParameterError(f"{name} must be a finite 2x2 matrix, got shape {M.shape}.")
    if abs(M[0, 1] - M[1, 0]) > 1e-12 * max(1.0, float(np.max(np.abs(M)))):
        raise ParameterError(f"{name} is not symmetric: {M.tolist()}.")
    return 0.5 * (M + M.T)


def _chart_rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


# --- Parameters ---

@dataclass
class ConnectedSumParams:
    """
    Second fundamental forms at the gluing points and the three gluing
    scales. The outer surface is a graph of q(x) = x.Qx/2 near the
    origin, the inverted one a graph of x.Px/2 near infinity.
    """
    P: np.ndarray
    Q: np.ndarray
    alpha: float
    t_ratio: float
    gamma: float
    far_radius: float = 2.0
    graph_radius: float = 0.5

    def __post_init__(self):
        self.P = _symmetric_2x2(self.P, 'P')
        self.Q = _symmetric_2x2(self.Q, 'Q')

    @classmethod
    def from_config(cls, P, Q, alpha: float, config: Optional[configparser.ConfigParser] = None,
                    **overrides) -> 'ConnectedSumParams':
        values = {
            'gamma': get_float(config, 'gluing', 'gamma'),
            't_ratio': get_float(config, 'gluing', 't_ratio'),
            'far_radius': get_float(config, 'gluing', 'far_radius'),
            'graph_radius': get_float(config, 'gluing', 'graph_radius'),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(P=P, Q=Q, alpha=alpha, **values)

    @property
    def P0(self) -> np.ndarray:
        return trace_free(self.P)

    @property
    def Q0(self) -> np.ndarray:
        return trace_free(self.Q)

    @property
    def e(self) -> float:
        return 0.5 * (self.Q[0, 0] + self.Q[1, 1])

    @property
    def beta(self) -> float:
        return self.t_ratio * self.alpha

    @property
    def frobenius(self) -> float:
        return frobenius(self.P0, self.Q0)

    @property
    def strip_width(self) -> float:
        return math.sqrt(self.alpha)

    def validate(self, require_orientation: bool = True) -> None:
        a, g, t = self.alpha, self.gamma, self.t_ratio
        for name, value in (('alpha', a), ('gamma', g), ('t_ratio', t),
                            ('far_radius', self.far_radius), ('graph_radius', self.graph_radius)):
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be a positive number, got {value}.")
        if not a < g < 1.0:
            raise ParameterError(f"Scales must satisfy 0 < alpha < gamma < 1, got alpha={a}, gamma={g}.")
        if a / g > 0.1:
            raise ParameterError(f"alpha/gamma = {a / g:.4g} exceeds 0.1; the scales are not separated.")
        if g - self.strip_width <= a * self.far_radius:
            raise ParameterError(
                f"Inner strip [{g - self.strip_width:.4g}, {g:.4g}] reaches the far-field radius {a * self.far_radius:.4g}.")
        if 1.0 + self.strip_width >= self.graph_radius / self.beta:
            raise ParameterError(
                f"Outer strip end {1.0 + self.strip_width:.4g} exceeds the graph radius {self.graph_radius / self.beta:.4g}.")
        if require_orientation and self.frobenius <= 0:
            raise OrientationError(
                f"<P0, Q0> = {self.frobenius:.6g} is not positive; rotate the chart with normalize_orientation first.")


def normalize_orientation(P, Q) -> Tuple[np.ndarray, float]:
    """
    Rotates the chart of the outer surface so its trace-free part lines up
    with P0. Returns the rotated Q and the rotation angle.
    """
    P = _symmetric_2x2(P, 'P')
    Q = _symmetric_2x2(Q, 'Q')
    P0, Q0 = trace_free(P), trace_free(Q)
    if np.linalg.norm(P0) < 1e-14 or np.linalg.norm(Q0) < 1e-14:
        raise OrientationError("A trace-free part vanishes; no rotation makes <P0, Q0> positive.")
    angle_p = math.atan2(P0[0, 1], P0[0, 0])
    angle_q = math.atan2(Q0[0, 1], Q0[0, 0])
    # the trace-free part turns by twice the chart angle
    angle = 0.5 * (angle_q - angle_p)
    R = _chart_rotation(angle)
    rotated = R.T @ Q @ R
    rotated = 0.5 * (rotated + rotated.T)
    log.debug(f"Rotated chart by {angle:.6f} rad; <P0, Q0> = {frobenius(P0, trace_free(rotated)):.6g}")
    return rotated, angle


def mirror_case_two(P, inverted_intH: float) -> Tuple[np.ndarray, float]:
    """
    Applies x -> (-y, x, -z) to the inverted surface. Its trace-free form is
    unchanged, the trace flips, and so does its total mean curvature.
    """
    P = _symmetric_2x2(P, 'P')
    R = _chart_rotation(0.5 * math.pi)
    mirrored = -(R.T @ P @ R)
    return 0.5 * (mirrored + mirrored.T), -float(inverted_intH)


def choose_t_ratio(P, Q, margin: float = 2.0) -> float:
    """A ratio beta/alpha with t <P0,Q0> = margin |P0|^2, so the energy term is negative for margin > 1."""
    P0, Q0 = trace_free(_symmetric_2x2(P, 'P')), trace_free(_symmetric_2x2(Q, 'Q'))
    inner = frobenius(P0, Q0)
    if inner <= 0:
        raise OrientationError(f"<P0, Q0> = {inner:.6g} is not positive.")
    return margin * frobenius(P0, P0) / inner


# --- Biharmonic annulus ---

def _term_value(r, p: int, j: int):
    r = np.asarray(r, dtype=float)
    return r ** p * np.log(r) ** j


def _term_derivative(r, p: int, j: int):
    r = np.asarray(r, dtype=float)
    log_r = np.log(r)
    value = p * r ** (p - 1) * log_r ** j
    if j > 0:
        value = value + j * r ** (p - 1) * log_r ** (j - 1)
    return value


def laplacian_terms(terms: Dict[Tuple[int, int], float], m: int) -> Dict[Tuple[int, int], float]:
    """
    Laplacian of sum c r^p (log r)^j cos(m theta), returned in the same
    representation.
    """
    out: Dict[Tuple[int, int], float] = {}

    def add(key, value):
        if value != 0.0:
            out[key] = out.get(key, 0.0) + value

    for (p, j), c in terms.items():
        add((p - 2, j), c * (p * p - m * m))
        if j >= 1:
            add((p - 2, j - 1), c * 2.0 * p * j)
        if j >= 2:
            add((p - 2, j - 2), c * j * (j - 1))
    return out


def _evaluate_terms(terms: Dict[Tuple[int, int], float], r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    total = np.zeros_like(r)
    for (p, j), c in terms.items():
        total = total + c * _term_value(r, p, j)
    return total


@dataclass
class AnnulusBoundaryData:
    """(value at gamma, d/dr at gamma, value at 1, d/dr at 1) for each Fourier mode."""
    radial: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    cos2: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    sin2: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def mode(self, name: str) -> np.ndarray:
        values = np.asarray(getattr(self, name), dtype=float)
        if values.shape != (4,) or not np.all(np.isfinite(values)):
            raise ParameterError(f"Boundary data for mode '{name}' must be four finite numbers, got {values}.")
        return values


def _basis_for(mode: str) -> Tuple[Tuple[int, int], ...]:
    return RADIAL_BASIS if mode == 'radial' else MODE2_BASIS


def mode_matrix(gamma: float, mode: str) -> np.ndarray:
    basis = _basis_for(mode)
    rows = [
        [_term_value(gamma, p, j) for p, j in basis],
        [_term_derivative(gamma, p, j) for p, j in basis],
        [_term_value(1.0, p, j) for p, j in basis],
        [_term_derivative(1.0, p, j) for p, j in basis],
    ]
    return np.array(rows, dtype=float)


@dataclass
class BiharmonicAnnulusSolution:
    """w(r, theta) = k(r) + g(r) cos 2theta + h(r) sin 2theta on gamma <= r <= 1."""
    gamma: float
    radial: np.ndarray
    cos2: np.ndarray
    sin2: np.ndarray
    conditions: Dict[str, float] = field(default_factory=dict)

    def terms(self, mode: str) -> Dict[Tuple[int, int], float]:
        coefficients = getattr(self, mode)
        return {key: float(c) for key, c in zip(_basis_for(mode), coefficients)}

    def mode_values(self, mode: str, r) -> np.ndarray:
        return _evaluate_terms(self.terms(mode), r)

    def mode_derivatives(self, mode: str, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        total = np.zeros_like(r)
        for (p, j), c in self.terms(mode).items():
            total = total + c * _term_derivative(r, p, j)
        return total

    def _combine(self, parts: Dict[str, np.ndarray], theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return parts['radial'] + parts['cos2'] * np.cos(2.0 * theta) + parts['sin2'] * np.sin(2.0 * theta)

    def evaluate(self, r, theta) -> np.ndarray:
        return self._combine({m: self.mode_values(m, r) for m in MODES}, theta)

    def radial_derivative(self, r, theta) -> np.ndarray:
        return self._combine({m: self.mode_derivatives(m, r) for m in MODES}, theta)

    def laplacian(self, r, theta) -> np.ndarray:
        parts = {m: _evaluate_terms(laplacian_terms(self.terms(m), 0 if m == 'radial' else 2), r) for m in MODES}
        return self._combine(parts, theta)

    def bilaplacian(self, r, theta) -> np.ndarray:
        parts = {}
        for m in MODES:
            order = 0 if m == 'radial' else 2
            parts[m] = _evaluate_terms(laplacian_terms(laplacian_terms(self.terms(m), order), order), r)
        return self._combine(parts, theta)

    def boundary_mismatch(self, bc: AnnulusBoundaryData) -> float:
        worst = 0.0
        for m in MODES:
            got = np.array([
                self.mode_values(m, self.gamma), self.mode_derivatives(m, self.gamma),
                self.mode_values(m, 1.0), self.mode_derivatives(m, 1.0),
            ], dtype=float)
            worst = max(worst, float(np.max(np.abs(got - bc.mode(m)))))
        return worst

    def laplacian_coefficients(self) -> Tuple[float, float]:
        """(c2, c4) with Delta k = c2 + c4 + 2 c4 log r."""
        _, C2, _, C4 = self.radial
        return float(4.0 * C2 + 2.0 * C4), float(2.0 * C4)

    def radial_laplacian_integral(self) -> float:
        """Integral of Delta w over the annulus from the coefficients; the cos/sin modes integrate to zero."""
        c2, c4 = self.laplacian_coefficients()
        g = self.gamma
        return c2 * math.pi * (1.0 - g * g) - 2.0 * c4 * g * g * math.pi * math.log(g)

    def laplacian_flux_integral(self) -> float:
        """Same integral through the boundary flux of the radial mode."""
        g = self.gamma
        return float(2.0 * math.pi * (self.mode_derivatives('radial', 1.0) - g * self.mode_derivatives('radial', g)))

    def to_dict(self) -> Dict[str, object]:
        return {
            'gamma': self.gamma,
            'radial': self.radial.tolist(),
            'cos2': self.cos2.tolist(),
            'sin2': self.sin2.tolist(),
            'conditions': dict(self.conditions),
        }


def biharmonic_annulus(gamma: float, bc: AnnulusBoundaryData, condition_limit: Optional[float] = None,
                       config: Optional[configparser.ConfigParser] = None) -> BiharmonicAnnulusSolution:
    """
    Solves Delta^2 w = 0 on gamma < r < 1 with the value and radial derivative
    of w prescribed on both circles, one 4x4 system per Fourier mode.
    """
    if not math.isfinite(gamma) or not 0.0 < gamma < 1.0:
        raise ParameterError(f"Inner radius gamma must lie in (0, 1), got {gamma}.")
    if condition_limit is None:
        condition_limit = get_float(config, 'constructions', 'condition_limit')
    solved, conditions = {}, {}
    for m in MODES:
        M = mode_matrix(gamma, m)
        cond = float(np.linalg.cond(M))
        conditions[m] = cond
        if not math.isfinite(cond) or cond > condition_limit:
            raise IllConditionedError(
                f"Annulus system for mode '{m}' has condition {cond:.3g} > {condition_limit:.3g} at gamma = {gamma}.")
        solved[m] = np.linalg.solve(M, bc.mode(m))
    log.debug(f"Biharmonic annulus at gamma={gamma}: conditions {', '.join(f'{k}={v:.3g}' for k, v in conditions.items())}")
    return BiharmonicAnnulusSolution(gamma=gamma, radial=solved['radial'], cos2=solved['cos2'],
                                     sin2=solved['sin2'], conditions=conditions)


# --- Error graphs and the cutoff ---

def default_far_field_error(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Error of the inverted surface's graph near infinity; decays like 1/|x|."""
    r2 = x * x + y * y
    return 0.25 / np.sqrt(r2) + 0.5 * x / r2


def default_taylor_error(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cubic remainder of the outer surface's graph at the gluing point."""
    return 0.3 * x ** 3 - 0.2 * x * y * y + 0.1 * y ** 3


def cutoff(s, alpha: float) -> np.ndarray:
    """Quintic ramp: 0 for s <= sqrt(alpha)/4, 1 for s >= 3 sqrt(alpha)/4, C2 in between."""
    root = math.sqrt(alpha)
    tau = np.clip((np.asarray(s, dtype=float) - 0.25 * root) / (0.5 * root), 0.0, 1.0)
    return tau ** 3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def _fd_jets(f: GraphFunction, x: np.ndarray, y: np.ndarray, h: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """|f|, |Df| and the Frobenius |D^2 f| by central differences with per-point step h."""
    f0 = f(x, y)
    fxp, fxm = f(x + h, y), f(x - h, y)
    fyp, fym = f(x, y + h), f(x, y - h)
    fx = (fxp - fxm) / (2.0 * h)
    fy = (fyp - fym) / (2.0 * h)
    fxx = (fxp - 2.0 * f0 + fxm) / h ** 2
    fyy = (fyp - 2.0 * f0 + fym) / h ** 2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h ** 2)
    return np.abs(f0), np.hypot(fx, fy), np.sqrt(fxx ** 2 + 2.0 * fxy ** 2 + fyy ** 2)


def _sample_disk(rng: np.random.Generator, r_min: float, r_max: float, count: int) -> Tuple[np.ndarray, np.ndarray]:
    radii = np.exp(rng.uniform(math.log(r_min), math.log(r_max), count))
    angles = rng.uniform(0.0, 2.0 * math.pi, count)
    return radii * np.cos(angles), radii * np.sin(angles)


def far_field_bound(phi: GraphFunction, far_radius: float, samples: int = 200, seed: int = 0) -> float:
    """Sampled sup of |z| (|phi| + |z||D phi| + |z|^2 |D^2 phi|) over |z| >= far_radius."""
    x, y = _sample_disk(np.random.default_rng(seed), far_radius, 1e3 * far_radius, samples)
    r = np.hypot(x, y)
    f0, f1, f2 = _fd_jets(phi, x, y, 1e-4 * r)
    return float(np.max(r * (f0 + r * f1 + r * r * f2)))


def taylor_bound(psi: GraphFunction, graph_radius: float, samples: int = 200, seed: int = 0) -> float:
    """Sampled sup of (|psi| + |z||D psi| + |z|^2 |D^2 psi|) / |z|^3 over 0 < |z| <= graph_radius."""
    x, y = _sample_disk(np.random.default_rng(seed), 1e-3 * graph_radius, graph_radius, samples)
    r = np.hypot(x, y)
    f0, f1, f2 = _fd_jets(psi, x, y, 1e-3 * r)
    return float(np.max((f0 + r * f1 + r * r * f2) / r ** 3))


# --- The glued graph region ---

def middle_boundary_data(params: ConnectedSumParams) -> AnnulusBoundaryData:
    """Matches the inverted far field at r = gamma and the quadratic Taylor graph at r = 1."""
    a_p, b_p = params.P0[0, 0], params.P0[0, 1]
    a_q, b_q = params.Q0[0, 0], params.Q0[0, 1]
    alpha, beta, e = params.alpha, params.beta, params.e
    return AnnulusBoundaryData(
        radial=(0.0, 0.0, 0.5 * beta * e, beta * e),
        cos2=(0.5 * alpha * a_p, 0.0, 0.5 * beta * a_q, beta * a_q),
        sin2=(0.5 * alpha * b_p, 0.0, 0.5 * beta * b_q, beta * b_q),
    )


@dataclass
class GluedRegion:
    params: ConnectedSumParams
    solution: BiharmonicAnnulusSolution
    r: np.ndarray
    theta: np.ndarray
    w: np.ndarray
    segments: Dict[str, Tuple[int, int]]
    report: FunctionalReport
    middle_W: float
    delta_W: float
    strip_outer: float
    strip_inner: float
    middle_integral: float
    middle_coefficient_integral: float
    removed_disk: float
    graph_ratio_max: float
    max_slope: float
    far_field_constant: float
    taylor_constant: float

    @property
    def two_beta_pi_e(self) -> float:
        return 2.0 * math.pi * self.params.beta * self.params.e

    @property
    def strip_sum(self) -> float:
        return abs(self.strip_outer) + abs(self.strip_inner)

    @property
    def middle_gap(self) -> float:
        return self.middle_integral - self.two_beta_pi_e

    @property
    def removed_gap(self) -> float:
        return self.removed_disk - self.two_beta_pi_e

    def summary(self) -> Dict[str, float]:
        return {
            'alpha': self.params.alpha,
            'beta': self.params.beta,
            'strip_sum': self.strip_sum,
            'strip_ratio': self.strip_sum / self.params.alpha ** 1.5,
            'removed_gap': self.removed_gap,
            'middle_W': self.middle_W,
            'delta_W': self.delta_W,
            'graph_ratio_max': self.graph_ratio_max,
        }


class _GluedGraph:
    """Piecewise w: inverted far field, biharmonic middle, Taylor graph outside."""

    def __init__(self, params: ConnectedSumParams, solution: BiharmonicAnnulusSolution,
                 phi: GraphFunction, psi: GraphFunction):
        self.params = params
        self.solution = solution
        self.phi = phi
        self.psi = psi

    def inner_far_field(self, x, y):
        a = self.params.alpha
        return a * self.phi(x / a, y / a)

    def inner_quadratic(self, theta):
        P0, a = self.params.P0, self.params.alpha
        return 0.5 * a * (P0[0, 0] * np.cos(2.0 * theta) + P0[0, 1] * np.sin(2.0 * theta))

    def outer_quadratic(self, x, y):
        Q, b = self.params.Q, self.params.beta
        return 0.5 * b * (Q[0, 0] * x * x + 2.0 * Q[0, 1] * x * y + Q[1, 1] * y * y)

    def outer_taylor(self, x, y):
        b = self.params.beta
        return self.psi(b * x, b * y) / b

    def unglued_inner(self, r, theta) -> np.ndarray:
        """The inverted surface alone, with no cutoff."""
        x, y = r * np.cos(theta), r * np.sin(theta)
        return self.inner_quadratic(theta) + self.inner_far_field(x, y)

    def unglued_outer(self, r, theta) -> np.ndarray:
        x, y = r * np.cos(theta), r * np.sin(theta)
        return self.outer_quadratic(x, y) + self.outer_taylor(x, y)

    def __call__(self, r, theta) -> np.ndarray:
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        x, y = r * np.cos(theta), r * np.sin(theta)
        gamma, alpha = self.params.gamma, self.params.alpha
        w = np.empty_like(r)
        inner = r < gamma
        outer = r > 1.0
        middle = ~(inner | outer)
        if np.any(inner):
            w[inner] = (self.inner_quadratic(theta[inner])
                        + cutoff(gamma - r[inner], alpha) * self.inner_far_field(x[inner], y[inner]))
        if np.any(middle):
            w[middle] = self.solution.evaluate(r[middle], theta[middle])
        if np.any(outer):
            w[outer] = (self.outer_quadratic(x[outer], y[outer])
                        + cutoff(r[outer] - 1.0, alpha) * self.outer_taylor(x[outer], y[outer]))
        return w


def _circle_flux(f: Callable, r: float, n_theta: int) -> float:
    """Integral of r * df/dr over the circle of radius r, i.e. the Laplacian integral's boundary term."""
    theta = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    h = 1e-4 * r
    # fourth-order central difference
    dr = (-f(r + 2 * h, theta) + 8 * f(r + h, theta) - 8 * f(r - h, theta) + f(r - 2 * h, theta)) / (12.0 * h)
    return float(r * np.sum(dr) * 2.0 * math.pi / n_theta)


def _radial_nodes(params: ConnectedSumParams, config: Optional[configparser.ConfigParser]) \
        -> Tuple[np.ndarray, Dict[str, Tuple[int, int]]]:
    a, g, root = params.alpha, params.gamma, params.strip_width
    pieces = [
        ('inner', np.geomspace(a * params.far_radius, g - root, get_int(config, 'gluing', 'inner_samples'))),
        ('inner_strip', np.linspace(g - root, g, get_int(config, 'gluing', 'strip_samples'))),
        ('middle', np.geomspace(g, 1.0, get_int(config, 'gluing', 'middle_samples'))),
        ('outer_strip', np.linspace(1.0, 1.0 + root, get_int(config, 'gluing', 'strip_samples'))),
        ('outer', np.geomspace(1.0 + root, params.graph_radius / params.beta, get_int(config, 'gluing', 'outer_samples'))),
    ]
    nodes = [pieces[0][1]]
    segments = {pieces[0][0]: (0, len(pieces[0][1]) - 1)}
    start = len(pieces[0][1]) - 1
    for name, values in pieces[1:]:
        # shared endpoints appear once
        values = values.copy()
        values[0] = nodes[-1][-1]
        nodes.append(values[1:])
        segments[name] = (start, start + len(values) - 1)
        start += len(values) - 1
    return np.concatenate(nodes), segments


def _polar_derivatives(f: np.ndarray, r: np.ndarray) -> Dict[str, np.ndarray]:
    """First and second polar derivatives on a (log r) x (periodic theta) grid."""
    s = np.log(r)
    f_s = np.gradient(f, s, axis=0, edge_order=2)
    f_ss = np.gradient(f_s, s, axis=0, edge_order=2)
    rr = r[:, None]
    f_r = f_s / rr
    f_rr = (f_ss - f_s) / rr ** 2
    n_theta = f.shape[1]
    k = np.fft.fftfreq(n_theta, d=1.0 / n_theta)
    ik = 1j * k
    F = np.fft.fft(f, axis=1)
    f_t = np.real(np.fft.ifft(ik * F, axis=1))
    f_tt = np.real(np.fft.ifft(ik * ik * F, axis=1))
    f_rt = np.real(np.fft.ifft(ik * np.fft.fft(f_r, axis=1), axis=1))
    return {'r': f_r, 'rr': f_rr, 't': f_t, 'tt': f_tt, 'rt': f_rt}


def graph_geometry(w: np.ndarray, r: np.ndarray, theta: np.ndarray) -> Dict[str, np.ndarray]:
    """Cartesian derivatives, mean curvature H and area element of the graph of w."""
    d = _polar_derivatives(w, r)
    rr = r[:, None]
    c, s = np.cos(theta)[None, :], np.sin(theta)[None, :]
    cs, c2s2 = c * s, c * c - s * s
    u_x = c * d['r'] - s / rr * d['t']
    u_y = s * d['r'] + c / rr * d['t']
    u_xx = (c * c * d['rr'] + s * s / rr * d['r'] + s * s / rr ** 2 * d['tt']
            - 2.0 * cs / rr * d['rt'] + 2.0 * cs / rr ** 2 * d['t'])
    u_yy = (s * s * d['rr'] + c * c / rr * d['r'] + c * c / rr ** 2 * d['tt']
            + 2.0 * cs / rr * d['rt'] - 2.0 * cs / rr ** 2 * d['t'])
    u_xy = (cs * d['rr'] - cs / rr * d['r'] - cs / rr ** 2 * d['tt']
            + c2s2 / rr * d['rt'] - c2s2 / rr ** 2 * d['t'])
    slope_sq = u_x ** 2 + u_y ** 2
    area_element = np.sqrt(1.0 + slope_sq)
    H = ((1.0 + u_y ** 2) * u_xx - 2.0 * u_x * u_y * u_xy + (1.0 + u_x ** 2) * u_yy) / area_element ** 3
    return {
        'H': H,
        'area_element': area_element,
        'laplacian': u_xx + u_yy,
        'slope': np.sqrt(slope_sq),
        'hessian_norm': np.sqrt(u_xx ** 2 + 2.0 * u_xy ** 2 + u_yy ** 2),
    }


def _region_integral(values: np.ndarray, r: np.ndarray, segment: Optional[Tuple[int, int]] = None) -> float:
    lo, hi = segment if segment is not None else (0, len(r) - 1)
    rows = slice(lo, hi + 1)
    n_theta = values.shape[1]
    radial = trapezoid(values[rows] * r[rows, None], r[rows], axis=0)
    return float(np.sum(radial) * 2.0 * math.pi / n_theta)


def _willmore_density(f: Callable, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
    geometry = graph_geometry(f(r[:, None], theta[None, :]), r, theta)
    return geometry['H'] ** 2 * geometry['area_element']


def graph_ratio(geometry: Dict[str, np.ndarray]) -> float:
    """max |H sqrt(det g) - Delta u| / (|Du| |D^2 u|) over grid points with |Du| <= 1."""
    scale = geometry['slope'] * geometry['hessian_norm']
    mask = (geometry['slope'] <= 1.0) & (scale > 1e-14)
    if not np.any(mask):
        return 0.0
    gap = np.abs(geometry['H'] * geometry['area_element'] - geometry['laplacian'])
    return float(np.max(gap[mask] / scale[mask]))


def glued_graph_region(params: ConnectedSumParams, phi_err: Optional[GraphFunction] = None,
                       psi_err: Optional[GraphFunction] = None,
                       config: Optional[configparser.ConfigParser] = None) -> GluedRegion:
    """
    Assembles w on alpha R < r < rho/beta: the rescaled inverted surface,
    cut off across the inner strip, the biharmonic interpolation on
    gamma < r < 1, and the rescaled Taylor graph, cut off across the
    outer strip. Laplacian integrals come from circle fluxes; H, area and
    W from the graph of w on a log-polar grid.
    """
    params.validate()
    phi = phi_err or default_far_field_error
    psi = psi_err or default_taylor_error
    limit = get_float(config, 'gluing', 'taylor_limit')
    phi_constant = far_field_bound(phi, params.far_radius)
    psi_constant = taylor_bound(psi, params.graph_radius)
    for name, value in (('far-field error', phi_constant), ('Taylor error', psi_constant)):
        if not math.isfinite(value) or value > limit:
            raise ParameterError(f"The {name} graph violates its decay bound: sampled constant {value:.4g} > {limit:.4g}.")

    solution = biharmonic_annulus(params.gamma, middle_boundary_data(params), config=config)
    graph = _GluedGraph(params, solution, phi, psi)
    n_theta = get_int(config, 'gluing', 'theta_samples')

    root = params.strip_width
    # the cutoffs are 1 at the far end of each strip
    outer_end = 1.0 + root
    removed_disk = _circle_flux(graph, outer_end, n_theta)
    strip_outer = removed_disk - 2.0 * math.pi * params.beta * params.e
    strip_inner = -_circle_flux(graph, params.gamma - root, n_theta)
    middle_integral = solution.laplacian_flux_integral()
    coefficient_integral = solution.radial_laplacian_integral()
    if abs(middle_integral - coefficient_integral) > 1e-10 * max(1.0, abs(middle_integral)):
        log.warning(f"⚠️ Middle Laplacian integral {middle_integral:.12g} differs from the coefficient form "
                    f"{coefficient_integral:.12g}.")

    r, segments = _radial_nodes(params, config)
    theta = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    w = graph(r[:, None], theta[None, :])
    geometry = graph_geometry(w, r, theta)
    H, dA = geometry['H'], geometry['area_element']
    intH = _region_integral(H * dA, r)
    A = _region_integral(dA, r)
    W = 0.25 * _region_integral(H * H * dA, r)
    middle_W = 0.25 * _region_integral(H * H * dA, r, segments['middle'])
    delta_W = 0.25 * _region_integral(H * H * dA - _willmore_density(graph.unglued_inner, r, theta)
                                      - _willmore_density(graph.unglued_outer, r, theta), r)
    report = FunctionalReport(W=W, T=intH / math.sqrt(A), A=A, V=float('nan'), iso=float('nan'),
                              total_mean_curvature=intH)
    region = GluedRegion(
        params=params, solution=solution, r=r, theta=theta, w=w, segments=segments, report=report,
        middle_W=middle_W, delta_W=delta_W, strip_outer=strip_outer, strip_inner=strip_inner,
        middle_integral=middle_integral, middle_coefficient_integral=coefficient_integral,
        removed_disk=removed_disk, graph_ratio_max=graph_ratio(geometry),
        max_slope=float(np.max(geometry['slope'])),
        far_field_constant=phi_constant, taylor_constant=psi_constant,
    )
    log.info(f"  - alpha={params.alpha:.3g}: strips {region.strip_sum:.6g}, "
             f"removed-disk gap {region.removed_gap:.6g}, middle W {middle_W:.6g}, dW {delta_W:.6g}")
    return region


def annulus_grid_frame(region: GluedRegion) -> pd.DataFrame:
    R, TH = np.meshgrid(region.r, region.theta, indexing='ij')
    return pd.DataFrame({'r': R.ravel(), 'theta': TH.ravel(), 'w': region.w.ravel()}, columns=GRID_COLUMNS)


# --- Leading-order estimates ---

@dataclass
class ConnectedSumReport:
    case: int
    alpha: float
    beta: float
    gamma: float
    t_ratio: float
    e: float
    frobenius: float
    p0_norm_sq: float
    energy_coefficient: float
    delta_W: float
    delta_T: float
    area_f2: float
    inverted_intH: float

    @property
    def energy_decreases(self) -> bool:
        return self.delta_W < 0

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data['energy_decreases'] = self.energy_decreases
        return data


def connected_sum_report(params: ConnectedSumParams, inverted_surface_intH: float, area_f2: float = 1.0,
                         case: int = 1) -> ConnectedSumReport:
    """
    Leading-order change of T and W when the two surfaces are glued:
    dT = alpha beta intH / sqrt(A(f2)) and dW = pi alpha^2 (|P0|^2 - t <P0,Q0>).
    Case 2 glues the mirrored inverted surface, flipping the sign of dT.
    """
    if case not in (1, 2):
        raise ParameterError(f"Unknown connected-sum case {case}; expected 1 or 2.")
    if not math.isfinite(area_f2) or area_f2 <= 0:
        raise ParameterError(f"Area of the outer surface must be positive, got {area_f2}.")
    if not math.isfinite(inverted_surface_intH):
        raise ParameterError("Total mean curvature of the inverted surface is not finite.")
    intH = float(inverted_surface_intH)
    if case == 2:
        mirrored, intH = mirror_case_two(params.P, intH)
        params = replace(params, P=mirrored)
    params.validate()

    p0_sq = frobenius(params.P0, params.P0)
    inner = params.frobenius
    coefficient = p0_sq - params.t_ratio * inner
    report = ConnectedSumReport(
        case=case, alpha=params.alpha, beta=params.beta, gamma=params.gamma, t_ratio=params.t_ratio,
        e=params.e, frobenius=inner, p0_norm_sq=p0_sq, energy_coefficient=coefficient,
        delta_W=math.pi * params.alpha ** 2 * coefficient,
        delta_T=params.alpha * params.beta * intH / math.sqrt(area_f2),
        area_f2=area_f2, inverted_intH=intH,
    )
    if report.energy_decreases:
        log.info(f"✅ Gluing lowers W by {-report.delta_W:.6g} (coefficient {coefficient:.6g}); dT = {report.delta_T:.6g}")
    else:
        log.warning(f"⚠️ Gluing does not lower W: coefficient {coefficient:.6g} >= 0; raise t above "
                    f"{p0_sq / inner:.6g}.")
    return report


@dataclass
class ScalingSummary:
    frame: pd.DataFrame
    exponents: Dict[str, Optional[float]]


def connected_sum_scaling(params: ConnectedSumParams, alphas: Sequence[float],
                          phi_err: Optional[GraphFunction] = None, psi_err: Optional[GraphFunction] = None,
                          config: Optional[configparser.ConfigParser] = None,
                          show_progress: bool = False) -> ScalingSummary:
    """Evaluates the glued region for each alpha (gamma, t fixed) and fits |y| ~ alpha^p per column."""
    log.info(f"--- Connected-sum scaling over {len(alphas)} values of alpha ---")
    rows = []
    for alpha in tqdm(alphas, desc="alpha", disable=not show_progress):
        scaled = replace(params, alpha=float(alpha))
        region = glued_graph_region(scaled, phi_err, psi_err, config=config)
        row = region.summary()
        row['predicted_delta_W'] = math.pi * scaled.alpha ** 2 * (frobenius(scaled.P0, scaled.P0) - scaled.t_ratio * scaled.frobenius)
        rows.append(row)
    frame = pd.DataFrame(rows, columns=SCALING_COLUMNS)
    exponents = {
        column: fit_decay_exponent(frame['alpha'], frame[column], floor=0.0)
        for column in ('strip_sum', 'removed_gap', 'middle_W', 'delta_W')
    }
    log.info("  - fitted exponents: " + ", ".join(
        f"{k}={'n/a' if v is None else f'{v:.3f}'}" for k, v in exponents.items()))
    return ScalingSummary(frame=frame, exponents=exponents)
