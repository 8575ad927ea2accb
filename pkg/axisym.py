# axisym.py

import configparser
import logging
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from tqdm import tqdm

from geometry_errors import (
    ConstructionError,
    GeometryError,
    InvalidGeometryError,
    InvalidProfileError,
    MeshParseError,
    ParameterError,
    ParametrizationError,
)
from settings import get_float, get_int
from table_io import read_table, write_table

log = logging.getLogger(__name__)

PROFILE_COLUMNS = ['s', 'gamma1', 'gamma2', 'theta', 'kappa']
THETA_WINDOW = (-math.pi / 2.0, 1.5 * math.pi)
SIX_PI = 6.0 * math.pi
AXIS_SNAP = 1e-9
ENDPOINT_TOLERANCE = 1e-8


def _kappa_from_theta(s: np.ndarray, theta: np.ndarray) -> np.ndarray:
    ds = np.diff(s)
    slope = np.divide(np.diff(theta), ds, out=np.zeros_like(ds), where=ds > 0)
    left = np.concatenate([[slope[0]], slope])
    right = np.concatenate([slope, [slope[-1]]])
    ds_left = np.concatenate([[ds[0]], ds])
    ds_right = np.concatenate([ds, [ds[-1]]])
    kappa = 0.5 * (left + right)
    kappa = np.where(ds_left == 0, right, kappa)
    kappa = np.where(ds_right == 0, left, kappa)
    return kappa


@dataclass
class ProfileCurve:
    """
    Generating curve (gamma1 = radius, gamma2 = height) of an axisymmetric
    sphere, sampled by arc length. kappa holds theta' per sample; a jump in
    curvature is stored as two samples at the same s.
    """
    s: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    theta: np.ndarray
    kappa: Optional[np.ndarray] = None

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float).ravel()
        self.gamma1 = np.asarray(self.gamma1, dtype=float).ravel()
        self.gamma2 = np.asarray(self.gamma2, dtype=float).ravel()
        self.theta = np.asarray(self.theta, dtype=float).ravel()
        n = len(self.s)
        if any(len(a) != n for a in (self.gamma1, self.gamma2, self.theta)):
            raise InvalidProfileError("Profile arrays have different lengths.")
        if n < 3:
            raise InvalidProfileError(f"Profile needs at least 3 samples, got {n}.")
        if np.any(np.diff(self.s) < 0):
            raise ParametrizationError("Arc length must be nondecreasing.")
        if self.kappa is None:
            self.kappa = _kappa_from_theta(self.s, self.theta)
        else:
            self.kappa = np.asarray(self.kappa, dtype=float).ravel()
            if len(self.kappa) != n:
                raise InvalidProfileError("kappa has the wrong length.")

    @property
    def n_samples(self) -> int:
        return len(self.s)

    @property
    def total_length(self) -> float:
        return float(self.s[-1] - self.s[0])

    def scaled(self, factor: float) -> 'ProfileCurve':
        if factor <= 0:
            raise ParameterError(f"Scale factor must be positive, got {factor}.")
        return ProfileCurve(self.s * factor, self.gamma1 * factor, self.gamma2 * factor,
                            self.theta.copy(), self.kappa / factor)

    def subsampled(self, count: int) -> 'ProfileCurve':
        """Every k-th sample, keeping both endpoints; used to revolve coarse meshes."""
        if count < 3:
            raise ParameterError(f"Need at least 3 samples, got {count}.")
        index = np.unique(np.round(np.linspace(0, self.n_samples - 1, count)).astype(int))
        return ProfileCurve(self.s[index], self.gamma1[index], self.gamma2[index],
                            self.theta[index], self.kappa[index])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'s': self.s, 'gamma1': self.gamma1, 'gamma2': self.gamma2,
                             'theta': self.theta, 'kappa': self.kappa})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> 'ProfileCurve':
        missing = [c for c in PROFILE_COLUMNS[:4] if c not in frame.columns]
        if missing:
            raise MeshParseError(f"Profile table is missing columns {missing}.")
        kappa = frame['kappa'].to_numpy(dtype=float) if 'kappa' in frame.columns else None
        return cls(frame['s'].to_numpy(dtype=float), frame['gamma1'].to_numpy(dtype=float),
                   frame['gamma2'].to_numpy(dtype=float), frame['theta'].to_numpy(dtype=float), kappa)


def profile_to_frame(curve: ProfileCurve) -> pd.DataFrame:
    return curve.to_frame()


def profile_from_frame(frame: pd.DataFrame) -> ProfileCurve:
    return ProfileCurve.from_frame(frame)


def write_profile(curve: ProfileCurve, path: Union[str, Path], config: Optional[Any] = None) -> Path:
    return write_table(curve.to_frame(), path, PROFILE_COLUMNS, config)


def read_profile(path: Union[str, Path]) -> ProfileCurve:
    return ProfileCurve.from_frame(read_table(path))


def validate_profile(curve: ProfileCurve, tolerance: float = 1e-5, require_closed: bool = True) -> None:
    """
    Raises when the samples are not a unit-speed curve with the recorded
    tangent angle, when theta(0) != 0, or when the radius vanishes inside.
    Each step is compared with the exact chord of a circular arc of the same
    turn, so lines and arcs pass at any resolution.
    """
    ds = np.diff(curve.s)
    dtheta = np.diff(curve.theta)
    dgamma = np.stack([np.diff(curve.gamma1), np.diff(curve.gamma2)], axis=1)
    mid = curve.theta[:-1] + 0.5 * dtheta
    chord = (ds * np.sinc(dtheta / (2.0 * np.pi)))[:, None] * np.stack([np.cos(mid), np.sin(mid)], axis=1)
    error = np.linalg.norm(dgamma - chord, axis=1)

    zero = ds == 0
    if np.any(zero & ((np.linalg.norm(dgamma, axis=1) > 1e-12) | (np.abs(dtheta) > 1e-9))):
        bad = int(np.flatnonzero(zero)[0])
        raise ParametrizationError(f"Repeated arc length at sample {bad} with a different point or angle.")
    violation = ~zero & (error > tolerance * ds + 1e-12)
    if np.any(violation):
        bad = int(np.flatnonzero(violation)[0])
        raise ParametrizationError(
            f"Step {bad} is not unit speed along theta (error {error[bad]:.3e} over ds {ds[bad]:.3e}).")
    if abs(curve.theta[0]) > 1e-9:
        raise InvalidProfileError(f"theta(0) must be 0, got {curve.theta[0]:.6g}.")

    interior = curve.gamma1[1:-1]
    if np.any(interior <= 0):
        bad = int(np.argmax(interior <= 0)) + 1
        raise InvalidProfileError(f"Radius gamma1 is not positive at interior sample {bad}.")
    if require_closed:
        if abs(curve.gamma1[0]) > ENDPOINT_TOLERANCE or abs(curve.gamma1[-1]) > ENDPOINT_TOLERANCE:
            raise InvalidProfileError("Profile endpoints are not on the axis.")
        if abs(math.sin(curve.theta[0])) > 1e-6 or abs(math.sin(curve.theta[-1])) > 1e-6:
            raise InvalidProfileError("Profile does not meet the axis perpendicularly.")


# --- Quadrature ---

def _pole_value(s: np.ndarray, values: np.ndarray, at_start: bool) -> float:
    # linear extrapolation from the two nearest samples with distinct s
    if at_start:
        j = int(np.flatnonzero(s > s[0])[0])
        k = int(np.flatnonzero(s > s[j])[0])
        pole = s[0]
    else:
        j = int(np.flatnonzero(s < s[-1])[-1])
        k = int(np.flatnonzero(s < s[j])[-1])
        pole = s[-1]
    return float(values[j] + (values[j] - values[k]) * (pole - s[j]) / (s[j] - s[k]))


def principal_curvatures(curve: ProfileCurve) -> Tuple[np.ndarray, np.ndarray]:
    """(kappa1, kappa2) = (sin theta / gamma1, theta'); kappa1 at the poles by extrapolation."""
    g1 = curve.gamma1
    on_axis = g1 <= AXIS_SNAP
    kappa1 = np.divide(np.sin(curve.theta), g1, out=np.zeros_like(g1), where=~on_axis)
    if on_axis[0]:
        kappa1[0] = _pole_value(curve.s, kappa1, at_start=True)
    if on_axis[-1]:
        kappa1[-1] = _pole_value(curve.s, kappa1, at_start=False)
    return kappa1, curve.kappa


@dataclass
class AxisymReport:
    intH: float
    A: float
    W: float
    min_theta: float
    max_theta: float
    T: float
    lipschitz: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _integrals(curve: ProfileCurve, start: int = 0, stop: Optional[int] = None) -> Tuple[float, float, float]:
    sl = slice(start, None if stop is None else stop + 1)
    s = curve.s[sl]
    g1 = curve.gamma1[sl]
    theta = curve.theta[sl]
    kappa1, kappa2 = principal_curvatures(curve)
    kappa1, kappa2 = kappa1[sl], kappa2[sl]
    intH = 2.0 * math.pi * trapezoid(np.sin(theta) + g1 * kappa2, s)
    A = 2.0 * math.pi * trapezoid(g1, s)
    W = 0.5 * math.pi * trapezoid((kappa1 + kappa2) ** 2 * g1, s)
    return float(intH), float(A), float(W)


def axisym_functionals(curve: ProfileCurve, tolerance: float = 1e-5) -> AxisymReport:
    validate_profile(curve, tolerance, require_closed=False)
    intH, A, W = _integrals(curve)
    ds = np.diff(curve.s)
    steps = ds > 0
    lipschitz = float(np.max(np.abs(np.diff(curve.theta)[steps] / ds[steps]))) if np.any(steps) else 0.0
    return AxisymReport(intH=intH, A=A, W=W, min_theta=float(curve.theta.min()),
                        max_theta=float(curve.theta.max()), T=intH / math.sqrt(A), lipschitz=lipschitz)


def segment_functionals(curve: ProfileCurve, start: int, stop: int) -> Tuple[float, float, float]:
    """(intH, A, W) of the band swept by samples start..stop."""
    if not 0 <= start < stop < curve.n_samples:
        raise ParameterError(f"Bad sample range {start}..{stop}.")
    return _integrals(curve, start, stop)


@dataclass
class IdentityReport:
    lhs: float
    rhs: float
    gap: float
    cos_integral: float
    sin_integral: float
    height_gain: float
    boundary_term: float
    closed: bool


def both_integral_identities(curve: ProfileCurve, tolerance: float = 1e-5) -> IdentityReport:
    """
    Both sides of intH = 2 pi int (sin t + gamma1 t') = 2 pi int (sin t - t cos t),
    with the closure constraints int cos t = 0 and int sin t = height gain.
    An open profile is reported, not rejected.
    """
    validate_profile(curve, tolerance, require_closed=False)
    s, theta = curve.s, curve.theta
    lhs = 2.0 * math.pi * trapezoid(np.sin(theta) + curve.gamma1 * curve.kappa, s)
    rhs = 2.0 * math.pi * trapezoid(np.sin(theta) - theta * np.cos(theta), s)
    cos_integral = float(trapezoid(np.cos(theta), s))
    sin_integral = float(trapezoid(np.sin(theta), s))
    boundary = 2.0 * math.pi * (curve.gamma1[-1] * theta[-1] - curve.gamma1[0] * theta[0])
    closed = (abs(cos_integral) <= 1e-6 * max(curve.total_length, 1.0)
              and abs(curve.gamma1[0]) <= ENDPOINT_TOLERANCE and abs(curve.gamma1[-1]) <= ENDPOINT_TOLERANCE)
    if not closed:
        log.warning(f"⚠️ Profile is not closed: int cos(theta) = {cos_integral:.3e}.")
    return IdentityReport(lhs=float(lhs), rhs=float(rhs), gap=float(abs(lhs - rhs - boundary)),
                          cos_integral=cos_integral, sin_integral=sin_integral,
                          height_gain=float(curve.gamma2[-1] - curve.gamma2[0]),
                          boundary_term=float(boundary), closed=bool(closed))


# --- Builders ---

class ProfileBuilder:
    """
    Turtle for C^{1,1} profiles made of straight segments and circular arcs.
    Every piece starts at the current point with the current tangent angle.
    """

    def __init__(self, start: Sequence[float] = (0.0, 0.0), theta: float = 0.0,
                 line_step: float = 0.01, arc_angle_step: float = 0.02):
        if line_step <= 0 or arc_angle_step <= 0:
            raise ParameterError("Sampling steps must be positive.")
        self.line_step = line_step
        self.arc_angle_step = arc_angle_step
        self.x, self.z = float(start[0]), float(start[1])
        self.theta = float(theta)
        self.length = 0.0
        self._pieces: List[Tuple[np.ndarray, ...]] = []

    @classmethod
    def from_config(cls, config: Optional[configparser.ConfigParser], start=(0.0, 0.0), theta: float = 0.0,
                    line_step: Optional[float] = None, arc_angle_step: Optional[float] = None) -> 'ProfileBuilder':
        return cls(start, theta,
                   line_step if line_step is not None else get_float(config, 'axisym', 'line_step'),
                   arc_angle_step if arc_angle_step is not None else get_float(config, 'axisym', 'arc_angle_step'))

    def _push(self, u: np.ndarray, x: np.ndarray, z: np.ndarray, theta: np.ndarray, kappa: float) -> None:
        self._pieces.append((self.length + u, x, z, theta, np.full(len(u), kappa)))
        self.length += float(u[-1])
        self.x, self.z, self.theta = float(x[-1]), float(z[-1]), float(theta[-1])

    def line(self, length: float) -> 'ProfileBuilder':
        if length < 0:
            raise ParameterError(f"Line length must be nonnegative, got {length}.")
        if length == 0:
            return self
        n = max(int(math.ceil(length / self.line_step)), 1)
        u = np.linspace(0.0, length, n + 1)
        self._push(u, self.x + u * math.cos(self.theta), self.z + u * math.sin(self.theta),
                   np.full(n + 1, self.theta), 0.0)
        return self

    def arc(self, radius: float, turn: float) -> 'ProfileBuilder':
        """Circular arc turning by `turn` radians (positive is counter-clockwise)."""
        if radius <= 0:
            raise ParameterError(f"Arc radius must be positive, got {radius}.")
        if turn == 0:
            return self
        kappa = math.copysign(1.0 / radius, turn)
        length = radius * abs(turn)
        n = max(int(math.ceil(length / self.line_step)), int(math.ceil(abs(turn) / self.arc_angle_step)), 1)
        u = np.linspace(0.0, length, n + 1)
        cx = self.x - math.sin(self.theta) / kappa
        cz = self.z + math.cos(self.theta) / kappa
        theta = self.theta + kappa * u
        self._push(u, cx + np.sin(theta) / kappa, cz - np.cos(theta) / kappa, theta, kappa)
        return self

    def line_to_x(self, x_target: float) -> 'ProfileBuilder':
        c = math.cos(self.theta)
        if abs(c) < 1e-12 or (x_target - self.x) / c < -1e-12:
            raise ConstructionError(f"Heading {self.theta:.4f} never reaches x = {x_target}.")
        return self.line(max((x_target - self.x) / c, 0.0))

    def line_to_z(self, z_target: float) -> 'ProfileBuilder':
        s = math.sin(self.theta)
        if abs(s) < 1e-12 or (z_target - self.z) / s < -1e-12:
            raise ConstructionError(f"Heading {self.theta:.4f} never reaches z = {z_target}.")
        return self.line(max((z_target - self.z) / s, 0.0))

    def build(self) -> ProfileCurve:
        if not self._pieces:
            raise ConstructionError("Profile builder has no pieces.")
        s, x, z, theta, kappa = (np.concatenate(parts) for parts in zip(*self._pieces))
        for i in (0, -1):
            if abs(x[i]) <= AXIS_SNAP:
                x[i] = 0.0
        return ProfileCurve(s, x, z, theta, kappa)


def make_sphere_curve(radius: float = 1.0, samples: int = 10001) -> ProfileCurve:
    if radius <= 0:
        raise InvalidGeometryError(f"radius must be positive, got {radius}.")
    if samples < 3:
        raise ParameterError(f"samples must be at least 3, got {samples}.")
    s = np.linspace(0.0, math.pi * radius, samples)
    theta = s / radius
    gamma1 = radius * np.sin(theta)
    gamma1[0] = gamma1[-1] = 0.0
    return ProfileCurve(s, gamma1, -radius * np.cos(theta), theta, np.full(samples, 1.0 / radius))


def make_capsule_curve(radius: float = 1.0, cylinder_length: float = 2.0,
                       config: Optional[configparser.ConfigParser] = None) -> ProfileCurve:
    """Two hemispheres joined by a cylinder."""
    if radius <= 0 or cylinder_length < 0:
        raise InvalidGeometryError("Capsule needs a positive radius and a nonnegative cylinder length.")
    builder = ProfileBuilder.from_config(config, start=(0.0, -radius))
    builder.arc(radius, math.pi / 2).line(cylinder_length).arc(radius, math.pi / 2)
    return builder.build()


def make_hump_stack_curve(n: int, R: float, config: Optional[configparser.ConfigParser] = None,
                          line_step: Optional[float] = None, arc_radius: Optional[float] = None) -> ProfileCurve:
    """
    Outer shell (bottom line, outer wall, top line) followed by n humps that
    zig-zag back down between x = rho and x = R, all arcs of radius rho.
    rho is 1 for R > 3 and R/4 for 2 < R <= 3. Each hump adds
    (3 pi - 8) rho - pi R to the total mean curvature over 2 pi.
    """
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}.")
    if R <= 2:
        raise InvalidGeometryError(f"R={R} is too short for the hump stack; need R > 2.")
    rho = arc_radius if arc_radius is not None else (1.0 if R > 3 else R / 4.0)
    if not 0 < rho < R / 3.0:
        raise InvalidGeometryError(f"Arc radius {rho} must lie in (0, R/3) for R={R}.")
    builder = ProfileBuilder.from_config(config, line_step=line_step)
    builder.line(R).arc(rho, math.pi / 2).line((4 * n - 1) * rho).arc(rho, math.pi / 2).line(R - 2 * rho)
    for k in range(n):
        builder.arc(rho, math.pi).line(R - 3 * rho).arc(rho, -math.pi)
        if k < n - 1:
            builder.line(R - 3 * rho)
        else:
            builder.line_to_x(0.0)
    curve = builder.build()
    validate_profile(curve, get_float(config, 'axisym', 'unit_speed_tolerance'))
    log.debug(f"Hump stack n={n}, R={R}, rho={rho}: {curve.n_samples} samples, length {curve.total_length:.3f}")
    return curve


def make_slope_counterexample_curve(eps: float, delta: float, config: Optional[configparser.ConfigParser] = None,
                                    line_step: Optional[float] = None,
                                    arc_angle_step: Optional[float] = None) -> ProfileCurve:
    """
    Closed profile whose tangent angle leaves [-pi/2, 3pi/2] by eps on both
    sides: unit horizontal lines, two slopes of length 1/eps, arcs of radius
    delta, and a vertical wall sized so both poles sit at distance delta from
    the origin.
    """
    if not 0 < eps <= 0.5:
        raise ParameterError(f"eps must lie in (0, 0.5], got {eps}.")
    if not 0 < delta <= 0.05:
        raise ParameterError(f"delta must lie in (0, 0.05], got {delta}.")
    turn = math.pi / 2 + eps
    b = ProfileBuilder.from_config(config, start=(0.0, -delta), line_step=line_step, arc_angle_step=arc_angle_step)
    b.line(1.0).arc(delta, -turn).line(1.0 / eps).arc(delta, turn).line(1.0).arc(delta, math.pi / 2)
    wall = -2.0 * b.z
    if wall <= 0:
        raise ConstructionError(f"Lower half ends above the origin (z = {b.z:.6g}).")
    b.line(wall).arc(delta, math.pi / 2).line(1.0).arc(delta, turn).line(1.0 / eps).arc(delta, -turn)
    b.line_to_x(0.0)
    curve = b.build()
    if abs(curve.gamma2[-1] - delta) > 1e-8:
        raise ConstructionError(f"Upper pole at z = {curve.gamma2[-1]:.10f}, expected {delta}.")
    try:
        validate_profile(curve, get_float(config, 'axisym', 'unit_speed_tolerance'))
    except InvalidProfileError as e:
        raise ConstructionError(f"Counterexample profile is invalid for eps={eps}, delta={delta}: {e}") from e
    return curve


def _segment_cos_mean(theta0: float, theta1: float) -> float:
    d = theta1 - theta0
    if abs(d) < 1e-12:
        return math.cos(theta0)
    return (math.sin(theta1) - math.sin(theta0)) / d


def random_admissible_curve(rng: np.random.Generator, knots: int = 8, amplitude: float = 1.0,
                            config: Optional[configparser.ConfigParser] = None,
                            max_attempts: int = 200) -> ProfileCurve:
    """
    Random closed profile with piecewise linear theta inside [-pi/2, 3pi/2].
    Closure int cos(theta) = 0 is enforced by rescaling the segments that
    move away from the axis; draws that touch the axis are rejected.
    """
    if knots < 2:
        raise ParameterError(f"knots must be at least 2, got {knots}.")
    lo, hi = THETA_WINDOW
    tolerance = get_float(config, 'axisym', 'unit_speed_tolerance')
    for _ in range(max_attempts):
        theta = math.pi * np.arange(knots + 1) / knots + amplitude * rng.uniform(-1.0, 1.0, knots + 1)
        theta = np.clip(theta, lo, hi)
        theta[0], theta[-1] = 0.0, math.pi
        lengths = rng.uniform(0.3, 1.5, knots)
        drift = lengths * np.array([_segment_cos_mean(a, b) for a, b in zip(theta[:-1], theta[1:])])
        outward, inward = drift[drift > 0].sum(), drift[drift < 0].sum()
        if outward <= 1e-9 or inward >= -1e-9:
            continue
        lengths = np.where(drift > 0, lengths * (-inward / outward), lengths)

        builder = ProfileBuilder.from_config(config)
        for a, b, length in zip(theta[:-1], theta[1:], lengths):
            if abs(b - a) < 1e-12:
                builder.line(length)
            else:
                builder.arc(length / abs(b - a), b - a)
        curve = builder.build()
        if curve.gamma2[-1] <= curve.gamma2[0]:
            continue
        try:
            validate_profile(curve, tolerance)
        except InvalidProfileError:
            continue
        return curve
    raise ConstructionError(f"No admissible curve after {max_attempts} draws.")


# --- Window and bound checks ---

@dataclass
class WindowVerdict:
    window_holds: bool
    holds: Optional[bool]
    intH: float
    threshold: float
    min_theta: float
    max_theta: float
    message: str


def check_theta_window_theorem(curve: ProfileCurve, report: Optional[AxisymReport] = None,
                               window_tolerance: float = 1e-9) -> WindowVerdict:
    """Inside the window the total mean curvature is nonnegative; outside, no claim."""
    report = report or axisym_functionals(curve)
    lo, hi = THETA_WINDOW
    window = report.min_theta >= lo - window_tolerance and report.max_theta <= hi + window_tolerance
    threshold = -1e-6 * math.sqrt(report.A)
    if not window:
        return WindowVerdict(False, None, report.intH, threshold, report.min_theta, report.max_theta,
                             "window violated, theorem not applicable")
    holds = report.intH >= threshold
    message = "intH >= 0 as predicted" if holds else f"intH = {report.intH:.6g} below {threshold:.3g}"
    if not holds:
        log.error(f"❌ Theta window holds but {message}.")
    return WindowVerdict(True, bool(holds), report.intH, threshold, report.min_theta, report.max_theta, message)


@dataclass
class SixPiVerdict:
    applicable: bool
    holds: Optional[bool]
    W: float
    intH: float
    variation_bound: float
    message: str


def variation_bound(curve: ProfileCurve) -> float:
    """2 pi + pi int |theta'| |sin theta|, a lower bound for W of any profile."""
    return float(2.0 * math.pi + math.pi * trapezoid(np.abs(curve.kappa) * np.abs(np.sin(curve.theta)), curve.s))


def check_sixpi_bound(curve: ProfileCurve, report: Optional[AxisymReport] = None) -> SixPiVerdict:
    report = report or axisym_functionals(curve)
    bound = variation_bound(curve)
    if report.intH > 0:
        return SixPiVerdict(False, None, report.W, report.intH, bound, "intH > 0, bound not applicable")
    holds = report.W >= SIX_PI - 1e-3
    message = f"W = {report.W:.6f} >= 6 pi" if holds else f"W = {report.W:.6f} below 6 pi"
    if not holds:
        log.error(f"❌ Nonpositive intH with {message}.")
    return SixPiVerdict(True, bool(holds), report.W, report.intH, bound, message)


def run_theta_window_suite(count: Optional[int] = None, seed: Optional[int] = None, knots: int = 8,
                           config: Optional[configparser.ConfigParser] = None,
                           show_progress: bool = False) -> Tuple[pd.DataFrame, int]:
    """
    Draws `count` admissible curves, each from its own child seed so any row can
    be reproduced alone, and counts curves inside the window with negative intH.
    """
    count = count if count is not None else get_int(config, 'axisym', 'random_suite_count')
    seed = seed if seed is not None else get_int(config, 'axisym', 'random_suite_seed')
    if count < 1:
        raise ParameterError(f"count must be at least 1, got {count}.")
    children = np.random.SeedSequence(seed).spawn(count)
    log.info(f"--- Theta-window suite: {count} curves, seed {seed} ---")
    rows: List[Dict[str, Any]] = []
    for index, child in enumerate(tqdm(children, desc='theta-window', disable=not show_progress)):
        row: Dict[str, Any] = {'seed': seed, 'index': index}
        try:
            curve = random_admissible_curve(np.random.default_rng(child), knots, config=config)
            report = axisym_functionals(curve)
            window = check_theta_window_theorem(curve, report, get_float(config, 'axisym', 'window_tolerance'))
            sixpi = check_sixpi_bound(curve, report)
            row.update({'intH': report.intH, 'A': report.A, 'W': report.W, 'T': report.T,
                        'min_theta': report.min_theta, 'max_theta': report.max_theta,
                        'window_holds': window.window_holds, 'theorem_holds': window.holds,
                        'sixpi_applicable': sixpi.applicable, 'sixpi_holds': sixpi.holds, 'error_flag': ''})
        except GeometryError as e:
            log.error(f"  - ❌ curve {index}: {e}")
            row['error_flag'] = type(e).__name__
        rows.append(row)
    frame = pd.DataFrame(rows)
    ok = frame['error_flag'] == ''
    violations = int((frame.loc[ok, 'window_holds'].eq(True) & frame.loc[ok, 'theorem_holds'].eq(False)).sum())
    if violations:
        log.error(f"❌ {violations} curves inside the window have negative total mean curvature.")
    else:
        log.info(f"✅ All {int(ok.sum())} admissible curves have nonnegative total mean curvature.")
    return frame, violations
