# mobius.py

import configparser
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from functionals import enclosed_volume, total_mean_curvature_ratio, willmore_energy
from geometry_errors import (
    GeometryError,
    InversionCenterError,
    ParameterError,
    PoleError,
    RayBlockedError,
    UnreachableTargetError,
)
from settings import get_float, get_int
from surface_mesh import TriangleMesh, compute_curvatures, refine_near

log = logging.getLogger(__name__)

SPHERE_T = 4.0 * math.sqrt(math.pi)
E3 = np.array([0.0, 0.0, 1.0])


@dataclass
class SweepSettings:
    hard_clearance: float = 1e-9
    sweep_clearance: float = 1e-6
    refine_levels_per_halving: int = 1
    refine_radius_factor: float = 4.0
    match_scan_points: int = 24
    match_max_iterations: int = 60
    match_tolerance: float = 1e-3

    @classmethod
    def from_config(cls, config: Optional[configparser.ConfigParser]) -> 'SweepSettings':
        return cls(
            hard_clearance=get_float(config, 'mobius', 'hard_clearance'),
            sweep_clearance=get_float(config, 'mobius', 'sweep_clearance'),
            refine_levels_per_halving=get_int(config, 'mobius', 'refine_levels_per_halving'),
            refine_radius_factor=get_float(config, 'mobius', 'refine_radius_factor'),
            match_scan_points=get_int(config, 'mobius', 'match_scan_points'),
            match_max_iterations=get_int(config, 'mobius', 'match_max_iterations'),
            match_tolerance=get_float(config, 'mobius', 'match_tolerance'),
        )


@dataclass
class InversionCenter:
    a: np.ndarray
    clearance: float
    t: Optional[float] = None
    achieved_T: Optional[float] = None
    iterations: int = 0
    monotone_scan: bool = True
    W_before: Optional[float] = None
    W_after: Optional[float] = None


@dataclass
class SweepSeries:
    kind: str
    params: List[float] = field(default_factory=list)
    T: List[float] = field(default_factory=list)
    W: List[float] = field(default_factory=list)
    error_flag: List[str] = field(default_factory=list)
    reference_T: float = float('nan')
    exponent: Optional[float] = None

    def ok_rows(self) -> np.ndarray:
        return np.array([flag == '' for flag in self.error_flag], dtype=bool)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'param': self.params, 'T': self.T, 'W': self.W, 'error_flag': self.error_flag})


# --- Point maps ---

def surface_clearance(mesh: TriangleMesh, point) -> float:
    """Distance from a point to the mesh, sampled at vertices, edge midpoints and face centroids."""
    point = np.asarray(point, dtype=float)
    v, f = mesh.vertices, mesh.faces
    edges = mesh.edges()
    samples = np.vstack([v, 0.5 * (v[edges[:, 0]] + v[edges[:, 1]]), v[f].mean(axis=1)])
    return float(np.min(np.linalg.norm(samples - point, axis=1)))


def invert_points(points: np.ndarray, a, recenter: bool = False) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    d = np.atleast_2d(points) - a
    image = d / np.sum(d * d, axis=1)[:, None]
    return image if recenter else a + image


def _outward(mesh: TriangleMesh) -> TriangleMesh:
    # A center inside the enclosed region turns the surface inside out.
    if enclosed_volume(mesh) < 0:
        return mesh.flipped()
    return mesh


def sphere_inversion(mesh: TriangleMesh, a, hard_clearance: float = 1e-9, recenter: bool = False) -> TriangleMesh:
    """
    x -> a + (x - a)/|x - a|^2, an involution. With recenter=True the image is
    translated by -a, which leaves every functional unchanged and keeps
    far-field images well conditioned. Faces are flipped since the map
    reverses orientation.
    """
    a = np.asarray(a, dtype=float)
    clearance = surface_clearance(mesh, a)
    limit = hard_clearance * mesh.bounding_box_diagonal()
    if clearance <= limit:
        raise InversionCenterError(f"Inversion center {a.tolist()} lies on the surface (clearance {clearance:.3g}).")
    image = invert_points(mesh.vertices, a, recenter=recenter)
    return _outward(TriangleMesh(image, mesh.faces[:, [0, 2, 1]].copy(), mesh.genus_hint))


def willmore_invariance_check(mesh: TriangleMesh, a, hard_clearance: float = 1e-9) -> Tuple[float, float, float]:
    W_before = willmore_energy(compute_curvatures(mesh))
    W_after = willmore_energy(compute_curvatures(sphere_inversion(mesh, a, hard_clearance)))
    rel_gap = abs(W_after - W_before) / W_before
    log.info(f"  - W before {W_before:.6f}, after {W_after:.6f}, relative gap {rel_gap:.3e}")
    return W_before, W_after, rel_gap


def stereographic_T(p) -> np.ndarray:
    """T(p) = e3 + 2 (p - e3)/|p - e3|^2; its own inverse."""
    p = np.asarray(p, dtype=float)
    d = np.atleast_2d(p) - E3
    sq = np.sum(d * d, axis=1)
    if np.any(sq <= 1e-24):
        raise PoleError("Point coincides with the pole e3.")
    image = E3 + 2.0 * d / sq[:, None]
    return image[0] if p.ndim == 1 else image


def apply_stereographic_T(mesh: TriangleMesh, hard_clearance: float = 1e-9) -> TriangleMesh:
    clearance = surface_clearance(mesh, E3)
    if clearance <= hard_clearance * max(mesh.bounding_box_diagonal(), 1.0):
        raise PoleError(f"Mesh passes through the pole e3 (clearance {clearance:.3g}).")
    return _outward(TriangleMesh(stereographic_T(mesh.vertices), mesh.faces[:, [0, 2, 1]].copy(), mesh.genus_hint,
                                 markers={k: v.copy() for k, v in mesh.markers.items()}))


def image_sphere(sigma: float) -> Tuple[float, float]:
    """Center height and radius of the image of the sphere |x| = sigma under the stereographic map."""
    if abs(1.0 - sigma ** 2) < 1e-15:
        raise PoleError("sigma = 1 maps to a plane.")
    zeta = -(1.0 + sigma ** 2) / (1.0 - sigma ** 2)
    rho = abs(2.0 * sigma / (1.0 - sigma ** 2))
    return zeta, rho


def best_fit_sphere(points: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """Least-squares sphere; returns (center, radius, max relative radial residual)."""
    p = np.asarray(points, dtype=float)
    A = np.hstack([2.0 * p, np.ones((len(p), 1))])
    b = np.sum(p * p, axis=1)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    center = sol[:3]
    radius = math.sqrt(sol[3] + center @ center)
    residual = np.max(np.abs(np.linalg.norm(p - center, axis=1) - radius)) / radius
    return center, radius, float(residual)


# --- Sweeps ---

def _T_and_W(mesh: TriangleMesh) -> Tuple[float, float]:
    curv = compute_curvatures(mesh)
    return total_mean_curvature_ratio(curv), willmore_energy(curv)


def fit_decay_exponent(x: Sequence[float], y: Sequence[float], floor: float = 1e-14) -> Optional[float]:
    """Slope of log|y| against log x, the exponent in |y| ~ C x^p. Points with |y| <= floor are dropped."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = (x > 0) & (y > floor) & np.isfinite(y)
    if np.count_nonzero(keep) < 2:
        return None
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


def run_rows(rows: Sequence, evaluate: Callable, jobs: int, label: str, show_progress: bool) -> List:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(tqdm(pool.map(evaluate, rows), total=len(rows), desc=label, disable=not show_progress))
    return [evaluate(row) for row in tqdm(rows, desc=label, disable=not show_progress)]


def blow_down_sweep(mesh: TriangleMesh, direction, radii: Sequence[float],
                    settings: Optional[SweepSettings] = None, jobs: int = 1,
                    show_progress: bool = False) -> SweepSeries:
    """T of I_a(mesh) for centers a = radius * direction moving off to infinity."""
    settings = settings or SweepSettings()
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ParameterError("Blow-down radii must be strictly increasing.")
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    T0, _ = _T_and_W(mesh)
    log.info(f"--- Blow-down sweep over {len(radii)} radii (T(mesh) = {T0:.6f}) ---")

    def evaluate(radius: float) -> Tuple[float, float, str]:
        try:
            image = sphere_inversion(mesh, radius * direction, settings.hard_clearance, recenter=True)
            T, W = _T_and_W(image)
            return T, W, ''
        except GeometryError as e:
            log.error(f"  - ❌ radius {radius:g}: {e}")
            return float('nan'), float('nan'), type(e).__name__

    results = run_rows(radii, evaluate, jobs, 'blow-down', show_progress)
    series = SweepSeries(kind='blowdown', reference_T=T0)
    for radius, (T, W, flag) in zip(radii, results):
        series.params.append(radius)
        series.T.append(T)
        series.W.append(W)
        series.error_flag.append(flag)
    ok = series.ok_rows()
    if np.count_nonzero(ok) >= 2:
        inv = 1.0 / np.asarray(series.params)[ok]
        series.exponent = fit_decay_exponent(inv, np.asarray(series.T)[ok] - T0)
        log.info(f"  - Fitted decay exponent: {series.exponent}")
    return series


def _blow_up_mesh(mesh: TriangleMesh, p: np.ndarray, t0: float, t: float, settings: SweepSettings) -> TriangleMesh:
    halvings = max(0, int(round(math.log2(t0 / t))))
    refined = mesh
    for j in range(1, halvings + 1):
        refined = refine_near(refined, p, settings.refine_radius_factor * t0 / 2 ** j,
                              levels=settings.refine_levels_per_halving)
    return refined


def blow_up_sweep(mesh: TriangleMesh, vertex_index: int, t_values: Sequence[float],
                  settings: Optional[SweepSettings] = None, jobs: int = 1,
                  show_progress: bool = False) -> SweepSeries:
    """
    T of I_gamma(t)(mesh) with gamma(t) = p - t n(p) approaching the surface.
    The mesh is refined around p each time t halves.
    """
    settings = settings or SweepSettings()
    t_values = [float(t) for t in t_values]
    if any(b >= a for a, b in zip(t_values, t_values[1:])):
        raise ParameterError("Blow-up t values must be strictly decreasing.")
    if not 0 <= vertex_index < mesh.n_vertices:
        raise ParameterError(f"vertex_index {vertex_index} out of range.")
    curv = compute_curvatures(mesh)
    p = mesh.vertices[vertex_index].copy()
    n = curv.normals[vertex_index]
    t0 = t_values[0]
    log.info(f"--- Blow-up sweep at vertex {vertex_index} over {len(t_values)} values ---")

    def evaluate(t: float) -> Tuple[float, float, str]:
        try:
            refined = _blow_up_mesh(mesh, p, t0, t, settings)
            center = p - t * n
            clearance = surface_clearance(refined, center)
            if clearance <= settings.sweep_clearance * refined.mean_edge_length():
                raise InversionCenterError(f"clearance {clearance:.3g} too small at t={t:g}")
            image = sphere_inversion(refined, center, settings.hard_clearance, recenter=True)
            T, W = _T_and_W(image)
            log.debug(f"  - t={t:g}: {refined.n_vertices} vertices, T={T:.6f}")
            return T, W, ''
        except GeometryError as e:
            log.error(f"  - ❌ t {t:g}: {e}")
            return float('nan'), float('nan'), type(e).__name__

    results = run_rows(t_values, evaluate, jobs, 'blow-up', show_progress)
    series = SweepSeries(kind='blowup', reference_T=SPHERE_T)
    for t, (T, W, flag) in zip(t_values, results):
        series.params.append(t)
        series.T.append(T)
        series.W.append(W)
        series.error_flag.append(flag)
    return series


def _outermost_vertex(mesh: TriangleMesh) -> int:
    centroid = mesh.vertices.mean(axis=0)
    return int(np.argmax(np.linalg.norm(mesh.vertices - centroid, axis=1)))


def match_T_by_inversion(mesh: TriangleMesh, target_T: float, vertex_index: Optional[int] = None,
                         settings: Optional[SweepSettings] = None) -> InversionCenter:
    """
    Finds a center on the ray gamma(t) = p - t n(p) with T(I_a(mesh)) = target_T,
    by a geometric scan in t followed by bisection in log t. T is measured on
    the mesh passed in, so inverting that mesh about `a` reproduces achieved_T.
    """
    settings = settings or SweepSettings()
    curv = compute_curvatures(mesh)
    T_mesh = total_mean_curvature_ratio(curv)
    W_mesh = willmore_energy(curv)
    gap = SPHERE_T - T_mesh
    lo, hi = min(T_mesh, SPHERE_T), max(T_mesh, SPHERE_T)
    margin = 1e-12 * max(1.0, abs(gap))
    if not (lo + margin < target_T < hi - margin):
        raise UnreachableTargetError(
            f"Target T={target_T} is not strictly between T(mesh)={T_mesh:.6f} and 4*sqrt(pi)={SPHERE_T:.6f}.")

    index = _outermost_vertex(mesh) if vertex_index is None else vertex_index
    p = mesh.vertices[index].copy()
    n = curv.normals[index]
    diameter = mesh.bounding_box_diagonal()
    t_min, t_max = 0.02 * diameter, 100.0 * diameter

    def T_at(t: float) -> float:
        center = p - t * n
        if surface_clearance(mesh, center) < 0.25 * t:
            raise RayBlockedError(f"Ray from vertex {index} meets the surface near t={t:g}.")
        return _T_and_W(sphere_inversion(mesh, center, settings.hard_clearance, recenter=True))[0]

    log.info(f"--- Matching T={target_T:.6f} along the ray from vertex {index} ---")
    ts = np.geomspace(t_min, t_max, settings.match_scan_points)
    Ts = np.array([T_at(t) for t in ts])
    diffs = np.diff(Ts)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    if not monotone:
        log.warning("⚠️ T is not monotone along the scanned ray; bisecting the first bracket.")
    sign = np.sign(Ts - target_T)
    brackets = np.flatnonzero(sign[:-1] * sign[1:] <= 0)
    if not len(brackets):
        raise UnreachableTargetError(
            f"Scan over t in [{t_min:.3g}, {t_max:.3g}] never crosses T={target_T:.6f} "
            f"(range {Ts.min():.6f}..{Ts.max():.6f}).")
    k = int(brackets[0])
    log_a, log_b = math.log(ts[k]), math.log(ts[k + 1])
    f_a = Ts[k] - target_T
    tolerance = settings.match_tolerance * abs(gap)

    t_star, T_star, iterations = ts[k], Ts[k], 0
    if abs(Ts[k + 1] - target_T) < abs(f_a):
        t_star, T_star = ts[k + 1], Ts[k + 1]
    while abs(T_star - target_T) > tolerance and iterations < settings.match_max_iterations:
        iterations += 1
        log_mid = 0.5 * (log_a + log_b)
        t_mid = math.exp(log_mid)
        T_mid = T_at(t_mid)
        t_star, T_star = t_mid, T_mid
        if (T_mid - target_T) * f_a > 0:
            log_a, f_a = log_mid, T_mid - target_T
        else:
            log_b = log_mid
    if abs(T_star - target_T) > tolerance:
        raise UnreachableTargetError(f"Bisection stopped after {iterations} iterations at T={T_star:.6f}.")

    a = p - t_star * n
    W_after = _T_and_W(sphere_inversion(mesh, a, settings.hard_clearance, recenter=True))[1]
    log.info(f"✅ Matched T={T_star:.6f} at t={t_star:.6g} after {iterations} bisection steps.")
    return InversionCenter(a=a, clearance=surface_clearance(mesh, a), t=float(t_star), achieved_T=float(T_star),
                           iterations=iterations, monotone_scan=monotone, W_before=W_mesh, W_after=W_after)
