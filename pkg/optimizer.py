# optimizer.py

import configparser
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh, splu
from tqdm import tqdm

from constructions import build_sigma_g
from functionals import (
    area,
    gradient_T,
    gradient_W,
    l2_inner,
    normal_variation,
    total_mean_curvature_ratio,
    willmore_energy,
)
from geometry_errors import (
    GeometryError,
    MeshParseError,
    ParameterError,
    QualityError,
    SphereDegenerateError,
    StagnationError,
)
from mobius import fit_decay_exponent, run_rows
from settings import get_bool, get_float, get_int
from surface_mesh import DiscreteCurvatures, TriangleMesh, build_icosphere, compute_curvatures, min_angle_degrees, require_valid

log = logging.getLogger(__name__)

TRACE_COLUMNS = ['iter', 'W', 'T', 'A', 'lambda', 'residual', 'accepted']
BETA0_COLUMNS = ['R', 'best_W', 'lambda', 'residual', 'W_floor', 'seeds_ok', 'converged', 'error_flag']
SPHERE_T = 4.0 * math.sqrt(math.pi)
BRIDGE_T = math.sqrt(32.0 * math.pi)


@dataclass
class FlowConfig:
    target_R: float = 7.2
    step: float = 0.5
    max_iters: int = 400
    constraint_tolerance: float = 1e-3
    residual_tolerance: float = 1e-2
    tangential_smoothing_weight: float = 0.2
    smoothing_interval: int = 5
    area_renormalize: bool = True
    sobolev_weight: float = 1.0
    armijo: float = 1e-4
    max_line_search_failures: int = 30
    min_angle_degrees: float = 1.0
    restoration_max_steps: int = 20
    basis_size: int = 25
    fd_step: float = 1e-5

    def __post_init__(self):
        if not math.isfinite(self.target_R):
            raise ParameterError(f"target_R must be finite, got {self.target_R}.")
        if not self.step > 0:
            raise ParameterError(f"step must be positive, got {self.step}.")
        if self.constraint_tolerance <= 0 or self.residual_tolerance <= 0:
            raise ParameterError("Flow tolerances must be positive.")
        if self.max_iters < 1 or self.max_line_search_failures < 1 or self.restoration_max_steps < 1:
            raise ParameterError("Iteration limits must be at least 1.")
        if self.sobolev_weight < 0 or self.tangential_smoothing_weight < 0 or self.smoothing_interval < 0:
            raise ParameterError("Smoothing weights and interval must be nonnegative.")
        if self.basis_size < 2:
            raise ParameterError(f"basis_size must be at least 2, got {self.basis_size}.")
        if not self.fd_step > 0:
            raise ParameterError(f"fd_step must be positive, got {self.fd_step}.")

    @classmethod
    def from_config(cls, config: Optional[configparser.ConfigParser] = None, **overrides) -> 'FlowConfig':
        values = {}
        for f in fields(cls):
            if f.type in (bool, 'bool'):
                values[f.name] = get_bool(config, 'flow', f.name)
            elif f.type in (int, 'int'):
                values[f.name] = get_int(config, 'flow', f.name)
            else:
                values[f.name] = get_float(config, 'flow', f.name)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_json(cls, path: Union[str, Path], config: Optional[configparser.ConfigParser] = None,
                  **overrides) -> 'FlowConfig':
        """The [flow] section overlaid with the keys of a JSON object."""
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except (OSError, json.JSONDecodeError) as e:
            raise MeshParseError(f"Could not read flow config '{path}': {e}") from e
        if not isinstance(data, dict):
            raise MeshParseError(f"Flow config '{path}' must hold a JSON object.")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise MeshParseError(f"Unknown flow config keys in '{path}': {', '.join(unknown)}")
        base = cls.from_config(config)
        merged = {**asdict(base), **data}
        merged.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**merged)
        except TypeError as e:
            raise MeshParseError(f"Bad flow config '{path}': {e}") from e

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class FlowRecord:
    iteration: int
    W: float
    T: float
    A: float
    lam: float
    residual: float
    accepted: bool


@dataclass
class FlowTrace:
    target_R: float
    records: List[FlowRecord] = field(default_factory=list)
    converged: bool = False

    def add(self, iteration: int, W: float, T: float, A: float, lam: float, residual: float, accepted: bool) -> None:
        self.records.append(FlowRecord(iteration, W, T, A, lam, residual, accepted))

    @property
    def final(self) -> Optional[FlowRecord]:
        return self.records[-1] if self.records else None

    def accepted_energies(self) -> np.ndarray:
        return np.array([r.W for r in self.records if r.accepted], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        rows = [{'iter': r.iteration, 'W': r.W, 'T': r.T, 'A': r.A, 'lambda': r.lam,
                 'residual': r.residual, 'accepted': r.accepted} for r in self.records]
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)


# --- Directions ---

def sobolev_smoother(curv: DiscreteCurvatures, weight: float) -> Callable[[np.ndarray], np.ndarray]:
    """g -> (M - tau L)^-1 M g, tau = weight times the mean vertex area."""
    if weight <= 0:
        return lambda g: np.asarray(g, dtype=float)
    M = sparse.diags(curv.areas)
    tau = weight * float(np.mean(curv.areas))
    lu = splu((M - tau * curv.laplacian).tocsc())
    return lambda g: lu.solve(curv.areas * np.asarray(g, dtype=float))


def directional_derivative(mesh: TriangleMesh, curv: DiscreteCurvatures, xi: np.ndarray,
                           functional: Callable[[DiscreteCurvatures], float], fd_step: float) -> float:
    """Central difference of a functional along the normal variation xi; the largest move is fd_step sqrt(A)."""
    scale = float(np.max(np.abs(xi)))
    if scale <= 0:
        return 0.0
    t = fd_step * math.sqrt(curv.total_area) / scale
    plus = functional(compute_curvatures(normal_variation(mesh, curv, xi, t)))
    minus = functional(compute_curvatures(normal_variation(mesh, curv, xi, -t)))
    return (plus - minus) / (2.0 * t)


@dataclass
class ModalBasis:
    """
    Lowest Laplace-Beltrami eigenfields of a mesh, orthonormal in the
    area-weighted inner product. Eigenvalues are scaled by the total area.
    """
    modes: np.ndarray
    eigenvalues: np.ndarray
    areas: np.ndarray

    @classmethod
    def of(cls, curv: DiscreteCurvatures, size: int) -> 'ModalBasis':
        n = len(curv.areas)
        k = min(size, n - 2)
        A = curv.total_area
        stiffness = (-curv.laplacian).tocsc()
        mass = sparse.diags(curv.areas).tocsc()
        # fixed start vector keeps repeated runs identical
        v0 = np.cos(0.7 * np.arange(n)) + 1.5
        _, vectors = eigsh(stiffness, k=k, M=mass, sigma=-1.0 / A, which='LM', v0=v0)
        # Rayleigh-Ritz on the span: exact mass-orthonormality and a diagonal stiffness
        gram = vectors.T @ (curv.areas[:, None] * vectors)
        values, rotation = eigh(vectors.T @ (stiffness @ vectors), gram)
        return cls(modes=vectors @ rotation, eigenvalues=np.clip(values, 0.0, None) * A, areas=curv.areas)

    @property
    def size(self) -> int:
        return self.modes.shape[1]

    def field(self, coefficients: np.ndarray) -> np.ndarray:
        return self.modes @ coefficients

    def coefficients(self, g: np.ndarray) -> np.ndarray:
        return self.modes.T @ (self.areas * np.asarray(g, dtype=float))

    def smoother(self, weight: float) -> Callable[[np.ndarray], np.ndarray]:
        """
        Spectral analogue of sobolev_smoother: mode k is damped by
        (1 + weight mu_k)^-2. Eigenvalues are floored at the first nonzero
        sphere eigenvalue 8 pi so the constant mode is not amplified.
        """
        damping = 1.0 / (1.0 + weight * np.maximum(self.eigenvalues, 8.0 * math.pi)) ** 2
        return lambda g: self.field(damping * self.coefficients(g))

    def gradients(self, mesh: TriangleMesh, curv: DiscreteCurvatures, fd_step: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        L2 gradients of the discrete W and T restricted to the span, from
        central differences along each eigenfield.
        """
        gW, gT = np.empty(self.size), np.empty(self.size)
        for k in range(self.size):
            xi = self.modes[:, k]
            t = fd_step * math.sqrt(curv.total_area) / float(np.max(np.abs(xi)))
            plus = compute_curvatures(normal_variation(mesh, curv, xi, t))
            minus = compute_curvatures(normal_variation(mesh, curv, xi, -t))
            gW[k] = (willmore_energy(plus) - willmore_energy(minus)) / (2.0 * t)
            gT[k] = (total_mean_curvature_ratio(plus) - total_mean_curvature_ratio(minus)) / (2.0 * t)
        return self.field(gW), self.field(gT)


def project_direction(gW: np.ndarray, gT: np.ndarray, weights: np.ndarray,
                      smoother: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> Tuple[np.ndarray, float]:
    """
    Descent direction for W tangent to the level set of T, and the
    multiplier lambda with gW - lambda gT orthogonal to gT in the
    area-weighted inner product. With a smoother the same projection is
    taken in the smoothed metric.
    """
    gW = np.asarray(gW, dtype=float)
    gT = np.asarray(gT, dtype=float)
    weights = np.asarray(weights, dtype=float)
    pW = smoother(gW) if smoother is not None else gW
    pT = smoother(gT) if smoother is not None else gT
    denom = float(np.sum(weights * gT * pT))
    if not math.isfinite(denom) or denom <= 1e-14:
        raise SphereDegenerateError(
            f"<gT, gT> = {denom:.3g}: the constraint gradient vanishes (round sphere).")
    lam = float(np.sum(weights * gT * pW)) / denom
    return -(pW - lam * pT), lam


# --- Flow helpers ---

def normalize_area(mesh: TriangleMesh) -> TriangleMesh:
    """Rescales about the vertex centroid to unit area; W and T are unchanged."""
    A = area(mesh)
    center = mesh.vertices.mean(axis=0)
    return mesh.with_vertices(center + (mesh.vertices - center) / math.sqrt(A))


def tangential_smoothing(mesh: TriangleMesh, curv: DiscreteCurvatures, weight: float) -> TriangleMesh:
    """Moves each vertex toward its neighbor average, keeping only the tangential part."""
    e = mesh.edges()
    n = mesh.n_vertices
    adjacency = sparse.coo_matrix((np.ones(2 * len(e)), (np.concatenate([e[:, 0], e[:, 1]]),
                                                         np.concatenate([e[:, 1], e[:, 0]]))),
                                  shape=(n, n)).tocsr()
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    umbrella = (adjacency @ mesh.vertices) / degree[:, None] - mesh.vertices
    normal_part = np.einsum('ij,ij->i', umbrella, curv.normals)
    tangential = umbrella - normal_part[:, None] * curv.normals
    return mesh.with_vertices(mesh.vertices + weight * tangential)


def restore_constraint(mesh: TriangleMesh, target: float, tolerance: float, max_steps: int,
                       max_move: float, sobolev_weight: float = 1.0,
                       direction: Optional[Callable[[TriangleMesh, DiscreteCurvatures], np.ndarray]] = None,
                       fd_step: float = 1e-5) \
        -> Tuple[TriangleMesh, DiscreteCurvatures, float, bool]:
    """
    Newton iteration for T = target along the smoothed T gradient, each move
    capped at max_move. Returns (mesh, curvatures, T, reached).

    With `direction` the move follows that field instead and the slope is a
    central difference of T, so it is exact for the discrete functional.
    """
    curv = compute_curvatures(mesh)
    T = total_mean_curvature_ratio(curv)
    for _ in range(max_steps):
        if abs(T - target) <= tolerance:
            return mesh, curv, T, True
        if direction is None:
            gT = gradient_T(curv)
            v = sobolev_smoother(curv, sobolev_weight)(gT)
            slope = l2_inner(curv, gT, v)
        else:
            v = direction(mesh, curv)
            slope = directional_derivative(mesh, curv, v, total_mean_curvature_ratio, fd_step)
        if not math.isfinite(slope) or slope <= 1e-14:
            raise SphereDegenerateError(f"T gradient vanishes during restoration (<gT, v> = {slope:.3g}).")
        s = (target - T) / slope
        cap = max_move / max(float(np.max(np.abs(v))), 1e-300)
        s = float(np.clip(s, -cap, cap))
        mesh = normal_variation(mesh, curv, v, s)
        curv = compute_curvatures(mesh)
        T = total_mean_curvature_ratio(curv)
    return mesh, curv, T, abs(T - target) <= tolerance


def _residual(curv: DiscreteCurvatures, gW: np.ndarray, gT: np.ndarray) -> Tuple[float, float]:
    _, lam = project_direction(gW, gT, curv.areas)
    r = gW - lam * gT
    return lam, math.sqrt(max(l2_inner(curv, r, r), 0.0))


def run_flow(mesh: TriangleMesh, config: Optional[FlowConfig] = None,
             show_progress: bool = False) -> Tuple[TriangleMesh, FlowTrace]:
    """
    Minimizes W at fixed T = target_R. Each iterate builds the lowest
    Laplace-Beltrami eigenfields of the current mesh and differentiates the
    discrete W and T along them; the spectrally smoothed W gradient is
    projected tangent to the constraint, T is restored by Newton steps after
    each trial step, and Armijo backtracking runs on the restored energy.
    The reported residual is the L2 norm of gW - lambda gT on that span.
    """
    cfg = config or FlowConfig()
    require_valid(mesh)
    trace = FlowTrace(target_R=cfg.target_R)
    restore_tol = 0.1 * cfg.constraint_tolerance
    if cfg.area_renormalize:
        mesh = normalize_area(mesh)
    h = mesh.mean_edge_length()
    log.info(f"--- Flow toward T = {cfg.target_R:.6g} ({mesh.n_vertices} vertices) ---")

    def modal_T_direction(m: TriangleMesh, c: DiscreteCurvatures) -> np.ndarray:
        basis = ModalBasis.of(c, cfg.basis_size)
        return basis.smoother(cfg.sobolev_weight)(basis.gradients(m, c, cfg.fd_step)[1])

    mesh, curv, T, reached = restore_constraint(mesh, cfg.target_R, restore_tol, cfg.max_iters, 0.25 * h,
                                                cfg.sobolev_weight, modal_T_direction, cfg.fd_step)
    if not reached:
        raise StagnationError(f"Could not bring T = {T:.6g} to the target {cfg.target_R:.6g}.", trace=trace, mesh=mesh)
    if cfg.area_renormalize:
        mesh = normalize_area(mesh)
        curv = compute_curvatures(mesh)
        T = total_mean_curvature_ratio(curv)
    W = willmore_energy(curv)
    log.info(f"  - constraint reached: T = {T:.8g}, W = {W:.8g}")

    failures = 0
    tau = cfg.step
    for it in tqdm(range(cfg.max_iters), desc="flow", disable=not show_progress):
        basis = ModalBasis.of(curv, cfg.basis_size)
        gW, gT = basis.gradients(mesh, curv, cfg.fd_step)
        lam, residual = _residual(curv, gW, gT)
        if abs(T - cfg.target_R) <= cfg.constraint_tolerance and residual <= cfg.residual_tolerance:
            trace.add(it, W, T, curv.total_area, lam, residual, True)
            trace.converged = True
            break

        smoother = basis.smoother(cfg.sobolev_weight)
        d, _ = project_direction(gW, gT, curv.areas, smoother)

        def along_gT(m: TriangleMesh, c: DiscreteCurvatures, v: np.ndarray = smoother(gT)) -> np.ndarray:
            return v

        d_scale = float(np.max(np.abs(d)))
        if d_scale <= 0:
            trace.add(it, W, T, curv.total_area, lam, residual, True)
            trace.converged = residual <= cfg.residual_tolerance
            break
        slope = l2_inner(curv, gW, d)

        while True:
            s = tau * h / d_scale
            accepted = False
            try:
                trial = normal_variation(mesh, curv, d, s)
                trial, trial_curv, trial_T, ok = restore_constraint(
                    trial, cfg.target_R, restore_tol, cfg.restoration_max_steps, 0.25 * h, cfg.sobolev_weight,
                    along_gT, cfg.fd_step)
                if ok:
                    trial_W = willmore_energy(trial_curv)
                    accepted = trial_W <= W + cfg.armijo * s * slope
            except GeometryError as e:
                log.debug(f"Trial step {s:.3g} rejected: {e}")
            if accepted:
                break
            failures += 1
            tau *= 0.5
            if failures >= cfg.max_line_search_failures:
                trace.add(it, W, T, curv.total_area, lam, residual, False)
                raise StagnationError(
                    f"Line search failed {failures} times in a row at iteration {it} (W = {W:.8g}).",
                    trace=trace, mesh=mesh)
        failures = 0
        tau = min(cfg.step, 2.0 * tau)
        mesh, curv, T, W = trial, trial_curv, trial_T, trial_W

        if cfg.smoothing_interval and cfg.tangential_smoothing_weight > 0 and (it + 1) % cfg.smoothing_interval == 0:
            smoothed = tangential_smoothing(mesh, curv, cfg.tangential_smoothing_weight)
            mesh, curv, T, _ = restore_constraint(smoothed, cfg.target_R, restore_tol, cfg.restoration_max_steps,
                                                  0.25 * h, cfg.sobolev_weight, along_gT, cfg.fd_step)
            W = willmore_energy(curv)
        if cfg.area_renormalize:
            mesh = normalize_area(mesh)
            curv = compute_curvatures(mesh)
            T = total_mean_curvature_ratio(curv)
            W = willmore_energy(curv)

        angle = min_angle_degrees(mesh)
        if angle < cfg.min_angle_degrees:
            trace.add(it, W, T, curv.total_area, lam, residual, False)
            raise QualityError(f"Minimum triangle angle {angle:.3g}° fell below {cfg.min_angle_degrees}°.",
                               trace=trace, mesh=mesh)
        trace.add(it, W, T, curv.total_area, lam, residual, True)
        log.debug(f"iter {it}: W={W:.10g} T={T:.10g} lambda={lam:.6g} residual={residual:.3g}")

    final = trace.final
    if trace.converged:
        log.info(f"✅ Flow converged: W = {final.W:.8g}, lambda = {final.lam:.6g}, residual = {final.residual:.3g}")
    else:
        log.warning(f"⚠️ Flow stopped after {cfg.max_iters} iterations without meeting the residual tolerance "
                    f"(residual {final.residual:.3g})." if final else "⚠️ Flow recorded no iterations.")
    return mesh, trace


# --- Seeds and sweeps ---

def perturbed_sphere(subdivisions: int = 3, noise: float = 0.03, seed: int = 0) -> TriangleMesh:
    """Icosphere with a smooth random radial perturbation of standard deviation `noise`."""
    mesh = build_icosphere(subdivisions)
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(6, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    x = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1)[:, None]
    dots = x @ directions.T
    field_values = dots ** 2 @ rng.normal(size=6) + dots ** 3 @ rng.normal(size=6)
    field_values -= field_values.mean()
    spread = float(np.std(field_values))
    if spread > 0:
        field_values *= noise / spread
    return mesh.with_vertices(mesh.vertices * (1.0 + field_values)[:, None])


def flow_seed(R: float, genus: int, seed: int, subdivisions: int = 3,
              config: Optional[configparser.ConfigParser] = None) -> TriangleMesh:
    """Genus 0 starts from a perturbed sphere, higher genus from the handle constructions."""
    if genus == 0:
        return perturbed_sphere(subdivisions, seed=seed)
    if abs(R - SPHERE_T) < 0.05:
        raise ParameterError(f"R = {R} lies within 0.05 of 4 sqrt(pi); excluded for genus {genus}.")
    variant = 2 if R > SPHERE_T else 1
    return build_sigma_g(4.0 + 0.5 * seed, g=genus, variant=variant, config=config)


@dataclass
class Beta0Table:
    frame: pd.DataFrame
    monotone: bool
    below_8pi: bool


def _monotone_above_sphere(frame: pd.DataFrame, band: float = 0.02) -> bool:
    above = frame[(frame['R'] > SPHERE_T) & frame['best_W'].notna()].sort_values('R')
    values = above['best_W'].to_numpy()
    return bool(np.all(values[1:] >= values[:-1] * (1.0 - band)))


def estimate_beta0(R_grid: Sequence[float], seeds: int = 3, config: Optional[configparser.ConfigParser] = None,
                   genus: int = 0, subdivisions: int = 3, jobs: int = 1, show_progress: bool = False,
                   **flow_overrides) -> Beta0Table:
    """
    Best W over `seeds` flows for each constraint value R. Failed flows are
    flagged per cell; the table is always returned.
    """
    if seeds < 1:
        raise ParameterError(f"seeds must be at least 1, got {seeds}.")
    log.info(f"--- Estimating beta_{genus} on {len(R_grid)} values of R, {seeds} seeds each ---")
    jobs_list = [(float(R), k) for R in R_grid for k in range(seeds)]

    def evaluate(job):
        R, k = job
        try:
            if not 0 < R < BRIDGE_T:
                raise ParameterError(f"R = {R} is outside (0, sqrt(32 pi)).")
            cfg = FlowConfig.from_config(config, target_R=R, **flow_overrides)
            _, trace = run_flow(flow_seed(R, genus, k, subdivisions, config), cfg)
            final = trace.final
            return {'R': R, 'W': final.W, 'lambda': final.lam, 'residual': final.residual,
                    'converged': trace.converged, 'ok': True}
        except GeometryError as e:
            log.error(f"❌ R = {R:.6g}, seed {k}: {e}")
            return {'R': R, 'ok': False}

    results = run_rows(jobs_list, evaluate, jobs, 'beta0', show_progress)
    rows = []
    for R in R_grid:
        R = float(R)
        cell = [r for r in results if r['R'] == R]
        good = [r for r in cell if r['ok']]
        row = {'R': R, 'W_floor': 0.25 * R * R, 'seeds_ok': len(good), 'error_flag': not good}
        if good:
            best = min(good, key=lambda r: r['W'])
            row.update({'best_W': best['W'], 'lambda': best['lambda'], 'residual': best['residual'],
                        'converged': best['converged']})
        else:
            row.update({'best_W': float('nan'), 'lambda': float('nan'), 'residual': float('nan'),
                        'converged': False})
        rows.append(row)
    frame = pd.DataFrame(rows, columns=BETA0_COLUMNS)
    finite = frame['best_W'].dropna()
    table = Beta0Table(frame=frame, monotone=_monotone_above_sphere(frame),
                       below_8pi=bool(np.all(finite < 8.0 * math.pi)))
    status = "✅" if table.monotone and table.below_8pi else "⚠️"
    log.info(f"{status} beta_{genus} table: monotone above 4 sqrt(pi) = {table.monotone}, "
             f"all below 8 pi = {table.below_8pi}")
    return table


@dataclass
class DriftReport:
    steps: np.ndarray
    projected_drift: np.ndarray
    raw_drift: np.ndarray
    exponent: Optional[float]


def check_constraint_drift(mesh: TriangleMesh, steps: Sequence[float] = (0.4, 0.2, 0.1, 0.05),
                           sobolev_weight: float = 1.0) -> DriftReport:
    """
    |dT| after moving along the projected direction versus along gT itself,
    for displacements of `steps` mean edge lengths. The projected drift is
    second order in the step.
    """
    curv = compute_curvatures(mesh)
    T0 = total_mean_curvature_ratio(curv)
    gW, gT = gradient_W(curv), gradient_T(curv)
    d, _ = project_direction(gW, gT, curv.areas, sobolev_smoother(curv, sobolev_weight))
    d = d / float(np.max(np.abs(d)))
    raw = gT / float(np.max(np.abs(gT)))
    h = mesh.mean_edge_length()
    steps = np.asarray(steps, dtype=float)
    projected, unprojected = [], []
    for s in steps:
        projected.append(abs(total_mean_curvature_ratio(compute_curvatures(normal_variation(mesh, curv, d, s * h))) - T0))
        unprojected.append(abs(total_mean_curvature_ratio(compute_curvatures(normal_variation(mesh, curv, raw, s * h))) - T0))
    report = DriftReport(steps=steps, projected_drift=np.array(projected), raw_drift=np.array(unprojected),
                         exponent=fit_decay_exponent(steps, projected))
    log.info(f"  - constraint drift exponent: {report.exponent}")
    return report
