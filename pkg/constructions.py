# constructions.py

import configparser
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.transform import Rotation

from axisym import ProfileCurve
from functionals import area, total_mean_curvature, total_mean_curvature_ratio
from geometry_errors import (
    ConstructionError,
    HandleOverlapError,
    ParameterError,
    PatchError,
    PoleClearanceError,
    SpheresIntersectError,
    TargetUnreachedError,
)
from mobius import E3, apply_stereographic_T, image_sphere, stereographic_T
from settings import get_float, get_int, get_str
from surface_mesh import TriangleMesh, compute_curvatures, revolve_profile, validate

log = logging.getLogger(__name__)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
SQRT3_2 = math.sqrt(3.0) / 2.0


# --- Catenoid bridge parameters ---

def _bridge_ratio(t: float) -> float:
    """xi(t)/r(t) = tanh t + t/cosh^2 t; the two spheres are disjoint iff it exceeds 1."""
    return math.tanh(t) + t / math.cosh(t) ** 2


@lru_cache(maxsize=1)
def bridge_t_min() -> float:
    return brentq(lambda t: _bridge_ratio(t) - 1.0, 0.1, 2.0, xtol=1e-12)


@dataclass
class CatenoidBridgeParams:
    t: float
    r_t: float
    xi_t: float
    alpha_t: float
    sigma_t: float
    lambda_t: float
    rho_sigma: float
    zeta_sigma: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def catenoid_bridge_params(t: float) -> CatenoidBridgeParams:
    if not math.isfinite(t) or t <= bridge_t_min():
        raise SpheresIntersectError(
            f"t = {t} is below t_min = {bridge_t_min():.12f}; the spheres around the catenoid segment intersect.")
    ratio = _bridge_ratio(t)
    if ratio - 1.0 < 1e-13:
        raise ParameterError(f"t = {t} is too large: sigma(t) is 1 to double precision.")
    # smaller root of sigma^2 - 2 ratio sigma + 1 = 0
    sigma = 1.0 / (ratio + math.sqrt((ratio - 1.0) * (ratio + 1.0)))
    cosh_sq = math.cosh(t) ** 2
    lam = 2.0 * sigma / ((1.0 - sigma) * (1.0 + sigma) * cosh_sq)
    zeta, rho = image_sphere(sigma)
    return CatenoidBridgeParams(
        t=t,
        r_t=cosh_sq,
        xi_t=math.sinh(t) * math.cosh(t) + t,
        alpha_t=2.0 * math.acos(math.tanh(t)),
        sigma_t=sigma,
        lambda_t=lam,
        rho_sigma=rho,
        zeta_sigma=zeta,
    )


def predicted_gamma_energy(t: float) -> float:
    return 8.0 * math.pi - 4.0 * math.pi * (1.0 - math.tanh(t))


def predicted_sigma_energy(t: float, g: int) -> float:
    return 8.0 * math.pi - 4.0 * math.pi * (g + 1) * (1.0 - math.tanh(t))


# --- Gamma_t: two spheres joined by a catenoid segment ---

@dataclass
class GammaProfile:
    curve: ProfileCurve
    catenoid_start: int
    catenoid_stop: int
    junction_gap: float
    params: CatenoidBridgeParams


def _conformal_angles(theta_from: float, theta_to: float, step: float) -> np.ndarray:
    """Angles on a sphere spaced uniformly in log tan(theta/2), so revolved cells stay square."""
    w0 = math.log(math.tan(theta_from / 2.0))
    w1 = math.log(math.tan(theta_to / 2.0))
    n = max(int(math.ceil(abs(w1 - w0) / step)), 1)
    angles = 2.0 * np.arctan(np.exp(np.linspace(w0, w1, n + 1)))
    angles[0], angles[-1] = theta_from, theta_to
    return angles


def gamma_t_profile(t: float, n_phi: int = 64, profile_samples: Optional[int] = None) -> GammaProfile:
    """
    Profile of Gamma_t from the bottom pole of the lower sphere to the top
    pole of the upper one: sphere arc, catenoid x = cosh z on [-t, t],
    sphere arc. `profile_samples` sets the samples across each polar cap;
    the rest is sampled conformally with step 2 pi / n_phi.
    """
    params = catenoid_bridge_params(t)
    r, xi = params.r_t, params.xi_t
    step = 2.0 * math.pi / n_phi
    cap_n = profile_samples or max(int(math.ceil((math.pi / 2.0) / step)), 2)
    theta1 = math.pi - math.asin(1.0 / math.cosh(t))

    theta_lower = np.concatenate([np.linspace(0.0, math.pi / 2.0, cap_n + 1),
                                  _conformal_angles(math.pi / 2.0, theta1, step)[1:]])
    x_lower = r * np.sin(theta_lower)
    z_lower = -xi - r * np.cos(theta_lower)
    s_lower = r * theta_lower

    n_cat = max(int(math.ceil(2.0 * t / step)), 2)
    z_cat = np.linspace(-t, t, n_cat + 1)
    x_cat = np.cosh(z_cat)
    theta_cat = np.arctan2(1.0, np.sinh(z_cat))
    s_cat = s_lower[-1] + np.sinh(z_cat) + math.sinh(t)

    theta_upper = math.pi - theta_lower[::-1]
    x_upper = r * np.sin(theta_upper)
    z_upper = xi - r * np.cos(theta_upper)
    s_upper = s_cat[-1] + r * (theta_upper - theta_upper[0])

    gap = max(
        math.hypot(x_lower[-1] - x_cat[0], z_lower[-1] - z_cat[0]),
        math.hypot(x_upper[0] - x_cat[-1], z_upper[0] - z_cat[-1]),
        abs(theta_lower[-1] - theta_cat[0]),
        abs(theta_upper[0] - theta_cat[-1]),
    )
    if gap > 1e-10 * max(1.0, r):
        raise ConstructionError(f"Sphere and catenoid do not meet tangentially (gap {gap:.3e}).")

    # junction samples are shared exactly; the curvature jump is stored as a repeated s
    x_lower[-1], z_lower[-1], theta_lower[-1] = x_cat[0], z_cat[0], theta_cat[0]
    x_upper[0], z_upper[0], theta_upper[0] = x_cat[-1], z_cat[-1], theta_cat[-1]
    x_lower[0] = 0.0
    x_upper[-1] = 0.0

    kappa = np.concatenate([np.full(len(theta_lower), 1.0 / r), -1.0 / np.cosh(z_cat) ** 2,
                            np.full(len(theta_upper), 1.0 / r)])
    curve = ProfileCurve(
        s=np.concatenate([s_lower, s_cat, s_upper]),
        gamma1=np.concatenate([x_lower, x_cat, x_upper]),
        gamma2=np.concatenate([z_lower, z_cat, z_upper]),
        theta=np.concatenate([theta_lower, theta_cat, theta_upper]),
        kappa=kappa,
    )
    start = len(theta_lower)
    return GammaProfile(curve, start, start + n_cat, gap, params)


def build_gamma_t(t: float, profile_samples: Optional[int] = None, n_phi: int = 64) -> TriangleMesh:
    profile = gamma_t_profile(t, n_phi, profile_samples)
    mesh = revolve_profile(profile.curve, n_phi)
    log.info(f"  - Gamma_t at t={t}: {mesh.n_vertices} vertices, predicted W {predicted_gamma_energy(t):.6f}")
    return mesh


# --- Sigma^{v,g}_t: concentric spheres with transplanted handles ---

@dataclass
class SigmaResolution:
    n_phi: int = 64
    footprint_factor: float = 1.15
    cone_margin: float = 0.05
    grading: float = 0.3
    max_background_points: int = 12000

    @classmethod
    def from_config(cls, config: Optional[configparser.ConfigParser]) -> 'SigmaResolution':
        return cls(
            n_phi=get_int(config, 'constructions', 'n_phi'),
            footprint_factor=get_float(config, 'constructions', 'footprint_factor'),
            cone_margin=get_float(config, 'constructions', 'handle_cone_margin'),
            grading=get_float(config, 'constructions', 'sigma_grading'),
            max_background_points=get_int(config, 'constructions', 'max_background_points'),
        )


@dataclass
class HandleProfile:
    """Meridian of the handle around -e3, from the rim on |x| = sigma to the rim on |x| = 1/sigma."""
    x: np.ndarray
    z: np.ndarray
    eps: float
    footprint: float


@dataclass
class _Hole:
    center: np.ndarray
    angle: float
    spacing: float


def _bridge_image(params: CatenoidBridgeParams, x: np.ndarray, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Phi_t(p) = T(lambda p) on the meridian plane y = 0."""
    points = params.lambda_t * np.stack([x, np.zeros_like(x), z], axis=1)
    image = stereographic_T(points)
    return image[:, 0], image[:, 2]


def handle_footprint(params: CatenoidBridgeParams) -> float:
    """Angle from -e3 at which the catenoid image meets the two spheres."""
    t = params.t
    x, z = _bridge_image(params, np.array([math.cosh(t), math.cosh(t)]), np.array([-t, t]))
    return float(np.max(np.arctan2(x, -z)))


def handle_profile(params: CatenoidBridgeParams, eps: float, n_phi: int) -> HandleProfile:
    t, sigma = params.t, params.sigma_t
    step = 2.0 * math.pi / n_phi
    beta = handle_footprint(params)
    if eps <= beta:
        raise HandleOverlapError(f"Handle radius {eps:.4f} does not exceed the footprint {beta:.4f} at t={t}.")

    n_cat = max(int(math.ceil(2.0 * t / step)), 2)
    z_cat = np.linspace(-t, t, n_cat + 1)
    x_img, z_img = _bridge_image(params, np.cosh(z_cat), z_cat)
    beta_in = math.atan2(x_img[0], -z_img[0])
    beta_out = math.atan2(x_img[-1], -z_img[-1])

    inner = _conformal_angles(eps, beta_in, step)[:-1]
    outer = _conformal_angles(beta_out, eps, step)[1:]
    x = np.concatenate([sigma * np.sin(inner), x_img, np.sin(outer) / sigma])
    z = np.concatenate([-sigma * np.cos(inner), z_img, -np.cos(outer) / sigma])
    return HandleProfile(x, z, eps, beta)


def _rotation_between(a: np.ndarray, b: np.ndarray) -> Rotation:
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    axis = np.cross(a, b)
    s = float(np.linalg.norm(axis))
    c = float(a @ b)
    if s < 1e-12:
        if c > 0:
            return Rotation.identity()
        # antipodal: any axis perpendicular to a
        helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        perp = np.cross(a, helper)
        return Rotation.from_rotvec(math.pi * perp / np.linalg.norm(perp))
    return Rotation.from_rotvec(axis / s * math.atan2(s, c))


def handle_points(g: int, eps: float, margin: float) -> np.ndarray:
    """p_0 = -e3 and g further points on a cone of half-angle 2 eps + margin around it."""
    cone = 2.0 * eps + margin
    if g > 0 and cone >= math.pi - eps:
        raise HandleOverlapError(f"Handle radius {eps:.4f} leaves no room for {g} extra handles.")
    points = [-E3]
    for i in range(g):
        azimuth = 2.0 * math.pi * i / g
        points.append(np.array([math.sin(cone) * math.cos(azimuth),
                                math.sin(cone) * math.sin(azimuth),
                                -math.cos(cone)]))
    points = np.array(points)
    cos_sep = np.clip(points @ points.T, -1.0, 1.0)
    np.fill_diagonal(cos_sep, -1.0)
    closest = float(np.arccos(cos_sep.max())) if len(points) > 1 else math.pi
    if closest <= 2.0 * eps:
        raise HandleOverlapError(
            f"Handle points are {closest:.4f} rad apart, need more than 2 eps = {2.0 * eps:.4f}.")
    return points


def _unit_loop(n_phi: int, eps: float) -> np.ndarray:
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return np.stack([math.sin(eps) * np.cos(phi), math.sin(eps) * np.sin(phi),
                     np.full(n_phi, -math.cos(eps))], axis=1)


def _fibonacci_cap(center: np.ndarray, cap_angle: float, n_full: float) -> np.ndarray:
    """Fibonacci points on the cap of angular radius cap_angle, at the density of n_full points per sphere."""
    lowest = math.cos(min(cap_angle, math.pi))
    n = max(int(math.ceil(n_full * (1.0 - lowest) / 2.0)), 1)
    i = np.arange(n) + 0.5
    cz = 1.0 - (1.0 - lowest) * i / n
    sz = np.sqrt(np.clip(1.0 - cz * cz, 0.0, None))
    phi = GOLDEN_ANGLE * i
    local = np.stack([sz * np.cos(phi), sz * np.sin(phi), cz], axis=1)
    return _rotation_between(E3, center).apply(local)


def _angles_to(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(points @ center, -1.0, 1.0))


def graded_directions(holes: Sequence[_Hole], spacing: float, grading: float,
                      seeds: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Unit vectors with local spacing min(spacing, d_i + grading * distance to
    hole i), outside every hole. Levels halve the spacing near the rims.
    """
    def sizing(x: np.ndarray) -> np.ndarray:
        h = np.full(len(x), spacing)
        for hole in holes:
            h = np.minimum(h, hole.spacing + grading * np.clip(_angles_to(x, hole.center) - hole.angle, 0.0, None))
        return h

    def outside(x: np.ndarray) -> np.ndarray:
        keep = np.ones(len(x), dtype=bool)
        for hole in holes:
            keep &= _angles_to(x, hole.center) >= hole.angle + 0.5 * hole.spacing
        return keep

    finest = min([spacing] + [hole.spacing for hole in holes])
    levels = max(int(math.ceil(math.log2(spacing / finest))), 0)
    kept: List[np.ndarray] = [] if seeds is None else [np.asarray(seeds)]

    def add(candidates: np.ndarray, level_spacing: float) -> None:
        if not len(candidates):
            return
        if kept:
            distance, _ = cKDTree(np.vstack(kept)).query(candidates, distance_upper_bound=0.6 * level_spacing)
            candidates = candidates[~np.isfinite(distance)]
        if len(candidates):
            kept.append(candidates)

    for level in range(levels + 1):
        s = spacing / 2.0 ** level
        n_full = 4.0 * math.pi / (SQRT3_2 * s * s)
        if level == 0:
            groups = [_fibonacci_cap(E3, math.pi, n_full)]
        else:
            groups = [_fibonacci_cap(hole.center, hole.angle + (s * math.sqrt(2.0) - hole.spacing) / grading, n_full)
                      for hole in holes if hole.spacing < s * math.sqrt(2.0)]
        for candidates in groups:
            h = sizing(candidates)
            mask = outside(candidates)
            if level < levels:
                mask &= h > s / math.sqrt(2.0)
            if level > 0:
                mask &= h <= s * math.sqrt(2.0)
            add(candidates[mask], s)

    if seeds is not None:
        kept = kept[1:]
    return np.vstack(kept) if kept else np.zeros((0, 3))


def _sphere_with_holes(loops: Sequence[np.ndarray], background: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Convex hull of loop and background points on the unit sphere with the
    hole caps removed. Faces wind outward; loops keep their index order.
    """
    points = np.vstack(list(loops) + [background])
    loop_id = np.concatenate([np.full(len(loop), k) for k, loop in enumerate(loops)]
                             + [np.full(len(background), -1)])
    hull = ConvexHull(points)
    faces = hull.simplices.copy()
    cross = np.cross(points[faces[:, 1]] - points[faces[:, 0]], points[faces[:, 2]] - points[faces[:, 0]])
    inward = np.einsum('ij,ij->i', cross, hull.equations[:, :3]) < 0
    faces[inward] = faces[inward][:, [0, 2, 1]]

    ids = loop_id[faces]
    cap = (ids[:, 0] >= 0) & (ids[:, 0] == ids[:, 1]) & (ids[:, 1] == ids[:, 2])
    faces = faces[~cap]
    if len(np.unique(faces)) != len(points):
        raise ConstructionError(f"Hull dropped {len(points) - len(np.unique(faces))} sphere points.")
    return points, faces


def _image_hole(loop_image: np.ndarray, center_image: np.ndarray, sphere_center: np.ndarray,
                radius: float) -> _Hole:
    """Hole data on an image sphere, in unit directions from its center."""
    dirs = (loop_image - sphere_center) / radius
    _, _, vt = np.linalg.svd(dirs - dirs.mean(axis=0))
    normal = vt[-1]
    if normal @ ((center_image - sphere_center) / radius) < 0:
        normal = -normal
    angle = float(np.mean(_angles_to(dirs, normal)))
    chords = np.linalg.norm(np.roll(dirs, -1, axis=0) - dirs, axis=1)
    return _Hole(normal, angle, float(chords.max()))


def _background_spacing(rim_spacing: float, max_points: int) -> float:
    return max(rim_spacing, math.sqrt(4.0 * math.pi / (SQRT3_2 * max_points)))


def _sphere_points(radius: float, loops: Sequence[np.ndarray], centers: np.ndarray, rim_spacing: float,
                   variant: int, resolution: SigmaResolution) -> np.ndarray:
    """Background points on |x| = radius, uniform in the final frame of the chosen variant."""
    spacing = _background_spacing(rim_spacing, resolution.max_background_points)
    if variant == 1:
        holes = [_Hole(c, float(np.arccos(np.clip(loop[0] @ c, -1.0, 1.0))), rim_spacing)
                 for c, loop in zip(centers, loops)]
        return graded_directions(holes, spacing, resolution.grading, seeds=np.vstack(loops))

    zeta, rho = image_sphere(radius)
    sphere_center = np.array([0.0, 0.0, zeta])
    loop_images = [stereographic_T(radius * loop) for loop in loops]
    holes = [_image_hole(image, stereographic_T(radius * c), sphere_center, rho)
             for image, c in zip(loop_images, centers)]
    seeds = np.vstack([(image - sphere_center) / rho for image in loop_images])
    dirs = graded_directions(holes, spacing, resolution.grading, seeds=seeds)
    pulled = stereographic_T(sphere_center + rho * dirs)
    return pulled / np.linalg.norm(pulled, axis=1)[:, None]


def _has_directed_edge(faces: np.ndarray, a: int, b: int) -> bool:
    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    return bool(np.any((directed[:, 0] == a) & (directed[:, 1] == b)))


def build_sigma_g(t: float, g: int = 0, variant: int = 1, eps_handle: Optional[float] = None,
                  resolution: Optional[SigmaResolution] = None,
                  config: Optional[configparser.ConfigParser] = None) -> TriangleMesh:
    """
    Sigma^{1,g}_t: the spheres |x| = sigma and |x| = 1/sigma joined by g + 1
    copies of the catenoid handle of Phi_t(Gamma_t), rotated from -e3 to
    p_0..p_g. Variant 2 is its image under the stereographic map.
    """
    if variant not in (1, 2):
        raise ParameterError(f"variant must be 1 or 2, got {variant}.")
    if g < 0:
        raise ParameterError(f"Genus must be nonnegative, got {g}.")
    resolution = resolution or SigmaResolution.from_config(config)
    params = catenoid_bridge_params(t)
    sigma = params.sigma_t

    if eps_handle is None:
        configured = get_str(config, 'constructions', 'eps_handle').strip().lower()
        if configured not in ('', 'auto'):
            eps_handle = float(configured)
    if eps_handle is None:
        eps_handle = resolution.footprint_factor * handle_footprint(params)
    profile = handle_profile(params, eps_handle, resolution.n_phi)
    centers = handle_points(g, eps_handle, resolution.cone_margin)
    if variant == 2:
        too_close = np.linalg.norm(centers - E3, axis=1) <= 1.0
        if np.any(too_close):
            raise PoleClearanceError(
                f"Handle point {centers[np.argmax(too_close)].round(4).tolist()} is within 1 of e3; "
                f"use a larger t or fewer handles for variant 2.")

    n_phi = resolution.n_phi
    rotations = [_rotation_between(-E3, c) for c in centers]
    base_loop = _unit_loop(n_phi, eps_handle)
    loops = [rot.apply(base_loop) for rot in rotations]
    rim_spacing = float(np.linalg.norm(base_loop[1] - base_loop[0]))

    log.info(f"--- Building Sigma^({variant},{g}) at t={t} ---")
    log.info(f"  - sigma {sigma:.6f}, handle radius {eps_handle:.4f}, footprint {profile.footprint:.4f}")

    vertices: List[np.ndarray] = []
    faces: List[np.ndarray] = []
    loop_index: Dict[Tuple[str, int], np.ndarray] = {}
    offset = 0
    for label, radius in (('inner', sigma), ('outer', 1.0 / sigma)):
        background = _sphere_points(radius, loops, centers, rim_spacing, variant, resolution)
        points, sphere_faces = _sphere_with_holes(loops, background)
        if label == 'inner':
            sphere_faces = sphere_faces[:, [0, 2, 1]]
        for k in range(len(loops)):
            loop_index[(label, k)] = offset + k * n_phi + np.arange(n_phi)
        vertices.append(radius * points)
        faces.append(sphere_faces + offset)
        offset += len(points)
        log.info(f"  - {label} sphere: {len(points)} points")

    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    interior_x, interior_z = profile.x[1:-1], profile.z[1:-1]
    band = np.stack([interior_x[:, None] * np.cos(phi)[None, :], interior_x[:, None] * np.sin(phi)[None, :],
                     np.repeat(interior_z[:, None], n_phi, axis=1)], axis=-1).reshape(-1, 3)
    n_rings = len(profile.x)
    i = np.arange(n_phi)
    i_next = (i + 1) % n_phi
    sphere_faces_all = np.concatenate(faces)

    for k, rot in enumerate(rotations):
        ring_index = np.empty((n_rings, n_phi), dtype=np.int64)
        ring_index[0] = loop_index[('inner', k)]
        ring_index[-1] = loop_index[('outer', k)]
        ring_index[1:-1] = offset + np.arange((n_rings - 2) * n_phi).reshape(n_rings - 2, n_phi)
        vertices.append(rot.apply(band))
        offset += len(band)

        lo, hi = ring_index[:-1], ring_index[1:]
        handle_faces = np.concatenate([
            np.stack([lo[:, i], lo[:, i_next], hi[:, i_next]], axis=-1).reshape(-1, 3),
            np.stack([lo[:, i], hi[:, i_next], hi[:, i]], axis=-1).reshape(-1, 3),
        ])
        a, b = ring_index[0, 0], ring_index[0, 1]
        if _has_directed_edge(sphere_faces_all, a, b) == _has_directed_edge(handle_faces, a, b):
            handle_faces = handle_faces[:, [0, 2, 1]]
        faces.append(handle_faces)

    mesh = TriangleMesh(np.vstack(vertices), np.concatenate(faces), genus_hint=g)
    diagnostics = validate(mesh)
    if not diagnostics.passes:
        raise ConstructionError(f"Sigma mesh failed validation: {diagnostics.to_json()}")
    if variant == 2:
        mesh = apply_stereographic_T(mesh)
    log.info(f"✅ Sigma^({variant},{g}) built: {mesh.n_vertices} vertices, "
             f"predicted W {predicted_sigma_energy(t, g):.6f}")
    return mesh


# --- Bump graphs over a flat patch ---

@dataclass
class BumpProfile:
    """u(x) = amplitude * exp(1 - 1/(1 - (r/radius)^2)) around the cell center, zero outside."""
    amplitude: float = 0.6
    radius: float = 0.3

    def __post_init__(self):
        if not 0 < self.radius < 0.5:
            raise ParameterError(f"Bump radius must lie in (0, 0.5), got {self.radius}.")

    @classmethod
    def from_config(cls, config: Optional[configparser.ConfigParser]) -> 'BumpProfile':
        return cls(get_float(config, 'constructions', 'bump_amplitude'),
                   get_float(config, 'constructions', 'bump_radius'))

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        q_sq = ((np.asarray(x) - 0.5) ** 2 + (np.asarray(y) - 0.5) ** 2) / self.radius ** 2
        inside = q_sq < 1.0
        out = np.zeros(np.broadcast(x, y).shape)
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - q_sq[inside]))
        return out


@dataclass
class PatchHost:
    """
    Box [0,1]^2 x [-depth, 0] whose top face is an N x N grid with
    N = cells_per_copy * n, so every bump copy sees the same cells.
    """
    cells_per_copy: int = 12
    depth: float = 0.25

    @classmethod
    def from_config(cls, config: Optional[configparser.ConfigParser]) -> 'PatchHost':
        return cls(get_int(config, 'constructions', 'bump_cells'), get_float(config, 'constructions', 'host_depth'))

    def mesh_for(self, n: int) -> TriangleMesh:
        if n < 1:
            raise ParameterError(f"n must be at least 1, got {n}.")
        N = self.cells_per_copy * n
        grid = np.linspace(0.0, 1.0, N + 1)
        gx, gy = np.meshgrid(grid, grid, indexing='ij')
        top = np.stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)], axis=1)
        index = np.arange((N + 1) ** 2).reshape(N + 1, N + 1)

        a, b = index[:-1, :-1].ravel(), index[1:, :-1].ravel()
        c, d = index[1:, 1:].ravel(), index[:-1, 1:].ravel()
        top_faces = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])

        # top boundary, counter-clockwise seen from above
        ring = np.concatenate([index[:-1, 0], index[-1, :-1], index[:0:-1, -1], index[0, :0:-1]])
        n_ring = len(ring)
        bottom = top[ring] - np.array([0.0, 0.0, self.depth])
        bottom_index = len(top) + np.arange(n_ring)
        center_index = len(top) + n_ring
        k = np.arange(n_ring)
        k_next = (k + 1) % n_ring
        side_faces = np.concatenate([
            np.stack([ring[k], bottom_index[k], bottom_index[k_next]], axis=1),
            np.stack([ring[k], bottom_index[k_next], ring[k_next]], axis=1),
        ])
        bottom_faces = np.stack([np.full(n_ring, center_index), bottom_index[k_next], bottom_index[k]], axis=1)

        vertices = np.vstack([top, bottom, [[0.5, 0.5, -self.depth]]])
        patch = index[1:-1, 1:-1].ravel()
        return TriangleMesh(vertices, np.concatenate([top_faces, side_faces, bottom_faces]), genus_hint=0,
                            markers={'patch': patch})


def check_flat_patch(host: TriangleMesh) -> np.ndarray:
    patch = host.markers.get('patch')
    if patch is None or not len(patch):
        raise PatchError("Host mesh has no 'patch' marker.")
    p = host.vertices[patch]
    if np.any(np.abs(p[:, 2]) > 1e-12):
        raise PatchError("Patch is not flat: vertices leave the plane z = 0.")
    if np.any((p[:, :2] <= 0.0) | (p[:, :2] >= 1.0)):
        raise PatchError("Patch vertices must lie inside the open square (0,1)^2.")
    return patch


def bump_graph_surface(host: TriangleMesh, u: BumpProfile, n: int, t_amp: float) -> TriangleMesh:
    """Replaces the flat patch by the graph of (t/n) u(n x), n^2 rescaled copies of u."""
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}.")
    if not -1.0 <= t_amp <= 1.0:
        raise ParameterError(f"t_amp must lie in [-1, 1], got {t_amp}.")
    patch = check_flat_patch(host)
    vertices = host.vertices.copy()
    xy = vertices[patch, :2] * n
    vertices[patch, 2] = (t_amp / n) * u(xy[:, 0] - np.floor(xy[:, 0]), xy[:, 1] - np.floor(xy[:, 1]))
    return host.with_vertices(vertices)


def patch_mean_curvature(mesh: TriangleMesh) -> float:
    patch = mesh.markers['patch']
    curv = compute_curvatures(mesh)
    return float(np.sum(curv.H[patch] * curv.areas[patch]))


@dataclass
class BumpSolution:
    n: int
    t_amp: float
    achieved_T: float
    target_T: float
    evaluations: int
    mesh: Optional[TriangleMesh] = field(default=None, repr=False)


def _bump_T(host: PatchHost, u: BumpProfile, n: int, t_amp: float) -> Tuple[float, TriangleMesh]:
    mesh = bump_graph_surface(host.mesh_for(n), u, n, t_amp)
    return total_mean_curvature_ratio(compute_curvatures(mesh)), mesh


def solve_T_for_target(host: PatchHost, u: BumpProfile, target_T: float,
                       config: Optional[configparser.ConfigParser] = None,
                       max_copies: Optional[int] = None, tolerance: Optional[float] = None) -> BumpSolution:
    """
    Doubles n until T(n, -1) and T(n, 1) bracket the target, then bisects t_amp.
    Candidate n are screened with the exact scaling of the patch curvature
    measured at n = 1 before any fine mesh is built.
    """
    if not math.isfinite(target_T):
        raise ParameterError(f"target_T must be finite, got {target_T}.")
    max_copies = max_copies or get_int(config, 'constructions', 'max_copies')
    tolerance = tolerance or get_float(config, 'constructions', 't_tolerance')

    base = host.mesh_for(1)
    I_host = total_mean_curvature(compute_curvatures(base))
    bumped = bump_graph_surface(base, u, 1, 1.0)
    I_1 = patch_mean_curvature(bumped)
    A_bumped = area(bumped)
    if abs(I_1) < 1e-12:
        raise PatchError("Bump graph has zero total mean curvature; choose another profile.")
    log.info(f"--- Solving T = {target_T} with bump copies ---")
    log.info(f"  - host intH {I_host:.6f}, single bump intH {I_1:.6f}")

    T_host, host_mesh = _bump_T(host, u, 1, 0.0)
    if abs(T_host - target_T) <= tolerance:
        log.info(f"✅ Unperturbed host already has T = {T_host:.6f}")
        return BumpSolution(1, 0.0, T_host, target_T, 1, host_mesh)

    evaluations = 1
    n = 1
    reachable = (float('nan'), float('nan'))
    while n <= max_copies:
        predicted = sorted(((I_host - n * I_1) / math.sqrt(A_bumped), (I_host + n * I_1) / math.sqrt(A_bumped)))
        reachable = (predicted[0], predicted[1])
        if predicted[0] - tolerance <= target_T <= predicted[1] + tolerance:
            lo, hi = -1.0, 1.0
            f_lo = _bump_T(host, u, n, lo)[0] - target_T
            f_hi = _bump_T(host, u, n, hi)[0] - target_T
            evaluations += 2
            reachable = tuple(sorted((f_lo + target_T, f_hi + target_T)))
            if f_lo * f_hi <= 0:
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    T_mid, mesh = _bump_T(host, u, n, mid)
                    evaluations += 1
                    f_mid = T_mid - target_T
                    if abs(f_mid) <= tolerance:
                        log.info(f"✅ Reached T = {T_mid:.6f} with n = {n}, t = {mid:.6f} ({evaluations} meshes)")
                        return BumpSolution(n, mid, T_mid, target_T, evaluations, mesh)
                    if f_lo * f_mid <= 0:
                        hi, f_hi = mid, f_mid
                    else:
                        lo, f_lo = mid, f_mid
                raise TargetUnreachedError(f"Bisection in t stalled at n = {n} for target {target_T}.")
            log.info(f"  - n = {n}: actual range [{reachable[0]:.4f}, {reachable[1]:.4f}] misses the target")
        else:
            log.debug(f"  - n = {n}: predicted range [{predicted[0]:.4f}, {predicted[1]:.4f}]")
        n *= 2
    raise TargetUnreachedError(
        f"Target T = {target_T} not reached with up to {max_copies} copies per side; "
        f"last reachable range [{reachable[0]:.4f}, {reachable[1]:.4f}].")
