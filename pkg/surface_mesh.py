# surface_mesh.py

import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from geometry_errors import (
    DegenerateGeometryError,
    InvalidGeometryError,
    InvalidProfileError,
    MeshParseError,
    MeshValidationError,
    ParameterError,
    ResourceError,
)

log = logging.getLogger(__name__)

Projector = Callable[[np.ndarray], np.ndarray]

DEGENERATE_TOLERANCE = 1e-12
MAX_SUBDIVISIONS = 8


@dataclass
class TriangleMesh:
    """
    Closed oriented triangle mesh. Faces are wound counter-clockwise seen from
    outside, so the inner normal is the negated winding normal.

    `projector` snaps new points onto the analytic surface a builder sampled
    (used by local refinement); `markers` are named vertex index sets.
    """
    vertices: np.ndarray
    faces: np.ndarray
    genus_hint: Optional[int] = None
    projector: Optional[Projector] = field(default=None, repr=False, compare=False)
    markers: Dict[str, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise InvalidGeometryError("Face index out of range.")
        if self.genus_hint is not None and self.genus_hint < 0:
            raise InvalidGeometryError(f"genus_hint must be nonnegative, got {self.genus_hint}.")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def with_vertices(self, vertices: np.ndarray, keep_projector: bool = False) -> 'TriangleMesh':
        return TriangleMesh(np.array(vertices, dtype=float), self.faces.copy(), self.genus_hint,
                            self.projector if keep_projector else None,
                            {k: v.copy() for k, v in self.markers.items()})

    def flipped(self) -> 'TriangleMesh':
        return TriangleMesh(self.vertices.copy(), self.faces[:, [0, 2, 1]].copy(), self.genus_hint,
                            self.projector, {k: v.copy() for k, v in self.markers.items()})

    def scaled(self, factor: float) -> 'TriangleMesh':
        projector = None
        if self.projector is not None:
            base = self.projector
            projector = lambda p: factor * base(np.asarray(p) / factor)
        return TriangleMesh(self.vertices * factor, self.faces.copy(), self.genus_hint, projector,
                            {k: v.copy() for k, v in self.markers.items()})

    def translated(self, offset) -> 'TriangleMesh':
        offset = np.asarray(offset, dtype=float)
        projector = None
        if self.projector is not None:
            base = self.projector
            projector = lambda p: base(np.asarray(p) - offset) + offset
        return TriangleMesh(self.vertices + offset, self.faces.copy(), self.genus_hint, projector,
                            {k: v.copy() for k, v in self.markers.items()})

    def rotated(self, rotation: np.ndarray) -> 'TriangleMesh':
        rotation = np.asarray(rotation, dtype=float)
        projector = None
        if self.projector is not None:
            base = self.projector
            projector = lambda p: base(np.asarray(p) @ rotation) @ rotation.T
        return TriangleMesh(self.vertices @ rotation.T, self.faces.copy(), self.genus_hint, projector,
                            {k: v.copy() for k, v in self.markers.items()})

    def edges(self) -> np.ndarray:
        return _unique_edges(self.faces)[0]

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self._face_cross(), axis=1)

    def face_unit_normals(self) -> np.ndarray:
        """Outward (winding) unit normals per face."""
        cross = self._face_cross()
        norms = np.linalg.norm(cross, axis=1)
        norms[norms == 0] = 1.0
        return cross / norms[:, None]

    def bounding_box_diagonal(self) -> float:
        if not len(self.vertices):
            return 0.0
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def mean_edge_length(self) -> float:
        e = self.edges()
        return float(np.mean(np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1)))

    def _face_cross(self) -> np.ndarray:
        v = self.vertices
        f = self.faces
        return np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])


@dataclass
class DiscreteCurvatures:
    normals: np.ndarray
    H: np.ndarray
    K: np.ndarray
    areas: np.ndarray
    laplacian: Any = field(default=None, repr=False)

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))


@dataclass
class MeshDiagnostics:
    is_edge_manifold: bool
    is_closed: bool
    is_orientation_coherent: bool
    min_face_area: float
    max_face_area: float
    min_edge_length: float
    max_edge_length: float
    euler_characteristic: int
    genus: Optional[int]
    n_vertices: int
    n_edges: int
    n_faces: int
    n_components: int
    isolated_vertices: int
    degenerate_faces: int
    genus_matches_hint: bool = True

    @property
    def passes(self) -> bool:
        return (self.is_edge_manifold and self.is_closed and self.is_orientation_coherent
                and self.genus is not None and self.n_components == 1
                and self.isolated_vertices == 0 and self.degenerate_faces == 0
                and self.genus_matches_hint)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['passes'] = self.passes
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# --- Topology helpers ---

def _unique_edges(faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Undirected edges and, per face, the index of the edges (v0v1, v1v2, v2v0).
    """
    m = len(faces)
    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    keys = np.sort(directed, axis=1)
    unique, inverse = np.unique(keys, axis=0, return_inverse=True)
    face_edges = np.asarray(inverse).reshape(-1).reshape(3, m).T
    return unique, face_edges


def _orient_outward(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    v = vertices
    signed = np.einsum('ij,ij->i', v[faces[:, 0]], np.cross(v[faces[:, 1]], v[faces[:, 2]]))
    if signed.sum() < 0:
        return faces[:, [0, 2, 1]]
    return faces


def validate(mesh: TriangleMesh, tolerance: float = DEGENERATE_TOLERANCE) -> MeshDiagnostics:
    """Reports manifoldness, orientation and topology. Never raises, never mutates."""
    faces = mesh.faces
    n_v = mesh.n_vertices
    n_f = mesh.n_faces
    if n_f == 0:
        return MeshDiagnostics(False, False, False, 0.0, 0.0, 0.0, 0.0, n_v, None, n_v, 0, 0,
                               n_v, n_v, 0, mesh.genus_hint is None)

    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    keys = np.sort(directed, axis=1)
    unique, counts = np.unique(keys, axis=0, return_counts=True)
    unique_directed = np.unique(directed, axis=0)

    is_edge_manifold = bool(np.all(counts <= 2))
    is_closed = bool(np.all(counts == 2))
    is_coherent = bool(len(unique_directed) == len(directed))

    areas = mesh.face_areas()
    lengths = np.linalg.norm(mesh.vertices[unique[:, 1]] - mesh.vertices[unique[:, 0]], axis=1)
    bbox_sq = mesh.bounding_box_diagonal() ** 2
    degenerate = int(np.count_nonzero(areas <= tolerance * bbox_sq))

    used = np.bincount(faces.ravel(), minlength=n_v)
    isolated = int(np.count_nonzero(used == 0))

    adjacency = sparse.coo_matrix((np.ones(len(unique)), (unique[:, 0], unique[:, 1])), shape=(n_v, n_v))
    n_components, _ = connected_components(adjacency, directed=False)
    n_components -= isolated

    chi = int(n_v - isolated - len(unique) + n_f)
    genus: Optional[int] = None
    if is_closed and (2 - chi) % 2 == 0 and chi <= 2:
        genus = (2 - chi) // 2
    matches = mesh.genus_hint is None or genus == mesh.genus_hint

    return MeshDiagnostics(
        is_edge_manifold=is_edge_manifold,
        is_closed=is_closed,
        is_orientation_coherent=is_coherent,
        min_face_area=float(areas.min()),
        max_face_area=float(areas.max()),
        min_edge_length=float(lengths.min()),
        max_edge_length=float(lengths.max()),
        euler_characteristic=chi,
        genus=genus,
        n_vertices=n_v,
        n_edges=len(unique),
        n_faces=n_f,
        n_components=int(n_components),
        isolated_vertices=isolated,
        degenerate_faces=degenerate,
        genus_matches_hint=matches,
    )


def require_valid(mesh: TriangleMesh) -> MeshDiagnostics:
    diagnostics = validate(mesh)
    if not diagnostics.passes:
        raise MeshValidationError("Mesh failed validation.", diagnostics)
    return diagnostics


# --- Builders ---

_ICOSAHEDRON_FACES = np.array([
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
])


def _subdivide(vertices: np.ndarray, faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    unique, face_edges = _unique_edges(faces)
    mids = 0.5 * (vertices[unique[:, 0]] + vertices[unique[:, 1]])
    idx = len(vertices) + face_edges
    ab, bc, ca = idx[:, 0], idx[:, 1], idx[:, 2]
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    new_faces = np.concatenate([
        np.stack([a, ab, ca], axis=1),
        np.stack([b, bc, ab], axis=1),
        np.stack([c, ca, bc], axis=1),
        np.stack([ab, bc, ca], axis=1),
    ])
    return np.vstack([vertices, mids]), new_faces


def sphere_projector(radius: float, center=(0.0, 0.0, 0.0)) -> Projector:
    center = np.asarray(center, dtype=float)

    def project(points: np.ndarray) -> np.ndarray:
        d = np.atleast_2d(points) - center
        return center + radius * d / np.linalg.norm(d, axis=1)[:, None]
    return project


def build_icosphere(subdivisions: int, radius: float = 1.0,
                    max_subdivisions: int = MAX_SUBDIVISIONS) -> TriangleMesh:
    if subdivisions < 0:
        raise ParameterError(f"subdivisions must be nonnegative, got {subdivisions}.")
    if subdivisions > max_subdivisions:
        raise ResourceError(f"subdivisions={subdivisions} exceeds the limit of {max_subdivisions}.")
    if radius <= 0:
        raise InvalidGeometryError(f"radius must be positive, got {radius}.")

    phi = (1.0 + np.sqrt(5.0)) / 2.0
    vertices = np.array([
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ], dtype=float)
    faces = _ICOSAHEDRON_FACES.copy()
    vertices /= np.linalg.norm(vertices, axis=1)[:, None]
    for _ in range(subdivisions):
        vertices, faces = _subdivide(vertices, faces)
        vertices /= np.linalg.norm(vertices, axis=1)[:, None]
    vertices *= radius
    faces = _orient_outward(vertices, faces)
    log.debug(f"Icosphere level {subdivisions}: {len(vertices)} vertices, {len(faces)} faces.")
    return TriangleMesh(vertices, faces, genus_hint=0, projector=sphere_projector(radius))


def torus_projector(major_R: float, minor_r: float) -> Projector:
    def project(points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(points)
        rho = np.hypot(p[:, 0], p[:, 1])
        u = np.arctan2(p[:, 1], p[:, 0])
        d = np.stack([rho - major_R, p[:, 2]], axis=1)
        d /= np.linalg.norm(d, axis=1)[:, None]
        ring = major_R + minor_r * d[:, 0]
        return np.stack([ring * np.cos(u), ring * np.sin(u), minor_r * d[:, 1]], axis=1)
    return project


def build_torus(major_R: float, minor_r: float, n_u: int = 64, n_v: int = 64) -> TriangleMesh:
    if n_u < 8 or n_v < 8:
        raise ParameterError(f"Torus resolution must be at least 8x8, got {n_u}x{n_v}.")
    if major_R <= 0 or minor_r <= 0:
        raise InvalidGeometryError("Torus radii must be positive.")
    if minor_r >= major_R:
        raise InvalidGeometryError(f"minor_r={minor_r} >= major_R={major_R} gives a self-intersecting torus.")

    u = 2 * np.pi * np.arange(n_u) / n_u
    v = 2 * np.pi * np.arange(n_v) / n_v
    uu, vv = np.meshgrid(u, v, indexing='ij')
    ring = major_R + minor_r * np.cos(vv)
    vertices = np.stack([ring * np.cos(uu), ring * np.sin(uu), minor_r * np.sin(vv)], axis=-1).reshape(-1, 3)

    i, j = np.meshgrid(np.arange(n_u), np.arange(n_v), indexing='ij')
    i, j = i.ravel(), j.ravel()
    a = i * n_v + j
    b = ((i + 1) % n_u) * n_v + j
    c = ((i + 1) % n_u) * n_v + (j + 1) % n_v
    d = i * n_v + (j + 1) % n_v
    faces = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])
    return TriangleMesh(vertices, faces, genus_hint=1, projector=torus_projector(major_R, minor_r))


def revolve_profile(curve, n_phi: int = 64) -> TriangleMesh:
    """
    Surface of revolution of a profile (gamma1 = radius, gamma2 = height).
    Both axis endpoints become cone vertices.
    """
    if n_phi < 8:
        raise ParameterError(f"n_phi must be at least 8, got {n_phi}.")
    pts = np.stack([np.asarray(curve.gamma1, dtype=float), np.asarray(curve.gamma2, dtype=float)], axis=1)
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-14, axis=1)
    pts = pts[keep]
    if len(pts) < 3:
        raise InvalidProfileError("Profile needs at least one interior sample.")

    interior = pts[1:-1]
    if np.any(interior[:, 0] <= 0):
        bad = int(np.argmax(interior[:, 0] <= 0)) + 1
        raise InvalidProfileError(f"Profile radius is not positive at interior sample {bad}.")

    n_rings = len(interior)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    ring_xyz = np.stack([
        interior[:, 0][:, None] * np.cos(phi)[None, :],
        interior[:, 0][:, None] * np.sin(phi)[None, :],
        np.repeat(interior[:, 1][:, None], n_phi, axis=1),
    ], axis=-1).reshape(-1, 3)
    bottom = np.array([[0.0, 0.0, pts[0, 1]]])
    top = np.array([[0.0, 0.0, pts[-1, 1]]])
    vertices = np.vstack([bottom, ring_xyz, top])
    top_index = len(vertices) - 1

    i = np.arange(n_phi)
    i_next = (i + 1) % n_phi
    faces: List[np.ndarray] = [np.stack([np.zeros(n_phi, dtype=np.int64), 1 + i_next, 1 + i], axis=1)]
    for k in range(n_rings - 1):
        lo = 1 + k * n_phi
        hi = lo + n_phi
        faces.append(np.stack([lo + i, lo + i_next, hi + i_next], axis=1))
        faces.append(np.stack([lo + i, hi + i_next, hi + i], axis=1))
    last = 1 + (n_rings - 1) * n_phi
    faces.append(np.stack([last + i, last + i_next, np.full(n_phi, top_index)], axis=1))
    return TriangleMesh(vertices, np.concatenate(faces), genus_hint=0)


# --- Refinement ---

def refine_near(mesh: TriangleMesh, center, radius: float, levels: int = 1) -> TriangleMesh:
    """
    Red-green refinement of the faces touching the ball B(center, radius).
    Red faces split 1-to-4, faces with a single split edge are bisected.
    New points are snapped with the mesh projector when one is attached.
    """
    center = np.asarray(center, dtype=float)
    vertices = mesh.vertices.copy()
    faces = mesh.faces.copy()
    for _ in range(levels):
        near = np.linalg.norm(vertices - center, axis=1) <= radius
        red = np.any(near[faces], axis=1)
        if not red.any():
            break
        unique, face_edges = _unique_edges(faces)
        split = np.zeros(len(unique), dtype=bool)
        while True:
            split[face_edges[red].ravel()] = True
            counts = split[face_edges].sum(axis=1)
            grown = counts >= 2
            if np.array_equal(grown | red, red):
                break
            red = grown | red
        counts = split[face_edges].sum(axis=1)
        green = (counts == 1) & ~red

        split_ids = np.flatnonzero(split)
        mids = 0.5 * (vertices[unique[split_ids, 0]] + vertices[unique[split_ids, 1]])
        if mesh.projector is not None:
            mids = mesh.projector(mids)
        mid_index = np.full(len(unique), -1, dtype=np.int64)
        mid_index[split_ids] = len(vertices) + np.arange(len(split_ids))
        vertices = np.vstack([vertices, mids])

        keep = faces[~red & ~green]
        rf = faces[red]
        re = mid_index[face_edges[red]]
        red_faces = np.concatenate([
            np.stack([rf[:, 0], re[:, 0], re[:, 2]], axis=1),
            np.stack([rf[:, 1], re[:, 1], re[:, 0]], axis=1),
            np.stack([rf[:, 2], re[:, 2], re[:, 1]], axis=1),
            re,
        ])
        gf = faces[green]
        ge = face_edges[green]
        which = np.argmax(split[ge], axis=1)
        green_faces = []
        for f, k, e in zip(gf, which, ge):
            a, b, c = f[k], f[(k + 1) % 3], f[(k + 2) % 3]
            m = mid_index[e[k]]
            green_faces.append((a, m, c))
            green_faces.append((m, b, c))
        parts = [keep, red_faces]
        if green_faces:
            parts.append(np.array(green_faces, dtype=np.int64))
        faces = np.concatenate(parts)
    log.debug(f"Refined near {center.tolist()}: {mesh.n_vertices} -> {len(vertices)} vertices.")
    return TriangleMesh(vertices, faces, mesh.genus_hint, mesh.projector,
                        {k: v.copy() for k, v in mesh.markers.items()})


# --- Curvature operators ---

def cotangent_laplacian(vertices: np.ndarray, faces: np.ndarray) -> Tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
    """
    Returns (L, cot, angles): L_ij = (cot a + cot b)/2, L_ii = -sum_j L_ij, and
    the per-corner cotangents and angles.
    """
    n = len(vertices)
    corners = []
    for k in range(3):
        p = vertices[faces[:, k]]
        e1 = vertices[faces[:, (k + 1) % 3]] - p
        e2 = vertices[faces[:, (k + 2) % 3]] - p
        dot = np.einsum('ij,ij->i', e1, e2)
        cross = np.linalg.norm(np.cross(e1, e2), axis=1)
        corners.append((dot, cross))
    cross_norm = corners[0][1]
    if np.any(cross_norm <= 0):
        raise DegenerateGeometryError("Mesh has a zero-area face.")
    cot = np.stack([c[0] / c[1] for c in corners], axis=1)
    angles = np.stack([np.arctan2(c[1], c[0]) for c in corners], axis=1)

    rows, cols, vals = [], [], []
    for k in range(3):
        i = faces[:, (k + 1) % 3]
        j = faces[:, (k + 2) % 3]
        w = 0.5 * cot[:, k]
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    off = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    diag = np.asarray(off.sum(axis=1)).ravel()
    L = (off - sparse.diags(diag)).tocsr()
    return L, cot, angles


def mixed_areas(vertices: np.ndarray, faces: np.ndarray, cot: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Mixed Voronoi areas: circumcentric for non-obtuse faces, barycentric split otherwise."""
    n = len(vertices)
    sq = np.stack([
        np.sum((vertices[faces[:, (k + 1) % 3]] - vertices[faces[:, (k + 2) % 3]]) ** 2, axis=1)
        for k in range(3)
    ], axis=1)
    face_area = 0.5 * np.linalg.norm(np.cross(vertices[faces[:, 1]] - vertices[faces[:, 0]],
                                              vertices[faces[:, 2]] - vertices[faces[:, 0]]), axis=1)
    obtuse = angles > np.pi / 2
    any_obtuse = obtuse.any(axis=1)

    contrib = np.zeros_like(cot)
    for k in range(3):
        # edges adjacent to corner k are opposite corners k+1 and k+2
        k1, k2 = (k + 1) % 3, (k + 2) % 3
        contrib[:, k] = (sq[:, k1] * cot[:, k1] + sq[:, k2] * cot[:, k2]) / 8.0
    fallback = np.where(obtuse, face_area[:, None] / 2.0, face_area[:, None] / 4.0)
    contrib = np.where(any_obtuse[:, None], fallback, contrib)
    return np.bincount(faces.ravel(), weights=contrib.ravel(), minlength=n)


def vertex_normals(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Inner unit normals from area-weighted face normals."""
    cross = np.cross(vertices[faces[:, 1]] - vertices[faces[:, 0]], vertices[faces[:, 2]] - vertices[faces[:, 0]])
    acc = np.stack([
        np.bincount(faces.ravel(), weights=np.repeat(cross[:, d], 3), minlength=len(vertices))
        for d in range(3)
    ], axis=1)
    norms = np.linalg.norm(acc, axis=1)
    if np.any(norms <= 0):
        raise DegenerateGeometryError("Vertex normal is undefined (isolated or cancelling one-ring).")
    return -acc / norms[:, None]


def compute_curvatures(mesh: TriangleMesh) -> DiscreteCurvatures:
    vertices, faces = mesh.vertices, mesh.faces
    used = np.bincount(faces.ravel(), minlength=mesh.n_vertices)
    if np.any(used == 0):
        raise DegenerateGeometryError(f"Mesh has {int(np.count_nonzero(used == 0))} isolated vertices.")

    L, cot, angles = cotangent_laplacian(vertices, faces)
    areas = mixed_areas(vertices, faces, cot, angles)
    if np.any(areas <= 0):
        raise DegenerateGeometryError("Zero-area Voronoi cell.")

    normals = vertex_normals(vertices, faces)
    mean_curvature_vector = (L @ vertices) / areas[:, None]
    H = np.einsum('ij,ij->i', mean_curvature_vector, normals)
    angle_sum = np.bincount(faces.ravel(), weights=angles.ravel(), minlength=mesh.n_vertices)
    K = (2 * np.pi - angle_sum) / areas
    return DiscreteCurvatures(normals=normals, H=H, K=K, areas=areas, laplacian=L)


def min_angle_degrees(mesh: TriangleMesh) -> float:
    _, _, angles = cotangent_laplacian(mesh.vertices, mesh.faces)
    return float(np.degrees(angles.min()))


# --- OBJ I/O ---

def write_obj(mesh: TriangleMesh, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# vertices {mesh.n_vertices} faces {mesh.n_faces}"]
    lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    path.write_text("\n".join(lines) + "\n", encoding='utf-8')
    log.info(f"  - Wrote {path.name} ({mesh.n_vertices} vertices, {mesh.n_faces} faces)")
    return path


def _parse_face_token(token: str, n_seen: int, line_no: int) -> int:
    head = token.split('/')[0]
    try:
        index = int(head)
    except ValueError as e:
        raise MeshParseError(f"Line {line_no}: bad face index '{token}'.") from e
    if index < 0:
        index = n_seen + index + 1
    if index < 1:
        raise MeshParseError(f"Line {line_no}: face index {token} out of range.")
    return index - 1


def read_obj(path: Union[str, Path]) -> TriangleMesh:
    """Reads `v`/`f` records; polygons are fan-triangulated, everything else is ignored."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise MeshParseError(f"Could not read '{path}': {e}") from e

    vertices: List[Tuple[float, float, float]] = []
    faces: List[Tuple[int, int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0].startswith('#'):
            continue
        if parts[0] == 'v':
            if len(parts) < 4:
                raise MeshParseError(f"Line {line_no}: vertex needs three coordinates.")
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError as e:
                raise MeshParseError(f"Line {line_no}: bad coordinate in '{raw.strip()}'.") from e
        elif parts[0] == 'f':
            if len(parts) < 4:
                raise MeshParseError(f"Line {line_no}: face needs at least three indices.")
            idx = [_parse_face_token(tok, len(vertices), line_no) for tok in parts[1:]]
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))

    if not vertices or not faces:
        raise MeshParseError(f"'{path.name}' contains no triangles.")
    faces_arr = np.array(faces, dtype=np.int64)
    if faces_arr.max() >= len(vertices):
        raise MeshParseError(f"'{path.name}' references vertex {faces_arr.max() + 1} of {len(vertices)}.")
    return TriangleMesh(np.array(vertices), faces_arr)
