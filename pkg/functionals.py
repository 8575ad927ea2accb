# functionals.py

import json
import logging
import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional, Tuple

import numpy as np

from geometry_errors import DegenerateGeometryError, OrientationError
from surface_mesh import DiscreteCurvatures, TriangleMesh, compute_curvatures

log = logging.getLogger(__name__)

REPORT_COLUMNS = ['W', 'T', 'A', 'V', 'iso', 'intH']


def _sig12(value: float) -> float:
    if value is None or not math.isfinite(value):
        return value
    return float(f"{value:.12g}")


@dataclass
class FunctionalReport:
    W: float
    T: float
    A: float
    V: float
    iso: float
    total_mean_curvature: float

    def to_row(self) -> Dict[str, float]:
        return {'W': self.W, 'T': self.T, 'A': self.A, 'V': self.V, 'iso': self.iso,
                'intH': self.total_mean_curvature}

    def to_csv_row(self) -> str:
        return ",".join(f"{v:.12g}" for v in self.to_row().values())

    def to_dict(self) -> Dict[str, Any]:
        return {k: _sig12(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def willmore_energy(curv: DiscreteCurvatures) -> float:
    return float(0.25 * np.sum(curv.H ** 2 * curv.areas))


def total_mean_curvature(curv: DiscreteCurvatures) -> float:
    return float(np.sum(curv.H * curv.areas))


def total_gauss_curvature(curv: DiscreteCurvatures) -> float:
    return float(np.sum(curv.K * curv.areas))


def total_mean_curvature_ratio(curv: DiscreteCurvatures) -> float:
    A = curv.total_area
    if A <= 0:
        raise DegenerateGeometryError("Total area is zero.")
    return total_mean_curvature(curv) / math.sqrt(A)


def area(mesh: TriangleMesh) -> float:
    return float(np.sum(mesh.face_areas()))


def enclosed_volume(mesh: TriangleMesh) -> float:
    """Signed-tetrahedron volume; positive for outward winding (inner normals)."""
    v, f = mesh.vertices, mesh.faces
    det = np.einsum('ij,ij->i', v[f[:, 0]], np.cross(v[f[:, 1]], v[f[:, 2]]))
    return float(np.sum(det) / 6.0)


def isoperimetric_ratio(mesh: TriangleMesh) -> float:
    V = enclosed_volume(mesh)
    if V <= 0:
        raise OrientationError(f"Enclosed volume {V:.6g} is not positive; check face orientation.")
    return area(mesh) / V ** (2.0 / 3.0)


def helfrich_energy(curv: DiscreteCurvatures, c0: float) -> float:
    return float(np.sum((curv.H / 2.0 - c0) ** 2 * curv.areas))


def optimal_spontaneous_curvature(curv: DiscreteCurvatures) -> Tuple[float, float]:
    """The minimizing c0 = intH/(2A) and the Helfrich energy there, which equals W - T^2/4."""
    A = curv.total_area
    if A <= 0:
        raise DegenerateGeometryError("Total area is zero.")
    c0 = total_mean_curvature(curv) / (2.0 * A)
    return c0, helfrich_energy(curv, c0)


def functional_report(mesh: TriangleMesh, curv: Optional[DiscreteCurvatures] = None) -> FunctionalReport:
    if curv is None:
        curv = compute_curvatures(mesh)
    V = enclosed_volume(mesh)
    A_faces = area(mesh)
    iso = A_faces / V ** (2.0 / 3.0) if V > 0 else float('nan')
    return FunctionalReport(
        W=willmore_energy(curv),
        T=total_mean_curvature_ratio(curv),
        A=A_faces,
        V=V,
        iso=iso,
        total_mean_curvature=total_mean_curvature(curv),
    )


def l2_inner(curv: DiscreteCurvatures, f: np.ndarray, g: np.ndarray) -> float:
    return float(np.sum(f * g * curv.areas))


def gradient_T(curv: DiscreteCurvatures, report: Optional[FunctionalReport] = None) -> np.ndarray:
    """L2 gradient of T for normal variations along the inner normal: T H/(2A) - 2K/sqrt(A)."""
    A = curv.total_area
    if A <= 0:
        raise DegenerateGeometryError("Total area is zero.")
    T = report.T if report is not None else total_mean_curvature_ratio(curv)
    return T * curv.H / (2.0 * A) - 2.0 * curv.K / math.sqrt(A)


def laplace_beltrami(curv: DiscreteCurvatures, field: np.ndarray) -> np.ndarray:
    return (curv.laplacian @ field) / curv.areas


def gradient_W(curv: DiscreteCurvatures) -> np.ndarray:
    """
    L2 gradient of W = 1/4 int H^2: (Delta H + |A0|^2 H)/2 with |A0|^2 = H^2/2 - 2K.
    """
    traceless_sq = curv.H ** 2 / 2.0 - 2.0 * curv.K
    return 0.5 * (laplace_beltrami(curv, curv.H) + traceless_sq * curv.H)


def normal_variation(mesh: TriangleMesh, curv: DiscreteCurvatures, xi: np.ndarray, t: float) -> TriangleMesh:
    """The mesh f + t xi n with n the inner vertex normal."""
    return mesh.with_vertices(mesh.vertices + t * np.asarray(xi)[:, None] * curv.normals)
