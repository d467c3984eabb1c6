"""The four ambient model geometries and their Killing constants.

S3 sits in Euclidean R4 as the unit sphere; H3 is the upper sheet of the
hyperboloid <x, x> = -1 in Minkowski space with signature (-, +, +, +).
"""

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .fd import FIRST, OFFSETS, STEP

ON_SPACE_TOL = 1e-10


@dataclass(frozen=True)
class ModelSpace:
    kind: str
    dim: int
    signature: tuple
    eta: complex

    @property
    def curvature(self):
        """Sectional curvature; equals 4 eta^2."""
        return (4 * self.eta**2).real

    def metric(self, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        if u.shape[-1] != self.dim or v.shape[-1] != self.dim:
            raise GeometryError(f"{self.kind}: expected ambient dimension {self.dim}")
        return np.einsum("...i,i,...i->...", u, np.asarray(self.signature, float), v)

    def renormalize(self, x):
        """Push a point back onto the quadric (no-op for flat spaces)."""
        x = np.asarray(x, float)
        if self.kind == "S3":
            return x / np.linalg.norm(x, axis=-1, keepdims=True)
        if self.kind == "H3":
            return x / np.sqrt(-self.metric(x, x))[..., None]
        return x

    def defect(self, p):
        """How far ``p`` is from lying on the model space."""
        p = np.asarray(p, float)
        if self.kind == "S3":
            return np.abs(self.metric(p, p) - 1.0)
        if self.kind == "H3":
            return np.abs(self.metric(p, p) + 1.0) + np.where(p[..., 0] > 0, 0.0, np.inf)
        return np.zeros(p.shape[:-1])

    def check_point(self, p):
        if p.shape[-1] != self.dim:
            raise GeometryError(f"{self.kind}: expected ambient dimension {self.dim}")
        if np.any(self.defect(p) > ON_SPACE_TOL):
            raise GeometryError(f"point does not lie on {self.kind}")

    def tangent_project(self, p, w):
        """Remove the component of ``w`` along the position normal at ``p``."""
        p = np.asarray(p, float)
        w = np.asarray(w, float)
        self.check_point(p)
        if w.shape[-1] != self.dim:
            raise GeometryError(f"{self.kind}: expected ambient dimension {self.dim}")
        if self.kind == "S3":
            return w - self.metric(w, p)[..., None] * p
        if self.kind == "H3":
            return w + self.metric(w, p)[..., None] * p
        return w


R3 = ModelSpace("R3", 3, (1, 1, 1), 0j)
S3 = ModelSpace("S3", 4, (1, 1, 1, 1), 0.5 + 0j)
H3 = ModelSpace("H3", 4, (-1, 1, 1, 1), 0.5j)
R4 = ModelSpace("R4", 4, (1, 1, 1, 1), 0j)
SPACES = {s.kind: s for s in (R3, S3, H3, R4)}


def model_space(kind):
    try:
        return SPACES[kind]
    except KeyError:
        raise GeometryError(f"unknown model space {kind!r}; expected one of {sorted(SPACES)}") from None


def metric(space, u, v):
    return space.metric(u, v)


def tangent_project(space, p, w):
    return space.tangent_project(p, w)


def ambient_cov_deriv(space, points, vectors, dt=STEP):
    """Covariant derivative of a vector field sampled along a curve.

    ``points`` and ``vectors`` hold samples at equally spaced curve
    parameters with spacing ``dt``.  The result lives on the interior
    samples (two dropped at each end) and is projected to the tangent
    space of the model space.
    """
    points = np.asarray(points, float)
    vectors = np.asarray(vectors, float)
    if points.shape != vectors.shape:
        raise GeometryError("points and vectors must have the same shape")
    if not dt > 0 or points.shape[0] < len(OFFSETS):
        raise GeometryError("need at least five samples and a positive step")
    n = points.shape[0]
    deriv = sum(c * vectors[2 + o : n - 2 + o] for o, c in zip(OFFSETS, FIRST) if c) / dt
    return space.tangent_project(points[2 : n - 2], deriv)
