"""Parametrized surfaces in R3, S3 and H3 and their frame geometry.

Conventions used throughout:

* ``e1 = d_u / |d_u|``; ``e2`` by Gram-Schmidt from ``d_v`` (negated when
  ``orientation == -1``); ``nu`` completes ``(e1, e2, nu)`` to a positively
  oriented frame of the ambient model space.
* Shape operator ``S(X) = -grad_X nu``; components ``S[a, b]`` in the
  orthonormal frame.  Mean curvature ``H = tr(S) / 2``.
* ``omega12(X) = <grad_X e1, e2>``.
* ``R1212`` is the Gaussian curvature (+1 on the unit sphere).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GeometryError, StencilError
from .fd import FRAME_STEP, OUTER_STEP, REACH, STEP, gradient, jet
from .model_spaces import H3, R3, S3, ModelSpace

GRAM_TOL = 1e-8


@dataclass(frozen=True)
class Exact:
    """Closed-form geometry of a catalog surface, in its own frame."""

    shape: Callable
    gauss: Callable

    def mean(self, u, v):
        s = self.shape(u, v)
        return 0.5 * (s[..., 0, 0] + s[..., 1, 1])


@dataclass(frozen=True)
class Chart:
    name: str
    space: ModelSpace
    fn: Callable
    u_range: tuple
    v_range: tuple
    orientation: int = 1
    exact: Optional[Exact] = None
    params: dict = field(default_factory=dict)

    def __call__(self, u, v):
        return self.space.renormalize(self.fn(np.asarray(u, float), np.asarray(v, float)))

    @property
    def eta(self):
        return self.space.eta

    def contains(self, u, v, margin=0.0):
        u = np.asarray(u)
        v = np.asarray(v)
        return bool(
            np.all(u >= self.u_range[0] + margin - 1e-12)
            and np.all(u <= self.u_range[1] - margin + 1e-12)
            and np.all(v >= self.v_range[0] + margin - 1e-12)
            and np.all(v <= self.v_range[1] - margin + 1e-12)
        )

    def flipped(self):
        """Same surface with the opposite orientation."""
        return Chart(self.name, self.space, self.fn, self.u_range, self.v_range, -self.orientation, None, self.params)


@dataclass(frozen=True)
class Frame:
    """Frame data at one point or, with leading axes, at a batch of points.

    ``coord`` holds the frame coefficients of the coordinate fields,
    ``d_i = sum_a coord[i, a] e_a``; ``inv`` is its inverse,
    ``e_a = sum_i inv[a, i] d_i``.
    """

    u: np.ndarray
    v: np.ndarray
    point: np.ndarray
    e: np.ndarray
    normal: np.ndarray
    shape: np.ndarray
    coord: np.ndarray
    inv: np.ndarray
    omega_coord: np.ndarray

    @property
    def mean_curvature(self):
        return 0.5 * (self.shape[..., 0, 0] + self.shape[..., 1, 1])

    @property
    def omega(self):
        """``omega12(e_a)`` for a = 1, 2."""
        return np.einsum("...ai,...i->...a", self.inv, self.omega_coord)

    @property
    def area_element(self):
        return np.abs(np.linalg.det(self.coord))


def _normal(space, x, e1, e2):
    if space.kind == "R3":
        return np.cross(e1, e2)
    rows = np.stack([x, e1, e2], axis=-2)
    cof = np.stack(
        [(-1) ** (3 + i) * np.linalg.det(np.delete(rows, i, axis=-1)) for i in range(4)],
        axis=-1,
    )
    n = cof * np.asarray(space.signature, float)
    n = n / np.sqrt(space.metric(n, n))[..., None]
    sign = np.sign(np.linalg.det(np.stack([x, e1, e2, n], axis=-2)))
    return sign[..., None] * n


def frame_at(chart, u, v, h=FRAME_STEP):
    """Orthonormal frame, normal, shape operator and connection at (u, v)."""
    g = chart.space.metric
    x, (xu, xv), hess = jet(chart, (u, v), h)
    a = np.sqrt(g(xu, xu))
    e1 = xu / a[..., None]
    w = xv - g(xv, e1)[..., None] * e1
    b2 = g(w, w)
    gram = g(xu, xu) * g(xv, xv) - g(xu, xv) ** 2
    if np.any(~(gram > GRAM_TOL)):
        raise GeometryError(f"{chart.name}: degenerate chart point")
    e2 = chart.orientation * w / np.sqrt(b2)[..., None]
    nu = _normal(chart.space, x, e1, e2)
    coord = np.stack(
        [np.stack([g(xu, e1), g(xu, e2)], -1), np.stack([g(xv, e1), g(xv, e2)], -1)],
        axis=-2,
    )
    inv = np.linalg.inv(coord)
    second = np.stack(
        [np.stack([g(hess[i][j], nu) for j in range(2)], -1) for i in range(2)],
        axis=-2,
    )
    shape = np.einsum("...ai,...ij,...bj->...ab", inv, second, inv)
    shape = 0.5 * (shape + np.swapaxes(shape, -1, -2))
    omega_coord = np.stack([g(hess[0][i], e2) for i in range(2)], -1) / a[..., None]
    uu, vv = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    return Frame(uu, vv, x, np.stack([e1, e2], -2), nu, shape, coord, inv, omega_coord)


def first_fundamental_form(chart, u, v, h=STEP):
    """``(E, F, G)`` stacked on the last axis."""
    g = chart.space.metric
    _, (xu, xv) = gradient(chart, (u, v), h)
    return np.stack([g(xu, xu), g(xu, xv), g(xv, xv)], -1)


def _check_stencil(chart, u, v, reach):
    if not chart.contains(u, v, margin=reach):
        raise StencilError(f"{chart.name}: curvature stencil leaves the parameter rectangle")


#: Steps for the metric and its derivatives in the Brioschi formula.  The
#: metric's own truncation error is smooth, so a coarse inner step costs
#: nothing, while its rounding noise is what the outer differences amplify.
METRIC_STEP = 1e-2
CURVATURE_STEP = 5e-3


def gauss_curvature(chart, u, v, h=METRIC_STEP, h_outer=CURVATURE_STEP):
    """Intrinsic curvature R1212 from (E, F, G) alone, by the Brioschi formula.

    Independent of the normal and of the shape operator, so comparing it
    with ``det S`` is a genuine check of the Gauss equation.
    """
    _check_stencil(chart, u, v, REACH * (h + h_outer))
    efg, (d_u, d_v), hess = jet(lambda s, t: first_fundamental_form(chart, s, t, h), (u, v), h_outer)
    E, F, G = np.moveaxis(efg, -1, 0)
    Eu, Fu, Gu = np.moveaxis(d_u, -1, 0)
    Ev, Fv, Gv = np.moveaxis(d_v, -1, 0)
    Evv = hess[1][1][..., 0]
    Fuv = hess[0][1][..., 1]
    Guu = hess[0][0][..., 2]
    top = np.stack(
        [
            np.stack([-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev], -1),
            np.stack([Fv - 0.5 * Gu, E, F], -1),
            np.stack([0.5 * Gv, F, G], -1),
        ],
        -2,
    )
    zero = np.zeros_like(E)
    bottom = np.stack(
        [
            np.stack([zero, 0.5 * Ev, 0.5 * Gu], -1),
            np.stack([0.5 * Ev, E, F], -1),
            np.stack([0.5 * Gu, F, G], -1),
        ],
        -2,
    )
    return (np.linalg.det(top) - np.linalg.det(bottom)) / (E * G - F**2) ** 2


# --- catalog -----------------------------------------------------------------


def _const(value):
    return lambda u, v: np.full(np.broadcast(np.asarray(u), np.asarray(v)).shape, float(value))


def _diag(f1, f2):
    def shape(u, v):
        a = np.asarray(f1(u, v), float)
        b = np.asarray(f2(u, v), float)
        a, b = np.broadcast_arrays(a, b)
        out = np.zeros(a.shape + (2, 2))
        out[..., 0, 0] = a
        out[..., 1, 1] = b
        return out

    return shape


def _round_sphere(u, v):
    """Unit sphere; u azimuth, v polar angle (this order makes nu point inward)."""
    return np.stack([np.cos(u) * np.sin(v), np.sin(u) * np.sin(v), np.cos(v)], -1)


def plane():
    return Chart(
        "plane",
        R3,
        lambda u, v: np.stack(np.broadcast_arrays(u, v, np.zeros_like(u + v)), -1),
        (-1.0, 1.0),
        (-1.0, 1.0),
        exact=Exact(_diag(_const(0), _const(0)), _const(0)),
    )


def sphere(radius=1.0):
    r = float(radius)
    return Chart(
        "sphere",
        R3,
        lambda u, v: r * _round_sphere(u, v),
        (0.0, 2.0),
        (0.6, 2.5),
        exact=Exact(_diag(_const(1 / r), _const(1 / r)), _const(1 / r**2)),
        params={"radius": r},
    )


def cylinder(radius=1.0):
    r = float(radius)
    return Chart(
        "cylinder",
        R3,
        lambda u, v: np.stack(np.broadcast_arrays(r * np.cos(v), r * np.sin(v), u), -1),
        (-1.0, 1.0),
        (0.0, 2.0),
        exact=Exact(_diag(_const(0), _const(1 / r)), _const(0)),
        params={"radius": r},
    )


def catenoid():
    k = lambda u, v: np.broadcast_to(1 / np.cosh(v) ** 2, np.broadcast(np.asarray(u), np.asarray(v)).shape)
    return Chart(
        "catenoid",
        R3,
        lambda u, v: np.stack(np.broadcast_arrays(np.cosh(v) * np.cos(u), np.cosh(v) * np.sin(u), v), -1),
        (0.0, 2.0),
        (-1.0, 1.0),
        exact=Exact(_diag(lambda u, v: -k(u, v), k), lambda u, v: -k(u, v) ** 2),
    )


def totally_geodesic_s2():
    return Chart(
        "totally_geodesic_s2",
        S3,
        lambda u, v: np.concatenate([_round_sphere(u, v), np.zeros(np.shape(u + v) + (1,))], -1),
        (0.0, 2.0),
        (0.6, 2.5),
        exact=Exact(_diag(_const(0), _const(0)), _const(1)),
    )


def clifford_torus():
    s = 1 / np.sqrt(2)
    return Chart(
        "clifford_torus",
        S3,
        lambda u, v: s * np.stack(np.broadcast_arrays(np.cos(u), np.sin(u), np.cos(v), np.sin(v)), -1),
        (0.0, 2.0),
        (0.0, 2.0),
        exact=Exact(_diag(_const(-1), _const(1)), _const(0)),
    )


def geodesic_sphere_s3(rho=0.8):
    """Distance sphere of radius rho about (1, 0, 0, 0); nu points to the center."""
    rho = float(rho)
    k = np.cos(rho) / np.sin(rho)
    return Chart(
        "geodesic_sphere_s3",
        S3,
        lambda u, v: np.concatenate(
            [np.full(np.shape(u + v) + (1,), np.cos(rho)), np.sin(rho) * _round_sphere(u, v)], -1
        ),
        (0.0, 2.0),
        (0.6, 2.5),
        exact=Exact(_diag(_const(k), _const(k)), _const(1 / np.sin(rho) ** 2)),
        params={"rho": rho},
    )


def totally_geodesic_h2():
    return Chart(
        "totally_geodesic_h2",
        H3,
        lambda u, v: np.stack(
            np.broadcast_arrays(np.cosh(u) * np.cosh(v), np.sinh(u) * np.cosh(v), np.sinh(v), np.zeros_like(u + v)),
            -1,
        ),
        (-1.0, 1.0),
        (-1.0, 1.0),
        exact=Exact(_diag(_const(0), _const(0)), _const(-1)),
    )


def horosphere():
    def fn(u, v):
        s = 0.5 * (u**2 + v**2)
        return np.stack(np.broadcast_arrays(1 + s, u, v, s), -1)

    return Chart(
        "horosphere",
        H3,
        fn,
        (-1.0, 1.0),
        (-1.0, 1.0),
        exact=Exact(_diag(_const(1), _const(1)), _const(0)),
    )


def geodesic_sphere_h3(rho=0.8):
    """Distance sphere of radius rho about (1, 0, 0, 0); nu points to the center."""
    rho = float(rho)
    k = np.cosh(rho) / np.sinh(rho)
    return Chart(
        "geodesic_sphere_h3",
        H3,
        lambda u, v: np.concatenate(
            [np.full(np.shape(u + v) + (1,), np.cosh(rho)), np.sinh(rho) * _round_sphere(u, v)], -1
        ),
        (0.0, 2.0),
        (0.6, 2.5),
        exact=Exact(_diag(_const(k), _const(k)), _const(1 / np.sinh(rho) ** 2)),
        params={"rho": rho},
    )


CATALOG = {
    "plane": plane,
    "sphere": sphere,
    "cylinder": cylinder,
    "catenoid": catenoid,
    "totally_geodesic_s2": totally_geodesic_s2,
    "clifford_torus": clifford_torus,
    "geodesic_sphere_s3": geodesic_sphere_s3,
    "totally_geodesic_h2": totally_geodesic_h2,
    "horosphere": horosphere,
    "geodesic_sphere_h3": geodesic_sphere_h3,
}


def catalog(name, **params):
    """Build a catalog surface by name, e.g. ``catalog("sphere", radius=2)``."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise GeometryError(f"unknown surface {name!r}") from None
    return factory(**params)


def half_shape(chart, h=FRAME_STEP):
    """The tensor ``T = S / 2`` as a closed-form tensor function on the chart."""
    return lambda u, v: 0.5 * frame_at(chart, u, v, h).shape


def constant_tensor(matrix):
    matrix = np.asarray(matrix, float)
    return lambda u, v: np.broadcast_to(matrix, np.broadcast(np.asarray(u), np.asarray(v)).shape + matrix.shape)
