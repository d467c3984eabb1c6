"""Oriented hypersurfaces of R4 and the equation ``grad_X phi + T(X).phi = 0``.

Frame conventions mirror the surface case: ``e1, e2, e3`` by Gram-Schmidt
from the coordinate fields (``e3`` negated for ``orientation == -1``),
``nu`` completes ``(e1, e2, e3, nu)`` to a positive basis of R4, ``S(X) =
-D_X nu`` and ``omega[j, k](X) = <D_X e_j, e_k>``.

Curvature components follow ``R_ijkl = g(R(e_i, e_j) e_l, e_k)``, so for a
hypersurface ``R_ijkl = h_ik h_jl - h_il h_jk`` and the Gauss identity reads
``R_ijkl + 4 T_il T_jk - 4 T_ik T_jl = 0`` with ``h = 2T``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import clifford as cl
from .errors import FlatnessError, GeometryError, VanishingSpinorError
from .fd import FRAME_STEP, grid_diff, jet, reach
from .killing_flow import (
    BASE_SPINOR,
    FLAT_TOL,
    STEPS_PER_CELL,
    PlaquetteReport,
    cell_areas,
    plaquette_holonomy,
    sweep,
    tables_for,
)
from .model_spaces import R4
from .reports import residual_report

METRIC_STEP = 1e-2
CHRISTOFFEL_STEP = 5e-3
#: Step for differentiating closed-form tensor fields in the Codazzi check.
CODAZZI_STEP = 5e-3
#: Accuracy order of grid derivatives of sampled 3D fields; coarse 16^3
#: grids need more than fourth order to resolve the spinor to 1e-6.
GRID_ORDER = 8
PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class Chart3:
    name: str
    fn: Callable
    box: tuple
    orientation: int = 1
    exact_shape: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    space = R4

    def __call__(self, u, v, w):
        return self.fn(np.asarray(u, float), np.asarray(v, float), np.asarray(w, float))

    def contains(self, *params, margin=0.0):
        return all(
            np.all(np.asarray(p) >= lo + margin - 1e-12) and np.all(np.asarray(p) <= hi - margin + 1e-12)
            for p, (lo, hi) in zip(params, self.box)
        )


@dataclass(frozen=True)
class Frame3:
    """``d_i = sum_a coord[i, a] e_a``; ``omega_coord[i, j, k] = omega_jk(d_i)``."""

    point: np.ndarray
    e: np.ndarray
    normal: np.ndarray
    shape: np.ndarray
    coord: np.ndarray
    inv: np.ndarray
    omega_coord: np.ndarray

    @property
    def omega(self):
        """``omega[a, j, k] = omega_jk(e_a)``."""
        return np.einsum("...ai,...ijk->...ajk", self.inv, self.omega_coord)


def _normal4(e):
    cof = np.stack([(-1) ** (3 + i) * np.linalg.det(np.delete(e, i, axis=-1)) for i in range(4)], -1)
    return cof / np.linalg.norm(cof, axis=-1, keepdims=True)


def frame3_at(chart, u, v, w, h=FRAME_STEP):
    x, first, hess = jet(chart, (u, v, w), h)
    basis = []
    for k in range(3):
        vec = first[k]
        for b in basis:
            vec = vec - np.sum(vec * b, -1)[..., None] * b
        n = np.linalg.norm(vec, axis=-1)
        if np.any(n < 1e-8):
            raise GeometryError(f"{chart.name}: degenerate chart point")
        basis.append(vec / n[..., None])
    basis[2] = chart.orientation * basis[2]
    e = np.stack(basis, -2)
    nu = _normal4(e)
    X = np.stack(first, -2)
    coord = np.einsum("...id,...ad->...ia", X, e)
    inv = np.linalg.inv(coord)
    second = np.stack([np.stack([np.sum(hess[i][j] * nu, -1) for j in range(3)], -1) for i in range(3)], -2)
    shape = np.einsum("...ai,...ij,...bj->...ab", inv, second, inv)
    shape = 0.5 * (shape + np.swapaxes(shape, -1, -2))
    # <d_i e_j, e_k> = sum_{m <= j} inv[j, m] <x_mi, e_k> for j < k (Gram-Schmidt is triangular)
    H = np.stack([np.stack([hess[m][i] for m in range(3)], -2) for i in range(3)], -3)
    proj = np.einsum("...jm,...imd,...kd->...ijk", inv, H, e)
    upper = np.triu(np.ones((3, 3)), 1)
    omega = proj * upper
    omega = omega - np.swapaxes(omega, -1, -2)
    return Frame3(x, e, nu, shape, coord, inv, omega)


# --- grids and fields ---------------------------------------------------------------


@dataclass(frozen=True)
class Grid3:
    axes: tuple

    @classmethod
    def on(cls, chart, n):
        counts = (n, n, n) if np.isscalar(n) else tuple(n)
        low = 2 * reach(GRID_ORDER) + 1
        if min(counts) < low:
            raise GeometryError(f"grid must have at least {low} nodes per axis")
        return cls(tuple(np.linspace(lo, hi, k) for (lo, hi), k in zip(chart.box, counts)))

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    @property
    def spacing(self):
        return tuple(a[1] - a[0] for a in self.axes)

    def mesh(self):
        return np.meshgrid(*self.axes, indexing="ij")

    @property
    def interior(self):
        r = reach(GRID_ORDER)
        return tuple(slice(r, n - r) for n in self.shape)


@dataclass(frozen=True)
class SpinorField3:
    chart: Chart3
    grid: Grid3
    values: np.ndarray
    path_residual: float = None

    @cached_property
    def frames(self):
        return frame3_at(self.chart, *self.grid.mesh())


@dataclass(frozen=True)
class TensorField3:
    chart: Chart3
    grid: Grid3
    values: np.ndarray


# --- connection ---------------------------------------------------------------


class HalfShape3:
    """``T = h / 2`` of a hypersurface chart."""

    def __init__(self, chart, h=FRAME_STEP):
        self.chart = chart
        self.h = h

    def __call__(self, u, v, w):
        return self.from_frame(frame3_at(self.chart, u, v, w, self.h))

    @staticmethod
    def from_frame(frame):
        return 0.5 * frame.shape


def _tensor3(T, params, frame):
    if hasattr(T, "from_frame"):
        return T.from_frame(frame)
    return np.asarray(T(*params), float)


@dataclass(frozen=True)
class Connection3:
    """``grad_X + T(X).`` on a hypersurface chart."""

    chart: Chart3
    T: object
    h: float = FRAME_STEP

    def matrix(self, u, v, w, du, dv, dw):
        frame = frame3_at(self.chart, u, v, w, self.h)
        d = np.stack(np.broadcast_arrays(*(np.asarray(c, float) for c in (du, dv, dw))), -1)
        x = np.einsum("...i,...ia->...a", d, frame.coord)
        om = np.einsum("...i,...ijk->...jk", d, frame.omega_coord)
        spin = sum(0.5 * om[..., j, k][..., None, None] * cl.BIVECTORS3[n] for n, (j, k) in enumerate(PAIRS))
        tx = np.einsum("...ab,...b->...a", _tensor3(self.T, (u, v, w), frame), x)
        return spin + cl.clifford_matrix(tx, cl.E3)


def covariant_derivative3(field, values=None):
    """``grad_{e_a} phi`` at every node; shape (nu, nv, nw, 3, 2)."""
    phi = field.values if values is None else values
    partial = np.stack([grid_diff(phi, k, s, GRID_ORDER) for k, s in enumerate(field.grid.spacing)], axis=-2)
    frames = field.frames
    directional = np.einsum("...ai,...is->...as", frames.inv, partial)
    om = frames.omega
    spin = sum(
        0.5 * om[..., j, k][..., None] * cl.act(cl.BIVECTORS3[n], phi)[..., None, :]
        for n, (j, k) in enumerate(PAIRS)
    )
    return directional + spin


def spinor_cov_deriv3(field, i, node):
    """``grad_{e_i} phi`` at an interior node, i in 1..3."""
    if i not in (1, 2, 3):
        raise ValueError("direction must be 1, 2 or 3")
    r = reach(GRID_ORDER)
    if any(not (r <= k < n - r) for k, n in zip(node, field.grid.shape)):
        raise GeometryError(f"node {node} is a boundary node without derivative data")
    return covariant_derivative3(field)[tuple(node)][i - 1]


def flatness_check3(conn, grid, steps=STEPS_PER_CELL, tables=None):
    """Plaquette holonomy in each coordinate plane; one report per plane."""
    tables = tables or tables_for(conn, grid.axes, steps)
    frame_fn = lambda u, v, w: frame3_at(conn.chart, u, v, w)
    return {
        (a, b): PlaquetteReport(plaquette_holonomy(tables, grid.axes, steps, a, b), cell_areas(frame_fn, grid.axes, a, b))
        for a, b in PAIRS
    }


def solve3(
    chart, T, grid, phi0=BASE_SPINOR, steps=STEPS_PER_CELL, flat_tol=FLAT_TOL, check_flatness=True, tables=None
):
    """Solve ``grad_X phi + T(X).phi = 0`` on the grid.

    Sweeps w-lines, then v-lines, then u-lines; the reverse order only
    measures path dependence (``path_residual``).
    """
    conn = Connection3(chart, T)
    tables = tables or tables_for(conn, grid.axes, steps)
    if check_flatness:
        reports = flatness_check3(conn, grid, steps, tables)
        worst = max(r.max_density for r in reports.values())
        if worst > flat_tol:
            raise FlatnessError(
                f"{chart.name}: holonomy defect per unit area {worst:.3e} exceeds {flat_tol:.1e}", reports
            )
    first = sweep(tables, grid.axes, steps, phi0, (2, 1, 0))
    second = sweep(tables, grid.axes, steps, phi0, (0, 1, 2))
    residual = float(np.max(np.sqrt(cl.norm2(first - second))))
    return SpinorField3(chart, grid, first, residual)


def _report(identity, field, residual):
    return residual_report(identity, field.chart.name, 0, field.grid.shape, residual, point_axes=3)


def verify_parallel3(field, T):
    """Residual of ``grad_X phi + T(X).phi`` for X = e1, e2, e3."""
    t = T.values if isinstance(T, TensorField3) else _tensor3(T, field.grid.mesh(), field.frames)
    nabla = covariant_derivative3(field)
    residual = np.stack([nabla[..., a, :] + cl.mul3(t[..., a, :], field.values) for a in range(3)], -2)
    return _report("parallel3", field, residual)


def energy_momentum3(field):
    """``T(X, Y) = 1/2 Re(X.grad_Y phi + Y.grad_X phi, phi) / |phi|^2`` in dimension 3."""
    phi = field.values
    n2 = cl.norm2(phi)
    if np.any(np.sqrt(n2) <= 1e-10):
        raise VanishingSpinorError("spinor field vanishes at some node")
    nabla = covariant_derivative3(field)
    pairing = np.stack(
        [np.stack([cl.re_inner(cl.act(cl.E3[l], nabla[..., j, :]), phi) for j in range(3)], -1) for l in range(3)],
        -2,
    )
    values = 0.5 * (pairing + np.swapaxes(pairing, -1, -2)) / n2[..., None, None]
    return TensorField3(field.chart, field.grid, values)


# --- intrinsic curvature and Codazzi ----------------------------------------------------


def metric3(chart, u, v, w, h=METRIC_STEP):
    _, first, _ = jet(chart, (u, v, w), h, second=False)
    X = np.stack(first, -2)
    return np.einsum("...id,...jd->...ij", X, X)


def christoffel(chart, u, v, w, h=METRIC_STEP, h_outer=CHRISTOFFEL_STEP):
    """``gamma[r, m, n]`` = Christoffel symbol Gamma^r_{mn} of the induced metric."""
    g, dg, _ = jet(lambda a, b, c: metric3(chart, a, b, c, h), (u, v, w), h_outer, second=False)
    dg = np.stack(dg, -3)  # dg[l, i, j] = d_l g_ij
    lower = 0.5 * (
        np.einsum("...mln->...lmn", dg) + np.einsum("...nlm->...lmn", dg) - dg
    )
    return np.einsum("...rl,...lmn->...rmn", np.linalg.inv(g), lower)


def riemann_frame(chart, u, v, w, h=METRIC_STEP, h_outer=CHRISTOFFEL_STEP):
    """``R[i, j, k, l] = g(R(e_i, e_j) e_l, e_k)`` from the induced metric alone."""
    gam, dgam, _ = jet(lambda a, b, c: christoffel(chart, a, b, c, h, h_outer), (u, v, w), h_outer, second=False)
    dgam = np.stack(dgam, -4)  # dgam[m, r, s, n] = d_m Gamma^r_{sn}
    # R^r_{s m n} = d_m Gamma^r_{n s} - d_n Gamma^r_{m s} + Gamma^r_{m l} Gamma^l_{n s} - Gamma^r_{n l} Gamma^l_{m s}
    term = np.einsum("...mrns->...rsmn", dgam)
    quad = np.einsum("...rml,...lns->...rsmn", gam, gam)
    R_up = term - np.swapaxes(term, -1, -2) + quad - np.swapaxes(quad, -1, -2)
    g = metric3(chart, u, v, w, h)
    # Rc[i, j, k, l] = g(R(d_i, d_j) d_l, d_k) = g_{k r} R^r_{l i j}
    Rc = np.einsum("...kr,...rlij->...ijkl", g, R_up)
    inv = frame3_at(chart, u, v, w).inv
    return np.einsum("...ai,...bj,...ck,...dl,...ijkl->...abcd", inv, inv, inv, inv, Rc)


def _tensor_on_nodes(T, chart, grid, frames):
    if isinstance(T, TensorField3):
        return T.values
    return _tensor3(T, grid.mesh(), frames)


def gauss_components_check(chart, T, grid):
    """sup over i<j, k<l of ``|R_ijkl + 4 T_il T_jk - 4 T_ik T_jl|`` on interior nodes."""
    inner = grid.interior
    params = [m[inner] for m in grid.mesh()]
    frames = frame3_at(chart, *params)
    t = _tensor_on_nodes(T, chart, grid, frame3_at(chart, *grid.mesh()))[inner]
    R = riemann_frame(chart, *params)
    comps = []
    for i, j in PAIRS:
        for k, l in PAIRS:
            comps.append(R[..., i, j, k, l] + 4 * t[..., i, l] * t[..., j, k] - 4 * t[..., i, k] * t[..., j, l])
    comps = np.stack(comps, -1)
    full = np.full(grid.shape + (comps.shape[-1],), np.nan)
    full[inner] = comps
    return residual_report("gauss_components", chart.name, 0, grid.shape, full, point_axes=3)


def codazzi3_field(chart, T, grid):
    """``(grad_{e_i} T)(e_j) - (grad_{e_j} T)(e_i)`` for i < j; shape (..., 3 pairs, 3)."""
    frames = frame3_at(chart, *grid.mesh())
    if isinstance(T, TensorField3):
        values = T.values
        partial = np.stack([grid_diff(values, k, s, GRID_ORDER) for k, s in enumerate(grid.spacing)], axis=3)
    else:
        values, first, _ = jet(T, tuple(grid.mesh()), CODAZZI_STEP, second=False)
        partial = np.stack(first, axis=3)
    d = np.einsum("...ai,...ijk->...ajk", frames.inv, partial)
    # Omega_a[c, b] = <grad_{e_a} e_b, e_c> = omega_bc(e_a)
    rot = np.swapaxes(frames.omega, -1, -2)
    cov = d + rot @ values[..., None, :, :] - values[..., None, :, :] @ rot
    return np.stack([cov[..., i, :, j] - cov[..., j, :, i] for i, j in PAIRS], -2)


def codazzi3_check(chart, T, grid):
    residual = codazzi3_field(chart, T, grid)
    mask = np.zeros(grid.shape, bool)
    mask[grid.interior] = True
    residual[~mask] = np.nan
    return residual_report("codazzi3", chart.name, 0, grid.shape, residual, point_axes=3)


# --- catalog -------------------------------------------------------------------------


def _diag3(a, b, c):
    def shape(u, v, w):
        out = np.zeros(np.broadcast(np.asarray(u), np.asarray(v), np.asarray(w)).shape + (3, 3))
        out[..., 0, 0], out[..., 1, 1], out[..., 2, 2] = a, b, c
        return out

    return shape


def hyperplane():
    return Chart3(
        "hyperplane",
        lambda u, v, w: np.stack(np.broadcast_arrays(u, v, w, np.zeros_like(u + v + w)), -1),
        ((-1.0, 1.0),) * 3,
        exact_shape=_diag3(0, 0, 0),
    )


def round_s3(radius=1.0):
    """Hyperspherical coordinates; nu points to the centre, so S = Id / r."""
    r = float(radius)

    def fn(a, b, c):
        sa, sb = np.sin(a), np.sin(b)
        return r * np.stack(
            np.broadcast_arrays(np.cos(a), sa * np.cos(b), sa * sb * np.cos(c), sa * sb * np.sin(c)), -1
        )

    return Chart3("round_s3", fn, ((0.6, 1.6), (0.6, 1.6), (0.0, 1.0)), exact_shape=_diag3(1 / r, 1 / r, 1 / r), params={"radius": r})


def cylinder_s2xr(radius=1.0):
    """S2(r) x R with the line as third coordinate; nu points to the axis."""
    r = float(radius)

    def fn(u, v, w):
        u, v, w = np.broadcast_arrays(u, v, w)
        return np.stack([r * np.cos(u) * np.sin(v), r * np.sin(u) * np.sin(v), r * np.cos(v), w], -1)

    return Chart3(
        "cylinder_s2xr",
        fn,
        ((0.0, 1.0), (0.7, 1.7), (-0.5, 0.5)),
        orientation=-1,
        exact_shape=_diag3(1 / r, 1 / r, 0),
        params={"radius": r},
    )


def _graph_shape(u, v, w):
    """Shape operator of w4 = u^2 + v^2 - w^2 from its analytic derivatives."""
    u, v, w = np.broadcast_arrays(*(np.asarray(c, float) for c in (u, v, w)))
    grad = np.stack([2 * u, 2 * v, -2 * w], -1)
    tangents = np.concatenate([np.broadcast_to(np.eye(3), grad.shape + (3,)), grad[..., :, None]], -1)
    q, _ = np.linalg.qr(np.swapaxes(tangents, -1, -2))
    # qr may flip signs; align each column with the Gram-Schmidt direction
    signs = np.sign(np.einsum("...di,...id->...i", q, tangents))
    e = np.swapaxes(q * signs[..., None, :], -1, -2)
    scale = np.sqrt(1 + np.sum(grad**2, -1))
    second = np.diag([2.0, 2.0, -2.0]) / scale[..., None, None]
    coord = np.einsum("...id,...ad->...ia", tangents, e)
    inv = np.linalg.inv(coord)
    return np.einsum("...ai,...ij,...bj->...ab", inv, second, inv)


def graph_saddle():
    def fn(u, v, w):
        u, v, w = np.broadcast_arrays(u, v, w)
        return np.stack([u, v, w, u**2 + v**2 - w**2], -1)

    return Chart3("graph_saddle", fn, ((-0.3, 0.3),) * 3, exact_shape=_graph_shape)


CATALOG3 = {
    "hyperplane": hyperplane,
    "round_s3": round_s3,
    "cylinder_s2xr": cylinder_s2xr,
    "graph_saddle": graph_saddle,
}


def catalog3(name, **params):
    try:
        factory = CATALOG3[name]
    except KeyError:
        raise GeometryError(f"unknown hypersurface {name!r}") from None
    return factory(**params)
