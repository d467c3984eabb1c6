"""The restricted Killing spinor equation as a flat connection.

A solution of ``grad_X phi + T(X).phi + eta X.omega.phi = 0`` is a parallel
section of the modified connection

    hat-grad_X = grad_X + T(X). + eta X.omega.

which is complex linear because ``conj(phi) = i omega.phi``.  It is flat
exactly when the Gauss and Codazzi equations hold for ``S = 2T``, so on a
simply connected chart the equation is solved by parallel transport.
"""

from dataclasses import dataclass

import numpy as np

from . import clifford as cl
from .errors import FlatnessError, GeometryError
from .fd import FRAME_STEP, OUTER_STEP, grid_diff, jet
from .reports import residual_report
from .spin_calculus import Grid, SpinorField, TensorField, covariant_derivative, tensor_values
from .surface_charts import frame_at, gauss_curvature

STEPS_PER_CELL = 4
#: Largest holonomy defect per unit area accepted as flat.
FLAT_TOL = 1e-4
BASE_SPINOR = np.array([1.0, 0.0], dtype=complex)


class HalfShape:
    """``T = S / 2`` of a chart, evaluated from frames."""

    def __init__(self, chart, h=FRAME_STEP):
        self.chart = chart
        self.h = h

    def __call__(self, u, v):
        return self.from_frame(frame_at(self.chart, u, v, self.h))

    @staticmethod
    def from_frame(frame):
        return 0.5 * frame.shape


@dataclass(frozen=True)
class ModifiedConnection:
    chart: object
    eta: complex
    T: object
    h: float = FRAME_STEP

    @classmethod
    def geometric(cls, chart):
        """Connection with ``T = S/2`` and the chart's own Killing constant."""
        return cls(chart, chart.eta, HalfShape(chart))

    def _tensor(self, u, v, frame):
        if hasattr(self.T, "from_frame"):
            return self.T.from_frame(frame)
        return np.asarray(self.T(u, v), float)

    def matrix(self, u, v, du, dv):
        """``A`` with ``d phi/dt = -A phi`` along the parameter direction (du, dv)."""
        frame = frame_at(self.chart, u, v, self.h)
        d = np.stack(np.broadcast_arrays(np.asarray(du, float), np.asarray(dv, float)), -1)
        x = np.einsum("...i,...ia->...a", d, frame.coord)
        w = np.einsum("...i,...i->...", d, frame.omega_coord)
        tx = np.einsum("...ab,...b->...a", self._tensor(u, v, frame), x)
        X = cl.clifford_matrix(x, cl.E2)
        return 0.5 * w[..., None, None] * cl.OMEGA + cl.clifford_matrix(tx, cl.E2) + self.eta * X @ cl.OMEGA


def _apply(A, state):
    if state.ndim == A.ndim:
        return A @ state
    return cl.act(A, state)


def propagate(conn, start, delta, nsteps, state):
    """RK4 transport along straight parameter segments, evaluating the
    connection directly.

    ``start`` has shape (B, 2), ``delta`` is the total parameter displacement
    (shape (2,) or (B, 2)) and ``state`` a batch of spinors (B, 2) or
    propagator matrices (B, 2, 2).
    """
    start = np.asarray(start, float)
    delta = np.broadcast_to(np.asarray(delta, float), start.shape)
    h = 1.0 / nsteps
    du, dv = delta[..., 0], delta[..., 1]
    rhs = lambda t, y: -_apply(conn.matrix(start[..., 0] + t * du, start[..., 1] + t * dv, du, dv), y)
    y = np.array(state, dtype=complex)
    for k in range(nsteps):
        t = k * h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def transport(conn, phi0, path, steps_per_segment=64):
    """Transport ``phi0`` along a polyline of parameter points."""
    path = np.asarray(path, float)
    if not conn.chart.contains(path[:, 0], path[:, 1]):
        raise GeometryError("transport path leaves the parameter rectangle")
    phi = np.asarray(phi0, complex)[None]
    for a, b in zip(path[:-1], path[1:]):
        phi = propagate(conn, a[None], b - a, steps_per_segment, phi)
    return phi[0]


def axis_table(conn, nodes, axis, steps):
    """Connection matrices for unit velocity along ``axis`` on a fine lattice.

    ``nodes`` lists the grid coordinates per axis.  Along ``axis`` the lattice
    refines the grid by ``2 * steps`` (RK4 stage points); across it, it sits
    on grid nodes.  Result shape: (lines, samples, 2, 2), lines ordered as
    the remaining axes in C order; node i lies at sample ``2 * steps * i``.
    """
    line = nodes[axis]
    fine = np.linspace(line[0], line[-1], 2 * steps * (len(line) - 1) + 1)
    axes = [fine if k == axis else np.asarray(nodes[k], float) for k in range(len(nodes))]
    mesh = np.meshgrid(*axes, indexing="ij")
    velocity = [1.0 if k == axis else 0.0 for k in range(len(nodes))]
    A = conn.matrix(*mesh, *velocity)
    A = np.moveaxis(A, axis, len(nodes) - 1)
    return A.reshape((-1, len(fine), 2, 2))


def march(table, lines, m0, sign, nsteps, h, state, record_every=None):
    """RK4 through a tabulated connection.

    Each batch member b follows line ``lines[b]`` from sample ``m0[b]`` in
    direction ``sign[b]`` (+1 or -1), ``nsteps`` steps of parameter length
    ``h``.
    """
    lines = np.asarray(lines)
    m = np.array(m0)
    sign = np.broadcast_to(np.asarray(sign), lines.shape)
    y = np.array(state, dtype=complex)
    scale = -sign.reshape(sign.shape + (1, 1))
    records = [y.copy()] if record_every else None
    for k in range(nsteps):
        A0 = scale * table[lines, m]
        A1 = scale * table[lines, m + sign]
        A2 = scale * table[lines, m + 2 * sign]
        k1 = _apply(A0, y)
        k2 = _apply(A1, y + h / 2 * k1)
        k3 = _apply(A1, y + h / 2 * k2)
        k4 = _apply(A2, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        m = m + 2 * sign
        if record_every and (k + 1) % record_every == 0:
            records.append(y.copy())
    return (y, np.array(records)) if record_every else y


@dataclass(frozen=True)
class PlaquetteReport:
    """Holonomy defect ``||P - Id||`` around every grid cell and the cell areas."""

    deviation: np.ndarray
    area: np.ndarray

    @property
    def density(self):
        return self.deviation / self.area

    @property
    def max_deviation(self):
        return float(self.deviation.max())

    @property
    def max_density(self):
        return float(self.density.max())

    def flat(self, tol=FLAT_TOL):
        return self.max_density <= tol


def tables_for(conn, nodes, steps):
    """One connection table per grid axis."""
    return [axis_table(conn, nodes, axis, steps) for axis in range(len(nodes))]


def _line_index(shape, axis, index):
    rest = [k for k in range(len(shape)) if k != axis]
    return np.ravel_multi_index([index[k] for k in rest], [shape[k] for k in rest])


def plaquette_holonomy(tables, nodes, steps, a, b):
    """Holonomy defect around every cell of the coordinate plane (a, b).

    Cells are indexed by their lower corner; the remaining axes run over all
    nodes.  Returns an array of shape ``(n_a - 1, n_b - 1, *others)`` in axis
    order with a and b replaced by cell indices.
    """
    shape = tuple(len(n) for n in nodes)
    ranges = [np.arange(n - 1) if k in (a, b) else np.arange(n) for k, n in enumerate(shape)]
    index = [g.ravel() for g in np.meshgrid(*ranges, indexing="ij")]
    cell_shape = tuple(len(r) for r in ranges)

    def shifted(axis, by):
        out = list(index)
        out[axis] = out[axis] + by
        return out

    c = 2 * steps
    ha = abs(nodes[a][1] - nodes[a][0]) / steps
    hb = abs(nodes[b][1] - nodes[b][0]) / steps
    P = np.broadcast_to(np.eye(2, dtype=complex), (index[0].size, 2, 2))
    P = march(tables[a], _line_index(shape, a, index), c * index[a], 1, steps, ha, P)
    P = march(tables[b], _line_index(shape, b, shifted(a, 1)), c * index[b], 1, steps, hb, P)
    P = march(tables[a], _line_index(shape, a, shifted(b, 1)), c * (index[a] + 1), -1, steps, ha, P)
    P = march(tables[b], _line_index(shape, b, index), c * (index[b] + 1), -1, steps, hb, P)
    return np.linalg.norm(P - np.eye(2), ord=2, axis=(-2, -1)).reshape(cell_shape)


def cell_areas(frame_fn, nodes, a, b):
    """Metric area of every (a, b) grid cell, evaluated at the cell centre."""
    centres = []
    for k, n in enumerate(nodes):
        n = np.asarray(n, float)
        centres.append(0.5 * (n[:-1] + n[1:]) if k in (a, b) else n)
    frame = frame_fn(*np.meshgrid(*centres, indexing="ij"))
    ca, cb = frame.coord[..., a, :], frame.coord[..., b, :]
    gram = np.sum(ca * ca, -1) * np.sum(cb * cb, -1) - np.sum(ca * cb, -1) ** 2
    da = abs(nodes[a][1] - nodes[a][0])
    db = abs(nodes[b][1] - nodes[b][0])
    return np.sqrt(gram) * da * db


def sweep(tables, nodes, steps, phi0, order):
    """Transport ``phi0`` from the first node along successive axis families.

    Along ``order[0]`` a single line from the base node; each later axis is
    swept from every node reached so far.  Returns values on the full grid.
    """
    shape = tuple(len(n) for n in nodes)
    dim = len(shape)
    done = []
    values = np.asarray(phi0, complex)[None]
    for axis in order:
        index = [np.zeros(values.shape[0], int) for _ in range(dim)]
        if done:
            mesh = np.meshgrid(*[np.arange(shape[k]) for k in done], indexing="ij")
            for k, g in zip(done, mesh):
                index[k] = g.ravel()
        h = (nodes[axis][1] - nodes[axis][0]) / steps
        lines = _line_index(shape, axis, index)
        _, rec = march(tables[axis], lines, np.zeros(lines.size, int), 1, steps * (shape[axis] - 1), h, values, steps)
        values = np.moveaxis(rec, 0, 1).reshape(-1, 2)
        done.append(axis)
    values = values.reshape([shape[k] for k in done] + [2])
    return np.transpose(values, [done.index(k) for k in range(dim)] + [dim])


def flatness_check(conn, grid, steps=STEPS_PER_CELL, tables=None):
    """Transport around each cell of ``grid`` and measure the holonomy defect."""
    nodes = (grid.u, grid.v)
    tables = tables or tables_for(conn, nodes, steps)
    deviation = plaquette_holonomy(tables, nodes, steps, 0, 1)
    area = cell_areas(lambda u, v: frame_at(conn.chart, u, v), nodes, 0, 1)
    return PlaquetteReport(deviation, area)


def solve_on_chart(
    conn, grid, phi0=BASE_SPINOR, steps=STEPS_PER_CELL, flat_tol=FLAT_TOL, check_flatness=True, tables=None
):
    """Solve the restricted Killing spinor equation on the whole grid.

    The u-then-v sweep is returned; the v-then-u sweep only measures path
    dependence, stored as ``path_residual`` (max pointwise difference).
    Raises FlatnessError when the connection is not flat within ``flat_tol``.
    """
    nodes = (grid.u, grid.v)
    tables = tables or tables_for(conn, nodes, steps)
    if check_flatness:
        report = flatness_check(conn, grid, steps, tables)
        if not report.flat(flat_tol):
            raise FlatnessError(
                f"{conn.chart.name}: holonomy defect per unit area {report.max_density:.3e} exceeds {flat_tol:.1e}",
                report,
            )
    first = sweep(tables, nodes, steps, phi0, (0, 1))
    second = sweep(tables, nodes, steps, phi0, (1, 0))
    residual = float(np.max(np.sqrt(cl.norm2(first - second))))
    return SpinorField(conn.chart, grid, first, path_residual=residual)


def _derivatives(T, chart, grid, frames):
    """T and its frame-direction derivatives e_a(T) at every node."""
    if isinstance(T, TensorField):
        values = T.values
        partial = np.stack([grid_diff(values, 0, grid.du), grid_diff(values, 1, grid.dv)], axis=2)
    else:
        uu, vv = grid.mesh()
        values, first, _ = jet(T, (uu, vv), OUTER_STEP, second=False)
        partial = np.stack(first, axis=2)
    return values, np.einsum("...ai,...ijk->...ajk", frames.inv, partial)


def codazzi_field(chart, T, grid):
    """``C = (grad_{e1} S)(e2) - (grad_{e2} S)(e1)`` for ``S = 2T``, per node."""
    frames = frame_at(chart, *grid.mesh())
    values, d = _derivatives(T, chart, grid, frames)
    w = frames.omega
    rot = np.zeros(w.shape + (2, 2))
    rot[..., 1, 0] = w
    rot[..., 0, 1] = -w
    # (grad_{e_a} T) = e_a(T) + Omega_a T - T Omega_a with Omega_a[c, b] = <grad_{e_a} e_b, e_c>
    cov = d + rot @ values[..., None, :, :] - values[..., None, :, :] @ rot
    return 2 * (cov[..., 0, :, 1] - cov[..., 1, :, 0])


def gauss_codazzi_check(chart, T, eta=None, grid=None):
    """The fields ``G = R1212 - det S - 4 eta^2`` and ``C`` on interior nodes.

    Boundary nodes hold NaN.  ``T`` is a TensorField or a closed-form
    tensor function of (u, v).
    """
    eta = chart.eta if eta is None else complex(eta)
    grid = grid or Grid.on(chart, 64)
    inner = grid.interior
    mask = grid.interior_mask()
    uu, vv = grid.mesh()
    if isinstance(T, TensorField):
        values = T.values
    else:
        values = np.asarray(T(uu, vv), float)
    G = np.full(grid.shape, np.nan)
    K = gauss_curvature(chart, uu[inner], vv[inner])
    G[inner] = K - np.linalg.det(2 * values[inner]) - (4 * eta**2).real
    C = codazzi_field(chart, T, grid)
    C[~mask] = np.nan
    return G, C


def verify_restricted_equation(field, T, eta=None):
    """Residual of ``grad_X phi + T(X).phi - i eta X.conj(phi)`` for X = e1, e2."""
    eta = field.chart.eta if eta is None else complex(eta)
    t = tensor_values(T, field)
    nabla = covariant_derivative(field)
    phi = field.values
    bar = cl.conjugate(phi)
    residual = np.stack(
        [
            nabla[..., a, :]
            + cl.mul2(t[..., a, :], phi)
            - 1j * eta * cl.act(cl.E2[a], bar)
            for a in range(2)
        ],
        axis=-2,
    )
    return residual_report("restricted_killing", field.chart.name, eta, field.grid.shape, residual)
