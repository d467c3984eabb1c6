"""Check suites behind the command line: verification, restriction output and
convergence studies.

Every check becomes one ``Check`` row with its sup and L2 residual and the
tolerance it was judged against; a run passes iff every row does.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import clifford as cl
from . import hypersurface4 as h4
from . import killing_flow as kf
from . import spin_calculus as sc
from .errors import GeometryError, StencilError
from .reports import ResidualReport, eta_pair
from .surface_charts import CATALOG, catalog, gauss_curvature

DEFAULT_TOL = 1e-6
TOLERANCES = {
    "flatness": kf.FLAT_TOL,
    "length_constant": 1e-8,
    "eigenspinor_length": 1e-8,
    "reconstruction_agreement": 1e-8,
    "hypersurface_length": 1e-10,
}
#: Residuals below this are reported as sitting at the rounding floor.
FLOOR = 1e-13
MINIMAL_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    name: str
    sup: float
    l2: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.sup) and self.sup < self.tol)

    def to_dict(self):
        return {"name": self.name, "sup": self.sup, "l2": self.l2, "tol": self.tol, "passed": self.passed}


@dataclass
class SuiteResult:
    surface: str
    kind: str
    grid: tuple
    eta: complex
    checks: list = field(default_factory=list)
    field: object = None
    tensor: object = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, sup, l2=None, tolerances=None):
        tol = (tolerances or {}).get(name, TOLERANCES.get(name, DEFAULT_TOL))
        sup = float(sup)
        self.checks.append(Check(name, sup, float(sup if l2 is None else l2), float(tol)))

    def add_report(self, name, report: ResidualReport, tolerances=None):
        self.add(name, report.sup_residual, report.l2_residual, tolerances)

    def to_dict(self):
        return {
            "surface": self.surface,
            "space": self.kind,
            "grid": list(self.grid),
            "eta": eta_pair(self.eta),
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def is_hypersurface(name):
    return name in h4.CATALOG3


def make_chart(name, params=None):
    params = params or {}
    if is_hypersurface(name):
        return h4.catalog3(name, **params)
    if name not in CATALOG:
        raise GeometryError(f"unknown surface {name!r}")
    return catalog(name, **params)


def _difference(a, b, inner):
    diff = np.abs(np.asarray(a) - np.asarray(b))[inner]
    pointwise = diff.reshape(diff.shape[: len(inner)] + (-1,)).max(axis=-1)
    return float(np.nanmax(pointwise)), float(np.sqrt(np.nanmean(pointwise**2)))


def surface_suite(chart, grid, eta=None, steps=kf.STEPS_PER_CELL, tolerances=None):
    """All identities for the Killing-spinor restriction on one surface chart."""
    eta = chart.eta if eta is None else complex(eta)
    result = SuiteResult(chart.name, chart.space.kind, grid.shape, eta)
    add = lambda name, sup, l2=None: result.add(name, sup, l2, tolerances)
    add_report = lambda name, report: result.add_report(name, report, tolerances)

    T = kf.HalfShape(chart)
    conn = kf.ModifiedConnection(chart, eta, T)
    tables = kf.tables_for(conn, (grid.u, grid.v), steps)
    flat = kf.flatness_check(conn, grid, steps, tables)
    add("flatness", flat.max_density, float(np.sqrt(np.mean(flat.density**2))))

    G, C = kf.gauss_codazzi_check(chart, T, eta, grid)
    add("gauss", np.nanmax(np.abs(G)), np.sqrt(np.nanmean(G**2)))
    cn = np.linalg.norm(C, axis=-1)
    add("codazzi", np.nanmax(cn), np.sqrt(np.nanmean(cn**2)))

    phi = kf.solve_on_chart(conn, grid, steps=steps, check_flatness=False, tables=tables)
    add("path_independence", phi.path_residual)
    uu, vv = grid.mesh()
    inner = grid.interior
    if chart.exact is not None:
        add("shape_oracle", *_difference(phi.frames.shape, chart.exact.shape(uu, vv), (slice(None), slice(None))))
        K = gauss_curvature(chart, uu[inner], vv[inner])
        err = np.abs(K - chart.exact.gauss(uu[inner], vv[inner]))
        add("curvature_oracle", err.max(), np.sqrt(np.mean(err**2)))

    add_report("restricted_killing", kf.verify_restricted_equation(phi, T, eta))
    add_report("dirac", sc.check_dirac_identity(phi, eta=eta))
    plus, minus = sc.check_halfspinor_identity(phi, eta=eta)
    add_report("dirac_half_plus", plus)
    add_report("dirac_half_minus", minus)
    length = sc.check_length_law(phi, eta)
    add_report("length_constant" if eta.imag == 0 else "length_law", length)

    em = sc.energy_momentum(phi, eta)
    t_exact = T.from_frame(phi.frames)
    add("energy_momentum", *_difference(em.values, t_exact, inner))
    add("trace_mean_curvature", *_difference(em.trace, phi.frames.mean_curvature, inner))
    if eta in (0, 0.5, 0.5j):
        rec = sc.reconstruct_T_from_dirac(phi, eta)
        add("reconstruction_agreement", *_difference(em.values, rec.values, inner))
        add("reconstruction", *_difference(rec.values, t_exact, inner))
    for name, report in sc.check_tensor_identities(phi, eta).items():
        add_report(name, report)

    H = phi.frames.mean_curvature
    if np.max(np.abs(H)) < MINIMAL_TOL:
        star = sc.minimal_eigenspinor(phi)
        add_report("minimal_eigenspinor", sc.check_eigenspinor(star, 2 * eta))
        if eta.imag == 0:
            add("eigenspinor_length", sc.length_variation(star))
    result.field = phi
    result.tensor = em
    return result


def hypersurface_suite(chart, grid, steps=kf.STEPS_PER_CELL, tolerances=None):
    """Gauss, Codazzi and parallel-spinor identities on a hypersurface of R4."""
    result = SuiteResult(chart.name, "R4", grid.shape, 0)
    add = lambda name, sup, l2=None: result.add(name, sup, l2, tolerances)
    add_report = lambda name, report: result.add_report(name, report, tolerances)

    T = h4.HalfShape3(chart)
    conn = h4.Connection3(chart, T)
    tables = kf.tables_for(conn, grid.axes, steps)
    planes = h4.flatness_check3(conn, grid, steps, tables)
    add("flatness", max(p.max_density for p in planes.values()))
    add_report("gauss_components", h4.gauss_components_check(chart, T, grid))
    add_report("codazzi", h4.codazzi3_check(chart, T, grid))

    mesh = grid.mesh()
    inner = grid.interior
    phi = h4.solve3(chart, T, grid, steps=steps, check_flatness=False, tables=tables)
    t_values = T.from_frame(phi.frames)
    if chart.exact_shape is not None:
        add("shape_oracle", *_difference(phi.frames.shape, chart.exact_shape(*mesh), (slice(None),) * 3))
    add("path_independence", phi.path_residual)
    add_report("parallel", h4.verify_parallel3(phi, T))
    n = np.sqrt(cl.norm2(phi.values))
    add("hypersurface_length", np.ptp(n))
    em = h4.energy_momentum3(phi)
    add("energy_momentum", *_difference(em.values, t_values, inner))
    result.field = phi
    result.tensor = em
    return result


def run_verify(name, grid_shape=None, eta=None, steps=kf.STEPS_PER_CELL, params=None, tolerances=None):
    chart = make_chart(name, params)
    if is_hypersurface(name):
        if eta not in (None, 0):
            raise GeometryError("hypersurfaces of R4 carry parallel spinors; eta must be 0")
        grid = h4.Grid3.on(chart, grid_shape or (16, 16, 16))
        return hypersurface_suite(chart, grid, steps, tolerances)
    grid = sc.Grid.on(chart, *(grid_shape or (64, 64)))
    return surface_suite(chart, grid, eta, steps, tolerances)


# --- output --------------------------------------------------------------------


def field_rows(spinor_field):
    """Rows ``(params..., Re z1, Im z1, Re z2, Im z2)`` of a solved field."""
    mesh = spinor_field.grid.mesh()
    values = spinor_field.values
    cols = [m.ravel() for m in mesh]
    cols += [values[..., 0].real.ravel(), values[..., 0].imag.ravel(), values[..., 1].real.ravel(), values[..., 1].imag.ravel()]
    return np.column_stack(cols)


def field_header(dim):
    return ["u", "v", "w"][:dim] + ["re_z1", "im_z1", "re_z2", "im_z2"]


def tensor_summary(tensor_field):
    values = np.asarray(tensor_field.values, float)
    return {"shape": list(values.shape), "values": [None if math.isnan(x) else float(x) for x in values.ravel()]}


# --- convergence -------------------------------------------------------------------


def fitted_orders(spacings, residuals):
    """Pairwise orders ``log(r_k / r_k+1) / log(h_k / h_k+1)`` and a least-squares slope.

    Entries at the rounding floor are reported as the string "floor".
    """
    spacings = np.asarray(spacings, float)
    residuals = np.asarray(residuals, float)
    pairs = []
    for k in range(len(residuals) - 1):
        if residuals[k] < FLOOR or residuals[k + 1] < FLOOR:
            pairs.append("floor")
        else:
            pairs.append(float(np.log(residuals[k] / residuals[k + 1]) / np.log(spacings[k] / spacings[k + 1])))
    ok = residuals >= FLOOR
    if ok.sum() < 2:
        return pairs, "floor"
    slope = np.polyfit(np.log(spacings[ok]), np.log(residuals[ok]), 1)[0]
    return pairs, float(slope)


def convergence_study(name, ladder=(16, 32, 64), params=None, point=None):
    """Transport path dependence and curvature stencil error over a grid ladder.

    Transport runs one RK4 step per cell so the integrator error, not the
    rounding floor, dominates; the curvature stencil uses the grid spacing as
    its step at a fixed point (the chart centre by default).
    """
    if is_hypersurface(name):
        raise GeometryError("convergence studies run on surface charts")
    chart = make_chart(name, params)
    if point is None:
        point = (0.5 * sum(chart.u_range), 0.5 * sum(chart.v_range))
    spacing, transport, curvature = [], [], []
    for n in ladder:
        grid = sc.Grid.on(chart, n)
        spacing.append(grid.du)
        conn = kf.ModifiedConnection.geometric(chart)
        transport.append(kf.solve_on_chart(conn, grid, steps=1, check_flatness=False).path_residual)
        try:
            K = gauss_curvature(chart, *point, h=grid.du, h_outer=grid.du)
        except StencilError as exc:
            raise GeometryError(f"ladder grid {n} too coarse for the curvature stencil: {exc}") from None
        exact = chart.exact.gauss(*point) if chart.exact is not None else np.nan
        curvature.append(float(abs(K - exact)))
    studies = {}
    for label, values in (("transport_path", transport), ("curvature_stencil", curvature)):
        pairs, fitted = fitted_orders(spacing, values)
        studies[label] = {"residuals": [float(v) for v in values], "orders": pairs, "fitted_order": fitted}
    return {"surface": chart.name, "ladder": list(ladder), "spacing": [float(h) for h in spacing], "point": list(point), "studies": studies}
