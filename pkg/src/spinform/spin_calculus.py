"""Spinor fields on surface charts: spin connection, Dirac operator and the
tensors built from a spinor (energy-momentum tensor, T+ and T-).

Fields are sampled on a rectangular parameter grid.  Derivatives use
fourth-order central stencils along grid lines, so the two outermost node
layers carry no derivative data; derived arrays hold NaN there and all
residual norms run over the interior nodes.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import clifford as cl
from .errors import GeometryError, VanishingSpinorError
from .fd import REACH, grid_diff
from .reports import ResidualReport, residual_report
from .surface_charts import frame_at

MIN_NODES = 2 * REACH + 1
VANISHING = 1e-10
#: Half-spinors below this squared length are skipped in ratio-form checks.
HALF_VANISHING = 1e-12


@dataclass(frozen=True)
class Grid:
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def on(cls, chart, nu, nv=None):
        nv = nu if nv is None else nv
        if nu < MIN_NODES or nv < MIN_NODES:
            raise GeometryError(f"grid must have at least {MIN_NODES} nodes per axis, got {nu}x{nv}")
        return cls(np.linspace(*chart.u_range, nu), np.linspace(*chart.v_range, nv))

    @property
    def shape(self):
        return (len(self.u), len(self.v))

    @property
    def du(self):
        return self.u[1] - self.u[0]

    @property
    def dv(self):
        return self.v[1] - self.v[0]

    def mesh(self):
        return np.meshgrid(self.u, self.v, indexing="ij")

    @property
    def interior(self):
        return (slice(REACH, len(self.u) - REACH), slice(REACH, len(self.v) - REACH))

    def interior_mask(self):
        mask = np.zeros(self.shape, bool)
        mask[self.interior] = True
        return mask


class _OnGrid:
    """Shared behaviour of grid-sampled fields."""

    @cached_property
    def frames(self):
        return frame_at(self.chart, *self.grid.mesh())

    def _check(self):
        if self.grid.shape[0] < MIN_NODES or self.grid.shape[1] < MIN_NODES:
            raise GeometryError(f"grid must have at least {MIN_NODES} nodes per axis")


@dataclass(frozen=True)
class SpinorField(_OnGrid):
    chart: object
    grid: Grid
    values: np.ndarray
    path_residual: float = None

    def __post_init__(self):
        self._check()
        if self.values.shape != self.grid.shape + (2,):
            raise ValueError(f"spinor values must have shape {self.grid.shape + (2,)}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spinor field has non-finite values")

    def with_values(self, values):
        return SpinorField(self.chart, self.grid, np.asarray(values, complex))

    @property
    def plus(self):
        return cl.split(self.values)[0]

    @property
    def minus(self):
        return cl.split(self.values)[1]


@dataclass(frozen=True)
class TensorField(_OnGrid):
    """2x2 tensor per node in the orthonormal frame; ``values[..., a, b] = T(e_a, e_b)``."""

    chart: object
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self._check()

    def __call__(self, u, v):
        raise TypeError("TensorField is sampled data; index .values instead")

    @property
    def trace(self):
        return self.values[..., 0, 0] + self.values[..., 1, 1]

    def symmetric_part(self):
        return TensorField(self.chart, self.grid, 0.5 * (self.values + np.swapaxes(self.values, -1, -2)))


def tensor_values(T, field):
    """Sample ``T`` (TensorField or closed-form tensor function) on ``field``'s grid."""
    if isinstance(T, TensorField):
        return T.values
    if hasattr(T, "from_frame"):
        return T.from_frame(field.frames)
    return np.asarray(T(*field.grid.mesh()), float)


def _eta(field, eta):
    return field.chart.eta if eta is None else complex(eta)


# --- derivatives ---------------------------------------------------------------


def covariant_derivative(field, values=None):
    """``grad_{e_a} phi`` for a = 1, 2 at every node; shape (nu, nv, 2, 2).

    ``grad_X phi = X(phi) + 1/2 omega12(X) e1.e2.phi``.
    """
    phi = field.values if values is None else np.asarray(values, complex)
    grid = field.grid
    partial = np.stack([grid_diff(phi, 0, grid.du), grid_diff(phi, 1, grid.dv)], axis=-2)
    frames = field.frames
    directional = np.einsum("...ai,...is->...as", frames.inv, partial)
    twist = 0.5 * frames.omega[..., None] * cl.volume2(phi)[..., None, :]
    return directional + twist


def spinor_cov_deriv(field, i, node):
    """``grad_{e_i} phi`` at one interior node; ``i`` is 1 or 2."""
    if i not in (1, 2):
        raise ValueError("direction must be 1 or 2")
    _check_interior(field.grid, node)
    return covariant_derivative(field)[node][i - 1]


def _check_interior(grid, node):
    iu, iv = node
    if not (REACH <= iu < grid.shape[0] - REACH and REACH <= iv < grid.shape[1] - REACH):
        raise GeometryError(f"node {node} is a boundary node without derivative data")


def dirac_field(field, values=None):
    """``D phi = e1.grad_{e1} phi + e2.grad_{e2} phi`` at every node."""
    nabla = covariant_derivative(field, values)
    return cl.act(cl.E2[0], nabla[..., 0, :]) + cl.act(cl.E2[1], nabla[..., 1, :])


def dirac(field, node):
    _check_interior(field.grid, node)
    return dirac_field(field)[node]


def _report(identity, field, eta, residual):
    return residual_report(identity, field.chart.name, eta, field.grid.shape, residual)


def _mean_curvature(field, H):
    return field.frames.mean_curvature if H is None else np.asarray(H, float)


def check_dirac_identity(field, H=None, eta=None):
    """Residual of ``D phi - H phi + 2 i eta conj(phi)``."""
    eta = _eta(field, eta)
    H = _mean_curvature(field, H)
    phi = field.values
    residual = dirac_field(field) - H[..., None] * phi + 2j * eta * cl.conjugate(phi)
    return _report("dirac", field, eta, residual)


def check_halfspinor_identity(field, H=None, eta=None):
    """Residuals of ``D phi+ = (H + 2i eta) phi-`` and ``D phi- = (H - 2i eta) phi+``."""
    eta = _eta(field, eta)
    H = _mean_curvature(field, H)[..., None]
    plus, minus = field.plus, field.minus
    r_plus = dirac_field(field, plus) - (H + 2j * eta) * minus
    r_minus = dirac_field(field, minus) - (H - 2j * eta) * plus
    return _report("dirac_half_plus", field, eta, r_plus), _report("dirac_half_minus", field, eta, r_minus)


def minimal_eigenspinor(field):
    """``phi+ + i phi-``, an eigenspinor of D with eigenvalue 2 eta on minimal surfaces."""
    return field.with_values(field.plus + 1j * field.minus)


def check_eigenspinor(field, eigenvalue):
    residual = dirac_field(field) - eigenvalue * field.values
    return _report("eigenspinor", field, eigenvalue, residual)


def length_variation(field):
    """Spread ``max |phi|^2 - min |phi|^2`` over all nodes."""
    n2 = cl.norm2(field.values)
    return float(n2.max() - n2.min())


def check_length_law(field, eta=None):
    """Constant length for real eta; ``X|phi|^2 = 2 Re(i eta X.conj(phi), phi)`` otherwise."""
    eta = _eta(field, eta)
    if eta.imag == 0:
        n2 = cl.norm2(field.values)
        return ResidualReport(
            "length_constant",
            field.chart.name,
            eta,
            field.grid.shape,
            length_variation(field),
            float(np.sqrt(np.mean((n2 - n2.mean()) ** 2))),
        )
    grid = field.grid
    n2 = cl.norm2(field.values)
    partial = np.stack([grid_diff(n2, 0, grid.du), grid_diff(n2, 1, grid.dv)], axis=-1)
    directional = np.einsum("...ai,...i->...a", field.frames.inv, partial)
    bar = cl.conjugate(field.values)
    rhs = np.stack(
        [2 * cl.re_inner(1j * eta * cl.act(cl.E2[a], bar), field.values) for a in range(2)],
        axis=-1,
    )
    return _report("length_law", field, eta, directional - rhs)


# --- tensors built from a spinor -------------------------------------------------


def _require_nonvanishing(phi, floor=VANISHING):
    n2 = cl.norm2(phi)
    if np.any(np.sqrt(n2) <= floor):
        raise VanishingSpinorError("spinor field vanishes at some node")
    return n2


def energy_momentum(field, eta=None):
    """Energy-momentum tensor of ``phi``.

    ``T(X, Y) |phi|^2 = 1/2 Re(X.grad_Y phi + Y.grad_X phi, phi) + Re(i eta conj(phi), phi) g(X, Y)``.
    The correction term vanishes for real eta and equals
    ``1/2 (|phi-|^2 - |phi+|^2) g`` for eta = i/2.
    """
    eta = _eta(field, eta)
    phi = field.values
    n2 = _require_nonvanishing(phi)
    nabla = covariant_derivative(field)
    # pairing[l, j] = Re(e_l . grad_j phi, phi)
    pairing = np.stack(
        [np.stack([cl.re_inner(cl.act(cl.E2[l], nabla[..., j, :]), phi) for j in range(2)], -1) for l in range(2)],
        -2,
    )
    correction = cl.re_inner(1j * eta * cl.conjugate(phi), phi)
    values = 0.5 * (pairing + np.swapaxes(pairing, -1, -2)) + correction[..., None, None] * np.eye(2)
    return TensorField(field.chart, field.grid, values / n2[..., None, None])


def tensors_Tpm(field):
    """``T+(X, Y) = Re(grad_X psi+, Y.psi-)`` and ``T-(X, Y) = Re(grad_X psi-, Y.psi+)``."""
    plus, minus = field.plus, field.minus
    out = []
    for this, other in ((plus, minus), (minus, plus)):
        nabla = covariant_derivative(field, this)
        values = np.stack(
            [np.stack([cl.re_inner(nabla[..., a, :], cl.act(cl.E2[b], other)) for b in range(2)], -1) for a in range(2)],
            -2,
        )
        out.append(TensorField(field.chart, field.grid, values))
    return tuple(out)


def reconstruct_T_from_dirac(field, eta=None):
    """Recover T from a Dirac solution through ``F = T+ + T-``.

    Real eta: ``T = -(F + F^t) / (2 |psi|^2)``.  eta = i/2:
    ``F = T+ + T- + 1/2 (|psi+|^2 - |psi-|^2) g`` and ``T = -F / |psi|^2``
    (F is symmetric for a solution; its symmetric part is returned).
    """
    eta = _eta(field, eta)
    n2 = _require_nonvanishing(field.values)
    t_plus, t_minus = tensors_Tpm(field)
    F = t_plus.values + t_minus.values
    if eta.imag != 0:
        if abs(eta - 0.5j) > 1e-12:
            raise ValueError("imaginary Killing constant must be i/2")
        shift = 0.5 * (cl.norm2(field.plus) - cl.norm2(field.minus))
        F = F + shift[..., None, None] * np.eye(2)
    elif eta not in (0, 0.5):
        raise ValueError("real Killing constant must be 0 or 1/2")
    values = -0.5 * (F + np.swapaxes(F, -1, -2)) / n2[..., None, None]
    return TensorField(field.chart, field.grid, values)


def check_tensor_identities(field, eta=None, H=None):
    """Trace, (anti)symmetry and product identities satisfied by T+ and T-.

    Returns a dict of reports keyed by identity name.
    """
    eta = _eta(field, eta)
    H = _mean_curvature(field, H)
    t_plus, t_minus = tensors_Tpm(field)
    p2, m2 = cl.norm2(field.plus), cl.norm2(field.minus)
    reports = {}
    # tr T+- = -Re(H +- 2i eta)|psi-+|^2 and T+-(e1,e2) - T+-(e2,e1) = 2 Re(eta)|psi-+|^2
    for name, t, other2, sign in (("plus", t_plus.values, m2, 1), ("minus", t_minus.values, p2, -1)):
        trace = t[..., 0, 0] + t[..., 1, 1]
        expected = -np.real(H + sign * 2j * eta) * other2
        reports[f"trace_T{name}"] = _report(f"trace_T{name}", field, eta, trace - expected)
        skew = t[..., 0, 1] - t[..., 1, 0] - 2 * eta.real * other2
        reports[f"skew_T{name}"] = _report(f"skew_T{name}", field, eta, skew)
    product = p2[..., None, None] * t_plus.values - m2[..., None, None] * t_minus.values
    if eta.imag == 0:
        reports["relE"] = _report("relE", field, eta, product)
    else:
        reports["W_identity"] = _report("W_identity", field, eta, product - (p2 * m2)[..., None, None] * np.eye(2))
    return reports
