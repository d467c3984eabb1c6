"""Residual reports shared by the verification routines."""

from dataclasses import dataclass

import numpy as np


def eta_pair(eta):
    eta = complex(eta)
    return [eta.real, eta.imag]


@dataclass(frozen=True)
class ResidualReport:
    identity: str
    surface: str
    eta: complex
    grid: tuple
    sup_residual: float
    l2_residual: float

    def passed(self, tol):
        return bool(self.sup_residual < tol)

    def to_dict(self):
        return {
            "identity": self.identity,
            "surface": self.surface,
            "eta": eta_pair(self.eta),
            "grid": list(self.grid),
            "sup_residual": float(self.sup_residual),
            "l2_residual": float(self.l2_residual),
        }


def residual_report(identity, surface, eta, grid_shape, residual, point_axes=2):
    """Summarize a residual array whose first ``point_axes`` axes index nodes.

    Nodes holding NaN (boundary layers without derivative data) are ignored.
    The pointwise size is the Euclidean norm over all remaining axes; the
    L2 figure is the root mean square of that size over the nodes used.
    """
    residual = np.asarray(residual)
    flat = residual.reshape(residual.shape[:point_axes] + (-1,))
    size = np.sqrt(np.sum(np.abs(flat) ** 2, axis=-1))
    size = size[np.isfinite(size)]
    if size.size == 0:
        raise ValueError(f"{identity}: no interior nodes to evaluate")
    return ResidualReport(
        identity,
        surface,
        complex(eta),
        tuple(int(n) for n in grid_shape),
        float(size.max()),
        float(np.sqrt(np.mean(size**2))),
    )
