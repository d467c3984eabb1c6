"""Fourth-order central finite differences.

Two flavours: ``jet`` differentiates a closed-form function by evaluating it
at offset parameters, ``grid_diff`` differentiates sampled grid data along
one axis.
"""

import itertools

import numpy as np

OFFSETS = np.arange(-2, 3)
FIRST = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
SECOND = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0

#: Step used for derivatives of closed-form charts.
STEP = 1e-3
#: Step for frame quantities built from second derivatives (shape operator,
#: connection coefficients); rounding grows like eps / h^2 there.
FRAME_STEP = 3e-3
#: Step for derivatives of quantities that are themselves finite differences.
OUTER_STEP = 1e-2
#: Half-width of a stencil in units of its step.
REACH = 2

#: Central first-derivative weights on offsets -r..r, keyed by accuracy order.
GRID_STENCILS = {
    4: FIRST,
    6: np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0,
    8: np.array([3.0, -32.0, 168.0, -672.0, 0.0, 672.0, -168.0, 32.0, -3.0]) / 840.0,
}


def reach(order=4):
    """Boundary layers left without data by a grid stencil of the given order."""
    return order // 2


def _shifted(f, params, shifts):
    """Evaluate ``f`` at ``params + shift`` for every shift in one batched call."""
    shifts = np.asarray(shifts, float)
    n = shifts.shape[0]
    args = [np.asarray(p, float)[None] + shifts[:, k].reshape((n,) + (1,) * np.ndim(p)) for k, p in enumerate(params)]
    return np.asarray(f(*args))


def jet(f, params, h=STEP, second=True):
    """Value, gradient and (optionally) Hessian of ``f`` at ``params``.

    ``f`` must broadcast over array arguments and may return trailing axes.
    Returns ``(value, first, hessian)`` where ``first[i]`` is the derivative
    in parameter ``i`` and ``hessian[i][j]`` the second derivative.
    """
    params = [np.asarray(p, float) for p in np.broadcast_arrays(*params)]
    dim = len(params)
    shifts = [np.zeros(dim)]
    for i in range(dim):
        for o in OFFSETS:
            if o:
                s = np.zeros(dim)
                s[i] = o * h
                shifts.append(s)
    mixed = list(itertools.combinations(range(dim), 2)) if second else []
    for i, j in mixed:
        for a, b in itertools.product(OFFSETS, OFFSETS):
            if a and b:
                s = np.zeros(dim)
                s[i], s[j] = a * h, b * h
                shifts.append(s)
    vals = _shifted(f, params, shifts)
    value = vals[0]
    k = 1
    axis_vals = []
    for i in range(dim):
        row = [vals[k], vals[k + 1], value, vals[k + 2], vals[k + 3]]
        axis_vals.append(row)
        k += 4
    first = [sum(c * r for c, r in zip(FIRST, row) if c) / h for row in axis_vals]
    if not second:
        return value, first, None
    hess = [[None] * dim for _ in range(dim)]
    for i in range(dim):
        hess[i][i] = sum(c * r for c, r in zip(SECOND, axis_vals[i])) / h**2
    nonzero = [o for o in OFFSETS if o]
    weights = {o: FIRST[o + 2] for o in nonzero}
    for i, j in mixed:
        acc = 0.0
        for a, b in itertools.product(nonzero, nonzero):
            acc = acc + weights[a] * weights[b] * vals[k]
            k += 1
        hess[i][j] = hess[j][i] = acc / h**2
    return value, first, hess


def gradient(f, params, h=STEP):
    """Value and first derivatives of ``f`` (no Hessian)."""
    value, first, _ = jet(f, params, h, second=False)
    return value, first


def grid_diff(values, axis, spacing, order=4):
    """Derivative of grid samples along ``axis``; NaN on the ``order // 2`` boundary layers."""
    weights = GRID_STENCILS[order]
    r = reach(order)
    values = np.asarray(values)
    n = values.shape[axis]
    out = np.full(values.shape, np.nan, dtype=np.result_type(values.dtype, float))
    if n < 2 * r + 1:
        return out
    moved = np.moveaxis(values, axis, 0)
    target = np.moveaxis(out, axis, 0)
    acc = 0.0
    for o, c in zip(range(-r, r + 1), weights):
        if c:
            acc = acc + c * moved[r + o : n - r + o]
    target[r : n - r] = acc / spacing
    return out
