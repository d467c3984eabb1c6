"""Clifford multiplication on the rank-2 spinor fiber.

Spinors are complex arrays whose last axis has length 2, so every function
here broadcasts over leading grid axes.  Tangent vectors are real arrays of
frame coefficients (last axis 2 on surfaces, 3 on 3-manifolds).

Fixed representations
---------------------
3-dimensional: ``e_j -> -i sigma_j``.  With this choice the complex volume
element ``-e1 e2 e3`` acts as the identity.

2-dimensional: ``e1 -> i sigma_2``, ``e2 -> -i sigma_1``.  These are the
matrices of ``e_j . e3 .`` in the 3-dimensional representation, so the
restriction of ambient spinors to a surface is the identity on fibers.  The
real volume form ``e1 e2`` is ``-i sigma_3``; ``i e1 e2 = sigma_3`` is
diagonal, hence the half-spinor bundles are the coordinate axes.
"""

import numpy as np

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
IDENTITY = np.eye(2, dtype=complex)

#: Matrices of e1, e2, e3 acting on spinors of a 3-manifold.
E3 = -1j * SIGMA
#: Matrices of e1, e2 acting on spinors of a surface.
E2 = np.array([1j * SIGMA[1], -1j * SIGMA[0]])
#: Real volume form e1.e2 on a surface.
OMEGA = E2[0] @ E2[1]
#: The bivectors e_j.e_k (j < k) in dimension 3, ordered (12, 13, 23).
BIVECTORS3 = np.array([E3[0] @ E3[1], E3[0] @ E3[2], E3[1] @ E3[2]])
PAIRS3 = ((0, 1), (0, 2), (1, 2))


def spinor(z1, z2=0.0):
    """Build a spinor array from its two components."""
    return np.stack(np.broadcast_arrays(np.asarray(z1, complex), np.asarray(z2, complex)), axis=-1)


def clifford_matrix(X, basis):
    """Matrix of Clifford multiplication by the frame vector ``X``."""
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != len(basis):
        raise ValueError(f"expected {len(basis)} frame coefficients, got {X.shape[-1]}")
    return np.einsum("...a,aij->...ij", X.astype(complex), basis)


def act(matrix, phi):
    """Apply a (batched) 2x2 matrix to a (batched) spinor."""
    return np.einsum("...ij,...j->...i", matrix, phi)


def mul2(X, phi):
    """Clifford product ``X . phi`` on a surface."""
    return act(clifford_matrix(X, E2), np.asarray(phi, complex))


def mul3(X, psi):
    """Clifford product ``X . psi`` on a 3-manifold."""
    return act(clifford_matrix(X, E3), np.asarray(psi, complex))


def volume2(phi):
    """Action of the real volume form ``e1 . e2``."""
    return act(OMEGA, np.asarray(phi, complex))


def volume3(psi):
    """Action of ``-e1 . e2 . e3``; the identity by construction."""
    return -act(E3[0] @ E3[1] @ E3[2], np.asarray(psi, complex))


def conjugate(phi):
    """``phi+ - phi-``: flips the sign of the negative half-spinor."""
    phi = np.asarray(phi, complex)
    return phi * np.array([1.0, -1.0])


def split(phi):
    """Return the half-spinors ``(phi+, phi-)``; they sum back to ``phi``."""
    phi = np.asarray(phi, complex)
    plus = phi * np.array([1.0, 0.0])
    return plus, phi - plus


def inner(phi, psi):
    """Hermitian product, conjugate-linear in the second slot."""
    return np.sum(np.asarray(phi, complex) * np.conj(psi), axis=-1)


def re_inner(phi, psi):
    return np.real(inner(phi, psi))


def norm2(phi):
    """Squared length ``|phi|^2``."""
    phi = np.asarray(phi, complex)
    return np.sum(phi.real**2 + phi.imag**2, axis=-1)


def to_reals(phi):
    """Serialize as ``(Re z1, Im z1, Re z2, Im z2)``."""
    phi = np.asarray(phi, complex)
    return np.stack([phi[..., 0].real, phi[..., 0].imag, phi[..., 1].real, phi[..., 1].imag], axis=-1)


def from_reals(values):
    values = np.asarray(values, float)
    return spinor(values[..., 0] + 1j * values[..., 1], values[..., 2] + 1j * values[..., 3])
