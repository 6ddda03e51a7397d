"""Dense complex linear algebra kernels used by every domain module.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` (or ``float64``
for real inputs). All functions are pure.
"""
from dataclasses import dataclass

import numpy as np

from errors import (
    DomainMembershipError,
    NotHermitianError,
    NotPositiveDefiniteError,
    ShapeError,
    SingularMatrixError,
)

# Tolerances
HERMITIAN_TOL = 1e-8
HPD_FLOOR = 1e-12
RCOND_FLOOR = 1e-14


@dataclass(frozen=True)
class HermitianEig:
    """Eigen-decomposition ``a = U diag(eigenvalues) U^H``, eigenvalues ascending."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None):
        values = self.eigenvalues if values is None else values
        u = self.eigenvectors
        return (u * values) @ u.conj().T


def as_matrix(a):
    """Coerce to a 2-D numpy array and check it is square with finite entries"""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainMembershipError("matrix has NaN or infinite entries")
    return a


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a):
    return (a + dagger(a)) / 2


def symmetric_part(a):
    return (a + np.swapaxes(a, -1, -2)) / 2


def frobenius(a):
    return float(np.linalg.norm(a, "fro"))


def herm_eig(a):
    """Eigen-decompose a Hermitian matrix after symmetrizing it"""
    a = as_matrix(a)
    residual = frobenius(a - dagger(a))
    tolerance = HERMITIAN_TOL * (1.0 + frobenius(a))
    if residual > tolerance:
        raise NotHermitianError(residual, tolerance)
    eigenvalues, eigenvectors = np.linalg.eigh(hermitian_part(a))
    return HermitianEig(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def herm_fun(a, f):
    """Apply a real function to the spectrum of a Hermitian matrix"""
    eig = herm_eig(a)
    out = eig.reconstruct(f(eig.eigenvalues))
    if np.isrealobj(a):
        out = out.real
    return hermitian_part(out)


def hpd_fun(a, f):
    """Apply a real function to the spectrum of a Hermitian positive definite matrix.

    Raises NotPositiveDefiniteError naming the smallest eigenvalue when it is
    not above HPD_FLOOR. No clamping happens here.
    """
    eig = herm_eig(a)
    smallest = float(eig.eigenvalues[0])
    if smallest <= HPD_FLOOR:
        raise NotPositiveDefiniteError(smallest, HPD_FLOOR)
    out = eig.reconstruct(f(eig.eigenvalues))
    if np.isrealobj(a):
        out = out.real
    return hermitian_part(out)


def hpd_sqrt(a):
    return hpd_fun(a, np.sqrt)


def hpd_inv_sqrt(a):
    return hpd_fun(a, lambda w: 1.0 / np.sqrt(w))


def hpd_log(a):
    return hpd_fun(a, np.log)


def hpd_pow(a, p):
    return hpd_fun(a, lambda w: w ** p)


def sym_exp(a):
    """Matrix exponential of a Hermitian (real symmetric) matrix"""
    return herm_fun(a, np.exp)


def spectral_norm(a):
    """Largest singular value, computed as sqrt of the top eigenvalue of a^H a.

    Squaring the matrix halves the attainable relative precision of the small
    singular values; at the sizes used here (n <= ~32) the largest one is
    unaffected.
    """
    a = as_matrix(a)
    gram = dagger(a) @ a
    top = herm_eig(gram).eigenvalues[-1]
    return float(np.sqrt(max(top, 0.0)))


def singular_values(a):
    """Singular values in descending order via the Gram matrix"""
    a = as_matrix(a)
    values = herm_eig(dagger(a) @ a).eigenvalues[::-1]
    return np.sqrt(np.clip(values, 0.0, None))


def reciprocal_condition(a):
    """Reciprocal 1-norm condition estimate; 0 for an exactly singular matrix"""
    condition = np.real(np.linalg.cond(as_matrix(a), 1))  # numpy<2.3 returns a complex dtype for complex input
    if not np.isfinite(condition):
        return 0.0
    return float(1.0 / condition)


def solve(a, b):
    """Solve ``a @ x = b`` after checking the conditioning of ``a``"""
    a = as_matrix(a)
    b = np.asarray(b)
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"cannot solve {a.shape} against {b.shape}")
    rcond = reciprocal_condition(a)
    if rcond <= RCOND_FLOOR:
        raise SingularMatrixError(rcond, RCOND_FLOOR)
    return np.linalg.solve(a, b)


def solve_right(b, a):
    """Return ``b @ inv(a)`` with the same conditioning contract as solve"""
    b = np.asarray(b)
    return np.swapaxes(solve(np.swapaxes(a, -1, -2), np.swapaxes(b, -1, -2)), -1, -2)
