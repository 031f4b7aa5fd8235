"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
helpers here validate shapes and finiteness and add the error types the rest
of the package relies on; the heavy lifting is LAPACK via numpy/scipy.
"""
from __future__ import annotations

import io
import os

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

__all__ = [
    "ShapeError",
    "SingularMatrixError",
    "DomainError",
    "as_matrix",
    "mat_mul",
    "adjoint",
    "expm",
    "solve",
    "op_norm",
    "hermitian_eigenvalues",
    "hermitian_eigh",
    "kron",
    "read_matrix",
    "write_matrix",
    "format_matrix",
    "parse_matrix",
]

HERMITIAN_TOL = 1e-12
SINGULAR_COND = 1e12
# above this size op_norm switches from a full SVD to Lanczos
_DENSE_SVD_CAP = 512


class ShapeError(ValueError):
    """Operand shapes are not conformable."""


class DomainError(ValueError):
    """Input lies outside the domain of the operation."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised by :func:`solve` when the system is numerically singular."""

    def __init__(self, message, cond):
        super().__init__(message)
        self.cond = cond


def as_matrix(a, name="a"):
    """Return ``a`` as a finite 2-D complex array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def _square(a, name="a"):
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    return arr


def mat_mul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a):
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def expm(a):
    """Matrix exponential.

    Scaling and squaring with a Pade core (Al-Mohy & Higham 2009, as shipped
    in :func:`scipy.linalg.expm`).
    """
    return scipy.linalg.expm(_square(a))


def solve(a, b):
    """Solve ``a @ x = b`` by pivoted LU.

    Raises :class:`SingularMatrixError` when the reciprocal 1-norm condition
    estimate puts the condition number above ``1e12``.
    """
    a = _square(a)
    b = np.asarray(b, dtype=complex)
    vector = b.ndim == 1
    b = as_matrix(b.reshape(-1, 1) if vector else b, "b")
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"right-hand side has {b.shape[0]} rows, expected {a.shape[0]}")
    anorm = np.linalg.norm(a, 1)
    if anorm == 0.0:
        raise SingularMatrixError("matrix is zero", np.inf)
    lu, piv, info = scipy.linalg.lapack.zgetrf(a)
    if info > 0:
        raise SingularMatrixError("exactly singular pivot in LU factorization", np.inf)
    rcond, _ = scipy.linalg.lapack.zgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0.0 else 1.0 / rcond
    if cond > SINGULAR_COND:
        raise SingularMatrixError(f"matrix is singular to working precision (cond ~ {cond:.3g})", cond)
    x, info = scipy.linalg.lapack.zgetrs(lu, piv, b)
    return x.ravel() if vector else x


def op_norm(a):
    """Largest singular value."""
    a = as_matrix(a)
    if min(a.shape) <= _DENSE_SVD_CAP:
        return float(np.linalg.norm(a, 2))
    if not np.any(a):
        return 0.0
    s = scipy.sparse.linalg.svds(a, k=1, return_singular_vectors=False, tol=0,
                                 random_state=np.random.default_rng(0))
    return float(s[0])


def _hermitize(a, tol):
    a = _square(a)
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def hermitian_eigenvalues(a, tol=HERMITIAN_TOL):
    """Ascending real spectrum of a Hermitian matrix.

    ``a`` is symmetrized first; a departure from Hermiticity larger than
    ``tol`` (relative to the largest entry) raises :class:`DomainError`.
    """
    return np.linalg.eigvalsh(_hermitize(a, tol))


def hermitian_eigh(a, tol=HERMITIAN_TOL):
    """Eigenvalues and eigenvectors of a Hermitian matrix, ascending."""
    return np.linalg.eigh(_hermitize(a, tol))


def kron(a, b):
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


# -- matrix text format -------------------------------------------------------
#
#   rows cols
#   re,im re,im ...      (one line per row)

def format_matrix(a):
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text, source="<string>"):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{source}: empty matrix file")
    try:
        rows, cols = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise ValueError(f"{source}:1: header must be 'rows cols'") from None
    if rows < 1 or cols < 1:
        raise ValueError(f"{source}:1: dimensions must be positive")
    if len(lines) - 1 != rows:
        raise ValueError(f"{source}: expected {rows} rows, found {len(lines) - 1}")
    out = np.empty((rows, cols), dtype=complex)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != cols:
            raise ValueError(f"{source}:{i + 2}: expected {cols} entries, found {len(tokens)}")
        for j, tok in enumerate(tokens):
            try:
                re, im = tok.split(",")
                out[i, j] = complex(float(re), float(im))
            except ValueError:
                raise ValueError(f"{source}:{i + 2}: bad entry {tok!r}") from None
    return as_matrix(out)


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), source=os.fspath(path))


def write_matrix(path, a):
    if isinstance(path, io.TextIOBase):
        path.write(format_matrix(a))
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(a))
