"""B(H) for finite-dimensional H: vectorization and trace-duality functionals.

Vectorization stacks columns, so entry ``(i, j)`` of a ``d x d`` matrix lands
at index ``j*d + i`` and ``vec(A X B) = (B^T kron A) vec(X)``.

A functional is represented by a ``d x d`` matrix ``s`` acting through
``eta(T) = trace(s T)``.  The rank-one functional built from vectors ``x, y``
uses ``s = |y><x|`` so that ``eta(T) = <x, T y>`` with the inner product
conjugate-linear in its first slot.  These are exactly the pairings that
generate the weak operator topology.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix_core import ShapeError, DomainError, as_matrix, solve

__all__ = [
    "MAX_DIM",
    "check_dim",
    "vectorize",
    "devectorize",
    "Functional",
    "FunctionalBasis",
    "rank_one_functional",
    "pair",
    "wot_seminorm",
    "functional_basis",
    "matrix_units",
]

# The dense superoperator routines are only practical for d <= 16; the
# discretized shift example runs matrix-free up to this cap.
MAX_DIM = 256


def check_dim(d):
    d = int(d)
    if not 1 <= d <= MAX_DIM:
        raise DomainError(f"Hilbert space dimension must lie in [1, {MAX_DIM}], got {d}")
    return d


def vectorize(a):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"vectorize expects a square matrix, got {a.shape}")
    return a.reshape(-1, order="F")


def devectorize(v, d=None):
    v = np.asarray(v, dtype=complex).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if v.size != d * d:
        raise ShapeError(f"vector of length {v.size} cannot be a {d}x{d} matrix")
    return v.reshape(d, d, order="F")


def matrix_units(d):
    """All ``d*d`` matrix units, ordered like vectorized indices.

    Returns an array of shape ``(d*d, d, d)`` whose ``k``-th slice is the unit
    with a one at the position that ``vectorize`` sends to index ``k``.
    """
    eye = np.eye(d * d, dtype=complex)
    return eye.reshape(d * d, d, d).transpose(0, 2, 1)


def _trace_norm(s):
    return float(np.sum(np.linalg.svd(s, compute_uv=False)))


@dataclass(frozen=True, eq=False)
class Functional:
    """Trace-class representative ``s`` of ``T -> trace(s T)``."""

    s: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        s = as_matrix(self.s, "s")
        if s.shape[0] != s.shape[1]:
            raise ShapeError(f"functional representative must be square, got {s.shape}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "norm", _trace_norm(s))

    @property
    def d(self):
        return self.s.shape[0]

    def __call__(self, t):
        return pair(self, t)


@dataclass(frozen=True, eq=False)
class FunctionalBasis:
    """A spanning family of ``d*d`` functionals on ``B(H)``.

    ``gram[k, l]`` is the pairing of functional ``k`` with the ``l``-th matrix
    unit; it is nonsingular, which lets an operator be rebuilt from its
    pairings.
    """

    functionals: tuple
    gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        fs = tuple(self.functionals)
        if not fs:
            raise ShapeError("empty functional basis")
        d = fs[0].d
        if len(fs) != d * d or any(f.d != d for f in fs):
            raise ShapeError(f"a basis of B(H) with d={d} needs {d * d} functionals of size {d}")
        object.__setattr__(self, "functionals", fs)
        # pair(eta, E) = trace(s E) = sum(s.T * E) = vec(s.T) . vec(E)
        rows = np.array([vectorize(f.s.T) for f in fs])
        object.__setattr__(self, "gram", rows)
        if abs(np.linalg.det(rows)) < 1e-300:
            raise DomainError("functionals do not span the dual of B(H)")

    @property
    def d(self):
        return self.functionals[0].d

    def __len__(self):
        return len(self.functionals)

    def __iter__(self):
        return iter(self.functionals)

    def pairings(self, t):
        """Vector of all pairings ``eta_k(t)``."""
        return self.gram @ vectorize(t)

    def reconstruct(self, values):
        """The operator whose pairings with the basis are ``values``."""
        return devectorize(solve(self.gram, np.asarray(values, dtype=complex)), self.d)


def _vector(x, name):
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1:
        raise ShapeError(f"{name} must be a vector, got shape {x.shape}")
    return x


def rank_one_functional(x, y):
    """The functional ``T -> <x, T y>``, represented by ``s = |y><x|``."""
    x = _vector(x, "x")
    y = _vector(y, "y")
    if x.size != y.size:
        raise ShapeError(f"x has length {x.size} but y has length {y.size}")
    return Functional(np.outer(y, x.conj()))


def pair(eta, t):
    t = as_matrix(t, "t")
    if t.shape != eta.s.shape:
        raise ShapeError(f"functional of size {eta.d} cannot pair with shape {t.shape}")
    return complex(np.sum(eta.s.T * t))


def wot_seminorm(x, y, t):
    """``|<x, T y>|``, the seminorm generating the weak operator topology."""
    x = _vector(x, "x")
    y = _vector(y, "y")
    t = as_matrix(t, "t")
    if not (x.size == y.size == t.shape[0] == t.shape[1]):
        raise ShapeError("vector and operator dimensions disagree")
    return float(abs(np.vdot(x, t @ y)))


def functional_basis(d):
    """Rank-one functionals ``<e_i, . e_j>`` over the standard basis."""
    d = check_dim(d)
    eye = np.eye(d)
    return FunctionalBasis(tuple(rank_one_functional(eye[i], eye[j])
                                 for j in range(d) for i in range(d)))
