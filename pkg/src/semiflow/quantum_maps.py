"""Superoperators on B(H), Choi/Kraus machinery and Lindblad generators.

Everything is in the Heisenberg picture: maps act on observables and a Kraus
family ``V_j`` acts as ``A -> sum_j V_j^* A V_j``.  A Lindblad generator has
the form ``L(A) = phi(A) + G^* A + A G`` with ``phi`` completely positive.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .matrix_core import (
    DomainError,
    ShapeError,
    as_matrix,
    hermitian_eigh,
    hermitian_eigenvalues,
    op_norm,
)
from .operator_space import check_dim, devectorize, matrix_units, vectorize
from .report import VerificationReport

__all__ = [
    "Superoperator",
    "KrausSet",
    "LindbladForm",
    "StinespringPair",
    "NotCompletelyPositiveError",
    "identity_superop",
    "zero_superop",
    "superop_from_sandwich",
    "superop_from_kraus",
    "apply",
    "choi",
    "kraus_from_choi",
    "is_completely_positive",
    "is_unital",
    "lindblad_generator",
    "markovian_completion",
    "stinespring_from_kraus",
    "gks_form_check",
    "random_kraus",
    "random_hermitian",
    "random_lindblad_form",
    "dephasing_form",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KRAUS_TOL = 1e-10


class NotCompletelyPositiveError(DomainError):
    def __init__(self, message, min_eigenvalue):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


def _vec_stack(a):
    d = a.shape[-1]
    return np.swapaxes(a, -1, -2).reshape(a.shape[:-2] + (d * d,))


def _devec_stack(v, d):
    return np.swapaxes(v.reshape(v.shape[:-1] + (d, d)), -1, -2)


class Superoperator:
    """A linear map on ``d x d`` matrices.

    The canonical data is the ``d^2 x d^2`` matrix acting on column-stacked
    operators.  A map may instead be given by an ``action`` callable (which
    must accept stacks of shape ``(..., d, d)``); the matrix is then built on
    first access by applying the action to every matrix unit.  Large
    structured maps such as the discretized shift example stay matrix-free
    this way until a dense quantity is actually requested.
    """

    def __init__(self, d, matrix=None, action=None):
        self.d = check_dim(d)
        if matrix is None and action is None:
            raise ValueError("need a matrix or an action")
        if matrix is not None:
            matrix = as_matrix(matrix, "matrix")
            if matrix.shape != (self.d ** 2, self.d ** 2):
                raise ShapeError(f"superoperator matrix must be {self.d ** 2}x{self.d ** 2}, got {matrix.shape}")
        self._matrix = matrix
        self._action = action

    @property
    def matrix(self):
        if self._matrix is None:
            images = self._action(matrix_units(self.d))
            self._matrix = np.ascontiguousarray(_vec_stack(images).T)
        return self._matrix

    @property
    def has_matrix(self):
        return self._matrix is not None

    def __call__(self, a):
        a = np.asarray(a, dtype=complex)
        if a.shape[-2:] != (self.d, self.d):
            raise ShapeError(f"map on {self.d}x{self.d} matrices applied to shape {a.shape}")
        if self._action is not None:
            return self._action(a)
        return _devec_stack(_vec_stack(a) @ self._matrix.T, self.d)

    def compose(self, other):
        """``self o other``, i.e. ``A -> self(other(A))``."""
        if other.d != self.d:
            raise ShapeError("cannot compose maps on different spaces")
        if self.has_matrix and other.has_matrix:
            return Superoperator(self.d, self._matrix @ other._matrix)
        return Superoperator(self.d, action=lambda a: self(other(a)))

    def __matmul__(self, other):
        return self.compose(other)

    def _combine(self, other, alpha, beta):
        if other.d != self.d:
            raise ShapeError("cannot combine maps on different spaces")
        if self.has_matrix and other.has_matrix:
            return Superoperator(self.d, alpha * self._matrix + beta * other._matrix)
        return Superoperator(self.d, action=lambda a: alpha * self(a) + beta * other(a))

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, scalar):
        scalar = complex(scalar)
        if self.has_matrix:
            return Superoperator(self.d, scalar * self._matrix)
        return Superoperator(self.d, action=lambda a: scalar * self(a))

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def norm(self):
        """Operator norm of the matrix, i.e. induced by the Hilbert-Schmidt norm."""
        return op_norm(self.matrix)

    def __repr__(self):
        kind = "matrix" if self.has_matrix else "action"
        return f"Superoperator(d={self.d}, {kind})"


def identity_superop(d):
    d = check_dim(d)
    return Superoperator(d, np.eye(d * d, dtype=complex))


def zero_superop(d):
    d = check_dim(d)
    return Superoperator(d, np.zeros((d * d, d * d), dtype=complex))


def superop_from_sandwich(left, right):
    """The map ``A -> left @ A @ right``; its matrix is ``right^T kron left``."""
    left = as_matrix(left, "left")
    right = as_matrix(right, "right")
    d = left.shape[0]
    if left.shape != (d, d) or right.shape != (d, d):
        raise ShapeError(f"sandwich factors must both be square of one size, got {left.shape}, {right.shape}")
    return Superoperator(d, np.kron(right.T, left))


def apply(s, a):
    a = as_matrix(a)
    if a.shape != (s.d, s.d):
        raise ShapeError(f"map on {s.d}x{s.d} matrices applied to shape {a.shape}")
    return s(a)


def choi(s):
    """``C = sum_ij E_ij kron s(E_ij)``.

    Read straight off the superoperator matrix by an index reshuffle:
    ``C[(i,a),(j,b)] = s(E_ij)[a,b] = M[b*d+a, j*d+i]``.
    """
    d = s.d
    m4 = s.matrix.reshape(d, d, d, d)
    return np.ascontiguousarray(m4.transpose(3, 1, 2, 0).reshape(d * d, d * d))


def _support(c):
    """Indices of rows (equivalently columns) of a Hermitian matrix that are not zero."""
    return np.flatnonzero(np.any(c != 0, axis=1) | np.any(c != 0, axis=0))


def _choi_spectrum(c):
    # zero rows/columns contribute exact zero eigenvalues; skip them
    idx = _support(c)
    if idx.size == 0:
        return np.zeros(1)
    sub = c[np.ix_(idx, idx)]
    sub = 0.5 * (sub + sub.conj().T)
    evals = hermitian_eigenvalues(sub)
    if idx.size < c.shape[0]:
        evals = np.sort(np.append(evals, 0.0))
    return evals


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Finite Kraus family acting as ``A -> sum_j V_j^* A V_j``."""

    ops: tuple

    def __post_init__(self):
        ops = tuple(as_matrix(v, "kraus operator") for v in self.ops)
        if ops:
            d = ops[0].shape[0]
            if any(v.shape != (d, d) for v in ops):
                raise ShapeError("Kraus operators must all be square of one size")
        object.__setattr__(self, "ops", ops)

    @property
    def d(self):
        return self.ops[0].shape[0] if self.ops else None

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __call__(self, a):
        return sum(v.conj().T @ a @ v for v in self.ops)

    def superoperator(self, d=None):
        return superop_from_kraus(self, d)


def superop_from_kraus(kraus, d=None):
    if not isinstance(kraus, KrausSet):
        kraus = KrausSet(tuple(kraus))
    d = kraus.d if kraus.ops else d
    if d is None:
        raise ShapeError("empty Kraus family needs an explicit dimension")
    m = np.zeros((d * d, d * d), dtype=complex)
    for v in kraus:
        # A -> V^* A V has matrix V^T kron V^*
        m += np.kron(v.T, v.conj().T)
    return Superoperator(d, m)


def kraus_from_choi(c, tol=KRAUS_TOL):
    """Kraus family reproducing the map whose Choi matrix is ``c``.

    With ``C = sum_k lam_k |u_k><u_k|``, each eigenpair above ``tol`` gives
    ``V_k = conj(sqrt(lam_k) u_k)`` reshaped row-major to ``d x d``.
    """
    c = as_matrix(c, "choi")
    n = c.shape[0]
    d = int(round(np.sqrt(n)))
    if c.shape != (d * d, d * d):
        raise ShapeError(f"Choi matrix must be d^2 x d^2, got {c.shape}")
    evals, evecs = hermitian_eigh(c, tol=max(tol, 1e-12))
    if evals[0] < -tol:
        raise NotCompletelyPositiveError(
            f"Choi matrix has eigenvalue {evals[0]:.3e} below -{tol:.1e}", float(evals[0]))
    keep = evals > tol
    ops = [np.conj(np.sqrt(lam) * evecs[:, k]).reshape(d, d)
           for k, lam in zip(np.flatnonzero(keep), evals[keep])]
    return KrausSet(tuple(ops[::-1]))


def is_completely_positive(s, tol=1e-10):
    """``(ok, min_eigenvalue)`` of the Hermitized Choi matrix."""
    lam_min = float(_choi_spectrum(choi(s))[0])
    return lam_min >= -tol, lam_min


def is_unital(s, tol=1e-10):
    """``(ok, residual)`` with residual the operator norm of ``s(I) - I``."""
    eye = np.eye(s.d, dtype=complex)
    residual = op_norm(s(eye) - eye)
    return residual <= tol, residual


@dataclass(frozen=True, eq=False)
class LindbladForm:
    """Data of ``L(A) = sum_j V_j^* A V_j + G^* A + A G``."""

    kraus: KrausSet
    g: np.ndarray

    def __post_init__(self):
        kraus = self.kraus if isinstance(self.kraus, KrausSet) else KrausSet(tuple(self.kraus))
        g = as_matrix(self.g, "g")
        if g.shape[0] != g.shape[1]:
            raise ShapeError("G must be square")
        if kraus.ops and kraus.d != g.shape[0]:
            raise ShapeError("Kraus operators and G have different sizes")
        object.__setattr__(self, "kraus", kraus)
        object.__setattr__(self, "g", g)

    @property
    def d(self):
        return self.g.shape[0]

    def __call__(self, a):
        return self.kraus(a) + self.g.conj().T @ a + a @ self.g

    @cached_property
    def generator(self):
        return lindblad_generator(self)


def lindblad_generator(lf):
    """Superoperator of ``A -> sum_j V_j^* A V_j + G^* A + A G``."""
    d = lf.d
    eye = np.eye(d, dtype=complex)
    total = superop_from_sandwich(lf.g.conj().T, eye) + superop_from_sandwich(eye, lf.g)
    for v in lf.kraus:
        total = total + superop_from_sandwich(v.conj().T, v)
    return total


def markovian_completion(kraus, h):
    """Choose ``G = -1/2 sum_j V_j^* V_j - i H`` so that ``L(I) = 0``.

    The Hamiltonian then enters the generator as ``i[H, A]``.
    """
    if not isinstance(kraus, KrausSet):
        kraus = KrausSet(tuple(kraus))
    h = as_matrix(h, "h")
    scale = max(1.0, float(np.max(np.abs(h))))
    if h.shape[0] != h.shape[1] or np.max(np.abs(h - h.conj().T)) > 1e-12 * scale:
        raise DomainError("Hamiltonian must be Hermitian")
    h = 0.5 * (h + h.conj().T)
    if kraus.ops and kraus.d != h.shape[0]:
        raise ShapeError("Kraus operators and Hamiltonian have different sizes")
    absorbed = sum((v.conj().T @ v for v in kraus), np.zeros_like(h))
    return LindbladForm(kraus, -0.5 * absorbed - 1j * h)


@dataclass(frozen=True, eq=False)
class StinespringPair:
    """``phi(A) = v^* pi(A) v`` with ``pi(A) = I_m kron A`` (block diagonal)."""

    v: np.ndarray
    m: int

    @property
    def d(self):
        return self.v.shape[1]

    def pi(self, a):
        return np.kron(np.eye(self.m), as_matrix(a))

    def __call__(self, a):
        return self.v.conj().T @ self.pi(a) @ self.v


def stinespring_from_kraus(kraus):
    if not isinstance(kraus, KrausSet):
        kraus = KrausSet(tuple(kraus))
    if not kraus.ops:
        raise DomainError("Stinespring dilation needs at least one Kraus operator")
    return StinespringPair(np.vstack(kraus.ops), len(kraus))


def gks_form_check(lf, tol=1e-11):
    """Compare three renderings of the generator on every matrix unit.

    * ``direct``: ``<x, L(A) y>`` from the generator superoperator.
    * ``sesquilinear``: ``<Vx, pi(A) V y> + <x, K A y> + <K A^* x, y>``.
    * ``operator``: ``(V^* pi(A) V + K A + A K^*) y``.

    ``K = G^*`` converts between the two common ways of writing the drift
    term; in finite dimension this is a literal conjugate transpose.  ``x`` and
    ``y`` run over the standard basis, so the sesquilinear forms are just
    matrix entries.
    """
    d = lf.d
    report = VerificationReport("gks-form")
    gen = lf.generator
    k = lf.g.conj().T
    if lf.kraus.ops:
        dil = stinespring_from_kraus(lf.kraus)
        vv = dil.v
    worst = {"direct-vs-sesquilinear": 0.0, "direct-vs-operator": 0.0, "sesquilinear-vs-operator": 0.0}
    eye = np.eye(d)
    for a in matrix_units(d):
        direct = gen(a)
        ses = np.empty((d, d), dtype=complex)
        for xi in range(d):
            x = eye[xi]
            for yi in range(d):
                y = eye[yi]
                val = np.vdot(x, k @ a @ y) + np.vdot(k @ a.conj().T @ x, y)
                if lf.kraus.ops:
                    val += np.vdot(vv @ x, dil.pi(a) @ (vv @ y))
                ses[xi, yi] = val
        op = k @ a + a @ k.conj().T
        if lf.kraus.ops:
            op = op + dil(a)
        worst["direct-vs-sesquilinear"] = max(worst["direct-vs-sesquilinear"], float(np.max(np.abs(direct - ses))))
        worst["direct-vs-operator"] = max(worst["direct-vs-operator"], float(np.max(np.abs(direct - op))))
        worst["sesquilinear-vs-operator"] = max(worst["sesquilinear-vs-operator"], float(np.max(np.abs(ses - op))))
    for name, value in worst.items():
        report.add(name, value, tol)
    report.metadata.update(d=d, kraus_terms=len(lf.kraus))
    return report


def random_kraus(d, m, rng, scale=1.0):
    """``m`` complex Gaussian Kraus operators of size ``d``."""
    return KrausSet(tuple(scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2 * d)
                          for _ in range(m)))


def random_hermitian(d, rng, scale=1.0):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (x + x.conj().T) / (2 * np.sqrt(d))


def random_lindblad_form(d, m, rng, hamiltonian=True):
    """Random unital Lindblad data: ``m`` Kraus terms plus an optional Hamiltonian."""
    h = random_hermitian(d, rng) if hamiltonian else np.zeros((d, d), dtype=complex)
    return markovian_completion(random_kraus(d, m, rng), h)


def dephasing_form():
    """Qubit dephasing: Kraus ``{sigma_z}``, ``G = -I/2``; ``L(sigma_x) = -2 sigma_x``."""
    return markovian_completion(KrausSet((PAULI_Z,)), np.zeros((2, 2)))
