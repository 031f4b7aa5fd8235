"""Semigroups of maps on B(H) and checks of their defining properties.

Three families are provided:

* :class:`Exponential` -- ``T_t = exp(t L)`` for a generator superoperator.
* :class:`Conjugation` -- ``T_t(A) = V_t A V_t^*`` for a contraction
  semigroup ``V_t`` on H (a matrix group, or a cyclic / truncated shift).
* :class:`ShiftExample` -- ``T_t(A) = omega(A) E_t + V_t A V_t^*`` on a grid
  discretization of ``L_2[0, n*step)``, with ``V_t`` the right shift,
  ``E_t`` the projection onto the cells below ``t`` and
  ``omega(A) = <f, A f>`` for ``f`` proportional to ``exp(-x)``.

Shift-based specs only exist at integer multiples of their grid step; asking
for any other time raises :class:`GridAlignmentError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .matrix_core import DomainError, as_matrix, expm, hermitian_eigenvalues, op_norm
from .operator_space import check_dim
from .quantum_maps import (
    LindbladForm,
    Superoperator,
    identity_superop,
    superop_from_sandwich,
    zero_superop,
)
from .report import VerificationReport

__all__ = [
    "GridAlignmentError",
    "SemigroupSpec",
    "Exponential",
    "Conjugation",
    "ShiftExample",
    "MatrixGroup",
    "CyclicShift",
    "TruncatedShift",
    "GridSpec",
    "ExponentialBound",
    "evaluate",
    "check_semigroup_law",
    "estimate_exponential_bound",
    "verify_exponential_bound",
    "check_wot_continuity_at_zero",
    "omega_invariance_check",
    "omega_invariance_refinement",
    "refine_grid",
    "refine_operator",
    "identity_spec",
]

_ALIGN_RTOL = 1e-9
_DECAY_FLOOR = 1e-8


class GridAlignmentError(DomainError):
    """A time was requested that is not a multiple of the grid step."""


def _grid_steps(t, step):
    k = round(t / step)
    if abs(t - k * step) > _ALIGN_RTOL * max(1.0, abs(t)):
        raise GridAlignmentError(f"t={t!r} is not a multiple of the grid step {step!r}")
    return int(k)


def _check_time(t):
    t = float(t)
    if not t >= 0.0 or not math.isfinite(t):
        raise DomainError(f"semigroup parameter must be finite and non-negative, got {t!r}")
    return t


# -- contraction semigroups on H --------------------------------------------

@dataclass(frozen=True, eq=False)
class MatrixGroup:
    """``V_t = exp(t K)``; ``K + K^*`` must be negative semidefinite."""

    k: np.ndarray
    time_step = None

    def __post_init__(self):
        k = as_matrix(self.k, "k")
        top = hermitian_eigenvalues(k + k.conj().T)[-1]
        if top > 1e-12 * max(1.0, op_norm(k)):
            raise DomainError(f"exp(tK) is not a contraction: K + K^* has eigenvalue {top:.3e}")
        object.__setattr__(self, "k", k)

    @property
    def d(self):
        return self.k.shape[0]

    def at(self, t):
        return expm(_check_time(t) * self.k)


@dataclass(frozen=True)
class CyclicShift:
    """Unitary circular shift ``e_j -> e_{j+1 mod d}`` once per grid step."""

    d: int
    step: float

    def __post_init__(self):
        check_dim(self.d)
        if not self.step > 0:
            raise DomainError("grid step must be positive")

    @property
    def time_step(self):
        return self.step

    def at(self, t):
        k = _grid_steps(_check_time(t), self.step)
        return np.roll(np.eye(self.d, dtype=complex), k % self.d, axis=0)


@dataclass(frozen=True)
class TruncatedShift:
    """Shift ``e_j -> e_{j+1}`` discarding the top cell: a nilpotent contraction."""

    d: int
    step: float

    def __post_init__(self):
        check_dim(self.d)
        if not self.step > 0:
            raise DomainError("grid step must be positive")

    @property
    def time_step(self):
        return self.step

    def at(self, t):
        k = _grid_steps(_check_time(t), self.step)
        return np.eye(self.d, k=-k, dtype=complex)


# -- semigroup specs on B(H) ----------------------------------------------------

class SemigroupSpec:
    """Common interface: ``d``, ``time_step`` and ``evaluate(t)``."""

    time_step = None

    def evaluate(self, t):
        raise NotImplementedError

    def generator(self):
        """The generator, exact where available, else the one-step difference quotient."""
        step = self.time_step
        return (self.evaluate(step) - identity_superop(self.d)) * (1.0 / step)

    def snap(self, t):
        """Nearest admissible time at or below ``t``."""
        if self.time_step is None:
            return float(t)
        return math.floor(t / self.time_step + _ALIGN_RTOL) * self.time_step


@dataclass(frozen=True, eq=False)
class Exponential(SemigroupSpec):
    generator_superop: Superoperator
    lindblad_form: LindbladForm | None = None
    label: str = "exponential"

    @classmethod
    def from_lindblad(cls, lf, label="lindblad"):
        return cls(lf.generator, lf, label)

    @property
    def d(self):
        return self.generator_superop.d

    def evaluate(self, t):
        t = _check_time(t)
        if t == 0.0:
            return identity_superop(self.d)
        return Superoperator(self.d, expm(t * self.generator_superop.matrix))

    def generator(self):
        return self.generator_superop


@dataclass(frozen=True, eq=False)
class Conjugation(SemigroupSpec):
    contraction: object
    label: str = "conjugation"

    @property
    def d(self):
        return self.contraction.d

    @property
    def time_step(self):
        return self.contraction.time_step

    def evaluate(self, t):
        v = self.contraction.at(t)
        return superop_from_sandwich(v, v.conj().T)

    def generator(self):
        if isinstance(self.contraction, MatrixGroup):
            k = self.contraction.k
            eye = np.eye(self.d, dtype=complex)
            return superop_from_sandwich(k, eye) + superop_from_sandwich(eye, k.conj().T)
        return super().generator()


def _default_profile(n, step):
    x = (np.arange(n) + 0.5) * step
    u = np.sqrt(2.0) * np.exp(-x)
    return u / np.linalg.norm(u)


@dataclass(frozen=True, eq=False)
class GridSpec:
    """``n`` cells of width ``step``; ``f_vec`` the unit vector discretizing ``f``.

    By default ``f_vec`` samples ``sqrt(2) exp(-x)`` at cell midpoints and is
    renormalized to unit length.
    """

    n: int
    step: float
    f_vec: np.ndarray = field(default=None)

    def __post_init__(self):
        check_dim(self.n)
        if self.n < 4:
            raise DomainError("grid needs at least 4 cells")
        if not self.step > 0:
            raise DomainError("grid step must be positive")
        f = _default_profile(self.n, self.step) if self.f_vec is None else np.asarray(self.f_vec, dtype=complex)
        if f.shape != (self.n,):
            raise DomainError(f"f_vec must have length {self.n}")
        if abs(np.linalg.norm(f) - 1.0) > 1e-12:
            raise DomainError("f_vec must be a unit vector")
        object.__setattr__(self, "f_vec", np.asarray(f, dtype=complex))

    @property
    def horizon(self):
        return self.n * self.step

    def omega(self, a):
        """``<f, A f>``; accepts stacks ``(..., n, n)``."""
        f = self.f_vec
        return np.einsum("i,...ij,j->...", f.conj(), a, f)


@dataclass(frozen=True, eq=False)
class ShiftExample(SemigroupSpec):
    grid: GridSpec
    label: str = "shift-example"

    @property
    def d(self):
        return self.grid.n

    @property
    def time_step(self):
        return self.grid.step

    def shift(self, t):
        return np.eye(self.d, k=-_grid_steps(_check_time(t), self.grid.step), dtype=complex)

    def projection(self, t):
        k = _grid_steps(_check_time(t), self.grid.step)
        return np.diag((np.arange(self.d) < k).astype(complex))

    def evaluate(self, t):
        k = _grid_steps(_check_time(t), self.grid.step)
        n = self.d
        grid = self.grid

        def action(a):
            a = np.asarray(a, dtype=complex)
            out = np.zeros_like(a)
            if k < n:
                out[..., k:, k:] = a[..., : n - k, : n - k]
            idx = np.arange(min(k, n))
            out[..., idx, idx] += grid.omega(a)[..., None]
            return out

        return Superoperator(n, action=action)


def identity_spec(d):
    """The trivial semigroup ``T_t = id`` (generator zero)."""
    return Exponential(zero_superop(d), label="identity")


def evaluate(spec, t):
    return spec.evaluate(t)


# -- checks --------------------------------------------------------------------

def check_semigroup_law(spec, t_grid, tol=1e-10):
    """Largest ``||T_{t+s} - T_t T_s||`` over all pairs drawn from ``t_grid``.

    Also records ``||T_0 - id||``.
    """
    t_grid = [_check_time(t) for t in t_grid]
    cache = {}

    def T(t):
        key = round(t, 12)
        if key not in cache:
            cache[key] = spec.evaluate(t)
        return cache[key]

    report = VerificationReport("semigroup-law")
    worst, worst_pair = 0.0, None
    for t in t_grid:
        for s in t_grid:
            r = (T(t + s) - T(t) @ T(s)).norm()
            if r > worst:
                worst, worst_pair = r, (t, s)
    report.add("law", worst, tol)
    report.add("identity-at-zero", (T(0.0) - identity_superop(spec.d)).norm(), max(tol, 1e-12))
    report.metadata.update(spec=getattr(spec, "label", type(spec).__name__), pairs=len(t_grid) ** 2,
                           worst_pair=worst_pair)
    if spec.time_step is not None:
        report.metadata.update(step=spec.time_step, constant_over_step=worst / spec.time_step)
    return report


@dataclass(frozen=True)
class ExponentialBound:
    """``||T_t|| <= m exp(omega t)`` for all ``t >= 0``.

    ``sup_unit`` is the sampled supremum of ``||T_t||`` over ``[0, 1]`` and
    ``k_constructive`` the cruder cap ``max(M_d, ||T_d||^floor(1/d) M_d)``
    built only from the window ``[0, d]``.
    """

    m: float
    omega: float
    sup_unit: float = float("nan")
    k_constructive: float = float("nan")
    delta: float = float("nan")

    def __call__(self, t):
        return self.m * math.exp(self.omega * t)


def _norm_at(spec, t):
    return spec.evaluate(t).norm()


def _sampled_sup(spec, ts):
    norms = np.array([_norm_at(spec, t) for t in ts])
    best = float(norms.max())
    if spec.time_step is None and len(ts) > 2:
        # polish every sampled local maximum; a coarse grid undershoots peaks
        for i in range(len(ts)):
            left = norms[i - 1] if i > 0 else -np.inf
            right = norms[i + 1] if i + 1 < len(ts) else -np.inf
            if norms[i] >= left and norms[i] >= right:
                lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
                if hi > lo:
                    res = minimize_scalar(lambda t: -_norm_at(spec, t), bounds=(lo, hi),
                                          method="bounded", options={"xatol": 1e-10})
                    best = max(best, -float(res.fun))
    return best


def estimate_exponential_bound(spec, delta=0.1, samples=201):
    """Exponential bound from the behaviour of the semigroup on ``[0, 1]``.

    With ``M = sup_{[0,1]} ||T_t||`` and ``omega = ln ||T_1||``, writing
    ``t = n + e`` gives ``||T_t|| <= ||T_1||^n ||T_e|| <= M e^{omega n}``.
    That is at most ``M e^{omega t}`` when ``omega >= 0``; for a decaying
    semigroup ``n > t - 1`` only yields ``M e^{-omega} e^{omega t}``, so ``m``
    carries that factor.

    ``delta`` is the short window used for ``k_constructive``; on grid specs
    it is snapped down to a multiple of the step (at least one step).
    """
    if not 0 < delta <= 1:
        raise DomainError("delta must lie in (0, 1]")
    step = spec.time_step
    if step is None:
        ts = np.linspace(0.0, 1.0, samples)
    else:
        ts = np.arange(0, _grid_steps(spec.snap(1.0), step) + 1) * step
        delta = max(spec.snap(delta), step)
    sup_unit = _sampled_sup(spec, ts)
    one = ts[-1]
    t1 = _norm_at(spec, one)
    # a semigroup that dies out (nilpotent shifts) still needs a finite rate;
    # any value at or above ||T_1|| keeps the bound valid
    t1 = max(t1, _DECAY_FLOOR * sup_unit)
    omega = math.log(t1) / one
    if omega < 0:
        m = sup_unit * math.exp(-omega * one)
    else:
        m = sup_unit
    window = ts[ts <= delta + 1e-12]
    m_delta = _sampled_sup(spec, window) if window.size > 1 else _norm_at(spec, window[0])
    n_delta = math.floor(one / delta + 1e-12)
    k = max(m_delta, _norm_at(spec, delta) ** n_delta * m_delta)
    return ExponentialBound(m=max(m, 1.0), omega=omega, sup_unit=sup_unit, k_constructive=k, delta=delta)


def verify_exponential_bound(spec, bound, horizon=5.0, samples=101, tol=1e-8):
    """Check the bound against freshly sampled norms on ``[0, horizon]``."""
    ts = np.linspace(0.0, horizon, samples)
    if spec.time_step is not None:
        ts = np.unique([spec.snap(t) for t in ts])
    excess = max(_norm_at(spec, t) - bound(t) for t in ts)
    report = VerificationReport("exp-bound")
    report.add("excess", max(excess, 0.0), tol)
    report.metadata.update(m=bound.m, omega=bound.omega, horizon=horizon, samples=len(ts),
                           k_constructive=bound.k_constructive)
    return report


def _monotonicity_excess(values, slack=0.10):
    """How far a sequence rises above ``(1 + slack)`` times its predecessor."""
    worst = 0.0
    for prev, cur in zip(values, values[1:]):
        worst = max(worst, cur - (1.0 + slack) * prev)
    return worst


def check_wot_continuity_at_zero(spec, basis, a, t_seq, tol=1e-2):
    """``|eta(T_t A - A)|`` along ``t_seq`` for every functional in ``basis``.

    Passes when the residual at the last (smallest) ``t`` is within ``tol`` and
    the sequence of maxima is non-increasing up to 10% slack.
    """
    a = as_matrix(a)
    t_seq = [_check_time(t) for t in t_seq]
    if any(t2 >= t1 for t1, t2 in zip(t_seq, t_seq[1:])) or not t_seq or t_seq[-1] <= 0:
        raise DomainError("t_seq must be strictly decreasing and positive")
    per_t = []
    for t in t_seq:
        per_t.append(np.abs(basis.pairings(spec.evaluate(t)(a) - a)))
    maxima = [float(p.max()) for p in per_t]
    report = VerificationReport("wot-zero")
    report.add("smallest-t", maxima[-1], tol)
    report.add("monotonicity-excess", _monotonicity_excess(maxima), 0.0)
    report.metadata.update(t_seq=list(t_seq), maxima=maxima,
                           per_functional_last=[float(x) for x in per_t[-1]])
    return report


def _random_operators(n, count, rng):
    out = []
    for _ in range(count):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        out.append(a / op_norm(a))
    return out


def _omega_drift(grid, s_values, ops):
    spec = ShiftExample(grid)
    worst = 0.0
    for s in s_values:
        ts = spec.evaluate(s)
        for a in ops:
            worst = max(worst, float(abs(grid.omega(ts(a)) - grid.omega(a))))
    return worst


def omega_invariance_check(grid, s_grid, tol=1e-6, n_random=8, seed=0, ops=None):
    """Largest ``|omega(T_s A) - omega(A)|`` over ``s`` and unit-norm random ``A``.

    The identity ``I`` is always among the tested operators.
    """
    spec = ShiftExample(grid)
    for s in s_grid:
        _grid_steps(_check_time(s), grid.step)
    if ops is None:
        ops = _random_operators(grid.n, n_random, np.random.default_rng(seed))
    ops = [np.eye(grid.n, dtype=complex)] + list(ops)
    worst = _omega_drift(grid, s_grid, ops)
    report = VerificationReport("omega-invariance")
    report.add("omega-drift", worst, tol)
    report.metadata.update(n=grid.n, step=grid.step, horizon=grid.horizon, constant_over_step=worst / grid.step,
                           label=spec.label, operators=len(ops))
    return report


def refine_grid(grid, factor=2):
    """Same horizon, ``factor`` times as many cells."""
    return GridSpec(grid.n * factor, grid.step / factor)


def refine_operator(a, factor=2):
    """Carry an operator to a grid refined by ``factor``.

    Each coarse cell indicator is the normalized sum of its ``factor`` fine
    sub-cells, so the refined operator is ``J A J^T`` with that isometry ``J``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    j = np.kron(np.eye(n), np.ones((factor, 1)) / np.sqrt(factor))
    return j @ a @ j.T


def omega_invariance_refinement(grid, s_values, levels=2, n_random=4, seed=0):
    """Drift of ``omega`` under successive halvings of the step at fixed horizon.

    The same continuum-consistent operators (random on the coarsest grid,
    carried over by :func:`refine_operator`) and the same physical times are
    used at each level.  Returns the drifts and successive ratios.
    """
    ops = _random_operators(grid.n, n_random, np.random.default_rng(seed))
    drifts, steps = [], []
    for level in range(levels):
        for s in s_values:
            _grid_steps(_check_time(s), grid.step)
        drifts.append(_omega_drift(grid, s_values, ops))
        steps.append(grid.step)
        if level + 1 < levels:
            grid = refine_grid(grid)
            ops = [refine_operator(a) for a in ops]
    ratios = [b / a if a > 0 else float("nan") for a, b in zip(drifts, drifts[1:])]
    return {"steps": steps, "drifts": drifts, "ratios": ratios}
