"""Resolvents of semigroup generators and the checks built on them.

``laplace_resolvent`` computes ``R(lambda) A = int_0^inf e^{-lambda t} T_t A dt``
column by column (one matrix unit at a time) with the weak integration
machinery; ``direct_resolvent`` inverts ``lambda - L``.  The remaining
functions compare the two, check the resolvent equation and the commutation
``R T_t = T_t R``, recover the generator from weak difference quotients and
run the resolvent-based closedness argument along sequences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matrix_core import SingularMatrixError, as_matrix, op_norm, solve
from .operator_space import devectorize, matrix_units, vectorize
from .quantum_maps import Superoperator, identity_superop
from .report import VerificationReport
from .semigroup import _monotonicity_excess, estimate_exponential_bound
from .weak_integration import (
    DominationBound,
    HypothesisViolation,
    OperatorPath,
    QuadratureConfig,
    tail_truncation_point,
    vector_integral,
)

__all__ = [
    "ResolventResult",
    "ClosednessCase",
    "default_lambda",
    "laplace_resolvent",
    "direct_resolvent",
    "resolvent_agreement_check",
    "resolvent_equation_check",
    "commutation_with_semigroup_check",
    "generator_difference_quotient",
    "closedness_harness",
]


@dataclass
class ResolventResult:
    lam: complex
    r: Superoperator
    method: str
    truncation_eps: float = 0.0
    t_max: float = 0.0

    def __call__(self, a):
        return self.r(a)


@dataclass
class ClosednessCase:
    """A sequence ``b_seq`` converging in norm to ``b_limit``."""

    lam: complex
    b_seq: list
    b_limit: np.ndarray
    description: str = ""

    def __post_init__(self):
        if not self.b_seq:
            raise ValueError("b_seq must be nonempty")
        self.b_limit = as_matrix(self.b_limit, "b_limit")
        self.b_seq = [as_matrix(b, "b_seq entry") for b in self.b_seq]
        dist = [op_norm(b - self.b_limit) for b in self.b_seq]
        if any(d2 >= d1 for d1, d2 in zip(dist, dist[1:])) and any(dist):
            raise ValueError("distance of b_seq to b_limit must be strictly decreasing")


def default_lambda(bound):
    return complex(bound.omega + 2.0)


def laplace_resolvent(spec, lam, bound=None, eps=1e-9, config=None):
    """``R(lambda)`` as a Laplace transform of the semigroup.

    The integral is cut at the point where the tail of the envelope
    ``m exp((omega - Re lambda) t)`` drops below ``eps`` and integrated with
    composite Gauss-Legendre.  For grid specs the path is held constant on
    each cell, ``T_t = T_{step floor(t/step)}``, and panels are aligned with
    the cells.
    """
    lam = complex(lam)
    if bound is None:
        bound = estimate_exponential_bound(spec)
    if not lam.real > bound.omega:
        raise HypothesisViolation(f"Re(lambda)={lam.real!r} must exceed omega={bound.omega!r}")
    config = QuadratureConfig() if config is None else config
    dom = DominationBound(bound.m, bound.omega, lam.real)
    t_max = tail_truncation_point(dom, 1.0, eps)
    step = spec.time_step
    if step is not None:
        cells = max(1, math.ceil(t_max / step - 1e-9))
        t_max = cells * step
        config = QuadratureConfig(nodes_per_panel=config.nodes_per_panel, panels=cells)
    elif config.panels * 0.25 < t_max:
        # keep panels no wider than a quarter time unit on long horizons
        config = QuadratureConfig(nodes_per_panel=config.nodes_per_panel, panels=math.ceil(4 * t_max))
    cache = {}

    def semigroup_at(t):
        if step is not None:
            t = math.floor(t / step) * step
        if t not in cache:
            cache[t] = spec.evaluate(t)
        return cache[t]

    d = spec.d
    columns = []
    for unit in matrix_units(d):
        path = OperatorPath(lambda t, unit=unit: np.exp(-lam * t) * semigroup_at(t)(unit), d)
        columns.append(vectorize(vector_integral(path, (0.0, t_max), config)))
    r = Superoperator(d, np.column_stack(columns))
    return ResolventResult(lam, r, "laplace", truncation_eps=eps, t_max=t_max)


def direct_resolvent(l, lam):
    """``(lambda - L)^{-1}``; raises :class:`SingularMatrixError` on the spectrum."""
    lam = complex(lam)
    n = l.d * l.d
    r = solve(lam * np.eye(n) - l.matrix, np.eye(n, dtype=complex))
    return ResolventResult(lam, Superoperator(l.d, r), "direct")


def resolvent_agreement_check(spec, l, lam, bound=None, eps=1e-9, config=None, tol=1e-6):
    if bound is None:
        bound = estimate_exponential_bound(spec)
    lap = laplace_resolvent(spec, lam, bound, eps, config)
    direct = direct_resolvent(l, lam)
    report = VerificationReport("resolvent-agreement")
    report.add("laplace-vs-direct", (lap.r - direct.r).norm(), tol)
    report.metadata.update(lam=_c(lap.lam), t_max=lap.t_max, eps=eps, m=bound.m, omega=bound.omega)
    return report


def resolvent_equation_check(spec, l, lam, bound=None, eps=1e-9, config=None, tol=1e-6):
    """``(lambda - L) R A = A`` and ``R (lambda - L) A = A`` on every matrix unit."""
    if bound is None:
        bound = estimate_exponential_bound(spec)
    res = laplace_resolvent(spec, lam, bound, eps, config)
    lam = res.lam
    left, right = 0.0, 0.0
    for a in matrix_units(spec.d):
        ra = res.r(a)
        left = max(left, op_norm(lam * ra - l(ra) - a))
        right = max(right, op_norm(res.r(lam * a - l(a)) - a))
    report = VerificationReport("resolvent-equation")
    report.add("left-inverse", left, tol)
    report.add("right-inverse", right, tol)
    report.metadata.update(lam=_c(lam), t_max=res.t_max, eps=eps, m=bound.m, omega=bound.omega)
    return report


def commutation_with_semigroup_check(spec, lam, t_grid, bound=None, eps=1e-9, config=None, tol=1e-8):
    """Largest ``||R(lambda) T_t - T_t R(lambda)||`` over ``t_grid``."""
    if bound is None:
        bound = estimate_exponential_bound(spec)
    res = laplace_resolvent(spec, lam, bound, eps, config)
    worst = 0.0
    for t in t_grid:
        tt = spec.evaluate(t)
        worst = max(worst, (res.r @ tt - tt @ res.r).norm())
    report = VerificationReport("resolvent-semigroup-commutation")
    report.add("commutator", worst, tol)
    report.metadata.update(lam=_c(res.lam), t_max=res.t_max, t_grid=[float(t) for t in t_grid])
    return report


def _quotient(spec, a, h, basis):
    # assemble the operator from its pairings, as the weak definition prescribes
    diff = spec.evaluate(h)(a) - a
    return basis.reconstruct(basis.pairings(diff) / h)


def generator_difference_quotient(spec, a, h_seq, basis, richardson=False, reference=None):
    """Weak difference quotients ``eta((T_h A - A)/h)`` along ``h_seq``.

    With ``richardson`` each estimate is ``2 Q(h/2) - Q(h)``.  The observed
    convergence order is the least-squares slope of ``log err`` against
    ``log h``; errors are measured against ``reference`` when given, otherwise
    against the estimate at the smallest ``h`` (self-convergence, which needs
    at least three steps).

    Returns ``(estimate at the last h, report)``.
    """
    a = as_matrix(a)
    h_seq = [float(h) for h in h_seq]
    if any(h2 >= h1 for h1, h2 in zip(h_seq, h_seq[1:])) or h_seq[-1] <= 0:
        raise ValueError("h_seq must be strictly decreasing and positive")
    estimates = []
    for h in h_seq:
        q = _quotient(spec, a, h, basis)
        if richardson:
            q = 2.0 * _quotient(spec, a, h / 2.0, basis) - q
        estimates.append(q)
    report = VerificationReport("difference-quotient")
    if reference is not None:
        reference = as_matrix(reference)
        hs, errs = h_seq, [op_norm(q - reference) for q in estimates]
    else:
        hs, errs = h_seq[:-1], [op_norm(q - estimates[-1]) for q in estimates[:-1]]
    usable = [(h, e) for h, e in zip(hs, errs) if e > 0]
    if len(usable) >= 2:
        lh, le = np.log([u[0] for u in usable]), np.log([u[1] for u in usable])
        order = float(np.polyfit(lh, le, 1)[0])
    else:
        order = float("nan")
    report.metadata.update(h_seq=h_seq, errors=[float(e) for e in errs], order=order,
                           richardson=richardson, reference=reference is not None)
    return estimates[-1], report


def closedness_harness(spec, l, case, bound=None, eps=1e-9, config=None, basis=None, tol=1e-6):
    """Resolvent route to closedness of the generator, along a sequence.

    ``A_n := R(lambda) B_n`` lies in the domain with ``(lambda - L) A_n = B_n``.
    Three things are checked:

    (a) ``A_n -> A := R(lambda) b_limit`` weakly: the largest pairing of
        ``A_n - A`` decreases (10% slack) and stays below
        ``||R|| ||B_n - b_limit|| + tol``;
    (b) with ``B := lambda A - b_limit``, ``||L(A) - B|| <= tol``;
    (c) ``L(A_n) = lambda A_n - B_n -> B`` weakly, in the same sense as (a).

    Membership ``(lambda - L) A_n = B_n`` is recorded as a fourth residual.
    """
    from .operator_space import functional_basis

    if bound is None:
        bound = estimate_exponential_bound(spec)
    lam = complex(case.lam)
    if not lam.real > bound.omega:
        raise HypothesisViolation(f"Re(lambda)={lam.real!r} must exceed omega={bound.omega!r}")
    basis = functional_basis(spec.d) if basis is None else basis
    res = laplace_resolvent(spec, lam, bound, eps, config)
    r = res.r
    r_norm = r.norm()
    a_lim = r(case.b_limit)
    b_target = lam * a_lim - case.b_limit
    weak_a, weak_la, envelope_a, envelope_la, member = [], [], 0.0, 0.0, 0.0
    for b_n in case.b_seq:
        a_n = r(b_n)
        dist = op_norm(b_n - case.b_limit)
        la_n = lam * a_n - b_n
        weak_a.append(float(np.max(np.abs(basis.pairings(a_n - a_lim)))))
        weak_la.append(float(np.max(np.abs(basis.pairings(la_n - b_target)))))
        envelope_a = max(envelope_a, weak_a[-1] - r_norm * dist)
        envelope_la = max(envelope_la, weak_la[-1] - (abs(lam) * r_norm + 1.0) * dist)
        member = max(member, op_norm(lam * a_n - l(a_n) - b_n))
    report = VerificationReport("closedness")
    report.add("a-monotonicity-excess", _monotonicity_excess(weak_a), 0.0)
    report.add("a-envelope-excess", max(envelope_a, 0.0), tol)
    report.add("limit-generator", op_norm(l(a_lim) - b_target), tol)
    report.add("la-monotonicity-excess", _monotonicity_excess(weak_la), 0.0)
    report.add("la-envelope-excess", max(envelope_la, 0.0), tol)
    report.add("domain-membership", member, tol)
    report.metadata.update(lam=_c(lam), description=case.description, terms=len(case.b_seq),
                           weak_a=weak_a, weak_la=weak_la, resolvent_norm=r_norm, t_max=res.t_max)
    return report


def _c(z):
    z = complex(z)
    return [z.real, z.imag]
