"""Weak (Pettis-style) integration of operator-valued paths on ``[0, inf)``.

An operator-valued integral is computed entrywise with one set of
quadrature nodes shared by all entries.  Pairing with a trace-duality
functional is linear, so pairing the vector integral and integrating the
paired scalar function agree node by node; :func:`pettis_consistency_check`
measures exactly that, and optionally compares against an independently run
adaptive rule.

Infinite intervals are cut at the point where an exponential domination
envelope ``m ||A|| exp((omega - re_lambda) t)`` has tail integral below
``eps``; paths are assumed continuous on the truncated interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .matrix_core import DomainError, ShapeError, as_matrix, op_norm
from .operator_space import check_dim
from .report import VerificationReport

__all__ = [
    "DominationBound",
    "QuadratureConfig",
    "OperatorPath",
    "EvaluationError",
    "HypothesisViolation",
    "tail_truncation_point",
    "quadrature_nodes",
    "scalar_integral",
    "vector_integral",
    "pettis_consistency_check",
    "commutation_check",
]


class EvaluationError(ArithmeticError):
    """The integrand produced a non-finite value."""


class HypothesisViolation(DomainError):
    """``re_lambda <= omega``: the domination envelope is not integrable."""


@dataclass(frozen=True)
class DominationBound:
    m: float
    omega: float
    re_lambda: float

    def __post_init__(self):
        if not self.re_lambda > self.omega:
            raise HypothesisViolation(
                f"need Re(lambda) > omega, got Re(lambda)={self.re_lambda!r}, omega={self.omega!r}")

    @property
    def decay(self):
        return self.re_lambda - self.omega


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre (default) or adaptive Simpson.

    For an infinite upper limit either ``t_max`` or ``tail`` must be set; with
    ``tail`` the cut-off comes from :func:`tail_truncation_point` using
    ``tail_norm`` and ``tail_eps``.
    """

    rule: str = "gauss-legendre"
    nodes_per_panel: int = 8
    panels: int = 64
    t_max: float | None = None
    tail: DominationBound | None = None
    tail_eps: float = 1e-10
    tail_norm: float = 1.0
    abs_tol: float = 1e-12
    max_depth: int = 60

    def __post_init__(self):
        if self.rule not in ("gauss-legendre", "adaptive-simpson"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.panels < 1:
            raise ValueError("panels must be >= 1")
        if not 2 <= self.nodes_per_panel <= 64:
            raise ValueError("nodes_per_panel must lie in [2, 64]")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")

    def upper_limit(self, b):
        if math.isfinite(b):
            return float(b)
        if self.tail is not None:
            return tail_truncation_point(self.tail, self.tail_norm, self.tail_eps)
        if self.t_max is not None:
            return float(self.t_max)
        raise ValueError("infinite interval needs t_max or a tail bound")


@dataclass(frozen=True)
class OperatorPath:
    """A continuous map ``t -> d x d`` complex matrix.

    The callable may be invoked concurrently and in any order.
    """

    func: object
    d: int

    def __post_init__(self):
        check_dim(self.d)

    def __call__(self, t):
        value = np.asarray(self.func(t), dtype=complex)
        if value.shape != (self.d, self.d):
            raise ShapeError(f"path returned shape {value.shape} at t={t}, expected {(self.d, self.d)}")
        if not np.all(np.isfinite(value)):
            raise EvaluationError(f"path is not finite at t={t}")
        return value


def tail_truncation_point(bound, norm_a, eps):
    """Smallest ``T`` with ``m ||A|| exp(-(re_lambda - omega) T) / (re_lambda - omega) <= eps``.

    The left side is the exact integral of the envelope over ``[T, inf)``.
    """
    if not isinstance(bound, DominationBound):
        bound = DominationBound(*bound)
    if not eps > 0:
        raise ValueError("eps must be positive")
    total = bound.m * norm_a / bound.decay
    if total <= eps:
        return 0.0
    return math.log(total / eps) / bound.decay


@lru_cache(maxsize=64)
def _legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def quadrature_nodes(a, b, config):
    """Nodes and weights of the composite Gauss-Legendre rule on ``[a, b]``."""
    x, w = _legendre(config.nodes_per_panel)
    edges = np.linspace(a, b, config.panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _finite(value, t):
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise EvaluationError(f"integrand is not finite at t={t}")
    return value


def _adaptive_simpson(g, a, b, tol, max_depth):
    fa, fm, fb = g(a), g(0.5 * (a + b)), g(b)
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    # explicit stack keeps deep refinements off the Python call stack
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        fl, fr = g(0.5 * (lo + mid)), g(0.5 * (mid + hi))
        left = (mid - lo) / 6.0 * (flo + 4 * fl + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4 * fr + fhi)
        delta = left + right - est
        if depth >= max_depth or abs(delta) <= 15 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, fl, fmid, left, eps / 2, depth + 1))
            stack.append((mid, hi, fmid, fr, fhi, right, eps / 2, depth + 1))
    return total


def scalar_integral(g, interval, config=QuadratureConfig()):
    """Integral of a scalar function over ``interval = (a, b)``; ``b`` may be ``inf``."""
    a, b = interval
    b = config.upper_limit(b)
    if b <= a:
        return 0j

    def checked(t):
        return _finite(g(t), t)

    if config.rule == "adaptive-simpson":
        # split into panels so that a narrow feature cannot hide between the
        # three initial samples
        edges = np.linspace(a, b, config.panels + 1)
        tol = config.abs_tol / config.panels
        return complex(sum(_adaptive_simpson(checked, lo, hi, tol, config.max_depth)
                           for lo, hi in zip(edges[:-1], edges[1:])))
    nodes, weights = quadrature_nodes(a, b, config)
    return complex(sum(w * checked(t) for t, w in zip(nodes, weights)))


def _as_path(f, d=None):
    if isinstance(f, OperatorPath):
        return f
    if d is None:
        raise ValueError("plain callables need an explicit dimension")
    return OperatorPath(f, d)


def vector_integral(f, interval, config=QuadratureConfig()):
    """Entrywise integral of an operator path with shared nodes."""
    f = _as_path(f)
    a, b = interval
    b = config.upper_limit(b)
    if b <= a:
        return np.zeros((f.d, f.d), dtype=complex)
    if config.rule == "adaptive-simpson":
        out = np.empty((f.d, f.d), dtype=complex)
        cache = {}

        def value(t):
            if t not in cache:
                cache[t] = f(t)
            return cache[t]

        for i in range(f.d):
            for j in range(f.d):
                out[i, j] = scalar_integral(lambda t: value(t)[i, j], (a, b), config)
        return out
    nodes, weights = quadrature_nodes(a, b, config)
    total = np.zeros((f.d, f.d), dtype=complex)
    for t, w in zip(nodes, weights):
        total += w * f(t)
    return total


def pettis_consistency_check(f, basis, interval, config=QuadratureConfig(), tol=1e-12,
                             scalar_config=None):
    """Pair the vector integral with each functional and compare to the paired scalar integral.

    ``scalar_config`` defaults to ``config`` (shared nodes, which tests the
    algebraic identity).  Passing a different rule, e.g. adaptive Simpson,
    tests agreement of two independent quadratures instead.
    """
    f = _as_path(f)
    scalar_config = config if scalar_config is None else scalar_config
    integral = vector_integral(f, interval, config)
    cache = {}

    def value(t):
        if t not in cache:
            cache[t] = f(t)
        return cache[t]

    residuals = []
    for eta in basis:
        lhs = eta(integral)
        rhs = scalar_integral(lambda t: eta(value(t)), interval, scalar_config)
        residuals.append(abs(lhs - rhs))
    report = VerificationReport("pettis")
    report.add("pairing-vs-scalar", max(residuals), tol)
    report.metadata.update(functionals=len(residuals), rule=config.rule, scalar_rule=scalar_config.rule,
                           shared_nodes=scalar_config == config,
                           t_max=config.upper_limit(interval[1]), per_functional=[float(r) for r in residuals])
    return report


def commutation_check(s, f, interval, config=QuadratureConfig(), tol=1e-10):
    """``|| s(int f) - int s(f) ||`` in operator norm."""
    f = _as_path(f)
    if s.d != f.d:
        raise ShapeError("superoperator and path act on different spaces")
    lhs = s(vector_integral(f, interval, config))
    rhs = vector_integral(OperatorPath(lambda t: s(f(t)), f.d), interval, config)
    report = VerificationReport("commutation")
    report.add("map-vs-integral", op_norm(lhs - rhs), tol)
    report.metadata.update(t_max=config.upper_limit(interval[1]), rule=config.rule)
    return report
