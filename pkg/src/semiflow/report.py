"""Structured outcome of a verification suite."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class VerificationReport:
    """Named residuals, each with its own tolerance.

    ``passed`` is true exactly when every residual is at most its tolerance
    (NaN counts as a failure).  ``metadata`` carries anything a reader needs
    to reproduce the number: lambda, truncation point, grid, bound, timing.
    """

    suite: str
    residuals: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    error: str | None = None
    wall_time: float | None = None

    def add(self, name, value, tol):
        self.residuals[name] = float(value)
        self.tolerances[name] = float(tol)
        return self

    @property
    def passed(self):
        if self.error is not None:
            return False
        return all(self.residuals[k] <= self.tolerances[k] for k in self.residuals)

    def __bool__(self):
        return self.passed

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{k}={v:.3e}<= {self.tolerances[k]:.1e}" for k, v in self.residuals.items()]
        if self.error:
            parts.append(f"error={self.error}")
        return f"{status} {self.suite}: " + ", ".join(parts)

    def to_dict(self, timing=False):
        metadata = dict(self.metadata)
        if timing and self.wall_time is not None:
            metadata["wall_time"] = self.wall_time
        return {
            "suite": self.suite,
            "pass": self.passed,
            "residuals": dict(self.residuals),
            "tolerances": dict(self.tolerances),
            "metadata": metadata,
            "error": self.error,
        }
