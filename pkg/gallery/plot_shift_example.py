"""
A discretized shift semigroup
=============================

Conjugation by a truncated shift on a grid of cells, compressed to the
first cells and completed so that the maps stay unital.
"""

# %%
import semiflow as sf

grid = sf.GridSpec(n=32, step=0.25)
spec = sf.ShiftExample(grid)
tt = spec.evaluate(1.0)
print("CP:", sf.is_completely_positive(tt), " unital:", sf.is_unital(tt))

# %%
# The state given by the sampled profile is invariant, up to what leaks past
# the end of the grid.
print(sf.omega_invariance_check(grid, [0.5, 1.0, 2.0], tol=1e-2).summary())

# %%
# Halving the step at fixed horizon leaves that leak unchanged.
out = sf.omega_invariance_refinement(grid, [0.5, 1.0], levels=2)
for step, drift in zip(out["steps"], out["drifts"]):
    print(f"step {step:.4f}: drift {drift:.3e}")
