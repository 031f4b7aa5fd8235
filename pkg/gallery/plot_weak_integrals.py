"""
Weak integrals of operator-valued paths
=======================================

Integrate ``t -> exp(-t) T_t(A)`` over ``[0, inf)`` and check that pairing
with functionals commutes with integration.
"""

# %%
import math

import numpy as np

import semiflow as sf

spec = sf.Exponential.from_lindblad(sf.dephasing_form())
a = sf.PAULI_X + 0.5 * sf.PAULI_Z
path = sf.OperatorPath(lambda t: math.exp(-t) * spec.evaluate(t)(a), 2)

# %%
# The envelope ``||T_t|| <= 1`` gives the cut-off for the infinite interval.
bound = sf.DominationBound(m=1.0, omega=0.0, re_lambda=1.0)
cfg = sf.QuadratureConfig(tail=bound, tail_norm=np.linalg.norm(a, 2), tail_eps=1e-12)
print("cut-off:", cfg.upper_limit(math.inf))
print(sf.vector_integral(path, (0.0, math.inf), cfg).round(12))

# %%
# Closed form: sigma_x decays at rate 2 and sigma_z is fixed.
print(sf.PAULI_X / 3 + 0.5 * sf.PAULI_Z)

# %%
# Pairings against the full functional basis, first with shared nodes, then
# with adaptive Simpson as an independent rule.
basis = sf.functional_basis(2)
print(sf.pettis_consistency_check(path, basis, (0.0, math.inf), cfg).summary())
simpson = sf.QuadratureConfig(rule="adaptive-simpson", tail=bound, tail_norm=cfg.tail_norm, tail_eps=1e-12)
print(sf.pettis_consistency_check(path, basis, (0.0, math.inf), cfg, tol=1e-8, scalar_config=simpson).summary())
