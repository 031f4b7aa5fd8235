"""
Resolvents from Laplace transforms
==================================

Compare the Laplace transform of a semigroup with the inverse of
``lambda - L`` and recover the generator from difference quotients.
"""

# %%
import numpy as np

import semiflow as sf

rng = np.random.default_rng(1)
spec = sf.Exponential.from_lindblad(sf.random_lindblad_form(2, 2, rng))
bound = sf.estimate_exponential_bound(spec)
lam = sf.default_lambda(bound)
print(f"M = {bound.m:.3f}, omega = {bound.omega:.3f}, lambda = {lam}")

# %%
print(sf.resolvent_agreement_check(spec, spec.generator(), lam, bound).summary())
print(sf.resolvent_equation_check(spec, spec.generator(), lam, bound).summary())

# %%
# Difference quotients converge to ``L(A)`` at first order; one Richardson
# step lifts that to second order.
a = rng.standard_normal((2, 2))
basis = sf.functional_basis(2)
h_seq = [0.1 * 2.0 ** -k for k in range(6)]
for richardson in (False, True):
    _, rep = sf.generator_difference_quotient(spec, a, h_seq, basis, richardson=richardson,
                                              reference=spec.generator()(a))
    print(f"richardson={richardson}: order {rep.metadata['order']:.2f}")
