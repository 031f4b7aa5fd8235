"""
Lindblad generators and their semigroups
========================================

Build a unital Lindblad generator from Kraus data, exponentiate it and look
at the structure of the resulting maps.
"""

# %%
# A random generator on 3x3 matrices: two Kraus terms, a Hamiltonian, and the
# dissipative part of ``G`` chosen so that ``L(I) = 0``.
import numpy as np

import semiflow as sf

rng = np.random.default_rng(0)
form = sf.random_lindblad_form(3, 2, rng)
spec = sf.Exponential.from_lindblad(form)
print("||L(I)|| =", np.linalg.norm(form(np.eye(3)), 2))

# %%
# Every ``T_t`` is completely positive and unital, and the family is a semigroup.
for t in (0.1, 1.0, 5.0):
    tt = spec.evaluate(t)
    print(f"t={t:4}: min Choi eigenvalue {sf.is_completely_positive(tt)[1]: .1e}, "
          f"unital residual {sf.is_unital(tt)[1]:.1e}")
print(sf.check_semigroup_law(spec, np.linspace(0, 1, 6)).summary())

# %%
# The Kraus operators of the dissipative part can be recovered from its Choi
# matrix, and the generator agrees with its Stinespring rendering.
phi = sf.superop_from_kraus(form.kraus)
print("Kraus terms recovered:", len(sf.kraus_from_choi(sf.choi(phi))))
print(sf.gks_form_check(form).summary())
