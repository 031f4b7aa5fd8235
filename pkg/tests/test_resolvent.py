import math

import numpy as np
import pytest

from semiflow.matrix_core import SingularMatrixError, op_norm
from semiflow.operator_space import functional_basis
from semiflow.quantum_maps import PAULI_X, PAULI_Z, dephasing_form, identity_superop, random_lindblad_form, zero_superop
from semiflow.resolvent import (
    ClosednessCase,
    closedness_harness,
    commutation_with_semigroup_check,
    default_lambda,
    direct_resolvent,
    generator_difference_quotient,
    laplace_resolvent,
    resolvent_agreement_check,
    resolvent_equation_check,
)
from semiflow.semigroup import Exponential, check_semigroup_law, GridSpec, ShiftExample, estimate_exponential_bound, identity_spec
from semiflow.weak_integration import HypothesisViolation

from conftest import crandn

DEPHASING = Exponential.from_lindblad(dephasing_form())


def random_spec(d, rng):
    return Exponential.from_lindblad(random_lindblad_form(d, 2, rng))


def test_laplace_identity_semigroup():
    res = laplace_resolvent(identity_spec(2), 1.0)
    assert (res.r - identity_superop(2)).norm() <= 1e-8
    assert res.method == "laplace" and res.t_max > 0


def test_laplace_dephasing_closed_form():
    res = laplace_resolvent(DEPHASING, 2.0)
    assert op_norm(res(PAULI_X) - PAULI_X / 4) <= 1e-7
    assert op_norm(res(np.eye(2)) - np.eye(2) / 2) <= 1e-7
    assert op_norm(res(PAULI_Z) - PAULI_Z / 2) <= 1e-7


def test_laplace_rejects_small_lambda():
    with pytest.raises(HypothesisViolation):
        laplace_resolvent(DEPHASING, -0.5)


def test_direct_resolvent_examples():
    r = direct_resolvent(zero_superop(2), 2.0)
    assert (r.r - identity_superop(2) * 0.5).norm() <= 1e-15
    r = direct_resolvent(DEPHASING.generator(), 2.0)
    np.testing.assert_allclose(r(PAULI_X), PAULI_X / 4, atol=1e-12)
    with pytest.raises(SingularMatrixError):
        direct_resolvent(DEPHASING.generator(), -2.0)
    with pytest.raises(SingularMatrixError):
        direct_resolvent(DEPHASING.generator(), 0.0)


def test_agreement_and_equation(rng):
    for d in (2, 3):
        spec = random_spec(d, rng)
        bound = estimate_exponential_bound(spec)
        lam = default_lambda(bound)
        rep = resolvent_agreement_check(spec, spec.generator(), lam, bound, tol=1e-6)
        assert rep.passed, rep.summary()
        rep = resolvent_equation_check(spec, spec.generator(), lam, bound, tol=1e-6)
        assert rep.passed, rep.summary()


def test_complex_lambda(rng):
    spec = random_spec(2, rng)
    lam = 1.5 + 3.0j
    rep = resolvent_agreement_check(spec, spec.generator(), lam, tol=1e-6)
    assert rep.passed, rep.summary()


def test_first_resolvent_identity(rng):
    spec = random_spec(2, rng)
    bound = estimate_exponential_bound(spec)
    lam, mu = 2.0, 3.5
    r_l = laplace_resolvent(spec, lam, bound).r
    r_m = laplace_resolvent(spec, mu, bound).r
    assert (r_l - r_m - (r_l @ r_m) * (mu - lam)).norm() <= 1e-8


def test_resolvent_norm_bound(rng):
    spec = random_spec(3, rng)
    bound = estimate_exponential_bound(spec)
    lam = bound.omega + 1.0
    r = laplace_resolvent(spec, lam, bound).r
    assert r.norm() <= bound.m / (lam - bound.omega) + 1e-9


def test_commutation_with_semigroup():
    rep = commutation_with_semigroup_check(DEPHASING, 2.0, [0.1, 0.5, 1.0], tol=1e-8)
    assert rep.passed, rep.summary()


def test_commutation_with_shift_example_tracks_truncation():
    # the discretized shift obeys the semigroup law only up to the finite
    # horizon, so the commutator is bounded by the law residual and vanishes
    # as the horizon grows at fixed step
    residuals = []
    for n in (8, 16, 32):
        spec = ShiftExample(GridSpec(n, 0.5))
        bound = estimate_exponential_bound(spec)
        times = [0.5, 1.0, 2.0]
        comm = commutation_with_semigroup_check(spec, default_lambda(bound), times, bound).residuals["commutator"]
        law = check_semigroup_law(spec, times).residuals["law"]
        assert comm <= law
        residuals.append(comm)
    assert residuals[0] > 10 * residuals[1] > 100 * residuals[2]
    assert residuals[2] <= 1e-7


def _dephasing_quotient_error(h):
    return abs((math.exp(-2 * h) - 1) / h + 2)


def test_difference_quotient_plain():
    basis = functional_basis(2)
    h_seq = [0.1 * 2.0 ** -k for k in range(6)]
    est, rep = generator_difference_quotient(DEPHASING, PAULI_X, h_seq, basis, reference=-2 * PAULI_X)
    for h, err in zip(h_seq, rep.metadata["errors"]):
        assert err == pytest.approx(_dephasing_quotient_error(h), rel=1e-6)
    assert rep.metadata["order"] == pytest.approx(1.0, abs=0.1)
    _, rep = generator_difference_quotient(DEPHASING, PAULI_X, [1e-3], basis, reference=-2 * PAULI_X)
    assert rep.metadata["errors"][0] <= 2.1e-3


def test_difference_quotient_richardson():
    basis = functional_basis(2)
    h_seq = [0.1 * 2.0 ** -k for k in range(6)]
    _, rep = generator_difference_quotient(DEPHASING, PAULI_X, h_seq, basis, richardson=True,
                                           reference=-2 * PAULI_X)
    assert rep.metadata["order"] == pytest.approx(2.0, abs=0.2)
    _, rep = generator_difference_quotient(DEPHASING, PAULI_X, [1e-3], basis, richardson=True,
                                           reference=-2 * PAULI_X)
    assert rep.metadata["errors"][0] <= 5e-6


def test_difference_quotient_self_convergence():
    basis = functional_basis(2)
    _, rep = generator_difference_quotient(DEPHASING, PAULI_X, [0.1 * 2.0 ** -k for k in range(10)], basis)
    assert rep.metadata["order"] == pytest.approx(1.0, abs=0.15)
    with pytest.raises(ValueError):
        generator_difference_quotient(DEPHASING, PAULI_X, [0.1, 0.2], basis)


def test_closedness_dephasing_closed_form():
    b_seq = [PAULI_X + PAULI_Z / n ** 2 for n in range(1, 11)]
    case = ClosednessCase(2.0, b_seq, PAULI_X, "dephasing")
    rep = closedness_harness(DEPHASING, DEPHASING.generator(), case, tol=1e-6)
    assert rep.passed, rep.summary()
    a = laplace_resolvent(DEPHASING, 2.0).r(PAULI_X)
    assert op_norm(DEPHASING.generator()(a) + PAULI_X / 2) <= 1e-7


def test_closedness_constant_sequence(rng):
    b = crandn(rng, 2, 2)
    case = ClosednessCase(2.0, [b, b, b], b)
    rep = closedness_harness(DEPHASING, DEPHASING.generator(), case, tol=1e-6)
    assert rep.passed, rep.summary()


def test_closedness_random(rng):
    spec = random_spec(3, rng)
    bound = estimate_exponential_bound(spec)
    b, direction = crandn(rng, 3, 3), crandn(rng, 3, 3)
    case = ClosednessCase(default_lambda(bound), [b + direction / n ** 2 for n in range(1, 11)], b)
    rep = closedness_harness(spec, spec.generator(), case, bound, tol=1e-6)
    assert rep.passed, rep.summary()


def test_closedness_case_validation():
    with pytest.raises(ValueError):
        ClosednessCase(2.0, [], PAULI_X)
    with pytest.raises(ValueError):
        ClosednessCase(2.0, [PAULI_X + PAULI_Z / 4, PAULI_X + PAULI_Z], PAULI_X)
