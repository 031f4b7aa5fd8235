import numpy as np
import pytest

from semiflow.matrix_core import DomainError, ShapeError, expm, op_norm
from semiflow.operator_space import matrix_units
from semiflow.quantum_maps import (
    PAULI_X,
    PAULI_Z,
    KrausSet,
    LindbladForm,
    NotCompletelyPositiveError,
    Superoperator,
    apply,
    choi,
    dephasing_form,
    gks_form_check,
    identity_superop,
    is_completely_positive,
    is_unital,
    kraus_from_choi,
    lindblad_generator,
    markovian_completion,
    random_hermitian,
    random_kraus,
    random_lindblad_form,
    stinespring_from_kraus,
    superop_from_kraus,
    superop_from_sandwich,
    zero_superop,
)

from conftest import crandn


def brute_choi(s):
    d = s.d
    out = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = 1
            out += np.kron(e, s(e))
    return out


def random_unitary(rng, d):
    q, r = np.linalg.qr(crandn(rng, d, d))
    return q * (np.diag(r) / abs(np.diag(r)))


def transpose_map(d):
    return Superoperator(d, action=lambda a: np.swapaxes(a, -1, -2))


def test_sandwich(rng):
    s = superop_from_sandwich(np.eye(2), np.eye(2))
    np.testing.assert_array_equal(s.matrix, np.eye(4))
    v = random_unitary(rng, 2)
    np.testing.assert_allclose(superop_from_sandwich(v, v.conj().T)(np.eye(2)), np.eye(2), atol=1e-14)
    v, a = crandn(rng, 2, 2), crandn(rng, 2, 2)
    np.testing.assert_allclose(superop_from_sandwich(v, v.conj().T)(a), v @ a @ v.conj().T, atol=1e-13)
    with pytest.raises(ShapeError):
        superop_from_sandwich(np.eye(2), np.eye(3))


def test_apply(rng):
    a, b = crandn(rng, 3, 3), crandn(rng, 3, 3)
    np.testing.assert_array_equal(apply(identity_superop(3), a), a)
    np.testing.assert_array_equal(apply(zero_superop(3), a), 0)
    s = Superoperator(3, crandn(rng, 9, 9))
    np.testing.assert_allclose(apply(s, 2 * a - 1j * b), 2 * apply(s, a) - 1j * apply(s, b), atol=1e-13)
    with pytest.raises(ShapeError):
        apply(s, np.eye(2))


def test_action_and_matrix_agree(rng):
    kraus = random_kraus(3, 2, rng)
    lazy = Superoperator(3, action=lambda a: sum(np.swapaxes(v.conj(), -1, -2) @ a @ v for v in kraus))
    dense = superop_from_kraus(kraus)
    a = crandn(rng, 3, 3)
    np.testing.assert_allclose(lazy(a), dense(a), atol=1e-12)
    np.testing.assert_allclose(lazy.matrix, dense.matrix, atol=1e-12)
    np.testing.assert_allclose(kraus(a), dense(a), atol=1e-12)


def test_choi_examples(rng):
    np.testing.assert_allclose(np.linalg.eigvalsh(choi(identity_superop(2)))[::-1], [2, 0, 0, 0], atol=1e-14)
    np.testing.assert_array_equal(choi(zero_superop(2)), 0)
    v = crandn(rng, 3, 3)
    evals = np.linalg.eigvalsh(choi(superop_from_sandwich(v, v.conj().T)))
    assert evals[-2] <= 1e-10 * evals[-1]


def test_choi_matches_definition(rng):
    s = Superoperator(3, crandn(rng, 9, 9))
    np.testing.assert_allclose(choi(s), brute_choi(s), atol=1e-14)


def test_choi_linearity(rng):
    s1, s2 = Superoperator(2, crandn(rng, 4, 4)), Superoperator(2, crandn(rng, 4, 4))
    alpha, beta = 0.7 + 1j, -2.0
    np.testing.assert_allclose(choi(alpha * s1 + beta * s2), alpha * choi(s1) + beta * choi(s2), atol=1e-12)


def test_kraus_from_choi_identity():
    kraus = kraus_from_choi(choi(identity_superop(2)))
    assert len(kraus) == 1
    v = kraus.ops[0]
    phase = v[0, 0] / abs(v[0, 0])
    np.testing.assert_allclose(v / phase, np.eye(2), atol=1e-10)


def test_kraus_from_choi_unitary_conjugation(rng):
    v = random_unitary(rng, 3)
    kraus = kraus_from_choi(choi(superop_from_sandwich(v, v.conj().T)))
    assert len(kraus) == 1
    # A -> V A V^* = W^* A W with W = V^*
    np.testing.assert_allclose(abs(kraus.ops[0]), abs(v.conj().T), atol=1e-10)
    k = kraus.ops[0]
    idx = np.unravel_index(np.argmax(abs(k)), k.shape)
    phase = k[idx] / v.conj().T[idx]
    np.testing.assert_allclose(k / phase, v.conj().T, atol=1e-10)


def test_kraus_from_choi_dephasing():
    s = Superoperator(2, action=lambda a: 0.5 * (a + PAULI_Z @ a @ PAULI_Z))
    kraus = kraus_from_choi(choi(s))
    assert len(kraus) == 2
    for e in matrix_units(2):
        np.testing.assert_allclose(kraus(e), s(e), atol=1e-10)


def test_kraus_round_trip(rng):
    for d, m in [(2, 1), (2, 3), (3, 4)]:
        s = superop_from_kraus(random_kraus(d, m, rng))
        rebuilt = superop_from_kraus(kraus_from_choi(choi(s)))
        assert op_norm(rebuilt.matrix - s.matrix) <= 1e-9


def test_kraus_from_choi_rejects_non_cp():
    with pytest.raises(NotCompletelyPositiveError) as info:
        kraus_from_choi(choi(transpose_map(2)))
    assert info.value.min_eigenvalue == pytest.approx(-1.0)


def test_is_completely_positive(rng):
    ok, lam = is_completely_positive(identity_superop(2))
    assert ok and lam == pytest.approx(0.0, abs=1e-15)
    ok, lam = is_completely_positive(transpose_map(2))
    assert not ok and lam == pytest.approx(-1.0)
    v = crandn(rng, 3, 3)
    ok, lam = is_completely_positive(superop_from_sandwich(v, v.conj().T))
    assert ok


def test_is_unital(rng):
    ok, res = is_unital(identity_superop(3))
    assert ok and res == 0.0
    shift = np.eye(4, k=-1)  # truncated shift, V V^* != I
    ok, res = is_unital(superop_from_sandwich(shift, shift.T))
    assert not ok and res == pytest.approx(1.0)


def test_lindblad_generator_dephasing():
    assert np.all(lindblad_generator(LindbladForm(KrausSet(()), np.zeros((2, 2)))).matrix == 0)
    lf = LindbladForm(KrausSet((PAULI_Z,)), -0.5 * np.eye(2))
    gen = lindblad_generator(lf)
    np.testing.assert_allclose(gen(PAULI_X), -2 * PAULI_X, atol=1e-15)
    np.testing.assert_allclose(gen(np.eye(2)), 0, atol=1e-15)


def test_lindblad_generator_matches_formula(rng):
    lf = random_lindblad_form(3, 2, rng)
    gen = lindblad_generator(lf)
    for a in matrix_units(3):
        direct = sum(v.conj().T @ a @ v for v in lf.kraus) + lf.g.conj().T @ a + a @ lf.g
        np.testing.assert_allclose(gen(a), direct, atol=1e-12)
        np.testing.assert_allclose(lf(a), direct, atol=1e-12)


def test_markovian_completion(rng):
    lf = markovian_completion(KrausSet((PAULI_Z,)), np.zeros((2, 2)))
    np.testing.assert_allclose(lf.g, -0.5 * np.eye(2))
    np.testing.assert_allclose(lf.generator(np.eye(2)), 0, atol=1e-15)

    h = random_hermitian(2, rng)
    lf = markovian_completion(KrausSet(()), h)
    a = crandn(rng, 2, 2)
    np.testing.assert_allclose(lf.generator(a), 1j * (h @ a - a @ h), atol=1e-13)
    np.testing.assert_allclose(lf.generator(np.eye(2)), 0, atol=1e-15)

    lf = markovian_completion(random_kraus(3, 3, rng), np.zeros((3, 3)))
    assert op_norm(lf.generator(np.eye(3))) <= 1e-12

    with pytest.raises(DomainError):
        markovian_completion(KrausSet(()), np.array([[0, 1], [0, 0]]))


def test_stinespring(rng):
    pair = stinespring_from_kraus(KrausSet((np.eye(2),)))
    np.testing.assert_array_equal(pair.v, np.eye(2))
    a = crandn(rng, 2, 2)
    np.testing.assert_allclose(pair(a), a)

    pair = stinespring_from_kraus(KrausSet((PAULI_X, PAULI_Z)))
    e11 = np.diag([1.0, 0.0])
    np.testing.assert_allclose(pair(e11), PAULI_X @ e11 @ PAULI_X + PAULI_Z @ e11 @ PAULI_Z, atol=1e-15)

    kraus = random_kraus(2, 3, rng)
    pair = stinespring_from_kraus(kraus)
    assert pair.v.shape == (6, 2)
    for e in matrix_units(2):
        np.testing.assert_allclose(pair(e), sum(v.conj().T @ e @ v for v in kraus), atol=1e-12)
        np.testing.assert_array_equal(pair.pi(e), np.kron(np.eye(3), e))

    with pytest.raises(DomainError):
        stinespring_from_kraus(KrausSet(()))


def test_gks_form(rng):
    report = gks_form_check(LindbladForm(KrausSet(()), np.zeros((2, 2))))
    assert report.passed and report.max_residual == 0
    assert gks_form_check(dephasing_form(), tol=1e-12).passed
    report = gks_form_check(random_lindblad_form(3, 2, rng), tol=1e-11)
    assert report.passed, report.summary()


def test_gks_form_detects_wrong_drift(rng):
    lf = random_lindblad_form(2, 1, rng)

    class Broken(LindbladForm):
        @property
        def generator(self):
            return lindblad_generator(LindbladForm(self.kraus, self.g.conj().T))

    report = gks_form_check(Broken(lf.kraus, lf.g))
    assert not report.passed


@pytest.mark.parametrize("seed", range(3))
def test_exponential_of_completed_generator_is_cp_and_unital(seed):
    rng = np.random.default_rng(seed)
    lf = random_lindblad_form(2 + seed % 2, 2, rng)
    m = lf.generator.matrix
    for t in (0.01, 0.1, 1.0, 10.0):
        s = Superoperator(lf.d, expm(t * m))
        ok, lam = is_completely_positive(s, 1e-9)
        assert ok, (t, lam)
        ok, res = is_unital(s, 1e-9)
        assert ok, (t, res)
