import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import logm

from qchan import channels as chs
from qchan.divergences import (SupportPolicy, aux_f, bkm_channel_qubit, bkm_kernel, bkm_metric,
                               bkm_metric_batch, bkm_qubit, check_integral_representation_L1,
                               check_integral_representation_L2, hockey_stick, l1_integral,
                               rel_entropy, rel_entropy_mp, relative_entropy_derivative2,
                               trace_distance, vn_entropy)
from qchan.errors import BadBloch, DimMismatch, DomainError, SupportViolation
from qchan.states import (basis_state, bloch_to_state, pauli_operator, random_full_rank,
                          random_pure, random_state)

SX = pauli_operator([1, 0, 0])

# mpmath (30 digits) oracles for a fixed pair and direction.
RHO = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
SIGMA = np.array([[0.4, 0.1j], [-0.1j, 0.6]])
X = np.array([[0.3, 0.2 + 0.5j], [0.2 - 0.5j, -0.3]])
D_RHO_SIGMA = 0.35779852311470200529  # tr rho (logm rho - logm sigma)
G_SIGMA_X = 1.5673120612201598941  # int_0^inf tr X (sigma+t)^-1 X (sigma+t)^-1 dt


def logm_rel_entropy(rho, sigma):
    return float(np.real(np.trace(rho @ (logm(rho) - logm(sigma)))))


def test_rel_entropy_frozen_value():
    assert rel_entropy(RHO, SIGMA) == pytest.approx(D_RHO_SIGMA, rel=1e-13)
    assert float(rel_entropy_mp(RHO, SIGMA)) == pytest.approx(D_RHO_SIGMA, rel=1e-15)


def test_rel_entropy_examples(rng):
    rho = random_state(rng, 3)
    assert rel_entropy(rho, rho) == pytest.approx(0, abs=1e-12)
    assert rel_entropy(np.diag([1.0, 0]), np.eye(2) / 2) == pytest.approx(np.log(2), abs=1e-15)
    assert rel_entropy(basis_state(0, 2), basis_state(1, 2)) == np.inf


def test_rel_entropy_matches_logm(rng):
    for d in (2, 3, 4):
        for _ in range(5):
            r, s = random_full_rank(rng, d), random_full_rank(rng, d)
            assert rel_entropy(r, s) == pytest.approx(logm_rel_entropy(r, s), rel=1e-9)


def test_rel_entropy_pure_rho_full_rank_sigma(rng):
    r, s = random_pure(rng, 2), random_full_rank(rng, 2)
    lam, u = np.linalg.eigh(s)
    ln_s = (u * np.log(lam)) @ u.conj().T
    assert rel_entropy(r, s) == pytest.approx(-np.trace(r @ ln_s).real, rel=1e-12)


def test_rel_entropy_support_policy():
    s = np.diag([1 - 1e-14, 1e-14])
    r = np.diag([0.5, 0.5])
    assert rel_entropy(r, s) == np.inf
    assert rel_entropy(r, s, SupportPolicy(cutoff=1e-16)) < np.inf
    assert rel_entropy(r, s, SupportPolicy(infinity=1e300)) == 1e300


def test_rel_entropy_shape_mismatch():
    with pytest.raises(DimMismatch):
        rel_entropy(np.eye(2) / 2, np.eye(3) / 3)


def test_vn_entropy():
    assert vn_entropy(basis_state(0, 3)) == 0
    assert vn_entropy(np.eye(2) / 2) == pytest.approx(np.log(2))
    assert vn_entropy(np.diag([0.3, 0.7])) == pytest.approx(0.610864302054893, abs=1e-14)


def test_trace_distance(rng):
    r = random_state(rng, 2)
    assert trace_distance(r, r) == pytest.approx(0, abs=1e-15)
    assert trace_distance(basis_state(0, 2), basis_state(1, 2)) == pytest.approx(2)
    for _ in range(10):
        w1, w2 = (v / np.linalg.norm(v) * rng.random() for v in rng.standard_normal((2, 3)))
        assert trace_distance(bloch_to_state(w1), bloch_to_state(w2)) == pytest.approx(
            np.linalg.norm(w1 - w2), abs=1e-13)


def test_hockey_stick(rng):
    r, s = random_state(rng, 3), random_state(rng, 3)
    assert hockey_stick(r, r, 1.0) == pytest.approx(0, abs=1e-14)
    assert hockey_stick(r, s, 1.0) == pytest.approx(0.5 * trace_distance(r, s), abs=1e-13)
    vals = [hockey_stick(r, s, x) for x in np.linspace(0.2, 8, 50)]
    assert np.all(np.diff(vals) <= 1e-13)


def test_bkm_frozen_value():
    assert bkm_metric(SIGMA, X) == pytest.approx(G_SIGMA_X, rel=1e-12)


def test_bkm_examples():
    assert bkm_metric(np.eye(2) / 2, SX) == pytest.approx(4)
    lam, x = 0.3, 0.7
    got = bkm_metric(np.diag([1 - lam, lam]), np.diag([x, -x]))
    assert got == pytest.approx(x * x * (1 / (1 - lam) + 1 / lam), rel=1e-14)
    assert bkm_metric(SIGMA, np.zeros((2, 2))) == 0


def test_bkm_off_support_is_infinite():
    assert bkm_metric(basis_state(0, 2), SX) == np.inf
    assert bkm_metric(basis_state(0, 2), np.diag([1.0, 0])) == pytest.approx(1.0)


def test_bkm_kernel_near_diagonal():
    a = 0.3
    b = a * (1 + 1e-12)
    assert bkm_kernel(a, b) == pytest.approx(1 / a, rel=1e-11)
    assert bkm_kernel(a, a) == pytest.approx(1 / a)
    assert bkm_kernel(0.2, 0.5) == pytest.approx((np.log(0.2) - np.log(0.5)) / (0.2 - 0.5))
    assert bkm_kernel(0.0, 0.5) == np.inf


def test_bkm_batch_matches_scalar(rng):
    stack = np.array([random_full_rank(rng, 3) for _ in range(6)])
    x = rng.standard_normal((3, 3))
    x = x + x.T
    np.testing.assert_allclose(bkm_metric_batch(stack, x), [bkm_metric(s, x) for s in stack],
                               rtol=1e-12)


def test_aux_f():
    assert aux_f(1.0) == 0
    assert aux_f(0.0) == 1
    assert aux_f(0.5) == pytest.approx(0.75 * np.log(3), rel=1e-14)
    # The series branch and the closed form agree at the switch point.
    x = 1e-4
    assert aux_f(x * 0.999) == pytest.approx((1 - x * x) * np.arctanh(x) / x, rel=1e-10)
    with pytest.raises(DomainError):
        aux_f(1.5)
    with pytest.raises(DomainError):
        aux_f(-0.1)


def test_bkm_qubit_examples():
    assert bkm_qubit([0, 0, 0], [1, 0, 0]) == pytest.approx(4)
    assert bkm_qubit([0.3, 0.1, 0], [0, 0, 0]) == 0
    assert bkm_qubit([0, 0, 1], [1, 0, 0]) == np.inf
    with pytest.raises(BadBloch):
        bkm_qubit([1, 1, 0], [1, 0, 0])


def test_bkm_qubit_matches_spectral(rng):
    for _ in range(100):
        w = rng.standard_normal(3)
        w *= 0.999 * rng.random() / np.linalg.norm(w)
        y = rng.standard_normal(3)
        a = bkm_qubit(w, y)
        b = bkm_metric(bloch_to_state(w), pauli_operator(y))
        assert a == pytest.approx(b, rel=1e-8)


def test_bkm_channel_qubit():
    aff = chs.to_affine(chs.identity(2))
    w, y = np.array([0.2, -0.1, 0.4]), np.array([1.0, 0.5, -0.3])
    assert bkm_channel_qubit(aff, w, y) == pytest.approx(bkm_qubit(w, y))
    aff = chs.to_affine(chs.make_qubit_dephasing(0.5))
    assert bkm_channel_qubit(aff, [0, 0, 0], [1, 0, 0]) == pytest.approx(1.0)
    aff = chs.to_affine(chs.make_amplitude_damping(0.3))
    assert bkm_channel_qubit(aff, [0, 0, 1], [1, 0, 0]) == np.inf


def test_bkm_second_derivative(rng):
    for _ in range(5):
        r, s = random_full_rank(rng, 2), random_full_rank(rng, 2)
        t = 0.5
        g = bkm_metric((1 - t) * s + t * r, r - s)
        assert relative_entropy_derivative2(r, s, t) == pytest.approx(g, rel=1e-5)


def test_integral_L2(rng):
    r = random_state(rng, 2)
    assert check_integral_representation_L2(r, r) == 0
    for _ in range(5):
        r, s = random_full_rank(rng, 2), random_full_rank(rng, 2)
        assert check_integral_representation_L2(r, s, 64) < 1e-6
    assert check_integral_representation_L2(np.diag([0.9, 0.1]), np.diag([0.3, 0.7])) < 1e-8
    assert check_integral_representation_L2(RHO, SIGMA) < 1e-8


def test_integral_L2_singular_sigma():
    with pytest.raises(SupportViolation):
        check_integral_representation_L2(np.eye(2) / 2, basis_state(0, 2))
    # rho inside a singular sigma's support is fine.
    assert check_integral_representation_L2(basis_state(0, 2), basis_state(0, 2)) == 0


def test_integral_L1(rng):
    r = random_full_rank(rng, 2)
    assert check_integral_representation_L1(r, r) == 0
    exact = 0.9 * np.log(1.8) + 0.1 * np.log(0.2)
    value, tail = l1_integral(np.diag([0.9, 0.1]), np.eye(2) / 2)
    assert tail == 0
    assert value == pytest.approx(exact, abs=1e-6)
    for _ in range(5):
        r, s = random_full_rank(rng, 2), random_full_rank(rng, 2)
        assert check_integral_representation_L1(r, s) < 1e-5


def test_integral_L1_s_max_cut(rng):
    r, s = random_full_rank(rng, 2), random_full_rank(rng, 2)
    s_max = np.linalg.eigvalsh(r)[-1] / np.linalg.eigvalsh(s)[0]
    s_max = max(s_max, np.linalg.eigvalsh(s)[-1] / np.linalg.eigvalsh(r)[0])
    assert check_integral_representation_L1(r, s, s_max=s_max) < 1e-5
    full, _ = l1_integral(r, s)
    cut, tail = l1_integral(r, s, s_max=1.2)
    assert tail >= 0
    assert cut >= full - 1e-9


def test_integral_L1_needs_full_rank_sigma():
    with pytest.raises(SupportViolation):
        l1_integral(basis_state(0, 2), basis_state(0, 2))


def test_rel_entropy_mp_needs_full_rank():
    with pytest.raises(SupportViolation):
        rel_entropy_mp(np.eye(2) / 2, basis_state(0, 2))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_data_processing(d, seed):
    r = np.random.default_rng(seed)
    ch = chs.random_channel(r, d, 2, d)
    rho, sigma = random_state(r, d), random_full_rank(r, d)
    assert rel_entropy(chs.apply(ch, rho), chs.apply(ch, sigma)) <= rel_entropy(rho, sigma) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_pinsker(d, seed):
    r = np.random.default_rng(seed)
    rho, sigma = random_state(r, d), random_full_rank(r, d)
    assert rel_entropy(rho, sigma) >= 0.5 * trace_distance(rho, sigma) ** 2 - 1e-12
