import numpy as np
import pytest

from qchan import channels as chs
from qchan.coefficients import depol_qubit_exact
from qchan.divergences import rel_entropy
from qchan.errors import BadParam, DimMismatch, NotPSD, PurityPreserving
from qchan.estimator import (OptimizerConfig, RatioObjective, estimate_coefficient,
                             initial_point, nogo_chain, nogo_ladder, nogo_witness, objective_ratio,
                             optimize_ratio, split_pair, support_dim)
from qchan.states import (basis_state, purification_to_state, random_unitary,
                          state_to_purification)

FAST = OptimizerConfig(restarts=6, max_iters=600, seed=3)


def test_objective_rejects_equal_pair():
    v = state_to_purification(np.diag([0.9, 0.1]))
    assert objective_ratio(chs.make_depolarizing(2, 0.5), None, v, v) is None


def test_objective_same_channel_is_one(rng):
    ch = chs.make_amplitude_damping(0.4)
    obj = RatioObjective(ch, ch)
    for _ in range(10):
        assert obj(rng.standard_normal(obj.dim)) == pytest.approx(1.0, rel=1e-9)


def test_objective_commuting_pair():
    v1 = state_to_purification(np.diag([0.9, 0.1]))
    v2 = state_to_purification(np.diag([0.5, 0.5]))
    got = objective_ratio(chs.make_depolarizing(2, 0.5), chs.identity(2), v1, v2)
    num = 0.7 * np.log(1.4) + 0.3 * np.log(0.6)
    den = 0.9 * np.log(1.8) + 0.1 * np.log(0.2)
    assert got == pytest.approx(num / den, rel=1e-12)


@pytest.mark.parametrize("make", [
    lambda: (chs.make_amplitude_damping(0.3), chs.make_amplitude_damping(0.7)),
    lambda: (chs.make_depolarizing(2, 0.4), None),
    lambda: (chs.make_qubit_dephasing(0.6), chs.make_amplitude_damping(0.2)),
    lambda: (chs.random_channel(np.random.default_rng(1), 2, 2, 3), None),
])
def test_fast_qubit_path_matches_generic(rng, make):
    ch_n, ch_m = make()
    obj = RatioObjective(ch_n, ch_m)
    m = ch_m or chs.identity(2)
    for _ in range(50):
        v = rng.standard_normal(obj.dim)
        rho, sigma = obj.pair(v)
        num, den = obj.divergences(v)
        assert num == pytest.approx(rel_entropy(chs.apply(ch_n, rho), chs.apply(ch_n, sigma)),
                                    rel=1e-9, abs=1e-13)
        assert den == pytest.approx(rel_entropy(chs.apply(m, rho), chs.apply(m, sigma)),
                                    rel=1e-9, abs=1e-13)


def test_fast_path_pure_sigma():
    obj = RatioObjective(chs.make_qubit_dephasing(0.3))
    r = state_to_purification(np.diag([0.5, 0.5]))
    s = np.zeros(8)
    s[0] = 1.0  # pure |0>
    num, den = obj.divergences(np.concatenate([r, s]))
    assert den == np.inf
    num, den = obj.divergences(np.concatenate([s, s]))
    assert den == 0


def test_objective_qutrit_generic_path(rng):
    obj = RatioObjective(chs.make_depolarizing(3, 0.3))
    v = rng.standard_normal(obj.dim)
    rho, sigma = obj.pair(v)
    expect = rel_entropy(0.7 * rho + 0.1 * np.eye(3), 0.7 * sigma + 0.1 * np.eye(3)) / rel_entropy(
        rho, sigma)
    assert obj(v) == pytest.approx(expect, rel=1e-10)


def test_objective_dimension_checks():
    with pytest.raises(DimMismatch):
        RatioObjective(chs.identity(2), chs.identity(3))
    with pytest.raises(DimMismatch):
        split_pair(np.zeros(7), 2)


def test_initial_point_deterministic():
    a = initial_point(2, 4, seed=11)
    b = initial_point(2, 4, seed=11)
    c = initial_point(2, 5, seed=11)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.linalg.norm(a[:8]) == pytest.approx(1) and np.linalg.norm(a[8:]) == pytest.approx(1)


def test_initial_point_seeded_restart_near_excited_state():
    x = initial_point(2, 9, seed=0, seeded_every=10)
    rho = purification_to_state(x[:8], 2)
    assert rho[1, 1].real > 0.99


def test_config_validation():
    with pytest.raises(BadParam):
        OptimizerConfig(restarts=0)
    with pytest.raises(BadParam):
        OptimizerConfig(mode="median")


def test_optimizer_is_reproducible():
    ch_n, ch_m = chs.make_depolarizing(2, 0.5), chs.make_depolarizing(2, 0.25)
    a = optimize_ratio(ch_n, ch_m, FAST)
    b = optimize_ratio(ch_n, ch_m, FAST)
    assert a.values == b.values
    assert a.best_index == b.best_index
    assert len(a.values) == FAST.restarts
    d = a.as_dict()
    assert d["best_value"] == a.best_value


def test_estimate_depolarizing_pair():
    ch_n, ch_m = chs.make_depolarizing(2, 0.5), chs.make_depolarizing(2, 0.25)
    eta, check = depol_qubit_exact(0.5, 0.25)
    cfg = OptimizerConfig(restarts=10, max_iters=1000, seed=0)
    low = estimate_coefficient(ch_n, ch_m, cfg)
    assert low.value == pytest.approx(check.value, abs=1e-3)
    assert low.lo == 0 and low.hi == low.value
    high = estimate_coefficient(ch_n, ch_m, OptimizerConfig(restarts=10, max_iters=1000,
                                                            mode="max"))
    assert high.value == pytest.approx(eta.value, abs=1e-3)
    assert high.hi == np.inf


def test_estimate_against_identity_is_small():
    est = estimate_coefficient(chs.make_depolarizing(2, 0.5), None,
                               OptimizerConfig(restarts=10, max_iters=1000))
    assert est.value < 1e-2


def test_parallel_matches_serial():
    ch_n, ch_m = chs.make_amplitude_damping(0.6), chs.make_amplitude_damping(0.3)
    cfg = OptimizerConfig(restarts=4, max_iters=300, seed=5)
    serial = optimize_ratio(ch_n, ch_m, cfg)
    par = optimize_ratio(ch_n, ch_m, OptimizerConfig(restarts=4, max_iters=300, seed=5, jobs=2))
    assert serial.values == par.values


def test_support_dim():
    assert support_dim(np.eye(3)) == 3
    assert support_dim(basis_state(0, 3)) == 1
    out = chs.apply(chs.make_depolarizing(3, 0.3), basis_state(0, 3))
    assert support_dim(out) == 3
    with pytest.raises(NotPSD):
        support_dim(np.diag([1.0, -1.0]))


def test_nogo_replacer_ratio_zero():
    ch = chs.replacer(np.diag([0.6, 0.4]))
    for eps in (1e-2, 1e-4):
        # Both outputs equal the fixed state; only rounding in the divergence remains.
        assert nogo_witness(ch, eps).ratio < 1e-14 / eps


def test_nogo_depolarizing_ladder():
    out = nogo_ladder(chs.make_depolarizing(2, 0.5))
    r = out["ratios"]
    assert not out["purity_preserving"]
    assert all(a > b for a, b in zip(r, r[1:]))
    assert r[-1] < 1e-3
    # The numerator is second order in eps and the denominator first order,
    # so the ratio falls linearly: ratio / eps settles to a constant.
    slopes = np.array(r) / np.array(out["eps"])
    assert np.ptp(slopes[1:]) < 1e-2 * slopes[-1]


def test_nogo_witness_structure():
    ch = chs.make_amplitude_damping(0.3)
    w = nogo_witness(ch, 1e-3)
    assert np.trace(w.sigma).real == pytest.approx(1)
    assert w.k0 >= 1
    assert w.ratio == pytest.approx(
        rel_entropy(chs.apply(ch, w.rho), chs.apply(ch, w.sigma)) / rel_entropy(w.rho, w.sigma))


def test_nogo_unitary_is_purity_preserving(rng):
    ch = chs.unitary_channel(random_unitary(rng, 2))
    with pytest.raises(PurityPreserving):
        nogo_chain(ch)
    out = nogo_ladder(ch)
    assert out["purity_preserving"] and out["eta_check"] == 1.0


def test_nogo_bad_arguments():
    with pytest.raises(BadParam):
        nogo_witness(chs.make_depolarizing(2, 0.5), 0.0)
    with pytest.raises(BadParam):
        nogo_witness(chs.make_erasure(0.3, 2), 0.1)
