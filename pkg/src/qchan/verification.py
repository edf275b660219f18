"""Randomized property suites run by ``qchan verify``."""

import time
from dataclasses import dataclass

import numpy as np

from . import channels as chs
from . import lessnoisy as ln
from .coefficients import ampdamp_trace_contraction
from .divergences import (bkm_channel_qubit, bkm_metric, bkm_qubit,
                          check_integral_representation_L1, check_integral_representation_L2,
                          rel_entropy, relative_entropy_derivative2)
from .estimator import RatioObjective
from .states import (bloch_to_state, pauli_operator, random_full_rank, random_state)

SUITES = ("dpi", "bkm", "sandwich", "integral", "region")


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.suite}/{self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(suite, name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(suite, name, bool(passed), detail, time.perf_counter() - t0)


def _random_ball(rng, radius=0.95):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v) * radius * rng.random() ** (1 / 3)


def suite_dpi(trials, seed):
    rng = np.random.default_rng(seed)

    def dpi():
        worst = -np.inf
        for _ in range(trials):
            d = int(rng.integers(2, 5))
            d_out = int(rng.integers(2, d + 1))
            k_min = -(-d // d_out)
            ch = chs.random_channel(rng, d, d_out, int(rng.integers(k_min, k_min + 3)))
            r, s = random_state(rng, d), random_full_rank(rng, d)
            gap = rel_entropy(chs.apply(ch, r), chs.apply(ch, s)) - rel_entropy(r, s)
            worst = max(worst, gap)
        return worst <= 1e-9, f"max D(N r||N s) - D(r||s) = {worst:.3g} over {trials}"

    return [_timed("dpi", "relative-entropy", dpi)]


def suite_bkm(trials, seed):
    rng = np.random.default_rng(seed)

    def second_derivative():
        worst = 0.0
        for _ in range(trials):
            r, s = random_full_rank(rng, 2), random_full_rank(rng, 2)
            t = 0.1 + 0.8 * rng.random()
            g = bkm_metric((1 - t) * s + t * r, r - s)
            fd = relative_entropy_derivative2(r, s, t, 1e-4)
            worst = max(worst, abs(fd - g) / g)
        return worst <= 1e-4, f"max relative error {worst:.3g}"

    def closed_form():
        worst = 0.0
        for _ in range(trials):
            w, y = _random_ball(rng), rng.standard_normal(3)
            a = bkm_qubit(w, y)
            b = bkm_metric(bloch_to_state(w), pauli_operator(y))
            worst = max(worst, abs(a - b) / b)
        return worst <= 1e-8, f"max relative error {worst:.3g}"

    def channel_dpi():
        worst = -np.inf
        for _ in range(trials):
            ch = chs.random_channel(rng, 2, 2, 2)
            aff = chs.to_affine(ch)
            w, y = _random_ball(rng), rng.standard_normal(3)
            worst = max(worst, bkm_channel_qubit(aff, w, y) - bkm_qubit(w, y))
        return worst <= 1e-9, f"max g_N(s)(N X) - g_s(X) = {worst:.3g}"

    def comparison():
        worst = -np.inf
        for _ in range(trials):
            r, s = random_full_rank(rng, 3), random_full_rank(rng, 3)
            lam, u = np.linalg.eigh(s)
            inv_sqrt = (u / np.sqrt(lam)) @ u.conj().T
            c = np.linalg.eigvalsh(inv_sqrt @ r @ inv_sqrt)[-1]
            x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            x = x + x.conj().T
            worst = max(worst, bkm_metric(s, x) / c - bkm_metric(r, x))
        return worst <= 1e-9, f"max g_s(X)/c - g_r(X) = {worst:.3g}"

    return [_timed("bkm", "second-derivative", second_derivative),
            _timed("bkm", "qubit-closed-form", closed_form),
            _timed("bkm", "metric-dpi", channel_dpi),
            _timed("bkm", "comparison", comparison)]


def sandwich_ratios(gamma, n, seed):
    """Sampled ``D(A rho||A sigma)/D(rho||sigma)`` over purification-drawn pairs."""
    rng = np.random.default_rng(seed)
    obj = RatioObjective(chs.make_amplitude_damping(gamma))
    vals = []
    for _ in range(n):
        r = obj(rng.standard_normal(obj.dim))
        if r is not None:
            vals.append(r)
    return np.array(vals)


def suite_sandwich(trials, seed):
    out = []
    for gamma in (0.2, 0.5, 0.8):
        def check(gamma=gamma):
            eta_tr, _ = ampdamp_trace_contraction(gamma)
            vals = sandwich_ratios(gamma, trials, seed)
            ok = vals.max() <= eta_tr + 1e-6 and vals.max() >= (1 - gamma) - 1e-3
            return ok, f"max ratio {vals.max():.6f} in [{1 - gamma:.4f}, {eta_tr:.6f}]"

        out.append(_timed("sandwich", f"gamma={gamma}", check))
    return out


def suite_integral(trials, seed):
    rng = np.random.default_rng(seed)
    pairs = [(random_full_rank(rng, 2), random_full_rank(rng, 2)) for _ in range(trials)]

    def l2():
        worst = max(check_integral_representation_L2(r, s, 64) for r, s in pairs)
        return worst < 1e-6, f"max residual {worst:.3g}"

    def l1():
        worst = max(check_integral_representation_L1(r, s) for r, s in pairs)
        return worst < 1e-5, f"max residual {worst:.3g}"

    return [_timed("integral", "L2", l2), _timed("integral", "L1", l1)]


def suite_region(trials, seed):
    def example():
        deg, anti = ln.classify_degradability(0.75, 0.2, 0.81)
        pm = ln.p_min(0.2, 0.81)
        ok = not deg and not anti and abs(pm - 0.68066) <= 1e-4 and 0.75 >= pm
        return ok, f"degradable={deg} antidegradable={anti} p_min={pm:.6f}"

    def margin():
        m = ln.holevo_margin_min(0.75, 0.2, 0.81, trials, seed)
        return m >= -1e-9, f"min margin {m:.3g} over {trials} ensembles"

    def degradable_points():
        m = ln.holevo_margin_min(0.5, 0.2, 0.2, trials, seed)
        return m >= -1e-9, f"min margin {m:.3g} at a degradable point"

    def antidegradable_points():
        mx = max(ln.holevo_margin(0.5, 0.8, 0.8, e, False)
                 for e in _ensembles(trials, seed))
        return mx <= 1e-9, f"max margin {mx:.3g} at an anti-degradable point"

    def flag_additivity():
        worst = 0.0
        rng = np.random.default_rng(seed)
        for _ in range(min(trials, 100)):
            p, g1, g2 = rng.random(3)
            ens = ln.random_ensemble(rng)
            a = ln.holevo_margin(p, g1, g2, ens, cross_check=False)
            a1, a2 = chs.make_amplitude_damping(g1), chs.make_amplitude_damping(g2)
            psi = chs.make_flagged_mixture(p, a1, a2)
            direct = ln.holevo_information(psi, ens) - ln.holevo_information(chs.complementary(psi), ens)
            worst = max(worst, abs(a - direct))
        return worst <= 1e-8, f"max |decomposed - direct| = {worst:.3g}"

    return [_timed("region", "example-point", example),
            _timed("region", "holevo-margin", margin),
            _timed("region", "degradable", degradable_points),
            _timed("region", "antidegradable", antidegradable_points),
            _timed("region", "flag-additivity", flag_additivity)]


def _ensembles(n, seed):
    rng = np.random.default_rng(seed)
    return [ln.random_ensemble(rng) for _ in range(n)]


_RUNNERS = {
    "dpi": (suite_dpi, 200),
    "bkm": (suite_bkm, 100),
    "sandwich": (suite_sandwich, 2000),
    "integral": (suite_integral, 50),
    "region": (suite_region, 500),
}


def run_suite(name, trials=None, seed=0):
    names = SUITES if name == "all" else (name,)
    results = []
    for n in names:
        if n not in _RUNNERS:
            raise ValueError(f"unknown suite {n!r}")
        fn, default = _RUNNERS[n]
        results.extend(fn(trials or default, seed))
    return results
