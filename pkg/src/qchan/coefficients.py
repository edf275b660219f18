"""Closed forms, bounds and bound combinators for contraction/expansion coefficients."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from . import channels as chs
from .divergences import aux_f, bkm_kernel, rel_entropy
from .errors import AssumptionFailed, BadParam, NotStrictlyPositive
from .linalg import is_psd
from .states import random_pure

EXACT = "exact-closed-form"
BOUND = "bound-pair"
CONJECTURED = "conjectured-closed-form"
NUMERICAL = "numerical"
KINDS = (EXACT, BOUND, CONJECTURED, NUMERICAL)


@dataclass(frozen=True)
class CoefficientEstimate:
    """A coefficient value, or interval ``[lo, hi]``, with its provenance.

    ``value`` is the point estimate (for a bound pair, the side that was
    requested or ``None``). ``meta`` carries optimizer records.
    """

    lo: float
    hi: float
    kind: str
    source: str
    value: Optional[float] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if not self.lo <= self.hi:
            raise ValueError(f"interval is reversed: [{self.lo}, {self.hi}]")
        if self.lo < 0:
            raise ValueError("coefficients are nonnegative")

    @classmethod
    def point(cls, value, kind, source, **meta):
        return cls(value, value, kind, source, value, dict(meta))

    def contains(self, x, tol=0.0):
        return self.lo - tol <= x <= self.hi + tol

    def as_dict(self):
        out = {"lo": self.lo, "hi": self.hi, "kind": self.kind, "source": self.source}
        if self.value is not None:
            out["value"] = self.value
        if self.meta:
            out["meta"] = dict(self.meta)
        return out


def _unit(name, x, lo_open=True, hi_open=True):
    x = float(x)
    ok = (0 < x if lo_open else 0 <= x) and (x < 1 if hi_open else x <= 1)
    if not ok:
        raise BadParam(f"{name} = {x} is outside its allowed range")
    return x


# ------------------------------------------------------------ depolarizing


def depol_relative_bounds(d, p1, p2):
    """Interval for ``eta`` of ``(D_{p1}, D_{p2})`` in dimension ``d``.

    ``p2 = 0`` recovers the single-channel bound; ``p1 = p2`` gives ``[1, 1]``.
    """
    if d < 2:
        raise BadParam("d must be at least 2")
    p1 = _unit("p1", p1)
    p2 = _unit("p2", p2, lo_open=False)
    if p2 > p1:
        raise BadParam("expected p2 <= p1")
    r2 = ((1 - p1) / (1 - p2)) ** 2
    a = (d - 1) / d
    lo = r2 * p2 / p1
    hi = r2 * (1 - a * p2) / (1 - a * p1)
    return CoefficientEstimate(lo, hi, BOUND, "depolarizing pair bounds")


def depol_qubit_exact(p1, p2):
    """Exact ``(eta, eta_check)`` for two qubit depolarizing channels, ``p2 <= p1``."""
    p1 = _unit("p1", p1)
    p2 = _unit("p2", p2, lo_open=False)
    if p2 > p1:
        raise BadParam("expected p2 <= p1")
    r2 = ((1 - p1) / (1 - p2)) ** 2
    eta = CoefficientEstimate.point(r2, EXACT, "qubit depolarizing contraction")
    expan = r2 * p2 * (2 - p2) / (p1 * (2 - p1))
    check = CoefficientEstimate.point(expan, EXACT, "qubit depolarizing expansion")
    return eta, check


# ---------------------------------------------------- strictly positive


@dataclass(frozen=True)
class StrictBounds:
    lo: float
    hi: float
    divergence: float
    lam_min: float
    lam_max: float

    @property
    def contains(self):
        tol = 1e-12 * max(1.0, self.hi)
        return self.lo - tol <= self.divergence <= self.hi + tol


def output_eigen_range(ch, states):
    lo, hi = np.inf, -np.inf
    for s in states:
        lam = np.linalg.eigvalsh(chs.apply(ch, s))
        lo, hi = min(lo, lam[0]), max(hi, lam[-1])
    return float(lo), float(hi)


def strictly_positive_bounds(ch, rho, sigma, n_probe=64, seed=0, floor=1e-12):
    """Interval for ``D(M(rho)||M(sigma))`` from output eigenvalue extremes.

    ``lam_min``/``lam_max`` are taken over the two arguments and a probe set
    of pure inputs. Along the segment ``rho_t`` the smallest output
    eigenvalue is concave and the largest convex, so the endpoints alone
    already bound them; the probes only widen the interval.

    The interval is ``||M(rho - sigma)||_2^2 / (2 lam)`` for ``lam`` in
    ``{lam_max, lam_min}``.
    """
    rng = np.random.default_rng(seed)
    d = ch.dim_in
    probes = [np.asarray(rho), np.asarray(sigma)]
    probes += [np.diag(np.eye(d)[i]).astype(complex) for i in range(d)]
    probes += [random_pure(rng, d) for _ in range(n_probe)]
    lam_min, lam_max = output_eigen_range(ch, probes)
    if lam_min <= floor:
        raise NotStrictlyPositive(f"output eigenvalue {lam_min:.3g} on the probe set")
    x = ch.apply_operator(np.asarray(rho) - np.asarray(sigma))
    hs = float(np.real(np.vdot(x, x)))
    div = rel_entropy(chs.apply(ch, rho), chs.apply(ch, sigma))
    return StrictBounds(hs / (2 * lam_max), hs / (2 * lam_min), div, lam_min, lam_max)


# ------------------------------------------------------------- dephasing


def dephasing_hat(gamma, gamma_p, eps):
    g = np.asarray(gamma, dtype=float)
    gp = np.asarray(gamma_p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        hat = np.where(gp != 0, (gp - (1 - eps) * g) / (eps * np.where(gp != 0, gp, 1.0)), 0.0)
    return hat


def dephasing_cp_expansion_bound(gamma, gamma_p, eps, tol=1e-10):
    """Lower bound on ``eta_check(Phi_{gamma_p}, Phi_gamma)``.

    Raises :class:`AssumptionFailed` naming each hypothesis that does not hold.
    """
    failures = []
    eps = float(eps)
    if not 0 < eps < 0.5:
        failures.append(f"eps = {eps} is not in (0, 1/2)")
    try:
        g = chs.check_dephasing_matrix(gamma)
        gp = chs.check_dephasing_matrix(gamma_p)
    except Exception as exc:
        raise AssumptionFailed([f"invalid dephasing matrix: {exc}"]) from exc
    if g.shape != gp.shape:
        raise AssumptionFailed(["dephasing matrices differ in size"])
    if not is_psd(gp - (1 - eps) * g, tol):
        failures.append("(1-eps) Gamma <= Gamma' fails")
    if not is_psd((1 + eps) * g - gp, tol):
        failures.append("Gamma' <= (1+eps) Gamma fails")
    if eps > 0 and not is_psd(dephasing_hat(g, gp, eps), tol):
        failures.append("Gamma-hat is not positive semidefinite")
    if failures:
        raise AssumptionFailed(failures)
    bound = (1 - 2 * eps) * (1 - eps) / ((1 + 2 * eps) * (1 + eps))
    return CoefficientEstimate(bound, np.inf, BOUND, "dephasing CP-order expansion bound",
                               value=bound, meta={"eps": eps})


def lemma_comparison_dephasing_bound(eps, c):
    """Metric-comparison factor ``(1-2 eps)(1-eps) / (1 + c eps (1-eps))``."""
    eps = float(eps)
    if not 0 <= eps <= 1 or c <= 0:
        raise BadParam("need eps in [0, 1] and c > 0")
    return (1 - 2 * eps) * (1 - eps) / (1 + c * eps * (1 - eps))


# ------------------------------------------------------- qubit general


def qubit_general_bounds(c1, c2, c3, c4, c5, c6):
    """``(c3 / (c2^2 c6), c4 / (c1^2 c5))``: upper bound on eta, lower bound on eta_check.

    Constants are ordered ``c1 >= c2 > 0`` and likewise for the other pairs.
    """
    cs = (c1, c2, c3, c4, c5, c6)
    if any(not c > 0 or not np.isfinite(c) for c in cs):
        raise BadParam("constants must be positive and finite")
    if c1 < c2 or c3 < c4 or c5 < c6:
        raise BadParam("each pair must satisfy upper >= lower")
    return c3 / (c2**2 * c6), c4 / (c1**2 * c5)


def fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = np.pi * (1 + 5**0.5) * i
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], -1)


def _f_tilde(wn, yn):
    """``cos^2 + sin^2 f(|w|)`` for rows of ``wn`` against rows of ``yn``."""
    r = np.linalg.norm(wn, axis=-1)
    ny = np.linalg.norm(yn, axis=-1)
    f = np.array([aux_f(min(x, 1.0)) for x in r.ravel()]).reshape(r.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos2 = np.where((r > 0) & (ny > 0), np.sum(wn * yn, -1) ** 2 / (r * r * ny * ny), 0.0)
    return cos2 + (1 - cos2) * f


def estimate_qubit_condition_constants(aff_n, aff_m, grid=10, floor=1e-12):
    """Empirical constants for the three qubit comparison conditions.

    Returns ``(c1, ..., c6)`` with ``c1``/``c2`` the max/min of
    ``|T_M y| / |T_N y|``, ``c3``/``c4`` of ``(1-|w_M|^2)/(1-|w_N|^2)`` and
    ``c5``/``c6`` of ``f~_M / f~_N``. Points where a denominator falls below
    ``floor`` are skipped.
    """
    ys = fibonacci_sphere(grid * grid)
    ty_n = ys @ aff_n.T.T
    ty_m = ys @ aff_m.T.T
    num, den = np.linalg.norm(ty_m, axis=1), np.linalg.norm(ty_n, axis=1)
    ok = den > floor
    r1 = num[ok] / den[ok]

    radii = np.linspace(0, 1, grid)
    ws = (radii[:, None, None] * fibonacci_sphere(grid * grid)[None]).reshape(-1, 3)
    wn = ws @ aff_n.T.T + aff_n.t
    wm = ws @ aff_m.T.T + aff_m.t
    a = 1 - np.sum(wn * wn, 1)
    b = 1 - np.sum(wm * wm, 1)
    ok = (a > floor) & (b > floor)
    r2 = b[ok] / a[ok]

    wn_k, wm_k = wn[ok], wm[ok]
    ft_n = _f_tilde(wn_k[:, None, :], ty_n[None, :, :])
    ft_m = _f_tilde(wm_k[:, None, :], ty_m[None, :, :])
    good = (ft_n > floor) & (ft_m > floor)
    r3 = ft_m[good] / ft_n[good]
    return (float(r1.max()), float(r1.min()), float(r2.max()), float(r2.min()),
            float(r3.max()), float(r3.min()))


# ---------------------------------------------------- amplitude damping


def ampdamp_trace_contraction(gamma):
    """``sqrt(1-gamma)`` and the interval ``[1-gamma, sqrt(1-gamma)]`` for ``eta``."""
    gamma = _unit("gamma", gamma, lo_open=False, hi_open=False)
    eta_tr = float(np.sqrt(1 - gamma))
    return eta_tr, CoefficientEstimate(1 - gamma, eta_tr, BOUND, "amplitude damping sandwich")


def ampdamp_expansion_conjecture(g1, g2):
    """Conjectured ``eta_check(A_{g1}, A_{g2}) = g2 (1-g1) / (g1 (1-g2))``."""
    g1 = _unit("gamma1", g1)
    g2 = _unit("gamma2", g2)
    v = g2 * (1 - g1) / (g1 * (1 - g2))
    return CoefficientEstimate.point(v, CONJECTURED, "amplitude damping expansion conjecture")


def _log_odds_slope(x):
    """``(ln(1-x) - ln x) / (1 - 2x)``, continuous at ``x = 1/2`` with value 2."""
    return bkm_kernel(1 - x, x)


def ampdamp_contraction_ratio(p, g1, g2):
    a1, a2 = 1 - g1, 1 - g2
    return a1 / a2 * _log_odds_slope(a1 * p) / _log_odds_slope(a2 * p)


def ampdamp_contraction_conjecture(g1, g2, n_grid=10_000):
    """Conjectured ``eta(A_{g1}, A_{g2})``: a maximum over ``p in (0, 1]``.

    The removable singularity at ``(1-g_i) p = 1/2`` is evaluated by its
    continuous extension; the best grid point is then polished with a
    bounded scalar search.
    """
    g1 = _unit("gamma1", g1)
    g2 = _unit("gamma2", g2)
    ps = np.linspace(0, 1, n_grid + 1)[1:]
    vals = ampdamp_contraction_ratio(ps, g1, g2)
    k = int(np.argmax(vals))
    best_p, best = float(ps[k]), float(vals[k])
    lo = ps[max(k - 1, 0)]
    hi = ps[min(k + 1, len(ps) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda p: -ampdamp_contraction_ratio(p, g1, g2),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
        if -res.fun > best:
            best_p, best = float(res.x), float(-res.fun)
    return CoefficientEstimate.point(best, CONJECTURED, "amplitude damping contraction conjecture",
                                     argmax_p=best_p, n_grid=n_grid)


def sandwich_check(eta_tr):
    """Admissible interval ``[eta_tr^2, eta_tr]`` for the entropy contraction."""
    eta_tr = float(eta_tr)
    if not 0 <= eta_tr <= 1:
        raise BadParam("trace contraction must lie in [0, 1]")
    return eta_tr**2, eta_tr
