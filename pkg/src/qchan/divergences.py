"""Relative entropy, entropies, trace and hockey-stick distances, and the BKM metric.

All logarithms are natural.
"""

from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, linalg as sla

from .errors import BadBloch, DimMismatch, DomainError, SupportViolation
from .linalg import hermitian_part

INF = float("inf")


@dataclass(frozen=True)
class SupportPolicy:
    """Eigenvalues below ``cutoff * lambda_max`` count as zero."""

    cutoff: float = 1e-12
    infinity: float = INF

    def __post_init__(self):
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")


DEFAULT_POLICY = SupportPolicy()


def _pair(rho, sigma):
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    return rho, sigma


def _eigh(m):
    return np.linalg.eigh(hermitian_part(m))


def _support_mask(lam, policy):
    top = max(float(np.max(lam)), 0.0) if lam.size else 0.0
    return lam > policy.cutoff * top


def rel_entropy(rho, sigma, policy=DEFAULT_POLICY):
    """Umegaki relative entropy ``tr rho (ln rho - ln sigma)``; ``+inf`` off support."""
    rho, sigma = _pair(rho, sigma)
    p, a = _eigh(rho)
    q, b = _eigh(sigma)
    inside = _support_mask(q, policy)
    overlap = np.abs(a.conj().T @ b) ** 2  # overlap[i, j] = |<a_i|b_j>|^2
    p = np.clip(p, 0.0, None)
    outside_weight = float(p @ overlap[:, ~inside].sum(axis=1))
    if outside_weight > policy.cutoff:
        return policy.infinity
    pos = p > 0
    first = float(np.sum(p[pos] * np.log(p[pos])))
    lnq = np.log(q[inside])
    second = float(p @ (overlap[:, inside] @ lnq))
    return max(first - second, 0.0)


def vn_entropy(rho):
    lam = np.clip(_eigh(np.asarray(rho, dtype=complex))[0], 0.0, None)
    lam = lam[lam > 0]
    return max(float(-np.sum(lam * np.log(lam))), 0.0)


def trace_distance(rho, sigma):
    """``tr|rho - sigma|`` (no factor 1/2)."""
    rho, sigma = _pair(rho, sigma)
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(rho - sigma)))))


def hockey_stick(rho, sigma, s):
    """``E_s(rho||sigma) = tr (rho - s sigma)_+``."""
    rho, sigma = _pair(rho, sigma)
    lam = np.linalg.eigvalsh(hermitian_part(rho - s * sigma))
    return float(np.sum(lam[lam > 0]))


# ------------------------------------------------------------------ BKM


def bkm_kernel(a, b):
    """``(ln a - ln b) / (a - b)``, with value ``1/a`` on the diagonal.

    Evaluated as ``log1p(x) / (x * lo)`` with ``x = (hi - lo) / lo`` so that
    nearly equal arguments do not cancel.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (hi - lo) / lo
        ratio = np.where(x > 0, np.log1p(x) / np.where(x > 0, x, 1.0), 1.0)
        out = ratio / lo
    return np.where(lo > 0, out, INF)


def bkm_metric(sigma, X, policy=DEFAULT_POLICY):
    """BKM quadratic form ``g_sigma(X) = sum_ij |<u_i|X|u_j>|^2 k(l_i, l_j)``."""
    sigma, X = _pair(sigma, X)
    lam, u = _eigh(sigma)
    xt = u.conj().T @ X @ u
    w = np.abs(xt) ** 2
    inside = _support_mask(lam, policy)
    both = np.outer(inside, inside)
    scale = max(1.0, float(np.sum(w)))
    if float(np.sum(w[~both])) > (policy.cutoff**2) * scale:
        return policy.infinity
    li = lam[inside]
    k = bkm_kernel(li[:, None], li[None, :])
    return float(np.sum(w[np.ix_(inside, inside)] * k))


def bkm_metric_batch(sigmas, X):
    """Vectorized :func:`bkm_metric` for a stack of full-rank states and one ``X``."""
    lam, u = np.linalg.eigh(sigmas)
    xt = np.conj(np.swapaxes(u, -1, -2)) @ X @ u
    k = bkm_kernel(lam[..., :, None], lam[..., None, :])
    return np.sum(np.abs(xt) ** 2 * k, axis=(-2, -1))


def aux_f(x):
    """``f(x) = (1-x^2)/(2x) ln((1+x)/(1-x))`` with ``f(0) = 1`` and ``f(1) = 0``."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"aux_f needs x in [0, 1], got {x}")
    if x == 1.0:
        return 0.0
    if x < 1e-4:
        # atanh(x)/x = 1 + x^2/3 + x^4/5 + ...
        return (1 - x * x) * (1 + x * x / 3 + x**4 / 5)
    return (1 - x * x) * np.arctanh(x) / x


def _bloch_norm(w):
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise DimMismatch("Bloch vectors have three components")
    r = float(np.linalg.norm(w))
    if r > 1 + 1e-9:
        raise BadBloch(f"|w| = {r} exceeds 1")
    return w, min(r, 1.0)


def bkm_qubit(w, y):
    """Closed-form BKM metric at ``(I + w.sigma)/2`` for ``X = y.sigma``.

    Uses ``4/(1-|w|^2) * ((w.y)^2/|w|^2 (1-f(|w|)) + |y|^2 f(|w|))`` which
    has no 0/0 at ``w = 0``.
    """
    w, r = _bloch_norm(w)
    y = np.asarray(y, dtype=float)
    yy = float(y @ y)
    if yy == 0.0:
        return 0.0
    if r >= 1.0:
        return INF
    f = aux_f(r)
    along = float(w @ y) ** 2 / (r * r) if r > 0 else 0.0
    return 4.0 / (1 - r * r) * (along * (1 - f) + yy * f)


def bkm_channel_qubit(aff, w, y):
    """``g_{N(rho)}(N(X))`` through the affine form: ``w -> T w + t``, ``y -> T y``."""
    w, _ = _bloch_norm(w)
    wn = aff.T @ w + aff.t
    nrm = np.linalg.norm(wn)
    if nrm > 1.0:
        wn = wn / nrm
    return bkm_qubit(wn, aff.T @ np.asarray(y, dtype=float))


# ------------------------------------------------- integral representations


def check_integral_representation_L2(rho, sigma, n_grid=64, policy=DEFAULT_POLICY):
    """``|int_0^1 int_0^s g_{rho_t}(rho - sigma) dt ds - D(rho||sigma)|``.

    ``rho_t = (1-t) sigma + t rho``. The inner variable is rescaled to
    ``t = s u`` and both axes use an ``n_grid``-node Gauss-Legendre rule.
    """
    rho, sigma = _pair(rho, sigma)
    d = rel_entropy(rho, sigma, policy)
    if not np.isfinite(d):
        raise SupportViolation("rho is not supported inside supp(sigma)")
    X = rho - sigma
    if np.max(np.abs(X)) == 0:
        return 0.0
    # Restrict to supp(sigma) so that every rho_t with t < 1 is invertible there.
    lam, u = _eigh(sigma)
    keep = _support_mask(lam, policy)
    basis = u[:, keep]
    rho_r = basis.conj().T @ rho @ basis
    sigma_r = basis.conj().T @ sigma @ basis
    x_r = rho_r - sigma_r
    nodes, weights = np.polynomial.legendre.leggauss(n_grid)
    z = 0.5 * (nodes + 1)
    wz = 0.5 * weights
    t = np.outer(z, z).ravel()  # s * u
    jac = np.outer(wz * z, wz).ravel()  # ds du * s
    stack = (1 - t)[:, None, None] * sigma_r + t[:, None, None] * rho_r
    vals = bkm_metric_batch(hermitian_part(stack), x_r)
    return abs(float(np.sum(jac * vals)) - d)


def _gen_eigs(a, b):
    """Generalized eigenvalues of the pencil ``(a, b)`` for positive definite ``b``."""
    return sla.eigh(hermitian_part(a), hermitian_part(b), eigvals_only=True)


def l1_integral(rho, sigma, s_max=None, policy=DEFAULT_POLICY):
    """``int_1^{s_max} (E_s(rho||sigma)/s + E_s(sigma||rho)/s^2) ds`` plus a tail term.

    With ``s_max=None`` the range extends to where both integrands vanish.
    Otherwise the remainder past ``s_max`` is replaced by the integral of
    the chord from ``(s_max, E)`` to the vanishing point, which bounds the
    convex hockey-stick curve from above.

    Returns ``(value, tail)``.
    """
    rho, sigma = _pair(rho, sigma)
    lam_s = np.linalg.eigvalsh(hermitian_part(sigma))
    lam_r = np.linalg.eigvalsh(hermitian_part(rho))
    if lam_s[0] <= policy.cutoff * lam_s[-1]:
        raise SupportViolation("sigma must be full rank for the L1 representation")
    fwd = _gen_eigs(rho, sigma)
    s1 = max(float(fwd[-1]), 1.0)
    if lam_r[0] > policy.cutoff * lam_r[-1]:
        bwd = _gen_eigs(sigma, rho)
        s2 = max(float(bwd[-1]), 1.0)
    else:
        bwd = np.array([])
        s2 = INF

    def integrand(s):
        return hockey_stick(rho, sigma, s) / s + hockey_stick(sigma, rho, s) / s**2

    top = max(s1, s2) if s_max is None else float(s_max)
    if top < 1:
        raise ValueError("s_max must be at least 1")
    bps = sorted({float(v) for v in np.concatenate([fwd, bwd]) if 1 < v < top})
    edges = [1.0] + bps + [top]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if np.isinf(hi):
            val, _ = integrate.quad(integrand, lo, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
        elif hi > lo:
            val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        else:
            val = 0.0
        total += val
    tail = 0.0
    if s_max is not None:
        e1 = hockey_stick(rho, sigma, top)
        if s1 > top and e1 > 0:
            tail += e1 / (s1 - top) * (s1 * np.log(s1 / top) - (s1 - top))
        e2 = hockey_stick(sigma, rho, top)
        if s2 > top and e2 > 0:
            if np.isinf(s2):
                tail += e2 / top
            else:
                tail += e2 / (s2 - top) * (s2 / top - 1 - np.log(s2 / top))
    return total + tail, tail


def check_integral_representation_L1(rho, sigma, s_max=None, n_grid=None, policy=DEFAULT_POLICY):
    """``|L1 integral - D(rho||sigma)|``; ``n_grid`` is accepted for interface symmetry.

    The adaptive rule chooses its own nodes, so ``n_grid`` only caps the
    number of subintervals when given.
    """
    rho, sigma = _pair(rho, sigma)
    d = rel_entropy(rho, sigma, policy)
    if not np.isfinite(d):
        raise SupportViolation("rho is not supported inside supp(sigma)")
    if np.max(np.abs(rho - sigma)) == 0:
        return 0.0
    value, _ = l1_integral(rho, sigma, s_max, policy)
    return abs(value - d)


def rel_entropy_mp(rho, sigma, dps=40):
    """Full-rank relative entropy in ``dps``-digit arithmetic (for finite-difference oracles)."""
    rho, sigma = _pair(rho, sigma)
    with mpmath.workdps(dps):
        def to_mp(m):
            return mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in m])

        p, a = mpmath.eighe(to_mp(rho))
        q, b = mpmath.eighe(to_mp(sigma))
        n = len(p)
        if min(q) <= 0:
            raise SupportViolation("rel_entropy_mp needs a full-rank sigma")
        ov = a.H * b
        out = mpmath.mpf(0)
        for i in range(n):
            pi = mpmath.re(p[i])
            if pi <= 0:
                continue
            out += pi * mpmath.log(pi)
            for j in range(n):
                out -= pi * abs(ov[i, j]) ** 2 * mpmath.log(mpmath.re(q[j]))
        return out


def relative_entropy_derivative2(rho, sigma, t, h=1e-4, dps=40):
    """Central second difference of ``t -> D(rho_t||sigma)`` with ``rho_t = (1-t) sigma + t rho``.

    Values are computed with ``dps`` digits so the ``1/h^2`` amplification
    does not swamp the result in rounding noise.
    """
    rho, sigma = _pair(rho, sigma)

    def f(tt):
        return rel_entropy_mp((1 - tt) * sigma + tt * rho, sigma, dps)

    with mpmath.workdps(dps):
        return float((f(t + h) - 2 * f(t) + f(t - h)) / mpmath.mpf(h) ** 2)
