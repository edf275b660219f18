"""Multi-start numerical estimation of contraction/expansion coefficients and the no-go witness."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import channels as chs
from .coefficients import NUMERICAL, CoefficientEstimate
from .divergences import DEFAULT_POLICY, rel_entropy
from .errors import BadParam, DimMismatch, NotPSD, PurityPreserving
from .linalg import hermitian_part, is_psd
from .states import projector

PENALTY = 1e6


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 50
    max_iters: int = 2000
    seed: int = 0
    simplex_tol: float = 1e-10
    ratio_guard: float = 1e-10
    mode: str = "min"
    seeded_every: int = 10
    jobs: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise BadParam("restarts must be at least 1")
        if self.mode not in ("min", "max"):
            raise BadParam("mode must be 'min' or 'max'")


@dataclass
class OptimizerRun:
    best_value: float
    best_pair: tuple
    values: list
    converged: list
    best_index: int
    n_evals: list = field(default_factory=list)

    def as_dict(self):
        return {
            "best_value": self.best_value,
            "best_index": self.best_index,
            "values": self.values,
            "converged": self.converged,
            "n_evals": self.n_evals,
        }


# ----------------------------------------------------------- objective


def _psi(v, d):
    n = d * d
    return (v[:n] + 1j * v[n:2 * n]).reshape(d, d)


def split_pair(v, d):
    """Split the concatenated optimizer vector into two purification vectors."""
    v = np.asarray(v, dtype=float)
    m = 2 * d * d
    if v.shape != (2 * m,):
        raise DimMismatch(f"expected a vector of length {2 * m}")
    return v[:m], v[m:]


def _state(v, d):
    psi = _psi(v, d)
    nrm = np.vdot(psi, psi).real
    if not nrm > 0:
        return None
    return psi @ psi.conj().T / nrm


def _neg_entropy2(lp, lm):
    out = 0.0
    if lp > 0:
        out += lp * math.log(lp)
    if lm > 0:
        out += lm * math.log(lm)
    return out


def _bloch_from_purification(x, off):
    """Bloch vector and purity gap ``1 - |w|^2`` from 8 floats starting at ``off``.

    The gap comes from ``4 |det psi|^2 / n^2`` so it stays accurate near pure states.
    """
    ar, br, cr, er, ai, bi, ci, ei = x[off:off + 8]
    top = ar * ar + ai * ai + br * br + bi * bi
    bot = cr * cr + ci * ci + er * er + ei * ei
    n = top + bot
    if not n > 0:
        return None
    re01 = (ar * cr + ai * ci + br * er + bi * ei) / n
    im01 = (ai * cr - ar * ci + bi * er - br * ei) / n
    det_r = (ar * er - ai * ei) - (br * cr - bi * ci)
    det_i = (ar * ei + ai * er) - (br * ci + bi * cr)
    gap = 4 * (det_r * det_r + det_i * det_i) / (n * n)
    return (2 * re01, -2 * im01, (top - bot) / n), gap


class _QubitEvaluator:
    """Relative entropies of qubit outputs computed from Bloch vectors."""

    def __init__(self, aff, cutoff):
        self.T = [list(map(float, row)) for row in aff.T]
        self.t = list(map(float, aff.t))
        self.identity = bool(np.array_equal(aff.T, np.eye(3)) and not np.any(aff.t))
        self.cutoff = cutoff

    def out(self, w, gap):
        if self.identity:
            return w, gap
        T, t = self.T, self.t
        o = tuple(T[i][0] * w[0] + T[i][1] * w[1] + T[i][2] * w[2] + t[i] for i in range(3))
        return o, 1.0 - (o[0] * o[0] + o[1] * o[1] + o[2] * o[2])

    def rel(self, u, gap_u, w, gap_w):
        """``D(rho_u || rho_w)`` for Bloch vectors with purity gaps ``1 - |.|^2``."""
        ss = 1.0 - gap_w
        s = math.sqrt(max(ss, 0.0))
        qm = gap_w / (2 * (1 + s))
        qp = (1 + s) / 2
        if qm <= self.cutoff * qp:
            # sigma is pure: finite only when rho sits on the same ray, where D = 0.
            uw = u[0] * w[0] + u[1] * w[1] + u[2] * w[2]
            outside = 0.5 * (1 - uw / s) if s > 0 else 0.5
            return math.inf if outside > self.cutoff else 0.0
        r = math.sqrt(max(1.0 - gap_u, 0.0))
        lp = (1 + min(r, 1.0)) / 2
        lm = max(gap_u, 0.0) / (2 * (1 + r))
        uw = u[0] * w[0] + u[1] * w[1] + u[2] * w[2]
        slope = 1.0 + ss / 3 if s < 1e-4 else math.atanh(s) / s
        cross = 0.5 * math.log(qp * qm) + uw * slope
        return max(_neg_entropy2(lp, lm) - cross, 0.0)


class RatioObjective:
    """``F(rho, sigma) = D(N(rho)||N(sigma)) / D(M(rho)||M(sigma))``.

    ``M = None`` stands for the identity channel. Evaluation returns
    ``None`` for rejected points: a denominator below ``ratio_guard`` or an
    infinite divergence.
    """

    def __init__(self, ch_n, ch_m=None, ratio_guard=1e-10, policy=DEFAULT_POLICY):
        if ch_m is None:
            ch_m = chs.identity(ch_n.dim_in)
        if ch_n.dim_in != ch_m.dim_in:
            raise DimMismatch("channels must share the input dimension")
        self.ch_n = ch_n
        self.ch_m = ch_m
        self.d = ch_n.dim_in
        self.guard = ratio_guard
        self.policy = policy
        self._fast = None
        qubit = all(c.dim_in == 2 and c.dim_out == 2 for c in (ch_n, ch_m))
        if qubit:
            self._fast = (_QubitEvaluator(chs.to_affine(ch_n), policy.cutoff),
                          _QubitEvaluator(chs.to_affine(ch_m), policy.cutoff))

    @property
    def dim(self):
        return 4 * self.d * self.d

    def pair(self, v):
        v1, v2 = split_pair(v, self.d)
        return _state(v1, self.d), _state(v2, self.d)

    def divergences(self, v):
        v1, v2 = split_pair(v, self.d)
        if self._fast is not None:
            # 8 floats per purification: real parts then imaginary parts.
            en, em = self._fast
            x = np.asarray(v, dtype=float).tolist()
            b1 = _bloch_from_purification(x, 0)
            b2 = _bloch_from_purification(x, 8)
            if b1 is None or b2 is None:
                return None
            num = en.rel(*en.out(*b1), *en.out(*b2))
            den = em.rel(*em.out(*b1), *em.out(*b2))
            return num, den
        rho, sigma = _state(v1, self.d), _state(v2, self.d)
        if rho is None or sigma is None:
            return None
        num = rel_entropy(chs.apply(self.ch_n, rho), chs.apply(self.ch_n, sigma), self.policy)
        den = rel_entropy(chs.apply(self.ch_m, rho), chs.apply(self.ch_m, sigma), self.policy)
        return num, den

    def __call__(self, v):
        nd = self.divergences(v)
        if nd is None:
            return None
        num, den = nd
        if not (math.isfinite(num) and math.isfinite(den)) or den < self.guard:
            return None
        return num / den


def objective_ratio(ch_n, ch_m, v1, v2, policy=DEFAULT_POLICY, ratio_guard=1e-10):
    """Ratio for two purification vectors, or ``None`` if the point is rejected."""
    obj = RatioObjective(ch_n, ch_m, ratio_guard, policy)
    return obj(np.concatenate([np.asarray(v1, float), np.asarray(v2, float)]))


# ------------------------------------------------------------- restarts


def _pure_purification(psi_vec, d):
    """Purification vector for the pure state ``psi_vec`` (ancilla in ``|0>``)."""
    m = np.zeros((d, d), dtype=complex)
    m[:, 0] = psi_vec
    flat = m.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def initial_point(d, index, seed, seeded_every=10):
    """Starting vector for restart ``index``; own RNG stream from ``(seed, index)``.

    Every ``seeded_every``-th restart starts near a pure pair: alternately
    both near ``|d-1>`` and both near one random pure state.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    dim = 4 * d * d
    if seeded_every and index % seeded_every == seeded_every - 1:
        if (index // seeded_every) % 2 == 0:
            base = np.zeros(d, dtype=complex)
            base[-1] = 1.0
        else:
            z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            base = z / np.linalg.norm(z)
        v = _pure_purification(base, d)
        x = np.concatenate([v, v]) + 1e-2 * rng.standard_normal(dim)
    else:
        x = rng.standard_normal(dim)
    half = dim // 2
    x[:half] /= np.linalg.norm(x[:half])
    x[half:] /= np.linalg.norm(x[half:])
    return x


def _run_restart(args):
    obj, cfg, index = args
    sign = 1.0 if cfg.mode == "min" else -1.0

    def f(x):
        r = obj(x)
        return PENALTY if r is None else sign * r

    x0 = initial_point(obj.d, index, cfg.seed, cfg.seeded_every)
    res = optimize.minimize(f, x0, method="Nelder-Mead",
                            options={"maxiter": cfg.max_iters, "xatol": np.inf,
                                     "fatol": cfg.simplex_tol, "adaptive": True})
    value = sign * float(res.fun) if res.fun < PENALTY else float("nan")
    return value, bool(res.success), np.asarray(res.x), int(res.nfev)


def optimize_ratio(ch_n, ch_m=None, cfg=OptimizerConfig(), policy=DEFAULT_POLICY):
    obj = RatioObjective(ch_n, ch_m, cfg.ratio_guard, policy)
    tasks = [(obj, cfg, i) for i in range(cfg.restarts)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_restart, tasks))
    else:
        results = [_run_restart(t) for t in tasks]
    values = [r[0] for r in results]
    finite = [i for i, v in enumerate(values) if np.isfinite(v)]
    if not finite:
        return OptimizerRun(float("nan"), (None, None), values, [r[1] for r in results], -1,
                            [r[3] for r in results])
    pick = min if cfg.mode == "min" else max
    best = pick(finite, key=lambda i: (values[i], i) if cfg.mode == "min" else (values[i], -i))
    return OptimizerRun(values[best], obj.pair(results[best][2]), values,
                        [r[1] for r in results], best, [r[3] for r in results])


def estimate_coefficient(ch_n, ch_m=None, cfg=OptimizerConfig(), policy=DEFAULT_POLICY):
    """Numerical ``eta`` (mode ``max``) or ``eta_check`` (mode ``min``).

    A minimum found by sampling can only overestimate the infimum, so the
    ``min`` result is reported as the interval ``[0, value]``; a maximum is
    reported as ``[value, inf)``.
    """
    run = optimize_ratio(ch_n, ch_m, cfg, policy)
    v = run.best_value
    meta = {"mode": cfg.mode, "seed": cfg.seed, "restarts": cfg.restarts, "run": run}
    if not np.isfinite(v):
        return CoefficientEstimate(0.0, float("inf"), NUMERICAL, "multi-start Nelder-Mead",
                                   None, meta)
    v = max(v, 0.0)
    if cfg.mode == "min":
        return CoefficientEstimate(0.0, v, NUMERICAL, "multi-start Nelder-Mead", v, meta)
    return CoefficientEstimate(v, float("inf"), NUMERICAL, "multi-start Nelder-Mead", v, meta)


# ------------------------------------------------------------- no-go


def support_dim(m, policy=DEFAULT_POLICY):
    """Number of eigenvalues above ``cutoff * lambda_max``."""
    m = hermitian_part(np.asarray(m, dtype=complex))
    if not is_psd(m):
        raise NotPSD("support_dim needs a positive semidefinite matrix")
    lam = np.linalg.eigvalsh(m)
    top = lam[-1]
    if top <= 0:
        return 0
    return int(np.sum(lam > policy.cutoff * top))


@dataclass
class NogoWitness:
    rho: np.ndarray
    sigma: np.ndarray
    ratio: float
    eps: float
    k0: int
    basis: np.ndarray


def _mixing_vector(ch, rng, n_random, policy):
    d = ch.dim_in
    for i in range(d):
        e = np.zeros(d, dtype=complex)
        e[i] = 1.0
        if support_dim(chs.apply(ch, projector(e)), policy) >= 2:
            return e
    for _ in range(n_random):
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        z /= np.linalg.norm(z)
        if support_dim(chs.apply(ch, projector(z)), policy) >= 2:
            return z
    return None


def _complete_basis(v):
    d = len(v)
    m = np.column_stack([v, np.eye(d, dtype=complex)])
    q, _ = np.linalg.qr(m)
    q = q[:, :d]
    # QR may flip the phase of the first column; restore it.
    q[:, 0] *= np.vdot(q[:, 0], v) / abs(np.vdot(q[:, 0], v))
    return q


def nogo_chain(ch, seed=0, n_random=200, policy=DEFAULT_POLICY):
    """Basis and index ``k0`` of the projection chain with a stalled output support.

    Raises :class:`PurityPreserving` when no sampled pure input has a mixed
    output.
    """
    if ch.dim_in < ch.dim_out:
        raise BadParam("the witness needs dim_in >= dim_out")
    rng = np.random.default_rng(seed)
    phi = _mixing_vector(ch, rng, n_random, policy)
    if phi is None:
        raise PurityPreserving("every sampled pure input has a pure output")
    basis = _complete_basis(phi)
    d = ch.dim_in
    dims = []
    for k in range(1, d + 1):
        p = basis[:, :k] @ basis[:, :k].conj().T
        dims.append(support_dim(chs.apply(ch, p / k), policy))
    for k in range(1, d):
        if dims[k] == dims[k - 1]:
            return basis, k
    raise BadParam(f"support chain never stalls: {dims}")


def nogo_witness(ch, eps, seed=0, n_random=200, policy=DEFAULT_POLICY):
    """Explicit pair whose ratio ``D(N rho||N sigma)/D(rho||sigma)`` vanishes with ``eps``."""
    if not 0 < eps < 1:
        raise BadParam("eps must lie in (0, 1)")
    basis, k0 = nogo_chain(ch, seed, n_random, policy)
    p = basis[:, :k0] @ basis[:, :k0].conj().T
    rho = p / k0
    sigma = (1 - eps) * rho + eps * projector(basis[:, k0])
    num = rel_entropy(chs.apply(ch, rho), chs.apply(ch, sigma), policy)
    den = rel_entropy(rho, sigma, policy)
    return NogoWitness(rho, sigma, num / den, eps, k0, basis)


def nogo_ladder(ch, eps_list=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6), seed=0, policy=DEFAULT_POLICY):
    """Witness ratios over ``eps_list``, or a purity-preserving verdict.

    Purity-preserving channels are isometries (``eta_check = 1``) or
    replacers onto a pure state (``eta_check = 0``); the Choi rank tells
    them apart.
    """
    try:
        ratios = [nogo_witness(ch, e, seed, policy=policy).ratio for e in eps_list]
    except PurityPreserving:
        rank = support_dim(chs.choi(ch), policy)
        eta = 1.0 if rank == 1 else 0.0
        return {"purity_preserving": True, "eta_check": eta, "eps": list(eps_list), "ratios": None}
    return {"purity_preserving": False, "eta_check": 0.0, "eps": list(eps_list), "ratios": ratios}
