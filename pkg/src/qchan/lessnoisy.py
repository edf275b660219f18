"""Flagged amplitude-damping mixtures: degradability, proven less-noisy region, Holevo checks."""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import channels as chs
from .coefficients import ampdamp_expansion_conjecture, ampdamp_trace_contraction
from .divergences import vn_entropy
from .estimator import OptimizerConfig, estimate_coefficient
from .errors import BadEnsemble, BadParam, QchanError
from .states import random_pure, random_state

CONDITIONAL_LABEL = "conditional on the conjectured closed form"
CSV_FIELDS = ("gamma1", "gamma2", "p", "degradable", "antidegradable", "p_min",
              "proven_less_noisy", "holevo_margin_min")


def _check_unit(**kw):
    for k, v in kw.items():
        if not 0.0 <= v <= 1.0:
            raise BadParam(f"{k} = {v} is outside [0, 1]")


def classify_degradability(p, g1, g2):
    """``(degradable, antidegradable)`` for ``Psi_{p, g1, g2}``."""
    _check_unit(p=p, gamma1=g1, gamma2=g2)
    s = g1 + g2
    if p == 0.5:
        return s <= 1, s >= 1
    if p > 0.5:
        return s <= 1 and g1 <= 0.5, s >= 1 and g1 >= 0.5
    return s <= 1 and g2 <= 0.5, s >= 1 and g2 >= 0.5


def _open_unit(g1, g2):
    if not (0 < g1 < 1 and 0 < g2 < 1):
        raise BadParam("damping parameters must lie in (0, 1)")


def in_region_upper(g1, g2):
    """``g1 + g2 > 1`` and ``g1 < 1/2``: the large-``p`` proven region."""
    return 0 < g1 < 0.5 and g2 < 1 and g1 + g2 > 1


def in_region_lower(g1, g2):
    """``g1 + g2 > 1`` and ``g2 < 1/2``: the small-``p`` proven region."""
    return 0 < g2 < 0.5 and g1 < 1 and g1 + g2 > 1


def _threshold_x(g_deg, g1, g2):
    """``eta_check_lb * (1 - eta_ub)`` with the degrading branch damping ``g_deg``."""
    g_tilde = (1 - 2 * g_deg) / (1 - g_deg)
    eta_ub, _ = ampdamp_trace_contraction(g_tilde)
    # eta_check(A_a, A_{1-b}) from the conjectured closed form
    a, b = (g1, g2) if g_deg == g1 else (g2, g1)
    check = ampdamp_expansion_conjecture(a, 1 - b).value
    return check * (1 - eta_ub)


def p_min(g1, g2):
    """Smallest ``p`` for which the upper region is proven less noisy."""
    _open_unit(g1, g2)
    if not in_region_upper(g1, g2):
        raise BadParam("p_min needs gamma1 + gamma2 > 1 and gamma1 < 1/2")
    return 1.0 / (1.0 + _threshold_x(g1, g1, g2))


def p_max(g1, g2):
    """Largest ``p`` for which the lower region is proven less noisy."""
    _open_unit(g1, g2)
    if not in_region_lower(g1, g2):
        raise BadParam("p_max needs gamma1 + gamma2 > 1 and gamma2 < 1/2")
    x = _threshold_x(g2, g1, g2)
    return x / (1.0 + x)


def proven_less_noisy(p, g1, g2):
    deg, _ = classify_degradability(p, g1, g2)
    if deg:
        return True
    if in_region_upper(g1, g2):
        return p >= p_min(g1, g2)
    if in_region_lower(g1, g2):
        return p <= p_max(g1, g2)
    return False


# --------------------------------------------------------------- Holevo


def _check_ensemble(ensemble, d=2):
    if not ensemble:
        raise BadEnsemble("ensemble is empty")
    w = np.array([float(x[0]) for x in ensemble])
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
        raise BadEnsemble("weights must be nonnegative and sum to 1")
    states = []
    for _, s in ensemble:
        s = np.asarray(s, dtype=complex)
        if s.shape != (d, d):
            raise BadEnsemble(f"ensemble states must be {d}x{d}")
        states.append(s)
    return w, states


def holevo_information(ch, ensemble):
    """``S(sum_x w_x N(rho_x)) - sum_x w_x S(N(rho_x))``."""
    w, states = _check_ensemble(ensemble, ch.dim_in)
    outs = [chs.apply(ch, s) for s in states]
    avg = sum(wi * o for wi, o in zip(w, outs))
    return vn_entropy(avg) - float(sum(wi * vn_entropy(o) for wi, o in zip(w, outs)))


def _branch_gap(ch, ensemble):
    return holevo_information(ch, ensemble) - holevo_information(chs.complementary(ch), ensemble)


def holevo_margin(p, g1, g2, ensemble, cross_check=True, tol=1e-8):
    """``I(X;B) - I(X;E)`` for ``Psi_{p, g1, g2}`` on a classical-quantum ensemble.

    Computed branch by branch (the orthogonal flag makes both mutual
    informations additive); with ``cross_check`` the value is compared to
    the direct computation on the full flagged output and its environment.
    """
    _check_unit(p=p, gamma1=g1, gamma2=g2)
    _check_ensemble(ensemble)
    a1, a2 = chs.make_amplitude_damping(g1), chs.make_amplitude_damping(g2)
    value = p * _branch_gap(a1, ensemble) + (1 - p) * _branch_gap(a2, ensemble)
    if cross_check:
        direct = _branch_gap(chs.make_flagged_mixture(p, a1, a2), ensemble)
        if abs(direct - value) > tol:
            raise QchanError(f"flag decomposition mismatch: {value} vs {direct}")
    return value


def random_ensemble(rng, d=2, max_size=4):
    """2 to ``max_size`` states, each Haar pure or Gaussian mixed, Dirichlet weights."""
    k = int(rng.integers(2, max_size + 1))
    w = rng.dirichlet(np.ones(k))
    states = [random_pure(rng, d) if rng.random() < 0.5 else random_state(rng, d) for _ in range(k)]
    return list(zip(w.tolist(), states))


def holevo_margin_min(p, g1, g2, n, seed=0, cross_check=False):
    rng = np.random.default_rng(seed)
    return min(holevo_margin(p, g1, g2, random_ensemble(rng), cross_check) for _ in range(n))


# ---------------------------------------------------------------- sweep


@dataclass(frozen=True)
class RegionSample:
    p: float
    gamma1: float
    gamma2: float
    degradable: bool
    antidegradable: bool
    proven_less_noisy: bool
    p_min: Optional[float]
    holevo_margin_min: Optional[float]
    p_max: Optional[float] = None

    def row(self):
        return {k: getattr(self, k) for k in CSV_FIELDS}

    def as_dict(self):
        return asdict(self)


def region_sample(p, g1, g2, n_ensembles=0, seed=0):
    deg, anti = classify_degradability(p, g1, g2)
    pm = p_min(g1, g2) if in_region_upper(g1, g2) else None
    px = p_max(g1, g2) if in_region_lower(g1, g2) else None
    margin = holevo_margin_min(p, g1, g2, n_ensembles, seed) if n_ensembles > 0 else None
    return RegionSample(p, g1, g2, deg, anti, proven_less_noisy(p, g1, g2), pm, margin, px)


def grid_points(grid):
    """Cell centres ``(i + 1/2) / grid`` of ``(0, 1)``."""
    if grid < 2:
        raise BadParam("grid must be at least 2")
    return [(i + 0.5) / grid for i in range(grid)]


def _sample_task(args):
    (i, j, k), p, g1, g2, n, seed = args
    cell_seed = int(np.random.SeedSequence([seed, i, j, k]).generate_state(1)[0])
    return region_sample(p, g1, g2, n, cell_seed)


def sweep_region(grid, p_list, n_ensembles=0, seed=0, gammas=None, jobs=1):
    """Region records over ``gammas x gammas x p_list``, ordered by index.

    ``gammas`` defaults to :func:`grid_points`. Each cell gets its own
    seed from ``(seed, i, j, k)`` so the output does not depend on ``jobs``.
    """
    gs = list(gammas) if gammas is not None else grid_points(grid)
    tasks = [((i, j, k), p, g1, g2, n_ensembles, seed)
             for i, g1 in enumerate(gs) for j, g2 in enumerate(gs) for k, p in enumerate(p_list)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sample_task, tasks, chunksize=64))
    return [_sample_task(t) for t in tasks]


def relative_expansion_surface(grid, numerical=False, cfg=None, gammas=None):
    """Rows ``(gamma1, gamma2, conjectured[, numerical])`` for the expansion coefficient."""
    gs = list(gammas) if gammas is not None else grid_points(grid)
    rows = []
    for g1 in gs:
        for g2 in gs:
            row = {"gamma1": g1, "gamma2": g2,
                   "conjectured": ampdamp_expansion_conjecture(g1, g2).value}
            if numerical:
                est = estimate_coefficient(chs.make_amplitude_damping(g1),
                                           chs.make_amplitude_damping(g2),
                                           cfg or OptimizerConfig(mode="min"))
                row["numerical"] = est.value
            rows.append(row)
    return rows


def region_metadata():
    return {"p_min": CONDITIONAL_LABEL, "p_max": CONDITIONAL_LABEL}


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return f"{float(x):.12g}"


def write_region_csv(samples, fh):
    """CSV with the fixed header; floats at 12 significant digits, ``\\n`` endings."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for s in samples:
        w.writerow([_fmt(v) for v in s.row().values()])


def _parse(field, text):
    if field in ("degradable", "antidegradable", "proven_less_noisy"):
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r}")
        return text == "true"
    return None if text == "" else float(text)


def read_region_csv(fh):
    r = csv.reader(fh)
    header = next(r)
    if tuple(header) != CSV_FIELDS:
        raise ValueError(f"unexpected header {header}")
    out = []
    for row in r:
        vals = {f: _parse(f, t) for f, t in zip(CSV_FIELDS, row)}
        out.append(RegionSample(**vals))
    return out
