"""CPTP maps in Kraus form, standard families and derived representations."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BadParam, DimMismatch, NotPSD, NotQubit
from .linalg import hermitian_part, is_psd, max_abs
from .states import PAULIS, STATE_TOL, bloch_to_state

CPTP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Channel:
    """A channel ``rho -> sum_i K_i rho K_i^dag``.

    ``kraus`` has shape ``(n_kraus, dim_out, dim_in)``.
    """

    kraus: np.ndarray
    label: str = field(default="", compare=False)
    schur: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0:
            raise DimMismatch(f"Kraus stack must be 3-D and nonempty, got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise BadParam("Kraus operators have non-finite entries")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)
        gram = np.einsum("kji,kjl->il", k.conj(), k)
        err = max_abs(gram - np.eye(k.shape[2]))
        if err > CPTP_TOL:
            raise BadParam(f"Kraus operators are not trace preserving (error {err:.3g})")

    @property
    def dim_in(self):
        return self.kraus.shape[2]

    @property
    def dim_out(self):
        return self.kraus.shape[1]

    @property
    def n_kraus(self):
        return self.kraus.shape[0]

    @cached_property
    def superop(self):
        """Matrix acting on row-major ``vec(X)``."""
        k = self.kraus
        s = np.einsum("kab,kcd->acbd", k, k.conj())
        return s.reshape(self.dim_out**2, self.dim_in**2)

    def apply_operator(self, x):
        """Action on an arbitrary (not necessarily positive) operator."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim_in, self.dim_in):
            raise DimMismatch(f"operator shape {x.shape} != ({self.dim_in}, {self.dim_in})")
        if self.schur is not None:
            return self.schur * x
        return (self.superop @ x.reshape(-1)).reshape(self.dim_out, self.dim_out)

    def __call__(self, rho):
        return self.apply_operator(rho)

    def __repr__(self):
        name = self.label or "Channel"
        return f"<{name}: {self.dim_in}->{self.dim_out}, {self.n_kraus} Kraus>"


def apply(ch, rho):
    """Apply ``ch`` to a density matrix; output is Hermitian-symmetrized."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimMismatch(f"state dim {rho.shape} does not match channel input {ch.dim_in}")
    return hermitian_part(ch.apply_operator(rho))


def choi(ch):
    """Unnormalized Choi matrix ``sum_ij |i><j| (x) N(|i><j|)``."""
    din, dout = ch.dim_in, ch.dim_out
    c = np.zeros((din * dout, din * dout), dtype=complex)
    for i in range(din):
        for j in range(din):
            e = np.zeros((din, din), dtype=complex)
            e[i, j] = 1.0
            c[i * dout:(i + 1) * dout, j * dout:(j + 1) * dout] = ch.apply_operator(e)
    return c


def complementary(ch):
    """Complementary channel with environment dimension equal to the Kraus count.

    ``(N^c(rho))_ij = tr(A_i rho A_j^dag)``.
    """
    return Channel(np.transpose(ch.kraus, (1, 0, 2)), label=f"complement({ch.label})")


def compose(outer, inner):
    """``outer o inner``."""
    if outer.dim_in != inner.dim_out:
        raise DimMismatch("composition dimensions do not match")
    k = np.einsum("aij,bjk->abik", outer.kraus, inner.kraus)
    k = k.reshape(-1, outer.dim_out, inner.dim_in)
    return Channel(k, label=f"{outer.label}o{inner.label}")


def cp_leq(ch_a, ch_b, c=1.0, tol=None):
    """True iff ``c * ch_a <=_cp ch_b``, i.e. ``C_B - c C_A`` is PSD."""
    if (ch_a.dim_in, ch_a.dim_out) != (ch_b.dim_in, ch_b.dim_out):
        raise DimMismatch("channels have different dimensions")
    diff = choi(ch_b) - c * choi(ch_a)
    return is_psd(diff) if tol is None else is_psd(diff, tol)


@dataclass(frozen=True, eq=False)
class AffineRep:
    """Qubit channel as ``w -> T w + t`` on Bloch vectors."""

    T: np.ndarray
    t: np.ndarray

    def __call__(self, w):
        return self.T @ np.asarray(w, dtype=float) + self.t

    def positivity_violation(self, n=12):
        """Largest ``|T w + t| - 1`` over a grid on the Bloch sphere."""
        th = np.linspace(0, np.pi, n)
        ph = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
        tt, pp = np.meshgrid(th, ph)
        w = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], -1)
        out = w.reshape(-1, 3) @ self.T.T + self.t
        return float(np.max(np.linalg.norm(out, axis=1)) - 1.0)


def to_affine(ch):
    if ch.dim_in != 2 or ch.dim_out != 2:
        raise NotQubit("affine representation requires a qubit-to-qubit channel")
    T = np.empty((3, 3))
    for j in range(3):
        out = ch.apply_operator(PAULIS[j])
        for i in range(3):
            T[i, j] = 0.5 * np.real(np.trace(PAULIS[i] @ out))
    out = ch.apply_operator(np.eye(2))
    t = np.array([0.5 * np.real(np.trace(PAULIS[i] @ out)) for i in range(3)])
    return AffineRep(T, t)


def affine_apply(aff, rho):
    w = np.real(np.einsum("kij,ji->k", PAULIS, rho))
    return bloch_to_state(aff(w))


# ---------------------------------------------------------------- families


def _check_prob(name, x, lo=0.0, hi=1.0):
    if not (lo <= x <= hi) or not np.isfinite(x):
        raise BadParam(f"{name} must lie in [{lo}, {hi}], got {x}")


def identity(d):
    return Channel(np.eye(d, dtype=complex)[None], label=f"id(d={d})")


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return Channel(u[None], label="unitary")


def replacer(state):
    """``rho -> tr(rho) state`` for a fixed output state."""
    state = np.asarray(state, dtype=complex)
    lam, vec = np.linalg.eigh(state)
    d_out = state.shape[0]
    d_in = d_out
    ks = []
    for l, v in zip(lam, vec.T):
        if l > STATE_TOL:
            for a in range(d_in):
                k = np.zeros((d_out, d_in), dtype=complex)
                k[:, a] = np.sqrt(l) * v
                ks.append(k)
    return Channel(np.array(ks), label="replacer")


def random_channel(rng, d_in, d_out=None, n_kraus=2):
    """Kraus operators cut from a Haar-like random isometry ``C^d_in -> C^(d_out k)``."""
    d_out = d_in if d_out is None else d_out
    if d_out * n_kraus < d_in:
        raise BadParam("need d_out * n_kraus >= d_in for an isometry")
    z = rng.standard_normal((d_out * n_kraus, d_in)) + 1j * rng.standard_normal((d_out * n_kraus, d_in))
    q, _ = np.linalg.qr(z)
    return Channel(q.reshape(n_kraus, d_out, d_in), label=f"random({d_in}->{d_out},k={n_kraus})")


def weyl_operators(d):
    """The ``d^2`` clock-and-shift unitaries ``X^a Z^b``."""
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    ops = []
    for a in range(d):
        for b in range(d):
            ops.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
    return ops


def make_depolarizing(d, p):
    """``rho -> (1-p) rho + p tr(rho) I/d``."""
    _check_prob("p", p)
    if d < 1:
        raise BadParam("dimension must be positive")
    ops = weyl_operators(d)
    w0 = np.sqrt(1 - p + p / d**2)
    w = np.sqrt(p / d**2)
    kraus = [w0 * ops[0]]
    if p > 0:
        kraus += [w * op for op in ops[1:]]
    return Channel(np.array(kraus), label=f"depol(d={d},p={p:g})")


def check_dephasing_matrix(gamma):
    g = np.asarray(gamma)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimMismatch("dephasing matrix must be square")
    if np.any(np.abs(np.imag(g)) > 0):
        raise BadParam("dephasing matrix must be real")
    g = np.real(g).astype(float)
    if not np.array_equal(np.diag(g), np.ones(len(g))):
        raise BadParam("dephasing matrix must have unit diagonal")
    if max_abs(g - g.T) > 1e-12:
        raise BadParam("dephasing matrix must be symmetric")
    if not is_psd(g):
        raise NotPSD("dephasing matrix is not positive semidefinite")
    return g


def make_dephasing(gamma):
    """Schur-multiplier channel ``rho -> gamma * rho`` (entrywise)."""
    g = check_dephasing_matrix(gamma)
    lam, u = np.linalg.eigh(g)
    kraus = [np.diag(np.sqrt(l) * u[:, k]).astype(complex)
             for k, l in enumerate(lam) if l > 1e-14]
    # The entrywise product keeps diagonals bit-exact; Kraus form is for Choi etc.
    return Channel(np.array(kraus), label=f"deph(d={len(g)})", schur=g)


def qubit_dephasing_matrix(p):
    _check_prob("p", p, 0.0, 2.0)
    return np.array([[1.0, 1.0 - p], [1.0 - p, 1.0]])


def make_qubit_dephasing(p):
    _check_prob("p", p, 0.0, 2.0)
    # Explicit two-Kraus form keeps diagonals exactly unchanged.
    a = np.sqrt(1 - p / 2)
    b = np.sqrt(p / 2)
    kraus = np.array([a * np.eye(2), b * np.diag([1.0, -1.0])], dtype=complex)
    return Channel(kraus, label=f"deph(p={p:g})", schur=qubit_dephasing_matrix(p))


def make_amplitude_damping(gamma):
    _check_prob("gamma", gamma)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return Channel(np.array([k0, k1]), label=f"amp(gamma={gamma:g})")


def make_erasure(nu, d):
    """``rho -> (1-nu) rho (+) nu |e><e|`` with the flag ``|e>`` as the last level."""
    _check_prob("nu", nu)
    emb = np.zeros((d + 1, d), dtype=complex)
    emb[:d, :d] = np.eye(d)
    kraus = [np.sqrt(1 - nu) * emb]
    if nu > 0:
        for i in range(d):
            k = np.zeros((d + 1, d), dtype=complex)
            k[d, i] = np.sqrt(nu)
            kraus.append(k)
    return Channel(np.array(kraus), label=f"erase(nu={nu:g},d={d})")


def make_flagged_mixture(p, ch_a, ch_b):
    """``p |0><0| (x) ch_a + (1-p) |1><1| (x) ch_b`` on ``C^2 (x) C^D``.

    ``D`` is the larger of the two output dimensions; a smaller block is
    zero-padded.
    """
    _check_prob("p", p)
    if ch_a.dim_in != ch_b.dim_in:
        raise DimMismatch("flagged branches must share the input dimension")
    dout = max(ch_a.dim_out, ch_b.dim_out)
    din = ch_a.dim_in
    kraus = []
    for flag, weight, ch in ((0, p, ch_a), (1, 1 - p, ch_b)):
        if weight == 0:
            continue
        for k in ch.kraus:
            big = np.zeros((2 * dout, din), dtype=complex)
            big[flag * dout:flag * dout + ch.dim_out] = np.sqrt(weight) * k
            kraus.append(big)
    return Channel(np.array(kraus), label=f"flag(p={p:g},{ch_a.label},{ch_b.label})")


def make_ampdamp_mixture(p, gamma1, gamma2):
    """The flagged amplitude-damping mixture ``Psi_{p, gamma1, gamma2}``."""
    return make_flagged_mixture(p, make_amplitude_damping(gamma1), make_amplitude_damping(gamma2))
