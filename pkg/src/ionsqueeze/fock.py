"""Truncated Fock-space primitives for a single motional mode.

Conventions
-----------
Dimensionless oscillator units throughout: hbar = m = omega_T = 1, so
lengths are measured in the ground-state width sigma_g and the quadratures
are x = (a + a^+)/sqrt(2), p = i(a^+ - a)/sqrt(2).

A squeeze parameter xi = r*exp(i*theta) acts through
S(xi) = exp((conj(xi)*a^2 - xi*a^+^2)/2), so S(xi)|0> is the squeezed
vacuum whose even amplitudes follow

    c_{2m} = (1/sqrt(cosh r)) * sqrt((2m)!)/(m! 2^m) * (-tanh(r) e^{i theta})^m

with all odd amplitudes exactly zero.  The displacement operator is
D(alpha) = exp(alpha*a^+ - conj(alpha)*a) with alpha = x + i p.

Both unitaries have generators that are tridiagonal on a number-state
chain (parity-split for the squeeze), so they are built here by exact
spectral decomposition of a real symmetric tridiagonal matrix instead of
a dense matrix exponential; the two routes agree to ~1e-13 but the
spectral one stays fast at the dimensions (~1000) that strong squeezing
needs.

Truncation: the retained amplitude at the top of the ladder sets how well
the truncated operator matches the infinite-dimensional series, so
helpers are provided to size dim from the analytic tail of the squeezed
distribution rather than guessing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import TruncationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SqueezeParam:
    """Squeeze magnitude r >= 0 and phase theta, normalized to [0, 2*pi)."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"squeeze magnitude must be >= 0, got {self.r}")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    @property
    def xi(self) -> complex:
        return self.r * np.exp(1j * self.theta)


@dataclass(frozen=True)
class PhasePoint:
    """Point in phase space; alpha = x + i*p."""

    x: float
    p: float

    @property
    def alpha(self) -> complex:
        return complex(self.x, self.p)


def _check_dim(dim: int) -> int:
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ValueError(f"Fock dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


class MotionalState:
    """Normalized state of the motional mode in the number basis.

    Amplitudes are stored read-only; construction checks the norm to
    `atol` unless `normalize=True` rescales instead.
    """

    def __init__(self, amplitudes, *, normalize: bool = False, atol: float = 1e-10):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ValueError(f"amplitudes must be 1-D, got shape {amps.shape}")
        _check_dim(amps.size)
        nrm = float(np.linalg.norm(amps))
        if normalize:
            if nrm == 0.0:
                raise ValueError("cannot normalize a zero state")
            amps = amps / nrm
        elif abs(nrm - 1.0) > atol:
            raise ValueError(f"state norm {nrm!r} deviates from 1 by more than {atol}")
        amps = amps.copy()
        amps.setflags(write=False)
        self._amps = amps

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def dim(self) -> int:
        return self._amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def inner(self, other: "MotionalState") -> complex:
        """<self|other>; conjugates this state's amplitudes."""
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self._amps, other._amps))

    def fidelity(self, other: "MotionalState") -> float:
        return abs(self.inner(other)) ** 2

    def phonon_distribution(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def mean_phonon(self) -> float:
        return float(np.sum(np.arange(self.dim) * self.phonon_distribution()))

    def parity_expectation(self) -> float:
        """<(-1)^n>: +1/-1 for even/odd photon-number parity eigenstates."""
        signs = 1.0 - 2.0 * (np.arange(self.dim) % 2)
        return float(np.sum(signs * self.phonon_distribution()))

    def top_fraction_probability(self, fraction: float = 0.05) -> float:
        """Probability in the top `fraction` of Fock indices (truncation health)."""
        cut = self.dim - max(1, int(math.ceil(fraction * self.dim)))
        return float(np.sum(self.phonon_distribution()[cut:]))

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "re": self._amps.real.tolist(),
                "im": self._amps.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MotionalState":
        rec = json.loads(text)
        amps = np.asarray(rec["re"], dtype=float) + 1j * np.asarray(rec["im"], dtype=float)
        if amps.size != rec["dim"]:
            raise ValueError(f"record dim {rec['dim']} does not match {amps.size} amplitudes")
        return cls(amps)

    def __repr__(self):
        return f"MotionalState(dim={self.dim}, <n>={self.mean_phonon():.4g})"


def vacuum(dim: int) -> MotionalState:
    return fock_state(0, dim)


def fock_state(n: int, dim: int) -> MotionalState:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise ValueError(f"Fock index {n} outside [0, {dim})")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return MotionalState(amps)


def ladder_ops(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """(a, a^+) with a|n> = sqrt(n)|n-1>."""
    dim = _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1).astype(complex)
    return a, a.conj().T


def number_op(dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def position_op(dim: int) -> np.ndarray:
    a, adag = ladder_ops(dim)
    return (a + adag) / math.sqrt(2.0)


def momentum_op(dim: int) -> np.ndarray:
    a, adag = ladder_ops(dim)
    return 1j * (adag - a) / math.sqrt(2.0)


def _expi_tridiag(offdiag: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """exp(-i*H) for Hermitian tridiagonal H with zero diagonal.

    H's offdiagonal is offdiag * exp(i*phases); a diagonal gauge maps it
    to a real symmetric tridiagonal matrix, which LAPACK diagonalizes in
    O(n^2).
    """
    n = offdiag.size + 1
    gauge = np.ones(n, dtype=complex)
    if n > 1:
        # conj(D_k) * t_k * D_{k+1} real requires D_{k+1} = D_k * e^{-i*psi_k}
        gauge[1:] = np.exp(-1j * np.cumsum(phases))
    w, q = eigh_tridiagonal(np.zeros(n), offdiag)
    u = (q * np.exp(-1j * w)) @ q.T
    return (gauge[:, None] * u) * gauge.conj()[None, :]


def squeeze_op(param: SqueezeParam, dim: int) -> np.ndarray:
    """S(xi) = exp((conj(xi) a^2 - xi a^+^2)/2) on the truncated ladder.

    The generator splits into independent even/odd parity chains, each a
    Hermitian tridiagonal after multiplying by i, so the exponential is
    assembled from two real tridiagonal eigenproblems.
    """
    dim = _check_dim(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for parity in (0, 1):
        idx = np.arange(parity, dim, 2)
        n = idx[:-1].astype(float)
        coup = param.r * np.sqrt((n + 1.0) * (n + 2.0)) / 2.0
        # offdiag of i*A is coup * exp(i*(pi/2 - theta))
        psi = np.full(coup.size, math.pi / 2.0 - param.theta)
        out[np.ix_(idx, idx)] = _expi_tridiag(coup, psi)
    return out


def displacement_op(alpha, dim: int) -> np.ndarray:
    """D(alpha) = exp(alpha a^+ - conj(alpha) a); alpha complex or PhasePoint."""
    dim = _check_dim(dim)
    if isinstance(alpha, PhasePoint):
        alpha = alpha.alpha
    alpha = complex(alpha)
    coup = abs(alpha) * np.sqrt(np.arange(1.0, dim))
    psi = np.full(dim - 1, -math.pi / 2.0 - np.angle(alpha) if alpha != 0 else 0.0)
    return _expi_tridiag(coup, psi)


def _log_even_coeff(m: int) -> float:
    # log of sqrt((2m)!)/(m! 2^m)
    return 0.5 * math.lgamma(2 * m + 1) - math.lgamma(m + 1) - m * math.log(2.0)


def squeezed_tail_probability(r: float, dim: int) -> float:
    """Upper bound on the squeezed-vacuum probability at Fock index >= dim.

    Sums the exact even-number probabilities for a window above the cut
    and closes the remainder with a geometric bound (the term ratio is
    < tanh(r)^2).
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0.0:
        return 0.0
    t2 = math.tanh(r) ** 2
    log_norm = -math.log(math.cosh(r))
    m0 = (dim + 1) // 2
    total = 0.0
    term = 0.0
    for m in range(m0, m0 + 64):
        term = math.exp(2.0 * _log_even_coeff(m) + m * math.log(t2) + log_norm)
        total += term
    return total + term * t2 / (1.0 - t2)


def min_dim_for_squeeze(r: float, tail_tol: float = 1e-10) -> int:
    """Smallest even dim whose squeezed-vacuum tail bound is <= tail_tol."""
    dim = 16
    while squeezed_tail_probability(r, dim) > tail_tol:
        dim += 16
        if dim > 1 << 20:
            raise TruncationError(f"no practical dim reaches tail {tail_tol} at r={r}")
    return dim


def min_dim_for_amplitude(r: float, amp_tol: float = 1e-10) -> int:
    """Smallest even dim whose top retained amplitude is <= amp_tol.

    The disagreement between the truncated-generator exponential and the
    analytic series is set by the amplitude level at the truncation
    boundary, so this sizes dim for operator-vs-series comparisons.
    """
    return min_dim_for_squeeze(r, tail_tol=amp_tol**2)


def squeezed_state_analytic(param: SqueezeParam, dim: int, tail_tol: float = 1e-10) -> MotionalState:
    """Squeezed vacuum from the closed-form even-number expansion.

    Amplitudes are the exact series values (no renormalization); raises
    TruncationError when the neglected tail exceeds tail_tol.
    """
    dim = _check_dim(dim)
    tail = squeezed_tail_probability(param.r, dim)
    if tail > tail_tol:
        raise TruncationError(
            f"squeezed-vacuum tail {tail:.3e} beyond dim={dim} exceeds {tail_tol:.1e} at r={param.r}"
        )
    amps = np.zeros(dim, dtype=complex)
    base = -math.tanh(param.r) * np.exp(1j * param.theta)
    log_norm = -0.5 * math.log(math.cosh(param.r))
    for m in range((dim + 1) // 2):
        amps[2 * m] = math.exp(_log_even_coeff(m) + log_norm) * base**m
    return MotionalState(amps)


def squeezed_pair_overlap(r: float) -> float:
    """<xi(r, theta)|xi(r, theta+pi)> = 1/sqrt(cosh 2r), independent of theta."""
    return 1.0 / math.sqrt(math.cosh(2.0 * r))


def x_state_norm(parity: str, r: float) -> float:
    """N_+- = 1/sqrt(2 +- 2/sqrt(cosh 2r))."""
    ov = squeezed_pair_overlap(r)
    if parity == "even":
        return 1.0 / math.sqrt(2.0 + 2.0 * ov)
    if parity == "odd":
        if r == 0.0:
            raise ValueError("odd X-state is undefined at r=0 (the superposition vanishes)")
        return 1.0 / math.sqrt(2.0 - 2.0 * ov)
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def x_state(parity: str, r: float, dim: int, theta: float = 0.0, tail_tol: float = 1e-10) -> MotionalState:
    """Normalized superposition N_+- (|xi> +- |xi e^{i pi}>) of squeezed vacua.

    With theta = 0 the even ('+') state occupies n = 0, 4, 8, ... and the
    odd ('-') state n = 2, 6, 10, ...; both have photon-number parity +1.
    """
    n_const = x_state_norm(parity, r)
    sign = 1.0 if parity == "even" else -1.0
    c_a = squeezed_state_analytic(SqueezeParam(r, theta), dim, tail_tol).amplitudes
    c_b = squeezed_state_analytic(SqueezeParam(r, theta + math.pi), dim, tail_tol).amplitudes
    return MotionalState(n_const * (c_a + sign * c_b))


def inner_product(a: MotionalState, b: MotionalState) -> complex:
    """<a|b>, conjugating the first argument."""
    return a.inner(b)


def phonon_distribution(state: MotionalState) -> np.ndarray:
    return state.phonon_distribution()


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def unitarity_defect(u: np.ndarray, protected_fraction: float = 0.0) -> float:
    """max |U^+U - I| over the sub-block excluding the top index fraction.

    Truncated unitaries are only unitary away from the ladder boundary;
    excluding the top indices measures the physically meaningful defect.
    """
    dim = u.shape[0]
    keep = dim - int(math.floor(protected_fraction * dim))
    g = u.conj().T @ u
    block = g[:keep, :keep] - np.eye(keep)
    return float(np.max(np.abs(block)))
