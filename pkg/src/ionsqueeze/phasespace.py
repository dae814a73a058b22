"""Characteristic and Wigner functions of motional states.

Conventions (dimensionless throughout, ladder scale sigma_g = 1):
alpha = x + i p, D(alpha) = exp(alpha a^dag - conj(alpha) a), and
C(alpha) = <psi|D(alpha)|psi>.  For states of definite photon-number
parity pi, W(alpha) = (2/pi) * pi * C(2 alpha) with the constant fixed
by requiring the ground state's Wigner function to integrate to one
over dx dp.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalHealthError, ParityError, TruncationWarning
from .fock import MotionalState, x_state_norm

__all__ = [
    "PhaseGrid",
    "XStateSpec",
    "DecayProfile",
    "default_axes",
    "char_function_closed_form",
    "char_function_numeric",
    "wigner_from_parity",
    "parity_eigenvalue",
    "diagonal_zeros",
    "quadrature_decay_profile",
]


@dataclass(frozen=True)
class PhaseGrid:
    """Rectangular quadrature grid with values C(x + i p) or W(x + i p).

    values[i, j] corresponds to x_values[i], p_values[j]; real for the
    closed-form path, complex for the numeric one.
    """

    x_values: np.ndarray
    p_values: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x_values, dtype=float)
        p = np.asarray(self.p_values, dtype=float)
        v = np.asarray(self.values)
        if x.ndim != 1 or p.ndim != 1 or v.shape != (x.size, p.size):
            raise ValueError("values must be an (len(x), len(p)) matrix over 1-d axes")
        if x.size > 1 and np.any(np.diff(x) <= 0) or p.size > 1 and np.any(np.diff(p) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        object.__setattr__(self, "x_values", x)
        object.__setattr__(self, "p_values", p)
        object.__setattr__(self, "values", v)

    def origin_value(self):
        """Value at (0, 0); None when the origin is not a grid node."""
        ix = np.flatnonzero(np.abs(self.x_values) < 1e-12)
        ip = np.flatnonzero(np.abs(self.p_values) < 1e-12)
        if ix.size and ip.size:
            return self.values[ix[0], ip[0]]
        return None

    def to_json(self) -> str:
        payload = {
            "meta": self.meta,
            "x": self.x_values.tolist(),
            "p": self.p_values.tolist(),
        }
        if np.iscomplexobj(self.values):
            payload["values_re"] = self.values.real.tolist()
            payload["values_im"] = self.values.imag.tolist()
        else:
            payload["values"] = self.values.tolist()
        return json.dumps(payload, sort_keys=True)

    def to_csv(self, path) -> None:
        """Header row of p-values, leading column of x-values, real part."""
        vals = self.values.real if np.iscomplexobj(self.values) else self.values
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x\\p," + ",".join(f"{p:.17g}" for p in self.p_values) + "\n")
            for xv, row in zip(self.x_values, vals):
                fh.write(f"{xv:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class XStateSpec:
    parity: str
    r: float

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.parity == "odd" and self.r == 0:
            raise ValueError("the odd X-state is undefined at r=0")


def default_axes(r: float) -> tuple[np.ndarray, np.ndarray]:
    """Axes wide enough for the e^r-stretched lobes of an X-state."""
    if r < 1.5:
        pts = np.linspace(-4.0, 4.0, 401)
    else:
        pts = np.linspace(-8.0, 8.0, 801)
    return pts, pts.copy()


def _axes(grid) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(grid, PhaseGrid):
        return grid.x_values, grid.p_values
    x, p = grid
    return np.asarray(x, dtype=float), np.asarray(p, dtype=float)


def _check_origin_is_one(values: np.ndarray, x: np.ndarray, p: np.ndarray, label: str) -> None:
    ix = np.flatnonzero(np.abs(x) < 1e-12)
    ip = np.flatnonzero(np.abs(p) < 1e-12)
    if ix.size and ip.size:
        c0 = values[ix[0], ip[0]]
        if abs(abs(c0) - 1.0) > 1e-9:
            raise NumericalHealthError(
                f"{label}: |C(0,0)| = {abs(c0):.12f} deviates from 1 beyond 1e-9; "
                "state not normalized or resolution insufficient"
            )


def char_function_closed_form(spec: XStateSpec, grid) -> PhaseGrid:
    """C_+-(x, p) of an X-state from the squeezed-vacuum pair overlap algebra.

    C = 2 N^2 [ exp(-(x^2+p^2) cosh(2r)/2) cosh((x^2-p^2) sinh(2r)/2)
                +- exp(-(x^2+p^2)/(2 cosh 2r)) cos(x p tanh 2r) / sqrt(cosh 2r) ]

    The first product is evaluated as (e^{B-A} + e^{-B-A})/2; both
    exponents are <= 0 for every (x, p) since A -+ B collects
    e^{-+2r} x^2/2 + e^{+-2r} p^2/2, so nothing overflows.
    """
    x, p = _axes(grid)
    c2 = math.cosh(2.0 * spec.r)
    s2 = math.sinh(2.0 * spec.r)
    t2 = math.tanh(2.0 * spec.r)
    xx = x[:, None] ** 2
    pp = p[None, :] ** 2
    a = 0.5 * (xx + pp) * c2
    b = 0.5 * (xx - pp) * s2
    term1 = 0.5 * (np.exp(b - a) + np.exp(-b - a))
    term2 = np.exp(-0.5 * (xx + pp) / c2) * np.cos(x[:, None] * p[None, :] * t2) / math.sqrt(c2)
    sign = 1.0 if spec.parity == "even" else -1.0
    norm2 = 2.0 * x_state_norm(spec.parity, spec.r) ** 2
    vals = norm2 * (term1 + sign * term2)
    _check_origin_is_one(vals, x, p, "char_function_closed_form")
    meta = {
        "kind": "characteristic",
        "path": "closed_form",
        "parity": spec.parity,
        "r": spec.r,
        "convention": "alpha = x + i p; sigma_g = 1",
    }
    return PhaseGrid(x, p, vals, meta)


def _synthesize_on_grid(amps: np.ndarray, x: np.ndarray) -> np.ndarray:
    """psi(x) = sum_n c_n phi_n(x) by upward Hermite-function recurrence.

    At fixed x the wanted solution grows with n until the oscillatory
    region, so upward recurrence is stable -- but phi_0 underflows for
    |x| beyond ~38 while high-n terms are still significant there.  The
    running rows therefore store phi_n * 2^E with a per-point exponent
    offset E >= 0 that shrinks back to zero as the rows grow; true
    contributions are folded in through ldexp, which underflows to zero
    gracefully where the state genuinely has no support.
    """
    dim = amps.size
    half_xx = 0.5 * x * x
    exponent = np.ceil(np.maximum(half_xx - 700.0, 0.0) / math.log(2.0)).astype(np.int32)
    curr = math.pi ** -0.25 * np.exp(exponent * math.log(2.0) - half_xx)
    prev = np.zeros_like(x)
    psi = np.zeros(x.size, dtype=np.complex128)
    scaled = bool(np.any(exponent > 0))
    for n in range(dim):
        if amps[n] != 0.0:
            psi += amps[n] * (np.ldexp(curr, -exponent) if scaled else curr)
        if n + 1 == dim:
            break
        prev, curr = curr, math.sqrt(2.0 / (n + 1)) * x * curr - math.sqrt(n / (n + 1)) * prev
        if scaled and n % 16 == 0:
            big = (np.abs(curr) > 1e100) & (exponent > 0)
            if np.any(big):
                drop = np.minimum(exponent[big], 400).astype(np.int32)
                curr[big] = np.ldexp(curr[big], -drop)
                prev[big] = np.ldexp(prev[big], -drop)
                exponent[big] -= drop
                scaled = bool(np.any(exponent > 0))
    return psi


def _synthesis_grid(dim: int, x_reach: float, p_reach: float) -> np.ndarray:
    support = math.sqrt(2.0 * dim)
    half = support + math.sqrt(2.0) * x_reach + 8.0
    k_max = support + math.sqrt(2.0) * p_reach + 4.0
    n_pts = 2 ** math.ceil(math.log2(2.0 * half * k_max * 1.3 / math.pi))
    n_pts = max(n_pts, 1024)
    return np.linspace(-half, half, n_pts, endpoint=False)


def char_function_numeric(state: MotionalState, grid) -> PhaseGrid:
    """<psi|D(x + i p)|psi> from the position-space wavefunction.

    The ladder amplitudes are synthesized on a uniform grid; D shifts
    the wavefunction by sqrt(2) x0 (applied as a Fourier phase ramp) and
    multiplies by exp(i sqrt(2) p0 x), with the extra exp(-i x0 p0) from
    splitting the displacement exponential.
    """
    x0s, p0s = _axes(grid)
    amps = state.amplitudes
    dim = amps.size
    # health: mass the displacement formally pushes past the truncation edge.
    # A level-n component reaches ~(sqrt(2n) + sqrt(2)|alpha|)^2/2 when
    # displaced, so everything above n_cut would leak in a ladder-basis
    # displacement.  The grid evaluation below stays exact for the
    # truncated state itself; the warning flags that this state is too
    # small to stand in for its infinite-dimensional parent at this reach.
    pops = np.abs(amps) ** 2
    a_max = math.sqrt(float(np.max(np.abs(x0s)) ** 2 + np.max(np.abs(p0s)) ** 2))
    edge = max(0.0, math.sqrt(2.0 * dim) - math.sqrt(2.0) * a_max)
    n_cut = int(0.5 * edge * edge)
    leak = float(np.sum(pops[n_cut:]))
    if leak > 1e-6:
        warnings.warn(
            f"displacement reach |alpha| = {a_max:.2f} would push ~{leak:.2e} of the "
            f"population past the {dim}-level truncation",
            TruncationWarning,
            stacklevel=2,
        )
    xg = _synthesis_grid(dim, float(np.max(np.abs(x0s))), float(np.max(np.abs(p0s))))
    dx = xg[1] - xg[0]
    psi = _synthesize_on_grid(amps, xg)
    k = 2.0 * math.pi * np.fft.fftfreq(xg.size, d=dx)
    psi_k = np.fft.fft(psi)
    kernel = np.exp(1j * math.sqrt(2.0) * np.outer(xg, p0s))  # (grid, p)
    vals = np.empty((x0s.size, p0s.size), dtype=np.complex128)
    block = 128
    for lo in range(0, x0s.size, block):
        x0_blk = x0s[lo : lo + block]
        ramps = np.exp(-1j * math.sqrt(2.0) * np.outer(x0_blk, k))
        shifted = np.fft.ifft(psi_k[None, :] * ramps, axis=1)
        vals[lo : lo + block] = (np.conj(psi)[None, :] * shifted) @ kernel * dx
    vals *= np.exp(-1j * np.outer(x0s, p0s))
    _check_origin_is_one(vals, x0s, p0s, "char_function_numeric")
    meta = {
        "kind": "characteristic",
        "path": "numeric",
        "dim": dim,
        "convention": "alpha = x + i p; sigma_g = 1",
    }
    return PhaseGrid(x0s, p0s, vals, meta)


def parity_eigenvalue(state: MotionalState, atol: float = 1e-10) -> int:
    """+1 or -1 for even/odd photon-number support; raises otherwise."""
    pops = state.phonon_distribution()
    odd_mass = float(np.sum(pops[1::2]))
    even_mass = float(np.sum(pops[0::2]))
    if odd_mass <= atol:
        return +1
    if even_mass <= atol:
        return -1
    raise ParityError(
        f"state is not a parity eigenstate (even mass {even_mass:.3e}, odd mass {odd_mass:.3e})"
    )


def wigner_from_parity(obj, grid) -> PhaseGrid:
    """W(alpha) = (2/pi) <parity> C(2 alpha) for parity eigenstates.

    The prefactor is fixed by int W dx dp = 1 for the ground state; the
    parity eigenvalue enters because displacing a parity eigenstate
    turns the displaced-parity expectation into C evaluated at 2 alpha.
    """
    x, p = _axes(grid)
    if isinstance(obj, XStateSpec):
        # both X-states occupy even levels only
        pi_val = +1
        base = char_function_closed_form(obj, (2.0 * x, 2.0 * p))
        meta_src = {"parity": obj.parity, "r": obj.r, "path": "closed_form"}
    elif isinstance(obj, MotionalState):
        pi_val = parity_eigenvalue(obj)
        base = char_function_numeric(obj, (2.0 * x, 2.0 * p))
        meta_src = {"path": "numeric"}
    else:
        raise TypeError("wigner_from_parity takes a MotionalState or an XStateSpec")
    vals = (2.0 / math.pi) * pi_val * base.values
    if np.iscomplexobj(vals):
        vals = vals.real
    meta = {
        "kind": "wigner",
        "parity_eigenvalue": pi_val,
        "normalization": "int W dx dp = 1 (measure dx dp, alpha = x + i p)",
        **meta_src,
    }
    return PhaseGrid(x, p, vals, meta)


def _diagonal_mismatch(spec_r: float):
    c2 = math.cosh(2.0 * spec_r)
    s2 = math.sinh(2.0 * spec_r)
    t2 = math.tanh(2.0 * spec_r)

    def f(u):
        return math.sqrt(c2) * np.exp(-u * s2 * s2 / c2) - np.cos(u * t2)

    return f


def diagonal_zeros(
    spec: XStateSpec,
    search_range: tuple[float, float] = (1e-6, 25.0),
    scan_resolution: float = 1e-4,
) -> np.ndarray:
    """x-positions of C_- zeros on the diagonals x = +-p.

    On the diagonal the even-state term1 reduces to exp(-u cosh 2r) and
    C_- vanishes exactly when sqrt(cosh 2r) exp(-u sinh^2 2r / cosh 2r)
    crosses cos(u tanh 2r), with u = x^2.  Roots are located by a sign
    scan in u refined by bisection.
    """
    if spec.parity != "odd":
        raise ValueError("diagonal zeros are an odd-state feature; build the spec with parity='odd'")
    lo, hi = search_range
    if not (0 < lo < hi):
        raise ValueError("search_range must satisfy 0 < lo < hi")
    f = _diagonal_mismatch(spec.r)
    us = np.arange(lo, hi, scan_resolution)
    vals = f(us)
    sign_flip = np.flatnonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))
    roots = []
    for idx in sign_flip:
        root = brentq(f, us[idx], us[idx + 1], xtol=1e-14, rtol=8.9e-16)
        roots.append(math.sqrt(root))
    return np.array(roots)


@dataclass(frozen=True)
class DecayProfile:
    """On-axis characteristic-function profile and its summary points.

    half_crossing: first x with C < 1/2 (None if C stays above in range).
    plateau: intermediate level the profile settles to after the fast
    initial decay (0.0 when no plateau exists, as for the ground state).
    knee_crossing: first x where C falls below (C(0) + plateau)/2 - the
    point where the fast component has lost half its height.
    """

    xs: np.ndarray
    values: np.ndarray
    half_crossing: float | None
    plateau: float
    knee_crossing: float


def quadrature_decay_profile(
    spec: XStateSpec,
    axis: str = "x",
    *,
    x_max: float | None = None,
    n_points: int = 4001,
) -> DecayProfile:
    """C along one quadrature axis (the other set to zero).

    Along either axis the cos factor is 1 and the profile depends on the
    squeezing only through x^2, so the two axes give identical curves;
    the argument is kept for call-site clarity.
    """
    if axis not in ("x", "p"):
        raise ValueError(f"axis must be 'x' or 'p', got {axis!r}")
    if x_max is None:
        x_max = max(4.0, 4.0 * math.exp(spec.r))
    xs = np.linspace(0.0, x_max, n_points)
    zero = np.zeros(1)
    if axis == "x":
        vals = char_function_closed_form(spec, (xs, zero)).values[:, 0]
    else:
        vals = char_function_closed_form(spec, (zero, xs)).values[0, :]
    c0 = vals[0]

    def closed(xv: float) -> float:
        return float(char_function_closed_form(spec, (np.array([xv]), zero)).values[0, 0])

    # plateau: probe past the fast-decay scale; accept only if locally flat
    x_probe = min(1.0, 10.0 * math.exp(-spec.r))
    c_probe, c_probe2 = closed(x_probe), closed(2.0 * x_probe)
    plateau = c_probe if abs(c_probe - c_probe2) < 0.05 * abs(c0) else 0.0

    def first_below(level: float) -> float | None:
        below = np.flatnonzero(vals < level)
        if below.size == 0:
            return None
        j = below[0]
        if j == 0:
            return float(xs[0])
        # linear interpolation between the bracketing samples
        x1, x2 = xs[j - 1], xs[j]
        v1, v2 = vals[j - 1], vals[j]
        return float(x1 + (level - v1) * (x2 - x1) / (v2 - v1))

    half = first_below(0.5)
    knee = first_below(0.5 * (c0 + plateau))
    return DecayProfile(xs, vals, half, plateau, knee if knee is not None else math.inf)
