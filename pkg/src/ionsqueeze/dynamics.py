"""Time-dependent dynamics in the modulated optical lattice.

Two independent solvers integrate the full Hamiltonian

    H(t)/hbar_omega_T = p^2/2 + x^2/2 + (eps/omega_T)(1 - sin(omega_d t - theta)) sin^2(sqrt(eta_g) x + Phi)

for the excited internal state (the ground internal state sees only the
harmonic trap):

* a second-order split-operator scheme on a position grid (kinetic
  half-step by FFT, potential full step evaluated at the interval
  midpoint), and
* a fourth-order Runge-Kutta stepper in the number basis, with the
  lattice matrix built by spectral decomposition of the position
  operator.  The stepper works in the interaction picture of the
  diagonal harmonic part, which keeps the explicit scheme stable at any
  truncation dimension (only the bounded lattice term is integrated
  numerically); snapshots are rotated back to the lab frame.

The modulation's DC part stiffens the trap to omega_e =
sqrt(omega_t^2 + 2 eta_g eps omega_t); in the omega_e interaction frame
the resonantly driven mode approaches the squeezed vacuum with
r = G t / 2, G = eps * eta_e, which overlap_series checks by projecting
snapshots on oscillator eigenfunctions of the chosen frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BoundaryLeakError, ProjectionError, StepSizeError, TailLeakError
from .fock import MotionalState, SqueezeParam, position_op, squeeze_op, squeezed_state_analytic

# --- configuration -------------------------------------------------------


@dataclass(frozen=True)
class TrapConfig:
    """Harmonic trap and lattice geometry: eta_g = k_l^2 sigma_g^2, Phi offset."""

    eta_g: float
    phi: float = 0.0
    omega_t: float = 1.0

    def __post_init__(self):
        if self.omega_t <= 0:
            raise ValueError(f"omega_t must be > 0, got {self.omega_t}")
        if not 0.0 < self.eta_g < 1.0:
            raise ValueError(f"eta_g must lie in (0, 1) (Lamb-Dicke regime), got {self.eta_g}")


@dataclass(frozen=True)
class DriveConfig:
    """Lattice intensity modulation V0(t) = eps*(1 - sin(omega_d t - theta)).

    omega_d = None holds the lattice static at depth eps.
    """

    epsilon: float
    omega_d: float | None = None
    theta: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.omega_d is not None and self.omega_d <= 0:
            raise ValueError(f"omega_d must be > 0 when given, got {self.omega_d}")

    @property
    def period(self) -> float:
        if self.omega_d is None:
            raise ValueError("static drive has no period")
        return 2.0 * math.pi / self.omega_d


@dataclass(frozen=True)
class DerivedParams:
    omega_e: float
    sigma_ratio: float
    eta_e: float
    g_rate: float

    def time_for_r(self, r: float) -> float:
        """Duration with r = G t / 2."""
        return 2.0 * r / self.g_rate


@dataclass(frozen=True)
class GridConfig:
    """Uniform position grid and fixed-step clock for the split-operator solver."""

    n_points: int
    x_max: float
    dt: float
    t_final: float

    def __post_init__(self):
        if self.n_points < 128:
            raise ValueError(f"n_points must be >= 128, got {self.n_points}")
        if self.n_points & (self.n_points - 1):
            raise ValueError(f"n_points must be a power of two, got {self.n_points}")
        if self.x_max <= 0 or self.dt <= 0 or self.t_final < 0:
            raise ValueError("x_max and dt must be > 0 and t_final >= 0")


def derive_params(trap: TrapConfig, drive: DriveConfig) -> DerivedParams:
    """Dressed frequency and parametric-drive rate from the lattice DC part."""
    omega_e = math.sqrt(trap.omega_t**2 + 2.0 * trap.eta_g * drive.epsilon * trap.omega_t)
    sigma_ratio = math.sqrt(trap.omega_t / omega_e)
    eta_e = trap.eta_g * (trap.omega_t / omega_e)
    return DerivedParams(
        omega_e=omega_e,
        sigma_ratio=sigma_ratio,
        eta_e=eta_e,
        g_rate=drive.epsilon * eta_e,
    )


def drive_amplitude(drive: DriveConfig, t) -> np.ndarray:
    """V0(t)/hbar in units of omega_T; constant eps when omega_d is None."""
    t = np.asarray(t, dtype=float)
    if drive.omega_d is None:
        return np.full_like(t, drive.epsilon)
    return drive.epsilon * (1.0 - np.sin(drive.omega_d * t - drive.theta))


def potential_full(trap: TrapConfig, drive: DriveConfig, t: float):
    """V(x, t) as a callable of the dimensionless position array."""
    v0 = float(drive_amplitude(drive, t))
    root_eta = math.sqrt(trap.eta_g)

    def v(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * trap.omega_t**2 * x**2 + v0 * np.sin(root_eta * x + trap.phi) ** 2

    return v


# --- spatial grid solver -------------------------------------------------


@dataclass(frozen=True)
class SpatialGrid:
    """Realized uniform grid: points, spacing and FFT wavenumbers."""

    x: np.ndarray
    dx: float
    k: np.ndarray

    @classmethod
    def from_config(cls, cfg: GridConfig) -> "SpatialGrid":
        x = np.linspace(-cfg.x_max, cfg.x_max, cfg.n_points, endpoint=False)
        dx = x[1] - x[0]
        k = 2.0 * math.pi * np.fft.fftfreq(cfg.n_points, dx)
        return cls(x=x, dx=float(dx), k=k)

    def norm(self, psi: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(psi) ** 2) * self.dx))


def gaussian_ground(grid: SpatialGrid, omega: float = 1.0) -> np.ndarray:
    """Oscillator ground state of frequency omega, normalized on the grid."""
    psi = np.exp(-0.5 * omega * grid.x**2).astype(complex)
    return psi / grid.norm(psi)


@dataclass
class TimeSeries:
    """Snapshots of a propagation run.

    states holds one row per snapshot: grid values (kind='grid') or
    number-basis amplitudes in the omega_t ladder (kind='fock').  leak is
    the boundary probability (grid) or top-decile tail probability (fock)
    at each snapshot.
    """

    times: np.ndarray
    states: np.ndarray
    norm_defect: np.ndarray
    leak: np.ndarray
    kind: str
    grid: SpatialGrid | None = None

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _edge_probability(psi: np.ndarray, dx: float, n_edge: int = 5) -> float:
    edges = np.concatenate([psi[:n_edge], psi[-n_edge:]])
    return float(np.sum(np.abs(edges) ** 2) * dx)


def propagate_grid(
    initial: np.ndarray,
    trap: TrapConfig,
    drive: DriveConfig,
    cfg: GridConfig,
    *,
    stride: int = 10,
    leak_tol: float = 1e-8,
) -> TimeSeries:
    """Split-operator integration of the full lattice Hamiltonian.

    Second order: exp(-i T dt/2) exp(-i V(t_mid) dt) exp(-i T dt/2) per
    step.  Raises BoundaryLeakError when probability within five points
    of either edge exceeds leak_tol.
    """
    grid = SpatialGrid.from_config(cfg)
    psi = np.asarray(initial, dtype=complex).copy()
    if psi.shape != grid.x.shape:
        raise ValueError(f"initial state has shape {psi.shape}, grid expects {grid.x.shape}")

    n_steps = max(1, int(round(cfg.t_final / cfg.dt)))
    kin_half = np.exp(-0.25j * grid.k**2 * cfg.dt)
    x2_half = 0.5 * trap.omega_t**2 * grid.x**2
    lattice_shape = np.sin(math.sqrt(trap.eta_g) * grid.x + trap.phi) ** 2

    times = [0.0]
    snaps = [psi.copy()]
    defects = [abs(grid.norm(psi) - 1.0)]
    leaks = [_edge_probability(psi, grid.dx)]

    for step in range(n_steps):
        t_mid = (step + 0.5) * cfg.dt
        v_mid = x2_half + float(drive_amplitude(drive, t_mid)) * lattice_shape
        psi = np.fft.ifft(kin_half * np.fft.fft(psi))
        psi *= np.exp(-1j * v_mid * cfg.dt)
        psi = np.fft.ifft(kin_half * np.fft.fft(psi))

        leak = _edge_probability(psi, grid.dx)
        if leak > leak_tol:
            raise BoundaryLeakError(
                f"boundary probability {leak:.3e} exceeds {leak_tol:.1e} at t={(step + 1) * cfg.dt:.4g}"
            )
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            times.append((step + 1) * cfg.dt)
            snaps.append(psi.copy())
            defects.append(abs(grid.norm(psi) - 1.0))
            leaks.append(leak)

    return TimeSeries(
        times=np.asarray(times),
        states=np.asarray(snaps),
        norm_defect=np.asarray(defects),
        leak=np.asarray(leaks),
        kind="grid",
        grid=grid,
    )


# --- number-basis solver -------------------------------------------------


@lru_cache(maxsize=32)
def _lattice_matrix(eta_g: float, phi: float, dim: int) -> np.ndarray:
    """sin^2(sqrt(eta_g) x + phi) in the number basis.

    Built by diagonalizing x, applying the scalar function to its
    spectrum and rotating back; cached read-only per (eta_g, phi, dim).
    """
    xs, q = np.linalg.eigh(position_op(dim))
    vals = np.sin(math.sqrt(eta_g) * xs + phi) ** 2
    mat = (q * vals) @ q.conj().T
    mat = 0.5 * (mat + mat.conj().T)
    mat.setflags(write=False)
    return mat


def lattice_matrix(trap: TrapConfig, dim: int) -> np.ndarray:
    return _lattice_matrix(trap.eta_g, trap.phi, dim)


def _lattice_quadratic(trap: TrapConfig, dim: int) -> np.ndarray:
    """Quadratic truncation sin^2 -> sin^2(phi) + sqrt(eta) sin(2 phi) x + eta cos(2 phi) x^2."""
    x = position_op(dim)
    c = math.cos(2.0 * trap.phi)
    s = math.sin(2.0 * trap.phi)
    return (
        math.sin(trap.phi) ** 2 * np.eye(dim)
        + math.sqrt(trap.eta_g) * s * x
        + trap.eta_g * c * (x @ x)
    )


def _tail_probability_fock(psi: np.ndarray) -> float:
    cut = psi.size - max(1, psi.size // 10)
    return float(np.sum(np.abs(psi[cut:]) ** 2))


def propagate_fock(
    initial: MotionalState,
    trap: TrapConfig,
    drive: DriveConfig,
    dt: float,
    t_final: float,
    *,
    dim: int | None = None,
    stride: int = 10,
    lattice: str = "full",
    tail_tol: float = 1e-8,
) -> TimeSeries:
    """RK4 integration in the number basis (interaction picture of H0).

    H(t) = H0 + v(t) V_lat with H0 = omega_t (n + 1/2) diagonal; the
    stepper integrates the picture-transformed lattice term only, so the
    truncation dimension does not limit the step size.  Snapshots are
    lab-frame amplitudes.  Raises TailLeakError when the top decile of
    the ladder accumulates more than tail_tol probability.
    """
    if dim is None:
        dim = initial.dim
    if dim < initial.dim:
        raise ValueError(f"dim={dim} smaller than the initial state ({initial.dim})")
    psi = np.zeros(dim, dtype=complex)
    psi[: initial.dim] = initial.amplitudes

    if lattice == "full":
        v_lat = lattice_matrix(trap, dim)
    elif lattice == "quadratic":
        v_lat = _lattice_quadratic(trap, dim)
    else:
        raise ValueError(f"lattice must be 'full' or 'quadratic', got {lattice!r}")

    levels = np.arange(dim) + 0.5
    omega0 = trap.omega_t

    def deriv(t: float, phi_i: np.ndarray) -> np.ndarray:
        # -i v(t) e^{+i H0 t} V_lat e^{-i H0 t} phi_i, phases applied as vectors
        phase = np.exp(-1j * omega0 * levels * t)
        w = v_lat @ (phase * phi_i)
        return (-1j * float(drive_amplitude(drive, t))) * (np.conj(phase) * w)

    n_steps = max(1, int(round(t_final / dt)))
    times = [0.0]
    snaps = [psi.copy()]
    defects = [abs(np.linalg.norm(psi) - 1.0)]
    leaks = [_tail_probability_fock(psi)]

    for step in range(n_steps):
        t = step * dt
        k1 = deriv(t, psi)
        k2 = deriv(t + 0.5 * dt, psi + 0.5 * dt * k1)
        k3 = deriv(t + 0.5 * dt, psi + 0.5 * dt * k2)
        k4 = deriv(t + dt, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        tail = _tail_probability_fock(psi)
        if tail > tail_tol:
            raise TailLeakError(
                f"top-decile Fock probability {tail:.3e} exceeds {tail_tol:.1e} at t={(step + 1) * dt:.4g}"
            )
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            t_now = (step + 1) * dt
            lab = np.exp(-1j * omega0 * levels * t_now) * psi
            times.append(t_now)
            snaps.append(lab)
            defects.append(abs(np.linalg.norm(psi) - 1.0))
            leaks.append(tail)

    return TimeSeries(
        times=np.asarray(times),
        states=np.asarray(snaps),
        norm_defect=np.asarray(defects),
        leak=np.asarray(leaks),
        kind="fock",
    )


def rwa_propagator(xi_target: SqueezeParam, dim: int) -> np.ndarray:
    """RWA evolution operator: the drive (G, T, theta) squeezes by r = G T / 2."""
    return squeeze_op(xi_target, dim)


def xi_from_drive(g_rate: float, duration: float, theta: float = 0.0) -> SqueezeParam:
    return SqueezeParam(0.5 * g_rate * duration, theta)


# --- basis projections and RWA comparison --------------------------------


def hermite_functions(x: np.ndarray, n_levels: int, omega: float = 1.0) -> np.ndarray:
    """Oscillator eigenfunctions phi_n(x), rows n = 0..n_levels-1.

    Stable normalized recurrence phi_{n+1} = sqrt(2/(n+1)) u phi_n -
    sqrt(n/(n+1)) phi_{n-1} with u = sqrt(omega) x.
    """
    x = np.asarray(x, dtype=float)
    u = math.sqrt(omega) * x
    out = np.zeros((n_levels, x.size))
    out[0] = (omega / math.pi) ** 0.25 * np.exp(-0.5 * u**2)
    if n_levels > 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for n in range(1, n_levels - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * u * out[n] - math.sqrt(n / (n + 1.0)) * out[n - 1]
    return out


def project_to_fock(
    psi: np.ndarray,
    grid: SpatialGrid,
    n_levels: int,
    omega: float = 1.0,
    *,
    max_loss: float = 1e-8,
    enforce: bool = True,
) -> np.ndarray:
    """Number-basis amplitudes of a grid wavefunction in the omega ladder."""
    basis = hermite_functions(grid.x, n_levels, omega)
    amps = basis @ psi * grid.dx
    loss = abs(grid.norm(psi) ** 2 - float(np.sum(np.abs(amps) ** 2)))
    if enforce and loss > max_loss:
        raise ProjectionError(
            f"projection onto {n_levels} levels (omega={omega:.6g}) lost {loss:.3e} norm (> {max_loss:.1e})"
        )
    return amps


def basis_change(omega_from: float, omega_to: float, dim: int) -> np.ndarray:
    """T[m, n] = <m_from|n_to> between oscillator ladders of two frequencies.

    A frequency rescale is a dilation, i.e. a real squeeze of magnitude
    |ln(omega_to/omega_from)|/2; amplitudes transform as c_from = T @ c_to.
    """
    lam = 0.5 * math.log(omega_to / omega_from)
    if lam == 0.0:
        return np.eye(dim, dtype=complex)
    theta = 0.0 if lam > 0 else math.pi
    return squeeze_op(SqueezeParam(abs(lam), theta), dim)


def overlap_series(
    series: TimeSeries,
    g_rate: float,
    theta: float,
    *,
    frame_omega: float,
    dim: int | None = None,
    max_loss: float = 1e-8,
) -> np.ndarray:
    """F(t) = |<xi(G t/2 e^{i theta})|psi(t)>|^2 in the frame_omega interaction picture.

    Grid snapshots are projected on oscillator eigenfunctions of
    frame_omega; Fock snapshots are rotated between ladders with the
    dilation matrix.  The frame rotation exp(+i H0 t), H0 =
    frame_omega (n + 1/2), is applied before comparing with the
    squeezed-vacuum series.
    """
    r_final = 0.5 * g_rate * series.times[-1]
    if dim is None:
        from .fock import min_dim_for_squeeze

        dim = max(64, min_dim_for_squeeze(max(r_final, 1e-6), 1e-12))
    levels = np.arange(dim) + 0.5

    if series.kind == "grid":
        basis = hermite_functions(series.grid.x, dim, frame_omega) * series.grid.dx
        to_frame = lambda psi: basis @ psi
        norm2 = lambda psi: series.grid.norm(psi) ** 2
    else:
        t_mat = basis_change(1.0, frame_omega, max(dim, series.states.shape[1]))
        t_dag = t_mat.conj().T

        def to_frame(psi):
            padded = np.zeros(t_mat.shape[0], dtype=complex)
            padded[: psi.size] = psi
            return (t_dag @ padded)[:dim]

        norm2 = lambda psi: float(np.sum(np.abs(psi) ** 2))

    out = np.zeros(series.times.size)
    for i, (t, psi) in enumerate(zip(series.times, series.states)):
        amps = to_frame(psi)
        loss = abs(norm2(psi) - float(np.sum(np.abs(amps) ** 2)))
        if loss > max_loss:
            raise ProjectionError(f"frame projection lost {loss:.3e} norm at t={t:.4g}")
        rotated = np.exp(1j * frame_omega * levels * t) * amps
        target = squeezed_state_analytic(SqueezeParam(0.5 * g_rate * t, theta), dim, tail_tol=1e-9)
        out[i] = abs(np.vdot(target.amplitudes, rotated)) ** 2
    return out


def convergence_audit(
    initial: np.ndarray,
    trap: TrapConfig,
    drive: DriveConfig,
    cfg: GridConfig,
    *,
    tolerance: float = 1e-6,
) -> float:
    """Fidelity shift of the final grid state when dt is halved.

    Returns the deficit 1 - |<psi_dt|psi_dt/2>|^2; raises if it exceeds
    tolerance (fixed-step scheme with an explicit convergence check
    instead of adaptive stepping).
    """
    coarse = propagate_grid(initial, trap, drive, cfg, stride=10**9)
    fine_cfg = GridConfig(cfg.n_points, cfg.x_max, cfg.dt / 2.0, cfg.t_final)
    fine = propagate_grid(initial, trap, drive, fine_cfg, stride=10**9)
    grid = coarse.grid
    fid = abs(np.sum(np.conj(coarse.final_state()) * fine.final_state()) * grid.dx) ** 2
    deficit = 1.0 - fid
    if deficit > tolerance:
        raise StepSizeError(
            f"halving dt moved the final state by {deficit:.3e} (> {tolerance:.1e}); step size too coarse"
        )
    return deficit
