"""Propagators, derived parameters and RWA comparisons.

Regression floors marked "frozen" were produced by converged runs of
this package's own solvers (dt-halving shifts them by < 2e-4; the two
independent solvers agree to ~1e-6 fidelity on the same scenarios).
"""

import math

import numpy as np
import pytest

from ionsqueeze.dynamics import (
    DriveConfig,
    GridConfig,
    SpatialGrid,
    TrapConfig,
    basis_change,
    convergence_audit,
    derive_params,
    drive_amplitude,
    gaussian_ground,
    hermite_functions,
    lattice_matrix,
    potential_full,
    project_to_fock,
    propagate_fock,
    propagate_grid,
    overlap_series,
    rwa_propagator,
    xi_from_drive,
)
from ionsqueeze.errors import BoundaryLeakError, ProjectionError, TailLeakError
from ionsqueeze.fock import (
    MotionalState,
    SqueezeParam,
    squeeze_op,
    squeezed_state_analytic,
    vacuum,
)

ETA = 0.02
TRAP = TrapConfig(eta_g=ETA)
# dressed frequency for eta_g=0.02, eps=1: sqrt(1.04)
OMEGA_E = 1.019803902718557
G_RATE = 0.0196116135138184
T_R1 = 101.98039027185571


def resonant_drive() -> DriveConfig:
    return DriveConfig(epsilon=1.0, omega_d=2 * OMEGA_E, theta=0.0)


def test_derive_params_lattice_off():
    der = derive_params(TRAP, DriveConfig(epsilon=0.0, omega_d=2.0))
    assert der.omega_e == 1.0
    assert der.eta_e == ETA
    assert der.g_rate == 0.0


def test_derive_params_frozen_values():
    der = derive_params(TRAP, resonant_drive())
    assert der.omega_e == pytest.approx(OMEGA_E, abs=1e-12)
    assert der.sigma_ratio == pytest.approx(1 / math.sqrt(OMEGA_E), abs=1e-12)
    assert der.eta_e == pytest.approx(ETA / OMEGA_E, abs=1e-12)
    assert der.g_rate == der.eta_e * 1.0
    assert der.time_for_r(1.0) == pytest.approx(T_R1, abs=1e-9)
    # invariants
    assert der.omega_e >= TRAP.omega_t
    assert der.eta_e <= TRAP.eta_g


def test_config_validation():
    with pytest.raises(ValueError):
        TrapConfig(eta_g=0.0)
    with pytest.raises(ValueError):
        TrapConfig(eta_g=1.5)
    with pytest.raises(ValueError):
        TrapConfig(eta_g=0.02, omega_t=0.0)
    with pytest.raises(ValueError):
        DriveConfig(epsilon=-0.1)
    with pytest.raises(ValueError):
        DriveConfig(epsilon=1.0, omega_d=0.0)
    with pytest.raises(ValueError):
        GridConfig(100, 8.0, 0.01, 1.0)
    with pytest.raises(ValueError):
        GridConfig(1000, 8.0, 0.01, 1.0)  # not a power of two


def test_potential_harmonic_when_lattice_off():
    v = potential_full(TRAP, DriveConfig(epsilon=0.0), t=0.3)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(v(x), 0.5 * x**2, atol=1e-14)


def test_potential_quadratic_coefficient():
    drive = resonant_drive()
    t = 0.37
    v = potential_full(TRAP, drive, t)
    v0 = 1.0 - math.sin(drive.omega_d * t - drive.theta)
    # curvature at the origin: 1/2 + eta_g * v0(t)
    h = 1e-4
    curv = (v(h) - 2 * v(0.0) + v(-h)) / h**2 / 2.0
    assert curv == pytest.approx(0.5 + ETA * v0, abs=1e-6)


def test_potential_phase_offset_crest():
    v = potential_full(TrapConfig(eta_g=ETA, phi=math.pi / 2), DriveConfig(epsilon=1.0), t=0.0)
    assert v(np.array([0.0]))[0] == pytest.approx(1.0)  # lattice maximal at x=0


def test_drive_amplitude_static_and_modulated():
    assert drive_amplitude(DriveConfig(epsilon=0.7), 12.3) == pytest.approx(0.7)
    d = resonant_drive()
    t = np.array([0.0, d.period / 4])
    np.testing.assert_allclose(drive_amplitude(d, t), [1.0, 0.0], atol=1e-12)


def test_grid_ground_stationary_without_lattice():
    cfg = GridConfig(512, 8.0, 0.01, 2 * math.pi)
    grid = SpatialGrid.from_config(cfg)
    psi0 = gaussian_ground(grid, 1.0)
    ts = propagate_grid(psi0, TRAP, DriveConfig(epsilon=0.0), cfg, stride=10**9)
    fid = abs(np.sum(np.conj(psi0) * ts.final_state()) * grid.dx) ** 2
    assert fid > 1 - 1e-8
    assert ts.norm_defect.max() < 1e-10


def test_grid_static_dressed_ground_stationary():
    # static lattice at full depth; harmonic dressed ground stays put to 1e-6
    cfg = GridConfig(1024, 10.0, 0.03, 10 * 2 * math.pi)
    grid = SpatialGrid.from_config(cfg)
    psi0 = gaussian_ground(grid, OMEGA_E)
    ts = propagate_grid(psi0, TRAP, DriveConfig(epsilon=1.0), cfg, stride=50)
    ovl = np.array([abs(np.sum(np.conj(psi0) * s) * grid.dx) ** 2 for s in ts.states])
    assert ovl.min() > 1 - 1e-6


def test_boundary_leak_raises_on_narrow_grid():
    cfg = GridConfig(256, 4.0, resonant_drive().period / 100, T_R1)
    grid = SpatialGrid.from_config(cfg)
    with pytest.raises(BoundaryLeakError):
        propagate_grid(gaussian_ground(grid, OMEGA_E), TRAP, resonant_drive(), cfg, stride=100)


def test_fock_vacuum_invariant_without_lattice():
    ts = propagate_fock(vacuum(32), TRAP, DriveConfig(epsilon=0.0), 0.05, 10.0, stride=20)
    pops = np.abs(ts.final_state()) ** 2
    assert pops[0] == pytest.approx(1.0, abs=1e-12)


def test_fock_tail_leak_raises():
    drive = resonant_drive()
    with pytest.raises(TailLeakError):
        propagate_fock(vacuum(24), TRAP, drive, drive.period / 100, T_R1, stride=100)


def test_cross_solver_fidelity_short_squeeze():
    # r = 0.3 variant of the resonant scenario, both solvers at matched dt
    drive = resonant_drive()
    der = derive_params(TRAP, drive)
    t_end = der.time_for_r(0.3)
    dt = drive.period / 200
    cfg = GridConfig(1024, 12.0, dt, t_end)
    grid = SpatialGrid.from_config(cfg)
    ts_g = propagate_grid(gaussian_ground(grid, OMEGA_E), TRAP, drive, cfg, stride=10**9)
    dim = 128
    init = MotionalState(basis_change(1.0, OMEGA_E, dim)[:, 0])
    ts_f = propagate_fock(init, TRAP, drive, dt, t_end, stride=10**9)
    amps_g = project_to_fock(ts_g.final_state(), grid, dim, 1.0)
    fid = abs(np.vdot(amps_g, ts_f.final_state())) ** 2
    assert 1.0 - fid < 1e-6


def test_grid_convergence_second_order():
    drive = resonant_drive()
    t_end = 4 * drive.period
    cfg_ref = GridConfig(512, 8.0, drive.period / 640, t_end)
    grid = SpatialGrid.from_config(cfg_ref)
    psi0 = gaussian_ground(grid, OMEGA_E)
    ref = propagate_grid(psi0, TRAP, drive, cfg_ref, stride=10**9).final_state()
    errs = []
    for div in (40, 80):
        cfg = GridConfig(512, 8.0, drive.period / div, t_end)
        out = propagate_grid(psi0, TRAP, drive, cfg, stride=10**9).final_state()
        errs.append(np.sqrt(np.sum(np.abs(out - ref) ** 2) * grid.dx))
    assert 3.0 < errs[0] / errs[1] < 5.5  # frozen observed ratio 4.05


def test_fock_convergence_fourth_order():
    drive = resonant_drive()
    t_end = 4 * drive.period
    init = MotionalState(basis_change(1.0, OMEGA_E, 128)[:, 0])
    ref = propagate_fock(init, TRAP, drive, drive.period / 160, t_end, stride=10**9).final_state()
    errs = []
    for div in (10, 20):
        out = propagate_fock(init, TRAP, drive, drive.period / div, t_end, stride=10**9).final_state()
        errs.append(np.linalg.norm(out - ref))
    assert 10.0 < errs[0] / errs[1] < 24.0  # frozen observed ratio 15.8


def test_rwa_propagator_semantics():
    assert np.allclose(rwa_propagator(xi_from_drive(0.02, 0.0), 32), np.eye(32))
    want = squeeze_op(SqueezeParam(1.0, 0.0), 64)
    got = rwa_propagator(xi_from_drive(0.02, 100.0, 0.0), 64)
    assert np.max(np.abs(got - want)) < 1e-13


def test_rwa_inversion_phase():
    # theta + pi inverts exactly for any theta
    dim = 128
    u = rwa_propagator(SqueezeParam(0.8, 0.7), dim)
    v = rwa_propagator(SqueezeParam(0.8, 0.7 + math.pi), dim)
    prod = v @ u
    assert np.max(np.abs(prod[:96, :96] - np.eye(96))) < 1e-9
    # the pi - theta recipe fixes |0> at theta = 0 ...
    u0 = rwa_propagator(SqueezeParam(0.8, 0.0), dim)
    v0 = rwa_propagator(SqueezeParam(0.8, math.pi - 0.0), dim)
    out = v0 @ (u0 @ vacuum(dim).amplitudes)
    assert abs(abs(out[0]) ** 2 - 1.0) < 1e-8
    # ... but not at a generic phase: the composite leaves |0> squeezed
    u7 = rwa_propagator(SqueezeParam(0.8, 0.7), dim)
    v7 = rwa_propagator(SqueezeParam(0.8, math.pi - 0.7), dim)
    out7 = v7 @ (u7 @ vacuum(dim).amplitudes)
    assert abs(out7[0]) ** 2 < 0.9


def test_overlap_series_trivial_cases():
    cfg = GridConfig(256, 8.0, 0.05, 5.0)
    grid = SpatialGrid.from_config(cfg)
    ts = propagate_grid(gaussian_ground(grid, 1.0), TRAP, DriveConfig(epsilon=0.0), cfg, stride=20)
    f = overlap_series(ts, 0.0, 0.0, frame_omega=1.0, dim=64)
    assert f[0] == pytest.approx(1.0, abs=1e-10)
    assert np.all(f > 1 - 1e-6)  # split-operator dt^2 error only


def test_resonant_squeeze_overlap_frozen_floor():
    """Resonant scenario at the paper-calibrated eta: overlap stays >= 0.99.

    At eta_g = 0.0065 (the value that puts r = 1 near 100 driving
    periods) the full-lattice run keeps F >= 0.9973; the lattice quartic
    grows as eta^2, which is why the 0.02 default in the acceptance
    scenario lands lower (see test_acceptance).
    """
    trap = TrapConfig(eta_g=0.0065)
    der = derive_params(trap, DriveConfig(epsilon=1.0, omega_d=1.0))
    drive = DriveConfig(epsilon=1.0, omega_d=2 * der.omega_e, theta=0.0)
    cfg = GridConfig(1024, 10.0 * math.e, drive.period / 200, der.time_for_r(1.0))
    grid = SpatialGrid.from_config(cfg)
    ts = propagate_grid(gaussian_ground(grid, der.omega_e), trap, drive, cfg, stride=40)
    f = overlap_series(ts, der.g_rate, 0.0, frame_omega=der.omega_e)
    assert der.time_for_r(1.0) / drive.period == pytest.approx(99.2, abs=0.3)
    assert f.min() >= 0.99
    assert f.min() == pytest.approx(0.997318, abs=1e-4)  # frozen


def test_quadratic_lattice_tracks_rwa():
    # with the lattice truncated at quadratic order only the counter-rotating
    # terms break the RWA: overlap with S(Gt/2)|0> stays above 0.999 to r=1
    drive = resonant_drive()
    der = derive_params(TRAP, drive)
    init = MotionalState(basis_change(1.0, OMEGA_E, 320)[:, 0])
    ts = propagate_fock(
        init, TRAP, drive, drive.period / 200, der.time_for_r(1.0),
        stride=400, lattice="quadratic", tail_tol=1e-6,
    )
    f = overlap_series(ts, der.g_rate, 0.0, frame_omega=OMEGA_E)
    assert f.min() > 0.999


def test_phi_offset_degrades_overlap():
    # lattice phase error at the 2%-of-a-period scale: frozen regression floor
    drive = resonant_drive()
    der = derive_params(TRAP, drive)
    results = {}
    for phi in (0.0, 0.02 * 2 * math.pi):
        trap = TrapConfig(eta_g=ETA, phi=phi)
        cfg = GridConfig(1024, 10.0 * math.e, drive.period / 200, der.time_for_r(1.0))
        grid = SpatialGrid.from_config(cfg)
        ts = propagate_grid(gaussian_ground(grid, OMEGA_E), trap, drive, cfg, stride=200)
        results[phi] = overlap_series(ts, der.g_rate, 0.0, frame_omega=OMEGA_E).min()
    assert results[0.02 * 2 * math.pi] < results[0.0]
    assert results[0.02 * 2 * math.pi] == pytest.approx(0.96816911, abs=1e-4)  # frozen


def test_frame_interchange_deficit_small():
    # |xi> built on the e-ladder vs the g-ladder: deficit well under O(eta)
    deficits = {}
    for eta in (0.02, 0.01):
        trap = TrapConfig(eta_g=eta)
        der = derive_params(trap, DriveConfig(epsilon=1.0, omega_d=1.0))
        t_mat = basis_change(1.0, der.omega_e, 256)
        c = squeezed_state_analytic(SqueezeParam(1.0), 256, tail_tol=1e-8).amplitudes
        deficits[eta] = 1 - abs(np.vdot(t_mat @ c, c)) ** 2
        assert deficits[eta] < eta
    # scaling is quadratic in eta (ratio ~4), comfortably inside the O(eta) bound
    assert 2.5 < deficits[0.02] / deficits[0.01] < 5.5


def test_hermite_functions_orthonormal():
    grid = SpatialGrid.from_config(GridConfig(2048, 20.0, 0.01, 0.01))
    basis = hermite_functions(grid.x, 64, 1.3)
    gram = (basis * grid.dx) @ basis.T
    assert np.max(np.abs(gram - np.eye(64))) < 1e-10


def test_project_to_fock_loss_enforced():
    grid = SpatialGrid.from_config(GridConfig(2048, 20.0, 0.01, 0.01))
    st = squeezed_state_analytic(SqueezeParam(1.0), 128)
    psi = hermite_functions(grid.x, 128, 1.0).T @ st.amplitudes
    amps = project_to_fock(psi, grid, 128, 1.0)
    assert np.max(np.abs(amps - st.amplitudes)) < 1e-10
    with pytest.raises(ProjectionError):
        project_to_fock(psi, grid, 16, 1.0)


def test_basis_change_identity_and_unitarity():
    assert np.allclose(basis_change(1.0, 1.0, 16), np.eye(16))
    t_mat = basis_change(1.0, OMEGA_E, 96)
    gram = t_mat.conj().T @ t_mat
    assert np.max(np.abs(gram[:64, :64] - np.eye(64))) < 1e-10
    # round trip
    back = basis_change(OMEGA_E, 1.0, 96)
    assert np.max(np.abs((back @ t_mat)[:64, :64] - np.eye(64))) < 1e-10


def test_basis_change_matches_grid_projection():
    grid = SpatialGrid.from_config(GridConfig(2048, 30.0, 0.01, 0.01))
    t_mat = basis_change(1.0, OMEGA_E, 64)
    bg = hermite_functions(grid.x, 64, 1.0)
    be = hermite_functions(grid.x, 64, OMEGA_E)
    t_ref = (bg * grid.dx) @ be.T
    assert np.max(np.abs(t_mat[:48, :48] - t_ref[:48, :48])) < 1e-12


def test_convergence_audit_passes_on_fine_step():
    drive = resonant_drive()
    cfg = GridConfig(512, 8.0, drive.period / 200, 2 * drive.period)
    grid = SpatialGrid.from_config(cfg)
    deficit = convergence_audit(gaussian_ground(grid, OMEGA_E), TRAP, drive, cfg, tolerance=1e-6)
    assert deficit < 1e-6


def test_lattice_matrix_hermitian_and_bounded():
    m = lattice_matrix(TRAP, 64)
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    evals = np.linalg.eigvalsh(m)
    assert evals.min() > -1e-10 and evals.max() < 1.0 + 1e-10
