"""Config-driven scenario runs with manifests and deterministic outputs.

A run consumes one strict JSON config, writes data files plus run.log and
manifest.json into a fresh directory, and returns the manifest.  Physical
parameters carry no defaults; numerical knobs do.  A config containing a
"sweep" block fans out into one sub-run per value (optionally across
processes) and merges per-run summaries into a keyed CSV.

Determinism: identical config + seed produce byte-identical data files and
logs; the manifest differs only in its wall-clock duration field.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__ as _library_version
from .dynamics import (
    DriveConfig,
    GridConfig,
    SpatialGrid,
    TrapConfig,
    convergence_audit,
    derive_params,
    gaussian_ground,
    overlap_series,
    project_to_fock,
    propagate_grid,
)
from .errors import ConfigError
from .fock import min_dim_for_squeeze, x_state
from .phasespace import XStateSpec, char_function_closed_form, char_function_numeric, default_axes, diagonal_zeros, wigner_from_parity
from .protocol import csqz_physical, prepare_xstate

SCENARIO_KINDS = ("derive-params", "squeeze-sim", "csqz-fidelity", "xstate", "charfun", "zeros")

_TOP_KEYS = {
    "derive-params": ({"scenario", "trap", "drive"}, {"r"}),
    "squeeze-sim": ({"scenario", "trap", "drive"}, {"target_r", "t_final", "grid", "dim", "stride", "audit", "audit_tolerance"}),
    "csqz-fidelity": ({"scenario", "trap", "drive"}, {"r", "t_final", "dim", "dt", "n_probe"}),
    "xstate": ({"scenario", "r", "mode"}, {"dim", "trap", "drive", "dt"}),
    "charfun": ({"scenario", "r", "parity"}, {"method", "quantity", "dim", "axes"}),
    "zeros": ({"scenario", "r"}, {"search_range", "scan_resolution"}),
}
_COMMON_OPTIONAL = {"rng_seed", "output", "sweep"}


def _require_keys(section: str, d: dict, required: set[str], optional: set[str]) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{section} must be an object, got {type(d).__name__}")
    unknown = set(d) - required - optional
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)} (strict parsing)")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"{section}: missing required keys {sorted(missing)}")


def _number(section: str, d: dict, key: str, default=None):
    if key not in d:
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {v!r}")
    return float(v)


def _integer(section: str, d: dict, key: str, default=None):
    if key not in d:
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{section}.{key} must be an integer, got {v!r}")
    return v


def _parse_trap(d: dict) -> TrapConfig:
    _require_keys("trap", d, {"eta_g"}, {"phi", "omega_t"})
    try:
        return TrapConfig(
            eta_g=_number("trap", d, "eta_g"),
            phi=_number("trap", d, "phi", 0.0),
            omega_t=_number("trap", d, "omega_t", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"trap: {exc}") from exc


def _parse_drive_spec(d: dict) -> dict:
    _require_keys("drive", d, {"epsilon"}, {"omega_d", "omega_d_factor", "theta"})
    if "omega_d" in d and "omega_d_factor" in d:
        raise ConfigError("drive: give omega_d or omega_d_factor, not both")
    return {
        "epsilon": _number("drive", d, "epsilon"),
        "omega_d": _number("drive", d, "omega_d"),
        "omega_d_factor": _number("drive", d, "omega_d_factor"),
        "theta": _number("drive", d, "theta", 0.0),
    }


def _resolve_drive(trap: TrapConfig, spec: dict, *, require_modulated: bool) -> DriveConfig:
    """Build the DriveConfig, resolving omega_d_factor against omega_e."""
    try:
        omega_d = spec["omega_d"]
        if spec["omega_d_factor"] is not None:
            base = derive_params(trap, DriveConfig(epsilon=spec["epsilon"])).omega_e
            omega_d = spec["omega_d_factor"] * base
        if require_modulated and omega_d is None:
            raise ConfigError("drive: this scenario needs a modulated drive (omega_d or omega_d_factor)")
        return DriveConfig(epsilon=spec["epsilon"], omega_d=omega_d, theta=spec["theta"])
    except ValueError as exc:
        raise ConfigError(f"drive: {exc}") from exc


@dataclass(frozen=True)
class SweepSpec:
    field: str
    values: list


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated run description; `raw` is the strict-parsed config echo."""

    scenario: str
    raw: dict
    rng_seed: int
    out_format: str
    sweep: SweepSpec | None

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object")
        kind = raw.get("scenario")
        if kind not in SCENARIO_KINDS:
            raise ConfigError(f"scenario must be one of {', '.join(SCENARIO_KINDS)}; got {kind!r}")
        required, optional = _TOP_KEYS[kind]
        _require_keys("config", raw, required, optional | _COMMON_OPTIONAL)

        seed = _integer("config", raw, "rng_seed", 0)
        out = raw.get("output", {})
        _require_keys("output", out, set(), {"format"})
        fmt = out.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {fmt!r}")

        sweep = None
        if "sweep" in raw:
            sw = raw["sweep"]
            _require_keys("sweep", sw, {"field", "values"}, set())
            if not isinstance(sw["field"], str) or not sw["field"]:
                raise ConfigError("sweep.field must be a non-empty key path")
            if not isinstance(sw["values"], list) or not sw["values"]:
                raise ConfigError("sweep.values must be a non-empty list")
            sweep = SweepSpec(sw["field"], list(sw["values"]))
            base = copy.deepcopy(raw)
            del base["sweep"]
            _set_path(base, sweep.field, sweep.values[0])
            cls.from_dict(base)  # every value re-validates; fail fast on the shape
        else:
            _validate_scenario_body(kind, raw)
        return cls(kind, raw, seed, fmt, sweep)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)


def _validate_scenario_body(kind: str, raw: dict) -> None:
    """Eagerly build every referenced object so bad values fail at parse time."""
    if kind in ("derive-params", "squeeze-sim", "csqz-fidelity"):
        trap = _parse_trap(raw["trap"])
        spec = _parse_drive_spec(raw["drive"])
        _resolve_drive(trap, spec, require_modulated=kind != "derive-params")
    if kind == "squeeze-sim":
        if ("target_r" in raw) == ("t_final" in raw):
            raise ConfigError("squeeze-sim: give exactly one of target_r / t_final")
        grid = raw.get("grid", {})
        _require_keys("grid", grid, set(), {"n_points", "x_max", "dt"})
    if kind == "csqz-fidelity":
        if ("r" in raw) == ("t_final" in raw):
            raise ConfigError("csqz-fidelity: give exactly one of r / t_final")
        key = "r" if "r" in raw else "t_final"
        if _number("config", raw, key) <= 0:
            raise ConfigError(f"csqz-fidelity: {key} must be > 0")
    if kind == "xstate":
        mode = raw["mode"]
        if mode not in ("ideal", "physical"):
            raise ConfigError(f"xstate: mode must be ideal or physical, got {mode!r}")
        if (_number("config", raw, "r") or 0.0) <= 0:
            raise ConfigError("xstate: r must be > 0")
        if mode == "physical":
            if "trap" not in raw or "drive" not in raw:
                raise ConfigError("xstate: physical mode requires trap and drive sections")
            trap = _parse_trap(raw["trap"])
            _resolve_drive(trap, _parse_drive_spec(raw["drive"]), require_modulated=True)
    if kind == "charfun":
        if raw["parity"] not in ("even", "odd"):
            raise ConfigError(f"charfun: parity must be even or odd, got {raw['parity']!r}")
        if raw.get("method", "closed-form") not in ("closed-form", "numeric"):
            raise ConfigError("charfun: method must be closed-form or numeric")
        if raw.get("quantity", "characteristic") not in ("characteristic", "wigner"):
            raise ConfigError("charfun: quantity must be characteristic or wigner")
        _require_keys("axes", raw.get("axes", {}), set(), {"x_max", "n_x", "p_max", "n_p"})
        try:
            XStateSpec(raw["parity"], _number("config", raw, "r"))
        except ValueError as exc:
            raise ConfigError(f"charfun: {exc}") from exc
    if kind == "zeros":
        try:
            XStateSpec("odd", _number("config", raw, "r"))
        except ValueError as exc:
            raise ConfigError(f"zeros: {exc}") from exc
        rng = raw.get("search_range")
        if rng is not None and (not isinstance(rng, list) or len(rng) != 2 or not 0 < rng[0] < rng[1]):
            raise ConfigError("zeros: search_range must be [lo, hi] with 0 < lo < hi")


def _set_path(tree: dict, path: str, value) -> None:
    keys = path.split(".")
    node = tree
    for k in keys[:-1]:
        nxt = node.setdefault(k, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"sweep.field: {path} collides with a scalar at {k!r}")
        node = nxt
    node[keys[-1]] = value


# ------------------------------------------------------------------ plumbing


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    if v is None:
        return ""
    return str(v)


def _write_table(out: Path, name: str, header: list[str], rows: list[tuple], fmt: str) -> Path:
    if fmt == "csv":
        path = out / f"{name}.csv"
        lines = [",".join(header)]
        lines += [",".join(_fmt_cell(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        path = out / f"{name}.json"
        records = [dict(zip(header, row)) for row in rows]
        path.write_text(json.dumps(records, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _py(obj):
    """Recursively convert numpy scalars/arrays for JSON emission."""
    if isinstance(obj, dict):
        return {k: _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_py(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _prepare_dir(out: Path) -> None:
    if out.exists():
        if not out.is_dir() or any(out.iterdir()):
            raise OSError(f"output directory {out} exists and is not empty")
    else:
        out.mkdir(parents=True)


# ----------------------------------------------------------------- scenarios


def _run_derive_params(cfg: ScenarioConfig, out: Path, log: list[str]) -> tuple[dict, dict | None]:
    raw = cfg.raw
    trap = _parse_trap(raw["trap"])
    drive = _resolve_drive(trap, _parse_drive_spec(raw["drive"]), require_modulated=False)
    der = derive_params(trap, drive)
    rows = [
        ("omega_e", der.omega_e),
        ("sigma_ratio", der.sigma_ratio),
        ("eta_e", der.eta_e),
        ("g_rate", der.g_rate),
    ]
    summary = {"omega_e": der.omega_e, "eta_e": der.eta_e, "g_rate": der.g_rate}
    if "r" in raw:
        duration = der.time_for_r(_number("config", raw, "r"))
        rows.append(("duration_for_r", duration))
        summary["duration_for_r"] = duration
    _write_table(out, "derived", ["quantity", "value"], rows, cfg.out_format)
    log.append("stage: derive")
    return summary, None


def _run_squeeze_sim(cfg: ScenarioConfig, out: Path, log: list[str]) -> tuple[dict, dict | None]:
    raw = cfg.raw
    trap = _parse_trap(raw["trap"])
    drive = _resolve_drive(trap, _parse_drive_spec(raw["drive"]), require_modulated=True)
    der = derive_params(trap, drive)
    t_final = _number("config", raw, "t_final") or der.time_for_r(_number("config", raw, "target_r"))

    gsec = raw.get("grid", {})
    n_points = _integer("grid", gsec, "n_points", 1024)
    x_max = _number("grid", gsec, "x_max", 10.0)
    dt = _number("grid", gsec, "dt", drive.period / 200.0)
    try:
        grid_cfg = GridConfig(n_points, x_max, dt, t_final)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    stride = _integer("config", raw, "stride", max(1, round(t_final / dt / 200)))

    grid = SpatialGrid.from_config(grid_cfg)
    initial = gaussian_ground(grid, omega=trap.omega_t)
    log.append(f"stage: propagate n_points={n_points} dt={dt:.17g} t_final={t_final:.17g}")
    series = propagate_grid(initial, trap, drive, grid_cfg, stride=stride)

    dim = _integer("config", raw, "dim", None)
    overlaps = overlap_series(series, der.g_rate, drive.theta, frame_omega=der.omega_e, dim=dim)
    r_values = 0.5 * der.g_rate * series.times
    _write_table(
        out,
        "overlap",
        ["time", "r_target", "overlap"],
        list(zip(series.times.tolist(), r_values.tolist(), overlaps.tolist())),
        cfg.out_format,
    )

    n_levels = dim or max(64, min_dim_for_squeeze(max(r_values[-1], 1e-6), 1e-12))
    amps = project_to_fock(series.final_state(), grid, n_levels, der.omega_e, max_loss=1e-6)
    pops = np.abs(amps) ** 2
    _write_table(
        out,
        "phonon_final",
        ["level", "probability"],
        list(zip(range(n_levels), pops.tolist())),
        cfg.out_format,
    )

    convergence = None
    if raw.get("audit", True):
        tol = _number("config", raw, "audit_tolerance", 1e-5)
        horizon = min(t_final, 20.0 * drive.period)
        audit_cfg = GridConfig(n_points, x_max, dt, horizon)
        deficit = convergence_audit(initial, trap, drive, audit_cfg, tolerance=tol)
        convergence = {"deficit": deficit, "t_final": horizon, "dt": dt, "tolerance": tol}
        log.append(f"stage: audit deficit={deficit:.3e}")

    summary = {
        "final_overlap": float(overlaps[-1]),
        "min_overlap": float(np.min(overlaps)),
        "final_r": float(r_values[-1]),
    }
    return summary, convergence


def _run_csqz_fidelity(cfg: ScenarioConfig, out: Path, log: list[str]) -> tuple[dict, dict | None]:
    raw = cfg.raw
    trap = _parse_trap(raw["trap"])
    drive = _resolve_drive(trap, _parse_drive_spec(raw["drive"]), require_modulated=True)
    der = derive_params(trap, drive)
    t_final = _number("config", raw, "t_final") or der.time_for_r(_number("config", raw, "r"))
    r_eff = 0.5 * der.g_rate * t_final
    dim = _integer("config", raw, "dim", max(96, 2 * min_dim_for_squeeze(max(r_eff, 0.1), 1e-12)))
    n_probe = _integer("config", raw, "n_probe", 4)
    log.append(f"stage: gate dim={dim} n_probe={n_probe} t_final={t_final:.17g}")
    report = csqz_physical(trap, drive, t_final, dim, dt=_number("config", raw, "dt"), n_probe=n_probe)
    _write_table(
        out,
        "gate_columns",
        ["column", "fidelity"],
        list(zip(range(n_probe), report.column_fidelities.tolist())),
        cfg.out_format,
    )
    summary = {
        "fidelity": report.fidelity,
        "fidelity_frame_optimized": report.fidelity_frame_optimized,
        "duration": report.duration,
        "r": r_eff,
    }
    return summary, None


def _run_xstate(cfg: ScenarioConfig, out: Path, log: list[str]) -> tuple[dict, dict | None]:
    raw = cfg.raw
    r = _number("config", raw, "r")
    mode = raw["mode"]
    dim = _integer("config", raw, "dim", max(64, min_dim_for_squeeze(r, 1e-12)))
    kwargs = {}
    if mode == "physical":
        trap = _parse_trap(raw["trap"])
        kwargs["trap"] = trap
        kwargs["drive"] = _resolve_drive(trap, _parse_drive_spec(raw["drive"]), require_modulated=True)
        kwargs["dt"] = _number("config", raw, "dt")
    log.append(f"stage: sequence mode={mode} r={r:.17g} dim={dim} seed={cfg.rng_seed}")
    outcome = prepare_xstate(r, dim, mode, cfg.rng_seed, with_transcript=True, **kwargs)

    pops = outcome.post_state.phonon_distribution()
    _write_table(
        out,
        "populations",
        ["level", "probability"],
        list(zip(range(pops.size), pops.tolist())),
        cfg.out_format,
    )
    record = {
        "branch": outcome.branch,
        "probability": outcome.probability,
        "frame": outcome.frame_tag,
        "rng_seed": cfg.rng_seed,
        "dim": dim,
        "transcript": outcome.transcript,
    }
    (out / "outcome.json").write_text(json.dumps(_py(record), sort_keys=True, indent=2) + "\n", encoding="utf-8")

    fids = outcome.transcript["fidelity"][outcome.branch]
    summary = {
        "branch": outcome.branch,
        "probability": float(outcome.probability),
        "even_probability": float(outcome.probability if outcome.branch == "e" else 1.0 - outcome.probability),
        "fidelity_raw": fids["raw"],
        "fidelity_frame_optimized": fids["frame_optimized"],
    }
    return summary, None


def _run_charfun(cfg: ScenarioConfig, out: Path, log: list[str]) -> tuple[dict, dict | None]:
    raw = cfg.raw
    r = _number("config", raw, "r")
    parity = raw["parity"]
    method = raw.get("method", "closed-form")
    quantity = raw.get("quantity", "characteristic")
    spec = XStateSpec(parity, r)

    axes_cfg = raw.get("axes", {})
    def_x, def_p = default_axes(r)
    x_max = _number("axes", axes_cfg, "x_max", float(def_x[-1]))
    n_x = _integer("axes", axes_cfg, "n_x", def_x.size)
    p_max = _number("axes", axes_cfg, "p_max", float(def_p[-1]))
    n_p = _integer("axes", axes_cfg, "n_p", def_p.size)
    axes = (np.linspace(-x_max, x_max, n_x), np.linspace(-p_max, p_max, n_p))

    log.append(f"stage: evaluate {quantity} method={method} parity={parity} r={r:.17g}")
    if quantity == "wigner":
        if method == "numeric":
            dim = _integer("config", raw, "dim", max(256, min_dim_for_squeeze(r, 1e-12)))
            grid_obj = wigner_from_parity(x_state(parity, r, dim, tail_tol=1e-9), axes)
        else:
            grid_obj = wigner_from_parity(spec, axes)
    elif method == "numeric":
        dim = _integer("config", raw, "dim", max(256, min_dim_for_squeeze(r, 1e-12)))
        grid_obj = char_function_numeric(x_state(parity, r, dim, tail_tol=1e-9), axes)
    else:
        grid_obj = char_function_closed_form(spec, axes)

    if cfg.out_format == "csv":
        grid_obj.to_csv(out / "grid.csv")
    else:
        (out / "grid.json").write_text(grid_obj.to_json() + "\n", encoding="utf-8")

    real_vals = grid_obj.values.real
    summary = {
        "origin": float(abs(grid_obj.origin_value())) if grid_obj.origin_value() is not None else None,
        "min_real": float(np.min(real_vals)),
        "max_real": float(np.max(real_vals)),
        "negative_fraction": float(np.mean(real_vals < 0.0)),
    }
    return summary, None


def _run_zeros(cfg: ScenarioConfig, out: Path, log: list[str]) -> tuple[dict, dict | None]:
    raw = cfg.raw
    r = _number("config", raw, "r")
    spec = XStateSpec("odd", r)
    search = raw.get("search_range")
    kwargs = {}
    if search is not None:
        kwargs["search_range"] = (float(search[0]), float(search[1]))
    if "scan_resolution" in raw:
        kwargs["scan_resolution"] = _number("config", raw, "scan_resolution")
    log.append(f"stage: scan r={r:.17g}")
    zeros = diagonal_zeros(spec, **kwargs)
    rows = [(k, float(x * x), float(x)) for k, x in enumerate(zeros)]
    _write_table(out, "zeros", ["index", "u", "x"], rows, cfg.out_format)
    asymptote = r * math.exp(-2.0 * r)
    summary = {
        "count": int(zeros.size),
        "first_x": float(zeros[0]) if zeros.size else None,
        "first_u": float(zeros[0] ** 2) if zeros.size else None,
        "asymptote_ratio": float(zeros[0] ** 2 / asymptote) if zeros.size else None,
    }
    return summary, None


_SCENARIOS = {
    "derive-params": _run_derive_params,
    "squeeze-sim": _run_squeeze_sim,
    "csqz-fidelity": _run_csqz_fidelity,
    "xstate": _run_xstate,
    "charfun": _run_charfun,
    "zeros": _run_zeros,
}


# ------------------------------------------------------------------- running


def execute_run(cfg: ScenarioConfig, out_dir, workers: int = 1) -> dict:
    """Run one scenario (or a sweep) into a fresh directory; returns the manifest."""
    out = Path(out_dir)
    _prepare_dir(out)
    if cfg.sweep is not None:
        return _execute_sweep(cfg, out, workers)
    started = time.perf_counter()
    log = [f"scenario: {cfg.scenario}"]
    summary, convergence = _SCENARIOS[cfg.scenario](cfg, out, log)
    log.append("status: ok")
    (out / "run.log").write_text("\n".join(log) + "\n", encoding="utf-8")
    return _write_manifest(out, cfg.raw, summary, convergence, time.perf_counter() - started)


def _write_manifest(out: Path, raw: dict, summary: dict, convergence, duration: float) -> dict:
    outputs = {
        p.name: _digest(p)
        for p in sorted(out.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    manifest = {
        "config": raw,
        "library_version": _library_version,
        "duration_s": duration,
        "convergence": _py(convergence),
        "outputs": outputs,
        "summary": _py(summary),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return manifest


def _sweep_child(packed: tuple[int, dict, str]) -> tuple[int, str, dict | None, str | None]:
    idx, raw, out_dir = packed
    try:
        child_cfg = ScenarioConfig.from_dict(raw)
        manifest = execute_run(child_cfg, Path(out_dir))
        return idx, "ok", manifest["summary"], None
    except Exception as exc:  # noqa: BLE001 - failure markers keep the sweep going
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "error.txt").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        return idx, f"error:{type(exc).__name__}", None, str(exc)


def _execute_sweep(cfg: ScenarioConfig, out: Path, workers: int) -> dict:
    started = time.perf_counter()
    sweep = cfg.sweep
    jobs = []
    for i, value in enumerate(sweep.values):
        raw = copy.deepcopy(cfg.raw)
        del raw["sweep"]
        _set_path(raw, sweep.field, value)
        jobs.append((i, raw, str(out / f"sweep_{i:03d}")))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_child, jobs))
    else:
        results = [_sweep_child(j) for j in jobs]
    results.sort(key=lambda t: t[0])

    keys = sorted({k for _, status, summ, _ in results if summ for k in summ})
    header = ["index", sweep.field, "status", *keys]
    rows = []
    log = [f"scenario: sweep over {sweep.field} ({cfg.scenario})"]
    n_ok = 0
    for (i, status, summ, err), value in zip(results, sweep.values):
        rows.append((i, value, status, *[None if summ is None else summ.get(k) for k in keys]))
        log.append(f"sub-run {i:03d}: {status}" + (f" ({err})" if err else ""))
        n_ok += status == "ok"
    _write_table(out, "summary", header, rows, "csv")
    log.append("status: ok" if n_ok == len(results) else f"status: {len(results) - n_ok} sub-run(s) failed")
    (out / "run.log").write_text("\n".join(log) + "\n", encoding="utf-8")
    summary = {"n_values": len(results), "n_ok": n_ok, "n_failed": len(results) - n_ok}
    return _write_manifest(out, cfg.raw, summary, None, time.perf_counter() - started)
