"""Experiment orchestration behind the ``polarwalk`` command line.

Each ``run_*`` function takes a :class:`RunConfig`, writes its artifacts
into ``config.output_dir`` and returns a JSON-serialisable report.  Data
artifacts are deterministic; wall-clock timings are kept in separate
``*timing*`` files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import geometry as geo
from .dumps import grid_dict, read_field, write_field, write_json
from .em import (
    ZERO_POTENTIAL,
    PotentialSpec,
    UniformMagneticSpec,
    angular_ripple_potential,
    load_potential_csv,
    step_em,
    uniform_b_potential,
)
from .landau import (
    LandauSpec,
    eigenstate_field,
    make_landau_spec,
    normalization_quadrature_check,
    ode_residual,
)
from .observables import (
    AuditReport,
    angular_momentum,
    audit_row,
    even_mode_energy_fraction,
)
from .spinor import (
    PolarGrid,
    SpinorField,
    grid_for_radius,
    inner_product,
    l1_distance,
    make_grid,
    random_antiperiodic_field,
    sample_field,
)
from .walk import BOUNDARIES, WalkParams

log = logging.getLogger(__name__)

THREADS_ENV = "POLARWALK_THREADS"
CONVERGENCE_FORMAT = "polarwalk.convergence/1"


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (exit code 2)."""


class ToleranceError(RuntimeError):
    """A numerical check failed (exit code 3)."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


@dataclass
class RunConfig:
    n_theta: int = 128
    r_min: float = 1.0
    n_r: Optional[int] = 128
    r_max: Optional[float] = None
    mass: float = 0.0
    boundary: str = "periodic"
    potential: dict = field(default_factory=lambda: {"preset": "none"})
    potential_time: str = "post"
    initial: dict = field(default_factory=lambda: {"kind": "random", "seed": 0})
    landau: dict = field(default_factory=lambda: {"n": 1, "alpha": 5, "beta": 0.1, "mass": 1.0})
    steps: int = 100
    dump_every: int = 0
    output_dir: str = "polarwalk-out"
    tau: str = "2eps"
    n_theta_list: List[int] = field(default_factory=lambda: [64, 128, 256, 512])
    j_tolerance: float = 1e-10
    plot: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}")
        if self.tau not in ("eps", "2eps"):
            raise ConfigError("tau must be 'eps' or '2eps'")
        if self.potential_time not in ("pre", "post"):
            raise ConfigError("potential_time must be 'pre' or 'post'")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ConfigError("steps must be a non-negative integer")
        if self.dump_every < 0:
            raise ConfigError("dump_every must be >= 0")
        for n in self.n_theta_list:
            if int(n) != n or n % 2 or n < 8:
                raise ConfigError(f"n_theta_list entries must be even integers >= 8, got {n}")
        try:
            self.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        table = self.potential.get("table")
        if table is not None and not Path(table).is_file():
            raise ConfigError(f"potential table {table} not found")
        if self.initial.get("kind") == "dump" and not Path(self.initial.get("path", "")).is_file():
            raise ConfigError(f"initial dump {self.initial.get('path')} not found")

    def grid(self, n_theta: int | None = None) -> PolarGrid:
        n_theta = self.n_theta if n_theta is None else n_theta
        if self.r_max is not None:
            return grid_for_radius(n_theta, self.r_min, self.r_max)
        if self.n_r is None:
            raise ConfigError("either n_r or r_max must be given")
        return make_grid(n_theta, self.r_min, self.n_r)

    def landau_spec(self) -> LandauSpec:
        try:
            return make_landau_spec(**self.landau)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid landau parameters: {exc}") from exc

    def tau_value(self, eps: float) -> float:
        return 2.0 * eps if self.tau == "2eps" else eps


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def build_potential(cfg: RunConfig, grid: PolarGrid) -> PotentialSpec:
    pot = cfg.potential
    if "table" in pot:
        try:
            return load_potential_csv(pot["table"], grid.n_r, grid.n_theta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    preset = pot.get("preset", "none")
    if preset == "none":
        return ZERO_POTENTIAL
    if preset == "uniform-b":
        beta = pot.get("beta", cfg.landau.get("beta"))
        try:
            return uniform_b_potential(UniformMagneticSpec(float(beta)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"uniform-b preset: {exc}") from exc
    if preset == "angular-ripple":
        return angular_ripple_potential(float(pot.get("amplitude", 0.5)))
    raise ConfigError(f"unknown potential preset {preset!r}")


def _mode_packet(grid: PolarGrid, spec: dict) -> SpinorField:
    modes = spec.get("modes", [0.5])
    r0 = float(spec.get("r0", grid.r_min + 0.5 * (grid.r_max - grid.r_min)))
    width = float(spec.get("width", 0.1 * (grid.r_max - grid.r_min)))
    spinor = spec.get("spinor", [1.0, 0.0])
    for k in modes:
        if not float(2 * k).is_integer():
            raise ConfigError(f"mode {k} is not a multiple of 1/2")

    def f(r, th):
        env = np.exp(-0.5 * ((r - r0) / width) ** 2)
        ang = sum(np.exp(1j * k * th) for k in modes)
        return spinor[0] * env * ang, spinor[1] * env * ang

    return sample_field(grid, f).normalized()


def build_initial(cfg: RunConfig, grid: PolarGrid) -> SpinorField:
    init = cfg.initial
    kind = init.get("kind", "random")
    if kind == "landau":
        return eigenstate_field(grid, cfg.landau_spec())
    if kind == "random":
        rng = np.random.default_rng(int(init.get("seed", 0)))
        support = init.get("r_support")
        return random_antiperiodic_field(grid, rng, init.get("max_mode"),
                                         tuple(support) if support else None)
    if kind == "mode-packet":
        return _mode_packet(grid, init)
    if kind == "dump":
        try:
            f = read_field(init["path"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load initial dump: {exc}") from exc
        if f.grid != grid:
            raise ConfigError("initial dump grid differs from configured grid")
        return f
    raise ConfigError(f"unknown initial-state kind {kind!r}")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def evolve(field: SpinorField, params: WalkParams, pot: PotentialSpec, steps: int,
           potential_time: str = "post", callback=None) -> SpinorField:
    """Run ``steps`` coupled steps, calling ``callback(step, field)`` after each."""
    eps = params.grid.eps
    for s in range(steps):
        field = step_em(field, params, pot, t=2.0 * eps * s, potential_time=potential_time)
        if callback is not None:
            callback(s + 1, field)
    return field


def run_evolve(cfg: RunConfig, dumps: bool = True, name: str = "evolve") -> dict:
    grid = cfg.grid()
    params = WalkParams(grid, cfg.mass, cfg.boundary)
    pot = build_potential(cfg, grid)
    f0 = build_initial(cfg, grid)
    out = _outdir(cfg)
    report = AuditReport([audit_row(0, f0)])
    if dumps:
        write_field(out / "field_000000.bin", f0)

    def record(step, f):
        report.rows.append(audit_row(step, f))
        if dumps and cfg.dump_every and step % cfg.dump_every == 0:
            write_field(out / f"field_{step:06d}.bin", f)

    final = evolve(f0, params, pot, cfg.steps, cfg.potential_time, record)
    if dumps:
        write_field(out / "field_final.bin", final)
    report.write_csv(out / "audit.csv")
    if cfg.plot and len(report.rows) > 1:
        from .plotting import plot_audit

        plot_audit([r.step for r in report.rows], [r.norm for r in report.rows],
                   [r.J_expectation for r in report.rows],
                   [r.even_mode_fraction for r in report.rows], out / "audit.png")
    summary = {
        "command": name,
        "grid": grid_dict(grid),
        "potential": pot.name,
        "axisymmetric": pot.axisymmetric,
        "boundary": cfg.boundary,
        "steps": cfg.steps,
        **report.summary(),
    }
    write_json(out / f"{name}.json", summary)
    return summary


def run_momentum_audit(cfg: RunConfig) -> dict:
    summary = run_evolve(cfg, dumps=False, name="momentum-audit")
    if summary["axisymmetric"] and cfg.boundary == "periodic":
        summary["J_conserved"] = summary["J_drift"] < cfg.j_tolerance
        write_json(Path(cfg.output_dir) / "momentum-audit.json", summary)
        if not summary["J_conserved"]:
            raise ToleranceError(
                f"<J> drift {summary['J_drift']:.3e} exceeds {cfg.j_tolerance:.1e}", summary
            )
    return summary


@dataclass
class ConvergenceRow:
    n_theta: int
    eps: float
    delta: float
    fidelity_deviation: float
    delta_other_tau: float
    runtime: float = 0.0


def one_step_errors(grid: PolarGrid, spec: LandauSpec, tau_factor: float = 2.0,
                    potential_time: str = "post"):
    """One uniform-B walk step from the eigenstate; returns the error measures.

    ``delta`` compares against ``exp(-iE tau) Phi0`` with
    ``tau = tau_factor * eps``; ``delta_other`` uses the other of the two
    admissible reference times (``eps`` or ``2 eps``).
    """
    params = WalkParams(grid, spec.mass)
    pot = uniform_b_potential(UniformMagneticSpec(spec.beta))
    phi0 = eigenstate_field(grid, spec)
    phi1 = step_em(phi0, params, pot, 0.0, potential_time)
    other = 1.0 if tau_factor == 2.0 else 2.0

    def delta(fac):
        return l1_distance(phi1, phi0.with_data(np.exp(-1j * spec.energy * fac * grid.eps) * phi0.data))

    overlap = inner_product(phi0, phi1)
    return {
        "delta": delta(tau_factor),
        "delta_other": delta(other),
        "fidelity_deviation": 1.0 - abs(overlap),
        "overlap": overlap,
        "phi0": phi0,
        "phi1": phi1,
    }


def loglog_slope(eps, delta) -> float:
    return float(np.polyfit(np.log(eps), np.log(delta), 1)[0])


def run_convergence(cfg: RunConfig) -> dict:
    spec = cfg.landau_spec()
    if cfg.r_max is None:
        raise ConfigError("convergence needs r_max so every eps covers the same window")
    tau_factor = 2.0 if cfg.tau == "2eps" else 1.0

    def one(n_theta):
        grid = cfg.grid(n_theta)
        t0 = time.perf_counter()
        try:
            e = one_step_errors(grid, spec, tau_factor, cfg.potential_time)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        dt = time.perf_counter() - t0
        log.info("n_theta=%d eps=%.5g delta=%.6g (%.2fs)", n_theta, grid.eps, e["delta"], dt)
        return ConvergenceRow(n_theta, grid.eps, e["delta"], e["fidelity_deviation"],
                              e["delta_other"], dt)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = list(pool.map(one, cfg.n_theta_list))
    rows.sort(key=lambda r: r.eps, reverse=True)

    out = _outdir(cfg)
    with open(out / "convergence.csv", "w", newline="") as fh:
        fh.write(f"# format: {CONVERGENCE_FORMAT} tau={cfg.tau}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_theta", "eps", "delta", "fidelity_deviation", "delta_other_tau"])
        for r in rows:
            w.writerow([r.n_theta, repr(r.eps), repr(r.delta), repr(r.fidelity_deviation),
                        repr(r.delta_other_tau)])
    with open(out / "convergence_timing.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_theta", "runtime_s"])
        for r in rows:
            w.writerow([r.n_theta, f"{r.runtime:.3f}"])

    eps = np.array([r.eps for r in rows])
    delta = np.array([r.delta for r in rows])
    fid = np.array([r.fidelity_deviation for r in rows])
    slope = loglog_slope(eps, delta) if len(rows) >= 2 else float("nan")
    if cfg.plot:
        from .plotting import plot_convergence

        plot_convergence(eps, delta, out / "convergence.png", fid, slope,
                         title=f"n={spec.n}, alpha={spec.alpha}, Bq={spec.beta}, m={spec.mass}")
    summary = {
        "command": "convergence",
        "landau": spec.as_dict(),
        "tau": cfg.tau,
        "rows": [
            {"n_theta": r.n_theta, "eps": r.eps, "delta": r.delta,
             "fidelity_deviation": r.fidelity_deviation, "delta_other_tau": r.delta_other_tau}
            for r in rows
        ],
        "slope": slope,
        "delta_strictly_decreasing": bool(np.all(np.diff(delta) < 0)),
        "fidelity_deviation_decreasing": bool(np.all(np.diff(fid) < 0)),
    }
    write_json(out / "convergence.json", summary)
    return summary


def run_landau_check(cfg: RunConfig, steps: int | None = None) -> dict:
    spec = cfg.landau_spec()
    grid = cfg.grid()
    tau_factor = 2.0 if cfg.tau == "2eps" else 1.0
    try:
        e = one_step_errors(grid, spec, tau_factor, cfg.potential_time)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    phi0 = e["phi0"]
    radii = np.linspace(1.0, 20.0, 191)
    res_m, res_p = ode_residual(spec, radii)
    n_steps = 50 if steps is None else steps
    params = WalkParams(grid, spec.mass)
    pot = uniform_b_potential(UniformMagneticSpec(spec.beta))
    phiN = evolve(phi0, params, pot, n_steps, cfg.potential_time)
    phase = float(np.angle(e["overlap"]))
    report = {
        "command": "landau-check",
        "landau": spec.as_dict(),
        "grid": grid_dict(grid),
        "tau": cfg.tau,
        "fidelity": abs(e["overlap"]),
        "fidelity_deviation": e["fidelity_deviation"],
        "delta": e["delta"],
        "delta_other_tau": e["delta_other"],
        "eigenphase": phase,
        "reference_phase_eps": float(np.angle(np.exp(-1j * spec.energy * grid.eps))),
        "reference_phase_2eps": float(np.angle(np.exp(-2j * spec.energy * grid.eps))),
        "angular_momentum": angular_momentum(phi0),
        "ode_residual_max": float(max(res_m.max(), res_p.max())),
        "normalization_quadrature": normalization_quadrature_check(spec),
        "normalization_diagnostics": {k: float(v) for k, v in phi0.meta.items()},
        "even_mode_fraction_after_steps": even_mode_energy_fraction(phiN),
        "steps": n_steps,
    }
    checks = {
        "angular_momentum": abs(report["angular_momentum"] - spec.kappa) < 1e-10,
        "ode_residual": report["ode_residual_max"] < 1e-10,
        "normalization": abs(report["normalization_quadrature"] - 1.0) < 1e-6,
        "even_mode_fraction": report["even_mode_fraction_after_steps"] < 1e-12,
    }
    report["checks"] = checks
    write_json(_outdir(cfg) / "landau-check.json", report)
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise ToleranceError(f"landau-check failed: {', '.join(failed)}", report)
    return report


GEOMETRY_TOL = 1e-7


def _random_metric(rng: np.random.Generator) -> geo.MetricSpec:
    a, b, c, w = rng.uniform(0.1, 0.5, size=4)

    def diag(t, r, th):
        return (1.0 + a * np.sin(w * t + r) ** 2,
                -(1.0 + b * r * r),
                -(r * r) * (1.0 + c * np.cos(th + w * t) ** 2))

    return geo.MetricSpec(diag, "random")


def geometry_checks(metric_override: geo.MetricSpec | None = None, seed: int = 7) -> dict:
    """Closed-form comparison for the polar metric plus property checks."""
    metric = metric_override or geo.polar_metric()
    failures = []
    results = {"polar": [], "flat": {}, "random": {}, "walk_angles": {}}
    sigma1 = np.array([[0, 1], [1, 0]], dtype=complex)
    for r in (1.5, 2.0, 5.0):
        pt = (0.0, r, 0.3)
        gam = geo.christoffel(metric, pt)
        om = geo.ricci_rotation(metric, pt)
        sc = geo.spin_connection(metric, pt)
        expected = {
            "Gamma^r_thth": (gam[1, 2, 2], -r),
            "Gamma^th_rth": (gam[2, 1, 2], 1.0 / r),
            "Gamma^th_thr": (gam[2, 2, 1], 1.0 / r),
            "omega^1_th2": (om[1, 2, 2], -1.0),
            "omega^2_th1": (om[2, 2, 1], 1.0),
        }
        entry = {"r": r}
        for name, (got, want) in expected.items():
            dev = abs(float(got) - want)
            entry[name] = {"value": float(got), "expected": want, "deviation": dev}
            if dev > GEOMETRY_TOL:
                failures.append(f"{name} at r={r}: {float(got):.9g} vs {want:.9g}")
        dev = float(np.max(np.abs(sc[2] - (-0.5j) * sigma1)))
        dev_other = float(np.max(np.abs(sc[:2])))
        entry["Gamma_theta_deviation"] = dev
        entry["Gamma_t_r_max"] = dev_other
        if dev > GEOMETRY_TOL or dev_other > GEOMETRY_TOL:
            failures.append(f"spin connection at r={r}: deviation {max(dev, dev_other):.3e}")
        results["polar"].append(entry)

    flat = geo.flat_metric()
    pt = (0.2, 0.7, -0.4)
    flat_max = max(float(np.max(np.abs(geo.christoffel(flat, pt)))),
                   float(np.max(np.abs(geo.ricci_rotation(flat, pt)))),
                   float(np.max(np.abs(geo.spin_connection(flat, pt)))))
    results["flat"] = {"max_abs": flat_max}
    if flat_max > 1e-9:
        failures.append(f"flat connection not zero: {flat_max:.3e}")

    rng = np.random.default_rng(seed)
    sym, anti, compat = 0.0, 0.0, 0.0
    for _ in range(10):
        m = _random_metric(rng)
        pt = (rng.uniform(-1, 1), rng.uniform(1, 3), rng.uniform(0, 2 * np.pi))
        gam = geo.christoffel(m, pt)
        sym = max(sym, float(np.max(np.abs(gam - np.swapaxes(gam, 1, 2)))))
        low = geo.lower_frame_index(geo.ricci_rotation(m, pt))
        anti = max(anti, float(np.max(np.abs(low + np.swapaxes(low, 1, 2)))))
        compat = max(compat, geo.metric_compatibility_residual(m, pt))
    results["random"] = {"christoffel_symmetry": sym, "omega_antisymmetry": anti,
                         "metric_compatibility": compat}
    if sym > 1e-12:
        failures.append(f"Christoffel symmetry violated: {sym:.3e}")
    if anti > GEOMETRY_TOL:
        failures.append(f"lowered omega antisymmetry violated: {anti:.3e}")
    if compat > GEOMETRY_TOL:
        failures.append(f"metric compatibility violated: {compat:.3e}")

    worst = 0.0
    for r in np.linspace(1.0, 100.0, 397):
        try:
            worst = max(worst, geo.verify_walk_angles(float(r))["max_deviation"])
        except ValueError as exc:
            failures.append(str(exc))
            break
    results["walk_angles"] = {"max_deviation": worst}
    results["failures"] = failures
    results["passed"] = not failures
    return results


def typo_metric() -> geo.MetricSpec:
    """Polar metric with ``g_thth = -r^3``; negative control."""
    return geo.MetricSpec(lambda t, r, th: (1.0, -1.0, -r ** 3), "polar-typo")


def run_geometry_verify(cfg: RunConfig, inject_typo: bool = False) -> dict:
    results = geometry_checks(typo_metric() if inject_typo else None)
    results["command"] = "geometry-verify"
    write_json(_outdir(cfg) / "geometry-verify.json", results)
    if not results["passed"]:
        raise ToleranceError("; ".join(results["failures"]), results)
    return results

